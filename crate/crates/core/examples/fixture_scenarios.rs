//! Generates each synthetic scenario and shows the property it is built for.

use affect_score::continuous::{ebs_raw, ecs_raw, ess_raw};
use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::types::Calibration;
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    let calib = Calibration::default();
    let cfg = DtwConfig::default();
    for scenario in [Scenario::Mirror, Scenario::Balance, Scenario::Unstable] {
        let f = generate_fixture(&FixtureSpec::new(scenario), 1)?;
        let t = &f.dialogues[0].turns()[0];
        println!(
            "{scenario:?}: raw ecs {:.3}, raw ebs {:?}, raw ess {:.3}",
            ecs_raw(t.user(), t.machine(), &cfg),
            ebs_raw(t.user(), t.machine(), &calib, &cfg),
            ess_raw(t.machine(), &calib)
        );
    }

    let dir = std::env::args().nth(1);
    let f = generate_fixture(&FixtureSpec::new(Scenario::Golden), 2024)?;
    println!(
        "golden: {} dialogues, {} ratings",
        f.dialogues.len(),
        f.ratings.len()
    );
    if let Some(dir) = dir {
        for p in f.write(dir.as_ref())? {
            println!("  wrote {}", p.display());
        }
    }
    Ok(())
}

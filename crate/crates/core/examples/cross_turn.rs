//! Dialogue-level scores over several turns, including the cross-turn
//! stability term.

use affect_score::continuous::{ct_ess_raw, score_dialogue};
use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::pipeline::score_continuous;
use affect_score::types::Calibration;
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    let cfg = DtwConfig::default();
    let fixture = generate_fixture(&FixtureSpec::new(Scenario::Separated), 3)?;

    let eval = score_continuous(&fixture.dialogues, &Calibration::default(), &cfg)?;
    let d = &fixture.dialogues[0];
    println!(
        "{} / {}: {} turns",
        d.model_id(),
        d.dialogue_id(),
        d.turns().len()
    );
    println!("raw CT-ESS {:.4}", ct_ess_raw(d, &cfg).unwrap_or(0.0));

    let s = score_dialogue(d, &eval.calibration, &cfg)?;
    for (i, t) in s.per_turn.iter().enumerate() {
        println!(
            "  turn {i}: ecs {} ebs {:?} ess {} ers {}",
            t.ecs,
            t.ebs.map(|v| v.value()),
            t.ess,
            t.ers
        );
    }
    println!(
        "CT-ECS {} CT-EBS {} CT-ESS {} CT-ERS {}",
        s.ct_ecs,
        s.ct_ebs.map_or("absent".into(), |v| v.to_string()),
        s.ct_ess,
        s.ct_ers
    );

    for (model, row) in &eval.models {
        println!(
            "{model}: ct_ers {} over {} dialogues",
            row.ct_ers, row.n_dialogues
        );
    }
    Ok(())
}

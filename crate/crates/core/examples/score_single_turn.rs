//! Scores one user/machine exchange: contagion, balancing, stability and ERS.

use std::collections::BTreeMap;

use affect_score::calibration::fit_bounds;
use affect_score::continuous::{raw_turn, score_turn};
use affect_score::types::{Calibration, DialogueTurn, Metric, TurnTrajectories};
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    // A frustrated user: low valence, high arousal, low dominance.
    let user = TurnTrajectories::from_samples(
        vec![-0.40, -0.45, -0.50, -0.45],
        vec![0.60, 0.70, 0.75, 0.70],
        vec![0.00, -0.05, -0.10, -0.05],
    )?;
    let calm = TurnTrajectories::from_samples(
        vec![-0.20, -0.24, -0.29, -0.24],
        vec![0.50, 0.60, 0.64, 0.60],
        vec![0.10, 0.05, 0.00, 0.05],
    )?;
    let erratic = TurnTrajectories::from_samples(
        vec![0.30, -0.60, 0.40, -0.50],
        vec![0.10, 0.90, 0.00, 0.80],
        vec![0.40, -0.40, 0.30, -0.30],
    )?;

    let cfg = DtwConfig::default();
    let base = Calibration::default();
    let turns = [
        (
            "mirror",
            DialogueTurn::unlabeled(user.clone(), user.clone())?,
        ),
        ("calm", DialogueTurn::unlabeled(user.clone(), calm)?),
        ("erratic", DialogueTurn::unlabeled(user.clone(), erratic)?),
    ];

    // Bounds come from the raw scores of everything being compared.
    let raws: Vec<_> = turns
        .iter()
        .map(|(_, t)| raw_turn(t, &base, &cfg))
        .collect();
    let mut bounds = BTreeMap::new();
    bounds.insert(
        Metric::Ecs,
        fit_bounds(&raws.iter().map(|r| r.ecs).collect::<Vec<_>>())?,
    );
    bounds.insert(
        Metric::Ess,
        fit_bounds(&raws.iter().map(|r| r.ess).collect::<Vec<_>>())?,
    );
    bounds.insert(
        Metric::Ebs,
        fit_bounds(&raws.iter().filter_map(|r| r.ebs).collect::<Vec<_>>())?,
    );
    let calib = base.with_norm_bounds(bounds);

    println!(
        "{:<8} {:>8} {:>8} {:>8} | {:>6} {:>6} {:>6} {:>6}",
        "reply", "raw ecs", "raw ebs", "raw ess", "ecs", "ebs", "ess", "ers"
    );
    for ((name, turn), raw) in turns.iter().zip(&raws) {
        let s = score_turn(turn, &calib, &cfg)?;
        println!(
            "{name:<8} {:>8.3} {:>8.3} {:>8.3} | {} {} {} {}",
            raw.ecs,
            raw.ebs.unwrap_or(f64::NAN),
            raw.ess,
            s.ecs,
            s.ebs.map_or("   -  ".into(), |v| v.to_string()),
            s.ess,
            s.ers
        );
    }
    println!("extreme dims: {:?}", raws[0].extreme_flags);
    Ok(())
}

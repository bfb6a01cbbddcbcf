//! Aligns two affect trajectories and prints the warping path.

use affect_score::dtw::{dtw_distance, dtw_path};
use affect_score::types::Trajectory;
use affect_score::{DtwConfig, LocalCost};

fn main() -> affect_score::Result<()> {
    // The machine reaches the same arousal peak one second late.
    let user = Trajectory::from_samples(vec![0.1, 0.4, 0.8, 0.4, 0.1])?;
    let machine = Trajectory::from_samples(vec![0.1, 0.1, 0.4, 0.8, 0.4, 0.1])?;

    let plain = DtwConfig::default();
    println!(
        "abs cost:        {:.4}",
        dtw_distance(&user, &machine, &plain)?
    );

    let squared = DtwConfig {
        local_cost: LocalCost::SquaredDifference,
        ..plain
    };
    println!(
        "squared cost:    {:.4}",
        dtw_distance(&user, &machine, &squared)?
    );

    let per_step = DtwConfig {
        path_normalize: true,
        ..plain
    };
    println!(
        "per-step cost:   {:.4}",
        dtw_distance(&user, &machine, &per_step)?
    );

    let lockstep: f64 = user
        .samples()
        .iter()
        .zip(machine.samples())
        .map(|(a, b)| (a - b).abs())
        .sum();
    println!("lock-step cost:  {lockstep:.4}");

    println!("path (user -> machine):");
    for (i, j) in dtw_path(&user, &machine, &plain)? {
        println!(
            "  {i} -> {j}   {:.2} vs {:.2}",
            user.samples()[i],
            machine.samples()[j]
        );
    }
    Ok(())
}

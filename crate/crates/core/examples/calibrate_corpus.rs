//! Derives extreme-affect thresholds, balancing deltas and the stability
//! threshold from a synthetic reference corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use affect_score::calibration::{
    derive_thresholds, derive_thresholds_with, CorpusStats, PercentileAnchors,
};
use affect_score::io::calibration_to_json;
use affect_score::types::{EmotionDimension, TurnTrajectories};

fn main() -> affect_score::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut stats = CorpusStats::new();
    for _ in 0..200 {
        let n = rng.random_range(5..20);
        let mut walk = |center: f64| -> Vec<f64> {
            let mut x = center;
            (0..n)
                .map(|_| {
                    x += rng.random_range(-0.05..0.05);
                    x
                })
                .collect()
        };
        let turn = TurnTrajectories::from_samples(walk(0.1), walk(0.25), walk(0.3))?;
        stats.add_turn(&turn);
    }
    println!(
        "{} frames per dimension, {} pooled frame deltas",
        stats.frames(EmotionDimension::Arousal).len(),
        stats.pooled_abs_deltas().len()
    );

    let calib = derive_thresholds(&stats)?;
    print!("{}", calibration_to_json(&calib));

    let wider = derive_thresholds_with(&stats, &PercentileAnchors::default().shifted(5.0)?)?;
    println!(
        "arousal threshold at P80 {:.4}, at P85 {:.4}",
        calib.dimension(EmotionDimension::Arousal).extreme_threshold,
        wider.dimension(EmotionDimension::Arousal).extreme_threshold
    );
    Ok(())
}

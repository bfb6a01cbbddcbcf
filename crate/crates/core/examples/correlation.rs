//! Agreement between the continuous, categorical and perceptual families.

use affect_score::analysis::{pearson, rank_models, spearman};
use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::pipeline::{
    correlate_vectors, dialogue_score_vectors, run_evaluation, CorrelationUnit, EvaluationInputs,
};
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [1.0, 3.0, 2.0, 4.0];
    println!(
        "pearson {:.3}, spearman {:.3}",
        pearson(&x, &y)?,
        spearman(&x, &y)?
    );
    println!(
        "ranking {:?}",
        rank_models(&[("a", 0.5), ("b", 0.9), ("c", 0.5)])
    );

    let mut spec = FixtureSpec::new(Scenario::Separated);
    spec.models = 4;
    let f = generate_fixture(&spec, 8)?;
    let report = run_evaluation(
        &EvaluationInputs {
            dialogues: f.dialogues,
            ratings: Some(f.ratings),
            ..Default::default()
        },
        &DtwConfig::default(),
    )?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.correlations).expect("serializable")
    );

    let per_dialogue = correlate_vectors(
        &dialogue_score_vectors(&report.dialogues),
        CorrelationUnit::PerDialogue,
    );
    if let Some(c) = per_dialogue {
        println!(
            "per dialogue (n = {}): min pearson {:?}",
            c.n,
            c.min_pearson()
        );
    }
    Ok(())
}

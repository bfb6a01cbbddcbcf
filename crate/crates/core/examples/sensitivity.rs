//! Checks whether model rankings survive moving every percentile anchor.

use affect_score::analysis::sensitivity_analysis;
use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::io::corpus_from_dialogues;
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    let f = generate_fixture(&FixtureSpec::new(Scenario::Separated), 7)?;
    let corpus = corpus_from_dialogues(&f.dialogues);
    for shift in [0.0, 2.5, 5.0, 10.0] {
        let r = sensitivity_analysis(&corpus, &f.dialogues, shift, &DtwConfig::default())?;
        println!(
            "shift {shift:>4}: ranking changed {:<5} max score delta {:.4} {:?}",
            r.ranking_changed, r.max_abs_score_delta, r.changed_columns
        );
    }
    Ok(())
}

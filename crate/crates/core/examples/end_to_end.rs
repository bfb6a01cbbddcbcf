//! Full evaluation from files on disk: fixture -> dialogues + ratings ->
//! report.json, models.csv, dialogues.csv, calibration.json.

use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::io::{ingest_dialogues, read_ratings};
use affect_score::pipeline::{run_evaluation, EvaluationInputs};
use affect_score::report::OutputFormat;
use affect_score::DtwConfig;

fn main() -> affect_score::Result<()> {
    env_logger::init();
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("affect-score-demo"));

    generate_fixture(&FixtureSpec::new(Scenario::Separated), 11)?.write(&out)?;
    let inputs = EvaluationInputs {
        dialogues: ingest_dialogues(&out.join("dialogues"))?,
        ratings: Some(read_ratings(&out.join("ratings.csv"))?),
        ..Default::default()
    };
    let report = run_evaluation(&inputs, &DtwConfig::default())?;
    for path in report.write(&out.join("report"), OutputFormat::Both)? {
        println!("wrote {}", path.display());
    }
    print!("{}", report.models_csv());
    println!("ERS ranking: {:?}", report.rankings["ers"]);
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use affect_score::calibration::derive_thresholds;
use affect_score::fixture::{generate_fixture, FixtureSpec, Scenario};
use affect_score::io;
use affect_score::pipeline::{self, CorrelationUnit, EvaluationInputs};
use affect_score::report::OutputFormat;
use affect_score::types::EmotionDimension;
use affect_score::{analysis, perceptual, DtwConfig, Error, LocalCost};

#[derive(Parser)]
#[command(
    name = "affect-score",
    version,
    about = "Emotional-reasoning metrics for dialogue models"
)]
struct Cli {
    /// Local DTW cost.
    #[arg(long, global = true, value_enum, default_value_t = DtwCost::Abs)]
    dtw_cost: DtwCost,
    /// Divide DTW costs by the warping path length.
    #[arg(long, global = true)]
    dtw_path_normalize: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DtwCost {
    Abs,
    Sq,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Model,
    Dialogue,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Mirror,
    Balance,
    Unstable,
    Separated,
    Golden,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dim {
    Valence,
    Arousal,
    Dominance,
}

#[derive(Subcommand)]
enum Command {
    /// Derive thresholds and deltas from a reference corpus.
    Calibrate {
        /// Dialogue directory/file or a `{"segments": [...]}` corpus file.
        corpus: PathBuf,
        /// Calibration file, or a directory to hold `calibration.json`
        /// (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full evaluation: continuous, categorical and perceptual columns.
    Score {
        dialogues: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        ratings: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Categorical scores per dialogue and model.
    Categorical {
        dialogues: PathBuf,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate human ratings per model.
    Perceptual {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlate continuous, categorical and perceptual ERS.
    Correlate {
        dialogues: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Unit::Model)]
        unit: Unit,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-score under percentile anchors shifted by +/- the given amount.
    Sensitivity {
        dialogues: PathBuf,
        /// Reference corpus; defaults to the dialogues themselves.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate deterministic synthetic dialogues.
    Fixture {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        models: Option<usize>,
        #[arg(long)]
        dialogues: Option<usize>,
        #[arg(long)]
        turns: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        jumps: Option<usize>,
        #[arg(long)]
        jump_size: Option<f64>,
        #[arg(long, value_enum, value_delimiter = ',')]
        jump_dims: Vec<Dim>,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = DtwConfig {
        local_cost: match cli.dtw_cost {
            DtwCost::Abs => LocalCost::AbsoluteDifference,
            DtwCost::Sq => LocalCost::SquaredDifference,
        },
        path_normalize: cli.dtw_path_normalize,
    };
    let optional = |p: &Option<PathBuf>, what: &str| -> Option<PathBuf> {
        match p {
            Some(p) if !p.exists() => {
                log::warn!(
                    "{what} file {} not found; its columns are omitted",
                    p.display()
                );
                None
            }
            other => other.clone(),
        }
    };
    match cli.command {
        Command::Calibrate { corpus, out } => {
            let calib = derive_thresholds(&io::read_corpus(&corpus)?)?;
            match out {
                Some(p) if p.is_dir() => {
                    io::write_calibration(&p.join("calibration.json"), &calib)?
                }
                Some(p) => io::write_calibration(&p, &calib)?,
                None => print!("{}", io::calibration_to_json(&calib)),
            }
        }
        Command::Score {
            dialogues,
            calibration,
            matrix,
            ratings,
            out,
            format,
        } => {
            let inputs = EvaluationInputs {
                dialogues: io::ingest_dialogues(&dialogues)?,
                calibration: optional(&calibration, "calibration")
                    .map(|p| io::read_calibration(&p))
                    .transpose()?,
                matrix: optional(&matrix, "matrix")
                    .map(|p| io::read_matrix(&p))
                    .transpose()?,
                ratings: optional(&ratings, "ratings")
                    .map(|p| io::read_ratings(&p))
                    .transpose()?,
            };
            let report = pipeline::run_evaluation(&inputs, &cfg)?;
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
                Format::Both => OutputFormat::Both,
            };
            for p in report.write(&out, format)? {
                println!("{}", p.display());
            }
        }
        Command::Categorical {
            dialogues,
            matrix,
            out,
        } => {
            let matrix = match optional(&matrix, "matrix") {
                Some(p) => io::read_matrix(&p)?,
                None => Default::default(),
            };
            let summary =
                pipeline::categorical_summary(&io::ingest_dialogues(&dialogues)?, &matrix)?;
            emit(&summary, out.as_deref())?;
        }
        Command::Perceptual { ratings, out } => {
            let summary = perceptual::aggregate_ratings(&io::read_ratings(&ratings)?)?;
            emit(&summary, out.as_deref())?;
        }
        Command::Correlate {
            dialogues,
            ratings,
            calibration,
            matrix,
            unit,
            out,
        } => {
            let inputs = EvaluationInputs {
                dialogues: io::ingest_dialogues(&dialogues)?,
                calibration: calibration.map(|p| io::read_calibration(&p)).transpose()?,
                matrix: matrix.map(|p| io::read_matrix(&p)).transpose()?,
                ratings: Some(io::read_ratings(&ratings)?),
            };
            let report = pipeline::run_evaluation(&inputs, &cfg)?;
            let (vectors, unit) = match unit {
                Unit::Model => (
                    pipeline::score_vectors(&report.models),
                    CorrelationUnit::PerModel,
                ),
                Unit::Dialogue => (
                    pipeline::dialogue_score_vectors(&report.dialogues),
                    CorrelationUnit::PerDialogue,
                ),
            };
            let summary = pipeline::correlate_vectors(&vectors, unit).ok_or_else(|| {
                Error::EmptyInput(format!(
                    "need at least 2 units with continuous, categorical and perceptual scores, got {}",
                    vectors.len()
                ))
            })?;
            emit(&summary, out.as_deref())?;
        }
        Command::Sensitivity {
            dialogues,
            corpus,
            shift,
            out,
        } => {
            let dialogues = io::ingest_dialogues(&dialogues)?;
            let stats = match corpus {
                Some(p) => io::read_corpus(&p)?,
                None => io::corpus_from_dialogues(&dialogues),
            };
            let report = analysis::sensitivity_analysis(&stats, &dialogues, shift, &cfg)?;
            emit(&report, out.as_deref())?;
        }
        Command::Fixture {
            scenario,
            seed,
            out,
            models,
            dialogues,
            turns,
            samples,
            jumps,
            jump_size,
            jump_dims,
        } => {
            let scenario = match scenario {
                ScenarioArg::Mirror => Scenario::Mirror,
                ScenarioArg::Balance => Scenario::Balance,
                ScenarioArg::Unstable => Scenario::Unstable,
                ScenarioArg::Separated => Scenario::Separated,
                ScenarioArg::Golden => Scenario::Golden,
            };
            let base = FixtureSpec::new(scenario);
            let spec = FixtureSpec {
                models: models.unwrap_or(base.models),
                dialogues_per_model: dialogues.unwrap_or(base.dialogues_per_model),
                turns_per_dialogue: turns.unwrap_or(base.turns_per_dialogue),
                samples_per_turn: samples.unwrap_or(base.samples_per_turn),
                jump_count: jumps.unwrap_or(base.jump_count),
                jump_size: jump_size.unwrap_or(base.jump_size),
                jump_dims: if jump_dims.is_empty() {
                    base.jump_dims.clone()
                } else {
                    jump_dims
                        .iter()
                        .map(|d| match d {
                            Dim::Valence => EmotionDimension::Valence,
                            Dim::Arousal => EmotionDimension::Arousal,
                            Dim::Dominance => EmotionDimension::Dominance,
                        })
                        .collect()
                },
                scenario,
            };
            for p in generate_fixture(&spec, seed)?.write(&out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}

//! Emotional-reasoning evaluation for spoken dialogue systems.
//!
//! Scores how a dialogue model's affective response relates to its user,
//! from frame-level valence / arousal / dominance trajectories, categorical
//! emotion labels and human ratings:
//!
//! * [`continuous`]: contagion (ECS), balancing (EBS), stability (ESS) and
//!   their mean (ERS), per turn and across turns, built on [`dtw`].
//! * [`categorical`]: label-pair rationality scores.
//! * [`perceptual`]: aggregated 1-5 human ratings.
//! * [`calibration`]: percentile thresholds and min-max bounds.
//! * [`analysis`]: correlation, ranking and calibration sensitivity.
//! * [`pipeline`] / [`report`]: the end-to-end two-pass evaluation and its
//!   JSON / CSV report.
//!
//! ```
//! use affect_score::{pipeline, types::*, DtwConfig};
//!
//! let user = TurnTrajectories::from_samples(vec![0.1, 0.3], vec![0.5, 0.6], vec![0.2, 0.2])?;
//! let echo = DialogueTurn::unlabeled(user.clone(), user.clone())?;
//! let flat = TurnTrajectories::from_samples(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0])?;
//! let dull = DialogueTurn::unlabeled(user, flat)?;
//! let inputs = pipeline::EvaluationInputs {
//!     dialogues: vec![
//!         Dialogue::new("d1", "echo", vec![echo])?,
//!         Dialogue::new("d1", "dull", vec![dull])?,
//!     ],
//!     ..Default::default()
//! };
//! let report = pipeline::run_evaluation(&inputs, &DtwConfig::default())?;
//! assert_eq!(report.rankings["ecs"], ["echo", "dull"]);
//! # Ok::<(), affect_score::Error>(())
//! ```

pub mod analysis;
pub mod calibration;
pub mod categorical;
pub mod continuous;
pub mod dtw;
mod error;
pub mod fixture;
pub mod io;
pub mod perceptual;
pub mod pipeline;
pub mod report;
pub mod types;

pub use dtw::{DtwConfig, LocalCost};
pub use error::{Error, Result};

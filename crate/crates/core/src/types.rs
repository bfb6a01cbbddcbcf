//! Domain data model shared by every metric module.
//!
//! All types validate on construction and are immutable afterwards, so a
//! value that exists is a value that satisfies its invariants.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three continuous affect dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionDimension {
    Valence,
    Arousal,
    Dominance,
}

impl EmotionDimension {
    pub const ALL: [EmotionDimension; 3] = [
        EmotionDimension::Valence,
        EmotionDimension::Arousal,
        EmotionDimension::Dominance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmotionDimension::Valence => "valence",
            EmotionDimension::Arousal => "arousal",
            EmotionDimension::Dominance => "dominance",
        }
    }
}

impl fmt::Display for EmotionDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value for each of valence, arousal and dominance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerDim<T> {
    pub valence: T,
    pub arousal: T,
    pub dominance: T,
}

impl<T> PerDim<T> {
    pub fn new(valence: T, arousal: T, dominance: T) -> Self {
        PerDim {
            valence,
            arousal,
            dominance,
        }
    }

    pub fn from_fn(mut f: impl FnMut(EmotionDimension) -> T) -> Self {
        PerDim {
            valence: f(EmotionDimension::Valence),
            arousal: f(EmotionDimension::Arousal),
            dominance: f(EmotionDimension::Dominance),
        }
    }

    pub fn get(&self, dim: EmotionDimension) -> &T {
        match dim {
            EmotionDimension::Valence => &self.valence,
            EmotionDimension::Arousal => &self.arousal,
            EmotionDimension::Dominance => &self.dominance,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerDim<U> {
        PerDim {
            valence: f(&self.valence),
            arousal: f(&self.arousal),
            dominance: f(&self.dominance),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (EmotionDimension, &T)> {
        EmotionDimension::ALL
            .into_iter()
            .map(move |d| (d, self.get(d)))
    }
}

impl<T> Index<EmotionDimension> for PerDim<T> {
    type Output = T;

    fn index(&self, dim: EmotionDimension) -> &T {
        self.get(dim)
    }
}

/// A uniformly sampled affect sequence for one dimension of one speaker turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Trajectory {
    pub const DEFAULT_SAMPLE_RATE: f64 = 1.0;

    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                format!("samples[{i}]"),
                format!("non-finite value {}", samples[i]),
            ));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::validation(
                "sample_rate",
                format!("must be a positive finite number, got {sample_rate}"),
            ));
        }
        Ok(Trajectory {
            samples,
            sample_rate,
        })
    }

    /// Trajectory at the default rate of one sample per second.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, Self::DEFAULT_SAMPLE_RATE)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Every sample shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Trajectory {
        Trajectory {
            samples: self.samples.iter().map(|v| v + offset).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Valence, arousal and dominance trajectories of one speaker turn.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnTrajectories {
    dims: PerDim<Trajectory>,
}

impl TurnTrajectories {
    pub fn new(valence: Trajectory, arousal: Trajectory, dominance: Trajectory) -> Result<Self> {
        let dims = PerDim::new(valence, arousal, dominance);
        let len = dims.valence.len();
        let rate = dims.valence.sample_rate();
        for (dim, t) in dims.iter() {
            if t.len() != len {
                return Err(Error::validation(
                    dim.name(),
                    format!("length {} differs from valence length {len}", t.len()),
                ));
            }
            if t.sample_rate() != rate {
                return Err(Error::validation(
                    dim.name(),
                    format!(
                        "sample_rate {} differs from valence rate {rate}",
                        t.sample_rate()
                    ),
                ));
            }
        }
        Ok(TurnTrajectories { dims })
    }

    /// Builds a turn from raw sample vectors at the default rate.
    pub fn from_samples(valence: Vec<f64>, arousal: Vec<f64>, dominance: Vec<f64>) -> Result<Self> {
        Self::new(
            Trajectory::from_samples(valence)?,
            Trajectory::from_samples(arousal)?,
            Trajectory::from_samples(dominance)?,
        )
    }

    pub fn get(&self, dim: EmotionDimension) -> &Trajectory {
        self.dims.get(dim)
    }

    pub fn valence(&self) -> &Trajectory {
        &self.dims.valence
    }

    pub fn arousal(&self) -> &Trajectory {
        &self.dims.arousal
    }

    pub fn dominance(&self) -> &Trajectory {
        &self.dims.dominance
    }

    pub fn dims(&self) -> &PerDim<Trajectory> {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate(&self) -> f64 {
        self.dims.valence.sample_rate()
    }
}

/// Discrete emotion category of an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricalLabel {
    Neutral,
    Happy,
    Angry,
    Sad,
}

impl CategoricalLabel {
    pub const ALL: [CategoricalLabel; 4] = [
        CategoricalLabel::Neutral,
        CategoricalLabel::Happy,
        CategoricalLabel::Angry,
        CategoricalLabel::Sad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoricalLabel::Neutral => "neutral",
            CategoricalLabel::Happy => "happy",
            CategoricalLabel::Angry => "angry",
            CategoricalLabel::Sad => "sad",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CategoricalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CategoricalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neutral" => Ok(CategoricalLabel::Neutral),
            "happy" => Ok(CategoricalLabel::Happy),
            "angry" => Ok(CategoricalLabel::Angry),
            "sad" => Ok(CategoricalLabel::Sad),
            other => Err(Error::validation(
                "label",
                format!("unknown label {other:?}, expected neutral|happy|angry|sad"),
            )),
        }
    }
}

/// A user utterance and the system's reply.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueTurn {
    user: TurnTrajectories,
    machine: TurnTrajectories,
    labels: Option<(CategoricalLabel, CategoricalLabel)>,
}

impl DialogueTurn {
    pub fn new(
        user: TurnTrajectories,
        machine: TurnTrajectories,
        user_label: Option<CategoricalLabel>,
        machine_label: Option<CategoricalLabel>,
    ) -> Result<Self> {
        if user.sample_rate() != machine.sample_rate() {
            return Err(Error::validation(
                "machine",
                format!(
                    "sample_rate {} differs from user rate {}",
                    machine.sample_rate(),
                    user.sample_rate()
                ),
            ));
        }
        let labels = match (user_label, machine_label) {
            (Some(u), Some(m)) => Some((u, m)),
            (None, None) => None,
            (Some(_), None) => {
                return Err(Error::validation(
                    "machine_label",
                    "missing while user_label is set",
                ))
            }
            (None, Some(_)) => {
                return Err(Error::validation(
                    "user_label",
                    "missing while machine_label is set",
                ))
            }
        };
        Ok(DialogueTurn {
            user,
            machine,
            labels,
        })
    }

    pub fn unlabeled(user: TurnTrajectories, machine: TurnTrajectories) -> Result<Self> {
        Self::new(user, machine, None, None)
    }

    pub fn user(&self) -> &TurnTrajectories {
        &self.user
    }

    pub fn machine(&self) -> &TurnTrajectories {
        &self.machine
    }

    pub fn user_label(&self) -> Option<CategoricalLabel> {
        self.labels.map(|(u, _)| u)
    }

    pub fn machine_label(&self) -> Option<CategoricalLabel> {
        self.labels.map(|(_, m)| m)
    }

    /// `(user, machine)` labels when the turn carries them.
    pub fn labels(&self) -> Option<(CategoricalLabel, CategoricalLabel)> {
        self.labels
    }
}

/// An ordered conversation between a user and one dialogue model.
#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    dialogue_id: String,
    model_id: String,
    turns: Vec<DialogueTurn>,
}

impl Dialogue {
    pub fn new(
        dialogue_id: impl Into<String>,
        model_id: impl Into<String>,
        turns: Vec<DialogueTurn>,
    ) -> Result<Self> {
        let dialogue_id = dialogue_id.into();
        let model_id = model_id.into();
        if dialogue_id.is_empty() {
            return Err(Error::validation("dialogue_id", "must not be empty"));
        }
        if model_id.is_empty() {
            return Err(Error::validation("model_id", "must not be empty"));
        }
        let Some(first) = turns.first() else {
            return Err(Error::validation("turns", "dialogue has no turns"));
        };
        let rate = first.user().sample_rate();
        if let Some(i) = turns.iter().position(|t| t.user().sample_rate() != rate) {
            return Err(Error::validation(
                format!("turns[{i}]"),
                format!("sample_rate differs from first turn ({rate})"),
            ));
        }
        Ok(Dialogue {
            dialogue_id,
            model_id,
            turns,
        })
    }

    pub fn dialogue_id(&self) -> &str {
        &self.dialogue_id
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn turns(&self) -> &[DialogueTurn] {
        &self.turns
    }

    pub fn sample_rate(&self) -> f64 {
        self.turns[0].user().sample_rate()
    }
}

/// Which side of the threshold counts as extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremeDirection {
    #[serde(rename = "above")]
    AboveIsExtreme,
    #[serde(rename = "below")]
    BelowIsExtreme,
}

impl ExtremeDirection {
    /// Strict comparison: a value sitting exactly on the threshold is not extreme.
    pub fn is_extreme(self, value: f64, threshold: f64) -> bool {
        match self {
            ExtremeDirection::AboveIsExtreme => value > threshold,
            ExtremeDirection::BelowIsExtreme => value < threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionCalibration {
    pub extreme_threshold: f64,
    pub extreme_direction: ExtremeDirection,
    /// Offset added to the user trajectory to form the balanced target path.
    pub delta: f64,
}

/// Continuous metrics that are min-max normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ecs,
    Ebs,
    Ess,
    CtEss,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Ecs, Metric::Ebs, Metric::Ess, Metric::CtEss];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ecs => "ecs",
            Metric::Ebs => "ebs",
            Metric::Ess => "ess",
            Metric::CtEss => "ct_ess",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dataset-level `(raw_min, raw_max)` used by min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct NormBounds {
    raw_min: f64,
    raw_max: f64,
}

#[derive(Deserialize)]
struct RawBounds {
    raw_min: f64,
    raw_max: f64,
}

impl TryFrom<RawBounds> for NormBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        NormBounds::new(raw.raw_min, raw.raw_max)
    }
}

impl NormBounds {
    pub fn new(raw_min: f64, raw_max: f64) -> Result<Self> {
        if !(raw_min.is_finite() && raw_max.is_finite()) {
            return Err(Error::validation("norm_bounds", "bounds must be finite"));
        }
        if raw_min >= raw_max {
            return Err(Error::validation(
                "norm_bounds",
                format!("raw_min {raw_min} must be < raw_max {raw_max}"),
            ));
        }
        Ok(NormBounds { raw_min, raw_max })
    }

    pub fn raw_min(&self) -> f64 {
        self.raw_min
    }

    pub fn raw_max(&self) -> f64 {
        self.raw_max
    }

    /// Min-max maps `raw` into [0, 1], clamping values outside the bounds.
    pub fn normalize(&self, raw: RawScore) -> NormalizedScore {
        NormalizedScore::clamped((raw - self.raw_min) / (self.raw_max - self.raw_min))
    }
}

/// Unbounded metric value; larger is better.
pub type RawScore = f64;

/// A score in [0, 1]. Serializes as JSON decimal text with six fractional
/// digits, the same text reports carry.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Deserialize)]
#[serde(try_from = "f64")]
pub struct NormalizedScore(f64);

impl Serialize for NormalizedScore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::value::RawValue::from_string(self.to_string())
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl NormalizedScore {
    pub const ZERO: NormalizedScore = NormalizedScore(0.0);
    pub const ONE: NormalizedScore = NormalizedScore(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            // folds -0.0 into +0.0
            Ok(NormalizedScore(value + 0.0))
        } else {
            Err(Error::validation(
                "score",
                format!("{value} is outside [0, 1]"),
            ))
        }
    }

    /// Clamps into [0, 1]; NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            return NormalizedScore(0.0);
        }
        NormalizedScore(value.clamp(0.0, 1.0) + 0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Arithmetic mean of a non-empty set of scores.
    pub fn mean(scores: &[NormalizedScore]) -> Option<NormalizedScore> {
        if scores.is_empty() {
            return None;
        }
        let sum: f64 = scores.iter().map(|s| s.0).sum();
        Some(NormalizedScore::clamped(sum / scores.len() as f64))
    }
}

impl TryFrom<f64> for NormalizedScore {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        NormalizedScore::new(value)
    }
}

impl From<NormalizedScore> for f64 {
    fn from(s: NormalizedScore) -> f64 {
        s.0
    }
}

impl fmt::Display for NormalizedScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// Thresholds, balancing offsets, stability jump threshold and normalization bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCalibration")]
pub struct Calibration {
    #[serde(flatten)]
    dims: PerDim<DimensionCalibration>,
    stability_threshold: f64,
    #[serde(default)]
    norm_bounds: BTreeMap<Metric, NormBounds>,
}

#[derive(Deserialize)]
struct RawCalibration {
    valence: DimensionCalibration,
    arousal: DimensionCalibration,
    dominance: DimensionCalibration,
    stability_threshold: f64,
    #[serde(default)]
    norm_bounds: BTreeMap<Metric, NormBounds>,
}

impl TryFrom<RawCalibration> for Calibration {
    type Error = Error;

    fn try_from(raw: RawCalibration) -> Result<Self> {
        Calibration::new(
            PerDim::new(raw.valence, raw.arousal, raw.dominance),
            raw.stability_threshold,
            raw.norm_bounds,
        )
    }
}

impl Default for Calibration {
    /// Constants fit on a large conversational reference corpus; no bounds.
    fn default() -> Self {
        Calibration {
            dims: PerDim {
                valence: DimensionCalibration {
                    extreme_threshold: -0.07,
                    extreme_direction: ExtremeDirection::BelowIsExtreme,
                    delta: 0.211,
                },
                arousal: DimensionCalibration {
                    extreme_threshold: 0.345,
                    extreme_direction: ExtremeDirection::AboveIsExtreme,
                    delta: -0.105,
                },
                dominance: DimensionCalibration {
                    extreme_threshold: 0.210,
                    extreme_direction: ExtremeDirection::BelowIsExtreme,
                    delta: 0.098,
                },
            },
            stability_threshold: 0.04,
            norm_bounds: BTreeMap::new(),
        }
    }
}

impl Calibration {
    pub fn new(
        dims: PerDim<DimensionCalibration>,
        stability_threshold: f64,
        norm_bounds: BTreeMap<Metric, NormBounds>,
    ) -> Result<Self> {
        for (dim, c) in dims.iter() {
            if !c.extreme_threshold.is_finite() {
                return Err(Error::validation(
                    format!("{dim}.extreme_threshold"),
                    "must be finite",
                ));
            }
            if !c.delta.is_finite() {
                return Err(Error::validation(format!("{dim}.delta"), "must be finite"));
            }
        }
        if !(stability_threshold.is_finite() && stability_threshold > 0.0) {
            return Err(Error::validation(
                "stability_threshold",
                format!("must be > 0, got {stability_threshold}"),
            ));
        }
        Ok(Calibration {
            dims,
            stability_threshold,
            norm_bounds,
        })
    }

    pub fn dimension(&self, dim: EmotionDimension) -> &DimensionCalibration {
        self.dims.get(dim)
    }

    pub fn dims(&self) -> &PerDim<DimensionCalibration> {
        &self.dims
    }

    pub fn stability_threshold(&self) -> f64 {
        self.stability_threshold
    }

    pub fn norm_bounds(&self) -> &BTreeMap<Metric, NormBounds> {
        &self.norm_bounds
    }

    pub fn bounds(&self, metric: Metric) -> Result<NormBounds> {
        self.norm_bounds
            .get(&metric)
            .copied()
            .ok_or(Error::MissingBounds(metric))
    }

    pub fn with_norm_bounds(mut self, norm_bounds: BTreeMap<Metric, NormBounds>) -> Self {
        self.norm_bounds = norm_bounds;
        self
    }
}

/// One annotator's 1-5 ratings of one model response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRating")]
pub struct RatingRecord {
    pub annotator_id: String,
    pub dialogue_id: String,
    pub model_id: String,
    er: u8,
    en: u8,
    rr: u8,
}

#[derive(Deserialize)]
struct RawRating {
    annotator_id: String,
    dialogue_id: String,
    model_id: String,
    er: i64,
    en: i64,
    rr: i64,
}

impl TryFrom<RawRating> for RatingRecord {
    type Error = Error;

    fn try_from(r: RawRating) -> Result<Self> {
        RatingRecord::new(r.annotator_id, r.dialogue_id, r.model_id, r.er, r.en, r.rr)
    }
}

impl RatingRecord {
    pub fn new(
        annotator_id: impl Into<String>,
        dialogue_id: impl Into<String>,
        model_id: impl Into<String>,
        er: i64,
        en: i64,
        rr: i64,
    ) -> Result<Self> {
        let check = |field: &'static str, value: i64| -> Result<u8> {
            if (1..=5).contains(&value) {
                Ok(value as u8)
            } else {
                Err(Error::RatingOutOfRange { field, value })
            }
        };
        Ok(RatingRecord {
            annotator_id: annotator_id.into(),
            dialogue_id: dialogue_id.into(),
            model_id: model_id.into(),
            er: check("er", er)?,
            en: check("en", en)?,
            rr: check("rr", rr)?,
        })
    }

    pub fn er(&self) -> u8 {
        self.er
    }

    pub fn en(&self) -> u8 {
        self.en
    }

    pub fn rr(&self) -> u8 {
        self.rr
    }
}

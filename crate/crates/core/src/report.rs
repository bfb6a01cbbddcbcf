//! Score report model and its JSON / CSV emission.
//!
//! Every score is written as decimal text with six fractional digits,
//! rounded half-to-even on the exact binary value, so the JSON and CSV
//! files carry identical numbers on every platform.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::analysis::ErsFamily;
use crate::categorical::ReasoningMatrix;
use crate::continuous::{DialogueScores, TurnScores};
use crate::dtw::DtwConfig;
use crate::error::{Error, Result};
use crate::perceptual::PerceptualSummary;
use crate::pipeline::{ContinuousEvaluation, ContinuousModelRow, CorrelationUnit};
use crate::types::{Calibration, Metric, NormalizedScore};

/// Six fractional digits, half-to-even; never emits a negative zero.
pub fn format_fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Text(String),
    Int(usize),
    Num(f64),
    Absent,
}

impl Cell {
    fn score(s: Option<NormalizedScore>) -> Cell {
        s.map_or(Cell::Absent, |v| Cell::Num(v.value()))
    }

    /// Absent balancing scores are written as 0.
    fn zero_if_absent(s: Option<NormalizedScore>) -> Cell {
        Cell::Num(s.map_or(0.0, NormalizedScore::value))
    }

    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Num(x) => format_fixed6(*x),
            Cell::Absent => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Text(t) => s.serialize_str(t),
            Cell::Int(n) => s.serialize_u64(*n as u64),
            Cell::Num(x) => RawValue::from_string(format_fixed6(*x))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Cell::Absent => s.serialize_none(),
        }
    }
}

struct Columns(Vec<(&'static str, Cell)>);

impl Serialize for Columns {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsSource {
    Fitted,
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool_version: String,
    pub dtw: DtwConfig,
    pub calibration: Calibration,
    pub bounds_source: BTreeMap<Metric, BoundsSource>,
    pub matrix: ReasoningMatrix,
    pub perceptual_averaging: String,
    pub categorical_average: String,
    pub n_models: usize,
    pub n_dialogues: usize,
}

impl Metadata {
    pub(crate) fn new(
        eval: &ContinuousEvaluation,
        dtw: &DtwConfig,
        matrix: &ReasoningMatrix,
    ) -> Self {
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dtw: *dtw,
            calibration: eval.calibration.clone(),
            bounds_source: eval.bounds_source.clone(),
            matrix: matrix.clone(),
            perceptual_averaging: "pooled over all (annotator, dialogue) records".to_string(),
            categorical_average: "mean of per-user-label means".to_string(),
            n_models: eval.models.len(),
            n_dialogues: eval.dialogues.len(),
        }
    }
}

/// Categorical scores grouped by the user's label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalColumns {
    pub neutral: Option<NormalizedScore>,
    pub happy: Option<NormalizedScore>,
    pub angry: Option<NormalizedScore>,
    pub sad: Option<NormalizedScore>,
    /// Mean of the per-label means that are present.
    pub avg: Option<NormalizedScore>,
    /// Mean over all labelled turns.
    pub turn_mean: Option<NormalizedScore>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model_id: String,
    pub continuous: ContinuousModelRow,
    pub categorical: Option<CategoricalColumns>,
    pub perceptual: Option<PerceptualSummary>,
}

impl ModelRow {
    pub const HEADER: [&'static str; 22] = [
        "model_id",
        "n_dialogues",
        "n_turns",
        "n_extreme_turns",
        "ecs",
        "ebs",
        "ess",
        "ers",
        "ct_ecs",
        "ct_ebs",
        "ct_ess",
        "ct_ers",
        "cat_neutral",
        "cat_happy",
        "cat_angry",
        "cat_sad",
        "cat_avg",
        "er",
        "en",
        "rr",
        "perceptual_ers",
        "n_ratings",
    ];

    fn columns(&self) -> Columns {
        let c = &self.continuous;
        let cat = self.categorical.as_ref();
        let p = self.perceptual.as_ref();
        let values = vec![
            Cell::Text(self.model_id.clone()),
            Cell::Int(c.n_dialogues),
            Cell::Int(c.n_turns),
            Cell::Int(c.n_extreme_turns),
            Cell::Num(c.ecs.value()),
            Cell::zero_if_absent(c.ebs),
            Cell::Num(c.ess.value()),
            Cell::Num(c.ers.value()),
            Cell::Num(c.ct_ecs.value()),
            Cell::zero_if_absent(c.ct_ebs),
            Cell::Num(c.ct_ess.value()),
            Cell::Num(c.ct_ers.value()),
            Cell::score(cat.and_then(|c| c.neutral)),
            Cell::score(cat.and_then(|c| c.happy)),
            Cell::score(cat.and_then(|c| c.angry)),
            Cell::score(cat.and_then(|c| c.sad)),
            Cell::score(cat.and_then(|c| c.avg)),
            Cell::score(p.map(|p| p.er)),
            Cell::score(p.map(|p| p.en)),
            Cell::score(p.map(|p| p.rr)),
            Cell::score(p.map(|p| p.ers)),
            p.map_or(Cell::Absent, |p| Cell::Int(p.n_records)),
        ];
        Columns(Self::HEADER.into_iter().zip(values).collect())
    }
}

impl Serialize for ModelRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.columns().serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueRow {
    pub model_id: String,
    pub dialogue_id: String,
    pub n_turns: usize,
    pub n_extreme_turns: usize,
    pub scores: DialogueScores,
    pub categorical: Option<CategoricalColumns>,
    pub perceptual: Option<PerceptualSummary>,
}

impl DialogueRow {
    pub const HEADER: [&'static str; 15] = [
        "model_id",
        "dialogue_id",
        "n_turns",
        "n_extreme_turns",
        "ct_ecs",
        "ct_ebs",
        "ct_ess",
        "ct_ers",
        "cat_avg",
        "cat_turn_mean",
        "er",
        "en",
        "rr",
        "perceptual_ers",
        "n_ratings",
    ];

    fn columns(&self) -> Columns {
        let s = &self.scores;
        let cat = self.categorical.as_ref();
        let p = self.perceptual.as_ref();
        let values = vec![
            Cell::Text(self.model_id.clone()),
            Cell::Text(self.dialogue_id.clone()),
            Cell::Int(self.n_turns),
            Cell::Int(self.n_extreme_turns),
            Cell::Num(s.ct_ecs.value()),
            Cell::zero_if_absent(s.ct_ebs),
            Cell::Num(s.ct_ess.value()),
            Cell::Num(s.ct_ers.value()),
            Cell::score(cat.and_then(|c| c.avg)),
            Cell::score(cat.and_then(|c| c.turn_mean)),
            Cell::score(p.map(|p| p.er)),
            Cell::score(p.map(|p| p.en)),
            Cell::score(p.map(|p| p.rr)),
            Cell::score(p.map(|p| p.ers)),
            p.map_or(Cell::Absent, |p| Cell::Int(p.n_records)),
        ];
        Columns(Self::HEADER.into_iter().zip(values).collect())
    }
}

fn turn_columns(t: &TurnScores) -> Columns {
    Columns(vec![
        ("ecs", Cell::Num(t.ecs.value())),
        ("ebs", Cell::zero_if_absent(t.ebs)),
        ("ess", Cell::Num(t.ess.value())),
        ("ers", Cell::Num(t.ers.value())),
        (
            "extreme_valence",
            Cell::Int(t.extreme_flags.valence as usize),
        ),
        (
            "extreme_arousal",
            Cell::Int(t.extreme_flags.arousal as usize),
        ),
        (
            "extreme_dominance",
            Cell::Int(t.extreme_flags.dominance as usize),
        ),
    ])
}

impl Serialize for DialogueRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Turns<'a>(&'a [TurnScores]);
        impl Serialize for Turns<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for t in self.0 {
                    seq.serialize_element(&turn_columns(t))?;
                }
                seq.end()
            }
        }
        let cols = self.columns();
        let mut map = s.serialize_map(Some(cols.0.len() + 1))?;
        for (k, v) in &cols.0 {
            map.serialize_entry(k, v)?;
        }
        map.serialize_entry("turns", &Turns(&self.scores.per_turn))?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPair {
    pub left: ErsFamily,
    pub right: ErsFamily,
    /// `None` when a column has zero variance.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

impl Serialize for CorrelationPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Columns(vec![
            ("left", Cell::Text(self.left.name().to_string())),
            ("right", Cell::Text(self.right.name().to_string())),
            ("pearson", self.pearson.map_or(Cell::Absent, Cell::Num)),
            ("spearman", self.spearman.map_or(Cell::Absent, Cell::Num)),
        ])
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub unit: CorrelationUnit,
    pub n: usize,
    pub pairs: Vec<CorrelationPair>,
}

impl CorrelationSummary {
    /// Smallest Pearson coefficient, if every pair has one.
    pub fn min_pearson(&self) -> Option<f64> {
        self.pairs
            .iter()
            .map(|p| p.pearson)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub metadata: Metadata,
    pub models: Vec<ModelRow>,
    pub dialogues: Vec<DialogueRow>,
    pub rankings: BTreeMap<String, Vec<String>>,
    pub correlations: Option<CorrelationSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::validation(
                "format",
                format!("unknown format {other:?}"),
            )),
        }
    }
}

fn csv_text<const N: usize>(header: [&str; N], rows: impl Iterator<Item = Columns>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.0.iter().map(|(_, c)| c.text()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn models_csv(&self) -> String {
        csv_text(ModelRow::HEADER, self.models.iter().map(ModelRow::columns))
    }

    pub fn dialogues_csv(&self) -> String {
        csv_text(
            DialogueRow::HEADER,
            self.dialogues.iter().map(DialogueRow::columns),
        )
    }

    pub fn model(&self, model_id: &str) -> Option<&ModelRow> {
        self.models.iter().find(|m| m.model_id == model_id)
    }

    /// Writes the report files into `dir` and returns their paths.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(PathBuf, String)> = Vec::new();
        if matches!(format, OutputFormat::Json | OutputFormat::Both) {
            files.push((dir.join("report.json"), self.to_json()));
        }
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            files.push((dir.join("models.csv"), self.models_csv()));
            files.push((dir.join("dialogues.csv"), self.dialogues_csv()));
        }
        files.push((
            dir.join("calibration.json"),
            crate::io::calibration_to_json(&self.metadata.calibration),
        ));
        for (path, text) in &files {
            fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

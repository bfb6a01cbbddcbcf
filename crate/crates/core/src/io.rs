//! File formats: dialogue JSON, calibration JSON, matrix JSON, ratings CSV
//! and reference-corpus JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::calibration::CorpusStats;
use crate::categorical::ReasoningMatrix;
use crate::error::{Error, Result};
use crate::types::{
    Calibration, CategoricalLabel, Dialogue, DialogueTurn, EmotionDimension, RatingRecord,
    Trajectory, TurnTrajectories,
};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_json(path: &Path, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

struct TurnCtx<'a> {
    path: &'a Path,
    turn: usize,
}

impl TurnCtx<'_> {
    fn schema(&self, field: impl Into<String>, reason: impl Into<String>) -> Error {
        Error::Schema {
            path: self.path.to_path_buf(),
            turn: self.turn,
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn invariant(&self, source: Error) -> Error {
        Error::InvariantViolation {
            path: self.path.to_path_buf(),
            turn: self.turn,
            source: Box::new(source),
        }
    }

    fn samples(
        &self,
        side: &Map<String, Value>,
        side_name: &str,
        dim: EmotionDimension,
    ) -> Result<Vec<f64>> {
        let field = format!("{side_name}.{dim}");
        let arr = side
            .get(dim.name())
            .ok_or_else(|| self.schema(&field, "missing"))?
            .as_array()
            .ok_or_else(|| self.schema(&field, "expected an array of numbers"))?;
        arr.iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64().ok_or_else(|| {
                    self.schema(
                        format!("{field}[{i}]"),
                        format!("expected a number, got {v}"),
                    )
                })
            })
            .collect()
    }

    fn side(&self, turn: &Map<String, Value>, name: &str, rate: f64) -> Result<TurnTrajectories> {
        let side = turn
            .get(name)
            .ok_or_else(|| self.schema(name, "missing"))?
            .as_object()
            .ok_or_else(|| self.schema(name, "expected an object"))?;
        let mut trajs = Vec::with_capacity(3);
        for dim in EmotionDimension::ALL {
            let samples = self.samples(side, name, dim)?;
            trajs.push(Trajectory::new(samples, rate).map_err(|e| {
                self.invariant(match e {
                    Error::Validation { field, reason } => Error::Validation {
                        field: format!("{name}.{dim}.{field}"),
                        reason,
                    },
                    Error::EmptyTrajectory => {
                        Error::validation(format!("{name}.{dim}"), "trajectory has no samples")
                    }
                    other => other,
                })
            })?);
        }
        let d = trajs.pop().expect("three");
        let a = trajs.pop().expect("three");
        let v = trajs.pop().expect("three");
        TurnTrajectories::new(v, a, d).map_err(|e| {
            self.invariant(match e {
                Error::Validation { field, reason } => Error::Validation {
                    field: format!("{name}.{field}"),
                    reason,
                },
                other => other,
            })
        })
    }

    fn label(&self, turn: &Map<String, Value>, name: &str) -> Result<Option<CategoricalLabel>> {
        match turn.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => s
                .parse()
                .map(Some)
                .map_err(|_| self.schema(name, format!("unknown label {s:?}"))),
            Some(other) => Err(self.schema(name, format!("expected a string, got {other}"))),
        }
    }
}

/// Parses one dialogue document; `path` is used for error context only.
pub fn parse_dialogue(path: &Path, text: &str) -> Result<Dialogue> {
    let root = parse_json(path, text)?;
    let top = TurnCtx { path, turn: 0 };
    let obj = root.as_object().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        message: "top level must be an object".into(),
    })?;
    let string_field = |name: &str| -> Result<String> {
        obj.get(name)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| top.schema(name, "missing or not a string"))
    };
    let dialogue_id = string_field("dialogue_id")?;
    let model_id = string_field("model_id")?;
    let rate = match obj.get("sample_rate_hz") {
        None => Trajectory::DEFAULT_SAMPLE_RATE,
        Some(v) => v
            .as_f64()
            .ok_or_else(|| top.schema("sample_rate_hz", "expected a number"))?,
    };
    let turns_json = obj
        .get("turns")
        .and_then(Value::as_array)
        .ok_or_else(|| top.schema("turns", "missing or not an array"))?;
    if turns_json.is_empty() {
        return Err(top.schema("turns", "dialogue has no turns"));
    }
    let mut turns = Vec::with_capacity(turns_json.len());
    for (i, t) in turns_json.iter().enumerate() {
        let ctx = TurnCtx { path, turn: i };
        let t = t
            .as_object()
            .ok_or_else(|| ctx.schema("turn", "expected an object"))?;
        let user = ctx.side(t, "user", rate)?;
        let machine = ctx.side(t, "machine", rate)?;
        let user_label = ctx.label(t, "user_label")?;
        let machine_label = ctx.label(t, "machine_label")?;
        turns.push(
            DialogueTurn::new(user, machine, user_label, machine_label)
                .map_err(|e| ctx.invariant(e))?,
        );
    }
    Dialogue::new(dialogue_id, model_id, turns).map_err(|e| top.invariant(e))
}

fn side_json(t: &TurnTrajectories) -> Value {
    json!({
        "valence": t.valence().samples(),
        "arousal": t.arousal().samples(),
        "dominance": t.dominance().samples(),
    })
}

pub fn dialogue_to_value(d: &Dialogue) -> Value {
    let turns: Vec<Value> = d
        .turns()
        .iter()
        .map(|t| {
            let mut m = Map::new();
            m.insert("user".into(), side_json(t.user()));
            m.insert("machine".into(), side_json(t.machine()));
            if let Some((u, mach)) = t.labels() {
                m.insert("user_label".into(), Value::String(u.name().into()));
                m.insert("machine_label".into(), Value::String(mach.name().into()));
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "dialogue_id": d.dialogue_id(),
        "model_id": d.model_id(),
        "sample_rate_hz": d.sample_rate(),
        "turns": turns,
    })
}

pub fn dialogue_to_json(d: &Dialogue) -> String {
    let mut s = serde_json::to_string_pretty(&dialogue_to_value(d)).expect("dialogue serializes");
    s.push('\n');
    s
}

pub fn read_dialogue(path: &Path) -> Result<Dialogue> {
    parse_dialogue(path, &read_text(path)?)
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.json` dialogue in a directory (sorted by file name), or a
/// single dialogue file. An empty directory yields no dialogues and a warning.
pub fn ingest_dialogues(path: &Path) -> Result<Vec<Dialogue>> {
    if path.is_file() {
        return Ok(vec![read_dialogue(path)?]);
    }
    let files = json_files(path)?;
    if files.is_empty() {
        log::warn!("no dialogue files found in {}", path.display());
    }
    files.iter().map(|f| read_dialogue(f)).collect()
}

/// Writes each dialogue to `<dir>/<model_id>__<dialogue_id>.json`.
pub fn write_dialogues(dir: &Path, dialogues: &[Dialogue]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    dialogues
        .iter()
        .map(|d| {
            let path = dir.join(format!("{}__{}.json", d.model_id(), d.dialogue_id()));
            fs::write(&path, dialogue_to_json(d)).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn calibration_to_json(c: &Calibration) -> String {
    let mut s = serde_json::to_string_pretty(c).expect("calibration serializes");
    s.push('\n');
    s
}

pub fn read_calibration(path: &Path) -> Result<Calibration> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_calibration(path: &Path, c: &Calibration) -> Result<()> {
    fs::write(path, calibration_to_json(c)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<ReasoningMatrix> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub const RATINGS_HEADER: [&str; 6] = ["annotator_id", "dialogue_id", "model_id", "er", "en", "rr"];

pub fn parse_ratings(path: &Path, text: &str) -> Result<Vec<RatingRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if header.iter().ne(RATINGS_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "expected header `{}`, got `{}`",
                RATINGS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    reader
        .deserialize::<RatingRecord>()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: {e}", i + 2),
            })
        })
        .collect()
}

pub fn read_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    parse_ratings(path, &read_text(path)?)
}

pub fn ratings_to_csv(records: &[RatingRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(RATINGS_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.annotator_id.as_str(),
            r.dialogue_id.as_str(),
            r.model_id.as_str(),
            &r.er().to_string(),
            &r.en().to_string(),
            &r.rr().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Reference corpus: either a dialogue directory / file (user and machine
/// turns pooled) or a JSON document `{"segments": [{"valence": [...],
/// "arousal": [...], "dominance": [...]}, ...]}`.
pub fn read_corpus(path: &Path) -> Result<CorpusStats> {
    if path.is_dir() {
        return Ok(corpus_from_dialogues(&ingest_dialogues(path)?));
    }
    let text = read_text(path)?;
    let root = parse_json(path, &text)?;
    let Some(segments) = root.get("segments") else {
        return Ok(corpus_from_dialogues(&[parse_dialogue(path, &text)?]));
    };
    let segments = segments.as_array().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        message: "`segments` must be an array".into(),
    })?;
    let mut stats = CorpusStats::new();
    for (i, seg) in segments.iter().enumerate() {
        for dim in EmotionDimension::ALL {
            let Some(values) = seg.get(dim.name()) else {
                continue;
            };
            let samples: Option<Vec<f64>> = values
                .as_array()
                .and_then(|a| a.iter().map(Value::as_f64).collect());
            let samples = samples.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("segments[{i}].{dim} must be an array of numbers"),
            })?;
            stats.add_samples(dim, &samples);
        }
    }
    Ok(stats)
}

/// Reference statistics from the user side of `dialogues`. Machine turns are
/// left out so the systems under evaluation cannot move their own thresholds.
pub fn corpus_from_dialogues(dialogues: &[Dialogue]) -> CorpusStats {
    CorpusStats::from_turns(dialogues.iter().flat_map(|d| d.turns()).map(|t| t.user()))
}

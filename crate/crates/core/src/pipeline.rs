//! Two-pass evaluation: raw scores for every dialogue, dataset-level bounds,
//! then normalization and per-model aggregation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{pearson, rank_models, spearman, ErsFamily, ModelScoreVector};
use crate::calibration::fit_bounds;
use crate::categorical::{categorical_turn_scores, ReasoningMatrix};
use crate::continuous::{normalize_dialogue, raw_dialogue, DialogueScores, RawDialogueScores};
use crate::dtw::DtwConfig;
use crate::error::{Error, Result};
use crate::perceptual::{aggregate_ratings, aggregate_ratings_per_dialogue, PerceptualSummary};
use crate::report::{
    BoundsSource, CategoricalColumns, CorrelationPair, CorrelationSummary, DialogueRow, Metadata,
    ModelRow, ScoreReport,
};
use crate::types::{
    Calibration, CategoricalLabel, Dialogue, Metric, NormalizedScore, RatingRecord,
};

/// Continuous per-model columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousColumn {
    Ecs,
    Ebs,
    Ess,
    Ers,
    CtEcs,
    CtEbs,
    CtEss,
    CtErs,
}

impl ContinuousColumn {
    pub const ALL: [ContinuousColumn; 8] = [
        ContinuousColumn::Ecs,
        ContinuousColumn::Ebs,
        ContinuousColumn::Ess,
        ContinuousColumn::Ers,
        ContinuousColumn::CtEcs,
        ContinuousColumn::CtEbs,
        ContinuousColumn::CtEss,
        ContinuousColumn::CtErs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ContinuousColumn::Ecs => "ecs",
            ContinuousColumn::Ebs => "ebs",
            ContinuousColumn::Ess => "ess",
            ContinuousColumn::Ers => "ers",
            ContinuousColumn::CtEcs => "ct_ecs",
            ContinuousColumn::CtEbs => "ct_ebs",
            ContinuousColumn::CtEss => "ct_ess",
            ContinuousColumn::CtErs => "ct_ers",
        }
    }
}

/// Per-model aggregate of continuous scores.
///
/// Single-turn columns average over every turn of the model (EBS over extreme
/// turns only); cross-turn columns average the dialogue-level values. Each ERS
/// is the mean of its model-level components that are present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousModelRow {
    pub n_dialogues: usize,
    pub n_turns: usize,
    pub n_extreme_turns: usize,
    pub ecs: NormalizedScore,
    pub ebs: Option<NormalizedScore>,
    pub ess: NormalizedScore,
    pub ers: NormalizedScore,
    pub ct_ecs: NormalizedScore,
    pub ct_ebs: Option<NormalizedScore>,
    pub ct_ess: NormalizedScore,
    pub ct_ers: NormalizedScore,
}

impl ContinuousModelRow {
    pub fn get(&self, column: ContinuousColumn) -> Option<NormalizedScore> {
        match column {
            ContinuousColumn::Ecs => Some(self.ecs),
            ContinuousColumn::Ebs => self.ebs,
            ContinuousColumn::Ess => Some(self.ess),
            ContinuousColumn::Ers => Some(self.ers),
            ContinuousColumn::CtEcs => Some(self.ct_ecs),
            ContinuousColumn::CtEbs => self.ct_ebs,
            ContinuousColumn::CtEss => Some(self.ct_ess),
            ContinuousColumn::CtErs => Some(self.ct_ers),
        }
    }

    fn aggregate(dialogues: &[&DialogueScores]) -> Self {
        let turns: Vec<_> = dialogues.iter().flat_map(|d| d.per_turn.iter()).collect();
        let mean = |v: Vec<NormalizedScore>| NormalizedScore::mean(&v);
        let ecs = mean(turns.iter().map(|t| t.ecs).collect()).expect("turns");
        let ebs = mean(turns.iter().filter_map(|t| t.ebs).collect());
        let ess = mean(turns.iter().map(|t| t.ess).collect()).expect("turns");
        let ct_ecs = mean(dialogues.iter().map(|d| d.ct_ecs).collect()).expect("dialogues");
        let ct_ebs = mean(dialogues.iter().filter_map(|d| d.ct_ebs).collect());
        let ct_ess = mean(dialogues.iter().map(|d| d.ct_ess).collect()).expect("dialogues");
        let ers = mean([Some(ecs), ebs, Some(ess)].into_iter().flatten().collect()).expect("ecs");
        let ct_ers = mean(
            [Some(ct_ecs), ct_ebs, Some(ct_ess)]
                .into_iter()
                .flatten()
                .collect(),
        )
        .expect("ecs");
        ContinuousModelRow {
            n_dialogues: dialogues.len(),
            n_turns: turns.len(),
            n_extreme_turns: turns.iter().filter(|t| t.is_extreme()).count(),
            ecs,
            ebs,
            ess,
            ers,
            ct_ecs,
            ct_ebs,
            ct_ess,
            ct_ers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredDialogue {
    pub dialogue_id: String,
    pub model_id: String,
    pub raw: RawDialogueScores,
    pub scores: DialogueScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousEvaluation {
    /// The calibration actually applied, including every bound used.
    pub calibration: Calibration,
    pub bounds_source: BTreeMap<Metric, BoundsSource>,
    /// Sorted by `(model_id, dialogue_id)`.
    pub dialogues: Vec<ScoredDialogue>,
    pub models: BTreeMap<String, ContinuousModelRow>,
}

impl ContinuousEvaluation {
    /// Models with a value in `column`, best first.
    pub fn ranking(&self, column: ContinuousColumn) -> Vec<String> {
        let pairs: Vec<(&str, f64)> = self
            .models
            .iter()
            .filter_map(|(m, row)| row.get(column).map(|s| (m.as_str(), s.value())))
            .collect();
        rank_models(&pairs)
    }
}

fn sorted_refs(dialogues: &[Dialogue]) -> Result<Vec<&Dialogue>> {
    let mut sorted: Vec<&Dialogue> = dialogues.iter().collect();
    sorted.sort_by(|a, b| (a.model_id(), a.dialogue_id()).cmp(&(b.model_id(), b.dialogue_id())));
    for w in sorted.windows(2) {
        if w[0].model_id() == w[1].model_id() && w[0].dialogue_id() == w[1].dialogue_id() {
            return Err(Error::validation(
                "dialogue_id",
                format!(
                    "duplicate dialogue `{}` for model `{}`",
                    w[0].dialogue_id(),
                    w[0].model_id()
                ),
            ));
        }
    }
    Ok(sorted)
}

/// Scores every dialogue, fitting any normalization bound that `calibration`
/// does not already carry from the pooled raw scores of all models.
pub fn score_continuous(
    dialogues: &[Dialogue],
    calibration: &Calibration,
    cfg: &DtwConfig,
) -> Result<ContinuousEvaluation> {
    if dialogues.is_empty() {
        return Err(Error::EmptyInput("no dialogues to score".into()));
    }
    let sorted = sorted_refs(dialogues)?;
    let raws: Vec<RawDialogueScores> = sorted
        .par_iter()
        .map(|d| raw_dialogue(d, calibration, cfg))
        .collect();

    let mut pools: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
    for raw in &raws {
        for t in &raw.turns {
            pools.entry(Metric::Ecs).or_default().push(t.ecs);
            pools.entry(Metric::Ess).or_default().push(t.ess);
            if let Some(v) = t.ebs {
                pools.entry(Metric::Ebs).or_default().push(v);
            }
        }
        if let Some(v) = raw.ct_ess {
            pools.entry(Metric::CtEss).or_default().push(v);
        }
    }
    let mut bounds = calibration.norm_bounds().clone();
    let mut bounds_source = BTreeMap::new();
    for (metric, pool) in &pools {
        if bounds.contains_key(metric) {
            bounds_source.insert(*metric, BoundsSource::Supplied);
        } else {
            bounds.insert(*metric, fit_bounds(pool)?);
            bounds_source.insert(*metric, BoundsSource::Fitted);
        }
    }
    let applied = calibration.clone().with_norm_bounds(bounds);

    let scores = raws
        .par_iter()
        .map(|raw| normalize_dialogue(raw, &applied))
        .collect::<Result<Vec<_>>>()?;

    let scored: Vec<ScoredDialogue> = sorted
        .iter()
        .zip(raws)
        .zip(scores)
        .map(|((d, raw), scores)| ScoredDialogue {
            dialogue_id: d.dialogue_id().to_string(),
            model_id: d.model_id().to_string(),
            raw,
            scores,
        })
        .collect();

    let mut by_model: BTreeMap<&str, Vec<&DialogueScores>> = BTreeMap::new();
    for s in &scored {
        by_model.entry(&s.model_id).or_default().push(&s.scores);
    }
    let models = by_model
        .into_iter()
        .map(|(m, ds)| (m.to_string(), ContinuousModelRow::aggregate(&ds)))
        .collect();

    Ok(ContinuousEvaluation {
        calibration: applied,
        bounds_source,
        dialogues: scored,
        models,
    })
}

/// Categorical score of one dialogue: `None` when it carries no labels at all.
fn dialogue_categorical(
    d: &Dialogue,
    matrix: &ReasoningMatrix,
) -> Result<Option<Vec<(CategoricalLabel, NormalizedScore)>>> {
    if d.turns().iter().all(|t| t.labels().is_none()) {
        return Ok(None);
    }
    categorical_turn_scores(d, matrix).map(Some)
}

fn categorical_columns(turns: &[(CategoricalLabel, NormalizedScore)]) -> CategoricalColumns {
    let mut by_label: BTreeMap<CategoricalLabel, Vec<NormalizedScore>> = BTreeMap::new();
    for &(label, s) in turns {
        by_label.entry(label).or_default().push(s);
    }
    let per_label = |l: CategoricalLabel| by_label.get(&l).and_then(|v| NormalizedScore::mean(v));
    let present: Vec<NormalizedScore> = CategoricalLabel::ALL
        .iter()
        .filter_map(|&l| per_label(l))
        .collect();
    let all: Vec<NormalizedScore> = turns.iter().map(|t| t.1).collect();
    CategoricalColumns {
        neutral: per_label(CategoricalLabel::Neutral),
        happy: per_label(CategoricalLabel::Happy),
        angry: per_label(CategoricalLabel::Angry),
        sad: per_label(CategoricalLabel::Sad),
        avg: NormalizedScore::mean(&present),
        turn_mean: NormalizedScore::mean(&all),
    }
}

/// Categorical columns per dialogue and per model, skipping unlabelled dialogues.
pub fn categorical_summary(
    dialogues: &[Dialogue],
    matrix: &ReasoningMatrix,
) -> Result<CategoricalSummary> {
    let mut per_dialogue = Vec::new();
    let mut per_model: BTreeMap<String, Vec<(CategoricalLabel, NormalizedScore)>> = BTreeMap::new();
    for d in sorted_refs(dialogues)? {
        if let Some(turns) = dialogue_categorical(d, matrix)? {
            per_dialogue.push(CategoricalDialogue {
                model_id: d.model_id().to_string(),
                dialogue_id: d.dialogue_id().to_string(),
                scores: categorical_columns(&turns),
            });
            per_model
                .entry(d.model_id().to_string())
                .or_default()
                .extend(turns);
        }
    }
    Ok(CategoricalSummary {
        models: per_model
            .into_iter()
            .map(|(m, t)| (m, categorical_columns(&t)))
            .collect(),
        dialogues: per_dialogue,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalDialogue {
    pub model_id: String,
    pub dialogue_id: String,
    pub scores: CategoricalColumns,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalSummary {
    pub models: BTreeMap<String, CategoricalColumns>,
    pub dialogues: Vec<CategoricalDialogue>,
}

/// Everything an evaluation consumes; optional inputs add their columns.
#[derive(Debug, Clone, Default)]
pub struct EvaluationInputs {
    pub dialogues: Vec<Dialogue>,
    /// Thresholds and any frozen bounds; the built-in constants when absent.
    pub calibration: Option<Calibration>,
    /// Rationality matrix; the built-in matrix when absent.
    pub matrix: Option<ReasoningMatrix>,
    pub ratings: Option<Vec<RatingRecord>>,
}

pub fn run_evaluation(inputs: &EvaluationInputs, cfg: &DtwConfig) -> Result<ScoreReport> {
    let default_calibration = Calibration::default();
    let calibration = inputs.calibration.as_ref().unwrap_or(&default_calibration);
    let default_matrix = ReasoningMatrix::default();
    let matrix = inputs.matrix.as_ref().unwrap_or(&default_matrix);

    let continuous = score_continuous(&inputs.dialogues, calibration, cfg)?;

    let lookup: BTreeMap<(&str, &str), &Dialogue> = inputs
        .dialogues
        .iter()
        .map(|d| ((d.model_id(), d.dialogue_id()), d))
        .collect();

    let perceptual_models: Option<BTreeMap<String, PerceptualSummary>> = match &inputs.ratings {
        Some(r) if !r.is_empty() => Some(aggregate_ratings(r)?),
        _ => None,
    };
    let perceptual_dialogues = match &inputs.ratings {
        Some(r) if !r.is_empty() => Some(aggregate_ratings_per_dialogue(r)?),
        _ => None,
    };

    let mut dialogue_rows = Vec::with_capacity(continuous.dialogues.len());
    let mut model_cat_turns: BTreeMap<&str, Vec<(CategoricalLabel, NormalizedScore)>> =
        BTreeMap::new();
    for s in &continuous.dialogues {
        let d = lookup[&(s.model_id.as_str(), s.dialogue_id.as_str())];
        let cat = dialogue_categorical(d, matrix)?;
        if let Some(turns) = &cat {
            model_cat_turns
                .entry(&s.model_id)
                .or_default()
                .extend(turns.iter().copied());
        }
        let perceptual = perceptual_dialogues
            .as_ref()
            .and_then(|p| p.get(&(s.model_id.clone(), s.dialogue_id.clone())))
            .cloned();
        dialogue_rows.push(DialogueRow {
            model_id: s.model_id.clone(),
            dialogue_id: s.dialogue_id.clone(),
            n_turns: s.scores.per_turn.len(),
            n_extreme_turns: s.scores.per_turn.iter().filter(|t| t.is_extreme()).count(),
            scores: s.scores.clone(),
            categorical: cat.as_deref().map(categorical_columns),
            perceptual,
        });
    }

    let model_rows: Vec<ModelRow> = continuous
        .models
        .iter()
        .map(|(m, row)| ModelRow {
            model_id: m.clone(),
            continuous: row.clone(),
            categorical: model_cat_turns
                .get(m.as_str())
                .map(|t| categorical_columns(t)),
            perceptual: perceptual_models.as_ref().and_then(|p| p.get(m)).cloned(),
        })
        .collect();

    if let Some(p) = &perceptual_models {
        let known: BTreeSet<&str> = continuous.models.keys().map(String::as_str).collect();
        for m in p.keys().filter(|m| !known.contains(m.as_str())) {
            log::warn!("ratings reference model `{m}` with no dialogues; ignored");
        }
    }

    let mut rankings = BTreeMap::new();
    for column in ContinuousColumn::ALL {
        rankings.insert(column.name().to_string(), continuous.ranking(column));
    }
    let vectors = score_vectors(&model_rows);
    if model_rows
        .iter()
        .any(|r| r.categorical.as_ref().and_then(|c| c.avg).is_some())
    {
        let pairs: Vec<(&str, f64)> = model_rows
            .iter()
            .filter_map(|r| Some((r.model_id.as_str(), r.categorical.as_ref()?.avg?.value())))
            .collect();
        rankings.insert("cat_avg".to_string(), rank_models(&pairs));
    }
    if let Some(p) = &perceptual_models {
        let pairs: Vec<(&str, f64)> = model_rows
            .iter()
            .filter_map(|r| Some((r.model_id.as_str(), p.get(&r.model_id)?.ers.value())))
            .collect();
        rankings.insert("perceptual_ers".to_string(), rank_models(&pairs));
    }

    Ok(ScoreReport {
        metadata: Metadata::new(&continuous, cfg, matrix),
        models: model_rows,
        dialogues: dialogue_rows,
        rankings,
        correlations: correlate_vectors(&vectors, CorrelationUnit::PerModel),
    })
}

/// ERS vectors for every model carrying all three families.
pub fn score_vectors(rows: &[ModelRow]) -> Vec<ModelScoreVector> {
    rows.iter()
        .filter_map(|r| {
            Some(ModelScoreVector {
                model_id: r.model_id.clone(),
                continuous_ers: r.continuous.ers,
                categorical_ers: r.categorical.as_ref()?.avg?,
                perceptual_ers: r.perceptual.as_ref()?.ers,
            })
        })
        .collect()
}

/// Dialogue-level vectors: cross-turn ERS, turn-mean categorical score and
/// the dialogue's pooled perceptual ERS.
pub fn dialogue_score_vectors(rows: &[DialogueRow]) -> Vec<ModelScoreVector> {
    rows.iter()
        .filter_map(|r| {
            Some(ModelScoreVector {
                model_id: format!("{}/{}", r.model_id, r.dialogue_id),
                continuous_ers: r.scores.ct_ers,
                categorical_ers: r.categorical.as_ref()?.turn_mean?,
                perceptual_ers: r.perceptual.as_ref()?.ers,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationUnit {
    #[default]
    PerModel,
    PerDialogue,
}

/// Pairwise Pearson and Spearman among the three ERS families; `None` with
/// fewer than two vectors.
pub fn correlate_vectors(
    vectors: &[ModelScoreVector],
    unit: CorrelationUnit,
) -> Option<CorrelationSummary> {
    if vectors.len() < 2 {
        return None;
    }
    let column = |f: ErsFamily| -> Vec<f64> { vectors.iter().map(|v| v.get(f).value()).collect() };
    let mut pairs = Vec::new();
    for (i, &a) in ErsFamily::ALL.iter().enumerate() {
        for &b in &ErsFamily::ALL[i + 1..] {
            let (x, y) = (column(a), column(b));
            pairs.push(CorrelationPair {
                left: a,
                right: b,
                pearson: pearson(&x, &y).ok(),
                spearman: spearman(&x, &y).ok(),
            });
        }
    }
    Some(CorrelationSummary {
        unit,
        n: vectors.len(),
        pairs,
    })
}

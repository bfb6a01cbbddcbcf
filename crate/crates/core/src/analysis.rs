//! Cross-metric correlation, model ranking and calibration sensitivity.

use std::cmp::Ordering;

use serde::Serialize;

use crate::calibration::{derive_thresholds_with, CorpusStats, PercentileAnchors};
use crate::dtw::DtwConfig;
use crate::error::{Error, Result};
use crate::pipeline::{score_continuous, ContinuousColumn, ContinuousEvaluation};
use crate::types::{Dialogue, NormalizedScore};

/// One model's ERS under each evaluation family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelScoreVector {
    pub model_id: String,
    pub continuous_ers: NormalizedScore,
    pub categorical_ers: NormalizedScore,
    pub perceptual_ers: NormalizedScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErsFamily {
    Continuous,
    Categorical,
    Perceptual,
}

impl ErsFamily {
    pub const ALL: [ErsFamily; 3] = [
        ErsFamily::Continuous,
        ErsFamily::Categorical,
        ErsFamily::Perceptual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErsFamily::Continuous => "continuous",
            ErsFamily::Categorical => "categorical",
            ErsFamily::Perceptual => "perceptual",
        }
    }
}

impl ModelScoreVector {
    pub fn get(&self, family: ErsFamily) -> NormalizedScore {
        match family {
            ErsFamily::Continuous => self.continuous_ers,
            ErsFamily::Categorical => self.categorical_ers,
            ErsFamily::Perceptual => self.perceptual_ers,
        }
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations(x.len()));
    }
    Ok(())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties assigned their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson over tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Model ids ordered by descending score; exact ties fall back to the id.
pub fn rank_models<S: AsRef<str>>(scores: &[(S, f64)]) -> Vec<String> {
    let mut sorted: Vec<(&str, f64)> = scores.iter().map(|(m, s)| (m.as_ref(), *s)).collect();
    sorted.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(b.0),
        other => other,
    });
    sorted.into_iter().map(|(m, _)| m.to_string()).collect()
}

pub fn rank_by_family(scores: &[ModelScoreVector], family: ErsFamily) -> Vec<String> {
    let pairs: Vec<(&str, f64)> = scores
        .iter()
        .map(|s| (s.model_id.as_str(), s.get(family).value()))
        .collect();
    rank_models(&pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub shift: f64,
    pub ranking_changed: bool,
    pub max_abs_score_delta: f64,
    /// Continuous columns whose model ranking moved under either perturbation.
    pub changed_columns: Vec<String>,
}

/// Largest per-model score change between two evaluations and the columns
/// whose ranking differs.
fn compare(
    base: &ContinuousEvaluation,
    other: &ContinuousEvaluation,
) -> (f64, Vec<ContinuousColumn>) {
    let mut max_delta: f64 = 0.0;
    let mut changed = Vec::new();
    for column in ContinuousColumn::ALL {
        for (model, row) in &base.models {
            let Some(o) = other.models.get(model) else {
                continue;
            };
            if let (Some(a), Some(b)) = (row.get(column), o.get(column)) {
                max_delta = max_delta.max((a.value() - b.value()).abs());
            }
        }
        if base.ranking(column) != other.ranking(column) {
            changed.push(column);
        }
    }
    (max_delta, changed)
}

/// Re-derives the calibration with every percentile anchor moved by `+shift`
/// and by `-shift`, re-scores the dialogues under each, and reports whether
/// any continuous model ranking changed and the largest score change.
pub fn sensitivity_analysis(
    corpus: &CorpusStats,
    dialogues: &[Dialogue],
    shift: f64,
    cfg: &DtwConfig,
) -> Result<SensitivityReport> {
    let anchors = PercentileAnchors::default();
    let up = anchors.shifted(shift)?;
    let down = anchors.shifted(-shift)?;
    let base = score_continuous(dialogues, &derive_thresholds_with(corpus, &anchors)?, cfg)?;
    let (plus, minus) = rayon::join(
        || -> Result<_> { score_continuous(dialogues, &derive_thresholds_with(corpus, &up)?, cfg) },
        || -> Result<_> {
            score_continuous(dialogues, &derive_thresholds_with(corpus, &down)?, cfg)
        },
    );
    let (d1, c1) = compare(&base, &plus?);
    let (d2, c2) = compare(&base, &minus?);
    let mut changed: Vec<ContinuousColumn> = c1;
    for c in c2 {
        if !changed.contains(&c) {
            changed.push(c);
        }
    }
    changed.sort();
    Ok(SensitivityReport {
        shift,
        ranking_changed: !changed.is_empty(),
        max_abs_score_delta: d1.max(d2),
        changed_columns: changed.into_iter().map(|c| c.name().to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // mean 2.5 both; cov = 4.0, var = 5.0 each
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12, "{r}");
    }

    #[test]
    fn correlation_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(Error::TooFewObservations(1))
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
    }

    /// Ranks by counting: rank = 1 + #less + (#equal - 1) / 2.
    fn brute_ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&x| {
                let less = v.iter().filter(|&&y| y < x).count() as f64;
                let eq = v.iter().filter(|&&y| y == x).count() as f64;
                1.0 + less + (eq - 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 8.0, 27.0, 64.0];
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[9.0, 4.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);

        let x = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(average_ranks(&x), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&x), brute_ranks(&x));
        // ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4): cov 4.5, var 4.5 and 5
        let expected = 4.5 / (4.5f64.sqrt() * 5.0f64.sqrt());
        let r = spearman(&x, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }

    #[test]
    fn ranking() {
        assert_eq!(rank_models(&[("a", 0.7), ("b", 0.9)]), vec!["b", "a"]);
        assert_eq!(rank_models(&[("b", 0.5), ("a", 0.5)]), vec!["a", "b"]);
        assert_eq!(rank_models(&[("only", 0.1)]), vec!["only"]);
    }

    proptest! {
        #[test]
        fn pearson_affine(x in prop::collection::vec(-10.0f64..10.0, 3..20), a in -5.0f64..5.0, b in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            prop_assume!(x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() > 1e-6);
            let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r - b.signum()).abs() < 1e-9);
        }

        #[test]
        fn spearman_monotone_invariant(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20)) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assert_eq!(average_ranks(&x), brute_ranks(&x));
            if let Ok(r) = spearman(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
                let ty: Vec<f64> = y.iter().map(|v| v * 3.0 - 1.0).collect();
                prop_assert!((spearman(&tx, &ty).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn ranking_is_permutation(scores in prop::collection::vec(0.0f64..1.0, 1..10)) {
            let pairs: Vec<(String, f64)> = scores.iter().enumerate().map(|(i, s)| (format!("m{i}"), *s)).collect();
            let mut ranked = rank_models(&pairs);
            for w in ranked.windows(2) {
                let sa = pairs.iter().find(|p| p.0 == w[0]).unwrap().1;
                let sb = pairs.iter().find(|p| p.0 == w[1]).unwrap().1;
                prop_assert!(sa > sb || (sa == sb && w[0] < w[1]));
            }
            ranked.sort();
            let mut ids: Vec<String> = pairs.into_iter().map(|p| p.0).collect();
            ids.sort();
            prop_assert_eq!(ranked, ids);
        }
    }
}

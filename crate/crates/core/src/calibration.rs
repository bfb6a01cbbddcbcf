//! Percentile-based calibration and dataset-level min-max bounds.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{
    Calibration, DimensionCalibration, EmotionDimension, ExtremeDirection, Metric, NormBounds,
    NormalizedScore, PerDim, RawScore, TurnTrajectories,
};

/// Half-width of the interval used when every observed raw score is equal.
pub const DEGENERATE_BOUNDS_EPSILON: f64 = 1e-6;

/// Linear-interpolation percentile over the sorted values.
///
/// `p = 0` is the minimum, `p = 100` the maximum, and fractional ranks
/// `p * (n - 1) / 100` interpolate between neighbours.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("percentile of an empty sequence".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::PercentileOutOfRange(p));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, p))
}

fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p * (sorted.len() - 1) as f64 / 100.0;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Pooled frame values and consecutive-frame deltas of a reference corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    frames: PerDim<Vec<f64>>,
    deltas: PerDim<Vec<f64>>,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one segment's trajectory for a single dimension.
    pub fn add_samples(&mut self, dim: EmotionDimension, samples: &[f64]) {
        let (frames, deltas) = match dim {
            EmotionDimension::Valence => (&mut self.frames.valence, &mut self.deltas.valence),
            EmotionDimension::Arousal => (&mut self.frames.arousal, &mut self.deltas.arousal),
            EmotionDimension::Dominance => (&mut self.frames.dominance, &mut self.deltas.dominance),
        };
        frames.extend_from_slice(samples);
        deltas.extend(samples.windows(2).map(|w| w[1] - w[0]));
    }

    pub fn add_turn(&mut self, turn: &TurnTrajectories) {
        for dim in EmotionDimension::ALL {
            self.add_samples(dim, turn.get(dim).samples());
        }
    }

    pub fn from_turns<'a>(turns: impl IntoIterator<Item = &'a TurnTrajectories>) -> Self {
        let mut stats = Self::new();
        for t in turns {
            stats.add_turn(t);
        }
        stats
    }

    pub fn frames(&self, dim: EmotionDimension) -> &[f64] {
        self.frames.get(dim)
    }

    pub fn deltas(&self, dim: EmotionDimension) -> &[f64] {
        self.deltas.get(dim)
    }

    /// Absolute consecutive deltas pooled over all three dimensions.
    pub fn pooled_abs_deltas(&self) -> Vec<f64> {
        self.deltas
            .iter()
            .flat_map(|(_, d)| d.iter().map(|v| v.abs()))
            .collect()
    }
}

/// Percentile levels used when deriving a calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentileAnchors {
    /// Level above which arousal counts as extreme.
    pub arousal_extreme: f64,
    /// Level below which valence counts as extreme.
    pub valence_extreme: f64,
    /// Level below which dominance counts as extreme.
    pub dominance_extreme: f64,
    /// Level of the balanced target each delta pulls toward.
    pub balance_target: f64,
    /// Level of absolute consecutive change used as the stability threshold.
    pub stability: f64,
}

impl Default for PercentileAnchors {
    fn default() -> Self {
        PercentileAnchors {
            arousal_extreme: 80.0,
            valence_extreme: 20.0,
            dominance_extreme: 20.0,
            balance_target: 50.0,
            stability: 80.0,
        }
    }
}

impl PercentileAnchors {
    /// Every anchor moved by `shift` percentile points.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let s = PercentileAnchors {
            arousal_extreme: self.arousal_extreme + shift,
            valence_extreme: self.valence_extreme + shift,
            dominance_extreme: self.dominance_extreme + shift,
            balance_target: self.balance_target + shift,
            stability: self.stability + shift,
        };
        for p in [
            s.arousal_extreme,
            s.valence_extreme,
            s.dominance_extreme,
            s.balance_target,
            s.stability,
        ] {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::PercentileOutOfRange(p));
            }
        }
        Ok(s)
    }

    fn extreme(&self, dim: EmotionDimension) -> (f64, ExtremeDirection) {
        match dim {
            EmotionDimension::Arousal => (self.arousal_extreme, ExtremeDirection::AboveIsExtreme),
            EmotionDimension::Valence => (self.valence_extreme, ExtremeDirection::BelowIsExtreme),
            EmotionDimension::Dominance => {
                (self.dominance_extreme, ExtremeDirection::BelowIsExtreme)
            }
        }
    }
}

/// Builds one dimension's calibration from its extreme-level and balance-target values.
///
/// The balancing delta is the offset from the extreme threshold to the balance target.
pub fn dimension_calibration(
    extreme_value: f64,
    direction: ExtremeDirection,
    balance_value: f64,
) -> DimensionCalibration {
    DimensionCalibration {
        extreme_threshold: extreme_value,
        extreme_direction: direction,
        delta: balance_value - extreme_value,
    }
}

/// Calibration with the default percentile levels.
pub fn derive_thresholds(stats: &CorpusStats) -> Result<Calibration> {
    derive_thresholds_with(stats, &PercentileAnchors::default())
}

/// Calibration from a corpus at arbitrary percentile levels; bounds are left empty.
///
/// A corpus without frame-to-frame change yields a zero stability percentile;
/// that is lifted to the smallest positive float so every nonzero jump counts.
pub fn derive_thresholds_with(
    stats: &CorpusStats,
    anchors: &PercentileAnchors,
) -> Result<Calibration> {
    let mut dims = Vec::with_capacity(3);
    for dim in EmotionDimension::ALL {
        let frames = stats.frames(dim);
        if frames.is_empty() {
            return Err(Error::EmptyInput(format!("{dim} frame pool")));
        }
        let mut sorted = frames.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (level, direction) = anchors.extreme(dim);
        dims.push(dimension_calibration(
            percentile_sorted(&sorted, level),
            direction,
            percentile_sorted(&sorted, anchors.balance_target),
        ));
    }
    let jumps = stats.pooled_abs_deltas();
    if jumps.is_empty() {
        return Err(Error::EmptyInput(
            "consecutive-delta pool (every segment has a single frame)".into(),
        ));
    }
    let stability = percentile(&jumps, anchors.stability)?.max(f64::MIN_POSITIVE);
    Calibration::new(
        PerDim::new(dims[0], dims[1], dims[2]),
        stability,
        BTreeMap::new(),
    )
}

/// Observed `(min, max)` of a non-empty raw-score sequence.
///
/// When every score is identical the interval is widened by
/// [`DEGENERATE_BOUNDS_EPSILON`] on each side so the value normalizes to 0.5.
pub fn fit_bounds(raws: &[RawScore]) -> Result<NormBounds> {
    if raws.is_empty() {
        return Err(Error::EmptyInput("no raw scores to fit bounds".into()));
    }
    let (lo, hi) = raws
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    // `+ 0.0` turns a -0.0 extreme (an all-perfect pool) into 0.0.
    let (lo, hi) = (lo + 0.0, hi + 0.0);
    if lo < hi {
        NormBounds::new(lo, hi)
    } else {
        NormBounds::new(
            lo - DEGENERATE_BOUNDS_EPSILON,
            hi + DEGENERATE_BOUNDS_EPSILON,
        )
    }
}

/// Fits bounds for every metric in `raw_scores`.
pub fn fit_norm_bounds(
    raw_scores: &BTreeMap<Metric, Vec<RawScore>>,
) -> Result<BTreeMap<Metric, NormBounds>> {
    raw_scores
        .iter()
        .map(|(metric, raws)| {
            fit_bounds(raws)
                .map(|b| (*metric, b))
                .map_err(|_| Error::EmptyInput(format!("no raw scores for metric `{metric}`")))
        })
        .collect()
}

pub fn normalize(raw: RawScore, bounds: &NormBounds) -> NormalizedScore {
    bounds.normalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[0.0, 1.0], 50.0).unwrap(), 0.5);
        assert_eq!(percentile(&[7.0], 80.0).unwrap(), 7.0);
        // rank 0.8 * 4 = 3.2 -> 4 + 0.2 * (5 - 4)
        let p = percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 80.0).unwrap();
        assert!((p - 4.2).abs() < 1e-12, "{p}");
    }

    #[test]
    fn percentile_errors() {
        assert!(matches!(percentile(&[], 50.0), Err(Error::EmptyInput(_))));
        assert!(matches!(
            percentile(&[1.0], 100.5),
            Err(Error::PercentileOutOfRange(_))
        ));
        assert!(matches!(
            percentile(&[1.0], -1.0),
            Err(Error::PercentileOutOfRange(_))
        ));
    }

    /// 11 frames; ranks 2, 5, 8 land exactly on listed values.
    fn pool_with(p20: f64, p50: f64, p80: f64) -> Vec<f64> {
        vec![
            p20 - 0.3,
            p20 - 0.2,
            p20,
            (p20 + p50) / 2.0,
            (p20 + p50) / 2.0,
            p50,
            (p50 + p80) / 2.0,
            (p50 + p80) / 2.0,
            p80,
            p80 + 0.1,
            p80 + 0.2,
        ]
    }

    #[test]
    fn derive_reproduces_reference_constants() {
        let mut stats = CorpusStats::new();
        stats.add_samples(EmotionDimension::Arousal, &pool_with(0.1, 0.240, 0.345));
        stats.add_samples(EmotionDimension::Valence, &pool_with(-0.07, 0.141, 0.3));
        stats.add_samples(EmotionDimension::Dominance, &pool_with(0.210, 0.308, 0.4));
        let c = derive_thresholds(&stats).unwrap();
        let a = c.dimension(EmotionDimension::Arousal);
        assert_eq!(a.extreme_threshold, 0.345);
        assert_eq!(a.extreme_direction, ExtremeDirection::AboveIsExtreme);
        assert!((a.delta - -0.105).abs() < 1e-12);
        let v = c.dimension(EmotionDimension::Valence);
        assert_eq!(v.extreme_threshold, -0.07);
        assert_eq!(v.extreme_direction, ExtremeDirection::BelowIsExtreme);
        assert!((v.delta - 0.211).abs() < 1e-12);
        let d = c.dimension(EmotionDimension::Dominance);
        assert_eq!(d.extreme_threshold, 0.210);
        assert!((d.delta - 0.098).abs() < 1e-12);
    }

    #[test]
    fn constant_corpus() {
        let mut stats = CorpusStats::new();
        for dim in EmotionDimension::ALL {
            stats.add_samples(dim, &[0.3; 6]);
        }
        let c = derive_thresholds(&stats).unwrap();
        for dim in EmotionDimension::ALL {
            assert_eq!(c.dimension(dim).extreme_threshold, 0.3);
            assert_eq!(c.dimension(dim).delta, 0.0);
        }
        assert!(c.stability_threshold() > 0.0);
    }

    #[test]
    fn stability_threshold_pools_dimensions() {
        let mut stats = CorpusStats::new();
        stats.add_samples(EmotionDimension::Valence, &[0.0, 0.1]);
        stats.add_samples(EmotionDimension::Arousal, &[0.0, -0.2]);
        stats.add_samples(EmotionDimension::Dominance, &[0.0, 0.3]);
        let c = derive_thresholds(&stats).unwrap();
        // |deltas| = {0.1, 0.2, 0.3}; P80 rank 1.6 -> 0.2 + 0.6 * 0.1
        assert!((c.stability_threshold() - 0.26).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_is_an_error() {
        let mut stats = CorpusStats::new();
        stats.add_samples(EmotionDimension::Valence, &[0.0, 0.1]);
        assert!(matches!(
            derive_thresholds(&stats),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn shifted_anchors_stay_in_range() {
        let a = PercentileAnchors::default();
        assert_eq!(a.shifted(5.0).unwrap().arousal_extreme, 85.0);
        assert_eq!(a.shifted(-5.0).unwrap().valence_extreme, 15.0);
        assert!(a.shifted(30.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let b = fit_bounds(&[-4.0, -2.0, 0.0]).unwrap();
        assert_eq!((b.raw_min(), b.raw_max()), (-4.0, 0.0));

        let b = fit_bounds(&[-1.0]).unwrap();
        assert_eq!(b.raw_min(), -1.0 - DEGENERATE_BOUNDS_EPSILON);
        assert_eq!(b.raw_max(), -1.0 + DEGENERATE_BOUNDS_EPSILON);
        assert!((normalize(-1.0, &b).value() - 0.5).abs() < 1e-9);

        let b = fit_bounds(&[-10.0, -5.0]).unwrap();
        assert_eq!(normalize(-5.0, &b).value(), 1.0);
        assert_eq!(normalize(-10.0, &b).value(), 0.0);
        assert_eq!(normalize(-7.5, &b).value(), 0.5);
        assert_eq!(normalize(3.0, &b).value(), 1.0);

        assert!(fit_bounds(&[]).is_err());
        let mut m = BTreeMap::new();
        m.insert(Metric::Ecs, vec![]);
        assert!(fit_norm_bounds(&m).is_err());
    }

    proptest! {
        #[test]
        fn percentile_extremes_and_order(mut v in prop::collection::vec(-5.0f64..5.0, 1..40)) {
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(percentile(&v, 0.0).unwrap(), min);
            prop_assert_eq!(percentile(&v, 100.0).unwrap(), max);
            let p37 = percentile(&v, 37.0).unwrap();
            v.reverse();
            prop_assert_eq!(percentile(&v, 37.0).unwrap(), p37);
        }

        #[test]
        fn normalize_monotone(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let b = NormBounds::new(-3.0, 1.0).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(normalize(lo, &b) <= normalize(hi, &b));
        }

        #[test]
        fn delta_signs_follow_direction(
            a in prop::collection::vec(-1.0f64..1.0, 2..30),
            v in prop::collection::vec(-1.0f64..1.0, 2..30),
            d in prop::collection::vec(-1.0f64..1.0, 2..30),
        ) {
            let mut stats = CorpusStats::new();
            stats.add_samples(EmotionDimension::Arousal, &a);
            stats.add_samples(EmotionDimension::Valence, &v);
            stats.add_samples(EmotionDimension::Dominance, &d);
            let c = derive_thresholds(&stats).unwrap();
            prop_assert!(c.dimension(EmotionDimension::Arousal).delta <= 0.0);
            prop_assert!(c.dimension(EmotionDimension::Valence).delta >= 0.0);
            prop_assert!(c.dimension(EmotionDimension::Dominance).delta >= 0.0);
        }
    }
}

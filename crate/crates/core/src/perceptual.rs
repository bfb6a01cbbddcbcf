//! Human ratings of rationality (ER), naturalness (EN) and relevance (RR).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{NormalizedScore, RatingRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerceptualSummary {
    pub model_id: String,
    pub er: NormalizedScore,
    pub en: NormalizedScore,
    pub rr: NormalizedScore,
    pub ers: NormalizedScore,
    pub n_records: usize,
}

/// Maps a 1-5 rating affinely onto [0, 1].
pub fn normalize_rating(r: i64) -> Result<NormalizedScore> {
    if !(1..=5).contains(&r) {
        return Err(Error::RatingOutOfRange {
            field: "rating",
            value: r,
        });
    }
    Ok(NormalizedScore::clamped((r - 1) as f64 / 4.0))
}

/// Pooled per-model means over every (annotator, dialogue) record.
///
/// Sums are accumulated as integers so the result does not depend on
/// record order.
pub fn aggregate_ratings(records: &[RatingRecord]) -> Result<BTreeMap<String, PerceptualSummary>> {
    aggregate_by(records, |r| r.model_id.clone())
}

/// Pooled means per `(model_id, dialogue_id)`.
pub fn aggregate_ratings_per_dialogue(
    records: &[RatingRecord],
) -> Result<BTreeMap<(String, String), PerceptualSummary>> {
    aggregate_by(records, |r| (r.model_id.clone(), r.dialogue_id.clone()))
}

fn aggregate_by<K: Ord>(
    records: &[RatingRecord],
    key: impl Fn(&RatingRecord) -> K,
) -> Result<BTreeMap<K, PerceptualSummary>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no rating records".into()));
    }
    struct Acc {
        model_id: String,
        er: u64,
        en: u64,
        rr: u64,
        n: usize,
    }
    let mut groups: BTreeMap<K, Acc> = BTreeMap::new();
    for r in records {
        let acc = groups.entry(key(r)).or_insert_with(|| Acc {
            model_id: r.model_id.clone(),
            er: 0,
            en: 0,
            rr: 0,
            n: 0,
        });
        acc.er += u64::from(r.er());
        acc.en += u64::from(r.en());
        acc.rr += u64::from(r.rr());
        acc.n += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(k, acc)| {
            let mean = |sum: u64| NormalizedScore::clamped((sum as f64 / acc.n as f64 - 1.0) / 4.0);
            let (er, en, rr) = (mean(acc.er), mean(acc.en), mean(acc.rr));
            let ers = NormalizedScore::mean(&[er, en, rr]).expect("three scores");
            let summary = PerceptualSummary {
                model_id: acc.model_id,
                er,
                en,
                rr,
                ers,
                n_records: acc.n,
            };
            (k, summary)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(model: &str, er: i64, en: i64, rr: i64) -> RatingRecord {
        RatingRecord::new("ann", "d1", model, er, en, rr).unwrap()
    }

    #[test]
    fn rating_normalization() {
        assert_eq!(normalize_rating(1).unwrap().value(), 0.0);
        assert_eq!(normalize_rating(3).unwrap().value(), 0.5);
        assert_eq!(normalize_rating(5).unwrap().value(), 1.0);
        assert!(normalize_rating(0).is_err());
        assert!(normalize_rating(6).is_err());
        assert_eq!(normalize_rating(2).unwrap().value(), 0.25);
    }

    #[test]
    fn aggregation_examples() {
        let s = &aggregate_ratings(&[rec("m", 5, 5, 5)]).unwrap()["m"];
        assert_eq!(
            (s.er.value(), s.en.value(), s.rr.value(), s.ers.value()),
            (1.0, 1.0, 1.0, 1.0)
        );

        let s = &aggregate_ratings(&[rec("m", 1, 3, 3), rec("m", 5, 3, 3)]).unwrap()["m"];
        assert_eq!(s.er.value(), 0.5);
        assert_eq!(s.n_records, 2);

        let s = &aggregate_ratings(&[rec("m", 4, 3, 5)]).unwrap()["m"];
        // (0.75 + 0.5 + 1.0) / 3
        assert!((s.ers.value() - 0.75).abs() < 1e-12);

        assert!(aggregate_ratings(&[]).is_err());
    }

    #[test]
    fn per_dialogue_grouping() {
        let a = RatingRecord::new("x", "d1", "m", 5, 5, 5).unwrap();
        let b = RatingRecord::new("x", "d2", "m", 1, 1, 1).unwrap();
        let g = aggregate_ratings_per_dialogue(&[a, b]).unwrap();
        assert_eq!(g[&("m".to_string(), "d1".to_string())].ers.value(), 1.0);
        assert_eq!(g[&("m".to_string(), "d2".to_string())].ers.value(), 0.0);
    }

    fn records() -> impl Strategy<Value = Vec<RatingRecord>> {
        prop::collection::vec(
            (0usize..3, 1i64..=5, 1i64..=5, 1i64..=5)
                .prop_map(|(m, er, en, rr)| rec(["a", "b", "c"][m], er, en, rr)),
            1..30,
        )
    }

    proptest! {
        #[test]
        fn permutation_and_duplication_invariant(rs in records()) {
            let base = aggregate_ratings(&rs).unwrap();
            let mut rev = rs.clone();
            rev.reverse();
            let rev_agg = aggregate_ratings(&rev).unwrap();
            let mut dup = rs.clone();
            dup.extend(rs.iter().cloned());
            let dup_agg = aggregate_ratings(&dup).unwrap();
            for (k, s) in &base {
                prop_assert_eq!(&rev_agg[k], s);
                let d = &dup_agg[k];
                prop_assert_eq!((d.er, d.en, d.rr, d.ers), (s.er, s.en, s.rr, s.ers));
                for v in [s.er, s.en, s.rr, s.ers] {
                    prop_assert!((0.0..=1.0).contains(&v.value()));
                }
            }
        }
    }
}

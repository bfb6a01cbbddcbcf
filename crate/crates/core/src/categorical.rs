//! Categorical emotion reasoning scores from a user-label x machine-label
//! rationality matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CategoricalLabel, Dialogue, NormalizedScore};

/// Rationality of every (user label, machine label) pair; rows are the user label.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningMatrix {
    cells: [[f64; 4]; 4],
}

impl Default for ReasoningMatrix {
    /// Human-rated rationality of each label pairing.
    fn default() -> Self {
        ReasoningMatrix {
            cells: [
                // neutral, happy, angry, sad
                [0.9, 0.6, 0.3, 0.4],
                [0.5, 1.0, 0.2, 0.2],
                [0.8, 0.1, 0.4, 0.5],
                [0.6, 0.2, 0.4, 0.9],
            ],
        }
    }
}

impl ReasoningMatrix {
    pub fn new(cells: [[f64; 4]; 4]) -> Result<Self> {
        for (i, row) in cells.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::validation(
                        format!("{}.{}", CategoricalLabel::ALL[i], CategoricalLabel::ALL[j]),
                        format!("cell value {v} is outside [0, 1]"),
                    ));
                }
            }
        }
        Ok(ReasoningMatrix { cells })
    }

    pub fn get(&self, user: CategoricalLabel, machine: CategoricalLabel) -> f64 {
        self.cells[user.index()][machine.index()]
    }

    pub fn min_cell(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_cell(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Machine label with the highest score for a user label; first wins on ties.
    pub fn best_response(&self, user: CategoricalLabel) -> CategoricalLabel {
        let row = &self.cells[user.index()];
        let mut best = 0;
        for j in 1..4 {
            if row[j] > row[best] {
                best = j;
            }
        }
        CategoricalLabel::ALL[best]
    }
}

type MatrixJson = BTreeMap<CategoricalLabel, BTreeMap<CategoricalLabel, f64>>;

impl Serialize for ReasoningMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: MatrixJson = CategoricalLabel::ALL
            .iter()
            .map(|&u| {
                let row = CategoricalLabel::ALL
                    .iter()
                    .map(|&m| (m, self.get(u, m)))
                    .collect();
                (u, row)
            })
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReasoningMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let map = BTreeMap::<String, BTreeMap<String, f64>>::deserialize(d)?;
        let mut cells = [[f64::NAN; 4]; 4];
        for (user, row) in &map {
            let u: CategoricalLabel = user.parse().map_err(D::Error::custom)?;
            for (machine, &v) in row {
                let m: CategoricalLabel = machine.parse().map_err(D::Error::custom)?;
                cells[u.index()][m.index()] = v;
            }
        }
        for (i, row) in cells.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(D::Error::custom(format!(
                        "matrix is missing cell {}.{}",
                        CategoricalLabel::ALL[i],
                        CategoricalLabel::ALL[j]
                    )));
                }
            }
        }
        ReasoningMatrix::new(cells).map_err(D::Error::custom)
    }
}

pub fn categorical_ers_turn(
    user_label: CategoricalLabel,
    machine_label: CategoricalLabel,
    m: &ReasoningMatrix,
) -> NormalizedScore {
    NormalizedScore::clamped(m.get(user_label, machine_label))
}

/// Mean turn score; every turn must carry both labels.
pub fn categorical_ers_dialogue(d: &Dialogue, m: &ReasoningMatrix) -> Result<NormalizedScore> {
    let scores = categorical_turn_scores(d, m)?;
    let values: Vec<_> = scores.into_iter().map(|(_, s)| s).collect();
    Ok(NormalizedScore::mean(&values).expect("dialogue has turns"))
}

/// `(user label, score)` for every turn, in order.
pub fn categorical_turn_scores(
    d: &Dialogue,
    m: &ReasoningMatrix,
) -> Result<Vec<(CategoricalLabel, NormalizedScore)>> {
    d.turns()
        .iter()
        .enumerate()
        .map(|(i, t)| match t.labels() {
            Some((u, mach)) => Ok((u, categorical_ers_turn(u, mach, m))),
            None => Err(Error::MissingLabels {
                dialogue_id: d.dialogue_id().to_string(),
                turn: i,
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DialogueTurn, TurnTrajectories};
    use proptest::prelude::*;
    use CategoricalLabel::*;

    fn labeled(pairs: &[(CategoricalLabel, CategoricalLabel)]) -> Dialogue {
        let t = TurnTrajectories::from_samples(vec![0.0], vec![0.0], vec![0.0]).unwrap();
        let turns = pairs
            .iter()
            .map(|&(u, m)| DialogueTurn::new(t.clone(), t.clone(), Some(u), Some(m)).unwrap())
            .collect();
        Dialogue::new("d", "m", turns).unwrap()
    }

    #[test]
    fn turn_lookup() {
        let m = ReasoningMatrix::default();
        assert_eq!(categorical_ers_turn(Happy, Sad, &m).value(), 0.2);
        assert_eq!(categorical_ers_turn(Happy, Happy, &m).value(), 1.0);
        assert_eq!(categorical_ers_turn(Angry, Neutral, &m).value(), 0.8);
    }

    #[test]
    fn dialogue_mean() {
        let m = ReasoningMatrix::default();
        assert_eq!(
            categorical_ers_dialogue(&labeled(&[(Neutral, Neutral)]), &m)
                .unwrap()
                .value(),
            0.9
        );
        let v = categorical_ers_dialogue(&labeled(&[(Happy, Happy), (Sad, Sad)]), &m).unwrap();
        assert!((v.value() - 0.95).abs() < 1e-12);
        assert_eq!(
            categorical_ers_dialogue(&labeled(&[(Angry, Happy)]), &m)
                .unwrap()
                .value(),
            0.1
        );
    }

    #[test]
    fn missing_labels_name_the_turn() {
        let t = TurnTrajectories::from_samples(vec![0.0], vec![0.0], vec![0.0]).unwrap();
        let turns = vec![
            DialogueTurn::new(t.clone(), t.clone(), Some(Happy), Some(Happy)).unwrap(),
            DialogueTurn::unlabeled(t.clone(), t).unwrap(),
        ];
        let d = Dialogue::new("dlg", "m", turns).unwrap();
        let err = categorical_ers_dialogue(&d, &ReasoningMatrix::default()).unwrap_err();
        assert!(matches!(err, Error::MissingLabels { turn: 1, .. }), "{err}");
    }

    #[test]
    fn best_responses() {
        let m = ReasoningMatrix::default();
        assert_eq!(m.best_response(Neutral), Neutral);
        assert_eq!(m.best_response(Happy), Happy);
        assert_eq!(m.best_response(Sad), Sad);
        assert_eq!(m.best_response(Angry), Neutral);
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let m = ReasoningMatrix::default();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ReasoningMatrix>(&text).unwrap(), m);
        let upper = text.replace("\"happy\"", "\"HAPPY\"");
        assert_eq!(serde_json::from_str::<ReasoningMatrix>(&upper).unwrap(), m);
        let bad = text.replace("0.9", "1.9");
        assert!(serde_json::from_str::<ReasoningMatrix>(&bad).is_err());
        let missing = r#"{"neutral": {"neutral": 0.5}}"#;
        assert!(serde_json::from_str::<ReasoningMatrix>(missing).is_err());
    }

    fn label() -> impl Strategy<Value = CategoricalLabel> {
        prop::sample::select(CategoricalLabel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_bounded(
            pairs in prop::collection::vec((label(), label()), 1..12),
            seed in any::<u64>(),
        ) {
            let m = ReasoningMatrix::default();
            let a = categorical_ers_dialogue(&labeled(&pairs), &m).unwrap().value();
            let mut shuffled = pairs.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let b = categorical_ers_dialogue(&labeled(&shuffled), &m).unwrap().value();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a >= m.min_cell() - 1e-12 && a <= m.max_cell() + 1e-12);
        }
    }
}

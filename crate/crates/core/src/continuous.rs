//! Contagion, balancing and stability scores over VAD trajectories,
//! single-turn and cross-turn.
//!
//! Scoring is split in two stages: `raw_*` functions compute unbounded raw
//! values (larger is better, 0 is ideal), and `normalize_*` maps them onto
//! [0, 1] with dataset-level bounds. The evaluation pipeline fits the bounds
//! between the two stages.

use serde::Serialize;

use crate::dtw::{dtw_samples, DtwConfig};
use crate::error::Result;
use crate::types::{
    Calibration, Dialogue, DialogueTurn, EmotionDimension, Metric, NormalizedScore, PerDim,
    RawScore, TurnTrajectories,
};

fn dtw(a: &[f64], b: &[f64], cfg: &DtwConfig) -> f64 {
    dtw_samples(a, b, cfg)
}

/// Raw scores are negated costs; `0.0 - cost` keeps a perfect score at +0.0.
fn penalty(cost: f64) -> RawScore {
    0.0 - cost
}

/// Contagion: negative DTW cost of machine valence and arousal against the user's.
pub fn ecs_raw(user: &TurnTrajectories, machine: &TurnTrajectories, cfg: &DtwConfig) -> RawScore {
    penalty(
        dtw(machine.valence().samples(), user.valence().samples(), cfg)
            + dtw(machine.arousal().samples(), user.arousal().samples(), cfg),
    )
}

/// Per-dimension extremeness of the user turn, judged on the turn mean.
pub fn detect_extreme(user: &TurnTrajectories, calib: &Calibration) -> PerDim<bool> {
    PerDim::from_fn(|dim| {
        let c = calib.dimension(dim);
        c.extreme_direction
            .is_extreme(user.get(dim).mean(), c.extreme_threshold)
    })
}

/// Balancing: negative DTW cost between the machine and the user shifted by
/// each extreme dimension's delta. `None` when no dimension is extreme.
pub fn ebs_raw(
    user: &TurnTrajectories,
    machine: &TurnTrajectories,
    calib: &Calibration,
    cfg: &DtwConfig,
) -> Option<RawScore> {
    ebs_raw_with_flags(user, machine, calib, cfg, &detect_extreme(user, calib))
}

fn ebs_raw_with_flags(
    user: &TurnTrajectories,
    machine: &TurnTrajectories,
    calib: &Calibration,
    cfg: &DtwConfig,
    flags: &PerDim<bool>,
) -> Option<RawScore> {
    if !flags.iter().any(|(_, &f)| f) {
        return None;
    }
    let mut cost = 0.0;
    for dim in EmotionDimension::ALL {
        if !flags[dim] {
            continue;
        }
        let target = user.get(dim).shifted(calib.dimension(dim).delta);
        cost += dtw(target.samples(), machine.get(dim).samples(), cfg);
    }
    Some(penalty(cost))
}

/// Stability: negative sum of frame-to-frame jumps strictly larger than the threshold.
pub fn ess_raw(machine: &TurnTrajectories, calib: &Calibration) -> RawScore {
    let threshold = calib.stability_threshold();
    let jumps: f64 = EmotionDimension::ALL
        .iter()
        .flat_map(|&dim| machine.get(dim).samples().windows(2))
        .map(|w| (w[1] - w[0]).abs())
        .filter(|&jump| jump > threshold)
        .sum();
    penalty(jumps)
}

/// Cross-turn stability: negative summed DTW cost between consecutive machine
/// turns. `None` for single-turn dialogues.
pub fn ct_ess_raw(dialogue: &Dialogue, cfg: &DtwConfig) -> Option<RawScore> {
    let turns = dialogue.turns();
    if turns.len() < 2 {
        return None;
    }
    let cost: f64 = turns
        .windows(2)
        .map(|pair| {
            EmotionDimension::ALL
                .iter()
                .map(|&dim| {
                    dtw(
                        pair[0].machine().get(dim).samples(),
                        pair[1].machine().get(dim).samples(),
                        cfg,
                    )
                })
                .sum::<f64>()
        })
        .sum();
    Some(penalty(cost))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawTurnScores {
    pub ecs: RawScore,
    pub ebs: Option<RawScore>,
    pub ess: RawScore,
    pub extreme_flags: PerDim<bool>,
}

pub fn raw_turn(turn: &DialogueTurn, calib: &Calibration, cfg: &DtwConfig) -> RawTurnScores {
    let flags = detect_extreme(turn.user(), calib);
    RawTurnScores {
        ecs: ecs_raw(turn.user(), turn.machine(), cfg),
        ebs: ebs_raw_with_flags(turn.user(), turn.machine(), calib, cfg, &flags),
        ess: ess_raw(turn.machine(), calib),
        extreme_flags: flags,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawDialogueScores {
    pub turns: Vec<RawTurnScores>,
    pub ct_ess: Option<RawScore>,
}

pub fn raw_dialogue(d: &Dialogue, calib: &Calibration, cfg: &DtwConfig) -> RawDialogueScores {
    RawDialogueScores {
        turns: d.turns().iter().map(|t| raw_turn(t, calib, cfg)).collect(),
        ct_ess: ct_ess_raw(d, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnScores {
    pub ecs: NormalizedScore,
    pub ebs: Option<NormalizedScore>,
    pub ess: NormalizedScore,
    pub ers: NormalizedScore,
    pub extreme_flags: PerDim<bool>,
}

impl TurnScores {
    /// Builds the tuple, averaging the present components into ERS.
    pub fn from_components(
        ecs: NormalizedScore,
        ebs: Option<NormalizedScore>,
        ess: NormalizedScore,
        extreme_flags: PerDim<bool>,
    ) -> Self {
        let ers = match ebs {
            Some(ebs) => NormalizedScore::mean(&[ecs, ebs, ess]),
            None => NormalizedScore::mean(&[ecs, ess]),
        }
        .expect("non-empty");
        TurnScores {
            ecs,
            ebs,
            ess,
            ers,
            extreme_flags,
        }
    }

    pub fn is_extreme(&self) -> bool {
        self.extreme_flags.iter().any(|(_, &f)| f)
    }
}

pub fn normalize_turn(raw: &RawTurnScores, calib: &Calibration) -> Result<TurnScores> {
    let ecs = calib.bounds(Metric::Ecs)?.normalize(raw.ecs);
    let ess = calib.bounds(Metric::Ess)?.normalize(raw.ess);
    let ebs = match raw.ebs {
        Some(v) => Some(calib.bounds(Metric::Ebs)?.normalize(v)),
        None => None,
    };
    Ok(TurnScores::from_components(
        ecs,
        ebs,
        ess,
        raw.extreme_flags,
    ))
}

/// Normalized single-turn scores; `calib` must carry bounds for ECS, ESS and
/// (when the turn is extreme) EBS.
pub fn score_turn(turn: &DialogueTurn, calib: &Calibration, cfg: &DtwConfig) -> Result<TurnScores> {
    normalize_turn(&raw_turn(turn, calib, cfg), calib)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DialogueScores {
    pub ct_ecs: NormalizedScore,
    /// Absent when no turn was extreme; reports render it as 0.
    pub ct_ebs: Option<NormalizedScore>,
    pub ct_ess: NormalizedScore,
    pub ct_ers: NormalizedScore,
    pub per_turn: Vec<TurnScores>,
}

pub fn normalize_dialogue(raw: &RawDialogueScores, calib: &Calibration) -> Result<DialogueScores> {
    let per_turn = raw
        .turns
        .iter()
        .map(|t| normalize_turn(t, calib))
        .collect::<Result<Vec<_>>>()?;
    let ecs: Vec<_> = per_turn.iter().map(|t| t.ecs).collect();
    let ebs: Vec<_> = per_turn.iter().filter_map(|t| t.ebs).collect();
    let ct_ecs = NormalizedScore::mean(&ecs).expect("dialogue has turns");
    let ct_ebs = NormalizedScore::mean(&ebs);
    let ct_ess = match raw.ct_ess {
        Some(v) => calib.bounds(Metric::CtEss)?.normalize(v),
        None => per_turn[0].ess,
    };
    let ct_ers = match ct_ebs {
        Some(ebs) => NormalizedScore::mean(&[ct_ecs, ebs, ct_ess]),
        None => NormalizedScore::mean(&[ct_ecs, ct_ess]),
    }
    .expect("non-empty");
    Ok(DialogueScores {
        ct_ecs,
        ct_ebs,
        ct_ess,
        ct_ers,
        per_turn,
    })
}

pub fn score_dialogue(
    d: &Dialogue,
    calib: &Calibration,
    cfg: &DtwConfig,
) -> Result<DialogueScores> {
    normalize_dialogue(&raw_dialogue(d, calib, cfg), calib)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::types::NormBounds;
    use proptest::prelude::*;

    fn turn(v: &[f64], a: &[f64], d: &[f64]) -> TurnTrajectories {
        TurnTrajectories::from_samples(v.to_vec(), a.to_vec(), d.to_vec()).unwrap()
    }

    fn flat(x: f64, n: usize) -> Vec<f64> {
        vec![x; n]
    }

    fn cfg() -> DtwConfig {
        DtwConfig::default()
    }

    fn bounded() -> Calibration {
        let mut b = BTreeMap::new();
        b.insert(Metric::Ecs, NormBounds::new(-2.0, 0.0).unwrap());
        b.insert(Metric::Ebs, NormBounds::new(-2.0, 0.0).unwrap());
        b.insert(Metric::Ess, NormBounds::new(-2.0, 0.0).unwrap());
        b.insert(Metric::CtEss, NormBounds::new(-4.0, 0.0).unwrap());
        Calibration::default().with_norm_bounds(b)
    }

    #[test]
    fn ecs_examples() {
        let u = turn(&[0.1, 0.2], &[0.3, 0.1], &[0.0, 0.0]);
        assert_eq!(ecs_raw(&u, &u, &cfg()), 0.0);

        let u = turn(&[0.0], &[0.0], &[0.0]);
        let m = turn(&[1.0], &[1.0], &[5.0]);
        assert_eq!(ecs_raw(&u, &m, &cfg()), -2.0);

        // user V=[0,0,1], A=[0,1]; machine V=[0,1], A=[0,0,1]; lengths per
        // dimension must match inside a turn, so dominance pads to length
        let u = TurnTrajectories::new(
            crate::types::Trajectory::from_samples(vec![0.0, 0.0, 1.0]).unwrap(),
            crate::types::Trajectory::from_samples(vec![0.0, 1.0, 1.0]).unwrap(),
            crate::types::Trajectory::from_samples(vec![0.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let m = turn(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(ecs_raw(&u, &m, &cfg()), 0.0);
    }

    #[test]
    fn extreme_detection() {
        let c = Calibration::default();
        let flags = detect_extreme(&turn(&[0.0], &[0.5], &[0.5]), &c);
        assert!(flags.arousal);
        assert!(!flags.valence);
        assert!(!flags.dominance);

        let at = turn(&[-0.07], &[0.345], &[0.210]);
        let flags = detect_extreme(&at, &c);
        assert!(!flags.valence && !flags.arousal && !flags.dominance);

        let low = turn(&[-0.5], &[0.0], &[0.0]);
        let flags = detect_extreme(&low, &c);
        assert!(flags.valence && flags.dominance && !flags.arousal);
    }

    #[test]
    fn ebs_examples() {
        let c = Calibration::default();
        let calm = turn(&[0.0, 0.0], &[0.0, 0.0], &[0.3, 0.3]);
        assert_eq!(ebs_raw(&calm, &calm, &c, &cfg()), None);

        let u = turn(&[0.0, 0.0], &[0.5, 0.5], &[0.3, 0.3]);
        let m = turn(&[0.9, 0.9], &[0.395, 0.395], &[0.9, 0.9]);
        let v = ebs_raw(&u, &m, &c, &cfg()).unwrap();
        assert!(v.abs() < 1e-12, "{v}");

        let u = turn(&[0.0], &[0.5], &[0.3]);
        let v = ebs_raw(&u, &u, &c, &cfg()).unwrap();
        assert!((v - -0.105).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ess_examples() {
        let c = Calibration::default();
        assert_eq!(
            ess_raw(&turn(&flat(0.2, 4), &flat(0.1, 4), &flat(0.0, 4)), &c),
            0.0
        );
        let m = turn(&[0.0, 0.05, 0.05], &flat(0.1, 3), &flat(0.1, 3));
        assert!((ess_raw(&m, &c) - -0.05).abs() < 1e-12);
        let m = turn(&[0.0, 0.04, 0.08], &flat(0.1, 3), &flat(0.1, 3));
        // 0.04 - 0.0 and 0.08 - 0.04 are both <= 0.04 in binary floating point
        assert_eq!(ess_raw(&m, &c), 0.0);
    }

    #[test]
    fn ers_averaging() {
        let f = PerDim::default();
        let s = |x: f64| NormalizedScore::new(x).unwrap();
        let t = TurnScores::from_components(s(0.8), None, s(0.6), f);
        assert!((t.ers.value() - 0.7).abs() < 1e-12);
        let t = TurnScores::from_components(s(0.9), Some(s(0.6)), s(0.9), f);
        assert!((t.ers.value() - 0.8).abs() < 1e-12);
        let t = TurnScores::from_components(s(1.0), Some(s(1.0)), s(1.0), f);
        assert_eq!(t.ers.value(), 1.0);
    }

    #[test]
    fn missing_bounds_is_reported() {
        let u = turn(&[0.0], &[0.0], &[0.3]);
        let dt = DialogueTurn::unlabeled(u.clone(), u).unwrap();
        let err = score_turn(&dt, &Calibration::default(), &cfg()).unwrap_err();
        assert!(matches!(err, crate::Error::MissingBounds(Metric::Ecs)));
    }

    fn dialogue(turns: Vec<(TurnTrajectories, TurnTrajectories)>) -> Dialogue {
        Dialogue::new(
            "d",
            "m",
            turns
                .into_iter()
                .map(|(u, m)| DialogueTurn::unlabeled(u, m).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cross_turn_reductions() {
        let c = bounded();
        let u = turn(&[0.0, 0.1], &[0.2, 0.6], &[0.3, 0.3]);
        let m = turn(&[0.1, 0.1], &[0.3, 0.3], &[0.3, 0.3]);
        let d = dialogue(vec![(u.clone(), m.clone())]);
        let s = score_dialogue(&d, &c, &cfg()).unwrap();
        assert_eq!(s.ct_ecs, s.per_turn[0].ecs);
        assert_eq!(s.ct_ess, s.per_turn[0].ess);
        assert_eq!(ct_ess_raw(&d, &cfg()), None);

        let d = dialogue(vec![(u.clone(), m.clone()), (u.clone(), m.clone()), (u, m)]);
        assert_eq!(ct_ess_raw(&d, &cfg()), Some(0.0));
    }

    #[test]
    fn ct_ecs_is_mean_and_ct_ebs_absent_without_extremes() {
        let c = bounded();
        // ECS raw -1.2 and -0.4 on bounds (-2, 0) -> 0.4 and 0.8
        let u = turn(&[0.0], &[0.0], &[0.3]);
        let m1 = turn(&[0.6], &[0.6], &[0.3]);
        let m2 = turn(&[0.2], &[0.2], &[0.3]);
        let d = dialogue(vec![(u.clone(), m1), (u, m2)]);
        let s = score_dialogue(&d, &c, &cfg()).unwrap();
        assert!((s.per_turn[0].ecs.value() - 0.4).abs() < 1e-12);
        assert!((s.per_turn[1].ecs.value() - 0.8).abs() < 1e-12);
        assert!((s.ct_ecs.value() - 0.6).abs() < 1e-12);
        assert_eq!(s.ct_ebs, None);
        let expected = (s.ct_ecs.value() + s.ct_ess.value()) / 2.0;
        assert!((s.ct_ers.value() - expected).abs() < 1e-12);
    }

    #[test]
    fn ct_ebs_averages_only_extreme_turns() {
        let c = bounded();
        let calm = turn(&[0.0], &[0.0], &[0.3]);
        let hot = turn(&[0.0], &[0.6], &[0.3]);
        // balanced reply: arousal 0.6 - 0.105
        let reply = turn(&[0.0], &[0.495], &[0.3]);
        let d = dialogue(vec![(calm.clone(), calm), (hot, reply)]);
        let s = score_dialogue(&d, &c, &cfg()).unwrap();
        assert_eq!(s.per_turn[0].ebs, None);
        assert!(s.per_turn[1].ebs.is_some());
        assert_eq!(s.ct_ebs, s.per_turn[1].ebs);
    }

    fn traj(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, len)
    }

    fn turn_strategy() -> impl Strategy<Value = TurnTrajectories> {
        (1usize..8)
            .prop_flat_map(|n| (traj(n), traj(n), traj(n)).prop_map(|(v, a, d)| turn(&v, &a, &d)))
    }

    proptest! {
        #[test]
        fn ecs_nonpositive_and_mirror_is_best(u in turn_strategy(), m in turn_strategy()) {
            let raw = ecs_raw(&u, &m, &cfg());
            prop_assert!(raw <= 0.0);
            prop_assert_eq!(ecs_raw(&u, &u, &cfg()), 0.0);
        }

        #[test]
        fn ess_translation_invariant(m in turn_strategy(), shift in -3.0f64..3.0) {
            let c = Calibration::default();
            let shifted = TurnTrajectories::new(
                m.valence().shifted(shift),
                m.arousal().shifted(shift),
                m.dominance().shifted(shift),
            ).unwrap();
            // shifting perturbs deltas by rounding only; compare with a
            // threshold tolerance as jumps landing on the threshold are measure-zero
            prop_assert!((ess_raw(&m, &c) - ess_raw(&shifted, &c)).abs() < 1e-9);
        }

        #[test]
        fn ebs_present_iff_extreme(u in turn_strategy(), m in turn_strategy()) {
            let c = Calibration::default();
            let flags = detect_extreme(&u, &c);
            let any = flags.valence || flags.arousal || flags.dominance;
            prop_assert_eq!(ebs_raw(&u, &m, &c, &cfg()).is_some(), any);
        }

        #[test]
        fn ct_ess_reversal_invariant(turns in prop::collection::vec((turn_strategy(), turn_strategy()), 1..5)) {
            let fwd = dialogue(turns.clone());
            let mut rev_turns = turns;
            rev_turns.reverse();
            let rev = dialogue(rev_turns);
            match (ct_ess_raw(&fwd, &cfg()), ct_ess_raw(&rev, &cfg())) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false),
            }
        }

        #[test]
        fn normalized_outputs_in_unit_interval(turns in prop::collection::vec((turn_strategy(), turn_strategy()), 1..4)) {
            let d = dialogue(turns);
            let s = score_dialogue(&d, &bounded(), &cfg()).unwrap();
            let mut all = vec![s.ct_ecs, s.ct_ess, s.ct_ers];
            all.extend(s.ct_ebs);
            for t in &s.per_turn {
                all.extend([t.ecs, t.ess, t.ers]);
                all.extend(t.ebs);
                prop_assert_eq!(t.ebs.is_some(), t.is_extreme());
            }
            for v in all {
                prop_assert!((0.0..=1.0).contains(&v.value()));
            }
            prop_assert_eq!(s.ct_ebs.is_some(), s.per_turn.iter().any(|t| t.is_extreme()));
        }
    }
}

//! Deterministic synthetic dialogues with controllable contagion,
//! balancing and instability.
//!
//! Identical `(spec, seed)` pairs produce identical dialogues and therefore
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calibration::{derive_thresholds, CorpusStats};
use crate::error::{Error, Result};
use crate::io::{ratings_to_csv, write_dialogues};
use crate::types::{
    Calibration, CategoricalLabel, Dialogue, DialogueTurn, EmotionDimension, PerDim, RatingRecord,
    TurnTrajectories,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Machine trajectories equal the user's.
    Mirror,
    /// Extreme users; machine tracks the user shifted by the default balancing deltas.
    Balance,
    /// Flat machine output with injected jumps in the selected dimensions.
    Unstable,
    /// Shared user turns answered by models of clearly increasing noise.
    Separated,
    /// Small grid-valued dataset with labels and ratings for end-to-end checks.
    Golden,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(Scenario::Mirror),
            "balance" => Ok(Scenario::Balance),
            "unstable" => Ok(Scenario::Unstable),
            "separated" => Ok(Scenario::Separated),
            "golden" => Ok(Scenario::Golden),
            other => Err(Error::InvalidSpec(format!(
                "unknown scenario {other:?} (mirror|balance|unstable|separated|golden)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub scenario: Scenario,
    pub models: usize,
    pub dialogues_per_model: usize,
    pub turns_per_dialogue: usize,
    pub samples_per_turn: usize,
    /// Jumps injected per affected dimension (unstable scenario).
    pub jump_count: usize,
    pub jump_size: f64,
    pub jump_dims: Vec<EmotionDimension>,
}

impl FixtureSpec {
    pub fn new(scenario: Scenario) -> Self {
        let base = FixtureSpec {
            scenario,
            models: 1,
            dialogues_per_model: 4,
            turns_per_dialogue: 1,
            samples_per_turn: 10,
            jump_count: 3,
            jump_size: 0.2,
            jump_dims: vec![EmotionDimension::Arousal],
        };
        match scenario {
            Scenario::Separated => FixtureSpec {
                models: 3,
                dialogues_per_model: 8,
                turns_per_dialogue: 3,
                samples_per_turn: 12,
                ..base
            },
            Scenario::Golden => FixtureSpec {
                models: 3,
                dialogues_per_model: 4,
                turns_per_dialogue: 2,
                samples_per_turn: 4,
                ..base
            },
            _ => base,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.models == 0 || self.dialogues_per_model == 0 || self.turns_per_dialogue == 0 {
            return Err(Error::InvalidSpec(
                "models, dialogues and turns must all be at least 1".into(),
            ));
        }
        if self.samples_per_turn == 0 {
            return Err(Error::InvalidSpec(
                "samples_per_turn must be at least 1".into(),
            ));
        }
        if self.scenario == Scenario::Unstable {
            let threshold = Calibration::default().stability_threshold();
            if !(self.jump_size.is_finite() && self.jump_size > threshold) {
                return Err(Error::InvalidSpec(format!(
                    "jump_size {} must exceed the stability threshold {threshold}",
                    self.jump_size
                )));
            }
            if self.jump_count >= self.samples_per_turn {
                return Err(Error::InvalidSpec(format!(
                    "{} jumps need at least {} samples per turn",
                    self.jump_count,
                    self.jump_count + 1
                )));
            }
        }
        if self.scenario == Scenario::Golden && self.models > GOLDEN_MODELS.len() {
            return Err(Error::InvalidSpec(format!(
                "golden scenario supports at most {} models",
                GOLDEN_MODELS.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub dialogues: Vec<Dialogue>,
    pub ratings: Vec<RatingRecord>,
}

impl Fixture {
    /// Writes `dialogues/*.json` and, when present, `ratings.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = write_dialogues(&dir.join("dialogues"), &self.dialogues)?;
        if !self.ratings.is_empty() {
            let p = dir.join("ratings.csv");
            fs::write(&p, ratings_to_csv(&self.ratings)).map_err(|e| Error::io(&p, e))?;
            paths.push(p);
        }
        Ok(paths)
    }
}

const GOLDEN_MODELS: [&str; 3] = ["alpha", "beta", "gamma"];
const SEPARATED_NOISE: [f64; 3] = [0.005, 0.03, 0.08];
/// Multiples of the delta a separated model overshoots the balanced path by.
const SEPARATED_OVERSHOOT: [f64; 3] = [0.0, 1.0, 2.5];

fn model_id(i: usize) -> String {
    format!("model_{}", (b'a' + (i % 26) as u8) as char)
}

/// Rounds to three decimals so generated files stay readable.
fn milli(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Bounded random walk on a 0.001 grid.
fn walk(rng: &mut ChaCha8Rng, n: usize, start: f64, step: f64) -> Vec<f64> {
    let mut v = start;
    (0..n)
        .map(|_| {
            let out = milli(v);
            v = (v + rng.random_range(-step..=step)).clamp(-0.95, 0.95);
            out
        })
        .collect()
}

fn user_turn(rng: &mut ChaCha8Rng, n: usize, centers: PerDim<f64>) -> TurnTrajectories {
    let v = walk(rng, n, centers.valence, 0.03);
    let a = walk(rng, n, centers.arousal, 0.03);
    let d = walk(rng, n, centers.dominance, 0.03);
    TurnTrajectories::from_samples(v, a, d).expect("generated trajectories are valid")
}

fn random_centers(rng: &mut ChaCha8Rng) -> PerDim<f64> {
    PerDim::from_fn(|_| milli(rng.random_range(-0.5..0.6)))
}

fn extreme_centers(rng: &mut ChaCha8Rng) -> PerDim<f64> {
    PerDim::new(
        milli(rng.random_range(-0.6..-0.3)),
        milli(rng.random_range(0.5..0.8)),
        milli(rng.random_range(-0.3..0.0)),
    )
}

fn map_turn(
    t: &TurnTrajectories,
    mut f: impl FnMut(EmotionDimension, f64) -> f64,
) -> TurnTrajectories {
    let dims = PerDim::from_fn(|dim| {
        t.get(dim)
            .samples()
            .iter()
            .map(|&x| f(dim, x))
            .collect::<Vec<_>>()
    });
    TurnTrajectories::from_samples(dims.valence, dims.arousal, dims.dominance)
        .expect("mapped trajectories are valid")
}

/// Flat zero output; each affected dimension alternates `0 -> s -> 0 ...`
/// at `jump_count` evenly spaced positions, so every jump is exactly `s`.
fn unstable_machine(spec: &FixtureSpec) -> TurnTrajectories {
    let n = spec.samples_per_turn;
    let stepped = || {
        let mut v = vec![0.0; n];
        let mut level = 0.0;
        let mut next_jump = 1;
        let mut jumps = 0;
        let spacing = (n - 1) / spec.jump_count.max(1);
        for (i, slot) in v.iter_mut().enumerate() {
            if jumps < spec.jump_count && i == next_jump {
                level = if level == 0.0 { spec.jump_size } else { 0.0 };
                jumps += 1;
                next_jump += spacing.max(1);
            }
            *slot = level;
        }
        v
    };
    let dims = PerDim::from_fn(|dim| {
        if spec.jump_dims.contains(&dim) {
            stepped()
        } else {
            vec![0.0; n]
        }
    });
    TurnTrajectories::from_samples(dims.valence, dims.arousal, dims.dominance).expect("valid")
}

fn rating(rng: &mut ChaCha8Rng, center: i64) -> i64 {
    (center + rng.random_range(-1..=1)).clamp(1, 5)
}

fn random_label(rng: &mut ChaCha8Rng) -> CategoricalLabel {
    CategoricalLabel::ALL[rng.random_range(0..4)]
}

pub fn generate_fixture(spec: &FixtureSpec, seed: u64) -> Result<Fixture> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.scenario {
        Scenario::Mirror | Scenario::Balance | Scenario::Unstable => simple(spec, &mut rng),
        Scenario::Separated => separated(spec, &mut rng),
        Scenario::Golden => golden(spec, &mut rng),
    }
}

fn simple(spec: &FixtureSpec, rng: &mut ChaCha8Rng) -> Result<Fixture> {
    let calib = Calibration::default();
    let mut dialogues = Vec::new();
    for m in 0..spec.models {
        for k in 0..spec.dialogues_per_model {
            let mut turns = Vec::with_capacity(spec.turns_per_dialogue);
            for _ in 0..spec.turns_per_dialogue {
                let (user, machine) = match spec.scenario {
                    Scenario::Mirror => {
                        let c = random_centers(rng);
                        let u = user_turn(rng, spec.samples_per_turn, c);
                        (u.clone(), u)
                    }
                    Scenario::Balance => {
                        let c = extreme_centers(rng);
                        let u = user_turn(rng, spec.samples_per_turn, c);
                        let machine = map_turn(&u, |dim, x| x + calib.dimension(dim).delta);
                        (u, machine)
                    }
                    _ => {
                        let c = random_centers(rng);
                        (
                            user_turn(rng, spec.samples_per_turn, c),
                            unstable_machine(spec),
                        )
                    }
                };
                turns.push(DialogueTurn::unlabeled(user, machine)?);
            }
            dialogues.push(Dialogue::new(format!("dlg_{k:03}"), model_id(m), turns)?);
        }
    }
    Ok(Fixture {
        dialogues,
        ratings: Vec::new(),
    })
}

/// User turns drift slowly around one center per dialogue. Every model
/// answers the same user turns along the balanced path (user plus the delta
/// derived from those user turns). Later models overshoot that path by an amount that
/// alternates between turns and add more frame noise, so every continuous
/// column degrades with the model index, as do labels and ratings.
fn separated(spec: &FixtureSpec, rng: &mut ChaCha8Rng) -> Result<Fixture> {
    let prompts: Vec<Vec<(TurnTrajectories, CategoricalLabel)>> = (0..spec.dialogues_per_model)
        .map(|k| {
            let base = if k % 2 == 0 {
                extreme_centers(rng)
            } else {
                random_centers(rng)
            };
            (0..spec.turns_per_dialogue)
                .map(|_| {
                    let c = base.map(|&x| milli(x + rng.random_range(-0.03..=0.03)));
                    (user_turn(rng, spec.samples_per_turn, c), random_label(rng))
                })
                .collect()
        })
        .collect();
    let matrix = crate::categorical::ReasoningMatrix::default();
    let calib = derive_thresholds(&CorpusStats::from_turns(
        prompts.iter().flatten().map(|(user, _)| user),
    ))?;
    let mut dialogues = Vec::new();
    let mut ratings = Vec::new();
    for m in 0..spec.models {
        let scale = (m as f64 / 2.0).max(1.0);
        let noise = SEPARATED_NOISE[m.min(2)] * scale;
        let overshoot = SEPARATED_OVERSHOOT[m.min(2)] * scale;
        for (k, prompt) in prompts.iter().enumerate() {
            let turns = prompt
                .iter()
                .enumerate()
                .map(|(t, (user, ul))| {
                    let swing = if t % 2 == 0 { 1.5 } else { 0.5 };
                    let machine = map_turn(user, |dim, x| {
                        let delta = calib.dimension(dim).delta;
                        milli(
                            x + delta * (1.0 + overshoot * swing)
                                + rng.random_range(-noise..=noise),
                        )
                    });
                    let ml = if m == 0 {
                        matrix.best_response(*ul)
                    } else if m == 1 {
                        *ul
                    } else {
                        worst_response(&matrix, *ul)
                    };
                    DialogueTurn::new(user.clone(), machine, Some(*ul), Some(ml))
                })
                .collect::<Result<Vec<_>>>()?;
            let id = format!("dlg_{k:03}");
            for a in 0..3 {
                let center = 5 - 2 * m.min(2) as i64;
                ratings.push(RatingRecord::new(
                    format!("ann_{a}"),
                    id.clone(),
                    model_id(m),
                    rating(rng, center),
                    rating(rng, center),
                    rating(rng, center),
                )?);
            }
            dialogues.push(Dialogue::new(id, model_id(m), turns)?);
        }
    }
    Ok(Fixture { dialogues, ratings })
}

fn worst_response(
    matrix: &crate::categorical::ReasoningMatrix,
    user: CategoricalLabel,
) -> CategoricalLabel {
    let mut worst = CategoricalLabel::Neutral;
    for l in CategoricalLabel::ALL {
        if matrix.get(user, l) < matrix.get(user, worst) {
            worst = l;
        }
    }
    worst
}

/// Values on a 0.05 grid (`k / 20`) so hand calculations stay exact-ish.
fn grid(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) / 20.0
}

fn grid_turn(rng: &mut ChaCha8Rng, n: usize, lo: i32, hi: i32) -> TurnTrajectories {
    let mut dim = || (0..n).map(|_| grid(rng, lo, hi)).collect::<Vec<_>>();
    let (v, a, d) = (dim(), dim(), dim());
    TurnTrajectories::from_samples(v, a, d).expect("valid")
}

/// A user turn whose means cannot cross the default thresholds.
fn calm_turn(rng: &mut ChaCha8Rng, n: usize) -> TurnTrajectories {
    let v = (0..n).map(|_| grid(rng, 0, 10)).collect();
    let a = (0..n).map(|_| grid(rng, -10, 5)).collect();
    let d = (0..n).map(|_| grid(rng, 6, 14)).collect();
    TurnTrajectories::from_samples(v, a, d).expect("valid")
}

/// `alpha` echoes the user, `beta` echoes with one-step grid jitter and
/// `gamma` answers with unrelated values. Every third user turn is calm.
fn golden(spec: &FixtureSpec, rng: &mut ChaCha8Rng) -> Result<Fixture> {
    let n = spec.samples_per_turn;
    let prompts: Vec<Vec<(TurnTrajectories, CategoricalLabel)>> = (0..spec.dialogues_per_model)
        .map(|k| {
            (0..spec.turns_per_dialogue)
                .map(|t| {
                    let user = if (k + t) % 3 == 0 {
                        calm_turn(rng, n)
                    } else {
                        grid_turn(rng, n, -12, 14)
                    };
                    (user, random_label(rng))
                })
                .collect()
        })
        .collect();
    let mut dialogues = Vec::new();
    let mut ratings = Vec::new();
    for (m, &model) in GOLDEN_MODELS.iter().enumerate().take(spec.models) {
        for (k, prompt) in prompts.iter().enumerate() {
            let turns = prompt
                .iter()
                .map(|(user, ul)| {
                    let machine = match m {
                        0 => user.clone(),
                        1 => map_turn(user, |_, x| {
                            (x * 20.0 + f64::from(rng.random_range(-1..=1))).round() / 20.0
                        }),
                        _ => grid_turn(rng, n, -12, 14),
                    };
                    let ml = random_label(rng);
                    DialogueTurn::new(user.clone(), machine, Some(*ul), Some(ml))
                })
                .collect::<Result<Vec<_>>>()?;
            let id = format!("dlg_{k:02}");
            for a in 0..2 {
                ratings.push(RatingRecord::new(
                    format!("ann_{a}"),
                    id.clone(),
                    model,
                    rng.random_range(1..=5),
                    rng.random_range(1..=5),
                    rng.random_range(1..=5),
                )?);
            }
            dialogues.push(Dialogue::new(id, model, turns)?);
        }
    }
    Ok(Fixture { dialogues, ratings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::ess_raw;
    use crate::io::dialogue_to_json;

    #[test]
    fn mirror_machine_equals_user() {
        let f = generate_fixture(&FixtureSpec::new(Scenario::Mirror), 3).unwrap();
        for d in &f.dialogues {
            for t in d.turns() {
                assert_eq!(t.user(), t.machine());
            }
        }
    }

    #[test]
    fn balance_machine_tracks_shifted_user() {
        let calib = Calibration::default();
        let f = generate_fixture(&FixtureSpec::new(Scenario::Balance), 3).unwrap();
        for d in &f.dialogues {
            for t in d.turns() {
                for dim in EmotionDimension::ALL {
                    let shifted = t.user().get(dim).shifted(calib.dimension(dim).delta);
                    assert_eq!(shifted.samples(), t.machine().get(dim).samples());
                }
            }
        }
    }

    #[test]
    fn unstable_ess_matches_construction() {
        for (k, s, dims) in [
            (3, 0.2, vec![EmotionDimension::Arousal]),
            (
                5,
                0.25,
                vec![EmotionDimension::Valence, EmotionDimension::Dominance],
            ),
            (1, 0.05, EmotionDimension::ALL.to_vec()),
        ] {
            let spec = FixtureSpec {
                jump_count: k,
                jump_size: s,
                jump_dims: dims.clone(),
                ..FixtureSpec::new(Scenario::Unstable)
            };
            let f = generate_fixture(&spec, 11).unwrap();
            let calib = Calibration::default();
            for d in &f.dialogues {
                let raw = ess_raw(d.turns()[0].machine(), &calib);
                let expected = -(k as f64) * s * dims.len() as f64;
                assert!((raw - expected).abs() < 1e-12, "{raw} vs {expected}");
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        for scenario in [
            Scenario::Mirror,
            Scenario::Balance,
            Scenario::Unstable,
            Scenario::Separated,
            Scenario::Golden,
        ] {
            let spec = FixtureSpec::new(scenario);
            let a = generate_fixture(&spec, 42).unwrap();
            let b = generate_fixture(&spec, 42).unwrap();
            let text = |f: &Fixture| {
                f.dialogues.iter().map(dialogue_to_json).collect::<String>()
                    + &ratings_to_csv(&f.ratings)
            };
            assert_eq!(text(&a), text(&b));
            let c = generate_fixture(&spec, 43).unwrap();
            assert_ne!(text(&a), text(&c));
        }
    }

    #[test]
    fn invalid_specs() {
        let spec = FixtureSpec {
            jump_size: 0.01,
            ..FixtureSpec::new(Scenario::Unstable)
        };
        assert!(matches!(
            generate_fixture(&spec, 0),
            Err(Error::InvalidSpec(_))
        ));
        let spec = FixtureSpec {
            models: 0,
            ..FixtureSpec::new(Scenario::Mirror)
        };
        assert!(generate_fixture(&spec, 0).is_err());
        assert!("bogus".parse::<Scenario>().is_err());
    }
}

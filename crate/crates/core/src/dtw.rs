//! Unconstrained dynamic time warping between two affect trajectories.
//!
//! Step set is {(1,0), (0,1), (1,1)} with both endpoints pinned. The full
//! cost matrix is materialized; turns are short enough that banding is not
//! worth the approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalCost {
    #[default]
    AbsoluteDifference,
    SquaredDifference,
}

impl LocalCost {
    #[inline]
    pub fn eval(self, a: f64, b: f64) -> f64 {
        let d = a - b;
        match self {
            LocalCost::AbsoluteDifference => d.abs(),
            LocalCost::SquaredDifference => d * d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DtwConfig {
    pub local_cost: LocalCost,
    /// Divide the cumulative cost by the length of the optimal warping path.
    pub path_normalize: bool,
}

/// Cumulative cost matrix, row-major, `(n + 1) x (m + 1)` with an infinite border.
struct CostMatrix {
    cols: usize,
    cells: Vec<f64>,
}

impl CostMatrix {
    fn build(a: &[f64], b: &[f64], cost: LocalCost) -> Self {
        let (n, m) = (a.len(), b.len());
        let cols = m + 1;
        let mut cells = vec![f64::INFINITY; (n + 1) * cols];
        cells[0] = 0.0;
        for i in 1..=n {
            for j in 1..=m {
                let best = cells[(i - 1) * cols + (j - 1)]
                    .min(cells[(i - 1) * cols + j])
                    .min(cells[i * cols + (j - 1)]);
                cells[i * cols + j] = cost.eval(a[i - 1], b[j - 1]) + best;
            }
        }
        CostMatrix { cols, cells }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols + j]
    }

    /// Backtracks from the far corner. Ties prefer the diagonal, then a step in `a`.
    fn path(&self, n: usize, m: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::with_capacity(n + m);
        let (mut i, mut j) = (n, m);
        path.push((i - 1, j - 1));
        while (i, j) != (1, 1) {
            let diag = self.at(i - 1, j - 1);
            let up = self.at(i - 1, j);
            let left = self.at(i, j - 1);
            if diag <= up && diag <= left {
                i -= 1;
                j -= 1;
            } else if up <= left {
                i -= 1;
            } else {
                j -= 1;
            }
            path.push((i - 1, j - 1));
        }
        path.reverse();
        path
    }
}

fn check_non_empty(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(())
}

/// Minimum cumulative local cost over all monotone alignments of `a` and `b`.
pub fn dtw_distance(a: &Trajectory, b: &Trajectory, cfg: &DtwConfig) -> Result<f64> {
    check_non_empty(a, b)?;
    Ok(dtw_samples(a.samples(), b.samples(), cfg))
}

/// An optimal warping path as 0-based `(index_in_a, index_in_b)` pairs,
/// starting at `(0, 0)` and ending at `(a.len() - 1, b.len() - 1)`.
pub fn dtw_path(a: &Trajectory, b: &Trajectory, cfg: &DtwConfig) -> Result<Vec<(usize, usize)>> {
    check_non_empty(a, b)?;
    let (sa, sb) = (a.samples(), b.samples());
    Ok(CostMatrix::build(sa, sb, cfg.local_cost).path(sa.len(), sb.len()))
}

/// Slice-level kernel; callers guarantee both inputs are non-empty.
pub(crate) fn dtw_samples(a: &[f64], b: &[f64], cfg: &DtwConfig) -> f64 {
    debug_assert!(!a.is_empty() && !b.is_empty());
    let matrix = CostMatrix::build(a, b, cfg.local_cost);
    let total = matrix.at(a.len(), b.len());
    if cfg.path_normalize {
        total / matrix.path(a.len(), b.len()).len() as f64
    } else {
        total
    }
}

/// Sum of local costs along `path`.
pub fn path_cost(a: &Trajectory, b: &Trajectory, path: &[(usize, usize)], cost: LocalCost) -> f64 {
    path.iter()
        .map(|&(i, j)| cost.eval(a.samples()[i], b.samples()[j]))
        .sum()
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Exhaustive enumeration of warping paths; exponential, tiny inputs only.

    use super::LocalCost;

    pub fn brute_force(a: &[f64], b: &[f64], cost: LocalCost) -> f64 {
        fn walk(
            a: &[f64],
            b: &[f64],
            i: usize,
            j: usize,
            acc: f64,
            cost: LocalCost,
            best: &mut f64,
        ) {
            let acc = acc + cost.eval(a[i], b[j]);
            if i + 1 == a.len() && j + 1 == b.len() {
                if acc < *best {
                    *best = acc;
                }
                return;
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, acc, cost, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, acc, cost, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, acc, cost, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, cost, &mut best);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(v: &[f64]) -> Trajectory {
        Trajectory::from_samples(v.to_vec()).unwrap()
    }

    fn abs() -> DtwConfig {
        DtwConfig::default()
    }

    #[test]
    fn identical_sequences_cost_zero() {
        let a = t(&[0.3, 0.5, 0.2]);
        assert_eq!(dtw_distance(&a, &a, &abs()).unwrap(), 0.0);
    }

    #[test]
    fn single_elements() {
        assert_eq!(dtw_distance(&t(&[0.0]), &t(&[1.0]), &abs()).unwrap(), 1.0);
    }

    #[test]
    fn compression_path_is_free() {
        let (a, b) = (t(&[0.0, 0.0, 1.0]), t(&[0.0, 1.0]));
        assert_eq!(
            oracle::brute_force(a.samples(), b.samples(), LocalCost::AbsoluteDifference),
            0.0
        );
        assert_eq!(dtw_distance(&a, &b, &abs()).unwrap(), 0.0);
        let path = dtw_path(&a, &b, &abs()).unwrap();
        assert_eq!(path_cost(&a, &b, &path, LocalCost::AbsoluteDifference), 0.0);
        assert_eq!(path.first(), Some(&(0, 0)));
        assert_eq!(path.last(), Some(&(2, 1)));
    }

    #[test]
    fn trivial_paths() {
        assert_eq!(
            dtw_path(&t(&[5.0]), &t(&[5.0]), &abs()).unwrap(),
            vec![(0, 0)]
        );
        assert_eq!(
            dtw_path(&t(&[0.0, 1.0]), &t(&[0.0, 1.0]), &abs()).unwrap(),
            vec![(0, 0), (1, 1)]
        );
    }

    #[test]
    fn squared_cost_and_path_normalization() {
        let sq = DtwConfig {
            local_cost: LocalCost::SquaredDifference,
            path_normalize: false,
        };
        assert_eq!(dtw_distance(&t(&[0.0]), &t(&[2.0]), &sq).unwrap(), 4.0);
        let norm = DtwConfig {
            local_cost: LocalCost::AbsoluteDifference,
            path_normalize: true,
        };
        // diagonal path of length 2, total cost 2
        assert_eq!(
            dtw_distance(&t(&[0.0, 0.0]), &t(&[1.0, 1.0]), &norm).unwrap(),
            1.0
        );
    }

    fn seq() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, 1..12)
    }

    proptest! {
        #[test]
        fn symmetric(a in seq(), b in seq()) {
            let (ta, tb) = (t(&a), t(&b));
            let d1 = dtw_distance(&ta, &tb, &abs()).unwrap();
            let d2 = dtw_distance(&tb, &ta, &abs()).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12);
        }

        #[test]
        fn identity(a in seq()) {
            let ta = t(&a);
            prop_assert_eq!(dtw_distance(&ta, &ta, &abs()).unwrap(), 0.0);
        }

        #[test]
        fn scaling(a in seq(), b in seq(), c in 0.0f64..10.0) {
            let d = dtw_distance(&t(&a), &t(&b), &abs()).unwrap();
            let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
            let sb: Vec<f64> = b.iter().map(|v| v * c).collect();
            let ds = dtw_distance(&t(&sa), &t(&sb), &abs()).unwrap();
            prop_assert!((ds - c * d).abs() <= 1e-9 * (1.0 + c * d));
        }

        #[test]
        fn path_is_valid_and_optimal(a in seq(), b in seq()) {
            let (ta, tb) = (t(&a), t(&b));
            let path = dtw_path(&ta, &tb, &abs()).unwrap();
            prop_assert_eq!(path[0], (0, 0));
            prop_assert_eq!(*path.last().unwrap(), (a.len() - 1, b.len() - 1));
            for w in path.windows(2) {
                let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
                prop_assert!(matches!((di, dj), (1, 0) | (0, 1) | (1, 1)));
            }
            let d = dtw_distance(&ta, &tb, &abs()).unwrap();
            prop_assert!((path_cost(&ta, &tb, &path, LocalCost::AbsoluteDifference) - d).abs() <= 1e-12);
        }

        #[test]
        fn matches_brute_force_small(
            a in prop::collection::vec(-1.0f64..1.0, 1..6),
            b in prop::collection::vec(-1.0f64..1.0, 1..6),
        ) {
            for cost in [LocalCost::AbsoluteDifference, LocalCost::SquaredDifference] {
                let cfg = DtwConfig { local_cost: cost, path_normalize: false };
                let d = dtw_distance(&t(&a), &t(&b), &cfg).unwrap();
                prop_assert!((d - oracle::brute_force(&a, &b, cost)).abs() <= 1e-12);
            }
        }
    }
}

//! Walks on a substochastic chain `T` and the two walk classes whose
//! probability matrices are `P_AGS^k` and `P_GS^{k-n+1} (I - T)⁻¹`.
//!
//! With `T = D + L + U` (diagonal, strictly lower, strictly upper):
//!
//! * walks from `i` to `j` with exactly `k` downward transitions, the last
//!   transition being downward, have total probability `((I-D-U)⁻¹ L)^k`;
//! * walks from `i` to `j` with at least `m` upward transitions have total
//!   probability `((I-D-L)⁻¹ U)^m (I - T)⁻¹`.
//!
//! For lower Hessenberg `T` every walk has `downward <= upward + n - 1`, so
//! the first class for `k` sits inside the second for `m = k - n + 1`.
//! States are 0-based here.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lu::Lu;
use crate::matrix::Matrix;

/// Default bound on the number of enumerated walks.
pub const DEFAULT_WALK_CAP: u128 = 10_000_000;

/// Entrywise slack for the comparison inequality.
pub const COMPARISON_TOL: f64 = 1e-12;

const SUBSTOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub t: Matrix,
    pub d: Matrix,
    pub l: Matrix,
    pub u: Matrix,
}

fn check_substochastic(t: &Matrix) -> Result<()> {
    for i in 0..t.rows() {
        let row = t.row(i);
        if let Some(j) = row.iter().position(|&v| v < -SUBSTOCHASTIC_TOL) {
            return Err(Error::NotSubstochastic {
                row: i,
                reason: format!("entry ({i}, {j}) = {} is negative", row[j]),
            });
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + SUBSTOCHASTIC_TOL {
            return Err(Error::NotSubstochastic {
                row: i,
                reason: format!("row sum {sum} exceeds 1"),
            });
        }
    }
    Ok(())
}

/// Splits `T = I - A` into its diagonal, downward and upward parts.
pub fn decompose_substochastic(a: &Matrix) -> Result<Decomposition> {
    let n = a.dim()?;
    let t = Matrix::identity(n).sub(a);
    decompose_t(t)
}

fn decompose_t(t: Matrix) -> Result<Decomposition> {
    let n = t.dim()?;
    check_substochastic(&t)?;
    let pick = |keep: fn(usize, usize) -> bool| {
        Matrix::from_fn(n, n, |i, j| if keep(i, j) { t[(i, j)] } else { 0.0 })
    };
    let d = pick(|i, j| i == j);
    let l = pick(|i, j| j < i);
    let u = pick(|i, j| j > i);
    Ok(Decomposition { t, d, l, u })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub states: Vec<usize>,
}

impl Walk {
    pub fn new(states: Vec<usize>) -> Self {
        Walk { states }
    }

    pub fn transitions(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn probability(&self, t: &Matrix) -> f64 {
        self.states.windows(2).map(|w| t[(w[0], w[1])]).product()
    }
}

/// Transition counts. `level_up[h]` / `level_down[h]` count crossings of the
/// cut between states `0..=h` and `h+1..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStats {
    pub downward: usize,
    pub upward: usize,
    pub level_up: Vec<usize>,
    pub level_down: Vec<usize>,
}

pub fn walk_stats(states: &[usize], n: usize) -> WalkStats {
    let mut s = WalkStats {
        downward: 0,
        upward: 0,
        level_up: vec![0; n.saturating_sub(1)],
        level_down: vec![0; n.saturating_sub(1)],
    };
    for w in states.windows(2) {
        let (i, j) = (w[0], w[1]);
        if j < i {
            s.downward += 1;
            s.level_down[j..i].iter_mut().for_each(|c| *c += 1);
        } else if j > i {
            s.upward += 1;
            s.level_up[i..j].iter_mut().for_each(|c| *c += 1);
        }
    }
    s
}

/// Number of positive-probability walks with 1 to `max_transitions`
/// transitions, saturating at `u128::MAX`.
pub fn count_walks(t: &Matrix, max_transitions: usize) -> u128 {
    let n = t.rows();
    let mut ending = vec![1u128; n];
    let mut total = 0u128;
    for _ in 0..max_transitions {
        let mut next = vec![0u128; n];
        for i in 0..n {
            for j in 0..n {
                if t[(i, j)] > 0.0 {
                    next[j] = next[j].saturating_add(ending[i]);
                }
            }
        }
        total = next.iter().fold(total, |acc, &c| acc.saturating_add(c));
        ending = next;
    }
    total
}

fn check_cap(t: &Matrix, max_transitions: usize, cap: u128) -> Result<()> {
    let count = count_walks(t, max_transitions);
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    Ok(())
}

fn successors(t: &Matrix) -> Vec<Vec<(usize, f64)>> {
    (0..t.rows())
        .map(|i| {
            t.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, &p)| (j, p))
                .collect()
        })
        .collect()
}

fn dfs_from(
    succ: &[Vec<(usize, f64)>],
    start: usize,
    max_transitions: usize,
    visit: &mut impl FnMut(&[usize], f64),
) {
    fn go(
        succ: &[Vec<(usize, f64)>],
        path: &mut Vec<usize>,
        prob: f64,
        left: usize,
        visit: &mut impl FnMut(&[usize], f64),
    ) {
        if left == 0 {
            return;
        }
        let last = *path.last().unwrap();
        for &(j, p) in &succ[last] {
            path.push(j);
            let q = prob * p;
            visit(path, q);
            go(succ, path, q, left - 1, visit);
            path.pop();
        }
    }
    let mut path = vec![start];
    go(succ, &mut path, 1.0, max_transitions, visit);
}

/// Calls `visit(states, probability)` for every positive-probability walk
/// with 1 to `max_transitions` transitions.
pub fn for_each_walk(
    t: &Matrix,
    max_transitions: usize,
    cap: u128,
    mut visit: impl FnMut(&[usize], f64),
) -> Result<()> {
    t.dim()?;
    check_substochastic(t)?;
    check_cap(t, max_transitions, cap)?;
    let succ = successors(t);
    for start in 0..t.rows() {
        dfs_from(&succ, start, max_transitions, &mut visit);
    }
    Ok(())
}

pub fn enumerate_walks(t: &Matrix, max_transitions: usize, cap: u128) -> Result<Vec<(Walk, f64)>> {
    let mut out = Vec::new();
    for_each_walk(t, max_transitions, cap, |s, p| {
        out.push((Walk::new(s.to_vec()), p))
    })?;
    Ok(out)
}

/// Counts of walks checked against the downward/upward bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub walks: u64,
    pub violations: u64,
    pub alternation_violations: u64,
    pub first_violation: Option<Vec<usize>>,
}

/// Checks `downward <= upward + n - 1` and `|s_h↑ - s_h↓| <= 1` on every
/// enumerated walk.
pub fn check_walk_lemma(t: &Matrix, max_transitions: usize, cap: u128) -> Result<LemmaReport> {
    let n = t.dim()?;
    check_substochastic(t)?;
    check_cap(t, max_transitions, cap)?;
    let succ = successors(t);
    let reports: Vec<LemmaReport> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut r = LemmaReport::default();
            dfs_from(&succ, start, max_transitions, &mut |states, _| {
                let s = walk_stats(states, n);
                r.walks += 1;
                if s.downward > s.upward + n - 1 {
                    r.violations += 1;
                    r.first_violation.get_or_insert_with(|| states.to_vec());
                }
                if s.level_up.iter().zip(&s.level_down).any(|(a, b)| a.abs_diff(*b) > 1) {
                    r.alternation_violations += 1;
                }
            });
            r
        })
        .collect();
    Ok(reports
        .into_iter()
        .fold(LemmaReport::default(), |mut acc, r| {
            acc.walks += r.walks;
            acc.violations += r.violations;
            acc.alternation_violations += r.alternation_violations;
            if acc.first_violation.is_none() {
                acc.first_violation = r.first_violation;
            }
            acc
        }))
}

/// Walk-class probability sums from enumeration, truncated at a length cap.
/// `ags[k]` sums walks with exactly `k` downward transitions ending with a
/// downward one; `gs[m]` sums walks with at least `m` upward transitions.
/// The empty walk contributes the identity to `ags[0]` and `gs[0]`.
#[derive(Clone, Debug)]
pub struct WalkClassSums {
    pub ags: Vec<Matrix>,
    pub gs: Vec<Matrix>,
    pub max_transitions: usize,
}

pub fn walk_class_sums(
    t: &Matrix,
    max_k: usize,
    max_m: usize,
    max_transitions: usize,
    cap: u128,
) -> Result<WalkClassSums> {
    let n = t.dim()?;
    check_substochastic(t)?;
    check_cap(t, max_transitions, cap)?;
    let succ = successors(t);
    // Row i of every class matrix only involves walks starting at i.
    let rows: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut ags = vec![vec![0.0; n]; max_k + 1];
            let mut gs = vec![vec![0.0; n]; max_m + 1];
            ags[0][i] = 1.0;
            gs[0][i] = 1.0;
            dfs_from(&succ, i, max_transitions, &mut |states, p| {
                let j = *states.last().unwrap();
                let s = walk_stats(states, n);
                let prev = states[states.len() - 2];
                if j < prev && s.downward <= max_k {
                    ags[s.downward][j] += p;
                }
                for row in gs.iter_mut().take(s.upward.min(max_m) + 1) {
                    row[j] += p;
                }
            });
            (ags, gs)
        })
        .collect();
    let assemble = |count: usize, ags: bool| -> Vec<Matrix> {
        (0..count)
            .map(|k| {
                let mut m = Matrix::zeros(n, n);
                for (i, (a, g)) in rows.iter().enumerate() {
                    m.row_mut(i).copy_from_slice(if ags { &a[k] } else { &g[k] });
                }
                m
            })
            .collect()
    };
    Ok(WalkClassSums {
        ags: assemble(max_k + 1, true),
        gs: assemble(max_m + 1, false),
        max_transitions,
    })
}

/// Upper bound on the probability mass of walks longer than `cap`
/// transitions, or `None` when `‖T‖∞ >= 1`.
pub fn tail_bound(t: &Matrix, cap: usize) -> Option<f64> {
    let r = t.norm_inf();
    (r < 1.0).then(|| r.powi(cap as i32 + 1) / (1.0 - r))
}

/// `((I - D - U)⁻¹ L)^k` for `T = D + L + U`.
pub fn ags_power_matrix(t: &Matrix, k: usize) -> Result<Matrix> {
    let dec = decompose_t(t.clone())?;
    let n = t.rows();
    let f = Lu::factor(&Matrix::identity(n).sub(&dec.d).sub(&dec.u))?;
    Ok(f.solve_matrix(&dec.l).pow(k))
}

/// `((I - D - L)⁻¹ U)^{k-n+1} (I - T)⁻¹`, defined for `k >= n - 1`.
pub fn gs_bound_matrix(t: &Matrix, k: usize) -> Result<Matrix> {
    let dec = decompose_t(t.clone())?;
    let n = t.rows();
    if k + 1 < n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} is below n - 1 = {}",
            n - 1
        )));
    }
    let id = Matrix::identity(n);
    let p_gs = Lu::factor(&id.sub(&dec.d).sub(&dec.l))?.solve_matrix(&dec.u);
    let resolvent = Lu::factor(&id.sub(t))?.inverse();
    Ok(p_gs.pow(k + 1 - n).matmul(&resolvent))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub k: usize,
    /// `max (P_AGS^k - bound)_ij`; nonpositive when the inequality holds.
    pub max_excess: f64,
    pub worst_entry: (usize, usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub passed: bool,
    pub checks: Vec<InequalityCheck>,
    pub max_excess: f64,
}

/// Checks `P_AGS^k <= P_GS^{k-n+1} (I - T)⁻¹ + tol` entrywise for
/// `k = n-1 ..= k_max`.
pub fn check_comparison_inequality(t: &Matrix, k_max: usize) -> Result<ComparisonReport> {
    let n = t.dim()?;
    let mut checks = Vec::new();
    for k in n - 1..=k_max.max(n - 1) {
        let lhs = ags_power_matrix(t, k)?;
        let rhs = gs_bound_matrix(t, k)?;
        let mut worst = (f64::NEG_INFINITY, (0, 0));
        for i in 0..n {
            for j in 0..n {
                let e = lhs[(i, j)] - rhs[(i, j)];
                if e > worst.0 {
                    worst = (e, (i, j));
                }
            }
        }
        checks.push(InequalityCheck {
            k,
            max_excess: worst.0,
            worst_entry: worst.1,
        });
    }
    let max_excess = checks
        .iter()
        .map(|c| c.max_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport {
        passed: max_excess <= COMPARISON_TOL,
        checks,
        max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_half() -> Matrix {
        Matrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]])
    }

    #[test]
    fn decomposition_examples() {
        let dec = decompose_substochastic(&Matrix::identity(3)).unwrap();
        assert_eq!(dec.t, Matrix::zeros(3, 3));
        let a = Matrix::identity(2).sub(&swap_half());
        let dec = decompose_substochastic(&a).unwrap();
        assert_eq!(dec.d, Matrix::zeros(2, 2));
        assert_eq!(dec.l, Matrix::from_rows(&[[0.0, 0.0], [0.5, 0.0]]));
        assert_eq!(dec.u, Matrix::from_rows(&[[0.0, 0.5], [0.0, 0.0]]));
        let heavy = Matrix::identity(2).sub(&Matrix::from_rows(&[[0.6, 0.6], [0.0, 0.0]]));
        assert!(matches!(
            decompose_substochastic(&heavy),
            Err(Error::NotSubstochastic { row: 0, .. })
        ));
    }

    #[test]
    fn stats_examples() {
        let s = walk_stats(&[3, 0], 4);
        assert_eq!(s.downward, 1);
        assert_eq!(s.level_down, vec![1, 1, 1]);
        let s = walk_stats(&[0, 1, 0], 2);
        assert_eq!((s.upward, s.downward), (1, 1));
        assert_eq!((s.level_up[0], s.level_down[0]), (1, 1));
        let s = walk_stats(&[0, 1, 2, 0], 3);
        assert_eq!((s.upward, s.downward), (2, 1));
        assert_eq!(s.level_down, vec![1, 1]);
    }

    #[test]
    fn enumeration_examples() {
        assert!(enumerate_walks(&Matrix::zeros(3, 3), 4, DEFAULT_WALK_CAP)
            .unwrap()
            .is_empty());
        let mut walks = enumerate_walks(&swap_half(), 2, DEFAULT_WALK_CAP).unwrap();
        walks.sort_by(|a, b| a.0.states.len().cmp(&b.0.states.len()).then(a.0.states.cmp(&b.0.states)));
        let got: Vec<(Vec<usize>, f64)> = walks.into_iter().map(|(w, p)| (w.states, p)).collect();
        assert_eq!(
            got,
            vec![
                (vec![0, 1], 0.5),
                (vec![1, 0], 0.5),
                (vec![0, 1, 0], 0.25),
                (vec![1, 0, 1], 0.25),
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let t = Matrix::from_fn(4, 4, |_, _| 0.25);
        assert!(matches!(
            enumerate_walks(&t, 12, 1000),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert_eq!(count_walks(&t, 2), 16 + 64);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(ags_power_matrix(&swap_half(), 0).unwrap(), Matrix::identity(2));
        let p = ags_power_matrix(&swap_half(), 1).unwrap();
        assert!(p.max_abs_diff(&Matrix::from_rows(&[[0.25, 0.0], [0.5, 0.0]])) < 1e-15);
        let g = gs_bound_matrix(&swap_half(), 1).unwrap();
        let expected = Matrix::from_rows(&[[4.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 4.0 / 3.0]]);
        assert!(g.max_abs_diff(&expected) < 1e-15);
        assert!(gs_bound_matrix(&swap_half(), 0).is_err());
    }

    #[test]
    fn zero_chain_passes() {
        let r = check_comparison_inequality(&Matrix::zeros(3, 3), 6).unwrap();
        assert!(r.passed);
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn class_sums_match_closed_forms() {
        let t = Matrix::from_rows(&[[0.1, 0.3, 0.0], [0.2, 0.1, 0.4], [0.1, 0.2, 0.3]]);
        let cap = 14;
        let sums = walk_class_sums(&t, 3, 2, cap, DEFAULT_WALK_CAP).unwrap();
        let tail = tail_bound(&t, cap).unwrap();
        for k in 0..=3 {
            let closed = ags_power_matrix(&t, k).unwrap();
            assert!(sums.ags[k].max_abs_diff(&closed) <= tail, "k = {k}");
        }
        for m in 0..=2 {
            let closed = gs_bound_matrix(&t, m + 2).unwrap();
            assert!(sums.gs[m].max_abs_diff(&closed) <= tail, "m = {m}");
        }
    }
}

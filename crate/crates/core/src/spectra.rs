//! Spectral radius, asymptotic convergence factor and the iteration count
//! needed to damp an error by a fixed factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::hessenberg_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{norm_inf_vec, Matrix};

/// Relative tolerance for detecting the unit eigenvalue, scaled by `‖P‖∞`.
pub const DEFAULT_TOL_ONE: f64 = 1e-8;

const PERRON_MAX_STEPS: usize = 500;
const PERRON_REL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<(f64, f64)>,
    pub rho: f64,
    /// Largest modulus among eigenvalues away from 1.
    pub gamma: f64,
    pub one_eigenvalue_present: bool,
}

/// All eigenvalues of `a`, counted with algebraic multiplicity.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    hessenberg_eigenvalues(a)
}

/// `max |λ|`. For an elementwise nonnegative `p` the result is checked
/// against Collatz–Wielandt bounds on the Perron root.
pub fn spectral_radius(p: &Matrix) -> Result<f64> {
    let rho = radius_of(&eigenvalues(p)?);
    let slack = 1e-14 * p.max_abs();
    if p.is_nonnegative(slack) {
        let bounds = perron_bounds(p, PERRON_MAX_STEPS, PERRON_REL_TOL);
        let tol = 1e-8 * bounds.upper.max(1e-300) + 1e-13 * p.norm_inf();
        if rho < bounds.lower - tol || rho > bounds.upper + tol {
            return Err(Error::PerronMismatch {
                rho,
                lower: bounds.lower,
                upper: bounds.upper,
            });
        }
    }
    Ok(rho)
}

pub(crate) fn radius_of(ev: &[Complex64]) -> f64 {
    ev.iter().map(|l| l.norm()).fold(0.0, f64::max)
}

/// Lower and upper bounds on the Perron root of a nonnegative matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerronBounds {
    pub lower: f64,
    pub upper: f64,
    pub steps: usize,
}

/// Collatz–Wielandt bounds `min (Px)_i/x_i ≤ ρ(P) ≤ max (Px)_i/x_i` along
/// the power iterates of `I + P`, which keep `x` strictly positive. Negative
/// entries of `p` are clamped to zero.
pub fn perron_bounds(p: &Matrix, max_steps: usize, rel_tol: f64) -> PerronBounds {
    let n = p.rows();
    let p = Matrix::from_fn(n, n, |i, j| p[(i, j)].max(0.0));
    let mut x = vec![1.0; n];
    let mut best = PerronBounds {
        lower: 0.0,
        upper: f64::INFINITY,
        steps: 0,
    };
    for step in 0..max_steps {
        let px = p.mul_vec(&x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in px.iter().zip(&x) {
            let ratio = a / b;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        best.lower = best.lower.max(lo);
        best.upper = best.upper.min(hi);
        best.steps = step + 1;
        if best.upper - best.lower <= rel_tol * best.upper {
            break;
        }
        let mut y: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a + b).collect();
        let norm = norm_inf_vec(&y);
        y.iter_mut().for_each(|v| *v /= norm);
        // Entries can underflow for reducible matrices; keep x positive.
        for v in &mut y {
            if *v < 1e-280 {
                *v = 1e-280;
            }
        }
        x = y;
    }
    best
}

/// Spectrum split into the unit eigenvalue (if any) and the rest.
pub fn convergence_factor(p: &Matrix, tol_one: f64) -> Result<SpectrumReport> {
    let ev = eigenvalues(p)?;
    Ok(report_from(ev, tol_one))
}

/// [`convergence_factor`] with `tol_one = DEFAULT_TOL_ONE · max(1, ‖P‖∞)`.
pub fn convergence_factor_default(p: &Matrix) -> Result<SpectrumReport> {
    convergence_factor(p, DEFAULT_TOL_ONE * p.norm_inf().max(1.0))
}

pub(crate) fn report_from(ev: Vec<Complex64>, tol_one: f64) -> SpectrumReport {
    let one = Complex64::new(1.0, 0.0);
    let mut gamma = 0.0f64;
    let mut one_present = false;
    for l in &ev {
        if (l - one).norm() <= tol_one {
            one_present = true;
        } else {
            gamma = gamma.max(l.norm());
        }
    }
    SpectrumReport {
        rho: radius_of(&ev),
        gamma,
        one_eigenvalue_present: one_present,
        eigenvalues: ev.into_iter().map(|c| (c.re, c.im)).collect(),
    }
}

/// `k = log(threshold) / log(rho)`: the power at which `rho^k` reaches the
/// threshold. Infinite for `rho >= 1`, zero for `rho == 0`.
pub fn iterations_to_threshold(rho: f64, threshold: f64) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "spectral radius must be nonnegative, got {rho}"
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(if rho == 0.0 {
        0.0
    } else if rho >= 1.0 {
        f64::INFINITY
    } else {
        threshold.ln() / rho.ln()
    })
}

/// Sorts eigenvalues by real part, then imaginary part; real parts closer
/// than `tie` are treated as equal so conjugate pairs stay adjacent.
pub fn sort_eigenvalues(ev: &mut [Complex64], tie: f64) {
    ev.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tie {
            a.im.partial_cmp(&b.im).unwrap()
        } else {
            a.re.partial_cmp(&b.re).unwrap()
        }
    });
}

//! Experiment drivers behind the command-line tool: spectral-radius tables
//! for random Hessenberg M-matrices, the excess sweep, relaxation sweeps and
//! the property suites run by `verify`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    excess_m_matrix, random_full_m_matrix, random_hessenberg_m_matrix,
    random_singular_hessenberg, random_substochastic_hessenberg, Uniform,
};
use crate::iterate::iteration_matrix;
use crate::matrix::{BlockPartition, Matrix};
use crate::singular::{looks_like_generator, normalize_to_generator, primed_splitting};
use crate::spectra::{
    convergence_factor_default, eigenvalues, iterations_to_threshold, sort_eigenvalues,
    spectral_radius,
};
use crate::splitting::{
    split, substitution_splitting, Method, SorKind, StairKind, SubstitutionOrder,
};
use crate::walks::{
    check_comparison_inequality, check_walk_lemma, tail_bound, walk_class_sums, ags_power_matrix,
    gs_bound_matrix, DEFAULT_WALK_CAP,
};

/// Threshold for the iteration counts in the excess table.
pub const THRESHOLD: f64 = 0.01;

/// Slack on spectral-radius orderings for nonsingular inputs.
pub const RADIUS_SLACK: f64 = 1e-10;

/// Slack on convergence-factor orderings for singular inputs.
pub const GAMMA_SLACK: f64 = 1e-9;

/// Tolerance on eigenvalue multisets in the exchange suite.
pub const EXCHANGE_TOL: f64 = 1e-8;

pub const FIRST_STAIR: Method = Method::Stair(StairKind::First);

/// `ρ(M⁻¹N)` for the given splitting method.
pub fn radius(a: &Matrix, method: Method, partition: Option<&BlockPartition>) -> Result<f64> {
    spectral_radius(&iteration_matrix(&split(a, method, partition)?)?)
}

/// `γ(M'⁻¹N')` for the primed splitting of a singular `A`.
pub fn primed_gamma(a: &Matrix, method: Method, partition: Option<&BlockPartition>) -> Result<f64> {
    let p = iteration_matrix(&primed_splitting(a, method, partition)?)?;
    Ok(convergence_factor_default(&p)?.gamma)
}

fn seed_for(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// `17` significant digits.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub expnumber: usize,
    pub seed: u64,
    pub rho_gs: f64,
    pub rho_s: f64,
    pub rho_ags: f64,
}

/// `ρ` of GS, first-order stair and AGS on `trials` random `n×n` lower
/// Hessenberg M-matrices (trial `i` uses seed `seed + i`), sorted by
/// decreasing `ρ_GS` and numbered from 1.
pub fn compare(n: usize, trials: usize, seed: u64) -> Result<Vec<CompareRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rows = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            let (a, _, _) = random_hessenberg_m_matrix(n, s)?;
            Ok(CompareRow {
                expnumber: 0,
                seed: s,
                rho_gs: radius(&a, Method::Gs, None)?,
                rho_s: radius(&a, FIRST_STAIR, None)?,
                rho_ags: radius(&a, Method::Ags, None)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| y.rho_gs.total_cmp(&x.rho_gs));
    for (k, r) in rows.iter_mut().enumerate() {
        r.expnumber = k + 1;
    }
    Ok(rows)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("expnumber,rhoGS,rhoS,rhoAGS\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.expnumber,
            fmt_real(r.rho_gs),
            fmt_real(r.rho_s),
            fmt_real(r.rho_ags)
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessRow {
    pub excess: f64,
    pub rho_gs: f64,
    pub rho_s: f64,
    pub rho_ags: f64,
    pub k_gs: f64,
    pub k_s: f64,
    pub k_ags: f64,
}

/// `10^t` for 50 equispaced `t` in `[-8, 1]`.
pub fn default_etas() -> Vec<f64> {
    (0..50)
        .map(|i| 10f64.powf(-8.0 + 9.0 * i as f64 / 49.0))
        .collect()
}

/// Radii and iterations-to-threshold on the excess family. The same seed
/// (hence the same off-diagonal part) is used for every `η`; rows are
/// sorted by increasing `η`.
pub fn excess(n: usize, etas: &[f64], seed: u64) -> Result<Vec<ExcessRow>> {
    if etas.is_empty() {
        return Err(Error::InvalidParameter("empty eta list".into()));
    }
    let mut rows = etas
        .par_iter()
        .map(|&eta| {
            let a = excess_m_matrix(n, eta, seed)?;
            let rho_gs = radius(&a, Method::Gs, None)?;
            let rho_s = radius(&a, FIRST_STAIR, None)?;
            let rho_ags = radius(&a, Method::Ags, None)?;
            Ok(ExcessRow {
                excess: eta,
                rho_gs,
                rho_s,
                rho_ags,
                k_gs: iterations_to_threshold(rho_gs, THRESHOLD)?,
                k_s: iterations_to_threshold(rho_s, THRESHOLD)?,
                k_ags: iterations_to_threshold(rho_ags, THRESHOLD)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.excess.total_cmp(&y.excess));
    Ok(rows)
}

pub fn excess_csv(rows: &[ExcessRow]) -> String {
    let mut out = String::from("excess,rhoGS,rhoS,rhoAGS,logGS,logS,logAGS\n");
    for r in rows {
        let cells = [r.excess, r.rho_gs, r.rho_s, r.rho_ags, r.k_gs, r.k_s, r.k_ags];
        let line: Vec<String> = cells.iter().map(|&x| fmt_real(x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// `0.05, 0.10, …, 2.10`.
pub fn default_omegas() -> Vec<f64> {
    (1..=42).map(|i| i as f64 * 5.0 / 100.0).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SorOptions {
    /// Use block splittings with the supplied partition.
    pub block: bool,
    /// Relabel indices in reverse (for upper Hessenberg inputs).
    pub flip: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SorRow {
    pub omega: f64,
    pub gsor: f64,
    pub stsor: f64,
    pub stsor2: f64,
    pub agsor: f64,
}

impl SorRow {
    pub fn get(&self, kind: SorKind) -> f64 {
        match kind {
            SorKind::Gsor => self.gsor,
            SorKind::Stsor => self.stsor,
            SorKind::Stsor2 => self.stsor2,
            SorKind::Agsor => self.agsor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SorSweep {
    /// Radii are convergence factors `γ` of primed splittings.
    pub singular: bool,
    pub flipped: bool,
    pub rows: Vec<SorRow>,
}

impl SorSweep {
    /// Which of GSOR/AGSOR has the smaller radius at the `ω` closest to 1.
    pub fn faster_classic(&self) -> Option<SorKind> {
        let r = self
            .rows
            .iter()
            .min_by(|x, y| (x.omega - 1.0).abs().total_cmp(&(y.omega - 1.0).abs()))?;
        Some(if r.agsor < r.gsor {
            SorKind::Agsor
        } else {
            SorKind::Gsor
        })
    }
}

/// Radii of the four relaxed splittings over a grid of `ω`. A matrix with
/// zero column sums and a positive diagonal is treated as singular: it is
/// normalized and the convergence factors of primed splittings are reported.
pub fn sor_sweep(
    a: &Matrix,
    partition: Option<&BlockPartition>,
    omegas: &[f64],
    opts: SorOptions,
) -> Result<SorSweep> {
    let n = a.dim()?;
    if opts.block && partition.is_none() {
        return Err(Error::InvalidParameter("block splittings need a partition".into()));
    }
    if let Some(p) = partition {
        p.check_dim(n)?;
    }
    let (a, partition) = if opts.flip {
        let rev: Vec<usize> = (0..n).rev().collect();
        (a.permute_symmetric(&rev), partition.map(BlockPartition::reversed))
    } else {
        (a.clone(), partition.cloned())
    };
    let part = if opts.block { partition.as_ref() } else { None };
    let singular = looks_like_generator(&a);
    let a = if singular { normalize_to_generator(&a)? } else { a };

    let points: Vec<(usize, SorKind)> = (0..omegas.len())
        .flat_map(|i| SorKind::ALL.into_iter().map(move |k| (i, k)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(i, kind)| {
            let method = Method::Sor(kind, omegas[i]);
            if singular {
                primed_gamma(&a, method, part)
            } else {
                let p = iteration_matrix(&split(&a, method, part)?)?;
                Ok(crate::spectra::radius_of(&eigenvalues(&p)?))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows = omegas
        .iter()
        .enumerate()
        .map(|(i, &omega)| {
            let v = &values[i * 4..i * 4 + 4];
            SorRow {
                omega,
                gsor: v[0],
                stsor: v[1],
                stsor2: v[2],
                agsor: v[3],
            }
        })
        .collect();
    Ok(SorSweep {
        singular,
        flipped: opts.flip,
        rows,
    })
}

pub fn sor_csv(rows: &[SorRow]) -> String {
    let mut out = String::from("omega,rhoGSOR,rhoSTSOR,rhoSTSOR2,rhoAGSOR\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(r.omega),
            fmt_real(r.gsor),
            fmt_real(r.stsor),
            fmt_real(r.stsor2),
            fmt_real(r.agsor)
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Theorems,
    Exchange,
    Substitution,
    Singular,
    Walks,
    All,
}

impl Suite {
    pub fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Theorems,
                Suite::Exchange,
                Suite::Substitution,
                Suite::Singular,
                Suite::Walks,
            ],
            s => vec![s],
        }
    }
}

/// Outcome of one property over many trials. `worst_margin` is the smallest
/// observed margin; a trial passes when its margin is at least `-slack`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub slack: f64,
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_seed: Option<u64>,
}

impl Check {
    fn from_margins(name: &str, slack: f64, margins: &[(u64, f64)]) -> Check {
        let failed = margins.iter().filter(|(_, m)| !(*m >= -slack)).count();
        let worst = margins
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .copied();
        Check {
            name: name.into(),
            trials: margins.len(),
            passed: margins.len() - failed,
            failed,
            slack,
            worst_margin: worst.map_or(f64::INFINITY, |w| w.1),
            worst_seed: worst.map(|w| w.0),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn verify(suite: Suite, seed: u64, trials: usize) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for s in suite.parts() {
        checks.extend(match s {
            Suite::Theorems => theorem_checks(seed, trials)?,
            Suite::Exchange => exchange_checks(seed, trials)?,
            Suite::Substitution => substitution_checks(seed, trials, 20)?,
            Suite::Singular => singular_checks(seed, trials)?,
            Suite::Walks => walk_checks(seed, trials)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(VerifyReport {
        suite,
        seed,
        trials,
        passed: checks.iter().all(Check::ok),
        checks,
    })
}

/// Radii `(J, GS, S1, AGS)` of a random Hessenberg M-matrix.
pub fn hessenberg_radii(n: usize, seed: u64) -> Result<[f64; 4]> {
    let (a, _, _) = random_hessenberg_m_matrix(n, seed)?;
    Ok([
        radius(&a, Method::Jacobi, None)?,
        radius(&a, Method::Gs, None)?,
        radius(&a, FIRST_STAIR, None)?,
        radius(&a, Method::Ags, None)?,
    ])
}

/// Trial `i` uses `n = 3 + (seed + i) mod 10` and seed `seed + i`.
pub fn theorem_checks(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let radii = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, hessenberg_radii(3 + (s % 10) as usize, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let margin = |f: fn(&[f64; 4]) -> f64| -> Vec<(u64, f64)> {
        radii.iter().map(|(s, r)| (*s, f(r))).collect()
    };
    Ok(vec![
        Check::from_margins("rho_j >= rho_gs", RADIUS_SLACK, &margin(|r| r[0] - r[1])),
        Check::from_margins("rho_gs >= rho_s", RADIUS_SLACK, &margin(|r| r[1] - r[2])),
        Check::from_margins("rho_s >= rho_ags", RADIUS_SLACK, &margin(|r| r[2] - r[3])),
    ])
}

/// Splittings of a random M-matrix with the 2×2 block shapes of the
/// exchange argument: `(M, N)` block lower triangular with `M_21 = A_21`,
/// `(M̂, N̂)` block upper triangular with `M̂_12 = A_12`, and `(M', N')`
/// block lower triangular with `A_21 <= M'_21 <= 0`. The diagonal blocks
/// are shared.
#[derive(Clone, Debug)]
pub struct ExchangeInstance {
    pub a: Matrix,
    pub k: usize,
    pub m: Matrix,
    pub m_hat: Matrix,
    pub m_prime: Matrix,
}

pub fn exchange_instance(n: usize, seed: u64) -> Result<ExchangeInstance> {
    let (a, _, _) = random_full_m_matrix(n, seed)?;
    let mut rng = Uniform::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let k = 1 + rng.below(n - 1);
    // Diagonal blocks: drop off-diagonal entries at random and inflate the
    // diagonal; both keep M ≥ A with M a Z-matrix.
    let mut diag_blocks = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if (i < k) != (j < k) {
                continue;
            }
            diag_blocks[(i, j)] = if i == j {
                a[(i, i)] * (1.0 + 0.5 * rng.next())
            } else if rng.next() < 0.5 {
                a[(i, j)]
            } else {
                0.0
            };
        }
    }
    let off = |lower: bool, scale: &mut dyn FnMut() -> f64| {
        Matrix::from_fn(n, n, |i, j| {
            let take = if lower { i >= k && j < k } else { i < k && j >= k };
            if take {
                a[(i, j)] * scale()
            } else {
                0.0
            }
        })
    };
    let m = diag_blocks.add(&off(true, &mut || 1.0));
    let m_hat = diag_blocks.add(&off(false, &mut || 1.0));
    let m_prime = diag_blocks.add(&off(true, &mut || rng.next()));
    Ok(ExchangeInstance {
        a,
        k,
        m,
        m_hat,
        m_prime,
    })
}

fn iteration_of(a: &Matrix, m: &Matrix) -> Result<Matrix> {
    let s = crate::splitting::Splitting::custom(a.clone(), m.clone(), None)?;
    if !s.is_regular() {
        return Err(Error::InvalidParameter("exchange instance is not a regular splitting".into()));
    }
    iteration_matrix(&s)
}

/// Largest distance between two eigenvalue lists after sorting both by
/// (real, imaginary) part.
pub fn sorted_spectrum_distance(mut x: Vec<Complex64>, mut y: Vec<Complex64>) -> f64 {
    sort_eigenvalues(&mut x, 1e-9);
    sort_eigenvalues(&mut y, 1e-9);
    x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// `(spectrum distance of M⁻¹N vs M̂⁻¹N̂, ρ(M'⁻¹N') - ρ(M̂⁻¹N̂))`.
pub fn exchange_margins(n: usize, seed: u64) -> Result<(f64, f64)> {
    let inst = exchange_instance(n, seed)?;
    let p = iteration_of(&inst.a, &inst.m)?;
    let p_hat = iteration_of(&inst.a, &inst.m_hat)?;
    let p_prime = iteration_of(&inst.a, &inst.m_prime)?;
    let ev_hat = eigenvalues(&p_hat)?;
    let rho_hat = crate::spectra::radius_of(&ev_hat);
    let dist = sorted_spectrum_distance(eigenvalues(&p)?, ev_hat);
    Ok((dist, spectral_radius(&p_prime)? - rho_hat))
}

/// Trial `i` uses `n = 2 + (seed + i) mod 9`.
pub fn exchange_checks(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let margins = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, exchange_margins(2 + (s % 9) as usize, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let same: Vec<(u64, f64)> = margins.iter().map(|(s, m)| (*s, EXCHANGE_TOL - m.0)).collect();
    let cor: Vec<(u64, f64)> = margins.iter().map(|(s, m)| (*s, m.1)).collect();
    Ok(vec![
        Check::from_margins("exchange: equal spectra (margin = 1e-8 - distance)", 0.0, &same),
        Check::from_margins("exchange: rho_hat <= rho_prime", RADIUS_SLACK, &cor),
    ])
}

/// Smallest `ρ(substitution) - ρ_AGS` over `orders` random permutations.
pub fn substitution_margin(n: usize, seed: u64, orders: usize) -> Result<f64> {
    let (a, _, _) = random_hessenberg_m_matrix(n, seed)?;
    let rho_ags = radius(&a, Method::Ags, None)?;
    let mut rng = Uniform::new(seed.rotate_left(17) ^ 0x5851_f42d_4c95_7f2d);
    let mut worst = f64::INFINITY;
    for _ in 0..orders {
        let order = SubstitutionOrder::new(rng.permutation(n))?;
        let s = substitution_splitting(&a, &order, None)?;
        worst = worst.min(spectral_radius(&iteration_matrix(&s)?)? - rho_ags);
    }
    Ok(worst)
}

/// Trial `i` uses `n = 3 + (seed + i) mod 6`.
pub fn substitution_checks(seed: u64, trials: usize, orders: usize) -> Result<Vec<Check>> {
    let margins = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, substitution_margin(3 + (s % 6) as usize, s, orders)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![Check::from_margins(
        "rho_substitution >= rho_ags",
        RADIUS_SLACK,
        &margins,
    )])
}

/// `γ` of primed `(J, GS, S1, AGS)` and whether every `P'` showed the unit
/// eigenvalue.
pub fn singular_gammas(n: usize, seed: u64) -> Result<([f64; 4], bool)> {
    let a = random_singular_hessenberg(n, seed)?;
    let mut g = [0.0; 4];
    let mut unit = true;
    for (slot, method) in g
        .iter_mut()
        .zip([Method::Jacobi, Method::Gs, FIRST_STAIR, Method::Ags])
    {
        let p = iteration_matrix(&primed_splitting(&a, method, None)?)?;
        let r = convergence_factor_default(&p)?;
        *slot = r.gamma;
        unit &= r.one_eigenvalue_present;
    }
    Ok((g, unit))
}

/// Trial `i` uses `n = 3 + (seed + i) mod 8`.
pub fn singular_checks(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let res = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, singular_gammas(3 + (s % 8) as usize, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let margin = |f: fn(&[f64; 4]) -> f64| -> Vec<(u64, f64)> {
        res.iter().map(|(s, (g, _))| (*s, f(g))).collect()
    };
    let unit: Vec<(u64, f64)> = res
        .iter()
        .map(|(s, (_, u))| (*s, if *u { 0.0 } else { -1.0 }))
        .collect();
    Ok(vec![
        Check::from_margins("gamma_j >= gamma_gs", GAMMA_SLACK, &margin(|g| g[0] - g[1])),
        Check::from_margins("gamma_gs >= gamma_s", GAMMA_SLACK, &margin(|g| g[1] - g[2])),
        Check::from_margins("gamma_s >= gamma_ags", GAMMA_SLACK, &margin(|g| g[2] - g[3])),
        Check::from_margins("unit eigenvalue detected", 0.0, &unit),
    ])
}

/// Maximum transitions in the exhaustive walk checks.
pub const WALK_LENGTH: usize = 12;

/// Margin of the elementwise comparison inequality on a random substochastic
/// Hessenberg `T` for `k = n-1 ..= n+4`.
pub fn comparison_margin(n: usize, seed: u64) -> Result<f64> {
    let t = random_substochastic_hessenberg(n, 0.95, seed)?;
    Ok(-check_comparison_inequality(&t, n + 4)?.max_excess)
}

/// `tail - max |enumerated - closed form|` over both walk classes and all
/// `k` up to `n + 2`. Row sums are kept below 1/2 so the tail is small.
pub fn enumeration_margin(n: usize, seed: u64, length: usize) -> Result<f64> {
    let t = random_substochastic_hessenberg(n, 0.5, seed)?;
    let max_k = n + 2;
    let sums = walk_class_sums(&t, max_k, max_k + 1 - n, length, DEFAULT_WALK_CAP)?;
    let tail = tail_bound(&t, length).expect("row sums below 1");
    let mut worst = 0.0f64;
    for k in 0..=max_k {
        worst = worst.max(sums.ags[k].max_abs_diff(&ags_power_matrix(&t, k)?));
        if k + 1 >= n {
            worst = worst.max(sums.gs[k + 1 - n].max_abs_diff(&gs_bound_matrix(&t, k)?));
        }
    }
    Ok(tail - worst)
}

/// Full lower Hessenberg pattern with positive entries (all positive-probability
/// walks of the pattern are enumerated).
pub fn hessenberg_pattern_chain(n: usize) -> Matrix {
    let keep = |i: usize, j: usize| j <= i + 1;
    let width = |i: usize| (0..n).filter(|&j| keep(i, j)).count() as f64;
    Matrix::from_fn(n, n, |i, j| if keep(i, j) { 0.9 / width(i) } else { 0.0 })
}

pub fn walk_checks(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut lemma = Vec::new();
    let mut alternation = Vec::new();
    for n in 2..=4 {
        let r = check_walk_lemma(&hessenberg_pattern_chain(n), WALK_LENGTH, DEFAULT_WALK_CAP)?;
        lemma.push((n as u64, -(r.violations as f64)));
        alternation.push((n as u64, -(r.alternation_violations as f64)));
    }
    let comparison = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, comparison_margin(2 + (s % 5) as usize, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let enumeration = (0..trials.min(12))
        .map(|i| {
            let s = seed_for(seed, i);
            Ok((s, enumeration_margin(2 + (s % 3) as usize, s, WALK_LENGTH)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        Check::from_margins("walks: downward <= upward + n - 1 (negated violations)", 0.0, &lemma),
        Check::from_margins("walks: level crossings alternate (negated violations)", 0.0, &alternation),
        Check::from_margins(
            "P_ags^k <= P_gs^(k-n+1) (I-T)^-1",
            crate::walks::COMPARISON_TOL,
            &comparison,
        ),
        Check::from_margins("walk sums within tail bound of closed forms", 0.0, &enumeration),
    ])
}

/// Searches seeds `start..start+limit` for a full random M-matrix of size
/// `n` with `ρ_AGS > ρ_GS + margin`.
pub fn find_reversal(n: usize, start: u64, limit: u64, margin: f64) -> Result<Option<(u64, f64, f64)>> {
    for seed in start..start + limit {
        let (a, _, _) = random_full_m_matrix(n, seed)?;
        let gs = radius(&a, Method::Gs, None)?;
        let ags = radius(&a, Method::Ags, None)?;
        if ags > gs + margin {
            return Ok(Some((seed, gs, ags)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_compare() {
        let rows = compare(5, 1, 9).unwrap();
        assert_eq!(rows.len(), 1);
        let csv = compare_csv(&rows);
        assert!(csv.starts_with("expnumber,rhoGS,rhoS,rhoAGS\n1,"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn compare_is_sorted_and_ordered() {
        let rows = compare(5, 20, 100).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].rho_gs >= w[1].rho_gs);
        }
        for r in &rows {
            assert!(r.rho_gs >= r.rho_s - RADIUS_SLACK && r.rho_s >= r.rho_ags - RADIUS_SLACK);
        }
    }

    #[test]
    fn grids() {
        let e = default_etas();
        assert_eq!(e.len(), 50);
        assert!((e[0] - 1e-8).abs() < 1e-20 && (e[49] - 10.0).abs() < 1e-12);
        let w = default_omegas();
        assert_eq!(w.len(), 42);
        assert_eq!(w[19], 1.0);
        assert!((w[41] - 2.1).abs() < 1e-15);
    }

    #[test]
    fn excess_table_shape() {
        let rows = excess(5, &[10.0, 1e-3], 4).unwrap();
        assert_eq!(rows[0].excess, 1e-3);
        let csv = excess_csv(&rows);
        assert!(csv.starts_with("excess,rhoGS,rhoS,rhoAGS,logGS,logS,logAGS\n"));
        for r in &rows {
            assert!(r.k_gs >= r.k_s - 1e-6 && r.k_s >= r.k_ags - 1e-6);
        }
    }

    #[test]
    fn exchange_instances_are_regular() {
        for seed in 0..10 {
            let (d, c) = exchange_margins(6, seed).unwrap();
            assert!(d < EXCHANGE_TOL, "seed {seed}: distance {d}");
            assert!(c >= -RADIUS_SLACK);
        }
    }

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::Theorems, Suite::Substitution, Suite::Singular] {
            let r = verify(suite, 1, 10).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn sor_sweep_on_nonsingular_input() {
        let (a, _, _) = random_hessenberg_m_matrix(6, 3).unwrap();
        let sweep = sor_sweep(&a, None, &[0.5, 1.0], SorOptions::default()).unwrap();
        assert!(!sweep.singular);
        let gs = radius(&a, Method::Gs, None).unwrap();
        assert!((sweep.rows[1].gsor - gs).abs() < 1e-12);
        assert!(sor_csv(&sweep.rows).starts_with("omega,rhoGSOR,rhoSTSOR,rhoSTSOR2,rhoAGSOR\n"));
        assert!(sor_sweep(&a, None, &[1.0], SorOptions { block: true, flip: false }).is_err());
    }
}

//! Numerical checks of the supporting results: the subset-sum product
//! maximization behind the RUR bound, the singular-value derivative identity
//! behind `D B_0 = J`, the Lagrange-interpolant property of `det Q`, the
//! first-order null-space perturbation law, and solver cross-validation.
//!
//! Every suite is deterministic for a fixed seed and returns a serializable
//! report with a `pass` flag.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditioning::{b0_factorization, lagrange_interpolant, mep_local_data, normal_form, q_factorization};
use crate::error::{Error, Result};
use crate::families::{generate_mep, random_quadratic_system, FamilySpec};
use crate::macaulay::macaulay_hat_rho;
use crate::numkernel::{norm2, null_space, random_complex_gaussian, random_unit_vector, sigma_min, singular_values, svd, CMatrix};
use crate::poly::{MultiPoly, PolySystem, C64};
use crate::solvers::{hausdorff_distance, solve_macaulay_resultant, solve_normal_form, MultiParamEig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    LemmaA1,
    Prop51,
    AppendixD,
    Interpolant,
    CrossMethod,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::LemmaA1, Suite::Prop51, Suite::AppendixD, Suite::Interpolant, Suite::CrossMethod];

    pub fn tag(self) -> &'static str {
        match self {
            Suite::LemmaA1 => "lemmaA1",
            Suite::Prop51 => "prop51",
            Suite::AppendixD => "appendixD",
            Suite::Interpolant => "interpolant",
            Suite::CrossMethod => "crossmethod",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// subset-sum product

#[derive(Clone, Debug, Serialize)]
pub struct LemmaA1Report {
    pub d: usize,
    pub n_samples: usize,
    /// `f` at the balanced vector `(1/sqrt d, ..., 1/sqrt d)`.
    pub f_balanced: f64,
    pub closed_form: f64,
    /// `(sqrt d)^{2^d - 1}`.
    pub bound: f64,
    pub max_sample: f64,
    pub pass: bool,
}

/// `prod over nonempty S of sum_{i in S} |u_i|`.
pub fn subset_sum_product(u: &[f64]) -> f64 {
    let d = u.len();
    (1usize..1 << d).map(|mask| (0..d).filter(|i| mask >> i & 1 == 1).map(|i| u[i].abs()).sum::<f64>()).product()
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, j| acc * (n - j) as u64 / (j + 1) as u64)
}

/// `prod_m (m / sqrt d)^{C(d, m)}`.
pub fn balanced_closed_form(d: usize) -> f64 {
    let sd = (d as f64).sqrt();
    (1..=d).map(|m| (m as f64 / sd).powi(binomial(d, m) as i32)).product()
}

pub fn lemma_a1_suite<R: Rng + ?Sized>(d: usize, n_samples: usize, rng: &mut R) -> Result<LemmaA1Report> {
    if d == 0 || d > 10 {
        return Err(Error::InvalidParameter(format!("d = {d} outside 1..=10")));
    }
    let balanced = vec![1.0 / (d as f64).sqrt(); d];
    let f_balanced = subset_sum_product(&balanced);
    let closed_form = balanced_closed_form(d);
    let bound = (d as f64).sqrt().powi((1 << d) - 1);
    let max_sample = (0..n_samples).map(|_| subset_sum_product(&random_unit_vector(d, rng))).fold(0.0, f64::max);
    let pass = (f_balanced - closed_form).abs() <= 1e-12 * closed_form
        && max_sample <= f_balanced * (1.0 + 1e-12)
        && closed_form <= bound * (1.0 + 1e-12);
    Ok(LemmaA1Report { d, n_samples, f_balanced, closed_form, bound, max_sample, pass })
}

// ---------------------------------------------------------------------------
// singular-value derivatives

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub d: usize,
    /// Richardson-extrapolated `d sigma_min(W_i) / d x_j`, row-major.
    pub finite_difference: Vec<Vec<f64>>,
    /// `|(B_0)_ij|`.
    pub b0_abs: Vec<Vec<f64>>,
    pub max_error: f64,
    pub pass: bool,
}

/// Absolute tolerance of the derivative comparison, scaled by `max(1, |B_0_ij|)`.
pub const DERIVATIVE_TOL: f64 = 1e-5;

/// Compares the one-sided derivative of `sigma_min(W_i)` along each
/// coordinate with `|(B_0)_ij|`. `h` holds the two step sizes (coarse, fine)
/// whose symmetric quotients are combined by Richardson extrapolation.
pub fn singular_derivative_suite(mep: &MultiParamEig, x: &[C64], h: [f64; 2]) -> Result<DerivativeReport> {
    let d = mep.d();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let data = mep_local_data(mep, x)?;
    let (_, b0) = b0_factorization(mep, x)?;
    let quotient = |i: usize, j: usize, step: f64| -> Result<f64> {
        let at = |t: f64| {
            let mut y = x.to_vec();
            y[j] += t;
            sigma_min(&mep.eval(i, &y))
        };
        // sigma_min is |t| |b| + O(t^2) near the root; averaging the two
        // sides cancels the odd part
        Ok((at(step)? + at(-step)? - 2.0 * data[i].sigma_min) / (2.0 * step))
    };
    let ratio = (h[0] / h[1]).powi(2);
    let mut fd = vec![vec![0.0; d]; d];
    let mut b0_abs = vec![vec![0.0; d]; d];
    let mut max_error: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let coarse = quotient(i, j, h[0])?;
            let fine = quotient(i, j, h[1])?;
            fd[i][j] = (ratio * fine - coarse) / (ratio - 1.0);
            b0_abs[i][j] = b0[(i, j)].norm();
            max_error = max_error.max((fd[i][j] - b0_abs[i][j]).abs() / b0_abs[i][j].max(1.0));
        }
    }
    Ok(DerivativeReport { d, finite_difference: fd, b0_abs, max_error, pass: max_error <= DERIVATIVE_TOL })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationCase {
    pub d: usize,
    pub sigma: f64,
    pub seed: u64,
    /// `||D B_0 - J||_2 / ||J||_2`.
    pub relative_residual: f64,
    pub derivative_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop51Report {
    pub cases: Vec<FactorizationCase>,
    pub pass: bool,
}

/// `D B_0 = J` and the derivative identity on permutation-family members.
pub fn prop51_suite(dims: &[usize], sigmas: &[f64], seed: u64) -> Result<Prop51Report> {
    let mut cases = Vec::new();
    for &d in dims {
        for &sigma in sigmas {
            let spec = FamilySpec::permutation(d, sigma).with_seed(seed);
            let (s, mep) = generate_mep(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let x = vec![C64::new(0.0, 0.0); d];
            let (dm, b0) = b0_factorization(&mep, &x)?;
            let j = s.jacobian(&x)?;
            let relative_residual = norm2(&(&dm * &b0 - &j))? / norm2(&j)?;
            let der = singular_derivative_suite(&mep, &x, [1e-4, 1e-5])?;
            let pass = relative_residual <= 1e-8 && der.pass;
            cases.push(FactorizationCase { d, sigma, seed, relative_residual, derivative_error: der.max_error, pass });
        }
    }
    let pass = cases.iter().all(|c| c.pass);
    Ok(Prop51Report { cases, pass })
}

// ---------------------------------------------------------------------------
// null-space perturbation

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationRecord {
    pub eps: f64,
    /// Smallest nonzero singular value of the unperturbed matrix.
    pub sigma_min: f64,
    pub draws: usize,
    pub median_sine: f64,
    pub max_sine: f64,
    /// `median_sine / (eps / sigma_min)`.
    pub median_ratio: f64,
    pub pass: bool,
}

/// `eps` times a random partial isometry: all nonzero singular values equal
/// `eps`, singular vectors from the SVD of a complex Gaussian matrix.
pub fn random_perturbation<R: Rng + ?Sized>(rows: usize, cols: usize, eps: f64, rng: &mut R) -> Result<CMatrix> {
    let g = CMatrix::from_fn(rows, cols, |_, _| random_complex_gaussian(rng));
    let dec = svd(&g)?;
    let k = rows.min(cols);
    let u = dec.u.submatrix(0, 0, rows, k).to_owned();
    let v = dec.v.submatrix(0, 0, cols, k).to_owned();
    Ok(faer::Scale(C64::new(eps, 0.0)) * (&u * v.adjoint()))
}

/// Sine of the largest principal angle between the column spans of two
/// matrices with orthonormal columns.
pub fn largest_angle_sine(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let proj = a * (a.adjoint() * b);
    Ok(norm2(&(b - &proj))?.min(1.0))
}

/// Perturbs `m` by random `N` with `||N||_2 = eps` and measures how far the
/// `nullity`-dimensional null space turns. Each level passes when every draw
/// stays below `2 eps / sigma_min` and the median lies within
/// `[0.3, 2] eps / sigma_min`.
pub fn nullspace_perturbation_suite<R: Rng + ?Sized>(
    m: &CMatrix,
    nullity: usize,
    eps_list: &[f64],
    draws: usize,
    rng: &mut R,
) -> Result<Vec<PerturbationRecord>> {
    let cols = m.ncols();
    let rank = cols.checked_sub(nullity).filter(|&k| k > 0).ok_or(Error::NullityTooLarge { nullity, cols })?;
    let sv = singular_values(m)?;
    let smin = sv.get(rank - 1).copied().filter(|&v| v > 0.0).ok_or(Error::NullityTooLarge { nullity, cols })?;
    let base = null_space(m, nullity)?;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut sines = Vec::with_capacity(draws);
        for _ in 0..draws {
            let n = random_perturbation(m.nrows(), cols, eps, rng)?;
            let pert = null_space(&(m + &n), nullity)?;
            sines.push(largest_angle_sine(&base, &pert)?);
        }
        let median_sine = median(&mut sines);
        let max_sine = sines.iter().copied().fold(0.0, f64::max);
        let scale = eps / smin;
        let (median_ratio, pass) = if eps == 0.0 {
            (0.0, max_sine <= 1e-12)
        } else {
            let r = median_sine / scale;
            (r, max_sine <= 2.0 * scale && (0.3..=2.0).contains(&r))
        };
        out.push(PerturbationRecord { eps, sigma_min: smin, draws, median_sine, max_sine, median_ratio, pass });
    }
    Ok(out)
}

/// Median of a slice (sorted in place); NaN for an empty slice.
pub fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

// ---------------------------------------------------------------------------
// interpolants

#[derive(Clone, Debug, Serialize)]
pub struct InterpolantReport {
    pub systems: usize,
    /// `max |det Q(x*) - det J(x*)| / |det J(x*)|`.
    pub max_jacobian_mismatch: f64,
    /// `max |det Q(x')| / |det J(x*)|` over the other roots `x'`.
    pub max_off_root_value: f64,
    /// Normal-form difference between `det Q` and a randomly split interpolant.
    pub max_split_mismatch: f64,
    pub pass: bool,
}

fn random_linear(d: usize, rng: &mut impl Rng) -> MultiPoly {
    MultiPoly::from_terms(d, (0..=d).map(|k| {
        let mut e = vec![0u32; d];
        if k < d {
            e[k] = 1;
        }
        (e, random_complex_gaussian(rng))
    }))
    .expect("valid exponents")
}

/// On random quadratic systems: `det Q` takes the value `det J` at its root,
/// vanishes at the other roots, and every split `Q - diag(r)` gives the same
/// normal form.
pub fn interpolant_suite(dims: &[usize], systems_per_dim: usize, seed: u64) -> Result<InterpolantReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut jm, mut off, mut split) = (0.0f64, 0.0f64, 0.0f64);
    let mut systems = 0;
    for &d in dims {
        for _ in 0..systems_per_dim {
            let s = random_quadratic_system(d, &mut rng)?;
            let roots = solve_normal_form(&s, true, &mut rng)?.roots;
            let ms = crate::solvers::build_ms_matrices(&s)?;
            for (k, x) in roots.iter().enumerate() {
                let qf = q_factorization(&s, x)?;
                let det_q = qf.det();
                let det_j = s.jacobian(x)?.determinant();
                jm = jm.max((det_q.eval(x)? - det_j).norm() / det_j.norm());
                for (l, y) in roots.iter().enumerate() {
                    if l != k {
                        off = off.max(det_q.eval(y)?.norm() / det_j.norm());
                    }
                }
                let r: Vec<MultiPoly> = (0..d).map(|_| random_linear(d, &mut rng)).collect();
                let alt = lagrange_interpolant(&qf, &r)?;
                let a = normal_form(&det_q, &ms.basis)?;
                let b = normal_form(&alt, &ms.basis)?;
                let diff: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
                let size: f64 = a.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
                split = split.max(diff / size.max(f64::MIN_POSITIVE));
            }
            systems += 1;
        }
    }
    let pass = jm <= 1e-8 && off <= 1e-6 && split <= 1e-6;
    Ok(InterpolantReport { systems, max_jacobian_mismatch: jm, max_off_root_value: off, max_split_mismatch: split, pass })
}

// ---------------------------------------------------------------------------
// cross-method agreement

#[derive(Clone, Debug, Serialize)]
pub struct CrossMethodCase {
    pub d: usize,
    pub roots_normal_form: usize,
    pub roots_macaulay: usize,
    pub max_residual: f64,
    pub hausdorff: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossMethodReport {
    pub cases: Vec<CrossMethodCase>,
    pub worst_residual: f64,
    pub worst_hausdorff: f64,
    pub pass: bool,
}

pub const CROSS_METHOD_TOL: f64 = 1e-6;

fn cross_case(s: &PolySystem, rng: &mut ChaCha8Rng) -> Result<CrossMethodCase> {
    let nf = solve_normal_form(s, true, rng)?;
    let mac = solve_macaulay_resultant(s, true, rng)?;
    let want = s.bezout_count();
    let max_residual = nf.max_residual().max(mac.max_residual());
    let hausdorff = hausdorff_distance(&nf.roots, &mac.roots);
    let pass = nf.len() == want && mac.len() == want && max_residual <= CROSS_METHOD_TOL && hausdorff <= CROSS_METHOD_TOL;
    Ok(CrossMethodCase { d: s.d(), roots_normal_form: nf.len(), roots_macaulay: mac.len(), max_residual, hausdorff, pass })
}

/// Normal-form and Macaulay solvers on random quadratic systems: Bézout
/// root counts, residuals and Hausdorff distance between the root sets.
pub fn crossmethod_suite(dims: &[usize], systems_per_dim: usize, seed: u64) -> Result<CrossMethodReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for &d in dims {
        for _ in 0..systems_per_dim {
            let s = random_quadratic_system(d, &mut rng)?;
            cases.push(match cross_case(&s, &mut rng) {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("cross-method case failed: {e}");
                    CrossMethodCase {
                        d,
                        roots_normal_form: 0,
                        roots_macaulay: 0,
                        max_residual: f64::INFINITY,
                        hausdorff: f64::INFINITY,
                        pass: false,
                    }
                }
            });
        }
    }
    let worst_residual = cases.iter().map(|c| c.max_residual).fold(0.0, f64::max);
    let worst_hausdorff = cases.iter().map(|c| c.hausdorff).fold(0.0, f64::max);
    let pass = cases.iter().all(|c| c.pass);
    Ok(CrossMethodReport { cases, worst_residual, worst_hausdorff, pass })
}

// ---------------------------------------------------------------------------

/// `\hat M_rho` of the two-variable not-devastating example, used as the
/// default matrix of the null-space perturbation suite.
pub fn notdev2d_hat(sigma: f64, seed: u64) -> Result<CMatrix> {
    let s = crate::families::generate_seeded(&FamilySpec::notdev2d(sigma).with_seed(seed))?;
    Ok(macaulay_hat_rho(&s)?.mat)
}

/// Runs a suite with its default configuration and returns the JSON report.
pub fn run_suite(suite: Suite, seed: u64) -> Result<serde_json::Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = match suite {
        Suite::LemmaA1 => {
            let reports = (1..=6).map(|d| lemma_a1_suite(d, 10_000, &mut rng)).collect::<Result<Vec<_>>>()?;
            let pass = reports.iter().all(|r| r.pass);
            serde_json::json!({ "suite": suite.tag(), "pass": pass, "cases": reports })
        }
        Suite::Prop51 => {
            let r = prop51_suite(&[2, 3, 4], &[1e-1, 1e-2], seed)?;
            serde_json::json!({ "suite": suite.tag(), "pass": r.pass, "cases": r.cases })
        }
        Suite::AppendixD => {
            let m = notdev2d_hat(1e-2, seed)?;
            let nullity = 4;
            let cols = m.ncols();
            let smin = singular_values(&m)?[cols - nullity - 1];
            let eps: Vec<f64> = [1e-5, 1e-6, 1e-7].iter().map(|f| f * smin).collect();
            let recs = nullspace_perturbation_suite(&m, nullity, &eps, 50, &mut rng)?;
            let pass = recs.iter().all(|r| r.pass);
            serde_json::json!({ "suite": suite.tag(), "pass": pass, "matrix": "notdev2d hat M_rho, sigma = 1e-2", "levels": recs })
        }
        Suite::Interpolant => {
            let r = interpolant_suite(&[2, 3], 10, seed)?;
            serde_json::to_value(r)?
        }
        Suite::CrossMethod => {
            let r = crossmethod_suite(&[2, 3], 25, seed)?;
            serde_json::to_value(r)?
        }
    };
    Ok(value)
}

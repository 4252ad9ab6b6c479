//! Univariate reductions of the cyclic-squares (elimination) and hypercube
//! (rational univariate representation) examples.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Diagnostics, Method, RootReport};
use crate::error::{Error, Result};
use crate::numkernel::{companion_roots, CMatrix};
use crate::poly::{MultiPoly, PolySystem, UniPoly, C64};

/// Largest `d` for which the `2^d`-degree univariate problems are built.
pub const MAX_UNIVARIATE_D: usize = 10;

/// Two separating values closer than this trigger a warning.
pub const SEPARATION_TOL: f64 = 1e-10;

/// A univariate reduction together with the estimate closest to its target.
#[derive(Clone, Debug)]
pub struct UnivariateOutcome {
    pub poly: UniPoly,
    /// Roots of `poly` as one-coordinate points over the system `{poly}`.
    pub report: RootReport,
    pub target: C64,
    pub estimate: C64,
    pub error: f64,
    /// Root of the original system recovered from `estimate` (RUR from the
    /// multiplication matrix only) and its distance to the designated root.
    pub point: Option<Vec<C64>>,
    pub point_error: Option<f64>,
}

fn outcome(poly: UniPoly, target: C64, method: Method, notes: Vec<String>) -> Result<UnivariateOutcome> {
    let roots = companion_roots(&poly)?;
    let deriv = poly.derivative();
    let kappas = roots
        .iter()
        .map(|&z| {
            let g = deriv.eval(z).norm();
            if g == 0.0 { f64::INFINITY } else { 1.0 / g }
        })
        .collect();
    let estimate = *roots
        .iter()
        .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
        .ok_or(Error::ConstantPolynomial)?;
    let sys = PolySystem::new(vec![univariate_as_multi(&poly)])?;
    let report = RootReport::new(
        &sys,
        roots.into_iter().map(|z| vec![z]).collect(),
        kappas,
        method,
        Diagnostics { notes, ..Default::default() },
    )?;
    Ok(UnivariateOutcome { poly, report, target, estimate, error: (estimate - target).norm(), point: None, point_error: None })
}

pub fn univariate_as_multi(p: &UniPoly) -> MultiPoly {
    MultiPoly::from_terms(1, p.coeffs().iter().enumerate().map(|(k, c)| (vec![k as u32], *c)))
        .expect("single-variable exponents")
}

/// `g = x^{2^d} - sigma^{2^d - 1} x`, the generator of the elimination ideal
/// of the cyclic-squares system for every coordinate.
pub fn gb_generator(d: usize, sigma: f64) -> Result<UniPoly> {
    if !(sigma > 0.0) || d == 0 {
        return Err(Error::InvalidParameter(format!("need sigma > 0 and d >= 1 (sigma = {sigma}, d = {d})")));
    }
    if d > MAX_UNIVARIATE_D {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds cap {MAX_UNIVARIATE_D}")));
    }
    let n = 1usize << d;
    let coeff = sigma.powi(n as i32 - 1);
    if !coeff.is_finite() {
        return Err(Error::Overflow(format!("sigma^{} overflows", n - 1)));
    }
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[1] = C64::new(-coeff, 0.0);
    c[n] = C64::new(1.0, 0.0);
    Ok(UniPoly::new(c))
}

/// Solves the elimination polynomial for coordinate `coord` of the
/// cyclic-squares system whose roots have been translated by `shift`
/// (so the devastating root sits at `shift`).
pub fn solve_gb_elimination_example(d: usize, sigma: f64, coord: usize, shift: f64) -> Result<UnivariateOutcome> {
    if coord >= d {
        return Err(Error::VariableOutOfRange { index: coord, nvars: d });
    }
    let g = gb_generator(d, sigma)?;
    let mut notes = Vec::new();
    if g.coeffs()[1].norm() == 0.0 {
        notes.push(format!("sigma^{} underflowed to zero", (1usize << d) - 1));
    }
    let poly = if shift == 0.0 { g } else { g.translate(C64::new(shift, 0.0)) };
    outcome(poly, C64::new(shift, 0.0), Method::GbElimination, notes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RurMode {
    /// Separating values computed from the closed-form hypercube roots.
    ExactRoots,
    /// Separating values computed from roots returned by the normal-form solver.
    FromSolver,
    /// `f` as the characteristic polynomial of the multiplication matrix of
    /// `t` (normal-form construction on a random-`A` member), with
    /// coefficients from the power sums `tr(M_t^k)`.
    Multiplication { seed: u64 },
}

/// `t_S = (1/(c sqrt d)) sum_i (-1)^{[i in S]} u_i` over all subsets `S`.
pub fn rur_separating_values(d: usize, c: f64, u: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (c * (d as f64).sqrt());
    (0..1usize << d)
        .map(|mask| scale * (0..d).map(|i| if mask >> i & 1 == 1 { -u[i] } else { u[i] }).sum::<f64>())
        .collect()
}

/// Number of pairs of separating values closer than [`SEPARATION_TOL`].
pub fn separation_collisions(t: &[C64]) -> usize {
    t.iter().tuple_combinations().filter(|(a, b)| (**a - **b).norm() < SEPARATION_TOL).count()
}

/// Builds `f(x) = prod_S (x - t_S)` for the hypercube example with `A = I`
/// and returns the root estimate closest to `t(x*) = sum u_i / (c sqrt d)`.
pub fn solve_rur_example(d: usize, c: f64, u: &[f64], mode: RurMode) -> Result<UnivariateOutcome> {
    if d == 0 || d > MAX_UNIVARIATE_D {
        return Err(Error::InvalidParameter(format!("d = {d} outside 1..={MAX_UNIVARIATE_D}")));
    }
    if u.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.len() });
    }
    if !(c > 0.0) || u.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter("need c > 0 and |u| <= 1".into()));
    }
    if let RurMode::Multiplication { seed } = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = crate::families::generate(&crate::families::FamilySpec::hypercube(d, c), &mut rng)?;
        let ms = super::build_ms_matrices(&s)?;
        let target = C64::new(u.iter().sum::<f64>() / (c * (d as f64).sqrt()), 0.0);
        let mt = ms.combination(u);
        let f = charpoly_from_traces(&mt);
        let mut out = outcome(f.clone(), target, Method::Rur, Vec::new())?;
        // x_i = g_{x_i}(t) / f'(t)
        let denom = f.derivative().eval(out.estimate);
        let point: Vec<C64> = ms.mats.iter().map(|mv| rur_parametrization(&f, &mt, mv).eval(out.estimate) / denom).collect();
        let truth = crate::families::hypercube_roots(d, c).swap_remove(0);
        out.point_error = Some(point.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt());
        out.point = Some(point);
        return Ok(out);
    }
    let t: Vec<C64> = match mode {
        RurMode::ExactRoots => rur_separating_values(d, c, u).into_iter().map(|v| C64::new(v, 0.0)).collect(),
        RurMode::FromSolver => {
            let spec = crate::families::FamilySpec::hypercube(d, c).with_matrix(crate::families::MatrixChoice::Identity);
            let s = crate::families::generate(&spec, &mut ChaCha8Rng::seed_from_u64(1))?;
            let r = super::solve_normal_form(&s, true, &mut ChaCha8Rng::seed_from_u64(1))?;
            r.roots.iter().map(|x| x.iter().zip(u).map(|(xi, ui)| xi * *ui).sum()).collect()
        }
        RurMode::Multiplication { .. } => unreachable!("handled above"),
    };
    let mut notes = Vec::new();
    let collisions = separation_collisions(&t);
    if collisions > 0 {
        log::warn!("separating polynomial fails to separate: {collisions} colliding pairs");
        notes.push(format!("{collisions} colliding separating values"));
    }
    let target = C64::new(u.iter().sum::<f64>() / (c * (d as f64).sqrt()), 0.0);
    outcome(UniPoly::from_roots(&t), target, Method::Rur, notes)
}

/// Monic characteristic polynomial of `m` from the power sums
/// `p_k = tr(m^k)` by Newton's identities.
pub fn charpoly_from_traces(m: &CMatrix) -> UniPoly {
    let n = m.nrows();
    let mut power = m.clone();
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            power = &power * m;
        }
        p.push((0..n).map(|i| power[(i, i)]).sum::<C64>());
    }
    // e_k = (1/k) sum_{i=1}^k (-1)^{i-1} e_{k-i} p_i
    let mut e = vec![C64::new(1.0, 0.0)];
    for k in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let term = e[k - i] * p[i - 1];
            acc += if i % 2 == 1 { term } else { -term };
        }
        e.push(acc / k as f64);
    }
    // f(x) = sum_k (-1)^k e_k x^{n-k}, stored lowest degree first
    let coeffs = (0..=n).map(|j| {
        let k = n - j;
        if k.is_multiple_of(2) { e[k] } else { -e[k] }
    });
    UniPoly::new(coeffs.collect())
}

/// `g_v(T) = sum_j v(xi_j) f(T) / (T - t_j)`, assembled from the traces
/// `tr(M_v M_t^i)` and the Horner quotients of `f`.
pub fn rur_parametrization(f: &UniPoly, mt: &CMatrix, mv: &CMatrix) -> UniPoly {
    let a = f.coeffs();
    let n = a.len() - 1;
    let mut g = vec![C64::new(0.0, 0.0); n];
    let mut power = mv.clone();
    for i in 0..n {
        if i > 0 {
            power = &power * mt;
        }
        let tr: C64 = (0..power.nrows()).map(|k| power[(k, k)]).sum();
        // f(T)/(T - t) = sum_i t^i sum_{k > i} a_k T^{k-i-1}
        for k in i + 1..=n {
            g[k - i - 1] += tr * a[k];
        }
    }
    UniPoly::new(g)
}

//! Root, eigenvalue and subproblem condition numbers, the `Q` factorization
//! `p = Q (x - x*)`, Lagrange interpolants and null-space normal forms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Family;
use crate::macaulay::QuotientBasis;
use crate::numkernel::{
    bilinear, generalized_eig, random_unit_vector, solve_square, svd, vec_norm, CMatrix, EigTriple, GenEigProblem,
};
use crate::poly::{Monomial, MultiPoly, PolySystem, UniPoly, C64};
use crate::solvers::{normal_form::MsMatrices, Method, MultiParamEig};

/// A subproblem condition number next to the root condition number it is
/// compared with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kappa_root: f64,
    pub kappa_sub: f64,
    pub ratio: f64,
    pub method_tag: String,
}

impl ConditionReport {
    pub fn new(kappa_root: f64, kappa_sub: f64, method_tag: impl Into<String>) -> Self {
        ConditionReport { kappa_root, kappa_sub, ratio: kappa_sub / kappa_root, method_tag: method_tag.into() }
    }
}

/// `||J(x*)^{-1}||_2`.
pub fn kappa_root(s: &PolySystem, x: &[C64]) -> Result<f64> {
    let j = s.jacobian(x)?;
    let sv = crate::numkernel::singular_values(&j)?;
    let (hi, lo) = (sv[0], *sv.last().expect("d >= 1"));
    if lo == 0.0 || lo <= f64::EPSILON * hi * 1e-3 {
        return Err(Error::SingularJacobian);
    }
    Ok(1.0 / lo)
}

/// `|p'(x*)|^{-1}`.
pub fn kappa_uni(p: &UniPoly, x: C64) -> Result<f64> {
    let g = p.derivative().eval(x).norm();
    if g == 0.0 {
        return Err(Error::MultipleRoot);
    }
    Ok(1.0 / g)
}

/// `||y|| ||x|| / |y^T B x| * (1 + |lambda|)` with `y` the left (transpose
/// convention) and `x` the right eigenvector.
pub fn kappa_eig(gep: &GenEigProblem, t: &EigTriple) -> Result<f64> {
    let lam = t.lambda.ok_or(Error::DefectiveEigenvalue(0.0))?;
    kappa_from_vectors(&t.left, &gep.b, &t.right, lam)
}

pub fn kappa_from_vectors(left: &[C64], b: &CMatrix, right: &[C64], lambda: C64) -> Result<f64> {
    let den = bilinear(left, b, right).norm();
    let num = vec_norm(left) * vec_norm(right);
    if den == 0.0 || den <= f64::EPSILON * 1e-3 * num {
        return Err(Error::DefectiveEigenvalue(den));
    }
    Ok(num / den * (1.0 + lambda.norm()))
}

/// Singular-vector data of one `W_i(x*)`, whose smallest singular value is
/// (numerically) zero at a root.
#[derive(Clone, Debug)]
pub struct LocalSingularData {
    /// Left null vector in the transpose convention: `u^T W_i(x*) ~ 0`.
    pub u: Vec<C64>,
    /// Right null vector: `W_i(x*) v ~ 0`.
    pub v: Vec<C64>,
    pub sigma_min: f64,
    /// Product of the other singular values.
    pub sigma_rest: f64,
    /// Scale with `D B_0 = J(x*)`.
    pub d_factor: C64,
}

/// Per-equation SVD data at `x`.
pub fn mep_local_data(mep: &MultiParamEig, x: &[C64]) -> Result<Vec<LocalSingularData>> {
    (0..mep.d())
        .map(|i| {
            let w = mep.eval(i, x);
            let n = w.nrows();
            let dec = svd(&w)?;
            let u: Vec<C64> = dec.u.col(n - 1).iter().map(|z| z.conj()).collect();
            let v: Vec<C64> = dec.v.col(n - 1).iter().copied().collect();
            let sigma_rest: f64 = dec.singular_values[..n - 1].iter().product();
            // adj(W) = det(U) conj(det V) prod_{k<n} sigma_k v_n u_n^H, and
            // dp/dx_j = -tr(adj(W) V_ij)
            let d_factor = -dec.u.determinant() * dec.v.determinant().conj() * sigma_rest;
            Ok(LocalSingularData { u, v, sigma_min: dec.singular_values[n - 1], sigma_rest, d_factor })
        })
        .collect()
}

/// `(B_0)_ij = u_i^T V_ij v_i`.
pub fn b0_matrix(mep: &MultiParamEig, data: &[LocalSingularData]) -> CMatrix {
    let d = mep.d();
    CMatrix::from_fn(d, d, |i, j| bilinear(&data[i].u, &mep.coefficients(i)[j + 1], &data[i].v))
}

/// `(D, B_0)` at `x*` with `D` diagonal and `D B_0 = J(x*)`.
pub fn b0_factorization(mep: &MultiParamEig, x: &[C64]) -> Result<(CMatrix, CMatrix)> {
    let data = mep_local_data(mep, x)?;
    let b0 = b0_matrix(mep, &data);
    let d = CMatrix::from_fn(mep.d(), mep.d(), |i, j| if i == j { data[i].d_factor } else { C64::new(0.0, 0.0) });
    Ok((d, b0))
}

/// `prod_k prod_{j < n_k} sigma_j(W_k(x*)) / |det J(x*)| * (1 + |x_i*|)`.
pub fn kappa_eig_mep_formula(mep: &MultiParamEig, s: &PolySystem, x: &[C64], i: usize) -> Result<f64> {
    check_coord(i, s.d())?;
    let data = mep_local_data(mep, x)?;
    let det_j = s.jacobian(x)?.determinant().norm();
    if det_j == 0.0 {
        return Err(Error::SingularJacobian);
    }
    let prod: f64 = data.iter().map(|l| l.sigma_rest).product();
    Ok(prod / det_j * (1.0 + x[i].norm()))
}

fn check_coord(i: usize, d: usize) -> Result<()> {
    if i >= d {
        return Err(Error::VariableOutOfRange { index: i, nvars: d });
    }
    Ok(())
}

fn nearest_index(points: &[Vec<C64>], x: &[C64]) -> Option<usize> {
    let dist = |p: &[C64]| p.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    (0..points.len()).min_by(|&a, &b| dist(&points[a]).total_cmp(&dist(&points[b])))
}

/// Condition number of the eigenvalue `x_i*` of the coordinate pencil
/// `(Delta_i, Delta_0)`, evaluated from the eigenvectors the QZ algorithm
/// returns for a random combination `(sum c_k Delta_k, Delta_0)`.
pub fn kappa_eig_mep_direct<R: Rng + ?Sized>(mep: &MultiParamEig, x: &[C64], i: usize, rng: &mut R) -> Result<f64> {
    check_coord(i, mep.d())?;
    let (delta0, deltas) = mep.operator_determinants()?;
    let c = random_unit_vector(mep.d(), rng);
    let n = delta0.nrows();
    let mut comb = CMatrix::zeros(n, n);
    for (ck, dk) in c.iter().zip(&deltas) {
        comb += faer::Scale(C64::new(*ck, 0.0)) * dk;
    }
    let trips: Vec<EigTriple> = generalized_eig(&GenEigProblem::new(comb, delta0.clone())?)?
        .into_iter()
        .filter(EigTriple::is_finite)
        .collect();
    let coords: Vec<Vec<C64>> = trips
        .iter()
        .map(|t| {
            let den = bilinear(&t.left, &delta0, &t.right);
            deltas.iter().map(|dk| bilinear(&t.left, dk, &t.right) / den).collect()
        })
        .collect();
    let k = nearest_index(&coords, x).ok_or(Error::DefectiveEigenvalue(0.0))?;
    kappa_from_vectors(&trips[k].left, &delta0, &trips[k].right, coords[k][i])
}

/// `[det Q]_B` for the canonical `Q` at `x*`.
pub fn det_q_normal_form(s: &PolySystem, x: &[C64], basis: &QuotientBasis) -> Result<Vec<C64>> {
    let qf = q_factorization(s, x)?;
    normal_form(&qf.det(), basis)
}

/// `||[det Q]_B||_2 ||B(x*)||_2 / |det J(x*)| * (1 + |x_i*|)`.
pub fn kappa_eig_ms_formula(s: &PolySystem, x: &[C64], basis: &QuotientBasis, i: usize) -> Result<f64> {
    check_coord(i, s.d())?;
    let q = det_q_normal_form(s, x, basis)?;
    let det_j = s.jacobian(x)?.determinant().norm();
    if det_j == 0.0 {
        return Err(Error::SingularJacobian);
    }
    Ok(vec_norm(&q) * vec_norm(&basis.eval(x)) / det_j * (1.0 + x[i].norm()))
}

/// Condition number of the eigenvalue `x_i*` of `M_{x_i}`, from the
/// eigenvectors of a random combination of the MS matrices.
pub fn kappa_eig_ms_direct<R: Rng + ?Sized>(ms: &MsMatrices, x: &[C64], i: usize, rng: &mut R) -> Result<f64> {
    check_coord(i, ms.mats.len())?;
    let u = random_unit_vector(ms.mats.len(), rng);
    let trips = generalized_eig(&GenEigProblem::standard(ms.combination(&u))?)?;
    let coords: Vec<Vec<C64>> = trips
        .iter()
        .map(|t| ms.mats.iter().map(|m| crate::solvers::rayleigh(m, &t.right)).collect())
        .collect();
    let k = nearest_index(&coords, x).ok_or(Error::DefectiveEigenvalue(0.0))?;
    let r = ms.basis.dim();
    kappa_from_vectors(&trips[k].left, &CMatrix::identity(r, r), &trips[k].right, coords[k][i])
}

/// `||[det Q]_B||_2 ||V(x*)||_2 / |det J(x*) h_beta(x*)|`, where `V` is the
/// column-label evaluation and `h_beta` the polynomial multiplying `lambda`.
pub fn kappa_eig_macaulay_bound(
    s: &PolySystem,
    x: &[C64],
    basis: &QuotientBasis,
    h_beta: &MultiPoly,
    col_values: &[C64],
) -> Result<f64> {
    let q = det_q_normal_form(s, x, basis)?;
    let det_j = s.jacobian(x)?.determinant().norm();
    let h = h_beta.eval(x)?.norm();
    if det_j == 0.0 || h == 0.0 {
        return Err(Error::SingularJacobian);
    }
    Ok(vec_norm(&q) * vec_norm(col_values) / (det_j * h))
}

/// `Q` with `p_i = sum_j Q_ij (x_j - x_j*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFactorization {
    pub q: Vec<Vec<MultiPoly>>,
    pub shift: Vec<C64>,
}

impl QFactorization {
    pub fn d(&self) -> usize {
        self.shift.len()
    }

    /// `sum_j Q_ij (x_j - x_j*)` for every `i`.
    pub fn reconstruct(&self) -> Vec<MultiPoly> {
        let d = self.d();
        self.q
            .iter()
            .map(|row| {
                row.iter().enumerate().fold(MultiPoly::zero(d), |acc, (j, qij)| {
                    let lin = &MultiPoly::var(d, j) - &MultiPoly::constant(d, self.shift[j]);
                    &acc + &(qij * &lin)
                })
            })
            .collect()
    }

    pub fn eval(&self, x: &[C64]) -> Result<CMatrix> {
        let d = self.d();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.q[i][j].eval(x)?;
            }
        }
        Ok(m)
    }

    /// `det Q` as a polynomial.
    pub fn det(&self) -> MultiPoly {
        let idx: Vec<usize> = (0..self.d()).collect();
        poly_det(&self.q, &idx, self.d())
    }
}

/// Leibniz expansion of the principal submatrix on `idx`, skipping zero entries.
fn poly_det(q: &[Vec<MultiPoly>], idx: &[usize], nvars: usize) -> MultiPoly {
    fn rec(q: &[Vec<MultiPoly>], idx: &[usize], row: usize, used: &mut Vec<bool>, acc: MultiPoly, out: &mut MultiPoly) {
        if row == idx.len() {
            *out = &*out + &acc;
            return;
        }
        for c in 0..idx.len() {
            if used[c] || q[idx[row]][idx[c]].is_zero() {
                continue;
            }
            // sign from the number of already used columns to the right
            let inversions = used[c + 1..].iter().filter(|u| **u).count();
            let mut term = &acc * &q[idx[row]][idx[c]];
            if inversions % 2 == 1 {
                term = -&term;
            }
            used[c] = true;
            rec(q, idx, row + 1, used, term, out);
            used[c] = false;
        }
    }
    let mut out = MultiPoly::zero(nvars);
    rec(q, idx, 0, &mut vec![false; idx.len()], MultiPoly::constant(nvars, C64::new(1.0, 0.0)), &mut out);
    out
}

/// Canonical `Q`: expand each `p_i` about `x*` and give every shifted
/// monomial to the column of its lowest-index variable.
pub fn q_factorization(s: &PolySystem, x: &[C64]) -> Result<QFactorization> {
    let d = s.d();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let neg: Vec<C64> = x.iter().map(|z| -z).collect();
    let mut q = vec![vec![MultiPoly::zero(d); d]; d];
    for (i, p) in s.polys().iter().enumerate() {
        // local(y) = p(y + x*)
        let local = p.translate(&neg)?;
        let tol = 1e-10 * (1.0 + p.coefficient_scale());
        let constant = local.coeff(&Monomial::one(d)).norm();
        if constant > tol {
            return Err(Error::NotARoot { index: i, residual: constant, tolerance: tol });
        }
        let mut cols = vec![Vec::new(); d];
        for (m, c) in local.terms() {
            let Some(j) = m.exponents().iter().position(|&e| e > 0) else { continue };
            let mut e = m.exponents().to_vec();
            e[j] -= 1;
            cols[j].push((e, *c));
        }
        for (j, terms) in cols.into_iter().enumerate() {
            q[i][j] = MultiPoly::from_terms(d, terms)?.translate(x)?;
        }
    }
    Ok(QFactorization { q, shift: x.to_vec() })
}

/// `sum_{I subset [d]} det(Q'_I) prod_{k in I} r_k` where `Q' = Q - diag(r)`
/// and `Q'_I` deletes the rows and columns in `I`. Equals `det Q` for any
/// `r`; `r = 0` is the default split.
pub fn lagrange_interpolant(qf: &QFactorization, r: &[MultiPoly]) -> Result<MultiPoly> {
    let d = qf.d();
    if r.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    let mut qp = qf.q.clone();
    for k in 0..d {
        qp[k][k] = &qp[k][k] - &r[k];
    }
    let mut out = MultiPoly::zero(d);
    for mask in 0..1usize << d {
        let kept: Vec<usize> = (0..d).filter(|k| mask >> k & 1 == 0).collect();
        let mut term = poly_det(&qp, &kept, d);
        for k in (0..d).filter(|k| mask >> k & 1 == 1) {
            if term.is_zero() {
                break;
            }
            term = &term * &r[k];
        }
        out = &out + &term;
    }
    Ok(out)
}

/// Coefficients `c` with `f = sum_b c_b b` in the quotient, from
/// `c = N_B^{-T} N^T f`.
pub fn normal_form(f: &MultiPoly, basis: &QuotientBasis) -> Result<Vec<C64>> {
    if basis.condition > crate::solvers::normal_form::BASIS_CONDITION_LIMIT {
        return Err(Error::BasisSingular(basis.condition));
    }
    if !f.support_within(&basis.col_labels) {
        return Err(Error::InvalidParameter("polynomial degree exceeds the Macaulay degree".into()));
    }
    let fv = f.coefficients_over(&basis.col_labels);
    let r = basis.dim();
    let rhs = CMatrix::from_fn(r, 1, |k, _| (0..fv.len()).map(|j| basis.null[(j, k)] * fv[j]).sum());
    let sol = solve_square(&basis.basis_block().transpose().to_owned(), &rhs);
    Ok((0..r).map(|k| sol[(k, 0)]).collect())
}

/// `clamp(16 - log10(kappa), 0, 16)`.
pub fn digits_from_kappa(kappa: f64) -> f64 {
    (16.0 - kappa.log10()).clamp(0.0, 16.0)
}

/// Predicted subproblem condition number of `method` on the designated
/// root of `family` (`param` is `sigma`, or `c` for the hypercube).
pub fn theory_kappa(method: Method, family: Family, d: usize, param: f64) -> f64 {
    let cube = ((1u64 << d.min(62)) - 1) as f64;
    match (method, family) {
        (Method::GbElimination, _) => param.powf(-cube),
        (Method::Rur, _) => (param / 2.0).powf(cube),
        (_, Family::NotDev2d | Family::NotDev3d) => param.powi(-2),
        (_, Family::Hypercube) => (param * (d as f64).sqrt() / 2.0).powi(d as i32),
        _ => param.powi(-(d as i32)),
    }
}

/// `kappa_root` at the designated root.
pub fn stable_kappa(family: Family, d: usize, param: f64) -> f64 {
    match family {
        Family::Hypercube => param * (d as f64).sqrt() / 2.0,
        _ => 1.0 / param,
    }
}

pub fn theory_digits(method: Method, family: Family, d: usize, param: f64) -> f64 {
    digits_from_kappa(theory_kappa(method, family, d, param))
}

pub fn stable_digits(family: Family, d: usize, param: f64) -> f64 {
    digits_from_kappa(stable_kappa(family, d, param))
}

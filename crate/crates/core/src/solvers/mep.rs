//! Multiparameter eigenproblems and the operator-determinant solver.

use rand::Rng;

use super::{newton_polish, Diagnostics, Method, RootReport};
use crate::error::{Error, Result};
use crate::numkernel::{
    bilinear, block_operator_determinant, generalized_eig, random_unit_vector, sigma_min, vec_norm, CMatrix,
    GenEigProblem,
};
use crate::poly::{Monomial, MultiPoly, PolySystem, C64};

/// `W_i(x) = V_i0 - sum_j x_j V_ij` for `i = 1..d`.
#[derive(Clone, Debug)]
pub struct MultiParamEig {
    d: usize,
    /// `coeffs[i] = [V_i0, V_i1, .., V_id]`, all `n_i x n_i`.
    coeffs: Vec<Vec<CMatrix>>,
}

impl MultiParamEig {
    pub fn new(coeffs: Vec<Vec<CMatrix>>) -> Result<Self> {
        let d = coeffs.len();
        if d == 0 {
            return Err(Error::BlockSizeMismatch("no equations".into()));
        }
        for (i, row) in coeffs.iter().enumerate() {
            if row.len() != d + 1 {
                return Err(Error::DimensionMismatch { expected: d + 1, got: row.len() });
            }
            let n = row[0].nrows();
            if row.iter().any(|m| m.nrows() != n || m.ncols() != n) {
                return Err(Error::BlockSizeMismatch(format!("equation {i} mixes block sizes")));
            }
        }
        Ok(MultiParamEig { d, coeffs })
    }

    /// One 2x2 determinantal representation per polynomial.
    pub fn from_quadratic_system(s: &PolySystem) -> Result<Self> {
        Self::new(s.polys().iter().map(determinantal_representation_quadratic).collect::<Result<_>>()?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.coeffs.iter().map(|r| r[0].nrows()).collect()
    }

    /// `[V_i0, V_i1, .., V_id]`.
    pub fn coefficients(&self, i: usize) -> &[CMatrix] {
        &self.coeffs[i]
    }

    pub fn eval(&self, i: usize, x: &[C64]) -> CMatrix {
        let row = &self.coeffs[i];
        let mut w = row[0].clone();
        for (j, xj) in x.iter().enumerate() {
            w -= faer::Scale(*xj) * &row[j + 1];
        }
        w
    }

    pub fn det_at(&self, i: usize, x: &[C64]) -> C64 {
        self.eval(i, x).determinant()
    }

    /// `(Delta_0, [Delta_1, .., Delta_d])`.
    pub fn operator_determinants(&self) -> Result<(CMatrix, Vec<CMatrix>)> {
        let grid = |replace: Option<usize>| -> Vec<Vec<CMatrix>> {
            self.coeffs
                .iter()
                .map(|row| (1..=self.d).map(|j| if Some(j) == replace { row[0].clone() } else { row[j].clone() }).collect())
                .collect()
        };
        let delta0 = block_operator_determinant(&grid(None))?;
        let deltas = (1..=self.d).map(|i| block_operator_determinant(&grid(Some(i)))).collect::<Result<Vec<_>>>()?;
        Ok((delta0, deltas))
    }

    /// Largest relative mismatch `|det W_i(x) - p_i(x)| / (1 + |p_i(x)|)` over `points`.
    pub fn max_det_mismatch(&self, s: &PolySystem, points: &[Vec<C64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            for (i, p) in s.polys().iter().enumerate() {
                let v = p.eval(x)?;
                worst = worst.max((self.det_at(i, x) - v).norm() / (1.0 + v.norm()));
            }
        }
        Ok(worst)
    }
}

/// `W(x) = [[a x_i, l(x) + b], [-1, x_i]]` for `p = a x_i^2 + l(x) + b`, so
/// `det W = p`. The only admitted degree-two term is a single pure square.
pub fn determinantal_representation_quadratic(p: &MultiPoly) -> Result<Vec<CMatrix>> {
    let d = p.nvars();
    if p.degree() != Some(2) {
        return Err(Error::UnsupportedShape(format!("expected a quadratic, got degree {:?}", p.degree())));
    }
    let top: Vec<(&Monomial, &C64)> = p.terms().filter(|(m, _)| m.degree() == 2).collect();
    let (square, lead) = match top.as_slice() {
        [(m, c)] if m.exponents().contains(&2) => (*m, **c),
        _ => return Err(Error::UnsupportedShape("degree-two part must be a single pure square".into())),
    };
    let var = square.exponents().iter().position(|&e| e == 2).expect("checked above");
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let constant = p.coeff(&Monomial::one(d));
    let mut out = Vec::with_capacity(d + 1);
    out.push(CMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => constant,
        (1, 0) => -one,
        _ => zero,
    }));
    for j in 0..d {
        let lin = p.coeff(&Monomial::var(d, j));
        let diag = j == var;
        // V_j is minus the coefficient matrix of x_j
        out.push(CMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) if diag => -lead,
            (0, 1) => -lin,
            (1, 1) if diag => -one,
            _ => zero,
        }));
    }
    Ok(out)
}

/// Solves the MEP through the pencil `(sum_i c_i Delta_i, Delta_0)` for a
/// random unit `c`, then reads every coordinate from the shared two-sided
/// eigenvectors: `x_i = y^T Delta_i w / y^T Delta_0 w`.
///
/// `subproblem_kappa` holds the largest coordinate-pencil condition number.
pub fn solve_mep_operator_determinants<R: Rng + ?Sized>(
    mep: &MultiParamEig,
    s: &PolySystem,
    polish: bool,
    rng: &mut R,
) -> Result<RootReport> {
    let d = mep.d();
    if s.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: s.d() });
    }
    let (delta0, deltas) = mep.operator_determinants()?;
    let n = delta0.nrows();
    let scale = delta0.norm_l2().max(f64::MIN_POSITIVE);
    if sigma_min(&delta0)? <= n as f64 * f64::EPSILON * scale {
        return Err(Error::SingularDelta0);
    }
    let c = random_unit_vector(d, rng);
    let mut combined = CMatrix::zeros(n, n);
    for (ci, di) in c.iter().zip(&deltas) {
        combined += faer::Scale(C64::new(*ci, 0.0)) * di;
    }
    let trips = generalized_eig(&GenEigProblem::new(combined, delta0.clone())?)?;
    let mut roots = Vec::new();
    let mut kappas = Vec::new();
    let mut notes = Vec::new();
    for t in trips.iter().filter(|t| t.is_finite()) {
        let den = bilinear(&t.left, &delta0, &t.right);
        if den.norm() == 0.0 {
            notes.push("eigenvector pair with y^T Delta_0 w = 0 skipped".to_string());
            continue;
        }
        let x: Vec<C64> = deltas.iter().map(|di| bilinear(&t.left, di, &t.right) / den).collect();
        let base = vec_norm(&t.left) * vec_norm(&t.right) / den.norm();
        kappas.push(x.iter().map(|xi| base * (1.0 + xi.norm())).fold(0.0, f64::max));
        roots.push(if polish { newton_polish(s, &x, 2) } else { x });
    }
    RootReport::new(s, roots, kappas, Method::Mep, Diagnostics { notes, ..Default::default() })
}

//! Macaulay matrices, quotient-basis selection and the `h`-augmented
//! Macaulay pencil.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::{
    condition_number, null_space_with_gap, pencil_is_singular, random_complex_gaussian, singular_values,
    CMatrix, GenEigProblem,
};
use crate::poly::{monomials_up_to, Monomial, MonomialOrder, MultiPoly, PolySystem, C64};

/// Rows are coefficient vectors of `m * p_i`, columns are monomials.
#[derive(Clone, Debug)]
pub struct MacaulayMatrix {
    pub mat: CMatrix,
    /// `(polynomial index, multiplier)` per row.
    pub row_labels: Vec<(usize, Monomial)>,
    pub col_labels: Vec<Monomial>,
    pub degree: u32,
}

impl MacaulayMatrix {
    pub fn column_index(&self) -> HashMap<Monomial, usize> {
        self.col_labels.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect()
    }

    pub fn row_label(&self, k: usize) -> String {
        let (i, m) = &self.row_labels[k];
        if m.degree() == 0 {
            format!("p{}", i + 1)
        } else {
            format!("{m}p{}", i + 1)
        }
    }

    /// Evaluation of the column labels at `x`.
    pub fn label_values(&self, x: &[C64]) -> Vec<C64> {
        self.col_labels.iter().map(|m| m.eval(x)).collect()
    }

    /// CSV dump with a header of column monomials and one labelled row per
    /// polynomial multiple. Complex entries are written as `re+imi`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["row".to_string()];
        header.extend(self.col_labels.iter().map(Monomial::label));
        w.write_record(&header)?;
        for k in 0..self.mat.nrows() {
            let mut rec = vec![self.row_label(k)];
            for j in 0..self.mat.ncols() {
                let z = self.mat[(k, j)];
                rec.push(if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) });
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coefficients of `poly` over `cols`; errors if `poly` has support outside.
fn coefficient_row(poly: &MultiPoly, cols: &HashMap<Monomial, usize>, width: usize) -> Result<Vec<C64>> {
    let mut row = vec![C64::new(0.0, 0.0); width];
    for (m, c) in poly.terms() {
        let j = cols
            .get(m)
            .ok_or_else(|| Error::InvalidParameter(format!("monomial {m} exceeds the Macaulay degree")))?;
        row[*j] = *c;
    }
    Ok(row)
}

/// `\hat M_degree`: one row per `(i, m)` with `deg(m) <= degree - deg(p_i)`,
/// polynomial-major, multipliers in monomial order.
pub fn macaulay_hat(s: &PolySystem, degree: u32, order: &MonomialOrder) -> Result<MacaulayMatrix> {
    let d = s.d();
    let degs = s.degrees()?;
    let col_labels = monomials_up_to(degree, d, order);
    let cols: HashMap<Monomial, usize> = col_labels.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows = Vec::new();
    let mut row_labels = Vec::new();
    for (i, p) in s.polys().iter().enumerate() {
        if degs[i] > degree {
            continue;
        }
        for m in monomials_up_to(degree - degs[i], d, order) {
            rows.push(coefficient_row(&p.shift_by(&m), &cols, col_labels.len())?);
            row_labels.push((i, m));
        }
    }
    let mat = CMatrix::from_fn(rows.len(), col_labels.len(), |i, j| rows[i][j]);
    Ok(MacaulayMatrix { mat, row_labels, col_labels, degree })
}

/// `\hat M_rho` in graded order.
pub fn macaulay_hat_rho(s: &PolySystem) -> Result<MacaulayMatrix> {
    macaulay_hat(s, s.rho()?, &MonomialOrder::graded_lex(s.d()))
}

/// A basis of the quotient algebra chosen among the columns of the Macaulay
/// matrix, together with the null space it was chosen from.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    /// Orthonormal null space of `\hat M_rho`, rows indexed like `col_labels`.
    pub null: CMatrix,
    pub col_labels: Vec<Monomial>,
    pub basis: Vec<Monomial>,
    /// Column indices of `basis` within `col_labels`.
    pub basis_rows: Vec<usize>,
    /// 2-norm condition number of the selected `r x r` block of `null`.
    pub condition: f64,
    /// `sigma_rank / sigma_{rank+1}` of `\hat M_rho`.
    pub gap: f64,
}

impl QuotientBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn row_of(&self, m: &Monomial) -> Option<usize> {
        self.col_labels.iter().position(|c| c == m)
    }

    /// The `r x r` submatrix of `null` on the basis rows.
    pub fn basis_block(&self) -> CMatrix {
        rows_of(&self.null, &self.basis_rows)
    }

    /// Evaluation of the basis monomials at `x`.
    pub fn eval(&self, x: &[C64]) -> Vec<C64> {
        self.basis.iter().map(|m| m.eval(x)).collect()
    }
}

pub(crate) fn rows_of(m: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Greedy pivoted Gram–Schmidt over the rows of `m` restricted to
/// `candidates`: repeatedly takes the candidate with the largest residual
/// norm (lowest index on ties) and orthogonalizes the rest against it.
pub(crate) fn pivoted_row_selection(m: &CMatrix, candidates: &[usize], count: usize) -> Result<Vec<usize>> {
    let width = m.ncols();
    let mut resid: Vec<Vec<C64>> = candidates
        .iter()
        .map(|&i| (0..width).map(|j| m[(i, j)]).collect())
        .collect();
    let initial = resid
        .iter()
        .map(|r| crate::numkernel::vec_norm(r))
        .fold(0.0, f64::max);
    let mut taken = vec![false; candidates.len()];
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best = None;
        let mut best_norm = 0.0;
        for (k, r) in resid.iter().enumerate() {
            if taken[k] {
                continue;
            }
            let n = crate::numkernel::vec_norm(r);
            if n > best_norm {
                best_norm = n;
                best = Some(k);
            }
        }
        let k = match best {
            Some(k) if best_norm > 1e-12 * initial => k,
            _ => return Err(Error::RankDeficientCandidates),
        };
        taken[k] = true;
        chosen.push(candidates[k]);
        let q: Vec<C64> = resid[k].iter().map(|z| z / best_norm).collect();
        for (k2, r) in resid.iter_mut().enumerate() {
            if taken[k2] {
                continue;
            }
            let proj: C64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, qa) in r.iter_mut().zip(&q) {
                *x -= proj * qa;
            }
        }
    }
    Ok(chosen)
}

/// Selects `r` basis monomials of degree `<= rho - 1` from the null space
/// of `\hat M_rho` by pivoted orthogonalization of its rows.
pub fn choose_basis(hat: &MacaulayMatrix, r: usize) -> Result<QuotientBasis> {
    let (null, gap) = null_space_with_gap(&hat.mat, r)?;
    let max_deg = hat.degree.saturating_sub(1);
    let candidates: Vec<usize> = hat
        .col_labels
        .iter()
        .enumerate()
        .filter(|(_, m)| m.degree() <= max_deg)
        .map(|(i, _)| i)
        .collect();
    let mut rows = pivoted_row_selection(&null, &candidates, r)?;
    rows.sort_unstable();
    finish_basis(hat, null, rows, gap)
}

/// Uses a caller-supplied set of basis monomials instead of pivoting.
pub fn basis_from_monomials(hat: &MacaulayMatrix, r: usize, basis: &[Monomial]) -> Result<QuotientBasis> {
    if basis.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: basis.len() });
    }
    let (null, gap) = null_space_with_gap(&hat.mat, r)?;
    let mut rows = Vec::with_capacity(r);
    for m in basis {
        let k = hat
            .col_labels
            .iter()
            .position(|c| c == m)
            .ok_or_else(|| Error::InvalidParameter(format!("{m} is not a column label")))?;
        rows.push(k);
    }
    rows.sort_unstable();
    finish_basis(hat, null, rows, gap)
}

fn finish_basis(hat: &MacaulayMatrix, null: CMatrix, rows: Vec<usize>, gap: f64) -> Result<QuotientBasis> {
    let block = rows_of(&null, &rows);
    let condition = condition_number(&block)?;
    Ok(QuotientBasis {
        basis: rows.iter().map(|&k| hat.col_labels[k].clone()).collect(),
        null,
        col_labels: hat.col_labels.clone(),
        basis_rows: rows,
        condition,
        gap,
    })
}

/// Smallest nonzero singular value of `\hat M_rho`, i.e. `sigma_{n - r}` where
/// `n` is the column count and `r` the Bezout count.
pub fn smallest_singular_hat(s: &PolySystem) -> Result<f64> {
    let hat = macaulay_hat_rho(s)?;
    let r = s.bezout_count();
    let rank = hat.col_labels.len().checked_sub(r).filter(|&k| k > 0).ok_or(Error::NullityTooLarge {
        nullity: r,
        cols: hat.col_labels.len(),
    })?;
    let sv = singular_values(&hat.mat)?;
    sv.get(rank - 1).copied().ok_or(Error::NullityMismatch { expected: r })
}

/// Square pencil `A - lambda B` with `A = [A1; A2]`, `B = [0; B2]`.
#[derive(Clone, Debug)]
pub struct MacaulayPencil {
    pub gep: GenEigProblem,
    pub hat: MacaulayMatrix,
    /// Rows of `\hat M_rho` kept in `A1` (all of them when independent).
    pub kept_p_rows: Vec<usize>,
    pub kept_h_monomials: Vec<Monomial>,
    /// `h_alpha = alpha_0 + sum alpha_i x_i`, likewise `beta`.
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub basis: QuotientBasis,
}

impl MacaulayPencil {
    pub fn p_row_count(&self) -> usize {
        self.kept_p_rows.len()
    }

    pub fn dropped_h_monomials(&self) -> Vec<Monomial> {
        let max_deg = self.hat.degree.saturating_sub(1);
        self.hat
            .col_labels
            .iter()
            .filter(|m| m.degree() <= max_deg && !self.kept_h_monomials.contains(m))
            .cloned()
            .collect()
    }

    pub fn h_alpha(&self) -> MultiPoly {
        linear_poly(&self.alpha)
    }

    pub fn h_beta(&self) -> MultiPoly {
        linear_poly(&self.beta)
    }

    /// The eigenvalue associated with a root: `h_alpha(x) / h_beta(x)`.
    pub fn eigenvalue_at(&self, x: &[C64]) -> Result<C64> {
        Ok(self.h_alpha().eval(x)? / self.h_beta().eval(x)?)
    }
}

/// `c_0 + sum_i c_i x_i`.
pub fn linear_poly(c: &[C64]) -> MultiPoly {
    let d = c.len() - 1;
    let mut terms = vec![(vec![0; d], c[0])];
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        terms.push((e, c[i + 1]));
    }
    MultiPoly::from_terms(d, terms).expect("exponent lengths are consistent")
}

/// Number of `(alpha, beta)` draws before giving up on a singular pencil.
const PENCIL_DRAWS: usize = 3;

/// Builds the Macaulay pencil of `s`, keeping `h`-rows exactly for the
/// selected quotient basis. When the `p`-rows of `\hat M_rho` are dependent
/// (`d >= 3`), a maximal independent subset is kept so the pencil is square.
pub fn macaulay_pencil<R: Rng + ?Sized>(s: &PolySystem, rng: &mut R) -> Result<MacaulayPencil> {
    let d = s.d();
    let hat = macaulay_hat_rho(s)?;
    let r = s.bezout_count();
    let basis = choose_basis(&hat, r)?;
    let n = hat.col_labels.len();
    let rank = n - r;
    let kept_p_rows = if hat.mat.nrows() == rank {
        (0..rank).collect()
    } else if hat.mat.nrows() > rank {
        let ht = hat.mat.transpose().to_owned();
        let all: Vec<usize> = (0..hat.mat.nrows()).collect();
        let mut k = pivoted_columns(&ht, &all, rank)?;
        k.sort_unstable();
        k
    } else {
        return Err(Error::NullityMismatch { expected: r });
    };
    let cols = hat.column_index();

    for attempt in 0..PENCIL_DRAWS {
        let alpha: Vec<C64> = (0..=d).map(|_| random_complex_gaussian(rng)).collect();
        let beta: Vec<C64> = (0..=d).map(|_| random_complex_gaussian(rng)).collect();
        let (ha, hb) = (linear_poly(&alpha), linear_poly(&beta));
        let mut a = CMatrix::zeros(n, n);
        let mut b = CMatrix::zeros(n, n);
        for (k, &row) in kept_p_rows.iter().enumerate() {
            for j in 0..n {
                a[(k, j)] = hat.mat[(row, j)];
            }
        }
        for (k, m) in basis.basis.iter().enumerate() {
            let ra = coefficient_row(&ha.shift_by(m), &cols, n)?;
            let rb = coefficient_row(&hb.shift_by(m), &cols, n)?;
            for j in 0..n {
                a[(rank + k, j)] = ra[j];
                b[(rank + k, j)] = rb[j];
            }
        }
        let mut row_labels: Vec<Monomial> = kept_p_rows.iter().map(|&k| hat.row_labels[k].1.clone()).collect();
        row_labels.extend(basis.basis.iter().cloned());
        let gep = GenEigProblem::new(a, b)?.with_labels(row_labels, hat.col_labels.clone())?;
        if pencil_is_singular(&gep)? {
            log::warn!("Macaulay pencil singular on draw {attempt}; redrawing h");
            continue;
        }
        return Ok(MacaulayPencil {
            gep,
            kept_p_rows,
            kept_h_monomials: basis.basis.clone(),
            alpha,
            beta,
            basis,
            hat,
        });
    }
    Err(Error::SingularPencil)
}

fn pivoted_columns(mt: &CMatrix, candidates: &[usize], count: usize) -> Result<Vec<usize>> {
    // rows of `mt^T` are columns of `mt`
    let m = mt.transpose().to_owned();
    pivoted_row_selection(&m, candidates, count)
}

/// Eliminates the `p`-rows: with `Z` an orthonormal basis of `null(A1)`,
/// returns the `r x r` pencil `(A2 Z, B2 Z)`.
pub fn reduce_macaulay_pencil(p: &MacaulayPencil) -> Result<GenEigProblem> {
    let n = p.gep.dim();
    let k = p.p_row_count();
    let r = n - k;
    let a1 = p.gep.a.submatrix(0, 0, k, n).to_owned();
    let z = if k == 0 || a1.norm_max() == 0.0 && r == n {
        CMatrix::identity(n, n)
    } else {
        crate::numkernel::null_space(&a1, r)?
    };
    let a2 = p.gep.a.submatrix(k, 0, r, n).to_owned();
    let b2 = p.gep.b.submatrix(k, 0, r, n).to_owned();
    GenEigProblem::new(&a2 * &z, &b2 * &z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{generalized_eig, norm2, null_space};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn two_quadratics(sigma: f64, q: [[f64; 2]; 2]) -> PolySystem {
        let p1 = MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[1, 0], sigma * q[0][0]), (&[0, 1], sigma * q[0][1])]).unwrap();
        let p2 = MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[1, 0], sigma * q[1][0]), (&[0, 1], sigma * q[1][1])]).unwrap();
        PolySystem::new(vec![p1, p2]).unwrap()
    }

    fn random_quadratics(d: usize, rng: &mut ChaCha8Rng) -> PolySystem {
        let order = MonomialOrder::graded_lex(d);
        let ms = monomials_up_to(2, d, &order);
        let polys = (0..d)
            .map(|_| {
                MultiPoly::from_terms(d, ms.iter().map(|m| (m.exponents().to_vec(), random_complex_gaussian(rng)))).unwrap()
            })
            .collect();
        PolySystem::new(polys).unwrap()
    }

    #[test]
    fn hat_shapes_and_rows() {
        let s = two_quadratics(0.01, [[0.6, 0.8], [-0.8, 0.6]]);
        let hat = macaulay_hat(&s, 3, &MonomialOrder::graded_lex(2)).unwrap();
        assert_eq!((hat.mat.nrows(), hat.mat.ncols()), (6, 10));
        let labels: Vec<String> = (0..6).map(|k| hat.row_label(k)).collect();
        assert_eq!(labels, ["p1", "xp1", "yp1", "p2", "xp2", "yp2"]);
        // the x*p1 row has sigma*q11 under x^2 and 1 under x^3
        assert!((hat.mat[(1, 3)] - c(0.006)).norm() < 1e-15);
        assert_eq!(hat.mat[(1, 6)], c(1.0));

        let hat2 = macaulay_hat(&s, 2, &MonomialOrder::graded_lex(2)).unwrap();
        assert_eq!((hat2.mat.nrows(), hat2.mat.ncols()), (2, 6));

        let s1 = PolySystem::new(vec![MultiPoly::from_real_terms(1, &[(&[2], 1.0), (&[0], -1.0)]).unwrap()]).unwrap();
        let h1 = macaulay_hat(&s1, 2, &MonomialOrder::graded_lex(1)).unwrap();
        assert_eq!(h1.mat.nrows(), 1);
        let row: Vec<C64> = (0..3).map(|j| h1.mat[(0, j)]).collect();
        assert_eq!(row, vec![c(-1.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn pencil_for_two_quadratics() {
        let s = two_quadratics(0.5, [[0.6, 0.8], [-0.8, 0.6]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = macaulay_pencil(&s, &mut rng).unwrap();
        assert_eq!(p.gep.dim(), 10);
        assert_eq!(p.kept_h_monomials.len(), 4);
        assert_eq!(p.dropped_h_monomials().len(), 2);
        let trips = generalized_eig(&p.gep).unwrap();
        assert_eq!(trips.iter().filter(|t| t.is_finite()).count(), 4);

        let reduced = reduce_macaulay_pencil(&p).unwrap();
        assert_eq!(reduced.dim(), 4);
        let mut full: Vec<C64> = trips.iter().filter_map(|t| t.lambda).collect();
        let red: Vec<C64> = generalized_eig(&reduced).unwrap().iter().filter_map(|t| t.lambda).collect();
        assert_eq!(red.len(), 4);
        for l in red {
            let k = (0..full.len()).min_by(|&a, &b| (full[a] - l).norm().partial_cmp(&(full[b] - l).norm()).unwrap()).unwrap();
            assert!((full[k] - l).norm() < 1e-8 * (1.0 + l.norm()));
            full.remove(k);
        }
    }

    #[test]
    fn univariate_pencil() {
        let s = PolySystem::new(vec![MultiPoly::from_real_terms(1, &[(&[2], 1.0), (&[0], -1.0)]).unwrap()]).unwrap();
        let p = macaulay_pencil(&s, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let basis: Vec<String> = p.basis.basis.iter().map(|m| m.label()).collect();
        assert_eq!(basis, ["1", "x"]);
        let finite = generalized_eig(&p.gep).unwrap().iter().filter(|t| t.is_finite()).count();
        assert_eq!(finite, 2);
    }

    #[test]
    fn admissible_bases_of_the_bivariate_and_trivariate_examples() {
        let sigma = 1e-2;
        let a = [[0.6, 0.8], [-0.8, 0.6]];
        let p1 = MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[1, 0], sigma * a[0][0]), (&[0, 1], sigma * a[0][1])]).unwrap();
        let p2 = MultiPoly::from_real_terms(
            2,
            &[(&[1, 1], 1.0), (&[0, 2], sigma), (&[1, 0], sigma * a[1][0]), (&[0, 1], sigma * a[1][1])],
        )
        .unwrap();
        let s = PolySystem::new(vec![p1, p2]).unwrap();
        let hat = macaulay_hat_rho(&s).unwrap();
        let basis: Vec<Monomial> = [[0, 0], [1, 0], [0, 1], [0, 2]].iter().map(|e| Monomial::new(e.to_vec())).collect();
        let qb = basis_from_monomials(&hat, 4, &basis).unwrap();
        assert!(qb.condition < 1e12);

        let s3 = PolySystem::new(vec![
            MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[2, 0, 0], sigma), (&[0, 1, 0], sigma)]).unwrap(),
            MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[0, 2, 0], sigma), (&[0, 0, 1], sigma)]).unwrap(),
            MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[0, 0, 2], sigma), (&[1, 0, 0], sigma)]).unwrap(),
        ])
        .unwrap();
        let hat3 = macaulay_hat_rho(&s3).unwrap();
        let b3: Vec<Monomial> = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1], [1, 0, 1], [0, 2, 1], [1, 1, 1]]
            .iter()
            .map(|e| Monomial::new(e.to_vec()))
            .collect();
        let qb3 = basis_from_monomials(&hat3, 8, &b3).unwrap();
        assert!(qb3.condition < 1e12);
    }

    #[test]
    fn identity_like_system_has_unit_sigma_min() {
        let s = PolySystem::new(vec![MultiPoly::var(2, 0), MultiPoly::var(2, 1)]).unwrap();
        assert!((smallest_singular_hat(&s).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_min_matches_gram_oracle() {
        let s = two_quadratics(1e-2, [[0.6, 0.8], [-0.8, 0.6]]);
        let hat = macaulay_hat_rho(&s).unwrap();
        let gram = &hat.mat * hat.mat.adjoint();
        let ev = gram.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let oracle = ev.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
        let got = smallest_singular_hat(&s).unwrap();
        assert!((got - oracle).abs() <= 1e-10 * oracle);
        // null space residual bound for the same matrix
        let n = null_space(&hat.mat, 4).unwrap();
        assert!(norm2(&(&hat.mat * &n)).unwrap() <= 1e-10 * norm2(&hat.mat).unwrap());
    }

    #[test]
    fn csv_dump_has_monomial_header() {
        let s = two_quadratics(0.1, [[1.0, 0.0], [0.0, 1.0]]);
        let hat = macaulay_hat_rho(&s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        hat.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("row,1,x,y,x^2,xy,y^2,x^3,x^2y,xy^2,y^3"));
        assert_eq!(text.lines().count(), 7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rows_reproduce_multiples(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_quadratics(2, &mut rng);
            let hat = macaulay_hat_rho(&s).unwrap();
            let x: Vec<C64> = (0..2).map(|_| random_complex_gaussian(&mut rng) * 0.5).collect();
            let labels = hat.label_values(&x);
            for (k, (i, m)) in hat.row_labels.iter().enumerate() {
                let from_row: C64 = (0..labels.len()).map(|j| hat.mat[(k, j)] * labels[j]).sum();
                let direct = s.polys()[*i].shift_by(m).eval(&x).unwrap();
                prop_assert!((from_row - direct).norm() <= 1e-12 * (1.0 + direct.norm()) * 10.0);
            }
        }

        #[test]
        fn kept_h_rows_match_basis_and_count(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_quadratics(2, &mut rng);
            let p = macaulay_pencil(&s, &mut rng).unwrap();
            prop_assert_eq!(&p.kept_h_monomials, &p.basis.basis);
            let finite = generalized_eig(&p.gep).unwrap().iter().filter(|t| t.is_finite()).count();
            prop_assert_eq!(finite, s.bezout_count());
        }

        #[test]
        fn low_degree_ideal_elements_come_from_lower_macaulay_rows(seed in 0u64..1000) {
            // Lemma: combinations of \hat M_rho rows with vanishing top-degree
            // part lie in the row space of \hat M_{rho-1}.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_quadratics(2, &mut rng);
            let order = MonomialOrder::graded_lex(2);
            let hi = macaulay_hat(&s, 3, &order).unwrap();
            let lo = macaulay_hat(&s, 2, &order).unwrap();
            let top: Vec<usize> = (0..hi.col_labels.len()).filter(|&j| hi.col_labels[j].degree() == 3).collect();
            // combinations y with y^T M_top = 0: left null space of the top block
            let mtop = CMatrix::from_fn(hi.mat.nrows(), top.len(), |i, j| hi.mat[(i, top[j])]);
            let left = null_space(&mtop.transpose().to_owned(), hi.mat.nrows() - top.len()).unwrap();
            let scale = norm2(&hi.mat).unwrap();
            for k in 0..left.ncols() {
                let y: Vec<C64> = left.col(k).iter().copied().collect();
                let comb: Vec<C64> = (0..6).map(|j| (0..y.len()).map(|i| y[i] * hi.mat[(i, j)]).sum()).collect();
                // project onto row space of lo (2 x 6)
                let lt = lo.mat.transpose().to_owned();
                let q = lt.qr().compute_thin_Q();
                let v = CMatrix::from_fn(6, 1, |j, _| comb[j]);
                let resid = &v - &q * (q.adjoint() * &v);
                prop_assert!(resid.norm_l2() <= 1e-8 * scale);
            }
        }
    }
}

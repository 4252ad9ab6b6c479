//! Null-space normal forms and Möller–Stetter matrices.

use rand::Rng;

use super::{newton_polish, rayleigh, Diagnostics, Method, RootReport};
use crate::error::{Error, Result};
use crate::macaulay::{choose_basis, macaulay_hat_rho, rows_of, MacaulayMatrix, QuotientBasis};
use crate::numkernel::{generalized_eig, random_unit_vector, singular_values, solve_square, vec_norm, CMatrix, GenEigProblem};
use crate::poly::{PolySystem, C64};

/// Basis submatrices with a condition number above this are rejected.
pub const BASIS_CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct MsMatrices {
    /// `mats[i]` represents multiplication by `x_i` on the quotient basis.
    pub mats: Vec<CMatrix>,
    pub basis: QuotientBasis,
    pub hat: MacaulayMatrix,
    /// Smallest nonzero singular value of `\hat M_rho`.
    pub sigma_min_hat: f64,
}

impl MsMatrices {
    /// `sum_i u_i M_{x_i}`.
    pub fn combination(&self, u: &[f64]) -> CMatrix {
        let r = self.basis.dim();
        let mut m = CMatrix::zeros(r, r);
        for (ui, mi) in u.iter().zip(&self.mats) {
            m += faer::Scale(C64::new(*ui, 0.0)) * mi;
        }
        m
    }
}

/// Checks that `\hat M_rho` has numerical nullity exactly `r` and returns
/// its smallest nonzero singular value.
pub(crate) fn check_nullity(hat: &MacaulayMatrix, r: usize) -> Result<f64> {
    let cols = hat.col_labels.len();
    let rank = cols.checked_sub(r).filter(|&k| k > 0 && k <= hat.mat.nrows()).ok_or(Error::NullityMismatch { expected: r })?;
    let sv = singular_values(&hat.mat)?;
    let smallest = sv[rank - 1];
    if smallest <= cols as f64 * f64::EPSILON * sv[0] {
        return Err(Error::NullityMismatch { expected: r });
    }
    Ok(smallest)
}

pub fn build_ms_matrices(s: &PolySystem) -> Result<MsMatrices> {
    let hat = macaulay_hat_rho(s)?;
    let r = s.bezout_count();
    let sigma_min_hat = check_nullity(&hat, r)?;
    let basis = choose_basis(&hat, r)?;
    ms_matrices_for_basis(s, hat, basis, sigma_min_hat)
}

/// Like [`build_ms_matrices`] with a caller-chosen quotient basis.
pub fn build_ms_matrices_with_basis(s: &PolySystem, basis: QuotientBasis) -> Result<MsMatrices> {
    let hat = macaulay_hat_rho(s)?;
    let sigma_min_hat = check_nullity(&hat, basis.dim())?;
    ms_matrices_for_basis(s, hat, basis, sigma_min_hat)
}

fn ms_matrices_for_basis(s: &PolySystem, hat: MacaulayMatrix, basis: QuotientBasis, sigma_min_hat: f64) -> Result<MsMatrices> {
    if basis.condition > BASIS_CONDITION_LIMIT {
        return Err(Error::BasisSingular(basis.condition));
    }
    let nb_t = basis.basis_block().transpose().to_owned();
    let mut mats = Vec::with_capacity(s.d());
    for i in 0..s.d() {
        let rows = basis
            .basis
            .iter()
            .map(|b| basis.row_of(&b.times_var(i)).ok_or(Error::InvalidParameter(format!("x{} * {b} exceeds degree", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let shifted = rows_of(&basis.null, &rows).transpose().to_owned();
        mats.push(solve_square(&nb_t, &shifted));
    }
    Ok(MsMatrices { mats, basis, hat, sigma_min_hat })
}

/// Roots from the eigenvectors of one random combination of the MS
/// matrices; coordinates are Rayleigh quotients of each `M_{x_i}`.
pub fn solve_normal_form<R: Rng + ?Sized>(s: &PolySystem, polish: bool, rng: &mut R) -> Result<RootReport> {
    let ms = build_ms_matrices(s)?;
    let u = random_unit_vector(s.d(), rng);
    let trips = generalized_eig(&GenEigProblem::standard(ms.combination(&u))?)?;
    let mut roots = Vec::with_capacity(trips.len());
    let mut kappas = Vec::with_capacity(trips.len());
    for t in &trips {
        let x: Vec<C64> = ms.mats.iter().map(|m| rayleigh(m, &t.right)).collect();
        let yx: C64 = t.left.iter().zip(&t.right).map(|(a, b)| a * b).sum();
        let base = vec_norm(&t.left) * vec_norm(&t.right) / yx.norm();
        kappas.push(x.iter().map(|xi| base * (1.0 + xi.norm())).fold(0.0, f64::max));
        roots.push(if polish { newton_polish(s, &x, 2) } else { x });
    }
    let diagnostics = Diagnostics {
        basis: Some(ms.basis.basis.iter().map(|m| m.label()).collect()),
        basis_condition: Some(ms.basis.condition),
        sigma_min_hat: Some(ms.sigma_min_hat),
        ..Default::default()
    };
    RootReport::new(s, roots, kappas, Method::NormalForm, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random_complex_gaussian;
    use crate::poly::{monomials_up_to, MonomialOrder, MultiPoly};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted_eigs(m: &CMatrix) -> Vec<C64> {
        let mut e: Vec<C64> = generalized_eig(&GenEigProblem::standard(m.clone()).unwrap())
            .unwrap()
            .iter()
            .map(|t| t.lambda.unwrap())
            .collect();
        e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        e
    }

    pub(crate) fn random_quadratics(d: usize, rng: &mut ChaCha8Rng) -> PolySystem {
        let ms = monomials_up_to(2, d, &MonomialOrder::graded_lex(d));
        let polys = (0..d)
            .map(|_| MultiPoly::from_terms(d, ms.iter().map(|m| (m.exponents().to_vec(), random_complex_gaussian(rng)))).unwrap())
            .collect();
        PolySystem::new(polys).unwrap()
    }

    #[test]
    fn univariate_ms_matrix() {
        let s = PolySystem::new(vec![MultiPoly::from_real_terms(1, &[(&[2], 1.0), (&[0], -1.0)]).unwrap()]).unwrap();
        let ms = build_ms_matrices(&s).unwrap();
        let e = sorted_eigs(&ms.mats[0]);
        assert!((e[0] + 1.0).norm() < 1e-13 && (e[1] - 1.0).norm() < 1e-13);
    }

    #[test]
    fn cyclic_pair_spectrum() {
        // x^2 - s y, y^2 - s x: roots 0 and x = s w^k for w^3 = 1
        let sigma = 0.5;
        let s = PolySystem::new(vec![
            MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 1], -sigma)]).unwrap(),
            MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[1, 0], -sigma)]).unwrap(),
        ])
        .unwrap();
        let ms = build_ms_matrices(&s).unwrap();
        let mut want: Vec<C64> = (0..3).map(|k| C64::from_polar(sigma, 2.0 * std::f64::consts::PI * k as f64 / 3.0)).collect();
        want.push(C64::new(0.0, 0.0));
        let got = sorted_eigs(&ms.mats[0]);
        for w in &want {
            assert!(got.iter().any(|g| (g - w).norm() < 1e-10), "{w} missing from {got:?}");
        }
    }

    #[test]
    fn separable_system_roots() {
        let s = PolySystem::new(vec![
            MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 0], -1.0)]).unwrap(),
            MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[0, 0], -1.0)]).unwrap(),
        ])
        .unwrap();
        let r = solve_normal_form(&s, true, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.max_residual() <= 1e-12);
        for x in &r.roots {
            assert!((x[0].norm() - 1.0).abs() < 1e-12 && (x[1].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_at_infinity_are_reported() {
        // xy - 1, xy - 2 share no affine root
        let s = PolySystem::new(vec![
            MultiPoly::from_real_terms(2, &[(&[1, 1], 1.0), (&[0, 0], -1.0)]).unwrap(),
            MultiPoly::from_real_terms(2, &[(&[1, 1], 1.0), (&[0, 0], -2.0)]).unwrap(),
        ])
        .unwrap();
        assert!(build_ms_matrices(&s).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn ms_matrices_commute(seed in 0u64..10_000, d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_quadratics(d, &mut rng);
            let ms = build_ms_matrices(&s).unwrap();
            for i in 0..d {
                for j in 0..i {
                    let (a, b) = (&ms.mats[i], &ms.mats[j]);
                    let comm = a * b - b * a;
                    prop_assert!(comm.norm_l2() <= 1e-8 * a.norm_l2() * b.norm_l2());
                }
            }
        }

        #[test]
        fn random_systems_have_small_residuals(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_quadratics(2, &mut rng);
            let r = solve_normal_form(&s, false, &mut rng).unwrap();
            prop_assert_eq!(r.len(), 4);
            prop_assert!(r.max_residual() <= 1e-6 * s.coefficient_scale());
        }
    }
}

//! Generators for the devastating and not-devastating example families.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{permutation_matrix, random_complex_gaussian, random_orthogonal, random_permutation, CMatrix};
use crate::poly::{monomials_up_to, Monomial, MonomialOrder, MultiPoly, PolySystem, C64};
use crate::solvers::{MultiParamEig, RootReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `x_i^2 + sigma sum_j q_ij x_j` with `Q` orthogonal.
    Orthogonal,
    /// `x_i^2 - sigma x_{i+1}`, cyclically.
    CyclicSquares,
    /// `sum_j a_ij (x_j^2 - 1/(c^2 d))`.
    Hypercube,
    /// `x_i^2 + sigma x_{pi(i)}`.
    Permutation,
    /// Bivariate system with a small Jacobian determinant that is not devastating.
    NotDev2d,
    /// Trivariate analogue of [`Family::NotDev2d`].
    NotDev3d,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Orthogonal,
        Family::CyclicSquares,
        Family::Hypercube,
        Family::Permutation,
        Family::NotDev2d,
        Family::NotDev3d,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Orthogonal => "orthogonal",
            Family::CyclicSquares => "cyclic-squares",
            Family::Hypercube => "hypercube",
            Family::Permutation => "permutation",
            Family::NotDev2d => "notdev2d",
            Family::NotDev3d => "notdev3d",
        }
    }

    /// `c` for the hypercube, `sigma` otherwise.
    pub fn param_name(self) -> &'static str {
        if self == Family::Hypercube { "c" } else { "sigma" }
    }

    /// Required dimension, if the family is not defined for every `d`.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Family::NotDev2d => Some(2),
            Family::NotDev3d => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family `{s}`")))
    }
}

/// How the family's coupling matrix (`Q`, `A` or the permutation) is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixChoice {
    #[default]
    Random,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub d: usize,
    /// `sigma`, or `c` for the hypercube.
    pub param: f64,
    pub matrix: MatrixChoice,
    /// Seed used by [`generate_seeded`].
    pub seed: u64,
    pub shift: Option<Vec<f64>>,
}

impl FamilySpec {
    pub fn new(family: Family, d: usize, param: f64) -> Self {
        FamilySpec { family, d, param, matrix: MatrixChoice::Random, seed: 1, shift: None }
    }

    pub fn orthogonal(d: usize, sigma: f64) -> Self {
        Self::new(Family::Orthogonal, d, sigma)
    }

    pub fn cyclic_squares(d: usize, sigma: f64) -> Self {
        Self::new(Family::CyclicSquares, d, sigma)
    }

    pub fn hypercube(d: usize, c: f64) -> Self {
        Self::new(Family::Hypercube, d, c)
    }

    pub fn permutation(d: usize, sigma: f64) -> Self {
        Self::new(Family::Permutation, d, sigma)
    }

    pub fn notdev2d(sigma: f64) -> Self {
        Self::new(Family::NotDev2d, 2, sigma)
    }

    pub fn notdev3d(sigma: f64) -> Self {
        Self::new(Family::NotDev3d, 3, sigma)
    }

    pub fn with_matrix(mut self, m: MatrixChoice) -> Self {
        self.matrix = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = Some(shift);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        if !(self.param > 0.0) || !self.param.is_finite() {
            return Err(Error::InvalidParameter(format!("{} must be positive", self.family.param_name())));
        }
        if let Some(n) = self.family.fixed_dim() {
            if self.d != n {
                return Err(Error::DimensionMismatch { expected: n, got: self.d });
            }
        }
        if let Some(s) = &self.shift {
            if s.len() != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: s.len() });
            }
        }
        Ok(())
    }

    fn shift_point(&self) -> Vec<C64> {
        match &self.shift {
            Some(s) => s.iter().map(|v| C64::new(*v, 0.0)).collect(),
            None => vec![C64::new(0.0, 0.0); self.d],
        }
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn coupling<R: Rng + ?Sized>(choice: MatrixChoice, d: usize, rng: &mut R) -> CMatrix {
    match choice {
        MatrixChoice::Random => random_orthogonal(d, rng),
        MatrixChoice::Identity => CMatrix::identity(d, d),
    }
}

fn square_plus_linear(d: usize, i: usize, lead: f64, linear: impl Fn(usize) -> C64) -> Result<MultiPoly> {
    let mut terms = vec![(Monomial::var(d, i).times_var(i).exponents().to_vec(), re(lead))];
    terms.extend((0..d).map(|j| (Monomial::var(d, j).exponents().to_vec(), linear(j))));
    MultiPoly::from_terms(d, terms)
}

/// Builds the family member with its closed-form roots, translated by the
/// optional shift.
pub fn generate<R: Rng + ?Sized>(spec: &FamilySpec, rng: &mut R) -> Result<PolySystem> {
    spec.validate()?;
    let (d, p) = (spec.d, spec.param);
    let origin = vec![re(0.0); d];
    let (polys, roots): (Vec<MultiPoly>, Vec<Vec<C64>>) = match spec.family {
        Family::Orthogonal => {
            let q = coupling(spec.matrix, d, rng);
            let polys = (0..d).map(|i| square_plus_linear(d, i, 1.0, |j| q[(i, j)] * p)).collect::<Result<_>>()?;
            (polys, vec![origin])
        }
        Family::CyclicSquares => {
            let polys = (0..d)
                .map(|i| square_plus_linear(d, i, 1.0, |j| if j == (i + 1) % d { re(-p) } else { re(0.0) }))
                .collect::<Result<_>>()?;
            (polys, cyclic_squares_roots(d, p))
        }
        Family::Hypercube => {
            let a = coupling(spec.matrix, d, rng);
            let off = 1.0 / (p * p * d as f64);
            let polys = (0..d)
                .map(|i| {
                    let mut terms: Vec<(Vec<u32>, C64)> =
                        (0..d).map(|j| (Monomial::var(d, j).times_var(j).exponents().to_vec(), a[(i, j)])).collect();
                    let constant: C64 = (0..d).map(|j| a[(i, j)]).sum::<C64>() * (-off);
                    terms.push((vec![0; d], constant));
                    MultiPoly::from_terms(d, terms)
                })
                .collect::<Result<_>>()?;
            (polys, hypercube_roots(d, p))
        }
        Family::Permutation => {
            let perm = match spec.matrix {
                MatrixChoice::Random => random_permutation(d, rng),
                MatrixChoice::Identity => (0..d).collect(),
            };
            let polys = (0..d)
                .map(|i| square_plus_linear(d, i, 1.0, |j| if j == perm[i] { re(p) } else { re(0.0) }))
                .collect::<Result<_>>()?;
            (polys, vec![origin])
        }
        Family::NotDev2d => {
            let a = coupling(spec.matrix, 2, rng);
            let p1 = MultiPoly::from_terms(2, vec![(vec![2, 0], re(1.0)), (vec![1, 0], a[(0, 0)] * p), (vec![0, 1], a[(0, 1)] * p)])?;
            let p2 = MultiPoly::from_terms(
                2,
                vec![(vec![1, 1], re(1.0)), (vec![0, 2], re(p)), (vec![1, 0], a[(1, 0)] * p), (vec![0, 1], a[(1, 1)] * p)],
            )?;
            (vec![p1, p2], vec![origin])
        }
        Family::NotDev3d => {
            let polys = vec![
                MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[2, 0, 0], p), (&[0, 1, 0], p)])?,
                MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[0, 2, 0], p), (&[0, 0, 1], p)])?,
                MultiPoly::from_real_terms(3, &[(&[1, 1, 0], 1.0), (&[0, 0, 2], p), (&[1, 0, 0], p)])?,
            ];
            (polys, vec![origin])
        }
    };
    let base = PolySystem::new(polys)?.with_true_roots(roots)?.with_family_tag(spec.family.tag());
    match &spec.shift {
        Some(_) => base.translate(&spec.shift_point()),
        None => Ok(base),
    }
}

/// [`generate`] with a ChaCha generator seeded from `spec.seed`.
pub fn generate_seeded(spec: &FamilySpec) -> Result<PolySystem> {
    generate(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

/// Origin plus `x_1 = sigma w^k` (`w` a primitive `(2^d - 1)`-th root of
/// unity), with `x_{i+1} = x_i^2 / sigma`.
pub fn cyclic_squares_roots(d: usize, sigma: f64) -> Vec<Vec<C64>> {
    let n = (1usize << d) - 1;
    let mut roots = vec![vec![re(0.0); d]];
    for k in 0..n {
        // x_i = sigma w^{2^{i-1} k}; reduce the exponent mod n to keep the angle exact
        let root = (0..d)
            .map(|i| {
                let e = ((k as u128 * (1u128 << i)) % n as u128) as f64;
                C64::from_polar(sigma, 2.0 * std::f64::consts::PI * e / n as f64)
            })
            .collect();
        roots.push(root);
    }
    roots
}

/// All sign patterns `(+-1/(c sqrt d), ...)`, all-plus first.
pub fn hypercube_roots(d: usize, c: f64) -> Vec<Vec<C64>> {
    let v = 1.0 / (c * (d as f64).sqrt());
    (0..1usize << d)
        .map(|mask| (0..d).map(|i| re(if mask >> i & 1 == 1 { -v } else { v })).collect())
        .collect()
}

/// The root whose accuracy the experiments measure.
pub fn designated_root(spec: &FamilySpec) -> Vec<C64> {
    let shift = spec.shift_point();
    match spec.family {
        Family::Hypercube => {
            let v = 1.0 / (spec.param * (spec.d as f64).sqrt());
            shift.iter().map(|s| s + v).collect()
        }
        _ => shift,
    }
}

/// The family member together with a 2x2-block determinantal representation
/// (families whose equations are a single square plus lower-order terms).
pub fn generate_mep<R: Rng + ?Sized>(spec: &FamilySpec, rng: &mut R) -> Result<(PolySystem, MultiParamEig)> {
    let s = generate(spec, rng)?;
    let mep = MultiParamEig::from_quadratic_system(&s)?;
    Ok((s, mep))
}

/// Permutation matrix of the permutation family member (for inspection).
pub fn permutation_of(s: &PolySystem) -> Option<CMatrix> {
    let d = s.d();
    let perm: Option<Vec<usize>> = s
        .polys()
        .iter()
        .map(|p| (0..d).find(|&j| p.coeff(&Monomial::var(d, j)).norm() > 0.0))
        .collect();
    perm.map(|p| permutation_matrix(&p))
}

/// Dense system of `d` quadratics with independent standard complex
/// Gaussian coefficients (generically `2^d` simple affine roots).
pub fn random_quadratic_system<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PolySystem> {
    let ms = monomials_up_to(2, d, &MonomialOrder::graded_lex(d));
    let polys = (0..d)
        .map(|_| MultiPoly::from_terms(d, ms.iter().map(|m| (m.exponents().to_vec(), random_complex_gaussian(rng)))))
        .collect::<Result<_>>()?;
    PolySystem::new(polys)
}

/// Distance from `truth` to the nearest reported root (infinite if none).
pub fn true_root_error(report: &RootReport, truth: &[C64]) -> f64 {
    report
        .roots
        .iter()
        .map(|x| x.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::kappa_root;
    use crate::solvers::{Diagnostics, Method};
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn cyclic_squares_pair() {
        let s = generate(&FamilySpec::cyclic_squares(2, 0.1), &mut rng(1)).unwrap();
        assert_eq!(s.polys()[0], MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 1], -0.1)]).unwrap());
        assert_eq!(s.polys()[1], MultiPoly::from_real_terms(2, &[(&[0, 2], 1.0), (&[1, 0], -0.1)]).unwrap());
        assert_eq!(s.true_roots().unwrap().len(), 4);
        for d in 1..=6 {
            let s = generate(&FamilySpec::cyclic_squares(d, 0.3), &mut rng(1)).unwrap();
            assert_eq!(s.true_roots().unwrap().len(), 1 << d);
        }
    }

    #[test]
    fn hypercube_identity() {
        let spec = FamilySpec::hypercube(2, 4.0).with_matrix(MatrixChoice::Identity);
        let s = generate(&spec, &mut rng(1)).unwrap();
        let want = MultiPoly::from_real_terms(2, &[(&[2, 0], 1.0), (&[0, 0], -1.0 / 32.0)]).unwrap();
        assert_eq!(s.polys()[0], want);
        assert_eq!(s.true_roots().unwrap().len(), 4);
        let x = designated_root(&spec);
        assert!((x[0].re - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-16);
        assert!((kappa_root(&s, &x).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        // random orthogonal A has the same root condition number
        let s2 = generate(&FamilySpec::hypercube(2, 4.0), &mut rng(5)).unwrap();
        assert!((kappa_root(&s2, &x).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn shifted_orthogonal_member() {
        let spec = FamilySpec::orthogonal(2, 1e-3).with_shift(vec![1.0 / 3.0, 1.0 / 3.0]);
        let s = generate(&spec, &mut rng(1)).unwrap();
        let x = designated_root(&spec);
        assert_eq!(s.true_roots().unwrap()[0], x);
        assert!(s.residual_norm(&x).unwrap() < 1e-15);
        assert!((kappa_root(&s, &x).unwrap() - 1e3).abs() < 1e-7);
    }

    #[test]
    fn fixed_dimension_families() {
        assert!(generate(&FamilySpec::new(Family::NotDev2d, 3, 0.1), &mut rng(1)).is_err());
        let s = generate(&FamilySpec::notdev3d(0.1), &mut rng(1)).unwrap();
        assert_eq!(s.d(), 3);
        let s2 = generate(&FamilySpec::notdev2d(0.1).with_matrix(MatrixChoice::Identity), &mut rng(1)).unwrap();
        assert_eq!(s2.polys()[1].num_terms(), 3);
        assert!(generate(&FamilySpec::orthogonal(2, -1.0), &mut rng(1)).is_err());
    }

    #[test]
    fn mep_for_square_families() {
        for fam in [Family::Orthogonal, Family::Permutation, Family::CyclicSquares] {
            let spec = FamilySpec::new(fam, 3, 0.2).with_shift(vec![0.1, -0.2, 0.3]);
            let (s, mep) = generate_mep(&spec, &mut rng(2)).unwrap();
            let mut r = rng(3);
            let pts: Vec<Vec<C64>> = (0..20).map(|_| (0..3).map(|_| random_complex_gaussian(&mut r)).collect()).collect();
            assert!(mep.max_det_mismatch(&s, &pts).unwrap() < 1e-10);
        }
        assert!(generate_mep(&FamilySpec::notdev2d(0.1), &mut rng(1)).is_err());
        let (s, _) = generate_mep(&FamilySpec::permutation(4, 0.1), &mut rng(9)).unwrap();
        let p = permutation_of(&s).unwrap();
        assert!(((&p * p.transpose()) - CMatrix::identity(4, 4)).norm_max() == 0.0);
    }

    #[test]
    fn root_error_plumbing() {
        let s = PolySystem::new(vec![MultiPoly::var(2, 0), MultiPoly::var(2, 1)]).unwrap();
        let truth = vec![re(0.0), re(0.0)];
        let mk = |roots: Vec<Vec<C64>>| {
            let n = roots.len();
            RootReport::new(&s, roots, vec![1.0; n], Method::NormalForm, Diagnostics::default()).unwrap()
        };
        assert_eq!(true_root_error(&mk(vec![truth.clone()]), &truth), 0.0);
        assert!((true_root_error(&mk(vec![vec![re(1e-8), re(0.0)], vec![re(1.0), re(1.0)]]), &truth) - 1e-8).abs() < 1e-24);
        assert_eq!(true_root_error(&mk(vec![]), &truth), f64::INFINITY);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn true_roots_have_tiny_residuals(fi in 0usize..6, d in 1usize..5, lp in -4.0f64..0.5, seed in 0u64..1000) {
            let fam = Family::ALL[fi];
            let d = fam.fixed_dim().unwrap_or(d);
            let param = if fam == Family::Hypercube { 10f64.powf(-lp) * 4.0 } else { 10f64.powf(lp) };
            let s = generate(&FamilySpec::new(fam, d, param), &mut rng(seed)).unwrap();
            let scale = s.coefficient_scale();
            for x in s.true_roots().unwrap() {
                prop_assert!(s.residual_norm(x).unwrap() <= 1e-12 * scale.max(1.0));
            }
        }

        #[test]
        fn shift_equivariance(fi in 0usize..6, seed in 0u64..1000, sh in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let fam = Family::ALL[fi];
            let d = fam.fixed_dim().unwrap_or(3);
            let base = FamilySpec::new(fam, d, 0.3);
            let plain = generate(&base, &mut rng(seed)).unwrap();
            let shifted = generate(&base.clone().with_shift(sh[..d].to_vec()), &mut rng(seed)).unwrap();
            let mut r = rng(seed + 1);
            for _ in 0..20 {
                let x: Vec<C64> = (0..d).map(|_| random_complex_gaussian(&mut r)).collect();
                let back: Vec<C64> = x.iter().zip(&sh).map(|(a, s)| a - s).collect();
                let (u, v) = (shifted.eval(&x).unwrap(), plain.eval(&back).unwrap());
                for (a, b) in u.iter().zip(&v) {
                    prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()) * 10.0);
                }
            }
        }

        #[test]
        fn orthogonal_root_conditioning(d in 1usize..6, lp in -6.0f64..0.0, seed in 0u64..1000) {
            let sigma = 10f64.powf(lp);
            let s = generate(&FamilySpec::orthogonal(d, sigma), &mut rng(seed)).unwrap();
            let k = kappa_root(&s, &vec![re(0.0); d]).unwrap();
            prop_assert!((k * sigma - 1.0).abs() <= 1e-10);
        }
    }
}

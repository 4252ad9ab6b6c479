//! Sparse multivariate and dense univariate polynomials with complex
//! coefficients, plus the polynomial-system container every solver consumes.
//!
//! Monomials are ordered by total degree first; within a degree, monomials
//! with a larger power of the leading variable come first. With two
//! variables this lists columns as `1, x, y, x^2, xy, y^2, x^3, ...`, which
//! is also the column order of every Macaulay matrix built by this crate.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::CMatrix;

pub type C64 = Complex64;

/// Coefficients smaller than this are dropped when a polynomial is normalized.
pub const DROP_TOLERANCE: f64 = 1e-300;

/// Exponent vector of a monomial `x_1^{e_1} ... x_d^{e_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The monomial `x_i` (zero-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `self * x_i`.
    pub fn times_var(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e[i] += 1;
        Monomial(e)
    }

    /// Evaluates the monomial at `x` by repeated multiplication.
    pub fn eval(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (&e, &xi) in self.0.iter().zip(x) {
            for _ in 0..e {
                acc *= xi;
            }
        }
        acc
    }

    /// Human-readable form using `x, y, z` for up to three variables and
    /// `x1, x2, ...` beyond that.
    pub fn label(&self) -> String {
        if self.degree() == 0 {
            return "1".to_string();
        }
        let names: Vec<String> = if self.nvars() <= 3 {
            ["x", "y", "z"][..self.nvars()].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=self.nvars()).map(|i| format!("x{i}")).collect()
        };
        let mut out = String::new();
        for (name, &e) in names.iter().zip(&self.0) {
            match e {
                0 => {}
                1 => out.push_str(name),
                _ => out.push_str(&format!("{name}^{e}")),
            }
        }
        out
    }
}

impl Mul for &Monomial {
    type Output = Monomial;

    fn mul(self, rhs: &Monomial) -> Monomial {
        assert_eq!(self.nvars(), rhs.nvars(), "monomial arity mismatch");
        Monomial(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Graded order with a configurable variable priority.
///
/// Ties in degree are broken by comparing exponents of the variables in
/// `priority` order; the monomial with the larger exponent sorts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    priority: Vec<usize>,
}

impl MonomialOrder {
    pub fn graded_lex(nvars: usize) -> Self {
        MonomialOrder { priority: (0..nvars).collect() }
    }

    /// Uses `priority[0]` as the leading variable, then `priority[1]`, ...
    pub fn with_priority(priority: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; priority.len()];
        for &p in &priority {
            if p >= priority.len() || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "{priority:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(MonomialOrder { priority })
    }

    pub fn nvars(&self) -> usize {
        self.priority.len()
    }

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        a.degree().cmp(&b.degree()).then_with(|| {
            for &v in &self.priority {
                match b.0[v].cmp(&a.0[v]) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

/// All monomials in `nvars` variables of total degree at most `degree`,
/// sorted by `order`.
pub fn monomials_up_to(degree: u32, nvars: usize, order: &MonomialOrder) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(var: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if var == current.len() {
            out.push(Monomial(current.clone()));
            return;
        }
        for e in 0..=remaining {
            current[var] = e;
            rec(var + 1, remaining - e, current, out);
        }
        current[var] = 0;
    }
    rec(0, degree, &mut current, &mut out);
    out.sort_by(|a, b| order.compare(a, b));
    out
}

/// Compensated (Neumaier) summation of complex terms, in the given order.
pub(crate) fn compensated_sum<I: IntoIterator<Item = C64>>(terms: I) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut comp = C64::new(0.0, 0.0);
    for t in terms {
        let (s_re, c_re) = neumaier_step(sum.re, comp.re, t.re);
        let (s_im, c_im) = neumaier_step(sum.im, comp.im, t.im);
        sum = C64::new(s_re, s_im);
        comp = C64::new(c_re, c_im);
    }
    sum + comp
}

fn neumaier_step(sum: f64, comp: f64, t: f64) -> (f64, f64) {
    let s = sum + t;
    let c = if sum.abs() >= t.abs() {
        comp + ((sum - s) + t)
    } else {
        comp + ((t - s) + sum)
    };
    (s, c)
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The coordinate polynomial `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), C64::new(1.0, 0.0));
        p
    }

    pub fn monomial(m: Monomial, c: C64) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: exps.len() });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    /// Real-coefficient shorthand for [`MultiPoly::from_terms`].
    pub fn from_real_terms(nvars: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Self::from_terms(
            nvars,
            terms.iter().map(|(e, c)| (e.to_vec(), C64::new(*c, 0.0))),
        )
    }

    fn add_term(&mut self, m: Monomial, c: C64) {
        debug_assert_eq!(m.nvars(), self.nvars);
        let entry = self.terms.entry(m).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() < DROP_TOLERANCE {
            // re-borrow to remove
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.norm() < DROP_TOLERANCE)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: &[C64]) -> Result<C64> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        Ok(compensated_sum(self.terms.iter().map(|(m, c)| c * m.eval(x))))
    }

    /// Exact partial derivative with respect to `x_i` (zero-based).
    pub fn differentiate(&self, i: usize) -> Result<MultiPoly> {
        if i >= self.nvars {
            return Err(Error::VariableOutOfRange { index: i, nvars: self.nvars });
        }
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.0.clone();
            dm[i] -= 1;
            out.add_term(Monomial(dm), c * e as f64);
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.nvars, C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies by a monomial.
    pub fn shift_by(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k * m, *c)).collect(),
        }
    }

    /// Returns `q(x) = p(x - s)`, expanded exactly by the binomial theorem.
    pub fn translate(&self, shift: &[C64]) -> Result<MultiPoly> {
        if shift.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: shift.len() });
        }
        let linear: Vec<MultiPoly> = (0..self.nvars)
            .map(|j| {
                let mut p = MultiPoly::var(self.nvars, j);
                p.add_term(Monomial::one(self.nvars), -shift[j]);
                p
            })
            .collect();
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(self.nvars, *c);
            for (j, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = &term * &linear[j].pow(e);
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// The sum of the terms of exactly degree `deg`.
    pub fn homogeneous_part(&self, deg: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == deg)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Coefficient vector over an explicit list of monomials. Terms outside
    /// `basis` are ignored; use [`MultiPoly::support_within`] to check.
    pub fn coefficients_over(&self, basis: &[Monomial]) -> Vec<C64> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    pub fn support_within(&self, basis: &[Monomial]) -> bool {
        self.terms.keys().all(|m| basis.contains(m))
    }

    /// Builds `sum_k coeffs[k] * basis[k]`.
    pub fn from_coefficients(nvars: usize, basis: &[Monomial], coeffs: &[C64]) -> MultiPoly {
        let mut out = MultiPoly::zero(nvars);
        for (m, c) in basis.iter().zip(coeffs) {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma * mb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let coeff = if c.im == 0.0 { format!("{}", c.re) } else { format!("({c})") };
                if m.degree() == 0 {
                    coeff
                } else {
                    format!("{coeff}*{m}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<C64>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() < DROP_TOLERANCE) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    /// `prod_k (x - roots[k])`, expanded factor by factor.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Returns `q(x) = p(x - s)`.
    pub fn translate(&self, s: C64) -> UniPoly {
        // Horner in the shifted variable: p(x - s) = (...(a_n (x-s) + a_{n-1})(x-s) ...)
        let factor = UniPoly::new(vec![-s, C64::new(1.0, 0.0)]);
        let mut acc = UniPoly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * &factor) + &UniPoly::new(vec![c]);
        }
        acc
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;

    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_default()
                        + rhs.coeffs.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

/// A square polynomial system `p_1 = ... = p_d = 0` in `d` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    polys: Vec<MultiPoly>,
    true_roots: Option<Vec<Vec<C64>>>,
    family_tag: Option<String>,
}

impl PolySystem {
    pub fn new(polys: Vec<MultiPoly>) -> Result<Self> {
        let d = polys.len();
        if d == 0 {
            return Err(Error::MalformedSystem("no polynomials".into()));
        }
        for p in &polys {
            if p.nvars() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.nvars() });
            }
        }
        Ok(PolySystem { polys, true_roots: None, family_tag: None })
    }

    /// Attaches known roots after checking each residual against
    /// `1e-10 * (1 + coefficient scale)`.
    pub fn with_true_roots(mut self, roots: Vec<Vec<C64>>) -> Result<Self> {
        let tol = 1e-10 * (1.0 + self.coefficient_scale());
        for (index, r) in roots.iter().enumerate() {
            let residual = self.residual_norm(r)?;
            if !(residual <= tol) {
                return Err(Error::NotARoot { index, residual, tolerance: tol });
            }
        }
        self.true_roots = Some(roots);
        Ok(self)
    }

    pub fn with_family_tag(mut self, tag: impl Into<String>) -> Self {
        self.family_tag = Some(tag.into());
        self
    }

    pub fn d(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn true_roots(&self) -> Option<&[Vec<C64>]> {
        self.true_roots.as_deref()
    }

    pub fn family_tag(&self) -> Option<&str> {
        self.family_tag.as_deref()
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.polys.iter().map(MultiPoly::coefficient_scale).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.polys.iter().map(|p| p.eval(x)).collect()
    }

    pub fn residual_norm(&self, x: &[C64]) -> Result<f64> {
        Ok(self.eval(x)?.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
    }

    /// `J[i][j] = dp_i/dx_j` evaluated at `x`.
    pub fn jacobian(&self, x: &[C64]) -> Result<CMatrix> {
        let d = self.d();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        let mut j = CMatrix::zeros(d, d);
        for (i, p) in self.polys.iter().enumerate() {
            for k in 0..d {
                j[(i, k)] = p.differentiate(k)?.eval(x)?;
            }
        }
        Ok(j)
    }

    /// Total degrees of the polynomials.
    pub fn degrees(&self) -> Result<Vec<u32>> {
        self.polys
            .iter()
            .enumerate()
            .map(|(i, p)| p.degree().ok_or(Error::ZeroPolynomial(i)))
            .collect()
    }

    /// `sum deg(p_i) - d + 1`, the Macaulay degree.
    pub fn rho(&self) -> Result<u32> {
        let total: u32 = self.degrees()?.iter().sum();
        Ok(total + 1 - self.d() as u32)
    }

    /// Product of total degrees (0 if any polynomial vanishes).
    pub fn bezout_count(&self) -> usize {
        self.polys
            .iter()
            .map(|p| p.degree().map_or(0, |d| d as usize))
            .product()
    }

    /// The system `p(x - s)`, whose roots are the original roots plus `s`.
    pub fn translate(&self, shift: &[C64]) -> Result<PolySystem> {
        let polys = self
            .polys
            .iter()
            .map(|p| p.translate(shift))
            .collect::<Result<Vec<_>>>()?;
        let mut out = PolySystem::new(polys)?;
        out.family_tag = self.family_tag.clone();
        if let Some(roots) = &self.true_roots {
            let moved = roots
                .iter()
                .map(|r| r.iter().zip(shift).map(|(a, b)| a + b).collect())
                .collect();
            out = out.with_true_roots(moved)?;
        }
        Ok(out)
    }
}

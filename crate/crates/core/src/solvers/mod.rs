//! End-to-end rootfinders and their common report type.

pub mod macaulay;
pub mod mep;
pub mod normal_form;
pub mod univariate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::point_to_pairs;
use crate::numkernel::{mat_vec, solve_square, vec_norm, CMatrix};
use crate::poly::{PolySystem, C64};

pub use macaulay::solve_macaulay_resultant;
pub use mep::{determinantal_representation_quadratic, solve_mep_operator_determinants, MultiParamEig};
pub use normal_form::{build_ms_matrices, solve_normal_form, MsMatrices};
pub use univariate::{gb_generator, solve_gb_elimination_example, solve_rur_example, RurMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NormalForm,
    Macaulay,
    Mep,
    /// Elimination ideal generator of the cyclic-squares example.
    GbElimination,
    /// Rational univariate representation of the hypercube example.
    Rur,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::NormalForm, Method::Macaulay, Method::Mep, Method::GbElimination, Method::Rur];

    pub fn tag(self) -> &'static str {
        match self {
            Method::NormalForm => "normal-form",
            Method::Macaulay => "macaulay",
            Method::Mep => "mep",
            Method::GbElimination => "gb",
            Method::Rur => "rur",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// Solves a general system with one of the eigenvalue methods; the seed drives
/// every random combination the method draws.
///
/// The elimination and RUR methods are only defined on their closed-form
/// examples and are rejected here.
pub fn solve_system(s: &PolySystem, method: Method, polish: bool, seed: u64) -> Result<RootReport> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    match method {
        Method::NormalForm => solve_normal_form(s, polish, &mut rng),
        Method::Macaulay => solve_macaulay_resultant(s, polish, &mut rng),
        Method::Mep => {
            let mep = MultiParamEig::from_quadratic_system(s)?;
            solve_mep_operator_determinants(&mep, s, polish, &mut rng)
        }
        Method::GbElimination | Method::Rur => Err(Error::InvalidParameter(format!(
            "{method} is only defined on its closed-form example"
        ))),
    }
}

/// Method-specific details attached to a [`RootReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_condition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_min_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped_rows: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Vec<C64>>,
    /// `||p(x)||_2` for every root.
    pub residuals: Vec<f64>,
    /// `||J(x)^{-1}||_2`, infinite where the Jacobian is singular.
    pub kappa_root: Vec<f64>,
    /// Condition number of the eigenvalue (or univariate root) the method
    /// produced this root from.
    pub subproblem_kappa: Vec<f64>,
    pub method_tag: String,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct RootReportJson<'a> {
    method: &'a str,
    roots: Vec<Vec<[f64; 2]>>,
    residuals: &'a [f64],
    kappa_root: Vec<Option<f64>>,
    subproblem_kappa: Vec<Option<f64>>,
    diagnostics: &'a Diagnostics,
}

fn finite_or_none(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

impl RootReport {
    /// Fills residuals and root condition numbers from `s`.
    pub fn new(
        s: &PolySystem,
        roots: Vec<Vec<C64>>,
        subproblem_kappa: Vec<f64>,
        method: Method,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let residuals = roots.iter().map(|x| s.residual_norm(x)).collect::<Result<Vec<_>>>()?;
        let kappa_root = roots
            .iter()
            .map(|x| crate::conditioning::kappa_root(s, x).unwrap_or(f64::INFINITY))
            .collect();
        Ok(RootReport {
            roots,
            residuals,
            kappa_root,
            subproblem_kappa,
            method_tag: method.tag().to_string(),
            diagnostics,
        })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let j = RootReportJson {
            method: &self.method_tag,
            roots: self.roots.iter().map(|x| point_to_pairs(x)).collect(),
            residuals: &self.residuals,
            kappa_root: finite_or_none(&self.kappa_root),
            subproblem_kappa: finite_or_none(&self.subproblem_kappa),
            diagnostics: &self.diagnostics,
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }
}

/// At most `steps` Newton iterations on `s`, stopping early if a step would
/// increase the residual or the Jacobian is singular.
pub fn newton_polish(s: &PolySystem, x: &[C64], steps: usize) -> Vec<C64> {
    let mut cur = x.to_vec();
    let mut res = s.residual_norm(&cur).unwrap_or(f64::INFINITY);
    for _ in 0..steps {
        let (Ok(j), Ok(f)) = (s.jacobian(&cur), s.eval(&cur)) else { break };
        let rhs = CMatrix::from_fn(f.len(), 1, |i, _| f[i]);
        let dx = solve_square(&j, &rhs);
        if !dx.is_all_finite() {
            break;
        }
        let next: Vec<C64> = cur.iter().enumerate().map(|(i, z)| z - dx[(i, 0)]).collect();
        let next_res = s.residual_norm(&next).unwrap_or(f64::INFINITY);
        if next_res > res {
            break;
        }
        cur = next;
        res = next_res;
    }
    cur
}

/// Rayleigh quotient `w^H M w / w^H w`.
pub(crate) fn rayleigh(m: &CMatrix, w: &[C64]) -> C64 {
    let mw = mat_vec(m, w);
    let num: C64 = w.iter().zip(&mw).map(|(a, b)| a.conj() * b).sum();
    num / (vec_norm(w).powi(2))
}

/// Hausdorff distance between two finite point sets (infinite if exactly one is empty).
pub fn hausdorff_distance(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let dist = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let directed = |p: &[Vec<C64>], q: &[Vec<C64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

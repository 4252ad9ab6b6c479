//! JSON wire formats for polynomials and systems.
//!
//! Polynomial: `{"nvars": d, "terms": [{"exps": [..], "re": a, "im": b}, ..]}`
//! System: `{"d": d, "polys": [..], "true_roots": [[[re, im], ..], ..], "family_tag": ..}`

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, PolySystem, C64};

#[derive(Serialize, Deserialize)]
struct TermJson {
    exps: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
pub struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
pub struct SystemJson {
    d: usize,
    polys: Vec<PolyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_roots: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_tag: Option<String>,
}

pub fn point_to_pairs(x: &[C64]) -> Vec<[f64; 2]> {
    x.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_point(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

impl From<&MultiPoly> for PolyJson {
    fn from(p: &MultiPoly) -> Self {
        PolyJson {
            nvars: p.nvars(),
            terms: p
                .terms()
                .map(|(m, c)| TermJson { exps: m.exponents().to_vec(), re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for MultiPoly {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        MultiPoly::from_terms(j.nvars, j.terms.into_iter().map(|t| (t.exps, C64::new(t.re, t.im))))
    }
}

impl From<&PolySystem> for SystemJson {
    fn from(s: &PolySystem) -> Self {
        SystemJson {
            d: s.d(),
            polys: s.polys().iter().map(PolyJson::from).collect(),
            true_roots: s.true_roots().map(|r| r.iter().map(|x| point_to_pairs(x)).collect()),
            family_tag: s.family_tag().map(str::to_string),
        }
    }
}

impl TryFrom<SystemJson> for PolySystem {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<Self> {
        if j.polys.len() != j.d {
            return Err(Error::MalformedSystem(format!("d = {} but {} polynomials", j.d, j.polys.len())));
        }
        let polys = j.polys.into_iter().map(MultiPoly::try_from).collect::<Result<Vec<_>>>()?;
        let mut s = PolySystem::new(polys)?;
        if let Some(roots) = j.true_roots {
            s = s.with_true_roots(roots.iter().map(|r| pairs_to_point(r)).collect())?;
        }
        if let Some(tag) = j.family_tag {
            s = s.with_family_tag(tag);
        }
        Ok(s)
    }
}

pub fn poly_to_json(p: &MultiPoly) -> Result<String> {
    Ok(serde_json::to_string(&PolyJson::from(p))?)
}

pub fn poly_from_json(text: &str) -> Result<MultiPoly> {
    serde_json::from_str::<PolyJson>(text)?.try_into()
}

pub fn system_to_json(s: &PolySystem) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SystemJson::from(s))?)
}

pub fn system_from_json(text: &str) -> Result<PolySystem> {
    serde_json::from_str::<SystemJson>(text)?.try_into()
}

pub fn read_system(path: &Path) -> Result<PolySystem> {
    system_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_system(s: &PolySystem, path: &Path) -> Result<()> {
    std::fs::write(path, system_to_json(s)?)?;
    Ok(())
}

//! Parameter sweeps measuring digits of accuracy at the designated root,
//! with the predicted ("theory") and stable-algorithm reference lines, plus
//! CSV/SVG output and the condition-number ratio table.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{
    kappa_eig_mep_formula, kappa_eig_ms_formula, kappa_root, kappa_uni, stable_digits, theory_digits,
    ConditionReport,
};
use crate::error::{Error, Result};
use crate::families::{designated_root, generate, generate_mep, true_root_error, Family, FamilySpec};
use crate::numkernel::random_unit_vector;
use crate::poly::{PolySystem, C64};
use crate::solvers::{
    build_ms_matrices, gb_generator, solve_gb_elimination_example, solve_macaulay_resultant, solve_mep_operator_determinants,
    solve_normal_form, solve_rur_example, Method, MultiParamEig, RurMode,
};
use crate::verification::median;

/// Default number of trials per axis point.
pub const DEFAULT_TRIALS: usize = 100;

/// `clamp(-log10(err), 0, 16)`; zero error is 16 digits, NaN is 0.
pub fn digits_of_accuracy(err: f64) -> f64 {
    if err.is_nan() {
        return 0.0;
    }
    if err <= 0.0 {
        return 16.0;
    }
    (-err.log10()).clamp(0.0, 16.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// `x = log10(sigma)`.
    LogSigma,
    /// `x = -log10(c)`.
    NegLogC,
    /// `x = d`.
    Dim,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-sigma" | "logsigma" => Ok(Axis::LogSigma),
            "neg-log-c" | "neglogc" => Ok(Axis::NegLogC),
            "d" | "dim" => Ok(Axis::Dim),
            _ => Err(Error::InvalidParameter(format!("unknown axis {s:?} (log-sigma, neg-log-c, d)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Output stem, e.g. `fig1c`.
    pub name: String,
    pub method: Method,
    pub family: Family,
    pub axis: Axis,
    /// Inclusive axis range.
    pub range: (f64, f64),
    pub points: usize,
    /// Dimension when the axis is not `d`.
    pub d: usize,
    /// Family parameter when the axis is `d`.
    pub param: f64,
    pub trials: usize,
    pub seed: u64,
    pub polish: bool,
    /// Translation of the family's roots; the designated root moves with it.
    pub shift: Option<f64>,
}

impl SweepSpec {
    pub fn new(name: impl Into<String>, method: Method, family: Family, axis: Axis, range: (f64, f64), points: usize) -> Self {
        SweepSpec {
            name: name.into(),
            method,
            family,
            axis,
            range,
            points,
            d: family.fixed_dim().unwrap_or(2),
            param: 1.0,
            trials: DEFAULT_TRIALS,
            seed: 1,
            polish: false,
            shift: None,
        }
    }

    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_param(mut self, p: f64) -> Self {
        self.param = p;
        self
    }

    pub fn with_trials(mut self, t: usize) -> Self {
        self.trials = t;
        self
    }

    pub fn with_seed(mut self, s: u64) -> Self {
        self.seed = s;
        self
    }

    pub fn with_shift(mut self, s: f64) -> Self {
        self.shift = Some(s);
        self
    }

    pub fn with_polish(mut self, p: bool) -> Self {
        self.polish = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.points == 0 {
            return bad("points must be at least 1");
        }
        if !self.range.0.is_finite() || !self.range.1.is_finite() {
            return bad("axis range must be finite");
        }
        match (self.axis, self.family) {
            (Axis::NegLogC, Family::Hypercube) | (Axis::LogSigma, _) | (Axis::Dim, _) => {}
            (Axis::NegLogC, _) => return bad("the -log c axis needs the hypercube family"),
        }
        if self.axis == Axis::LogSigma && self.family == Family::Hypercube {
            return bad("the hypercube family is swept along -log c");
        }
        if self.axis == Axis::Dim {
            if self.family.fixed_dim().is_some() {
                return bad("fixed-dimension family cannot be swept along d");
            }
            if self.range.0 < 1.0 || self.range.0.fract() != 0.0 || self.range.1.fract() != 0.0 {
                return bad("d range must be positive integers");
            }
        }
        match self.method {
            Method::GbElimination if self.family != Family::CyclicSquares => bad("gb sweeps use the cyclic-squares family"),
            Method::Rur if self.family != Family::Hypercube => bad("rur sweeps use the hypercube family"),
            _ => Ok(()),
        }
    }

    /// Axis values, evenly spaced (integer steps on the `d` axis).
    pub fn axis_values(&self) -> Vec<f64> {
        let (a, b) = self.range;
        if self.axis == Axis::Dim {
            return (a as usize..=b as usize).map(|d| d as f64).collect();
        }
        if self.points == 1 {
            return vec![a];
        }
        (0..self.points).map(|k| a + (b - a) * k as f64 / (self.points - 1) as f64).collect()
    }

    /// `(d, param)` at axis value `x`.
    pub fn point(&self, x: f64) -> (usize, f64) {
        match self.axis {
            Axis::LogSigma => (self.d, 10f64.powf(x)),
            Axis::NegLogC => (self.d, 10f64.powf(-x)),
            Axis::Dim => (x.round() as usize, self.param),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub median_digits: f64,
    pub theory_digits: f64,
    pub stable_digits: f64,
    pub n_trials: usize,
}

/// Sweeps for one figure (`1c`, `1d`, `1e`, `1f`, `1g`, `2`, `3`, `4`, `5`).
///
/// Every sweep except RUR moves the designated root from the origin to
/// `(1/3, ..., 1/3)`: at the origin the structured eigenproblems and the
/// elimination polynomial often return the zero root exactly, which hides
/// the instability being measured.
pub fn figure_preset(id: &str, trials: usize, seed: u64) -> Result<Vec<SweepSpec>> {
    let third = 1.0 / 3.0;
    let sigma_axis = (-8.0, 0.0);
    let specs = match id {
        "1c" => vec![SweepSpec::new("fig1c", Method::GbElimination, Family::CyclicSquares, Axis::LogSigma, sigma_axis, 17)
            .with_shift(third)],
        "1d" => vec![SweepSpec::new("fig1d", Method::Rur, Family::Hypercube, Axis::NegLogC, sigma_axis, 17)],
        "1e" => vec![SweepSpec::new("fig1e", Method::Mep, Family::Orthogonal, Axis::LogSigma, sigma_axis, 17).with_shift(third)],
        "1f" => vec![SweepSpec::new("fig1f", Method::NormalForm, Family::Orthogonal, Axis::LogSigma, sigma_axis, 17)
            .with_shift(third)],
        "1g" => vec![SweepSpec::new("fig1g", Method::Macaulay, Family::Orthogonal, Axis::LogSigma, sigma_axis, 17)
            .with_shift(third)],
        "2" => vec![SweepSpec::new("fig2", Method::GbElimination, Family::CyclicSquares, Axis::Dim, (1.0, 8.0), 8)
            .with_param(0.5)
            .with_shift(third)],
        "3" => vec![SweepSpec::new("fig3", Method::Mep, Family::Permutation, Axis::Dim, (1.0, 6.0), 6)
            .with_param(1e-2)
            .with_shift(third)],
        "4" => vec![
            SweepSpec::new("fig4-normal-form", Method::NormalForm, Family::NotDev2d, Axis::LogSigma, sigma_axis, 17)
                .with_shift(third),
            SweepSpec::new("fig4-macaulay", Method::Macaulay, Family::NotDev2d, Axis::LogSigma, sigma_axis, 17)
                .with_shift(third),
        ],
        "5" => vec![SweepSpec::new("fig5", Method::NormalForm, Family::NotDev3d, Axis::LogSigma, sigma_axis, 17)
            .with_shift(third)],
        _ => return Err(Error::InvalidParameter(format!("unknown figure {id:?}"))),
    };
    Ok(specs.into_iter().map(|s| s.with_trials(trials).with_seed(seed)).collect())
}

pub const FIGURES: [&str; 9] = ["1c", "1d", "1e", "1f", "1g", "2", "3", "4", "5"];

/// Independent generator for trial `trial` at axis index `point`.
fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

/// Error at the designated root for one random instance.
pub fn run_trial<R: Rng + ?Sized>(spec: &SweepSpec, d: usize, param: f64, rng: &mut R) -> Result<f64> {
    let shift = spec.shift.unwrap_or(0.0);
    match spec.method {
        Method::GbElimination => Ok(solve_gb_elimination_example(d, param, 0, shift)?.error),
        Method::Rur => {
            let u = random_unit_vector(d, rng);
            let seed = rng.random();
            let o = solve_rur_example(d, param, &u, RurMode::Multiplication { seed })?;
            Ok(o.point_error.unwrap_or(o.error))
        }
        method => {
            let mut fam = FamilySpec::new(spec.family, d, param);
            if spec.shift.is_some() {
                fam = fam.with_shift(vec![shift; d]);
            }
            let truth = designated_root(&fam);
            let report = match method {
                Method::Mep => {
                    let (s, mep) = generate_mep(&fam, rng)?;
                    solve_mep_operator_determinants(&mep, &s, spec.polish, rng)?
                }
                Method::NormalForm => solve_normal_form(&generate(&fam, rng)?, spec.polish, rng)?,
                _ => solve_macaulay_resultant(&generate(&fam, rng)?, spec.polish, rng)?,
            };
            Ok(true_root_error(&report, &truth))
        }
    }
}

/// Median digits over `trials` seeded instances per axis point (a single
/// deterministic trial for the elimination example). Failed trials count as
/// zero digits; trials run in parallel and are reduced in
/// trial order, so the output depends only on the spec.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    // the elimination example has no random ingredient: one trial is the median
    let trials = if spec.method == Method::GbElimination { 1 } else { spec.trials };
    let mut out = Vec::new();
    for (k, x) in spec.axis_values().into_iter().enumerate() {
        let (d, param) = spec.point(x);
        let mut digits: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| match run_trial(spec, d, param, &mut trial_rng(spec.seed, k, t)) {
                Ok(err) => digits_of_accuracy(err),
                Err(e) => {
                    log::debug!("{} x={x} trial {t}: {e}", spec.name);
                    0.0
                }
            })
            .collect();
        out.push(SweepRecord {
            x,
            median_digits: median(&mut digits),
            theory_digits: theory_digits(spec.method, spec.family, d, param),
            stable_digits: stable_digits(spec.family, d, param),
            n_trials: trials,
        });
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 5] = ["x", "median_digits", "theory_digits", "stable_digits", "n_trials"];

pub fn records_to_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            format!("{:.16e}", r.x),
            format!("{:.16e}", r.median_digits),
            format!("{:.16e}", r.theory_digits),
            format!("{:.16e}", r.stable_digits),
            r.n_trials.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_csv(records)?)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    records_from_csv(&std::fs::read_to_string(path)?)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Digits (0..16) against the axis value: measured medians as markers,
/// theory as a solid line and the stable reference dotted.
pub fn records_to_svg(records: &[SweepRecord], title: &str, xlabel: &str) -> String {
    let (w, h, m) = (480.0, 320.0, 48.0);
    let (mut x0, mut x1) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.x), b.max(r.x)));
    if !(x0 < x1) {
        x0 = if x0.is_finite() { x0 - 1.0 } else { 0.0 };
        x1 = x0 + 2.0;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - y.clamp(0.0, 16.0) / 16.0 * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, xml_escape(title));
    let _ = writeln!(s, r#"<g stroke="black" fill="none"><rect x="{m}" y="{m}" width="{}" height="{}"/></g>"#, w - 2.0 * m, h - 2.0 * m);
    for y in [0.0, 4.0, 8.0, 12.0, 16.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{y}</text>"#, m - 4.0, py(y) + 3.0);
    }
    for x in [x0, 0.5 * (x0 + x1), x1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="10">{x:.3}</text>"#, px(x), h - m + 14.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, w / 2.0, h - 8.0, xml_escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 12 {})">Digits of accuracy</text>"#,
        h / 2.0,
        h / 2.0
    );
    let line = |f: &dyn Fn(&SweepRecord) -> f64| {
        records.iter().map(|r| format!("{:.2},{:.2}", px(r.x), py(f(r)))).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="teal" stroke-width="1.5" stroke-dasharray="2,3" points="{}"><title>stable</title></polyline>"#,
        line(&|r| r.stable_digits)
    );
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="red" stroke-width="2" points="{}"><title>theory</title></polyline>"#,
        line(&|r| r.theory_digits)
    );
    let _ = writeln!(s, r#"<g fill="blue"><title>median</title>"#);
    for r in records {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(r.x), py(r.median_digits));
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

pub fn emit_svg(records: &[SweepRecord], path: &Path) -> Result<()> {
    let title = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    std::fs::write(path, records_to_svg(records, title, "x"))?;
    Ok(())
}

/// x-axis label for plots of `spec`.
pub fn axis_label(axis: Axis) -> &'static str {
    match axis {
        Axis::LogSigma => "log10(sigma)",
        Axis::NegLogC => "-log10(c)",
        Axis::Dim => "d",
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------
// condition-number ratios

/// Subproblem-to-root condition ratios of every method on its devastating
/// example (`sigma` for the elimination/eigenproblem rows, `c` for RUR).
pub fn condition_ratio_table(d: usize, sigma: f64, c: f64, seed: u64) -> Result<Vec<ConditionReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = vec![C64::new(0.0, 0.0); d];
    let mut rows = Vec::new();

    let cyc = generate(&FamilySpec::cyclic_squares(d, sigma), &mut rng)?;
    let g = gb_generator(d, sigma)?;
    rows.push(ConditionReport::new(kappa_root(&cyc, &origin)?, kappa_uni(&g, C64::new(0.0, 0.0))?, Method::GbElimination.tag()));

    // a fixed generic direction: distinct weights keep the separating values apart
    let norm = (1..=d).map(|i| (i * i) as f64).sum::<f64>().sqrt();
    let u: Vec<f64> = (1..=d).map(|i| i as f64 / norm).collect();
    let rur = solve_rur_example(d, c, &u, RurMode::ExactRoots)?;
    let cube = FamilySpec::hypercube(d, c);
    let cube_root = designated_root(&cube);
    let kr_cube = kappa_root(&generate(&cube, &mut rng)?, &cube_root)?;
    rows.push(ConditionReport::new(kr_cube, kappa_uni(&rur.poly, rur.target)?, Method::Rur.tag()));

    let (perm, mep) = generate_mep(&FamilySpec::permutation(d, sigma), &mut rng)?;
    let kr = kappa_root(&perm, &origin)?;
    rows.push(ConditionReport::new(kr, max_coordinate(d, |i| kappa_eig_mep_formula(&mep, &perm, &origin, i))?, Method::Mep.tag()));
    let ms = build_ms_matrices(&perm)?;
    rows.push(ConditionReport::new(
        kr,
        max_coordinate(d, |i| kappa_eig_ms_formula(&perm, &origin, &ms.basis, i))?,
        Method::NormalForm.tag(),
    ));
    let mac = solve_macaulay_resultant(&perm, false, &mut rng)?;
    rows.push(ConditionReport::new(kr, nearest_kappa(&mac.roots, &mac.subproblem_kappa, &origin), Method::Macaulay.tag()));
    Ok(rows)
}

fn max_coordinate(d: usize, f: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    (0..d).map(f).try_fold(0.0, |acc, k| k.map(|k| f64::max(acc, k)))
}

fn nearest_kappa(roots: &[Vec<C64>], kappas: &[f64], x: &[C64]) -> f64 {
    let dist = |p: &[C64]| p.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    roots
        .iter()
        .zip(kappas)
        .min_by(|a, b| dist(a.0).total_cmp(&dist(b.0)))
        .map(|(_, k)| *k)
        .unwrap_or(f64::INFINITY)
}

/// [`audit_root`] with a seeded generator.
pub fn audit_root_seeded(s: &PolySystem, x: &[C64], seed: u64) -> Result<Vec<ConditionReport>> {
    audit_root(s, x, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Subproblem condition numbers of every applicable eigenvalue method at a
/// given root of an arbitrary system.
pub fn audit_root<R: Rng + ?Sized>(s: &PolySystem, x: &[C64], rng: &mut R) -> Result<Vec<ConditionReport>> {
    let kr = kappa_root(s, x)?;
    let d = s.d();
    let mut rows = Vec::new();
    if let Ok(mep) = MultiParamEig::from_quadratic_system(s) {
        match max_coordinate(d, |i| kappa_eig_mep_formula(&mep, s, x, i)) {
            Ok(k) => rows.push(ConditionReport::new(kr, k, Method::Mep.tag())),
            Err(e) => log::warn!("mep audit failed: {e}"),
        }
    }
    match build_ms_matrices(s).and_then(|ms| max_coordinate(d, |i| kappa_eig_ms_formula(s, x, &ms.basis, i))) {
        Ok(k) => rows.push(ConditionReport::new(kr, k, Method::NormalForm.tag())),
        Err(e) => log::warn!("normal-form audit failed: {e}"),
    }
    match solve_macaulay_resultant(s, false, rng) {
        Ok(r) => rows.push(ConditionReport::new(kr, nearest_kappa(&r.roots, &r.subproblem_kappa, x), Method::Macaulay.tag())),
        Err(e) => log::warn!("macaulay audit failed: {e}"),
    }
    Ok(rows)
}

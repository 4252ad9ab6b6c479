use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use polylab_core::experiments::{self, Axis, SweepSpec};
use polylab_core::families::{self, Family, FamilySpec, MatrixChoice};
use polylab_core::io::{pairs_to_point, read_system, system_to_json};
use polylab_core::solvers::{solve_system, Method};
use polylab_core::verification::{run_suite, Suite};
use polylab_core::C64;

/// Thread count for the sweep and verification pools.
const THREADS_ENV: &str = "POLYLAB_THREADS";

#[derive(Parser)]
#[command(name = "polylab", version, about = "Algebraic rootfinders and the conditioning of their subproblems")]
struct Cli {
    /// Seed for every random choice (instances, combinations, trials).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a member of an example family as JSON.
    Gen(GenArgs),
    /// Solve a system read from JSON and print a root report.
    Solve {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value = "normal-form")]
        method: Method,
        /// Two Newton steps on every returned root.
        #[arg(long)]
        polish: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subproblem vs. root condition numbers at a root, or the ratio table of the examples.
    Audit(AuditArgs),
    /// Run a figure preset or a custom sweep, writing CSV and SVG.
    Sweep(SweepArgs),
    /// Run a verification suite and print its JSON report.
    Verify {
        #[arg(long)]
        suite: Suite,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// sigma, or c for the hypercube.
    #[arg(long)]
    param: f64,
    #[arg(long, default_value = "random")]
    matrix: String,
    /// Translate every root by this amount in each coordinate.
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, required_unless_present = "table")]
    system: Option<PathBuf>,
    /// Root as JSON `[[re, im], ...]` or comma-separated real coordinates.
    #[arg(long, required_unless_present = "table")]
    root: Option<String>,
    /// Print the ratio table of the devastating examples instead.
    #[arg(long)]
    table: bool,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1e-2)]
    sigma: f64,
    #[arg(long, default_value_t = 4.0)]
    c: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// One of 1c, 1d, 1e, 1f, 1g, 2, 3, 4, 5, or `all`.
    #[arg(long, conflicts_with = "custom")]
    figure: Option<String>,
    /// Custom sweep (requires --method, --family, --axis, --range).
    #[arg(long)]
    custom: bool,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    family: Option<Family>,
    /// log-sigma, neg-log-c or d.
    #[arg(long)]
    axis: Option<Axis>,
    /// Inclusive axis range `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Family parameter for sweeps along d.
    #[arg(long, default_value_t = 1e-2)]
    param: f64,
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long)]
    polish: bool,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value = "sweeps")]
    out: PathBuf,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let n: usize = n.parse().with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Gen(a) => gen(a, cli.seed),
        Command::Solve { system, method, polish, out } => {
            let s = read_system(&system)?;
            let report = solve_system(&s, method, polish, cli.seed)?;
            emit(&report.to_json()?, out.as_deref())
        }
        Command::Audit(a) => audit(a, cli.seed),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Verify { suite } => {
            let report = run_suite(suite, cli.seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report["pass"] != serde_json::Value::Bool(true) {
                bail!("suite {suite} failed");
            }
            Ok(())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn gen(a: GenArgs, seed: u64) -> Result<()> {
    let matrix = match a.matrix.as_str() {
        "random" => MatrixChoice::Random,
        "identity" => MatrixChoice::Identity,
        m => bail!("unknown matrix choice {m:?} (random, identity)"),
    };
    let mut spec = FamilySpec::new(a.family, a.d, a.param).with_matrix(matrix).with_seed(seed);
    if let Some(s) = a.shift {
        spec = spec.with_shift(vec![s; a.d]);
    }
    let s = families::generate_seeded(&spec)?;
    emit(&system_to_json(&s)?, a.out.as_deref())
}

fn parse_root(text: &str) -> Result<Vec<C64>> {
    let t = text.trim();
    if t.starts_with('[') {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(t).context("root must be [[re, im], ...]")?;
        return Ok(pairs_to_point(&pairs));
    }
    t.split(',')
        .map(|v| v.trim().parse::<f64>().map(|x| C64::new(x, 0.0)).with_context(|| format!("bad coordinate {v:?}")))
        .collect()
}

fn audit(a: AuditArgs, seed: u64) -> Result<()> {
    let rows = if a.table {
        experiments::condition_ratio_table(a.d, a.sigma, a.c, seed)?
    } else {
        let (Some(path), Some(root)) = (a.system, a.root) else { bail!("--system and --root are required") };
        let s = read_system(&path)?;
        let x = parse_root(&root)?;
        experiments::audit_root_seeded(&s, &x, seed)?
    };
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text.split_once(':').context("range must look like a:b")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn sweep(a: SweepArgs, seed: u64) -> Result<()> {
    let specs = if let Some(fig) = &a.figure {
        if fig == "all" {
            let mut all = Vec::new();
            for id in experiments::FIGURES {
                all.extend(experiments::figure_preset(id, a.trials, seed)?);
            }
            all
        } else {
            experiments::figure_preset(fig, a.trials, seed)?
        }
    } else if a.custom {
        let (Some(method), Some(family), Some(axis), Some(range)) = (a.method, a.family, a.axis, &a.range) else {
            bail!("--custom needs --method, --family, --axis and --range")
        };
        let mut spec = SweepSpec::new(format!("custom-{}-{}", method.tag(), family.tag()), method, family, axis, parse_range(range)?, a.points)
            .with_d(a.d)
            .with_param(a.param)
            .with_trials(a.trials)
            .with_seed(seed)
            .with_polish(a.polish);
        if let Some(s) = a.shift {
            spec = spec.with_shift(s);
        }
        vec![spec]
    } else {
        bail!("pass --figure ID or --custom");
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for spec in specs {
        log::info!("running {} ({} trials per point)", spec.name, spec.trials);
        let records = experiments::run_sweep(&spec)?;
        let csv = a.out.join(format!("{}.csv", spec.name));
        let svg = a.out.join(format!("{}.svg", spec.name));
        experiments::emit_csv(&records, &csv)?;
        let title = format!("{} ({}, {})", spec.name, spec.method, spec.family);
        fs::write(&svg, experiments::records_to_svg(&records, &title, experiments::axis_label(spec.axis)))?;
        println!("{}: {} points -> {}", spec.name, records.len(), csv.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_formats() {
        assert_eq!(parse_root("1.5, -2").unwrap(), vec![C64::new(1.5, 0.0), C64::new(-2.0, 0.0)]);
        assert_eq!(parse_root("[[1,2],[3,-4]]").unwrap(), vec![C64::new(1.0, 2.0), C64::new(3.0, -4.0)]);
        assert!(parse_root("1,,2").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-8:0").unwrap(), (-8.0, 0.0));
        assert!(parse_range("3").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

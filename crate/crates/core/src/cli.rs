//! Command-line front end. Exit codes: 0 on success, 2 on invalid input,
//! 3 on numerical or I/O failure (partial reports are still written).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::budget::{
    check_condition_double_star, check_condition_star, estimate_budget, DoubleStarReport, EpsilonSchedule,
    HyperbolicityBudget, StarReport, SAMPLED_SLACK,
};
use crate::error::{Error, Result};
use crate::fixedpoint::{eigen_split, verify_fixed_point_theorem, TheoremOptions};
use crate::geometry::Point2;
use crate::leaf::{
    cauchy_iterate, choose_epsilon, contraction_check, integrate_leaf_on_grid, measure_lipschitz,
    ConvergenceReport, LeafOptions, DEFAULT_GRID, STEPS_PER_EPS,
};
use crate::map::{make_map, MapModel};
use crate::report::{emit_leaf_csv, emit_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "stable-leaf", version, about = "Finite-time stable leaves of planar maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the hyperbolicity budget and conditions; writes budget.json
    Budget(RunArgs),
    /// Integrate one finite-time leaf; writes leaf.csv
    Leaf(RunArgs),
    /// Iterate leaves to the limit; writes leaf.csv and convergence.json
    Converge(RunArgs),
    /// Full fixed-point scenario with eps0 as the constant radius; writes theorem.json and leaf.csv
    Fixedpoint(RunArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
struct RunArgs {
    /// linear | perturbed | henon
    #[arg(long, default_value = "linear")]
    map: String,
    #[arg(long = "lambda-s", allow_hyphen_values = true)]
    lambda_s: Option<f64>,
    #[arg(long = "lambda-u", allow_hyphen_values = true)]
    lambda_u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Base point "x,y" (the initial guess for `fixedpoint`)
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    z: String,
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    #[arg(long, default_value_t = 16)]
    kmax: usize,
    /// Leaf order for `leaf` (defaults to kmax)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = crate::budget::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Integration step (default eps/512)
    #[arg(long)]
    h: Option<f64>,
    /// Spectral slack (default 0.05(|lambda_u| - 1))
    #[arg(long)]
    delta: Option<f64>,
    /// Lipschitz constant of the direction field (default: measured)
    #[arg(long)]
    lip: Option<f64>,
    #[arg(long = "out-dir", default_value = ".")]
    #[serde(skip)]
    out_dir: PathBuf,
    /// File of key=value lines, one per flag; command-line flags win
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn bad(msg: String) -> Error {
    Error::BadParams(msg)
}

impl RunArgs {
    fn point(&self) -> Result<Point2> {
        let parts: Vec<&str> = self.z.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [x, y] => match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => Ok(Point2::new(x, y)),
                _ => Err(bad(format!("--z: cannot parse '{}' as x,y", self.z))),
            },
            _ => Err(bad(format!("--z: expected 'x,y', got '{}'", self.z))),
        }
    }

    fn map(&self) -> Result<MapModel> {
        let mut params = BTreeMap::new();
        let (defaults, given): (&[(&str, f64)], [(&str, Option<f64>); 5]) = (
            match self.map.as_str() {
                "linear" => &[("lambda_s", 0.5), ("lambda_u", 2.0)],
                "perturbed" => &[("lambda_s", 0.5), ("lambda_u", 2.0), ("c", 0.05)],
                "henon" => &[("a", 1.4), ("b", 0.3)],
                _ => &[],
            },
            [
                ("lambda_s", self.lambda_s),
                ("lambda_u", self.lambda_u),
                ("c", self.c),
                ("a", self.a),
                ("b", self.b),
            ],
        );
        for (k, v) in defaults {
            params.insert(k.to_string(), *v);
        }
        for (k, v) in given {
            if let Some(v) = v {
                params.insert(k.to_string(), v);
            }
        }
        let require_hyperbolic = true;
        make_map(&self.map, &params, require_hyperbolic)
    }

    fn schedule(&self) -> Result<EpsilonSchedule> {
        EpsilonSchedule::geometric(self.eps0, self.decay).map_err(|e| match e {
            Error::Schedule(m) if !(self.decay > 0.0 && self.decay <= 1.0) => {
                Error::Schedule(format!("--decay: {m}"))
            }
            Error::Schedule(m) => Error::Schedule(format!("--eps0: {m}")),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(format!("--{name} must be positive, got {v}")))
            }
        };
        if self.kmax < 3 {
            return Err(bad(format!("--kmax must be at least 3, got {}", self.kmax)));
        }
        if self.samples == 0 {
            return Err(bad("--samples must be at least 1".into()));
        }
        positive("tol", self.tol)?;
        if let Some(h) = self.h {
            positive("h", h)?;
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(bad(format!("--delta must be non-negative, got {d}")));
            }
        }
        if let Some(l) = self.lip {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(bad(format!("--lip must be non-negative, got {l}")));
            }
        }
        if matches!(self.k, Some(0)) {
            return Err(bad("--k must be at least 1".into()));
        }
        Ok(())
    }

    fn leaf_options(&self) -> LeafOptions {
        LeafOptions {
            h: self.h,
            grid: DEFAULT_GRID,
            lip: self.lip,
        }
    }
}

/// Common prefix of `budget`, `leaf` and `converge`.
struct Prepared {
    map: MapModel,
    z: Point2,
    sched: EpsilonSchedule,
    budget: HyperbolicityBudget,
}

fn prepare(args: &RunArgs) -> Result<Prepared> {
    args.validate()?;
    let map = args.map()?;
    let z = args.point()?;
    let sched = args.schedule()?;
    let budget = estimate_budget(&map, z, &sched, args.kmax, args.samples, args.seed)?;
    Ok(Prepared { map, z, sched, budget })
}

fn pick_epsilon(pre: &Prepared, args: &RunArgs) -> Result<(f64, f64)> {
    let k0 = pre.budget.k0()?;
    let gamma = pre.budget.gamma_required.unwrap_or(f64::INFINITY) * SAMPLED_SLACK;
    if !gamma.is_finite() {
        return Err(Error::NoFeasibleEpsilon);
    }
    let lip = match args.lip {
        Some(l) => l,
        None => measure_lipschitz(&pre.map, &[pre.z], &[k0, args.kmax])?,
    };
    let eps = choose_epsilon(&pre.budget, gamma.max(f64::MIN_POSITIVE), lip, &pre.sched, Some((&pre.map, pre.z)))?;
    Ok((eps, gamma))
}

#[derive(Serialize)]
struct BudgetFile<'a> {
    config: &'a RunArgs,
    budget: &'a HyperbolicityBudget,
    condition_star: StarReport,
    condition_double_star: DoubleStarReport,
}

#[derive(Serialize)]
struct ConvergenceFile<'a> {
    config: &'a RunArgs,
    #[serde(flatten)]
    report: &'a ConvergenceReport,
    gamma_used: f64,
    converged: bool,
}

fn out(args: &RunArgs, name: &str) -> PathBuf {
    args.out_dir.join(name)
}

fn write_convergence(args: &RunArgs, r: &ConvergenceReport, gamma: f64) -> Result<()> {
    emit_leaf_csv(&r.limit, &out(args, "leaf.csv"))?;
    let file = ConvergenceFile {
        config: args,
        report: r,
        gamma_used: gamma,
        converged: r.converged,
    };
    emit_report(&file, &out(args, "convergence.json"))
}

fn run_budget(args: &RunArgs) -> Result<()> {
    let pre = prepare(args)?;
    let file = BudgetFile {
        config: args,
        budget: &pre.budget,
        condition_star: check_condition_star(&pre.budget),
        condition_double_star: check_condition_double_star(&pre.budget, &pre.sched),
    };
    emit_report(&file, &out(args, "budget.json"))
}

fn run_leaf(args: &RunArgs) -> Result<()> {
    let pre = prepare(args)?;
    let (eps, _) = pick_epsilon(&pre, args)?;
    let k = args.k.unwrap_or(args.kmax);
    let h = args.h.unwrap_or(eps / STEPS_PER_EPS);
    let leaf = integrate_leaf_on_grid(&pre.map, pre.z, k, eps, h, DEFAULT_GRID)?;
    emit_leaf_csv(&leaf, &out(args, "leaf.csv"))
}

fn run_converge(args: &RunArgs) -> Result<()> {
    let pre = prepare(args)?;
    let (eps, gamma) = pick_epsilon(&pre, args)?;
    match cauchy_iterate(&pre.map, pre.z, &pre.budget, &pre.sched, eps, args.kmax, args.tol, args.leaf_options()) {
        Ok(mut r) => {
            let c = contraction_check(&pre.map, &r.limit, &pre.budget, args.kmax, 64, args.seed)?;
            r.c_fit = c.c_fit;
            write_convergence(args, &r, gamma)
        }
        Err(Error::NotConverged { kmax, last, report }) => {
            write_convergence(args, &report, gamma)?;
            Err(Error::NotConverged { kmax, last, report })
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct TheoremFile<'a> {
    config: &'a RunArgs,
    #[serde(flatten)]
    report: &'a crate::fixedpoint::TheoremReport,
}

fn run_fixedpoint(args: &RunArgs) -> Result<()> {
    args.validate()?;
    let map = args.map()?;
    let guess = args.point()?;
    // the scenario uses the constant radius eta = eps0
    EpsilonSchedule::constant(args.eps0).map_err(|e| bad(format!("--eps0: {e}")))?;
    let mut fp = eigen_split(&map, guess)?;
    if let Some(d) = args.delta {
        fp = fp.with_delta(d);
    }
    let opts = TheoremOptions {
        kmax: args.kmax,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        leaf: args.leaf_options(),
        ..TheoremOptions::default()
    };
    match verify_fixed_point_theorem(&map, &fp, args.eps0, &opts) {
        Ok(r) => {
            emit_leaf_csv(&r.convergence.limit, &out(args, "leaf.csv"))?;
            emit_report(&TheoremFile { config: args, report: &r }, &out(args, "theorem.json"))
        }
        Err(e) => {
            if let Error::NotConverged { report, .. } = e.root() {
                write_convergence(args, report, f64::NAN)?;
            }
            Err(e)
        }
    }
}

/// Expands `--config FILE` into flags placed before the command-line flags,
/// so explicit flags override file values.
fn expand_config(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, span) = match argv[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => (PathBuf::from(p), 1),
        None => match argv.get(pos + 1) {
            Some(p) => (PathBuf::from(p), 2),
            None => return Err("--config requires a file path".into()),
        },
    };
    let flags = read_config(&path)?;
    let mut out: Vec<OsString> = Vec::with_capacity(argv.len() + flags.len());
    // program name and subcommand come first
    let head = 2.min(pos);
    out.extend(argv[..head].iter().cloned());
    out.extend(flags);
    out.extend(argv[head..pos].iter().cloned());
    out.extend(argv[pos + span..].iter().cloned());
    Ok(out)
}

fn read_config(path: &Path) -> std::result::Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("--config {}: {e}", path.display()))?;
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("--config line {}: expected key=value", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(format!("--config line {}: nested config is not allowed", n + 1));
        }
        flags.push(OsString::from(format!("--{key}")));
        flags.push(OsString::from(value.trim()));
    }
    Ok(flags)
}

fn first_line(s: &str) -> &str {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or(s)
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprintln!("{}", first_line(&e.to_string()));
            return EXIT_INVALID;
        }
    };
    let args = match &cli.command {
        Command::Budget(a) | Command::Leaf(a) | Command::Converge(a) | Command::Fixedpoint(a) => a,
    };
    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        eprintln!("error: --out-dir {}: {e}", args.out_dir.display());
        return EXIT_NUMERICAL;
    }
    let result = match &cli.command {
        Command::Budget(a) => run_budget(a),
        Command::Leaf(a) => run_leaf(a),
        Command::Converge(a) => run_converge(a),
        Command::Fixedpoint(a) => run_fixedpoint(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

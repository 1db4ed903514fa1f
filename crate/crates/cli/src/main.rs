//! `hypercyclic` command-line tool.
//!
//! Exit codes: 0 hypercyclic (or valid / success), 1 not hypercyclic,
//! 2 invalid input (parse error, non-commuting or singular generators),
//! 3 witness mismatch, 4 inconclusive, 5 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypercyclic::affine::{check_abelian, COMMUTE_TOL};
use hypercyclic::density::NumericOptions;
use hypercyclic::normal_form::EIG_TOL;
use hypercyclic::orbit::{simulate, SimConfig};
use hypercyclic::pipeline::{self, decide_hypercyclic, Options, INVERTIBLE_TOL};
use hypercyclic::problem::{Mode, Problem, ProblemError};
use hypercyclic::Error;
use num_complex::Complex64;
use rayon::prelude::*;

/// `println!` that ignores a closed stdout.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const EXIT_INVALID: u8 = 2;
const EXIT_WITNESS: u8 = 3;
const EXIT_FAILURE: u8 = 5;

#[derive(Parser)]
#[command(name = "hypercyclic", version, about = "Decide whether commuting affine maps on C^n have a dense orbit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check dimensions, commutativity, invertibility and supplied witnesses.
    Validate { file: PathBuf },
    /// Run the full decision.
    Decide(DecideArgs),
    /// Print the normal form (P, eta, w0).
    NormalForm {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Verify supplied witnesses or compute logarithm witnesses.
    Witness {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the orbit of w0 (or --start) and report grid coverage.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// exact, numeric or auto; overrides the file.
    #[arg(long)]
    mode: Option<Mode>,
    /// Relative gap below which float eigenvalues are merged.
    #[arg(long, default_value_t = EIG_TOL)]
    eig_tol: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecideArgs {
    /// Problem file; omit with --all.
    file: Option<PathBuf>,
    /// Decide every .json file in a directory, in parallel.
    #[arg(long, value_name = "DIR", conflicts_with = "file")]
    all: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    /// Largest integer coefficient searched by lattice reduction.
    #[arg(long, default_value_t = NumericOptions::default().bound)]
    lattice_bound: f64,
    /// Lattice scaling exponent.
    #[arg(long, default_value_t = NumericOptions::default().precision)]
    lattice_precision: i32,
    /// Singular value cutoff relative to the largest.
    #[arg(long, default_value_t = NumericOptions::default().rank_tol)]
    rank_tol: f64,
    /// Accept "no relation found" from the lattice search as hypercyclic.
    #[arg(long)]
    accept_heuristic: bool,
    /// Always run the density test, even when the generator count decides.
    #[arg(long)]
    no_shortcuts: bool,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Number of orbit points.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Maximum word length.
    #[arg(long)]
    depth: Option<usize>,
    /// Half-width R of the box [-R, R]^(2n).
    #[arg(long = "box", default_value_t = 2.0)]
    box_radius: f64,
    /// Cells per real axis.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Starting point as re,im pairs, e.g. "0,0,1,0"; defaults to w0.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Write one CSV row per decade checkpoint to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

struct Failure(u8, String);

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        Failure(EXIT_INVALID, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotAbelian(..) | Error::NotInvertible(_) | Error::DimensionMismatch { .. } | Error::Shape(_) => EXIT_INVALID,
            Error::WitnessMismatch { .. } => EXIT_WITNESS,
            _ => EXIT_FAILURE,
        };
        Failure(code, e.to_string())
    }
}

fn load(path: &Path) -> Result<Problem, Failure> {
    Problem::load(path).map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn want_exact(common: &Common, problem: &Problem) -> bool {
    common.mode.unwrap_or(problem.mode) != Mode::Numeric
}

fn validate(file: &Path) -> Result<u8, Failure> {
    let problem = load(file)?;
    let gens = &problem.generators;
    let abelian = match &gens.exact {
        Some(fs) => check_abelian(fs, 0.0),
        None => check_abelian(&gens.float, COMMUTE_TOL),
    };
    if let Err((i, j)) = abelian {
        return Err(Error::NotAbelian(i + 1, j + 1).into());
    }
    let singular: Vec<usize> = (0..gens.len())
        .filter(|&k| match &gens.exact {
            Some(fs) => !fs[k].is_invertible(0.0),
            None => !gens.float[k].is_invertible(INVERTIBLE_TOL),
        })
        .map(|k| k + 1)
        .collect();
    if !singular.is_empty() {
        return Err(Failure(EXIT_INVALID, format!("generators {singular:?} are not invertible")));
    }
    if let Some(w) = &problem.witnesses {
        let devs = pipeline::verify_witnesses(gens, w)?;
        let worst = devs.iter().cloned().fold(0.0, f64::max);
        out!("witnesses verified, max relative deviation {worst:.3e}");
    }
    out!(
        "valid: n = {}, {} commuting invertible generators ({})",
        problem.n,
        gens.len(),
        if gens.exact.is_some() { "exact" } else { "float entries present" }
    );
    Ok(0)
}

fn options(args: &DecideArgs) -> Options {
    Options {
        mode: args.common.mode,
        eig_tol: args.common.eig_tol,
        numeric: NumericOptions { rank_tol: args.rank_tol, precision: args.lattice_precision, bound: args.lattice_bound },
        accept_heuristic: args.accept_heuristic,
        skip_shortcuts: args.no_shortcuts,
    }
}

fn decide(args: &DecideArgs) -> Result<u8, Failure> {
    let opts = options(args);
    if let Some(dir) = &args.all {
        return decide_all(dir, &opts, args.common.json);
    }
    let file = args.file.as_ref().ok_or_else(|| Failure(EXIT_INVALID, "a problem file or --all DIR is required".into()))?;
    let report = decide_hypercyclic(&load(file)?, &opts)?;
    if args.common.json {
        out!("{}", report.to_json());
    } else {
        let _ = write!(std::io::stdout(), "{report}");
    }
    Ok(report.verdict.exit_code() as u8)
}

fn decide_all(dir: &Path, opts: &Options, json: bool) -> Result<u8, Failure> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let results: Vec<(String, Result<pipeline::DecisionReport, Failure>)> = files
        .par_iter()
        .map(|f| (f.display().to_string(), load(f).and_then(|p| decide_hypercyclic(&p, opts).map_err(Failure::from))))
        .collect();
    let mut failed = false;
    let mut out = Vec::new();
    for (name, r) in results {
        match r {
            Ok(rep) if json => out.push(serde_json::json!({"file": name, "report": rep})),
            Ok(rep) => out!("{name}: {} ({})", rep.verdict, rep.reason),
            Err(Failure(code, msg)) => {
                failed = true;
                if json {
                    out.push(serde_json::json!({"file": name, "error": msg, "exit_code": code}));
                } else {
                    out!("{name}: error: {msg}");
                }
            }
        }
    }
    if json {
        out!("{}", serde_json::to_string_pretty(&out).expect("reports serialize"));
    }
    Ok(if failed { EXIT_INVALID } else { 0 })
}

fn normal_form(file: &Path, common: &Common) -> Result<u8, Failure> {
    let problem = load(file)?;
    let mut notes = Vec::new();
    let forms = pipeline::normal_form(&problem, want_exact(common, &problem), common.eig_tol, &mut notes)?;
    let report = forms.report();
    if common.json {
        out!("{}", serde_json::to_string_pretty(&serde_json::json!({"normal_form": report, "notes": notes})).expect("serializes"));
    } else {
        out!("origin: {:?}{}", report.origin, if report.exact { " (exact)" } else { " (float)" });
        out!("eta = {:?}, r = {}", report.eta, report.r);
        for row in &report.p {
            out!("P | {}", row.join(", "));
        }
        out!("w0 = ({})", report.w0.join(", "));
        for n in notes {
            out!("note: {n}");
        }
    }
    Ok(0)
}

fn witness(file: &Path, common: &Common) -> Result<u8, Failure> {
    let problem = load(file)?;
    let exact = want_exact(common, &problem);
    let mut notes = Vec::new();
    let forms = pipeline::normal_form(&problem, exact, common.eig_tol, &mut notes)?;
    let w = pipeline::witnesses(&problem, &forms, exact, &mut notes)?;
    if common.json {
        out!("{}", serde_json::to_string_pretty(&serde_json::json!({"witnesses": w.reports, "notes": notes})).expect("serializes"));
    } else {
        for r in &w.reports {
            out!(
                "f'_{}{}: B = {:?}, b = ({}), branch shifts {:?}, corner shift {}, deviation {:.3e}",
                r.generator,
                if r.supplied { " (supplied, verified)" } else { "" },
                r.linear,
                r.translation.join(", "),
                r.branch_shifts,
                r.corner_shift.map_or("-".to_string(), |k| k.to_string()),
                r.deviation
            );
        }
        for n in notes {
            out!("note: {n}");
        }
    }
    Ok(0)
}

fn parse_start(s: &str, n: usize) -> Result<Vec<Complex64>, Failure> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure(EXIT_INVALID, format!("--start: {e}")))?;
    if vals.len() != 2 * n {
        return Err(Failure(EXIT_INVALID, format!("--start needs {} numbers (re,im per coordinate)", 2 * n)));
    }
    Ok(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn simulate_cmd(args: &SimulateArgs) -> Result<u8, Failure> {
    let problem = load(&args.file)?;
    let mut notes = Vec::new();
    let start = match &args.start {
        Some(s) => parse_start(s, problem.n)?,
        None => match pipeline::normal_form(&problem, true, EIG_TOL, &mut notes) {
            Ok(f) => f.float.w0.clone(),
            Err(e) => {
                notes.push(format!("no normal form ({e}); starting from the origin"));
                vec![Complex64::new(0.0, 0.0); problem.n]
            }
        },
    };
    let cfg = SimConfig {
        budget: args.budget,
        max_depth: args.depth.unwrap_or(usize::MAX),
        box_radius: args.box_radius,
        grid: args.grid,
        seed: args.seed,
        checkpoints: Vec::new(),
    }
    .with_decades();
    cfg.validate().map_err(|e| Failure(EXIT_INVALID, e))?;
    let result = simulate(&problem.generators.float, &start, &cfg);
    if let Some(path) = &args.csv {
        std::fs::write(path, result.to_csv()).map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    }
    if args.json {
        let v = serde_json::json!({"config": cfg, "start": start.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(), "result": result, "notes": notes, "heuristic": true});
        out!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
    } else {
        out!("heuristic orbit coverage from ({})", start.iter().map(|z| format!("{z}")).collect::<Vec<_>>().join(", "));
        out!("{:>10} {:>10} {:>10} {:>12}", "budget", "points", "coverage", "escaped");
        for c in &result.checkpoints {
            out!("{:>10} {:>10} {:>10.4} {:>12.4}", c.budget, c.points, c.coverage, c.escape_fraction);
        }
        if result.overflowed > 0 {
            out!("{} children exceeded the escape norm", result.overflowed);
        }
        for n in notes {
            out!("note: {n}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Decide(args) => decide(args),
        Command::NormalForm { file, common } => normal_form(file, common),
        Command::Witness { file, common } => witness(file, common),
        Command::Simulate(args) => simulate_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

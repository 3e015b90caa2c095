use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncbase::classical::{classical_suite, complexify_check};
use ncbase::cones::bipolar_check;
use ncbase::conic::{set_solver_tol, solver_stats};
use ncbase::ncnorm::{mbos_validate, verify_duality};
use ncbase::paulsen::{k1_membership, paulsen_suite, positivity_formula_check};
use ncbase::report::SolverStats;
use ncbase::{
    build_paulsen, nc_base_norm, nc_base_norm_sa, BaseSpec, ClassicalBaseSpace, Element, Error, Mat, OperatorSystem, Report,
};
use serde::Serialize;

mod load;

use load::{load_json, parse_levels, resolve_space, resolve_system};

const TOL_ENV: &str = "NCBASE_SOLVER_TOL";

#[derive(Parser)]
#[command(name = "ncbase", version, about = "Noncommutative base norms on operator systems")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Highest matrix level any computation may use (1 to 6).
    #[arg(long, global = true, default_value_t = 4)]
    max_level: usize,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Check tolerance (1e-10 to 1e-3).
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Base norm of one element.
    Norm(NormArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Write a system file.
    Gen(GenArgs),
    /// Paulsen systems of operator spaces.
    Paulsen {
        #[command(subcommand)]
        action: PaulsenAction,
    },
}

#[derive(Args)]
struct NormArgs {
    /// System file or name (diagN, mN, random).
    #[arg(long)]
    system: String,
    /// The element is a completely positive map with f1 = evaluation at the unit.
    #[arg(long, conflicts_with = "density")]
    dual: bool,
    /// Density of f1 for the inherited cone (default: normalized trace).
    #[arg(long)]
    density: Option<PathBuf>,
    /// Element file: {"level", "values"} in the system's basis.
    #[arg(long)]
    element: PathBuf,
    #[command(flatten)]
    sys: SystemArgs,
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Ambient size for generated systems.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Dimension of generated random systems.
    #[arg(long)]
    dim: Option<usize>,
    /// Generate over the reals.
    #[arg(long)]
    real: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Duality,
    Mbos,
    Bipolar,
    Paulsen,
    Complexify,
    Classical,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    /// System file or name (diagN, mN, random).
    #[arg(long, default_value = "random")]
    system: String,
    /// Levels: a single N means 1..=N, otherwise a comma list.
    #[arg(long, default_value = "2")]
    levels: String,
    /// Operator space for the paulsen suite: a file, randomAxB or fullAxB.
    #[arg(long = "V", default_value = "random2x2")]
    v: String,
    /// Base space file for the classical suite (default: the simplex).
    #[arg(long)]
    base: Option<PathBuf>,
    /// Simplex size for the classical suite.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Use completely positive maps instead of the inherited cone (mbos).
    #[arg(long)]
    dual: bool,
    #[command(flatten)]
    sys: SystemArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    RandomSystem,
    Paulsen,
    Diag,
    FullMatrix,
}

#[derive(Args)]
struct GenArgs {
    kind: Generator,
    /// Size of diagonal systems.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Operator space for paulsen systems.
    #[arg(long = "V", default_value = "random2x2")]
    v: String,
    #[command(flatten)]
    sys: SystemArgs,
}

#[derive(Subcommand)]
enum PaulsenAction {
    /// Write the Paulsen system of V.
    Build {
        #[arg(long = "V")]
        v: String,
    },
    /// Decide [[λI, x], [x*, (2−λ)I]] ∈ K₁ by the formula and by SDP.
    Check {
        #[arg(long = "V")]
        v: String,
        #[arg(long)]
        lambda: f64,
        /// Corner matrix file; a random direction in V otherwise.
        #[arg(long)]
        x: Option<PathBuf>,
        /// Norm of the random corner.
        #[arg(long, default_value_t = 0.5)]
        x_norm: f64,
    },
    /// Run the Paulsen suite.
    Verify {
        #[arg(long = "V")]
        v: String,
        #[arg(long, default_value = "2")]
        levels: String,
    },
}

/// Validated run settings.
struct RunConfig {
    max_level: usize,
    samples: usize,
    tol: f64,
    seed: u64,
    output: Option<PathBuf>,
    command: Vec<String>,
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Solver { .. } => Failure::Solver(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

impl RunConfig {
    fn new(a: &RunArgs) -> Outcome<RunConfig> {
        if !(1..=6).contains(&a.max_level) {
            return usage(format!("--max-level must be in [1, 6], got {}", a.max_level));
        }
        if !(1e-10..=1e-3).contains(&a.tol) {
            return usage(format!("--tol must be in [1e-10, 1e-3], got {:e}", a.tol));
        }
        if a.samples == 0 {
            return usage("--samples must be positive");
        }
        Ok(RunConfig {
            max_level: a.max_level,
            samples: a.samples,
            tol: a.tol,
            seed: a.seed,
            output: a.output.clone(),
            command: std::env::args().skip(1).collect(),
        })
    }

    fn levels(&self, spec: &str) -> Outcome<Vec<usize>> {
        let levels = parse_levels(spec).map_err(Failure::Usage)?;
        if let Some(bad) = levels.iter().find(|l| **l > self.max_level) {
            return usage(format!("level {bad} exceeds --max-level {}", self.max_level));
        }
        Ok(levels)
    }

    fn base(&self, b: BaseSpec) -> BaseSpec {
        b.with_max_level(self.max_level)
    }
}

fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome<bool> {
    if let Ok(v) = std::env::var(TOL_ENV) {
        let tol: f64 = v.trim().parse().map_err(|_| Failure::Usage(format!("{TOL_ENV}={v} is not a number")))?;
        set_solver_tol(tol).map_err(|e| Failure::Usage(format!("{TOL_ENV}: {e}")))?;
    }
    let cfg = RunConfig::new(&cli.run)?;
    let start = Instant::now();
    let (solves0, iters0) = solver_stats();
    let mut report = Report::new(cfg.command.clone());
    match cli.command {
        Command::Gen(args) => {
            let sys = generate(&cfg, &args)?;
            write_json(&sys, cfg.output.as_deref())?;
            return Ok(true);
        }
        Command::Paulsen {
            action: PaulsenAction::Build { v },
        } => {
            let ps = build_paulsen(&resolve_space(&v, cfg.seed)?)?;
            write_json(ps.system().as_ref(), cfg.output.as_deref())?;
            return Ok(true);
        }
        Command::Norm(args) => norm(&cfg, &args, &mut report)?,
        Command::Verify(args) => verify(&cfg, &args, &mut report)?,
        Command::Paulsen {
            action: PaulsenAction::Check { v, lambda, x, x_norm },
        } => paulsen_check(&cfg, &v, lambda, x.as_deref(), x_norm, &mut report)?,
        Command::Paulsen {
            action: PaulsenAction::Verify { v, levels },
        } => {
            let ps = build_paulsen(&resolve_space(&v, cfg.seed)?)?;
            let (records, notes) = paulsen_suite(&ps, &cfg.levels(&levels)?, cfg.samples, cfg.seed, cfg.tol)?;
            report.extend(records);
            notes.into_iter().for_each(|(k, v)| report.note(k, v));
        }
    }
    let (solves1, iters1) = solver_stats();
    report.solver = SolverStats {
        solves: solves1 - solves0,
        iterations: iters1 - iters0,
    };
    report.timing_ms = start.elapsed().as_millis() as u64;
    write_json(&report, cfg.output.as_deref())?;
    Ok(report.passed())
}

fn generate(cfg: &RunConfig, args: &GenArgs) -> Outcome<OperatorSystem> {
    let s = &args.sys;
    let name = match args.kind {
        Generator::RandomSystem => "random".to_string(),
        Generator::Diag => format!("diag{}", args.n),
        Generator::FullMatrix => format!("m{}", s.d),
        Generator::Paulsen => {
            let ps = build_paulsen(&resolve_space(&args.v, cfg.seed)?)?;
            return Ok(ps.system().as_ref().clone());
        }
    };
    Ok(resolve_system(&name, s.d, s.dim, s.real, cfg.seed)?.as_ref().clone())
}

fn norm(cfg: &RunConfig, args: &NormArgs, report: &mut Report) -> Outcome<()> {
    let s = &args.sys;
    let sys = resolve_system(&args.system, s.d, s.dim, s.real, cfg.seed)?;
    let x: Element = load_json(&args.element)?;
    let b = if args.dual {
        BaseSpec::unit_evaluation(sys.clone())
    } else if let Some(p) = &args.density {
        let rho: Mat = load_json(p)?;
        BaseSpec::with_density(sys.clone(), &rho)?
    } else {
        BaseSpec::normalized_trace(sys.clone())
    };
    let b = cfg.base(b);
    let r = if sys.is_selfadjoint(&x, 1e-12) {
        nc_base_norm_sa(&b, &x)?
    } else {
        nc_base_norm(&b, &x)?
    };
    report.note("norm", r.value);
    report.note("gap", r.gap);
    report.note("level", x.level as f64);
    report.note("f1 of positive part", b.f1(&r.positive).spectral_norm());
    report.note("f1 of negative part", b.f1(&r.negative).spectral_norm());
    Ok(())
}

fn verify(cfg: &RunConfig, args: &VerifyArgs, report: &mut Report) -> Outcome<()> {
    let s = &args.sys;
    let levels = cfg.levels(&args.levels)?;
    let system = || -> Outcome<Arc<OperatorSystem>> { resolve_system(&args.system, s.d, s.dim, s.real, cfg.seed) };
    match args.suite {
        Suite::Duality => {
            let (records, notes) = verify_duality(&system()?, &levels, cfg.samples, cfg.seed, cfg.tol)?;
            report.extend(records);
            notes.into_iter().for_each(|(k, v)| report.note(k, v));
        }
        Suite::Mbos => {
            let sys = system()?;
            let b = if args.dual {
                BaseSpec::unit_evaluation(sys)
            } else {
                BaseSpec::normalized_trace(sys)
            };
            report.extend(mbos_validate(&cfg.base(b), &levels, cfg.samples, cfg.seed, cfg.tol)?);
        }
        Suite::Bipolar => report.extend(bipolar_check(&system()?, &levels, cfg.samples, cfg.seed, cfg.tol)?),
        Suite::Paulsen => {
            let ps = build_paulsen(&resolve_space(&args.v, cfg.seed)?)?;
            let (records, notes) = paulsen_suite(&ps, &levels, cfg.samples, cfg.seed, cfg.tol)?;
            report.extend(records);
            notes.into_iter().for_each(|(k, v)| report.note(k, v));
        }
        Suite::Complexify => report.extend(complexify_check(&system()?, cfg.samples, cfg.seed, cfg.tol)?),
        Suite::Classical => {
            let sp = match &args.base {
                Some(p) => load_json::<ClassicalBaseSpace>(p)?,
                None => ClassicalBaseSpace::simplex(args.n),
            };
            report.extend(classical_suite(&sp, cfg.samples, cfg.seed, cfg.tol)?);
        }
    }
    Ok(())
}

fn paulsen_check(cfg: &RunConfig, v: &str, lambda: f64, x: Option<&Path>, x_norm: f64, report: &mut Report) -> Outcome<()> {
    let ps = build_paulsen(&resolve_space(v, cfg.seed)?)?;
    let x = match x {
        Some(p) => load_json::<Mat>(p)?,
        None => {
            let mut rng = ncbase::random::rng_for(cfg.seed, 0);
            let c = ps.random_corner(&mut rng, 1);
            let n = c.spectral_norm();
            if n == 0.0 {
                c
            } else {
                c.scale_re(x_norm / n)
            }
        }
    };
    let candidate = ps.k1_candidate(lambda, &x)?;
    let formula = k1_membership(lambda, &x, cfg.tol);
    let sdp = ps.base().in_base(&candidate, cfg.tol)?;
    let one = |v: f64| Mat::from_fn(1, 1, x.field(), |_, _| ncbase::C64::new(v, 0.0));
    let pos = positivity_formula_check(&ps, &one(lambda), &one(2.0 - lambda), &x, cfg.seed, cfg.tol)?;
    report.note("in K1", f64::from(u8::from(sdp)));
    report.note("corner norm", x.spectral_norm());
    report.push(ncbase::CheckRecord::zero_count("K1 formula vs SDP membership", usize::from(formula != sdp), cfg.tol));
    report.push(ncbase::CheckRecord::zero_count(
        "positivity formula vs eigenvalues",
        usize::from(!pos.agree),
        cfg.tol,
    ));
    Ok(())
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cfapd::bench::{
    run_cell, run_experiment, write_csv, ApdOverrides, Limits, SolveSettings,
};
use cfapd::vecops::norm;
use cfapd::{
    check_stationarity, verify_descent_invariants, BenchConfig, Execution, ProblemSpec, RhoRule,
    Slack, SolveTrace, SolverKind, Status,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Format tag of quadratic instance files written by `gen`.
const QUADRATIC_FORMAT: &str = "cfapd-quadratic-v1";

/// Relative slack used by `verify`.
const VERIFY_SLACK: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "cfapd",
    version,
    about = "Curvature-free accelerated proximal solvers and benchmark harness",
    after_help = "Exit status: 0 on success, 1 when a solver does not converge or \
                  verification fails, 2 on usage or input errors."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark grid from a config file and write CSV rows.
    Bench(BenchArgs),
    /// Solve one generated problem with one solver and print its CSV row.
    Solve(SolveArgs),
    /// Re-check a trace log: descent invariants and the final stationarity
    /// certificate.
    Verify(VerifyArgs),
    /// Write a serialized problem instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Config file (TOML, `format = "cfapd-bench-v1"`).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; overrides `output` in the config. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Quadratic,
    Qsdp,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Dimension (quadratic) or matrix side (qsdp). Default: 20 or 35.
    #[arg(long)]
    n: Option<usize>,
    /// Number of linear measurements (qsdp only). Default: 10.
    #[arg(long)]
    l: Option<usize>,
    /// Lower curvature m. Default: 1 (0 with --convex) or 5 for qsdp.
    #[arg(long)]
    m: Option<f64>,
    /// Upper curvature M. Default: 10, or 125 for qsdp.
    #[arg(long = "M")]
    big_m: Option<f64>,
    /// Instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Convex instance: m = 0 for quadratics, no concave part for qsdp.
    #[arg(long)]
    convex: bool,
    /// Constrain quadratics to the box [-1, 1]^n.
    #[arg(long = "box")]
    boxed: bool,
}

impl ProblemArgs {
    fn spec(&self) -> ProblemSpec {
        match self.family {
            FamilyArg::Quadratic => ProblemSpec::Quadratic {
                n: self.n.unwrap_or(20),
                m: self.m.unwrap_or(if self.convex { 0.0 } else { 1.0 }),
                big_m: self.big_m.unwrap_or(10.0),
                convex: self.convex,
                boxed: self.boxed,
                seed: self.seed,
            },
            FamilyArg::Qsdp => ProblemSpec::Qsdp {
                n: self.n.unwrap_or(35),
                l: self.l.unwrap_or(10),
                m: self.m.unwrap_or(5.0),
                big_m: self.big_m.unwrap_or(125.0),
                seed: self.seed,
                convex: self.convex,
            },
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Solver: apd, apd_rho2 or pgd.
    #[arg(long, default_value = "apd", value_parser = parse_solver)]
    solver: SolverKind,
    /// Absolute tolerance. Default: 1e-5·(1 + ‖∇f(z0)‖).
    #[arg(long)]
    rho: Option<f64>,
    /// Initial lower curvature estimate (apd solvers).
    #[arg(long)]
    m0: Option<f64>,
    /// Initial upper curvature estimate (apd solvers).
    #[arg(long = "M0")]
    big_m0: Option<f64>,
    /// Shrink curvature estimates between outer iterations (apd solvers).
    #[arg(long)]
    decay: bool,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Cap on inner iterations summed over the run.
    #[arg(long)]
    max_inner: Option<u64>,
    /// Write the JSON-lines trace here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trace log written by `solve --out` or a bench `trace_dir`.
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output path. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    SolverKind::parse(s).ok_or_else(|| format!("unknown solver `{s}` (apd, apd_rho2, pgd)"))
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    NotConverged,
}

/// Errors split by exit status.
enum Failure {
    Usage(String),
    Solver(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn bench(args: &BenchArgs) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    let config = BenchConfig::from_toml(&text).map_err(usage)?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let rows = run_experiment(&config, exec).map_err(|e| Failure::Solver(e.to_string()))?;
    let out = args.out.as_ref().or(config.output.as_ref());
    write_csv(&rows, output(out)?).map_err(usage)?;
    Ok(if rows.iter().all(|r| r.status == Status::Solved) {
        Outcome::Ok
    } else {
        Outcome::NotConverged
    })
}

fn solve(args: &SolveArgs) -> Result<Outcome, Failure> {
    let spec = args.problem.spec();
    // surface bad problem parameters as usage errors before solving
    spec.build().map_err(usage)?;
    let settings = SolveSettings {
        rho: match args.rho {
            Some(r) => RhoRule::Absolute(r),
            None => RhoRule::RelativeGrad(1e-5),
        },
        limits: Limits {
            time_limit_s: args.time_limit,
            max_total_inner: args.max_inner,
        },
        decay: args.decay,
        apd: ApdOverrides {
            m0: args.m0,
            big_m0: args.big_m0,
            theta: None,
        },
        keep_trace: args.out.is_some(),
    };
    settings.rho.resolve(&spec).map_err(usage)?;
    let (row, res) = run_cell(&spec, args.solver, &settings);
    let res = res.map_err(|e| Failure::Solver(e.to_string()))?;
    if let Some(path) = &args.out {
        res.trace.write_jsonl(output(Some(path))?).map_err(usage)?;
    }
    write_csv(&[row.clone()], io::stdout().lock()).map_err(usage)?;
    Ok(if row.status == Status::Solved {
        Outcome::Ok
    } else {
        Outcome::NotConverged
    })
}

fn verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let file = File::open(&args.trace)
        .map_err(|e| usage(format!("{}: {e}", args.trace.display())))?;
    let trace = SolveTrace::read_jsonl(BufReader::new(file)).map_err(usage)?;
    let report = verify_descent_invariants(&trace, Slack::relative(VERIFY_SLACK));
    println!(
        "{} outer iterations checked, {} violations",
        report.checked,
        report.violations.len()
    );
    for v in &report.violations {
        println!("  k = {}: {:?} ({:e} > {:e})", v.k, v.check, v.lhs, v.rhs);
    }
    let mut ok = report.is_clean();

    let solved = trace
        .summary
        .as_ref()
        .is_some_and(|s| s.record.status == Status::Solved);
    match (solved, &trace.header.problem, trace.entries.last()) {
        (true, Some(spec), Some(last)) => {
            let problem = spec.build().map_err(usage)?;
            let r = norm(&last.v);
            let certified = check_stationarity(&problem, &last.z, &last.v, 1.0, 1e-8)
                .map_err(usage)?;
            let within = r <= trace.header.rho;
            println!(
                "stationarity: {} (residual {r:e}, rho {:e})",
                if certified && within { "ok" } else { "FAILED" },
                trace.header.rho
            );
            ok &= certified && within;
        }
        (true, None, _) => println!("stationarity: skipped (trace has no problem recipe)"),
        _ => println!("stationarity: skipped (run did not solve)"),
    }
    Ok(if ok { Outcome::Ok } else { Outcome::NotConverged })
}

fn gen(args: &GenArgs) -> Result<Outcome, Failure> {
    let spec = args.problem.spec();
    spec.build().map_err(usage)?;
    let text = match spec.qsdp_instance().map_err(usage)? {
        Some(inst) => inst.to_json().map_err(usage)?,
        None => serde_json::json!({ "format": QUADRATIC_FORMAT, "spec": spec }).to_string(),
    };
    let mut w = output(args.out.as_ref())?;
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(usage)?;
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Bench(a) => bench(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! Experiment grids: configuration, per-cell solves and CSV rows.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::apd::{apd_run, ApdParams, SolveResult};
use crate::error::{Error, Result};
use crate::model::Status;
use crate::parallel::{map_items, Execution};
use crate::pgd::{pgd_run, PgdParams};
use crate::problems::ProblemSpec;
use crate::trace::SolverKind;
use crate::vecops::norm;

pub const BENCH_FORMAT: &str = "cfapd-bench-v1";

pub const CSV_HEADER: [&str; 14] = [
    "family",
    "n",
    "l",
    "m",
    "M",
    "seed",
    "solver",
    "status",
    "prox_evals",
    "grad_evals",
    "outer_iters",
    "inner_iters",
    "wall_time_s",
    "final_residual",
];

/// How the target tolerance is derived at `z₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoRule {
    Absolute(f64),
    /// `ρ = c·(1 + ‖∇f(z₀)‖)`
    RelativeGrad(f64),
}

impl RhoRule {
    pub fn resolve(&self, spec: &ProblemSpec) -> Result<f64> {
        let rho = match *self {
            RhoRule::Absolute(r) => r,
            RhoRule::RelativeGrad(c) => {
                let p = spec.build()?;
                c * (1.0 + norm(&p.f.gradient(&spec.initial_point())))
            }
        };
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive, got {rho}")));
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub time_limit_s: Option<f64>,
    pub max_total_inner: Option<u64>,
}

/// Optional overrides of the CF.APD starting estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApdOverrides {
    pub m0: Option<f64>,
    #[serde(rename = "M0")]
    pub big_m0: Option<f64>,
    pub theta: Option<f64>,
}

/// Everything needed to run one solver on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub rho: RhoRule,
    pub limits: Limits,
    pub decay: bool,
    pub apd: ApdOverrides,
    pub keep_trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Quadratic,
    Qsdp,
}

/// Problem axes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub l: Option<usize>,
    /// `(m, M)` pairs.
    pub curvature: Vec<(f64, f64)>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub convex: bool,
    #[serde(default = "default_true")]
    pub boxed: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub format: String,
    pub solvers: Vec<SolverKind>,
    pub problem: GridSpec,
    pub rho: RhoRule,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub decay: bool,
    #[serde(default)]
    pub apd: ApdOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub trace_dir: Option<PathBuf>,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != BENCH_FORMAT {
            return Err(Error::Config(format!(
                "field `format`: unsupported `{}` (expected `{BENCH_FORMAT}`)",
                self.format
            )));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config(
                "field `solvers`: at least one solver is required".into(),
            ));
        }
        let p = &self.problem;
        if p.curvature.is_empty() || p.seeds.is_empty() {
            return Err(Error::Config(
                "section `problem`: need at least one curvature pair and one seed".into(),
            ));
        }
        if p.family == Family::Qsdp && p.l.is_none() {
            return Err(Error::Config("section `problem`: qsdp requires `l`".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> SolveSettings {
        SolveSettings {
            rho: self.rho,
            limits: self.limits,
            decay: self.decay,
            apd: self.apd,
            keep_trace: self.trace_dir.is_some(),
        }
    }

    /// Problem specs in grid order: curvature pairs, then seeds.
    pub fn problems(&self) -> Vec<ProblemSpec> {
        let p = &self.problem;
        let mut out = Vec::new();
        for &(m, big_m) in &p.curvature {
            for &seed in &p.seeds {
                out.push(match p.family {
                    Family::Quadratic => ProblemSpec::Quadratic {
                        n: p.n,
                        m,
                        big_m,
                        convex: p.convex,
                        boxed: p.boxed,
                        seed,
                    },
                    Family::Qsdp => ProblemSpec::Qsdp {
                        n: p.n,
                        l: p.l.unwrap_or(0),
                        m,
                        big_m,
                        seed,
                        convex: p.convex,
                    },
                });
            }
        }
        out
    }

    /// Cells in output order: problems, then solvers.
    pub fn cells(&self) -> Vec<(ProblemSpec, SolverKind)> {
        self.problems()
            .into_iter()
            .flat_map(|p| self.solvers.iter().map(move |&s| (p.clone(), s)))
            .collect()
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub family: String,
    pub n: usize,
    pub l: Option<usize>,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub seed: u64,
    pub solver: String,
    pub status: Status,
    pub prox_evals: u64,
    pub grad_evals: u64,
    pub outer_iters: u64,
    pub inner_iters: u64,
    pub wall_time_s: f64,
    pub final_residual: f64,
}

impl CsvRow {
    fn skeleton(spec: &ProblemSpec, solver: SolverKind) -> Self {
        let (n, l, m, big_m, seed) = match *spec {
            ProblemSpec::Quadratic {
                n, m, big_m, seed, ..
            } => (n, None, m, big_m, seed),
            ProblemSpec::Qsdp {
                n,
                l,
                m,
                big_m,
                seed,
                ..
            } => (n, Some(l), m, big_m, seed),
        };
        Self {
            family: spec.family().to_string(),
            n,
            l,
            m,
            big_m,
            seed,
            solver: solver.name().to_string(),
            status: Status::Failed,
            prox_evals: 0,
            grad_evals: 0,
            outer_iters: 0,
            inner_iters: 0,
            wall_time_s: 0.0,
            final_residual: f64::INFINITY,
        }
    }
}

/// Solves `spec` with `solver`; returns the result and the resolved `ρ`.
pub fn solve_spec(
    spec: &ProblemSpec,
    solver: SolverKind,
    settings: &SolveSettings,
) -> Result<(SolveResult, f64)> {
    let rho = settings.rho.resolve(spec)?;
    let problem = spec.build()?;
    let z0 = spec.initial_point();
    let res = match solver {
        SolverKind::Apd | SolverKind::ApdRho2 => {
            let mut params = if solver == SolverKind::Apd {
                ApdParams::standard(rho)
            } else {
                ApdParams::rho_squared(rho)
            };
            if let Some(m0) = settings.apd.m0 {
                params.m0 = m0;
            }
            if let Some(big_m0) = settings.apd.big_m0 {
                params.big_m0 = big_m0;
            }
            if let Some(theta) = settings.apd.theta {
                params.theta = theta;
            }
            params.decay = settings.decay;
            params.keep_trace = settings.keep_trace;
            params.time_limit = settings.limits.time_limit_s;
            if let Some(cap) = settings.limits.max_total_inner {
                params.max_total_inner = cap;
            }
            apd_run(&problem, &z0, &params, solver, Some(spec))?
        }
        SolverKind::Pgd => {
            let mut params = PgdParams::new(rho);
            params.keep_trace = settings.keep_trace;
            params.time_limit = settings.limits.time_limit_s;
            if let Some(cap) = settings.limits.max_total_inner {
                params.max_total_inner = cap;
            }
            pgd_run(&problem, &z0, &params, Some(spec))?
        }
    };
    Ok((res, rho))
}

/// Runs one cell; solver errors become a `failed` row.
pub fn run_cell(
    spec: &ProblemSpec,
    solver: SolverKind,
    settings: &SolveSettings,
) -> (CsvRow, Result<SolveResult>) {
    let mut row = CsvRow::skeleton(spec, solver);
    let start = Instant::now();
    match solve_spec(spec, solver, settings) {
        Ok((res, _)) => {
            let r = &res.record;
            row.status = r.status;
            row.prox_evals = r.prox_evals;
            row.grad_evals = r.grad_evals;
            row.outer_iters = r.outer_iters;
            row.inner_iters = r.inner_iters;
            row.wall_time_s = r.wall_time_s;
            row.final_residual = r.final_residual;
            (row, Ok(res))
        }
        Err(e) => {
            row.wall_time_s = start.elapsed().as_secs_f64();
            (row, Err(e))
        }
    }
}

/// File name of the trace for one cell.
pub fn trace_file_name(spec: &ProblemSpec, solver: SolverKind) -> String {
    let row = CsvRow::skeleton(spec, solver);
    format!(
        "{}_n{}_m{}_M{}_s{}_{}.jsonl",
        row.family, row.n, row.m, row.big_m, row.seed, row.solver
    )
}

/// Runs every cell of the grid. Rows come back in grid order regardless of
/// execution mode; traces are written when `trace_dir` is set.
pub fn run_experiment(config: &BenchConfig, exec: Execution) -> Result<Vec<CsvRow>> {
    config.validate()?;
    if let Some(dir) = &config.trace_dir {
        std::fs::create_dir_all(dir)?;
    }
    let settings = config.settings();
    let cells = config.cells();
    let results = map_items(&cells, exec, |(spec, solver)| {
        let (row, res) = run_cell(spec, *solver, &settings);
        let written = match (&config.trace_dir, res) {
            (Some(dir), Ok(res)) => {
                let path = dir.join(trace_file_name(spec, *solver));
                std::fs::File::create(path)
                    .map_err(Error::from)
                    .and_then(|f| res.trace.write_jsonl(std::io::BufWriter::new(f)))
            }
            _ => Ok(()),
        };
        written.map(|_| row)
    });
    results.into_iter().collect()
}

pub fn write_csv<W: Write>(rows: &[CsvRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
format = "cfapd-bench-v1"
solvers = ["apd", "pgd"]
rho = { absolute = 1e-5 }

[problem]
family = "quadratic"
n = 6
curvature = [[1.0, 4.0], [0.5, 8.0]]
seeds = [1, 2]
"#;

    #[test]
    fn parses_and_expands_grid() {
        let cfg = BenchConfig::from_toml(SMALL).unwrap();
        assert_eq!(cfg.cells().len(), 8);
        assert!(cfg.problem.boxed);
        assert_eq!(cfg.rho, RhoRule::Absolute(1e-5));
    }

    #[test]
    fn empty_solver_list_is_rejected() {
        let text = SMALL.replace(r#"["apd", "pgd"]"#, "[]");
        assert!(matches!(
            BenchConfig::from_toml(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unknown_field_is_reported_with_location() {
        let text = SMALL.replace("seeds", "seedz");
        let err = BenchConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rows_follow_grid_order() {
        let cfg = BenchConfig::from_toml(SMALL).unwrap();
        let rows = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].seed, rows[0].solver.as_str()), (1, "apd"));
        assert_eq!((rows[1].seed, rows[1].solver.as_str()), (1, "pgd"));
        assert_eq!((rows[2].seed, rows[2].m), (2, 1.0));
        assert!(rows.iter().all(|r| r.status == Status::Solved));
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("family,n,l,m,M,seed,solver,status,"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn failing_cell_becomes_a_row() {
        let spec = ProblemSpec::Quadratic {
            n: 4,
            m: 9.0,
            big_m: 1.0,
            convex: false,
            boxed: true,
            seed: 0,
        };
        let settings = SolveSettings {
            rho: RhoRule::Absolute(1e-6),
            limits: Limits::default(),
            decay: false,
            apd: ApdOverrides::default(),
            keep_trace: false,
        };
        let (row, res) = run_cell(&spec, SolverKind::Apd, &settings);
        assert!(res.is_err());
        assert_eq!(row.status, Status::Failed);
    }
}

//! Batch runs over seeded AVVF instances, aggregated into one row per
//! (method, dimension) cell.
//!
//! Instance `i` of every dimension uses seed `base_seed + i`; its starting
//! point uses seed `base_seed + i + start_seed_offset` and is shared by all
//! methods. Runs fan out over a private rayon pool, results are collected in
//! seed order and reduced sequentially, so the report does not depend on the
//! thread count.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{generate_instance_with, random_start, MatrixGenerator};
use crate::solver::{solve, Method, SolverConfig};

pub const CSV_HEADER: &str = "method,dimension,solved_percent,avg_iters_solved,avg_time_s,n_runs";

/// Status recorded for an instance whose matrix could not be generated.
pub const GENERATION_FAILED: &str = "generation_failed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchPlan {
    pub dimensions: Vec<usize>,
    pub instances_per_dim: usize,
    #[serde(alias = "M_values")]
    pub m_values: Vec<usize>,
    pub include_pure_newton: bool,
    pub base_seed: u64,
    /// Each solve is timed this many times; the mean is reported.
    pub repeats_per_timing: usize,
    pub density: f64,
    pub generator: MatrixGenerator,
    pub start_seed_offset: u64,
    pub solver: SolverConfig,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// When false no solve is repeated and time columns are `NA`.
    pub timing: bool,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            dimensions: vec![50, 100, 200],
            instances_per_dim: 50,
            m_values: vec![0, 1, 5],
            include_pure_newton: false,
            base_seed: 0,
            repeats_per_timing: 3,
            density: 0.003,
            generator: MatrixGenerator::default(),
            start_seed_offset: 1_000_000,
            solver: SolverConfig::default(),
            threads: 0,
            timing: true,
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_owned()));
        if self.dimensions.is_empty() || self.dimensions.iter().any(|&n| n < 2) {
            return bad("dimensions must be nonempty and all at least 2");
        }
        if self.instances_per_dim == 0 {
            return bad("instances_per_dim must be at least 1");
        }
        if self.m_values.is_empty() && !self.include_pure_newton {
            return bad("no methods: give M values or include pure Newton");
        }
        if self.repeats_per_timing == 0 {
            return bad("repeats_per_timing must be at least 1");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        self.solver.validate()
    }

    /// GNM for each `M` in plan order, then NM.
    pub fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = self
            .m_values
            .iter()
            .map(|&depth| Method::Gnm { depth })
            .collect();
        if self.include_pure_newton {
            out.push(Method::Nm);
        }
        out
    }

    fn sorted_dimensions(&self) -> Vec<usize> {
        let mut dims = self.dimensions.clone();
        dims.sort_unstable();
        dims.dedup();
        dims
    }
}

/// One solve, as written to the raw JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub method: String,
    pub dim: usize,
    pub instance_seed: u64,
    /// A solver status, or `generation_failed`.
    pub status: String,
    pub iters: usize,
    pub res_final: Option<f64>,
    pub time_s: Option<f64>,
}

impl RunSummary {
    pub fn solved(&self) -> bool {
        self.status == "singularity"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub dimension: usize,
    pub solved_percent: f64,
    /// Over solved runs; `None` when nothing was solved.
    pub avg_iters_solved: Option<f64>,
    /// Over solved runs; `None` when nothing was solved or timing is off.
    pub avg_time_s: Option<f64>,
    pub n_runs: usize,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub rows: Vec<BenchRow>,
    pub runs: Vec<RunSummary>,
}

pub fn run_batch(plan: &BenchPlan) -> Result<BatchResult> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let methods = plan.methods();
    let mut runs = Vec::new();
    for n in plan.sorted_dimensions() {
        let per_instance: Vec<Result<Vec<RunSummary>>> = pool.install(|| {
            (0..plan.instances_per_dim as u64)
                .into_par_iter()
                .map(|i| run_instance(plan, &methods, n, plan.base_seed.wrapping_add(i)))
                .collect()
        });
        for r in per_instance {
            runs.extend(r?);
        }
    }
    let rows = aggregate(&methods, &runs);
    Ok(BatchResult { rows, runs })
}

fn run_instance(
    plan: &BenchPlan,
    methods: &[Method],
    n: usize,
    seed: u64,
) -> Result<Vec<RunSummary>> {
    let summary = |m: &Method, status: String, iters, res_final, time_s| RunSummary {
        method: m.label(),
        dim: n,
        instance_seed: seed,
        status,
        iters,
        res_final,
        time_s,
    };
    let inst = match generate_instance_with(n, plan.density, seed, plan.generator) {
        Ok(inst) => inst,
        Err(Error::DegenerateMatrix { .. }) => {
            return Ok(methods
                .iter()
                .map(|m| summary(m, GENERATION_FAILED.to_owned(), 0, None, None))
                .collect())
        }
        Err(e) => return Err(e),
    };
    let p0 = random_start(n, seed.wrapping_add(plan.start_seed_offset))?;
    methods
        .iter()
        .map(|&m| {
            let trace = solve(&inst, &p0, m, &plan.solver)?;
            let time_s = if plan.timing {
                let mut total = trace.wall_time_s;
                for _ in 1..plan.repeats_per_timing {
                    total += solve(&inst, &p0, m, &plan.solver)?.wall_time_s;
                }
                Some(total / plan.repeats_per_timing as f64)
            } else {
                None
            };
            Ok(summary(
                &m,
                trace.status.as_str().to_owned(),
                trace.iterations(),
                Some(trace.final_residual()),
                time_s,
            ))
        })
        .collect()
}

/// Rows for every (method, dimension) cell present in `runs`, in method
/// order then ascending dimension. Averages are taken over solved runs.
pub fn aggregate(methods: &[Method], runs: &[RunSummary]) -> Vec<BenchRow> {
    let mut dims: Vec<usize> = runs.iter().map(|r| r.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut rows = Vec::new();
    for m in methods {
        let label = m.label();
        for &n in &dims {
            let cell: Vec<&RunSummary> = runs
                .iter()
                .filter(|r| r.method == label && r.dim == n)
                .collect();
            if cell.is_empty() {
                continue;
            }
            let solved: Vec<&&RunSummary> = cell.iter().filter(|r| r.solved()).collect();
            let mean =
                |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
            let avg_iters_solved = mean(solved.iter().map(|r| r.iters as f64).collect());
            let times: Option<Vec<f64>> = solved.iter().map(|r| r.time_s).collect();
            rows.push(BenchRow {
                method: label.clone(),
                dimension: n,
                solved_percent: 100.0 * solved.len() as f64 / cell.len() as f64,
                avg_iters_solved,
                avg_time_s: times.and_then(mean),
                n_runs: cell.len(),
            });
        }
    }
    rows
}

/// `x` rounded to 6 significant digits, printed in shortest form.
pub fn format_sig6(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), format_sig6)
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            r.dimension,
            format_sig6(r.solved_percent),
            format_opt(r.avg_iters_solved),
            format_opt(r.avg_time_s),
            r.n_runs
        ));
    }
    out
}

/// Inverse of [`render_csv`], up to printing precision.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let bad = |line: &str| Error::InvalidParameter(format!("bad report line {line:?}"));
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidParameter("missing report header".into()));
    }
    let opt = |s: &str| -> std::result::Result<Option<f64>, std::num::ParseFloatError> {
        if s == "NA" {
            Ok(None)
        } else {
            s.parse().map(Some)
        }
    };
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            Ok(BenchRow {
                method: f[0].to_owned(),
                dimension: f[1].parse().map_err(|_| bad(line))?,
                solved_percent: f[2].parse().map_err(|_| bad(line))?,
                avg_iters_solved: opt(f[3]).map_err(|_| bad(line))?,
                avg_time_s: opt(f[4]).map_err(|_| bad(line))?,
                n_runs: f[5].parse().map_err(|_| bad(line))?,
            })
        })
        .collect()
}

pub fn write_report(rows: &[BenchRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to report".into()));
    }
    fs::write(path, render_csv(rows)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_runs_jsonl(runs: &[RunSummary], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for r in runs {
        let line = serde_json::to_string(r).expect("run summary serializes");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_runs_jsonl(path: &Path) -> Result<Vec<RunSummary>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|source| Error::Json {
                path: path.to_owned(),
                source,
            })
        })
        .collect()
}

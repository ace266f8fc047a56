//! `nsnewton`: generate AVVF instances, solve them, run benchmark plans and
//! audit instance files.
//!
//! Exit codes: 0 success, 1 solve or check failure, 2 usage, 3 generation
//! failure, 4 I/O or parse error.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use nsnewton::bench::{self, BenchPlan};
use nsnewton::field::{
    generate_instance_with, read_instance, smallest_singular_value, write_instance,
    AVVF_RESIDUAL_TOL,
};
use nsnewton::field::{random_start, MatrixGenerator, VectorField};
use nsnewton::solver::{solve, Method, SolverConfig};
use nsnewton::{AvvfInstance, Error};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GENERATION: u8 = 3;
const EXIT_IO: u8 = 4;

/// Offset between an instance seed and the default start seed, shared with `bench`.
const DEFAULT_START_OFFSET: u64 = 1_000_000;
/// `check` requires the smallest singular value to exceed this.
const CHECK_SIGMA_FLOOR: f64 = 3.0;

#[derive(Parser)]
#[command(
    name = "nsnewton",
    version,
    about = "Newton solvers for nonsmooth vector fields on the sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random AVVF instance with a planted singularity.
    Generate(GenerateArgs),
    /// Solve one instance from a random start.
    Solve(SolveArgs),
    /// Run a benchmark plan and write the aggregated report.
    Bench(BenchArgs),
    /// Verify the invariants of an instance file.
    Check(CheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.003)]
    density: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = GeneratorArg::Rotations)]
    generator: GeneratorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Rotations,
    RescaledRaw,
}

impl From<GeneratorArg> for MatrixGenerator {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Rotations => MatrixGenerator::Rotations,
            GeneratorArg::RescaledRaw => MatrixGenerator::RescaledRaw,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Nm,
    Gnm,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Gnm)]
    method: MethodArg,
    /// Nonmonotone memory for `gnm`.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Start seed; defaults to the instance seed plus 1000000. The instance
    /// seed itself starts at the planted solution.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the per-iteration trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// JSON file with solver settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long = "M", value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Also run the pure Newton method.
    #[arg(long)]
    include_nm: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Skip timing; time columns become NA and the CSV is reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Report CSV; printed to standard output when absent.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Per-run summaries as JSON lines.
    #[arg(long)]
    out_jsonl: Option<PathBuf>,
    /// JSON file with plan fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

fn classify(e: Error) -> Failure {
    let code = match e {
        Error::DegenerateMatrix { .. } => EXIT_GENERATION,
        Error::Io { .. } | Error::Json { .. } | Error::MalformedInstance(_) => EXIT_IO,
        Error::InvalidParameter(_) | Error::DimensionTooSmall(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    };
    Failure::new(code, e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn echo(params: serde_json::Value) {
    eprintln!("{params}");
}

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn cmd_generate(a: GenerateArgs) -> Result<u8, Failure> {
    let generator = MatrixGenerator::from(a.generator);
    echo(json!({
        "command": "generate", "n": a.n, "density": a.density, "seed": a.seed,
        "out": a.out, "generator": generator,
    }));
    let inst = generate_instance_with(a.n, a.density, a.seed, generator).map_err(classify)?;
    write_instance(&inst, &a.out).map_err(classify)?;
    println!("sigma_min {}", inst.sigma_min());
    println!("nnz {}", inst.matrix().nnz());
    Ok(0)
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    let mut cfg: SolverConfig = read_config(a.config.as_deref())?;
    if let Some(m) = a.m {
        cfg.nonmonotone_depth = m;
    }
    if let Some(tol) = a.tol {
        cfg.tol_residual = tol;
    }
    if let Some(it) = a.max_iters {
        cfg.max_iters = it;
    }
    cfg.validate().map_err(classify)?;
    let inst = read_instance(&a.instance).map_err(classify)?;
    let seed = a
        .seed
        .unwrap_or_else(|| inst.seed().wrapping_add(DEFAULT_START_OFFSET));
    let method = match a.method {
        MethodArg::Nm => Method::Nm,
        MethodArg::Gnm => Method::Gnm {
            depth: cfg.nonmonotone_depth,
        },
    };
    echo(json!({
        "command": "solve", "instance": a.instance, "method": method.label(), "seed": seed,
        "trace": a.trace, "config": cfg,
    }));

    let p0 = random_start(inst.dim(), seed).map_err(classify)?;
    let trace = solve(&inst, &p0, method, &cfg).map_err(classify)?;
    if let Some(path) = &a.trace {
        let file = fs::File::create(path)
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        trace
            .write_jsonl(BufWriter::new(file))
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    }
    println!("status {}", trace.status);
    println!("iters {}", trace.iterations());
    println!("residual {:e}", trace.final_residual());
    Ok(if trace.status.is_solved() {
        0
    } else {
        EXIT_FAILURE
    })
}

fn cmd_bench(a: BenchArgs) -> Result<u8, Failure> {
    let mut plan: BenchPlan = read_config(a.config.as_deref())?;
    if let Some(d) = a.dims {
        plan.dimensions = d;
    }
    if let Some(i) = a.instances {
        plan.instances_per_dim = i;
    }
    if let Some(m) = a.m {
        plan.m_values = m;
    }
    plan.include_pure_newton |= a.include_nm;
    if let Some(s) = a.seed {
        plan.base_seed = s;
    }
    if let Some(d) = a.density {
        plan.density = d;
    }
    if let Some(g) = a.generator {
        plan.generator = g.into();
    }
    if let Some(r) = a.repeats {
        plan.repeats_per_timing = r;
    }
    if let Some(t) = a.tol {
        plan.solver.tol_residual = t;
    }
    if let Some(it) = a.max_iters {
        plan.solver.max_iters = it;
    }
    if let Some(t) = a.threads {
        plan.threads = t;
    }
    if a.no_timing {
        plan.timing = false;
    }
    plan.validate().map_err(classify)?;
    echo(json!({
        "command": "bench", "plan": plan, "out_csv": a.out_csv, "out_jsonl": a.out_jsonl,
    }));

    let result = bench::run_batch(&plan).map_err(classify)?;
    match &a.out_csv {
        Some(path) => bench::write_report(&result.rows, path).map_err(classify)?,
        None => print!("{}", bench::render_csv(&result.rows)),
    }
    if let Some(path) = &a.out_jsonl {
        bench::write_runs_jsonl(&result.runs, path).map_err(classify)?;
    }
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> Result<u8, Failure> {
    echo(json!({ "command": "check", "instance": a.instance }));
    let text = fs::read_to_string(&a.instance)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.instance.display())))?;
    let inst = AvvfInstance::from_json(&text).map_err(classify)?;

    let sigma = smallest_singular_value(inst.matrix());
    let residual = inst.eval(inst.planted_solution()).map_err(classify)?.norm();
    let reencoded = inst.to_json();
    let round_trip = AvvfInstance::from_json(&reencoded)
        .map(|back| back.to_json() == reencoded && back == inst)
        .unwrap_or(false);

    let checks = [
        (
            "sigma_min",
            sigma > CHECK_SIGMA_FLOOR,
            format!(
                "{sigma} (recorded {}, required > {CHECK_SIGMA_FLOOR})",
                inst.sigma_min()
            ),
        ),
        (
            "planted_residual",
            residual <= AVVF_RESIDUAL_TOL,
            format!("{residual:e} (required <= {AVVF_RESIDUAL_TOL:e})"),
        ),
        (
            "rhs_matches_planted",
            inst.rhs_matches_planted(),
            "b == A p* - |p*| bitwise".to_owned(),
        ),
        (
            "round_trip",
            round_trip,
            "re-encoded file parses to identical bits".to_owned(),
        ),
    ];
    let mut ok = true;
    for (name, pass, detail) in &checks {
        println!("{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    Ok(if ok { 0 } else { EXIT_FAILURE })
}

//! `campsim`: command-line driver for the simulator.
//!
//! Exit status is 0 on success, 1 when a result disagrees with its oracle
//! and 2 for usage, configuration and I/O errors. `CAMPSIM_THREADS` caps
//! the worker pool.

mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use campsim_core::bench::{checksum_i32, OperandGen};
use campsim_core::costmodel::{design_space_report, load_cost_configs, model_cycles, reduction_ratio, CostConfig};
use campsim_core::gemm::blocked_counts;
use campsim_core::matrix::{write_binary, write_csv};
use campsim_core::report::{emit_report, render};
use campsim_core::shapes::{all_suites, DEFAULT_SEQ_LEN};
use campsim_core::{
    gemm_blocked, gemm_naive, run_bench, Backend, BenchConfig, BlockingParams, CampMode, Error, LayerShape,
    OverflowPolicy, ReportFormat,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "campsim", version, about = "Outer-product matmul extension simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the multiplier and the camp instruction against reference arithmetic.
    Verify {
        /// Also sweep every int4 quad-product combination and run more camp triples.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Multiply two seeded random matrices and check the result.
    Gemm(GemmArgs),
    /// Run benchmark suites and write a report.
    Bench(BenchArgs),
    /// Model cycles of one GeMM shape under each cost configuration.
    Cost(CostArgs),
}

#[derive(Args)]
struct Blocking {
    #[arg(long, default_value_t = BlockingParams::default().nc)]
    nc: usize,
    #[arg(long, default_value_t = BlockingParams::default().kc)]
    kc: usize,
    #[arg(long, default_value_t = BlockingParams::default().mc)]
    mc: usize,
}

impl Blocking {
    fn params(&self) -> Result<BlockingParams, Error> {
        BlockingParams::new(self.nc, self.kc, self.mc)
    }
}

#[derive(Args)]
struct GemmArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "int8")]
    mode: CampMode,
    /// Defaults to the camp backend for `--mode`.
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    strict_overflow: bool,
    /// Write C here (`.csv` for text, anything else for the binary format).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    blocking: Blocking,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated suite names, or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    suite: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values = ["camp_i8", "camp_i4"])]
    backend: Vec<Backend>,
    /// TOML file of `[[config]]` tables; the five presets when absent.
    #[arg(long)]
    cost_config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
    seq_len: usize,
    /// Shapes with more multiply-accumulates are verified on sampled tiles.
    #[arg(long, default_value_t = campsim_core::bench::DEFAULT_VERIFY_THRESHOLD)]
    verify_threshold: u64,
    #[arg(long, default_value_t = campsim_core::bench::DEFAULT_SAMPLE_TILES)]
    sample_tiles: usize,
    #[command(flatten)]
    blocking: Blocking,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Preset names, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "cost_config")]
    configs: Option<Vec<String>>,
    #[arg(long)]
    cost_config: Option<PathBuf>,
    #[command(flatten)]
    blocking: Blocking,
}

enum Failure {
    Usage(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Verification(_) | Error::Overflow(_) => Failure::Mismatch(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("CAMPSIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "CAMPSIM_THREADS must be a positive integer, got '{v}'"
            ))),
        },
    }
}

fn load_configs(path: Option<&PathBuf>, names: Option<&[String]>) -> Result<Vec<CostConfig>, Error> {
    match (path, names) {
        (Some(p), _) => load_cost_configs(p),
        (None, Some(names)) => names.iter().map(|n| CostConfig::preset(n)).collect(),
        (None, None) => Ok(CostConfig::presets()),
    }
}

fn cmd_verify(exhaustive: bool, seed: u64) -> Result<(), Failure> {
    let checks = verify::run_all(exhaustive, seed);
    let mut failed = 0;
    for c in &checks {
        let status = if c.failures == 0 { "ok" } else { "FAIL" };
        println!(
            "{status:4} {:48} {:>9} cases {:>6} failures",
            c.name, c.cases, c.failures
        );
        if let Some(f) = &c.first_failure {
            println!("     first failure: {f}");
        }
        failed += c.failures;
    }
    if failed > 0 {
        return Err(Failure::Mismatch(format!("{failed} cases disagree with the reference")));
    }
    Ok(())
}

fn cmd_gemm(args: &GemmArgs) -> Result<(), Failure> {
    let backend = args.backend.unwrap_or(match args.mode {
        CampMode::Int8 => Backend::CampI8,
        CampMode::Int4 => Backend::CampI4,
    });
    if backend == Backend::CampI4 && args.mode == CampMode::Int8 {
        return Err(Failure::Usage("camp_i4 needs --mode int4".into()));
    }
    let params = args.blocking.params()?;
    let shape = LayerShape::new("gemm", 0, "cli", args.m, args.n, args.k);
    shape.validate()?;
    let gen = OperandGen::new(args.seed, &shape, args.mode);
    let a = gen.a_rows(0, args.m, args.k);
    let b = gen.b(args.k, args.n);
    let policy = if args.strict_overflow {
        OverflowPolicy::Strict
    } else {
        OverflowPolicy::Wrap
    };
    let out = gemm_blocked(&a, &b, &params, backend, policy)?;
    let want: Vec<i32> = gemm_naive(&a, &b)?.data().iter().map(|&v| v as i32).collect();
    let checksum = checksum_i32(out.c.data());
    println!("shape     {}x{}x{} {} on {backend}", args.m, args.n, args.k, args.mode);
    println!("checksum  {checksum}");
    println!("oracle    {}", checksum_i32(&want));
    println!("overflow  {}", out.overflow);
    let c = out.counts;
    println!(
        "counts    loads={} stores={} camp={} alu={} broadcast={} scalar={} vector_total={}",
        c.vec_loads,
        c.vec_stores,
        c.camp_ops,
        c.vec_alu_ops,
        c.broadcast_ops,
        c.scalar_ops,
        c.vector_total()
    );
    if let Some(path) = &args.out {
        if path.extension().is_some_and(|e| e == "csv") {
            write_csv(&out.c, path)?;
        } else {
            write_binary(&out.c, path)?;
        }
    }
    if out.c.data() != &want[..] {
        return Err(Failure::Mismatch("result differs from the naive oracle".into()));
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let suites = if args.suite.iter().any(|s| s == "all") {
        all_suites().map(String::from).collect()
    } else {
        args.suite.clone()
    };
    let cfg = BenchConfig {
        suites,
        backends: args.backend.clone(),
        configs: load_configs(args.cost_config.as_ref(), None)?,
        seed: args.seed,
        threads: None,
        verify_threshold: args.verify_threshold,
        sample_tiles: args.sample_tiles,
        seq_len: args.seq_len,
        params: args.blocking.params()?,
    };
    let report = run_bench(&cfg)?;
    match &args.out {
        Some(path) => {
            emit_report(&report, args.format, path)?;
            eprintln!("wrote {} records to {}", report.records.len(), path.display());
        }
        None => std::io::stdout()
            .write_all(&render(&report, args.format))
            .map_err(|e| Failure::Usage(format!("stdout: {e}")))?,
    }
    Ok(())
}

fn cmd_cost(args: &CostArgs) -> Result<(), Failure> {
    let params = args.blocking.params()?;
    let configs = load_configs(args.cost_config.as_ref(), args.configs.as_deref())?;
    let shape = LayerShape::new("cost", 0, "cli", args.m, args.n, args.k);
    shape.validate()?;
    println!("shape {}x{}x{}", args.m, args.n, args.k);
    println!();
    println!("{:20} {:>14} {:>14}", "backend", "vector instr", "total instr");
    for be in Backend::ALL {
        let c = blocked_counts(args.m, args.n, args.k, &params, be)?;
        println!("{:20} {:>14} {:>14}", be.name(), c.vector_total(), c.total());
    }
    println!();
    println!(
        "reduction ratio (generic / camp_i8 vector instructions): {:.3}",
        reduction_ratio(&shape, &params)?
    );
    println!();
    println!(
        "{:10} {:>8} {:>16} {:>10} {:>10}",
        "config", "latency", "camp_i8 cycles", "speedup", "reference"
    );
    for row in design_space_report(&shape, &params, &configs)? {
        let reference = row.reference_speedup.map_or("-".to_string(), |r| format!("{r:.1}"));
        println!(
            "{:10} {:>8} {:>16} {:>10.3} {:>10}",
            row.config, row.camp_latency_cycles, row.cycles, row.speedup, reference
        );
    }
    let scalar = blocked_counts(args.m, args.n, args.k, &params, Backend::NaiveI32)?;
    if let Some(cfg) = configs.first() {
        println!();
        println!(
            "scalar baseline under {}: {} cycles",
            cfg.name,
            model_cycles(&scalar, cfg)
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Verify { exhaustive, seed } => cmd_verify(*exhaustive, *seed),
        Command::Gemm(a) => cmd_gemm(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Cost(a) => cmd_cost(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(m)) => {
            eprintln!("campsim: verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("campsim: {m}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front end: synthetic instance generation, coupled
//! factorization runs, parameter sweeps, projection-strategy comparisons
//! and the face-recognition pipeline, all with machine-readable outputs
//! and full run-config serialization for replay.

mod bench;
mod compare;
mod face;
mod gen;
mod output;
mod runs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupled_lowrank::sketch::{SketchPlan, DEFAULT_TRUNC_TOL};

#[derive(Parser)]
#[command(name = "coupled-lowrank", version, about = "Coupled low-rank matrix and tensor factorization toolkit")]
struct Cli {
    /// Base RNG seed (instance generation and sketching)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output path (file or directory depending on the subcommand)
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    /// Row output format for tabular results
    #[arg(long, global = true, value_enum, default_value_t = RowFormat::Csv)]
    format: RowFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RowFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance (or gallery) and write it to disk
    Gen(gen::GenArgs),
    /// Run one coupled matrix factorization on a stored pair
    Cmf(runs::CmfArgs),
    /// Run one coupled matrix-tensor factorization on stored data
    Cmtf(runs::CmtfArgs),
    /// Sweep sketch parameters against the basic benchmark
    Bench(bench::BenchArgs),
    /// Paired comparison experiments (projection strategies; SVD vs ALS)
    Compare(compare::CompareArgs),
    /// Face recognition over a PGM gallery and query set
    Facerec(face::FacerecArgs),
}

/// Sketch strategy selection shared by the run-style subcommands.
#[derive(Args, Clone)]
struct PlanArgs {
    /// Approximation rank k
    #[arg(long)]
    k: usize,

    /// Basis construction strategy
    #[arg(long, value_enum, default_value_t = PlanKind::Basic)]
    plan: PlanKind,

    /// Depth parameter q (RSI and RBKI)
    #[arg(long)]
    q: Option<usize>,

    /// Block size ell (RBKI)
    #[arg(long)]
    ell: Option<usize>,

    /// Rank-revealing truncation tolerance for the joint basis
    #[arg(long, default_value_t = DEFAULT_TRUNC_TOL)]
    trunc_tol: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PlanKind {
    Basic,
    Simple,
    Rsi,
    Rbki,
}

impl PlanKind {
    fn label(self) -> &'static str {
        match self {
            PlanKind::Basic => "basic",
            PlanKind::Simple => "randomized",
            PlanKind::Rsi => "rsi",
            PlanKind::Rbki => "rbki",
        }
    }
}

impl PlanArgs {
    fn to_plan(&self, seed: u64) -> anyhow::Result<SketchPlan> {
        let plan = match self.plan {
            PlanKind::Basic => SketchPlan::basic(self.k),
            PlanKind::Simple => SketchPlan::simple(self.k, seed),
            PlanKind::Rsi => {
                let q = self.q.ok_or_else(|| anyhow::anyhow!("--plan rsi needs --q"))?;
                SketchPlan::rsi(self.k, q, seed)
            }
            PlanKind::Rbki => {
                let q = self.q.ok_or_else(|| anyhow::anyhow!("--plan rbki needs --q"))?;
                let ell = self.ell.ok_or_else(|| anyhow::anyhow!("--plan rbki needs --ell"))?;
                SketchPlan::rbki(self.k, ell, q, seed)
            }
        };
        let plan = plan.with_trunc_tol(self.trunc_tol);
        plan.validate()?;
        Ok(plan)
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("COUPLED_LOWRANK_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match &cli.command {
        Command::Gen(args) => gen::run(args, &cli),
        Command::Cmf(args) => runs::run_cmf(args, &cli),
        Command::Cmtf(args) => runs::run_cmtf(args, &cli),
        Command::Bench(args) => bench::run(args, &cli),
        Command::Compare(args) => compare::run(args, &cli),
        Command::Facerec(args) => face::run(args, &cli),
    };
    if let Err(err) = result {
        let kind = err
            .downcast_ref::<coupled_lowrank::Error>()
            .map(|e| match e {
                coupled_lowrank::Error::Shape(_) => "shape",
                coupled_lowrank::Error::Param(_) => "param",
                coupled_lowrank::Error::NonFinite(_) => "non_finite",
                coupled_lowrank::Error::Degenerate { .. } => "degenerate",
                coupled_lowrank::Error::Format { .. } => "format",
                coupled_lowrank::Error::Io(_) => "io",
            })
            .unwrap_or("error");
        let record = serde_json::json!({ "error": { "kind": kind, "message": err.to_string() } });
        eprintln!("{record}");
        std::process::exit(1);
    }
}

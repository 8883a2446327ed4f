//! `cmf` and `cmtf` subcommands: one factorization run on stored data,
//! emitting a table row with the columns of the reported experiments
//! (algorithm, p, ell, q, err_x, err_y, total_time_s, cmf_time_s).

use clap::{Args, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

use coupled_lowrank::cmf::{cmf_with_plan, relative_errors};
use coupled_lowrank::cmtf::{
    cmtf_cp_als, cmtf_cp_als_randomized, cmtf_tucker, cp_errors, tucker_errors, AlsOptions,
};
use coupled_lowrank::io;
use coupled_lowrank::sketch::Strategy;

use crate::output::{cell_f64, cell_usize, write_table};
use crate::{PlanArgs, PlanKind};

pub const RUN_HEADER: [&str; 8] =
    ["algorithm", "p", "ell", "q", "err_x", "err_y", "total_time_s", "cmf_time_s"];

pub struct RunRow {
    pub algorithm: String,
    pub p: Option<usize>,
    pub ell: Option<usize>,
    pub q: Option<usize>,
    pub err_x: f64,
    pub err_y: f64,
    pub total_time_s: f64,
    pub cmf_time_s: f64,
}

impl RunRow {
    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            cell_usize(self.p),
            cell_usize(self.ell),
            cell_usize(self.q),
            cell_f64(Some(self.err_x)),
            cell_f64(Some(self.err_y)),
            cell_f64(Some(self.total_time_s)),
            cell_f64(Some(self.cmf_time_s)),
        ]
    }
}

pub fn plan_cells(strategy: Strategy, achieved_p: usize) -> (Option<usize>, Option<usize>, Option<usize>) {
    match strategy {
        // the basic algorithm reports no sketch parameters (dash cells)
        Strategy::None => (None, None, None),
        Strategy::Simple => (Some(achieved_p), None, None),
        Strategy::Rsi { q } => (Some(achieved_p), None, Some(q)),
        Strategy::Rbki { ell, q } => (Some(achieved_p), Some(ell), Some(q)),
    }
}

#[derive(Args)]
pub struct CmfArgs {
    /// Path to X (.dmt or .dmb)
    #[arg(long)]
    x: PathBuf,

    /// Path to Y (.dmt or .dmb)
    #[arg(long)]
    y: PathBuf,

    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Serialize)]
struct CmfConfig {
    subcommand: &'static str,
    x: String,
    y: String,
    k: usize,
    plan: String,
    q: Option<usize>,
    ell: Option<usize>,
    trunc_tol: f64,
    seed: u64,
    out: String,
    format: &'static str,
}

fn format_label(f: crate::RowFormat) -> &'static str {
    match f {
        crate::RowFormat::Csv => "csv",
        crate::RowFormat::Json => "json",
    }
}

pub fn run_cmf(args: &CmfArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out = crate::output::require_out(cli, "cmf")?;
    let x = io::read_matrix(&args.x)?;
    let y = io::read_matrix(&args.y)?;
    let plan = args.plan.to_plan(cli.seed)?;
    let r = cmf_with_plan(&x, &y, &plan)?;
    let (err_x, err_y) = relative_errors(&x, &y, &r)?;
    let (p, ell, q) = plan_cells(plan.strategy, r.achieved_p);
    let row = RunRow {
        algorithm: args.plan.plan.label().to_string(),
        p,
        ell,
        q,
        err_x,
        err_y,
        total_time_s: r.elapsed_total_s,
        cmf_time_s: r.elapsed_core_s,
    };
    let config = CmfConfig {
        subcommand: "cmf",
        x: args.x.display().to_string(),
        y: args.y.display().to_string(),
        k: args.plan.k,
        plan: args.plan.plan.label().to_string(),
        q: args.plan.q,
        ell: args.plan.ell,
        trunc_tol: args.plan.trunc_tol,
        seed: cli.seed,
        out: out.display().to_string(),
        format: format_label(cli.format),
    };
    write_table(&out, cli.format, &config, &RUN_HEADER, &[row.to_fields()])
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum TensorFormatArg {
    Tucker,
    Cp,
}

#[derive(Args)]
pub struct CmtfArgs {
    /// Path to the tensor (.dtt or .dtb)
    #[arg(long)]
    tensor: PathBuf,

    /// Path to Y (.dmt or .dmb)
    #[arg(long)]
    y: PathBuf,

    /// Coupled tensor format: Tucker (SVD route) or CP (ALS route)
    #[arg(long, value_enum, default_value_t = TensorFormatArg::Tucker)]
    tensor_format: TensorFormatArg,

    #[command(flatten)]
    plan: PlanArgs,

    /// ALS sweep cap (CP format)
    #[arg(long, default_value_t = 500)]
    max_iters: usize,

    /// ALS relative objective-change stopping tolerance (CP format)
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,

    /// ALS factor initialization seed (CP format)
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
}

#[derive(Serialize)]
struct CmtfConfig {
    subcommand: &'static str,
    tensor: String,
    y: String,
    tensor_format: &'static str,
    k: usize,
    plan: String,
    q: Option<usize>,
    ell: Option<usize>,
    trunc_tol: f64,
    seed: u64,
    max_iters: usize,
    rel_tol: f64,
    init_seed: u64,
    out: String,
    format: &'static str,
}

pub fn run_cmtf(args: &CmtfArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out = crate::output::require_out(cli, "cmtf")?;
    let t = io::read_tensor(&args.tensor)?;
    let y = io::read_matrix(&args.y)?;
    let plan = args.plan.to_plan(cli.seed)?;
    let row = match args.tensor_format {
        TensorFormatArg::Tucker => {
            let r = cmtf_tucker(&t, &y, &plan)?;
            let (err_x, err_y) = tucker_errors(&t, &y, &r)?;
            let (p, ell, q) = plan_cells(plan.strategy, r.achieved_p);
            RunRow {
                algorithm: args.plan.plan.label().to_string(),
                p,
                ell,
                q,
                err_x,
                err_y,
                total_time_s: r.elapsed_total_s,
                cmf_time_s: r.elapsed_core_s,
            }
        }
        TensorFormatArg::Cp => {
            let opts = AlsOptions { max_iters: args.max_iters, rel_tol: args.rel_tol };
            let r = if args.plan.plan == PlanKind::Basic {
                cmtf_cp_als(&t, &y, plan.k, args.init_seed, &opts)?
            } else {
                cmtf_cp_als_randomized(&t, &y, &plan, args.init_seed, &opts)?
            };
            let (err_x, err_y) = cp_errors(&t, &y, &r)?;
            let (p, ell, q) = plan_cells(plan.strategy, r.achieved_p);
            RunRow {
                algorithm: args.plan.plan.label().to_string(),
                p,
                ell,
                q,
                err_x,
                err_y,
                total_time_s: r.elapsed_total_s,
                cmf_time_s: r.elapsed_core_s,
            }
        }
    };
    let config = CmtfConfig {
        subcommand: "cmtf",
        tensor: args.tensor.display().to_string(),
        y: args.y.display().to_string(),
        tensor_format: match args.tensor_format {
            TensorFormatArg::Tucker => "tucker",
            TensorFormatArg::Cp => "cp",
        },
        k: args.plan.k,
        plan: args.plan.plan.label().to_string(),
        q: args.plan.q,
        ell: args.plan.ell,
        trunc_tol: args.plan.trunc_tol,
        seed: cli.seed,
        max_iters: args.max_iters,
        rel_tol: args.rel_tol,
        init_seed: args.init_seed,
        out: out.display().to_string(),
        format: format_label(cli.format),
    };
    write_table(&out, cli.format, &config, &RUN_HEADER, &[row.to_fields()])
}

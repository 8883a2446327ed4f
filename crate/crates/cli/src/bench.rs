//! `bench` subcommand: sweep the sketch depth against the basic benchmark
//! on one generated instance, reporting errors, subspace dimensions and
//! timings per (q, seed) pair. These are the plotted quantities of the
//! reported error-versus-dimension figures.

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use coupled_lowrank::cmf::{cmf_with_plan, relative_errors};
use coupled_lowrank::cmtf::{cmtf_tucker, tucker_errors};
use coupled_lowrank::matrix::Matrix;
use coupled_lowrank::sketch::{SketchPlan, Strategy};
use coupled_lowrank::tensor::Tensor3;
use coupled_lowrank::testgen::Instance;

use crate::output::{cell_f64, cell_usize, write_table};
use crate::{PlanArgs, PlanKind};

pub const BENCH_HEADER: [&str; 11] = [
    "algorithm",
    "ell",
    "q",
    "k",
    "effective_cols",
    "max_cols",
    "err_x",
    "err_y",
    "total_time_s",
    "cmf_time_s",
    "seed",
];

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    gen: crate::gen::GenArgs,

    #[command(flatten)]
    plan: PlanArgs,

    /// First sweep depth (inclusive)
    #[arg(long)]
    q_min: usize,

    /// Last sweep depth (inclusive)
    #[arg(long)]
    q_max: usize,

    /// Sweep stride
    #[arg(long, default_value_t = 1)]
    q_step: usize,

    /// Sketch seeds per depth
    #[arg(long, default_value_t = 1)]
    seeds: usize,
}

#[derive(Serialize)]
struct BenchConfig {
    subcommand: &'static str,
    instance: coupled_lowrank::testgen::InstanceSpec,
    k: usize,
    plan: String,
    ell: Option<usize>,
    q_min: usize,
    q_max: usize,
    q_step: usize,
    seeds: usize,
    trunc_tol: f64,
    out: String,
}

enum Data {
    Pair(Matrix, Matrix),
    Tensor(Tensor3, Matrix),
}

struct Outcome {
    effective_cols: usize,
    err_x: f64,
    err_y: f64,
    total_s: f64,
    core_s: f64,
}

fn run_plan(data: &Data, plan: &SketchPlan) -> anyhow::Result<Outcome> {
    Ok(match data {
        Data::Pair(x, y) => {
            let r = cmf_with_plan(x, y, plan)?;
            let (err_x, err_y) = relative_errors(x, y, &r)?;
            Outcome {
                effective_cols: plan.k + r.achieved_p,
                err_x,
                err_y,
                total_s: r.elapsed_total_s,
                core_s: r.elapsed_core_s,
            }
        }
        Data::Tensor(t, y) => {
            let r = cmtf_tucker(t, y, plan)?;
            let (err_x, err_y) = tucker_errors(t, y, &r)?;
            Outcome {
                effective_cols: plan.k + r.achieved_p,
                err_x,
                err_y,
                total_s: r.elapsed_total_s,
                core_s: r.elapsed_core_s,
            }
        }
    })
}

pub fn run(args: &BenchArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out = crate::output::require_out(cli, "bench")?;
    if args.q_min == 0 || args.q_min > args.q_max || args.q_step == 0 {
        anyhow::bail!(
            "empty or invalid sweep range: q_min={}, q_max={}, q_step={}",
            args.q_min,
            args.q_max,
            args.q_step
        );
    }
    if args.seeds == 0 {
        anyhow::bail!("--seeds must be at least 1");
    }
    let spec = args.gen.to_spec(cli.seed)?;
    let data = match spec.generate()? {
        Instance::MatrixPair(x, y) => Data::Pair(x, y),
        Instance::TensorPair(t, y) => Data::Tensor(t, y),
    };
    let k = args.plan.k;

    // benchmark reference row: the basic algorithm on the same instance
    let basic = run_plan(&data, &SketchPlan::basic(k))?;
    let mut rows: Vec<Vec<String>> = vec![vec![
        "basic".into(),
        String::new(),
        String::new(),
        k.to_string(),
        String::new(),
        String::new(),
        cell_f64(Some(basic.err_x)),
        cell_f64(Some(basic.err_y)),
        cell_f64(Some(basic.total_s)),
        cell_f64(Some(basic.core_s)),
        String::new(),
    ]];

    let qs: Vec<usize> = (args.q_min..=args.q_max).step_by(args.q_step).collect();
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for &q in &qs {
        for s in 0..args.seeds {
            jobs.push((q, s as u64));
        }
    }
    let plan_kind = args.plan.plan;
    let ell = args.plan.ell;
    let trunc_tol = args.plan.trunc_tol;
    let results: Vec<anyhow::Result<Vec<String>>> = jobs
        .par_iter()
        .map(|&(q, sketch_seed)| {
            let plan = match plan_kind {
                PlanKind::Basic => anyhow::bail!("bench sweeps need a randomized --plan"),
                PlanKind::Simple => SketchPlan::simple(k, sketch_seed),
                PlanKind::Rsi => SketchPlan::rsi(k, q, sketch_seed),
                PlanKind::Rbki => {
                    let ell = ell.ok_or_else(|| anyhow::anyhow!("--plan rbki needs --ell"))?;
                    SketchPlan::rbki(k, ell, q, sketch_seed)
                }
            }
            .with_trunc_tol(trunc_tol);
            plan.validate()?;
            let o = run_plan(&data, &plan)?;
            let max_cols = match plan.strategy {
                Strategy::Rbki { ell, q } => 2 * ell * q,
                _ => 2 * k,
            };
            Ok(vec![
                plan_kind.label().to_string(),
                cell_usize(match plan.strategy {
                    Strategy::Rbki { ell, .. } => Some(ell),
                    _ => None,
                }),
                cell_usize(match plan.strategy {
                    Strategy::Rbki { q, .. } | Strategy::Rsi { q } => Some(q),
                    _ => None,
                }),
                k.to_string(),
                o.effective_cols.to_string(),
                max_cols.to_string(),
                cell_f64(Some(o.err_x)),
                cell_f64(Some(o.err_y)),
                cell_f64(Some(o.total_s)),
                cell_f64(Some(o.core_s)),
                sketch_seed.to_string(),
            ])
        })
        .collect();
    for r in results {
        rows.push(r?);
    }

    let config = BenchConfig {
        subcommand: "bench",
        instance: spec,
        k,
        plan: plan_kind.label().to_string(),
        ell: args.plan.ell,
        q_min: args.q_min,
        q_max: args.q_max,
        q_step: args.q_step,
        seeds: args.seeds,
        trunc_tol: args.plan.trunc_tol,
        out: out.display().to_string(),
    };
    write_table(&out, cli.format, &config, &BENCH_HEADER, &rows)
}

//! `compare` subcommand: paired objective comparisons over many random
//! instances. `proj` replays the projection-strategy experiment (joint
//! reorthogonalized basis versus one QR of a sketched concatenation);
//! `svd-als` pits the direct Tucker-route solution against CP-ALS.

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use coupled_lowrank::cmf::{cmf_basic, cmf_objective, cmf_randomized, CmfResult};
use coupled_lowrank::cmtf::{cmtf_cp_als, cmtf_tucker, cp_objective, tucker_objective, AlsOptions};
use coupled_lowrank::matrix::{hcat, Matrix};
use coupled_lowrank::sketch::{gaussian, seeded_rng, thin_qr, SketchPlan};
use coupled_lowrank::testgen;

use crate::output::{cell_f64, write_table};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Joint basis vs single sketch of the concatenation (matrix pairs)
    Proj,
    /// Direct SVD route vs CP-ALS (tensor-matrix pairs)
    SvdAls,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,

    #[arg(long, default_value_t = 100)]
    trials: usize,

    #[arg(long)]
    k: Option<usize>,

    // proj dims (defaults: the reported experiment)
    #[arg(long, default_value_t = 500)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    n1: usize,
    #[arg(long, default_value_t = 300)]
    n2: usize,
    #[arg(long, default_value_t = 100)]
    r1: usize,
    #[arg(long, default_value_t = 150)]
    r2: usize,

    // svd-als dims (defaults: the reported experiment)
    #[arg(long, default_value_t = 50)]
    tn2: usize,
    #[arg(long, default_value_t = 20)]
    tn3: usize,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,

    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
}

#[derive(Serialize)]
struct CompareConfig {
    subcommand: &'static str,
    experiment: &'static str,
    trials: usize,
    k: usize,
    dims: serde_json::Value,
    seed: u64,
    out: String,
}

/// The straightforward strategy the joint basis is measured against:
/// sketch the concatenation `[X Y]` once, QR, project. Deliberately not
/// part of the library API.
fn augmented_single_sketch(x: &Matrix, y: &Matrix, k: usize, seed: u64) -> anyhow::Result<CmfResult> {
    let mut rng = seeded_rng(seed);
    let concat = hcat(x, y)?;
    let omega = gaussian(concat.ncols(), k, &mut rng)?;
    let (q, _) = thin_qr(&(&concat * omega))?;
    let core = cmf_basic(&q.tr_mul(x), &q.tr_mul(y), k)?;
    Ok(CmfResult {
        u: &q * &core.u,
        v: core.v,
        w: core.w,
        achieved_p: 0,
        elapsed_total_s: 0.0,
        elapsed_core_s: 0.0,
    })
}

pub fn run(args: &CompareArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out = crate::output::require_out(cli, "compare")?;
    if args.trials == 0 {
        anyhow::bail!("--trials must be at least 1");
    }
    let (rows, header, config) = match args.experiment {
        Experiment::Proj => {
            let k = args.k.unwrap_or(30);
            let header: Vec<&str> = vec!["trial", "seed", "objective_joint", "objective_augmented"];
            let rows: Vec<anyhow::Result<Vec<String>>> = (0..args.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = cli.seed.wrapping_add(trial as u64);
                    let (x, y) =
                        testgen::synthetic1(args.m, args.n1, args.n2, args.r1, args.r2, seed)?;
                    let joint = cmf_randomized(&x, &y, &SketchPlan::simple(k, seed))?;
                    let aug = augmented_single_sketch(&x, &y, k, seed)?;
                    let fj = cmf_objective(&x, &y, &joint)?;
                    let fa = cmf_objective(&x, &y, &aug)?;
                    Ok(vec![
                        trial.to_string(),
                        seed.to_string(),
                        cell_f64(Some(fj)),
                        cell_f64(Some(fa)),
                    ])
                })
                .collect();
            let config = CompareConfig {
                subcommand: "compare",
                experiment: "proj",
                trials: args.trials,
                k,
                dims: serde_json::json!({
                    "m": args.m, "n1": args.n1, "n2": args.n2, "r1": args.r1, "r2": args.r2
                }),
                seed: cli.seed,
                out: out.display().to_string(),
            };
            (rows, header, config)
        }
        Experiment::SvdAls => {
            let k = args.k.unwrap_or(args.r);
            let header: Vec<&str> =
                vec!["trial", "seed", "objective_tucker", "objective_cp_als", "als_iterations"];
            let opts = AlsOptions { max_iters: args.max_iters, rel_tol: args.rel_tol };
            let rows: Vec<anyhow::Result<Vec<String>>> = (0..args.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = cli.seed.wrapping_add(trial as u64);
                    let (t, y) = testgen::planted_cp(args.m, args.tn2, args.tn3, args.n, args.r, seed)?;
                    let tucker = cmtf_tucker(&t, &y, &SketchPlan::basic(k))?;
                    let als = cmtf_cp_als(&t, &y, k, seed, &opts)?;
                    let ft = tucker_objective(&t, &y, &tucker)?;
                    let fa = cp_objective(&t, &y, &als)?;
                    Ok(vec![
                        trial.to_string(),
                        seed.to_string(),
                        cell_f64(Some(ft)),
                        cell_f64(Some(fa)),
                        als.iterations.to_string(),
                    ])
                })
                .collect();
            let config = CompareConfig {
                subcommand: "compare",
                experiment: "svd-als",
                trials: args.trials,
                k,
                dims: serde_json::json!({
                    "m": args.m, "n2": args.tn2, "n3": args.tn3, "n": args.n, "r": args.r
                }),
                seed: cli.seed,
                out: out.display().to_string(),
            };
            (rows, header, config)
        }
    };
    let mut table = Vec::with_capacity(rows.len());
    for r in rows {
        table.push(r?);
    }
    write_table(&out, cli.format, &config, &header, &table)
}

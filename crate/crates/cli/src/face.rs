//! `facerec` subcommand: classify a query directory against a PGM gallery
//! and report per-person and total success rates. `--all-variants` runs
//! the full twelve-way sweep (three modes, four plans) into one table.

use clap::{Args, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use coupled_lowrank::cmtf::AlsOptions;
use coupled_lowrank::facerec::{evaluate, load_pgm, Gallery, RecognitionMode};
use coupled_lowrank::matrix::Matrix;
use coupled_lowrank::sketch::SketchPlan;

use crate::output::write_run_config;
use crate::{PlanArgs, PlanKind};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cmf,
    CmtfTucker,
    CmtfCp,
}

impl ModeArg {
    fn to_mode(self) -> RecognitionMode {
        match self {
            ModeArg::Cmf => RecognitionMode::Cmf,
            ModeArg::CmtfTucker => RecognitionMode::CmtfTucker,
            ModeArg::CmtfCp => RecognitionMode::CmtfCp,
        }
    }
}

#[derive(Args)]
pub struct FacerecArgs {
    /// Gallery directory: <gallery>/<person>/<image>.pgm
    #[arg(long)]
    gallery: PathBuf,

    /// Query directory with the same person-directory layout
    #[arg(long)]
    queries: PathBuf,

    /// Which coupled decomposition drives the classification
    #[arg(long, value_enum, default_value_t = ModeArg::Cmf)]
    mode: ModeArg,

    #[command(flatten)]
    plan: PlanArgs,

    /// ALS sweep cap (CP mode)
    #[arg(long, default_value_t = 500)]
    max_iters: usize,

    /// ALS stopping tolerance (CP mode)
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,

    /// Run all twelve mode/plan variants and emit a rate table instead of
    /// a single report
    #[arg(long)]
    all_variants: bool,
}

fn load_queries(dir: &Path) -> anyhow::Result<Vec<(String, Matrix)>> {
    let mut person_dirs: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    person_dirs.sort();
    let mut queries = Vec::new();
    for pd in person_dirs {
        let label = pd
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| anyhow::anyhow!("bad query directory name"))?
            .to_string();
        let mut files: Vec<_> = std::fs::read_dir(&pd)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("pgm"))
            .collect();
        files.sort();
        for f in files {
            queries.push((label.clone(), load_pgm(&f)?));
        }
    }
    if queries.is_empty() {
        anyhow::bail!("no .pgm queries found under {}", dir.display());
    }
    Ok(queries)
}

#[derive(Serialize)]
struct FacerecParams {
    subcommand: &'static str,
    gallery: String,
    queries: String,
    mode: String,
    plan: String,
    k: usize,
    q: Option<usize>,
    ell: Option<usize>,
    seed: u64,
    trunc_tol: f64,
    max_iters: usize,
    rel_tol: f64,
}

#[derive(Serialize)]
struct ReportDoc {
    params: FacerecParams,
    rows: Vec<coupled_lowrank::facerec::QueryOutcome>,
    per_person: BTreeMap<String, f64>,
    total_rate: f64,
}

pub fn run(args: &FacerecArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out = crate::output::require_out(cli, "facerec")?;
    let gallery = Gallery::load_dir(&args.gallery)?;
    let queries = load_queries(&args.queries)?;
    let als = AlsOptions { max_iters: args.max_iters, rel_tol: args.rel_tol };

    if args.all_variants {
        return run_all_variants(args, cli, &gallery, &queries, &als, &out);
    }

    let plan = args.plan.to_plan(cli.seed)?;
    let report = evaluate(&gallery, &queries, &plan, args.mode.to_mode(), &als)?;
    let params = FacerecParams {
        subcommand: "facerec",
        gallery: args.gallery.display().to_string(),
        queries: args.queries.display().to_string(),
        mode: args.mode.to_mode().label().to_string(),
        plan: args.plan.plan.label().to_string(),
        k: args.plan.k,
        q: args.plan.q,
        ell: args.plan.ell,
        seed: cli.seed,
        trunc_tol: args.plan.trunc_tol,
        max_iters: args.max_iters,
        rel_tol: args.rel_tol,
    };
    let doc = ReportDoc {
        params,
        rows: report.rows,
        per_person: report.per_person,
        total_rate: report.total_rate,
    };
    std::fs::write(&out, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn run_all_variants(
    args: &FacerecArgs,
    cli: &crate::Cli,
    gallery: &Gallery,
    queries: &[(String, Matrix)],
    als: &AlsOptions,
    out: &Path,
) -> anyhow::Result<()> {
    let k = args.plan.k;
    let q = args.plan.q.unwrap_or(2);
    let ell = args.plan.ell.unwrap_or(k);
    let plans: Vec<(PlanKind, SketchPlan)> = vec![
        (PlanKind::Basic, SketchPlan::basic(k)),
        (PlanKind::Simple, SketchPlan::simple(k, cli.seed)),
        (PlanKind::Rsi, SketchPlan::rsi(k, q, cli.seed)),
        (PlanKind::Rbki, SketchPlan::rbki(k, ell, q, cli.seed)),
    ];
    let modes = [RecognitionMode::Cmf, RecognitionMode::CmtfTucker, RecognitionMode::CmtfCp];

    let mut header: Vec<String> = vec!["mode".into(), "plan".into()];
    for p in gallery.persons() {
        header.push(p.clone());
    }
    header.push("total_rate".into());

    let mut rows: Vec<Vec<String>> = Vec::with_capacity(12);
    for mode in modes {
        for (kind, plan) in &plans {
            let report = evaluate(gallery, queries, plan, mode, als)?;
            let mut row = vec![mode.label().to_string(), kind.label().to_string()];
            for p in gallery.persons() {
                row.push(format!("{:.4}", report.per_person.get(p).copied().unwrap_or(f64::NAN)));
            }
            row.push(format!("{:.4}", report.total_rate));
            rows.push(row);
        }
    }

    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let config = serde_json::json!({
        "subcommand": "facerec",
        "all_variants": true,
        "gallery": args.gallery.display().to_string(),
        "queries": args.queries.display().to_string(),
        "k": k,
        "q": q,
        "ell": ell,
        "seed": cli.seed,
        "max_iters": args.max_iters,
        "rel_tol": args.rel_tol,
    });
    match cli.format {
        crate::RowFormat::Csv => {
            let mut w = csv::Writer::from_path(out)?;
            w.write_record(&header_refs)?;
            for row in &rows {
                w.write_record(row)?;
            }
            w.flush()?;
            write_run_config(out, &config)?;
        }
        crate::RowFormat::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    header_refs
                        .iter()
                        .zip(row)
                        .map(|(k, v)| ((*k).to_string(), serde_json::Value::String(v.clone())))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            let doc = serde_json::json!({ "config": config, "rows": rows_json });
            std::fs::write(out, serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

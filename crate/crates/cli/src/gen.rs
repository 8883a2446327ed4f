//! `gen` subcommand: materialize a synthetic instance or gallery.

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

use coupled_lowrank::facerec::{synthetic_gallery, write_pgm};
use coupled_lowrank::io;
use coupled_lowrank::matrix::Matrix;
use coupled_lowrank::testgen::{Instance, InstanceSpec};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Synthetic1,
    Synthetic2,
    Synthetic3,
    Synthetic4,
    Synthetic5,
    TensorTest,
    PlantedCp,
    Gallery,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,

    /// Write text formats (.dmt/.dtt) instead of binary
    #[arg(long)]
    text: bool,

    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    n3: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    r1: Option<usize>,
    #[arg(long)]
    r2: Option<usize>,
    #[arg(long)]
    r3: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    shared: Option<usize>,

    // gallery-family parameters
    #[arg(long)]
    persons: Option<usize>,
    #[arg(long)]
    images_per_person: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    base_rank: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    queries_per_person: Option<usize>,
}

#[derive(Serialize)]
struct Manifest {
    #[serde(flatten)]
    spec: InstanceSpec,
    files: BTreeMap<String, String>,
}

fn need<T: Copy>(v: Option<T>, name: &str, family: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow::anyhow!("--family {family} needs --{name}"))
}

impl GenArgs {
    pub(crate) fn to_spec(&self, seed: u64) -> anyhow::Result<InstanceSpec> {
        Ok(match self.family {
            Family::Synthetic1 => InstanceSpec::Synthetic1 {
                m: need(self.m, "m", "synthetic1")?,
                n1: need(self.n1, "n1", "synthetic1")?,
                n2: need(self.n2, "n2", "synthetic1")?,
                r1: need(self.r1, "r1", "synthetic1")?,
                r2: need(self.r2, "r2", "synthetic1")?,
                seed,
            },
            Family::Synthetic2 => InstanceSpec::Synthetic2 {
                n: need(self.n, "n", "synthetic2")?,
                r: need(self.r, "r", "synthetic2")?,
                d: need(self.d, "d", "synthetic2")?,
                c: need(self.c, "c", "synthetic2")?,
                seed,
            },
            Family::Synthetic3 => InstanceSpec::Synthetic3 {
                m: need(self.m, "m", "synthetic3")?,
                n: need(self.n, "n", "synthetic3")?,
                r: need(self.r, "r", "synthetic3")?,
                seed,
            },
            Family::Synthetic4 => InstanceSpec::Synthetic4 {
                m: need(self.m, "m", "synthetic4")?,
                n1: need(self.n1, "n1", "synthetic4")?,
                n2: need(self.n2, "n2", "synthetic4")?,
                r2: need(self.r2, "r2", "synthetic4")?,
                seed,
            },
            Family::Synthetic5 => InstanceSpec::Synthetic5 {
                m: need(self.m, "m", "synthetic5")?,
                n1: need(self.n1, "n1", "synthetic5")?,
                n2: need(self.n2, "n2", "synthetic5")?,
                shared: need(self.shared, "shared", "synthetic5")?,
                seed,
            },
            Family::TensorTest => InstanceSpec::TensorTest {
                n: need(self.n, "n", "tensor-test")?,
                r: need(self.r, "r", "tensor-test")?,
                d: need(self.d, "d", "tensor-test")?,
                r1: need(self.r1, "r1", "tensor-test")?,
                r2: need(self.r2, "r2", "tensor-test")?,
                r3: need(self.r3, "r3", "tensor-test")?,
                seed,
            },
            Family::PlantedCp => InstanceSpec::PlantedCp {
                m: need(self.m, "m", "planted-cp")?,
                n2: need(self.n2, "n2", "planted-cp")?,
                n3: need(self.n3, "n3", "planted-cp")?,
                n: need(self.n, "n", "planted-cp")?,
                r: need(self.r, "r", "planted-cp")?,
                seed,
            },
            Family::Gallery => anyhow::bail!("gallery family is handled separately"),
        })
    }
}

pub fn run(args: &GenArgs, cli: &crate::Cli) -> anyhow::Result<()> {
    let out_dir = crate::output::require_out(cli, "gen")?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    if args.family == Family::Gallery {
        return gen_gallery(args, cli, &out_dir);
    }
    let spec = args.to_spec(cli.seed)?;
    let instance = spec.generate()?;
    let mut files = BTreeMap::new();
    match &instance {
        Instance::MatrixPair(x, y) => {
            let (xf, yf) = if args.text { ("X.dmt", "Y.dmt") } else { ("X.dmb", "Y.dmb") };
            io::write_matrix(out_dir.join(xf), x)?;
            io::write_matrix(out_dir.join(yf), y)?;
            files.insert("x".into(), xf.into());
            files.insert("y".into(), yf.into());
        }
        Instance::TensorPair(t, y) => {
            let (tf, yf) = if args.text { ("T.dtt", "Y.dmt") } else { ("T.dtb", "Y.dmb") };
            io::write_tensor(out_dir.join(tf), t)?;
            io::write_matrix(out_dir.join(yf), y)?;
            files.insert("tensor".into(), tf.into());
            files.insert("y".into(), yf.into());
        }
    }
    let manifest = Manifest { spec, files };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn quantize_to_pixels(img: &Matrix, lo: f64, hi: f64) -> Matrix {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    Matrix::from_fn(img.nrows(), img.ncols(), |i, j| {
        (((img[(i, j)] - lo) / span * 255.0).round()).clamp(0.0, 255.0)
    })
}

fn gen_gallery(args: &GenArgs, cli: &crate::Cli, out_dir: &Path) -> anyhow::Result<()> {
    let persons = need(args.persons, "persons", "gallery")?;
    let ipp = need(args.images_per_person, "images-per-person", "gallery")?;
    let rows = need(args.rows, "rows", "gallery")?;
    let cols = need(args.cols, "cols", "gallery")?;
    let base_rank = need(args.base_rank, "base-rank", "gallery")?;
    let noise = need(args.noise, "noise", "gallery")?;
    let qpp = need(args.queries_per_person, "queries-per-person", "gallery")?;
    let (gallery, queries) =
        synthetic_gallery(persons, ipp, (rows, cols), base_rank, noise, qpp, cli.seed)?;

    // shared intensity range so quantization is gallery-wide consistent
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for idx in 0..gallery.image_count() {
        for v in gallery.image(idx).iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    for (_, q) in &queries {
        for v in q.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }

    for (p, name) in gallery.persons().iter().enumerate() {
        let pd = out_dir.join("gallery").join(name);
        std::fs::create_dir_all(&pd)?;
        for i in 0..ipp {
            let img = quantize_to_pixels(gallery.image(p * ipp + i), lo, hi);
            write_pgm(pd.join(format!("{i:02}.pgm")), &img)?;
        }
    }
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    for (label, img) in &queries {
        let qd = out_dir.join("queries").join(label);
        std::fs::create_dir_all(&qd)?;
        let idx = counters.entry(label.clone()).or_insert(0);
        write_pgm(qd.join(format!("{idx:02}.pgm")), &quantize_to_pixels(img, lo, hi))?;
        *idx += 1;
    }
    let manifest = serde_json::json!({
        "family": "gallery",
        "persons": persons,
        "images_per_person": ipp,
        "rows": rows,
        "cols": cols,
        "base_rank": base_rank,
        "noise": noise,
        "queries_per_person": qpp,
        "seed": cli.seed,
        "files": { "gallery": "gallery/", "queries": "queries/" },
    });
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

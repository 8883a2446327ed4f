//! Face recognition by coupled-approximation error.
//!
//! A gallery holds several persons with the same number of grayscale
//! training images each. A query image is matched by running a coupled
//! factorization against every gallery image (matrix mode) or against each
//! person's stacked image tensor (tensor modes); the candidate with the
//! smallest combined relative error wins. No mean-face or eigen-projection
//! preprocessing is involved: the shared factor does the dimensionality
//! reduction.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::cmf::{cmf_with_plan, relative_errors};
use crate::cmtf::{cmtf_cp_als, cmtf_cp_als_randomized, cmtf_tucker, cp_errors, tucker_errors, AlsOptions};
use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, Matrix};
use crate::sketch::{gaussian, seeded_rng, SketchPlan, Strategy};
use crate::tensor::Tensor3;

/// Immutable training database: `persons.len() * images_per_person`
/// uniformly sized grayscale images, plus one stacked tensor per person
/// for the tensor-coupled modes.
#[derive(Debug, Clone)]
pub struct Gallery {
    persons: Vec<String>,
    images_per_person: usize,
    image_dims: (usize, usize),
    matrices: Vec<Matrix>,
    tensors: Vec<Tensor3>,
}

impl Gallery {
    /// Builds a gallery from per-person image lists. Every person needs the
    /// same number of images and every image the same dimensions.
    pub fn new(persons: Vec<String>, images: Vec<Vec<Matrix>>) -> Result<Self> {
        if persons.is_empty() || persons.len() != images.len() {
            return Err(Error::Param("gallery needs one image list per person".into()));
        }
        let images_per_person = images[0].len();
        if images_per_person == 0 {
            return Err(Error::Param("gallery persons need at least one image".into()));
        }
        let image_dims = (images[0][0].nrows(), images[0][0].ncols());
        let mut matrices = Vec::with_capacity(persons.len() * images_per_person);
        let mut tensors = Vec::with_capacity(persons.len());
        for (p, list) in images.iter().enumerate() {
            if list.len() != images_per_person {
                return Err(Error::Shape(format!(
                    "person {:?} has {} images, expected {images_per_person}",
                    persons[p],
                    list.len()
                )));
            }
            for (idx, img) in list.iter().enumerate() {
                if (img.nrows(), img.ncols()) != image_dims {
                    return Err(Error::Shape(format!(
                        "image {idx} of person {:?} is {}x{}, expected {}x{}",
                        persons[p],
                        img.nrows(),
                        img.ncols(),
                        image_dims.0,
                        image_dims.1
                    )));
                }
                ensure_finite(img, "gallery image")?;
            }
            let stack = Tensor3::from_fn(
                (image_dims.0, image_dims.1, images_per_person),
                |i, j, l| list[l][(i, j)],
            )?;
            tensors.push(stack);
            matrices.extend(list.iter().cloned());
        }
        Ok(Self { persons, images_per_person, image_dims, matrices, tensors })
    }

    /// Loads `dir/<person>/<image>.pgm`, persons and images in lexicographic
    /// order.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut person_dirs: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| e.path())
            .collect();
        person_dirs.sort();
        if person_dirs.is_empty() {
            return Err(Error::Param(format!("no person directories under {}", dir.display())));
        }
        let mut persons = Vec::new();
        let mut images = Vec::new();
        for pd in person_dirs {
            let name = pd
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Param(format!("bad directory name under {}", dir.display())))?
                .to_string();
            let mut files: Vec<_> = std::fs::read_dir(&pd)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("pgm"))
                .collect();
            files.sort();
            let list: Result<Vec<Matrix>> = files.iter().map(load_pgm).collect();
            persons.push(name);
            images.push(list?);
        }
        Gallery::new(persons, images)
    }

    pub fn persons(&self) -> &[String] {
        &self.persons
    }

    pub fn images_per_person(&self) -> usize {
        self.images_per_person
    }

    pub fn image_dims(&self) -> (usize, usize) {
        self.image_dims
    }

    pub fn image(&self, idx: usize) -> &Matrix {
        &self.matrices[idx]
    }

    pub fn image_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn person_tensor(&self, person: usize) -> &Tensor3 {
        &self.tensors[person]
    }

    pub fn person_of_image(&self, idx: usize) -> usize {
        idx / self.images_per_person
    }
}

/// Reads a binary (`P5`) PGM with maxval <= 255 into a matrix of
/// intensities in [0, 255]. ASCII (`P2`) and 16-bit files are rejected.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<Matrix> {
    const F: &str = "pgm";
    let path = path.as_ref();
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let fe = |reason: String| Error::Format { path: path.display().to_string(), format: F, reason };

    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<String> {
        // skip whitespace and '#' comments
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(fe("truncated header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = token(&mut pos)?;
    if magic != "P5" {
        return Err(fe(format!("unsupported magic {magic:?} (only binary P5 is accepted)")));
    }
    let width: usize = token(&mut pos)?.parse().map_err(|_| fe("bad width".into()))?;
    let height: usize = token(&mut pos)?.parse().map_err(|_| fe("bad height".into()))?;
    let maxval: usize = token(&mut pos)?.parse().map_err(|_| fe("bad maxval".into()))?;
    if width == 0 || height == 0 {
        return Err(fe("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(fe(format!("maxval {maxval} unsupported (need 1..=255)")));
    }
    // single whitespace byte separates header from payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(fe("missing payload separator".into()));
    }
    pos += 1;
    let need = width * height;
    if bytes.len() - pos < need {
        return Err(fe(format!("truncated payload: have {}, need {need}", bytes.len() - pos)));
    }
    let data = &bytes[pos..pos + need];
    Ok(Matrix::from_fn(height, width, |i, j| data[i * width + j] as f64))
}

/// Writes a matrix of integer intensities in [0, 255] as a binary PGM.
pub fn write_pgm(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !(v.is_finite() && (0.0..=255.0).contains(&v) && v.fract() == 0.0) {
                return Err(Error::Param(format!(
                    "pixel ({i}, {j}) = {v} is not an integer in 0..=255"
                )));
            }
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", m.ncols(), m.nrows())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.write_all(&[m[(i, j)] as u8])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Which coupled decomposition drives the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecognitionMode {
    /// One coupled matrix factorization per gallery image.
    Cmf,
    /// One Tucker-form coupled factorization per person tensor.
    CmtfTucker,
    /// One CP-ALS coupled factorization per person tensor.
    CmtfCp,
}

impl RecognitionMode {
    pub fn label(&self) -> &'static str {
        match self {
            RecognitionMode::Cmf => "cmf",
            RecognitionMode::CmtfTucker => "cmtf-tucker",
            RecognitionMode::CmtfCp => "cmtf-cp",
        }
    }
}

/// One classified query: the winning person plus the per-candidate error
/// vector (per image for CMF, per person for the tensor modes).
#[derive(Debug, Clone)]
pub struct Classification {
    pub predicted_person: usize,
    pub errs: Vec<f64>,
}

fn argmin(errs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &e) in errs.iter().enumerate() {
        if e < errs[best] {
            best = i;
        }
    }
    best
}

fn check_query(g: &Gallery, y: &Matrix, k: usize) -> Result<()> {
    if (y.nrows(), y.ncols()) != g.image_dims {
        return Err(Error::Shape(format!(
            "query is {}x{}, gallery images are {}x{}",
            y.nrows(),
            y.ncols(),
            g.image_dims.0,
            g.image_dims.1
        )));
    }
    if k == 0 || k > g.image_dims.0.min(g.image_dims.1) {
        return Err(Error::Param(format!(
            "rank k={k} out of range for {}x{} images",
            g.image_dims.0, g.image_dims.1
        )));
    }
    ensure_finite(y, "query image")
}

/// Classifies a query by coupled matrix factorization against every
/// gallery image; `err_i = err_X + err_Y`, smallest wins (ties go to the
/// lowest index).
pub fn classify_cmf(g: &Gallery, y: &Matrix, plan: &SketchPlan) -> Result<Classification> {
    check_query(g, y, plan.k)?;
    let mut errs = Vec::with_capacity(g.image_count());
    for idx in 0..g.image_count() {
        let r = cmf_with_plan(g.image(idx), y, plan)?;
        let (ex, ey) = relative_errors(g.image(idx), y, &r)?;
        errs.push(ex + ey);
    }
    let winner = argmin(&errs);
    Ok(Classification { predicted_person: g.person_of_image(winner), errs })
}

/// Classifies a query by a coupled matrix-tensor factorization against
/// each person's stacked training tensor. An ALS run that hits a
/// degenerate iterate scores +inf for that candidate instead of aborting
/// the query.
pub fn classify_cmtf(
    g: &Gallery,
    y: &Matrix,
    plan: &SketchPlan,
    format: RecognitionMode,
    als: &AlsOptions,
) -> Result<Classification> {
    check_query(g, y, plan.k)?;
    let mut errs = Vec::with_capacity(g.persons.len());
    for person in 0..g.persons.len() {
        let t = g.person_tensor(person);
        let total = match format {
            RecognitionMode::CmtfTucker => {
                let r = cmtf_tucker(t, y, plan)?;
                let (ex, ey) = tucker_errors(t, y, &r)?;
                ex + ey
            }
            RecognitionMode::CmtfCp => {
                let run = if matches!(plan.strategy, Strategy::None) {
                    cmtf_cp_als(t, y, plan.k, plan.seed, als)
                } else {
                    cmtf_cp_als_randomized(t, y, plan, plan.seed, als)
                };
                match run {
                    Ok(r) => {
                        let (ex, ey) = cp_errors(t, y, &r)?;
                        ex + ey
                    }
                    Err(Error::Degenerate { .. }) => f64::INFINITY,
                    Err(other) => return Err(other),
                }
            }
            RecognitionMode::Cmf => {
                return Err(Error::Param("classify_cmtf expects a tensor mode".into()))
            }
        };
        errs.push(total);
    }
    let winner = argmin(&errs);
    Ok(Classification { predicted_person: winner, errs })
}

/// Outcome for one labeled query.
#[derive(Debug, Clone, Serialize)]
pub struct QueryOutcome {
    pub query: String,
    pub truth: String,
    pub predicted: String,
    pub errs: Vec<f64>,
}

/// Per-person and total success rates over a labeled query set.
#[derive(Debug, Clone, Serialize)]
pub struct RecognitionReport {
    pub rows: Vec<QueryOutcome>,
    pub per_person: BTreeMap<String, f64>,
    pub total_rate: f64,
}

/// Classifies every labeled query and aggregates success rates.
pub fn evaluate(
    g: &Gallery,
    queries: &[(String, Matrix)],
    plan: &SketchPlan,
    mode: RecognitionMode,
    als: &AlsOptions,
) -> Result<RecognitionReport> {
    if queries.is_empty() {
        return Err(Error::Param("empty query set".into()));
    }
    for (label, _) in queries {
        if !g.persons.iter().any(|p| p == label) {
            return Err(Error::Param(format!("query label {label:?} not in the gallery")));
        }
    }
    let mut rows = Vec::with_capacity(queries.len());
    let mut correct_by: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut correct_total = 0usize;
    for (qidx, (truth, img)) in queries.iter().enumerate() {
        let c = match mode {
            RecognitionMode::Cmf => classify_cmf(g, img, plan)?,
            RecognitionMode::CmtfTucker | RecognitionMode::CmtfCp => {
                classify_cmtf(g, img, plan, mode, als)?
            }
        };
        let predicted = g.persons[c.predicted_person].clone();
        let entry = correct_by.entry(truth.clone()).or_insert((0, 0));
        entry.1 += 1;
        if &predicted == truth {
            entry.0 += 1;
            correct_total += 1;
        }
        rows.push(QueryOutcome {
            query: format!("q{qidx}"),
            truth: truth.clone(),
            predicted,
            errs: c.errs,
        });
    }
    let per_person = correct_by
        .into_iter()
        .map(|(p, (ok, n))| (p, ok as f64 / n as f64))
        .collect();
    Ok(RecognitionReport {
        rows,
        per_person,
        total_rate: correct_total as f64 / queries.len() as f64,
    })
}

/// Synthetic gallery: each person is a random low-rank base image plus
/// per-image Gaussian perturbations at `noise` relative Frobenius norm;
/// queries are drawn the same way. Deterministic per seed.
pub fn synthetic_gallery(
    persons: usize,
    images_per_person: usize,
    dims: (usize, usize),
    base_rank: usize,
    noise: f64,
    queries_per_person: usize,
    seed: u64,
) -> Result<(Gallery, Vec<(String, Matrix)>)> {
    if persons == 0 || images_per_person == 0 || base_rank == 0 {
        return Err(Error::Param("synthetic gallery needs positive counts".into()));
    }
    if base_rank > dims.0.min(dims.1) {
        return Err(Error::Param(format!(
            "base rank {base_rank} exceeds min image dim {}",
            dims.0.min(dims.1)
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut names = Vec::with_capacity(persons);
    let mut images = Vec::with_capacity(persons);
    let mut queries = Vec::new();
    for p in 0..persons {
        let name = format!("person{:02}", p + 1);
        let base = gaussian(dims.0, base_rank, &mut rng)? * gaussian(base_rank, dims.1, &mut rng)?;
        let base_norm = base.norm();
        let perturbed = |rng: &mut crate::sketch::SketchRng| -> Result<Matrix> {
            let e = gaussian(dims.0, dims.1, rng)?;
            let scale = noise * base_norm / e.norm().max(f64::MIN_POSITIVE);
            Ok(&base + e * scale)
        };
        let mut list = Vec::with_capacity(images_per_person);
        for _ in 0..images_per_person {
            list.push(perturbed(&mut rng)?);
        }
        for _ in 0..queries_per_person {
            queries.push((name.clone(), perturbed(&mut rng)?));
        }
        names.push(name);
        images.push(list);
    }
    Ok((Gallery::new(names, images)?, queries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_gallery(seed: u64) -> (Gallery, Vec<(String, Matrix)>) {
        synthetic_gallery(3, 4, (16, 12), 3, 0.08, 2, seed).unwrap()
    }

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "coupled-lowrank-facerec-{}-{}",
            std::process::id(),
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap().as_nanos()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn pgm_round_trip_and_byte_map() {
        let dir = tmpdir();
        let p = dir.join("t.pgm");
        std::fs::write(&p, b"P5\n2 2\n255\n\x00\xff\x80\x40").unwrap();
        let m = load_pgm(&p).unwrap();
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 1)], 255.0);
        assert_eq!(m[(1, 0)], 128.0);
        assert_eq!(m[(1, 1)], 64.0);
        let p2 = dir.join("t2.pgm");
        write_pgm(&p2, &m).unwrap();
        assert_eq!(load_pgm(&p2).unwrap(), m);
    }

    #[test]
    fn pgm_rejects_ascii_16bit_truncated() {
        let dir = tmpdir();
        let p = dir.join("a.pgm");
        std::fs::write(&p, b"P2\n2 2\n255\n0 1 2 3\n").unwrap();
        assert!(matches!(load_pgm(&p), Err(Error::Format { .. })));
        std::fs::write(&p, b"P5\n2 2\n65535\n\x00\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(matches!(load_pgm(&p), Err(Error::Format { .. })));
        std::fs::write(&p, b"P5\n2 2\n255\n\x00\x01").unwrap();
        assert!(matches!(load_pgm(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let dir = tmpdir();
        let p = dir.join("c.pgm");
        std::fs::write(&p, b"P5\n# a comment\n2 1\n# another\n255\n\x07\x09").unwrap();
        let m = load_pgm(&p).unwrap();
        assert_eq!(m.shape(), (1, 2));
        assert_eq!(m[(0, 0)], 7.0);
        assert_eq!(m[(0, 1)], 9.0);
    }

    #[test]
    fn self_query_wins_cmf() {
        let (g, _) = small_gallery(1);
        // query identical to gallery image 5 (person 1, zero-based)
        let y = g.image(5).clone();
        let c = classify_cmf(&g, &y, &SketchPlan::basic(3)).unwrap();
        assert_eq!(c.predicted_person, 1);
        let winner = (0..g.image_count()).min_by(|&a, &b| c.errs[a].partial_cmp(&c.errs[b]).unwrap());
        assert_eq!(winner, Some(5));
    }

    #[test]
    fn single_person_gallery_is_trivial() {
        let (g, queries) = synthetic_gallery(1, 3, (12, 10), 2, 0.1, 2, 7).unwrap();
        for (_, q) in &queries {
            let c = classify_cmf(&g, q, &SketchPlan::basic(2)).unwrap();
            assert_eq!(c.predicted_person, 0);
            let t = classify_cmtf(&g, q, &SketchPlan::basic(2), RecognitionMode::CmtfTucker, &AlsOptions::default())
                .unwrap();
            assert_eq!(t.predicted_person, 0);
        }
    }

    #[test]
    fn reference_parameterizations_run() {
        // rank and sketch settings used for the reported experiments
        let (g, queries) = small_gallery(3);
        let y = &queries[0].1;
        for plan in [
            SketchPlan::basic(5),
            SketchPlan::simple(5, 1),
            SketchPlan::rsi(5, 2, 1),
            SketchPlan::rbki(5, 5, 2, 1),
        ] {
            classify_cmf(&g, y, &plan).unwrap();
            classify_cmtf(&g, y, &plan, RecognitionMode::CmtfTucker, &AlsOptions::default()).unwrap();
        }
    }

    #[test]
    fn tucker_self_slice_query_wins() {
        let (g, _) = small_gallery(5);
        let y = g.image(2 * 4 + 1).clone(); // person 2, image 1
        let c = classify_cmtf(&g, &y, &SketchPlan::basic(3), RecognitionMode::CmtfTucker, &AlsOptions::default())
            .unwrap();
        assert_eq!(c.predicted_person, 2);
    }

    #[test]
    fn evaluate_reports_rates() {
        let (g, queries) = small_gallery(9);
        // self-queries: every training image classifies to its owner
        let self_queries: Vec<(String, Matrix)> = (0..g.image_count())
            .map(|i| (g.persons()[g.person_of_image(i)].clone(), g.image(i).clone()))
            .collect();
        let rep = evaluate(&g, &self_queries, &SketchPlan::basic(3), RecognitionMode::Cmf, &AlsOptions::default())
            .unwrap();
        assert_eq!(rep.total_rate, 1.0);
        for (_, rate) in rep.per_person.iter() {
            assert_eq!(*rate, 1.0);
        }
        // adversarially mislabeled queries: the rate reflects the labels
        let mislabeled: Vec<(String, Matrix)> = queries
            .iter()
            .map(|(label, img)| {
                let idx = g.persons().iter().position(|p| p == label).unwrap();
                let wrong = g.persons()[(idx + 1) % g.persons().len()].clone();
                (wrong, img.clone())
            })
            .collect();
        let rep2 = evaluate(&g, &mislabeled, &SketchPlan::basic(3), RecognitionMode::Cmf, &AlsOptions::default())
            .unwrap();
        let observed = rep2
            .rows
            .iter()
            .filter(|r| r.predicted == r.truth)
            .count() as f64
            / rep2.rows.len() as f64;
        assert_eq!(rep2.total_rate, observed);
    }

    #[test]
    fn evaluate_rejects_bad_inputs() {
        let (g, _) = small_gallery(11);
        assert!(matches!(
            evaluate(&g, &[], &SketchPlan::basic(3), RecognitionMode::Cmf, &AlsOptions::default()),
            Err(Error::Param(_))
        ));
        let bad = vec![("nobody".to_string(), g.image(0).clone())];
        assert!(matches!(
            evaluate(&g, &bad, &SketchPlan::basic(3), RecognitionMode::Cmf, &AlsOptions::default()),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn scale_invariance_of_predictions() {
        let (g, queries) = small_gallery(13);
        let scaled_gallery = {
            let images: Vec<Vec<Matrix>> = (0..g.persons().len())
                .map(|p| {
                    (0..g.images_per_person())
                        .map(|i| g.image(p * g.images_per_person() + i) * 3.5)
                        .collect()
                })
                .collect();
            Gallery::new(g.persons().to_vec(), images).unwrap()
        };
        let plan = SketchPlan::basic(3);
        for (_, q) in queries.iter().take(3) {
            let a = classify_cmf(&g, q, &plan).unwrap();
            let b = classify_cmf(&scaled_gallery, &(q * 3.5), &plan).unwrap();
            assert_eq!(a.predicted_person, b.predicted_person);
        }
    }

    #[test]
    fn adding_exact_copy_secures_selection() {
        let (g, queries) = small_gallery(17);
        let (label, query) = &queries[0];
        let target = g.persons().iter().position(|p| p == label).unwrap();
        // rebuild the gallery with the query replacing one training image
        // of its own person
        let images: Vec<Vec<Matrix>> = (0..g.persons().len())
            .map(|p| {
                (0..g.images_per_person())
                    .map(|i| {
                        if p == target && i == 0 {
                            query.clone()
                        } else {
                            g.image(p * g.images_per_person() + i).clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let g2 = Gallery::new(g.persons().to_vec(), images).unwrap();
        let c = classify_cmf(&g2, query, &SketchPlan::basic(3)).unwrap();
        assert_eq!(c.predicted_person, target);
    }

    #[test]
    fn gallery_dir_round_trip() {
        let dir = tmpdir();
        let (g, _) = synthetic_gallery(2, 2, (8, 6), 2, 0.05, 0, 3).unwrap();
        for p in 0..2 {
            let pd = dir.join(format!("person{:02}", p + 1));
            std::fs::create_dir_all(&pd).unwrap();
            for i in 0..2 {
                let img = g.image(p * 2 + i);
                // quantize to integers for the pgm format
                let maxv = img.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
                let q = Matrix::from_fn(8, 6, |r, c| (img[(r, c)] / maxv * 127.0 + 128.0).round());
                write_pgm(pd.join(format!("{i}.pgm")), &q).unwrap();
            }
        }
        let loaded = Gallery::load_dir(&dir).unwrap();
        assert_eq!(loaded.persons(), &["person01".to_string(), "person02".to_string()]);
        assert_eq!(loaded.images_per_person(), 2);
        assert_eq!(loaded.image_dims(), (8, 6));
    }

    #[test]
    fn gallery_shape_validation() {
        let a = Matrix::zeros(4, 4);
        let b = Matrix::zeros(4, 5);
        assert!(matches!(
            Gallery::new(vec!["p".into()], vec![vec![a.clone(), b]]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            Gallery::new(
                vec!["p".into(), "q".into()],
                vec![vec![a.clone()], vec![a.clone(), a.clone()]]
            ),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn synthetic_gallery_is_deterministic() {
        let (g1, q1) = small_gallery(23);
        let (g2, q2) = small_gallery(23);
        assert_eq!(g1.image(0), g2.image(0));
        assert_eq!(q1[0].1, q2[0].1);
    }
}

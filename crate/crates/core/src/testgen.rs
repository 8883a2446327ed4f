//! Seeded generators for the synthetic benchmark families.
//!
//! Every generator is a pure function of its parameters and seed: the same
//! call produces bitwise-identical data. MATLAB-style `orth(rand(...))` is
//! realized as the Q factor of a thin QR of a uniform matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hcat, Matrix};
use crate::sketch::{gaussian, seeded_rng, thin_qr, uniform, SketchRng};
use crate::tensor::{cp_reconstruct, Tensor3};

/// Orthonormal columns spanning the range of a uniform random matrix.
fn orth_uniform(rows: usize, cols: usize, rng: &mut SketchRng) -> Result<Matrix> {
    let (q, _) = thin_qr(&uniform(rows, cols, rng)?)?;
    Ok(q)
}

/// Extends orthonormal `shared` columns to `total` orthonormal columns by
/// orthogonalizing a random block against them.
///
/// Plain concatenation with an independent random orthonormal block would
/// leave the factor non-orthonormal, and the constructed spectra and
/// shared-subspace equalities would only hold approximately. The extension
/// keeps the shared columns bitwise and makes both exact.
fn extend_orthonormal(shared: &Matrix, total: usize, rng: &mut SketchRng) -> Result<Matrix> {
    let have = shared.ncols();
    if total == have {
        return Ok(shared.clone());
    }
    let raw = uniform(shared.nrows(), total - have, rng)?;
    let projected = &raw - shared * shared.tr_mul(&raw);
    let (tail, _) = thin_qr(&projected)?;
    hcat(shared, &tail)
}

/// Scales column `j` of `m` by `sigma[j]` (diagonal right-multiplication).
fn scale_columns(mut m: Matrix, sigma: &[f64]) -> Matrix {
    for (j, &s) in sigma.iter().enumerate().take(m.ncols()) {
        m.column_mut(j).scale_mut(s);
    }
    m
}

/// Low-rank pair with unstructured spectra: products of uniform factors of
/// ranks `r1` and `r2`.
pub fn synthetic1(
    m: usize,
    n1: usize,
    n2: usize,
    r1: usize,
    r2: usize,
    seed: u64,
) -> Result<(Matrix, Matrix)> {
    if r1 == 0 || r1 > m.min(n1) || r2 == 0 || r2 > m.min(n2) {
        return Err(Error::Param(format!(
            "synthetic1: need 1 <= r1 <= min(m, n1) and 1 <= r2 <= min(m, n2), got r1={r1}, r2={r2}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let x = uniform(m, r1, &mut rng)? * uniform(r1, n1, &mut rng)?;
    let y = uniform(m, r2, &mut rng)? * uniform(r2, n2, &mut rng)?;
    Ok((x, y))
}

/// Pair with fast polynomial singular-value decay on X and a controlled
/// `c`-dimensional overlap between the singular subspaces of X and Y.
///
/// `Σ_X` carries `r` unit values then `j^{-d}` for `j = 2, 3, ...`;
/// `Σ_Y` carries `r` unit values then a harmonic `j^{-1}` tail, both
/// truncated to `n` entries.
pub fn synthetic2(n: usize, r: usize, d: f64, c: usize, seed: u64) -> Result<(Matrix, Matrix)> {
    if r == 0 || r > n || c > n || d < 1.0 {
        return Err(Error::Param(format!(
            "synthetic2: need 1 <= r <= n, c <= n, d >= 1, got n={n}, r={r}, c={c}, d={d}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let sigma_x: Vec<f64> = (0..n)
        .map(|i| if i < r { 1.0 } else { ((i - r + 2) as f64).powf(-d) })
        .collect();
    let sigma_y: Vec<f64> = (0..n)
        .map(|i| if i < r { 1.0 } else { ((i - r + 2) as f64).powi(-1) })
        .collect();
    let ux = orth_uniform(n, n, &mut rng)?;
    let vx = orth_uniform(n, n, &mut rng)?;
    let x = scale_columns(ux.clone(), &sigma_x) * vx.transpose();
    let (uy, vy) = if c == 0 {
        (orth_uniform(n, n, &mut rng)?, orth_uniform(n, n, &mut rng)?)
    } else {
        let uy = extend_orthonormal(&ux.columns(0, c).into_owned(), n, &mut rng)?;
        let vy = extend_orthonormal(&vx.columns(0, c).into_owned(), n, &mut rng)?;
        (uy, vy)
    };
    let y = scale_columns(uy, &sigma_y) * vy.transpose();
    Ok((x, y))
}

/// Sparse random vector: each entry is nonzero with probability `density`,
/// nonzero values uniform in (0, 1).
fn sparse_vector(len: usize, density: f64, rng: &mut SketchRng) -> Vec<f64> {
    use rand::Rng;
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < density {
                rng.random::<f64>()
            } else {
                0.0
            }
        })
        .collect()
}

/// Sums of sparse rank-one terms: the first `r` terms (weights `10/j`) are
/// shared between X and Y, the remaining `min(m, n) - r` terms (weights
/// `1/j`) are drawn independently per matrix.
pub fn synthetic3(m: usize, n: usize, r: usize, seed: u64) -> Result<(Matrix, Matrix)> {
    let minmn = m.min(n);
    if r == 0 || r > minmn {
        return Err(Error::Param(format!(
            "synthetic3: need 1 <= r <= min(m, n) = {minmn}, got r={r}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let density = 0.25;
    // left factors carry the weights; right factors the raw vectors
    let mut lx = Matrix::zeros(m, minmn);
    let mut rx = Matrix::zeros(n, minmn);
    let mut ly = Matrix::zeros(m, minmn);
    let mut ry = Matrix::zeros(n, minmn);
    for j in 0..r {
        let w = 10.0 / (j + 1) as f64;
        let xv = sparse_vector(m, density, &mut rng);
        let yv = sparse_vector(n, density, &mut rng);
        for i in 0..m {
            lx[(i, j)] = w * xv[i];
            ly[(i, j)] = w * xv[i];
        }
        for i in 0..n {
            rx[(i, j)] = yv[i];
            ry[(i, j)] = yv[i];
        }
    }
    for j in r..minmn {
        let w = 1.0 / (j + 1) as f64;
        let xv = sparse_vector(m, density, &mut rng);
        let yv = sparse_vector(n, density, &mut rng);
        for i in 0..m {
            lx[(i, j)] = w * xv[i];
        }
        for i in 0..n {
            rx[(i, j)] = yv[i];
        }
    }
    for j in r..minmn {
        let w = 1.0 / (j + 1) as f64;
        let xv = sparse_vector(m, density, &mut rng);
        let yv = sparse_vector(n, density, &mut rng);
        for i in 0..m {
            ly[(i, j)] = w * xv[i];
        }
        for i in 0..n {
            ry[(i, j)] = yv[i];
        }
    }
    Ok((&lx * rx.transpose(), &ly * ry.transpose()))
}

/// X with exact `2^{-i}` spectrum (`i = 1..n1`), Y an unstructured low-rank
/// product of rank `r2`.
pub fn synthetic4(m: usize, n1: usize, n2: usize, r2: usize, seed: u64) -> Result<(Matrix, Matrix)> {
    if n1 == 0 || n1 > m || r2 == 0 || r2 > m.min(n2) {
        return Err(Error::Param(format!(
            "synthetic4: need 1 <= n1 <= m and 1 <= r2 <= min(m, n2), got n1={n1}, r2={r2}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let u = orth_uniform(m, n1, &mut rng)?;
    let sigma: Vec<f64> = (1..=n1).map(|i| 2f64.powi(-(i as i32))).collect();
    let x = scale_columns(u, &sigma);
    let y = uniform(m, r2, &mut rng)? * uniform(r2, n2, &mut rng)?;
    Ok((x, y))
}

/// Both matrices ill-conditioned with `2^{-(i-1)}` spectra; their left
/// factors share the first `shared` columns, so the ranges intersect in a
/// `shared`-dimensional subspace.
pub fn synthetic5(
    m: usize,
    n1: usize,
    n2: usize,
    shared: usize,
    seed: u64,
) -> Result<(Matrix, Matrix)> {
    if shared == 0 || shared > n1.min(n2) || n1.max(n2) > m {
        return Err(Error::Param(format!(
            "synthetic5: need 1 <= shared <= min(n1, n2) <= max(n1, n2) <= m, got m={m}, n1={n1}, n2={n2}, shared={shared}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let ua = orth_uniform(m, n1, &mut rng)?;
    let spectrum = |n: usize| -> Vec<f64> { (0..n).map(|i| 2f64.powi(-(i as i32))).collect() };
    let x = scale_columns(ua.clone(), &spectrum(n1));
    let ub = extend_orthonormal(&ua.columns(0, shared).into_owned(), n2, &mut rng)?;
    let y = scale_columns(ub, &spectrum(n2));
    Ok((x, y))
}

/// Coupled tensor-matrix family: Y = U_Y S V_Yᵀ and a three-slice tensor
/// whose slice `i` shares its first `r_i` left and right singular
/// directions with Y. All slices carry the same spectrum
/// `S = diag(1, ..., 1, d^{-2}, ..., d^{-(n-r+1)})`.
pub fn tensor_test(
    n: usize,
    r: usize,
    d: f64,
    r1: usize,
    r2: usize,
    r3: usize,
    seed: u64,
) -> Result<(Tensor3, Matrix)> {
    if r == 0 || r > n || d <= 1.0 {
        return Err(Error::Param(format!(
            "tensor_test: need 1 <= r <= n and d > 1, got n={n}, r={r}, d={d}"
        )));
    }
    for (name, ri) in [("r1", r1), ("r2", r2), ("r3", r3)] {
        if ri == 0 || ri > n {
            return Err(Error::Param(format!("tensor_test: need 1 <= {name} <= n, got {ri}")));
        }
    }
    let mut rng = seeded_rng(seed);
    let s: Vec<f64> = (0..n)
        .map(|i| if i < r { 1.0 } else { d.powi(-((i - r + 2) as i32)) })
        .collect();
    let uy = orth_uniform(n, n, &mut rng)?;
    let vy = orth_uniform(n, n, &mut rng)?;
    let y = scale_columns(uy.clone(), &s) * vy.transpose();
    let mut slices = Vec::with_capacity(3);
    for ri in [r1, r2, r3] {
        let ui = extend_orthonormal(&uy.columns(0, ri).into_owned(), n, &mut rng)?;
        let vi = extend_orthonormal(&vy.columns(0, ri).into_owned(), n, &mut rng)?;
        slices.push(scale_columns(ui, &s) * vi.transpose());
    }
    let t = Tensor3::from_fn((n, n, 3), |i, j, l| slices[l][(i, j)])?;
    Ok((t, y))
}

/// Exactly coupled CP tensor and matrix: `T = [[U, B, C]]`, `Y = U Wᵀ` with
/// standard-normal factors of rank `r`.
pub fn planted_cp(
    m: usize,
    n2: usize,
    n3: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<(Tensor3, Matrix)> {
    if r == 0 || r > m.min(n2).min(n3).min(n) {
        return Err(Error::Param(format!(
            "planted_cp: need 1 <= r <= min dims, got r={r} for ({m}, {n2}, {n3}, {n})"
        )));
    }
    let mut rng = seeded_rng(seed);
    let u = gaussian(m, r, &mut rng)?;
    let b = gaussian(n2, r, &mut rng)?;
    let c = gaussian(n3, r, &mut rng)?;
    let w = gaussian(n, r, &mut rng)?;
    let t = cp_reconstruct(&u, &b, &c)?;
    let y = &u * w.transpose();
    Ok((t, y))
}

/// Parameter record for one synthetic instance; `generate` dispatches to
/// the family generators above.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceSpec {
    Synthetic1 { m: usize, n1: usize, n2: usize, r1: usize, r2: usize, seed: u64 },
    Synthetic2 { n: usize, r: usize, d: f64, c: usize, seed: u64 },
    Synthetic3 { m: usize, n: usize, r: usize, seed: u64 },
    Synthetic4 { m: usize, n1: usize, n2: usize, r2: usize, seed: u64 },
    Synthetic5 { m: usize, n1: usize, n2: usize, shared: usize, seed: u64 },
    TensorTest { n: usize, r: usize, d: f64, r1: usize, r2: usize, r3: usize, seed: u64 },
    PlantedCp { m: usize, n2: usize, n3: usize, n: usize, r: usize, seed: u64 },
}

/// Generated data: a matrix pair or a tensor-matrix pair.
#[derive(Debug, Clone)]
pub enum Instance {
    MatrixPair(Matrix, Matrix),
    TensorPair(Tensor3, Matrix),
}

impl InstanceSpec {
    pub fn family(&self) -> &'static str {
        match self {
            InstanceSpec::Synthetic1 { .. } => "synthetic1",
            InstanceSpec::Synthetic2 { .. } => "synthetic2",
            InstanceSpec::Synthetic3 { .. } => "synthetic3",
            InstanceSpec::Synthetic4 { .. } => "synthetic4",
            InstanceSpec::Synthetic5 { .. } => "synthetic5",
            InstanceSpec::TensorTest { .. } => "tensor_test",
            InstanceSpec::PlantedCp { .. } => "planted_cp",
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            InstanceSpec::Synthetic1 { seed, .. }
            | InstanceSpec::Synthetic2 { seed, .. }
            | InstanceSpec::Synthetic3 { seed, .. }
            | InstanceSpec::Synthetic4 { seed, .. }
            | InstanceSpec::Synthetic5 { seed, .. }
            | InstanceSpec::TensorTest { seed, .. }
            | InstanceSpec::PlantedCp { seed, .. } => seed,
        }
    }

    pub fn generate(&self) -> Result<Instance> {
        match *self {
            InstanceSpec::Synthetic1 { m, n1, n2, r1, r2, seed } => {
                synthetic1(m, n1, n2, r1, r2, seed).map(|(x, y)| Instance::MatrixPair(x, y))
            }
            InstanceSpec::Synthetic2 { n, r, d, c, seed } => {
                synthetic2(n, r, d, c, seed).map(|(x, y)| Instance::MatrixPair(x, y))
            }
            InstanceSpec::Synthetic3 { m, n, r, seed } => {
                synthetic3(m, n, r, seed).map(|(x, y)| Instance::MatrixPair(x, y))
            }
            InstanceSpec::Synthetic4 { m, n1, n2, r2, seed } => {
                synthetic4(m, n1, n2, r2, seed).map(|(x, y)| Instance::MatrixPair(x, y))
            }
            InstanceSpec::Synthetic5 { m, n1, n2, shared, seed } => {
                synthetic5(m, n1, n2, shared, seed).map(|(x, y)| Instance::MatrixPair(x, y))
            }
            InstanceSpec::TensorTest { n, r, d, r1, r2, r3, seed } => {
                tensor_test(n, r, d, r1, r2, r3, seed).map(|(t, y)| Instance::TensorPair(t, y))
            }
            InstanceSpec::PlantedCp { m, n2, n3, n, r, seed } => {
                planted_cp(m, n2, n3, n, r, seed).map(|(t, y)| Instance::TensorPair(t, y))
            }
        }
    }
}

//! Random sketches and orthonormal-basis builders: thin QR, rank-revealing
//! joint basis, randomized subspace iteration and randomized block Krylov
//! iteration.
//!
//! Randomness comes from a counter-based ChaCha stream seeded with a caller
//! 64-bit seed; Gaussian variates use the ziggurat transform. Entries are
//! drawn in column-major order, so a fixed seed and call sequence give
//! bitwise-identical sketches on every run of this implementation.

use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// The PRNG used everywhere randomness is needed.
pub type SketchRng = rand_chacha::ChaCha8Rng;

/// Creates the stream for a given seed.
pub fn seeded_rng(seed: u64) -> SketchRng {
    SketchRng::seed_from_u64(seed)
}

pub const DEFAULT_TRUNC_TOL: f64 = 1e-10;

/// Which basis builder a coupled factorization should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Direct SVD, no sketching.
    None,
    /// One Gaussian sketch per matrix.
    Simple,
    /// Randomized subspace iteration with depth `q`.
    Rsi { q: usize },
    /// Randomized block Krylov iteration with block size `ell`, depth `q`.
    Rbki { ell: usize, q: usize },
}

/// Strategy selector plus target rank, truncation tolerance and RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchPlan {
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub trunc_tol: f64,
}

impl SketchPlan {
    pub fn basic(k: usize) -> Self {
        Self { strategy: Strategy::None, k, seed: 0, trunc_tol: DEFAULT_TRUNC_TOL }
    }

    pub fn simple(k: usize, seed: u64) -> Self {
        Self { strategy: Strategy::Simple, k, seed, trunc_tol: DEFAULT_TRUNC_TOL }
    }

    pub fn rsi(k: usize, q: usize, seed: u64) -> Self {
        Self { strategy: Strategy::Rsi { q }, k, seed, trunc_tol: DEFAULT_TRUNC_TOL }
    }

    pub fn rbki(k: usize, ell: usize, q: usize, seed: u64) -> Self {
        Self { strategy: Strategy::Rbki { ell, q }, k, seed, trunc_tol: DEFAULT_TRUNC_TOL }
    }

    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Self {
        self.trunc_tol = trunc_tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Param("target rank k must be at least 1".into()));
        }
        if !(self.trunc_tol > 0.0 && self.trunc_tol < 1.0) {
            return Err(Error::Param(format!(
                "trunc_tol must lie in (0, 1), got {}",
                self.trunc_tol
            )));
        }
        match self.strategy {
            Strategy::None | Strategy::Simple => {}
            Strategy::Rsi { q } => {
                if q < 1 {
                    return Err(Error::Param("RSI depth q must be at least 1".into()));
                }
            }
            Strategy::Rbki { ell, q } => {
                if ell < 1 {
                    return Err(Error::Param("RBKI block size ell must be at least 1".into()));
                }
                if q < 1 {
                    return Err(Error::Param("RBKI depth q must be at least 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn rng(&self) -> SketchRng {
        seeded_rng(self.seed)
    }
}

/// An orthonormal basis for a subspace of `range(Q1) + range(Q2)` together
/// with the column count `k + p` that survived rank-revealing truncation.
#[derive(Debug, Clone)]
pub struct JointBasis {
    pub q: Matrix,
    pub effective_cols: usize,
}

/// Matrix of i.i.d. standard normal entries, drawn in column-major order.
pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Param(format!("gaussian: dims must be positive, got {rows}x{cols}")));
    }
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Ok(Matrix::from_vec(rows, cols, data))
}

/// Matrix of i.i.d. uniform `[0, 1)` entries, drawn in column-major order.
pub fn uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Param(format!("uniform: dims must be positive, got {rows}x{cols}")));
    }
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    Ok(Matrix::from_vec(rows, cols, data))
}

/// Thin QR factorization `a = q * r` with `q` of shape `rows × cols`.
///
/// Rank-deficient input is not an error; it shows up as a tiny diagonal
/// in `r`.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    if a.nrows() < a.ncols() {
        return Err(Error::Shape(format!(
            "thin_qr expects rows >= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let qr = a.clone().qr();
    Ok((qr.q(), qr.r()))
}

/// Householder QR with Businger-Golub column pivoting.
///
/// Returns the thin orthogonal factor (`rows × min(rows, cols)`) and the
/// magnitudes of the `R` diagonal, which the pivoting keeps non-increasing;
/// the sequence is what rank-revealing truncation thresholds against.
pub fn pivoted_qr(a: &Matrix) -> (Matrix, Vec<f64>) {
    let (m, n) = a.shape();
    let kmax = m.min(n);
    let mut work = a.clone();
    let mut diag = Vec::with_capacity(kmax);
    // squared residual column norms, downdated each step and recomputed
    // when cancellation eats the running value
    let mut norms2: Vec<f64> = (0..n).map(|j| work.column(j).norm_squared()).collect();
    let mut norms2_ref = norms2.clone();
    let mut reflectors: Vec<(usize, Vec<f64>)> = Vec::with_capacity(kmax);

    for step in 0..kmax {
        let pivot = (step..n)
            .max_by(|&x, &y| norms2[x].partial_cmp(&norms2[y]).unwrap())
            .unwrap();
        if pivot != step {
            work.swap_columns(step, pivot);
            norms2.swap(step, pivot);
            norms2_ref.swap(step, pivot);
        }

        // Householder vector for column `step`, rows step..m
        let col: Vec<f64> = (step..m).map(|i| work[(i, step)]).collect();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag.push(0.0);
            reflectors.push((step, vec![0.0; m - step]));
            continue;
        }
        let alpha = if col[0] >= 0.0 { -norm } else { norm };
        let mut v = col;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag.push(alpha.abs());
        work[(step, step)] = alpha;
        for i in step + 1..m {
            work[(i, step)] = 0.0;
        }

        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            for j in step + 1..n {
                let dot: f64 = (step..m).map(|i| v[i - step] * work[(i, j)]).sum();
                let scale = beta * dot;
                for i in step..m {
                    work[(i, j)] -= scale * v[i - step];
                }
                // downdate residual norm; recompute when it has lost
                // most of its mass (standard LAPACK-style guard)
                let top = work[(step, j)];
                norms2[j] -= top * top;
                if norms2[j] <= 1e-12 * norms2_ref[j] || norms2[j] < 0.0 {
                    let fresh: f64 = (step + 1..m).map(|i| work[(i, j)] * work[(i, j)]).sum();
                    norms2[j] = fresh;
                    norms2_ref[j] = fresh;
                }
            }
        }
        reflectors.push((step, v));
    }

    // Accumulate the thin Q by applying reflectors to the identity block.
    let mut q = Matrix::zeros(m, kmax);
    for j in 0..kmax {
        q[(j, j)] = 1.0;
    }
    for (start, v) in reflectors.iter().rev() {
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        for j in 0..kmax {
            let dot: f64 = (*start..m).map(|i| v[i - start] * q[(i, j)]).sum();
            let scale = beta * dot;
            for i in *start..m {
                q[(i, j)] -= scale * v[i - start];
            }
        }
    }
    (q, diag)
}

/// Reorthogonalizes `[q1 q2]` with rank-revealing truncation.
///
/// Columns whose pivoted-QR diagonal falls below `trunc_tol * |R_11|` are
/// dropped; what survives defines `effective_cols = k + p`.
pub fn joint_basis(q1: &Matrix, q2: &Matrix, trunc_tol: f64) -> Result<JointBasis> {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return Err(Error::Shape("joint_basis: zero-column input basis".into()));
    }
    if q1.nrows() != q2.nrows() {
        return Err(Error::Shape(format!(
            "joint_basis: row counts differ ({} vs {})",
            q1.nrows(),
            q2.nrows()
        )));
    }
    if !(trunc_tol > 0.0 && trunc_tol < 1.0) {
        return Err(Error::Param(format!("trunc_tol must lie in (0, 1), got {trunc_tol}")));
    }
    let concat = crate::matrix::hcat(q1, q2)?;
    let (q, diag) = pivoted_qr(&concat);
    let d0 = diag.first().copied().unwrap_or(0.0);
    if d0 == 0.0 {
        return Err(Error::Shape("joint_basis: input bases are numerically zero".into()));
    }
    let keep = diag.iter().take_while(|&&d| d >= trunc_tol * d0).count();
    Ok(JointBasis {
        q: q.columns(0, keep).into_owned(),
        effective_cols: keep,
    })
}

fn check_sketch_rank(x: &Matrix, k: usize) -> Result<()> {
    if k == 0 || k > x.nrows().min(x.ncols()) {
        return Err(Error::Param(format!(
            "sketch rank k={k} out of range for a {}x{} matrix",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// Orthonormal basis of `range(X Ω)` for a fresh Gaussian `Ω` with `k` columns.
pub fn simple_basis<R: Rng>(x: &Matrix, k: usize, rng: &mut R) -> Result<Matrix> {
    check_sketch_rank(x, k)?;
    let omega = gaussian(x.ncols(), k, rng)?;
    let (q, _) = thin_qr(&(x * omega))?;
    Ok(q)
}

/// Randomized subspace iteration: `q` alternating orthonormalize /
/// multiply-transpose rounds starting from one Gaussian sketch.
pub fn rsi_basis<R: Rng>(x: &Matrix, k: usize, q: usize, rng: &mut R) -> Result<Matrix> {
    check_sketch_rank(x, k)?;
    if q < 1 {
        return Err(Error::Param("RSI depth q must be at least 1".into()));
    }
    let mut omega = gaussian(x.ncols(), k, rng)?;
    let mut basis = None;
    for _ in 0..q {
        let (qq, _) = thin_qr(&(x * &omega))?;
        omega = x.tr_mul(&qq);
        basis = Some(qq);
    }
    Ok(basis.expect("q >= 1"))
}

/// Randomized block Krylov iteration: orthonormal basis of
/// `K_q(A Aᵀ; A Ω)` with block size `ell`, assembled block by block with a
/// double Gram-Schmidt pass against all previous blocks.
pub fn rbki_basis<R: Rng>(a: &Matrix, ell: usize, q: usize, rng: &mut R) -> Result<Matrix> {
    if ell < 1 || q < 1 {
        return Err(Error::Param(format!("RBKI needs ell >= 1 and q >= 1, got ell={ell}, q={q}")));
    }
    if ell * q > a.nrows() {
        return Err(Error::Param(format!(
            "RBKI basis dimension ell*q = {} exceeds row count {}",
            ell * q,
            a.nrows()
        )));
    }
    let mut omega = gaussian(a.ncols(), ell, rng)?;
    let mut blocks: Vec<Matrix> = Vec::with_capacity(q);
    for _ in 0..q {
        let mut block = a * &omega;
        for _ in 0..2 {
            for prev in &blocks {
                block -= prev * prev.tr_mul(&block);
            }
        }
        let (qi, _) = thin_qr(&block)?;
        omega = a.tr_mul(&qi);
        blocks.push(qi);
    }
    let mut out = Matrix::zeros(a.nrows(), ell * q);
    for (idx, block) in blocks.iter().enumerate() {
        out.view_mut((0, idx * ell), (a.nrows(), ell)).copy_from(block);
    }
    Ok(out)
}

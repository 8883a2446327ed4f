//! Coupled matrix factorization: shared-left-factor rank-k approximation of
//! a matrix pair, solved directly by a truncated SVD of `[X Y]` or through
//! one of three randomized projection strategies.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::matrix::{hcat, thin_svd, Matrix};
use crate::sketch::{
    joint_basis, rbki_basis, rsi_basis, simple_basis, SketchPlan, SketchRng, Strategy,
};

/// Factor triple of a coupled rank-k approximation `X ≈ U Vᵀ, Y ≈ U Wᵀ`,
/// plus the achieved oversampling and wall-clock split.
///
/// `elapsed_total_s` covers sketching plus the projected solve;
/// `elapsed_core_s` covers only the solve. For the basic algorithm the two
/// coincide.
#[derive(Debug, Clone)]
pub struct CmfResult {
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
    pub achieved_p: usize,
    pub elapsed_total_s: f64,
    pub elapsed_core_s: f64,
}

fn check_inputs(x: &Matrix, y: &Matrix, k: usize) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::Shape(format!(
            "coupled pair must share rows: {} vs {}",
            x.nrows(),
            y.nrows()
        )));
    }
    let (m, n1, n2) = (x.nrows(), x.ncols(), y.ncols());
    if k == 0 || k >= n1.min(n2) || k > m {
        return Err(Error::Param(format!(
            "rank k={k} out of range for {m}x{n1} and {m}x{n2} (need 1 <= k < min(n1, n2), k <= m)"
        )));
    }
    Ok(())
}

/// Direct coupled factorization: truncated SVD of `[X Y]`, `U` the leading
/// left singular vectors, `[V; W]` the split of `V_k Σ_k`.
///
/// By construction the objective equals the rank-k tail energy of `[X Y]`,
/// which is the global minimum over all factor triples.
pub fn cmf_basic(x: &Matrix, y: &Matrix, k: usize) -> Result<CmfResult> {
    check_inputs(x, y, k)?;
    let start = Instant::now();
    let n1 = x.ncols();
    let n2 = y.ncols();
    let svd = thin_svd(&hcat(x, y)?);
    let u = svd.u.columns(0, k).into_owned();
    // Z = V_k Σ_k, assembled row-block-wise from v_t
    let mut z = Matrix::zeros(n1 + n2, k);
    for t in 0..k {
        let s = svd.spectrum.values()[t];
        for r in 0..n1 + n2 {
            z[(r, t)] = svd.v_t[(t, r)] * s;
        }
    }
    let v = z.rows(0, n1).into_owned();
    let w = z.rows(n1, n2).into_owned();
    let elapsed = start.elapsed().as_secs_f64();
    Ok(CmfResult {
        u,
        v,
        w,
        achieved_p: 0,
        elapsed_total_s: elapsed,
        elapsed_core_s: elapsed,
    })
}

/// Sketch pair for the strategy of `plan`, drawn from one RNG stream
/// (X's sketch first, then Y's).
fn strategy_bases(
    x: &Matrix,
    y: &Matrix,
    plan: &SketchPlan,
    rng: &mut SketchRng,
) -> Result<(Matrix, Matrix)> {
    let k = plan.k;
    match plan.strategy {
        Strategy::Simple => Ok((simple_basis(x, k, rng)?, simple_basis(y, k, rng)?)),
        Strategy::Rsi { q } => Ok((rsi_basis(x, k, q, rng)?, rsi_basis(y, k, q, rng)?)),
        Strategy::Rbki { ell, q } => {
            if 2 * ell * q < k {
                return Err(Error::Param(format!(
                    "RBKI joint capacity 2*ell*q = {} cannot hold rank k = {k}",
                    2 * ell * q
                )));
            }
            Ok((rbki_basis(x, ell, q, rng)?, rbki_basis(y, ell, q, rng)?))
        }
        Strategy::None => Err(Error::Param("strategy 'none' does not sketch".into())),
    }
}

fn randomized_with(x: &Matrix, y: &Matrix, plan: &SketchPlan) -> Result<CmfResult> {
    plan.validate()?;
    check_inputs(x, y, plan.k)?;
    let start = Instant::now();
    let mut rng = plan.rng();
    let (q1, q2) = strategy_bases(x, y, plan, &mut rng)?;
    let jb = joint_basis(&q1, &q2, plan.trunc_tol)?;
    if jb.effective_cols < plan.k {
        return Err(Error::Param(format!(
            "joint basis kept {} columns, fewer than k = {}",
            jb.effective_cols, plan.k
        )));
    }
    let x_proj = jb.q.tr_mul(x);
    let y_proj = jb.q.tr_mul(y);
    let core_start = Instant::now();
    let core = cmf_basic(&x_proj, &y_proj, plan.k)?;
    let elapsed_core_s = core_start.elapsed().as_secs_f64();
    let u = &jb.q * &core.u;
    Ok(CmfResult {
        u,
        v: core.v,
        w: core.w,
        achieved_p: jb.effective_cols - plan.k,
        elapsed_total_s: start.elapsed().as_secs_f64(),
        elapsed_core_s,
    })
}

/// Randomized coupled factorization with one Gaussian sketch per matrix.
pub fn cmf_randomized(x: &Matrix, y: &Matrix, plan: &SketchPlan) -> Result<CmfResult> {
    if !matches!(plan.strategy, Strategy::Simple) {
        return Err(Error::Param("cmf_randomized expects a simple-strategy plan".into()));
    }
    randomized_with(x, y, plan)
}

/// Coupled factorization sketched by randomized subspace iteration.
pub fn cmf_rsi(x: &Matrix, y: &Matrix, plan: &SketchPlan) -> Result<CmfResult> {
    if !matches!(plan.strategy, Strategy::Rsi { .. }) {
        return Err(Error::Param("cmf_rsi expects an RSI plan".into()));
    }
    randomized_with(x, y, plan)
}

/// Coupled factorization sketched by randomized block Krylov iteration.
pub fn cmf_rbki(x: &Matrix, y: &Matrix, plan: &SketchPlan) -> Result<CmfResult> {
    if !matches!(plan.strategy, Strategy::Rbki { .. }) {
        return Err(Error::Param("cmf_rbki expects an RBKI plan".into()));
    }
    randomized_with(x, y, plan)
}

/// Runs the variant selected by `plan.strategy`.
pub fn cmf_with_plan(x: &Matrix, y: &Matrix, plan: &SketchPlan) -> Result<CmfResult> {
    match plan.strategy {
        Strategy::None => {
            plan.validate()?;
            cmf_basic(x, y, plan.k)
        }
        _ => randomized_with(x, y, plan),
    }
}

fn check_result_shapes(x: &Matrix, y: &Matrix, r: &CmfResult) -> Result<()> {
    let k = r.u.ncols();
    if r.v.ncols() != k || r.w.ncols() != k {
        return Err(Error::Shape("factor column counts differ".into()));
    }
    if r.u.nrows() != x.nrows()
        || r.u.nrows() != y.nrows()
        || r.v.nrows() != x.ncols()
        || r.w.nrows() != y.ncols()
    {
        return Err(Error::Shape("factors do not conform to the data pair".into()));
    }
    Ok(())
}

/// Coupled objective `‖X − U Vᵀ‖²_F + ‖Y − U Wᵀ‖²_F`.
pub fn cmf_objective(x: &Matrix, y: &Matrix, r: &CmfResult) -> Result<f64> {
    check_result_shapes(x, y, r)?;
    let rx = x - &r.u * r.v.transpose();
    let ry = y - &r.u * r.w.transpose();
    Ok(rx.norm_squared() + ry.norm_squared())
}

/// Relative errors `(‖X − U Vᵀ‖_F / ‖X‖_F, ‖Y − U Wᵀ‖_F / ‖Y‖_F)`.
pub fn relative_errors(x: &Matrix, y: &Matrix, r: &CmfResult) -> Result<(f64, f64)> {
    check_result_shapes(x, y, r)?;
    let ex = rel_err(x, &(&r.u * r.v.transpose()));
    let ey = rel_err(y, &(&r.u * r.w.transpose()));
    Ok((ex, ey))
}

fn rel_err(data: &Matrix, approx: &Matrix) -> f64 {
    let denom = data.norm();
    let num = (data - approx).norm();
    if denom == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / denom
    }
}

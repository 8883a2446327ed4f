//! Coupled matrix-tensor factorization, sharing the mode-1 factor between
//! an order-3 tensor and a matrix.
//!
//! Two routes: the Tucker-format reduction, which rewrites the problem as a
//! coupled matrix factorization of `(X_(1), Y)` and is solved exactly by the
//! SVD (optionally sketched); and CP-format alternating least squares with
//! closed-form Gram-system microiterations, plus its randomized wrapper.

use std::time::Instant;

use crate::cmf::{cmf_with_plan, CmfResult};
use crate::error::{Error, Result};
use crate::matrix::{hadamard, khatri_rao, Matrix};
use crate::sketch::{gaussian, joint_basis, rbki_basis, rsi_basis, simple_basis, SketchPlan, Strategy};
use crate::tensor::{cp_reconstruct, cp_unfold1, fold1, mode_product, unfold1, unfold2, unfold3, Tensor3};

/// Tucker-form result: the rank-k approximant tensor (the folded `U Vᵀ`)
/// and the factors of the underlying coupled matrix factorization.
///
/// The split of `V` into a core and mode-2/3 factors is not unique, so only
/// the product is materialized.
#[derive(Debug, Clone)]
pub struct TuckerCmtfResult {
    pub x_approx: Tensor3,
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
    pub achieved_p: usize,
    pub elapsed_total_s: f64,
    pub elapsed_core_s: f64,
}

/// CP-form ALS result. `objective_trace` holds the coupled objective after
/// each accepted sweep; it is non-increasing by construction.
#[derive(Debug, Clone)]
pub struct CpCmtfResult {
    pub u: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub w: Matrix,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub achieved_p: usize,
    pub elapsed_total_s: f64,
    pub elapsed_core_s: f64,
}

/// Stopping parameters for the ALS sweeps.
#[derive(Debug, Clone, Copy)]
pub struct AlsOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self { max_iters: 500, rel_tol: 1e-9 }
    }
}

fn check_tucker_inputs(t: &Tensor3, y: &Matrix, k: usize) -> Result<()> {
    let (m, n2, _) = t.dims();
    if y.nrows() != m {
        return Err(Error::Shape(format!(
            "tensor mode-1 size {m} and matrix rows {} differ",
            y.nrows()
        )));
    }
    let n = y.ncols();
    if k == 0 || k >= n2.min(n) {
        return Err(Error::Param(format!(
            "rank k={k} out of range (need 1 <= k < min(n2, n) = {})",
            n2.min(n)
        )));
    }
    Ok(())
}

/// Tucker-format coupled factorization: run the plan-selected coupled
/// matrix factorization on `(X_(1), Y)` and fold `U Vᵀ` back into a tensor.
pub fn cmtf_tucker(t: &Tensor3, y: &Matrix, plan: &SketchPlan) -> Result<TuckerCmtfResult> {
    check_tucker_inputs(t, y, plan.k)?;
    let x1 = unfold1(t);
    let r = cmf_with_plan(&x1, y, plan)?;
    let x_approx = fold1(&(&r.u * r.v.transpose()), t.dims())?;
    let CmfResult { u, v, w, achieved_p, elapsed_total_s, elapsed_core_s } = r;
    Ok(TuckerCmtfResult { x_approx, u, v, w, achieved_p, elapsed_total_s, elapsed_core_s })
}

/// Relative errors of a Tucker-form result:
/// `(‖T − X_approx‖ / ‖T‖, ‖Y − U Wᵀ‖_F / ‖Y‖_F)`.
pub fn tucker_errors(t: &Tensor3, y: &Matrix, r: &TuckerCmtfResult) -> Result<(f64, f64)> {
    if r.x_approx.dims() != t.dims() {
        return Err(Error::Shape("approximant dims differ from the tensor".into()));
    }
    let num: f64 = t
        .data()
        .iter()
        .zip(r.x_approx.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let ex = rel(num, t.norm());
    let ey = rel((y - &r.u * r.w.transpose()).norm(), y.norm());
    Ok((ex, ey))
}

/// Coupled objective of a Tucker-form result,
/// `‖X_(1) − U Vᵀ‖²_F + ‖Y − U Wᵀ‖²_F`.
pub fn tucker_objective(t: &Tensor3, y: &Matrix, r: &TuckerCmtfResult) -> Result<f64> {
    let x1 = unfold1(t);
    let rx = &x1 - &r.u * r.v.transpose();
    let ry = y - &r.u * r.w.transpose();
    Ok(rx.norm_squared() + ry.norm_squared())
}

fn rel(num: f64, denom: f64) -> f64 {
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

fn check_cp_inputs(t: &Tensor3, y: &Matrix, k: usize) -> Result<()> {
    let (m, n2, n3) = t.dims();
    if y.nrows() != m {
        return Err(Error::Shape(format!(
            "tensor mode-1 size {m} and matrix rows {} differ",
            y.nrows()
        )));
    }
    let n = y.ncols();
    if k == 0 || k >= n2.min(n3).min(n) {
        return Err(Error::Param(format!(
            "rank k={k} out of range (need 1 <= k < min(n2, n3, n) = {})",
            n2.min(n3).min(n)
        )));
    }
    Ok(())
}

/// Solves `Z * gram = rhs` for `Z`, with `gram` symmetric k-by-k.
///
/// Uses an SVD pseudo-inverse that truncates singular values below
/// `sigma_max / 1e12`, which coincides with the exact inverse whenever the
/// system is well conditioned. A numerically zero Gram matrix or a
/// non-finite solution is a degenerate iterate.
fn solve_gram(gram: &Matrix, rhs: &Matrix, iteration: usize, what: &str) -> Result<Matrix> {
    let svd = crate::matrix::thin_svd(gram);
    let smax = svd.spectrum.values().first().copied().unwrap_or(0.0);
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::Degenerate {
            iteration,
            reason: format!("{what} Gram system is numerically zero"),
        });
    }
    // pinv = V Σ⁺ Uᵀ with σ below smax/1e12 dropped
    let cut = smax * 1e-12;
    let mut ut_scaled = svd.u.transpose();
    for (i, &s) in svd.spectrum.values().iter().enumerate() {
        let inv = if s > cut { 1.0 / s } else { 0.0 };
        ut_scaled.row_mut(i).scale_mut(inv);
    }
    let pinv = svd.v_t.transpose() * ut_scaled;
    let z = rhs * pinv;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate {
            iteration,
            reason: format!("{what} update produced non-finite entries"),
        });
    }
    Ok(z)
}

fn cp_objective_from(x1: &Matrix, y: &Matrix, u: &Matrix, b: &Matrix, c: &Matrix, w: &Matrix) -> Result<f64> {
    let rx = x1 - u * khatri_rao(c, b)?.transpose();
    let ry = y - u * w.transpose();
    Ok(rx.norm_squared() + ry.norm_squared())
}

/// CP-format coupled factorization by alternating least squares.
///
/// Factors start as i.i.d. standard normal draws from `init_seed`; each
/// sweep updates `U, B, C, W` in that order through their closed-form Gram
/// systems and stops when the relative objective change drops below
/// `opts.rel_tol`, when `opts.max_iters` sweeps have run, or when rounding
/// stalls the descent (the sweep is then rolled back, keeping the trace
/// non-increasing).
pub fn cmtf_cp_als(
    t: &Tensor3,
    y: &Matrix,
    k: usize,
    init_seed: u64,
    opts: &AlsOptions,
) -> Result<CpCmtfResult> {
    check_cp_inputs(t, y, k)?;
    let start = Instant::now();
    let (m, n2, n3) = t.dims();
    let n = y.ncols();
    let mut rng = crate::sketch::seeded_rng(init_seed);
    let mut u = gaussian(m, k, &mut rng)?;
    let mut b = gaussian(n2, k, &mut rng)?;
    let mut c = gaussian(n3, k, &mut rng)?;
    let mut w = gaussian(n, k, &mut rng)?;

    let x1 = unfold1(t);
    let x2 = unfold2(t);
    let x3 = unfold3(t);

    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    for it in 1..=opts.max_iters {
        let snapshot = (u.clone(), b.clone(), c.clone(), w.clone());

        let gamma1 = hadamard(&b.tr_mul(&b), &c.tr_mul(&c))?;
        let lhs_u = &gamma1 + w.tr_mul(&w);
        let rhs_u = &x1 * khatri_rao(&c, &b)? + y * &w;
        u = solve_gram(&lhs_u, &rhs_u, it, "U")?;

        let gamma2 = hadamard(&u.tr_mul(&u), &c.tr_mul(&c))?;
        b = solve_gram(&gamma2, &(&x2 * khatri_rao(&c, &u)?), it, "B")?;

        let gamma3 = hadamard(&u.tr_mul(&u), &b.tr_mul(&b))?;
        c = solve_gram(&gamma3, &(&x3 * khatri_rao(&b, &u)?), it, "C")?;

        w = solve_gram(&u.tr_mul(&u), &(y.tr_mul(&u)), it, "W")?;

        let f = cp_objective_from(&x1, y, &u, &b, &c, &w)?;
        match trace.last().copied() {
            Some(prev) if f > prev => {
                // rounding-level stall: roll the sweep back and stop
                (u, b, c, w) = snapshot;
                break;
            }
            Some(prev) => {
                trace.push(f);
                iterations = it;
                if prev - f <= opts.rel_tol * prev {
                    break;
                }
            }
            None => {
                trace.push(f);
                iterations = it;
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    Ok(CpCmtfResult {
        u,
        b,
        c,
        w,
        iterations,
        objective_trace: trace,
        achieved_p: 0,
        elapsed_total_s: elapsed,
        elapsed_core_s: elapsed,
    })
}

/// Randomized CP-format coupled factorization: sketch `(X_(1), Y)` with the
/// plan's strategy, run the ALS on the projected pair `(T ×_1 Qᵀ, Qᵀ Y)`,
/// and lift `U = Q Û`. `B`, `C`, `W` come back unchanged; the trace is the
/// projected-problem objective.
pub fn cmtf_cp_als_randomized(
    t: &Tensor3,
    y: &Matrix,
    plan: &SketchPlan,
    init_seed: u64,
    opts: &AlsOptions,
) -> Result<CpCmtfResult> {
    plan.validate()?;
    check_cp_inputs(t, y, plan.k)?;
    let start = Instant::now();
    let k = plan.k;
    let mut rng = plan.rng();
    let x1 = unfold1(t);
    let (q1, q2) = match plan.strategy {
        Strategy::Simple => (simple_basis(&x1, k, &mut rng)?, simple_basis(y, k, &mut rng)?),
        Strategy::Rsi { q } => (rsi_basis(&x1, k, q, &mut rng)?, rsi_basis(y, k, q, &mut rng)?),
        Strategy::Rbki { ell, q } => {
            if 2 * ell * q < k {
                return Err(Error::Param(format!(
                    "RBKI joint capacity 2*ell*q = {} cannot hold rank k = {k}",
                    2 * ell * q
                )));
            }
            (rbki_basis(&x1, ell, q, &mut rng)?, rbki_basis(y, ell, q, &mut rng)?)
        }
        Strategy::None => {
            return Err(Error::Param(
                "randomized ALS needs a sketching strategy; call cmtf_cp_als for the basic algorithm"
                    .into(),
            ))
        }
    };
    let jb = joint_basis(&q1, &q2, plan.trunc_tol)?;
    if jb.effective_cols < k {
        return Err(Error::Param(format!(
            "joint basis kept {} columns, fewer than k = {k}",
            jb.effective_cols
        )));
    }
    let t_proj = mode_product(t, &jb.q.transpose(), 1)?;
    let y_proj = jb.q.tr_mul(y);
    let core_start = Instant::now();
    let inner = cmtf_cp_als(&t_proj, &y_proj, k, init_seed, opts)?;
    let elapsed_core_s = core_start.elapsed().as_secs_f64();
    Ok(CpCmtfResult {
        u: &jb.q * &inner.u,
        b: inner.b,
        c: inner.c,
        w: inner.w,
        iterations: inner.iterations,
        objective_trace: inner.objective_trace,
        achieved_p: jb.effective_cols - k,
        elapsed_total_s: start.elapsed().as_secs_f64(),
        elapsed_core_s,
    })
}

/// Relative errors of a CP-form result:
/// `(‖T − [[U, B, C]]‖ / ‖T‖, ‖Y − U Wᵀ‖_F / ‖Y‖_F)`.
pub fn cp_errors(t: &Tensor3, y: &Matrix, r: &CpCmtfResult) -> Result<(f64, f64)> {
    let recon = cp_reconstruct(&r.u, &r.b, &r.c)?;
    if recon.dims() != t.dims() {
        return Err(Error::Shape("CP factors do not conform to the tensor".into()));
    }
    let num: f64 = t
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, bb)| (a - bb) * (a - bb))
        .sum::<f64>()
        .sqrt();
    let ex = rel(num, t.norm());
    let ey = rel((y - &r.u * r.w.transpose()).norm(), y.norm());
    Ok((ex, ey))
}

/// Coupled objective of a CP-form result against the original data,
/// `‖X_(1) − U (C ⊙ B)ᵀ‖²_F + ‖Y − U Wᵀ‖²_F`.
pub fn cp_objective(t: &Tensor3, y: &Matrix, r: &CpCmtfResult) -> Result<f64> {
    let x1 = unfold1(t);
    let rx = &x1 - cp_unfold1(&r.u, &r.b, &r.c)?;
    let ry = y - &r.u * r.w.transpose();
    Ok(rx.norm_squared() + ry.norm_squared())
}

//! Dense matrix carrier plus the small-matrix products and SVD helpers used
//! throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<f64>` (column-major). Boundary
//! constructors in [`crate::io`], [`crate::testgen`] and [`crate::facerec`]
//! reject non-finite entries, so any NaN appearing downstream points at an
//! internal defect rather than bad input.

use crate::error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;

/// Checks that every entry of `m` is finite.
pub fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite(format!("{what} entry ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Frobenius norm of a matrix.
pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.norm()
}

/// Column-wise Kronecker product of two matrices with equal column counts.
///
/// Column `j` of the result is `a_j ⊗ b_j`, so the result has
/// `a.nrows() * b.nrows()` rows.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::Shape(format!(
            "khatri_rao: column counts differ ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let (ra, rb, c) = (a.nrows(), b.nrows(), a.ncols());
    let mut out = Matrix::zeros(ra * rb, c);
    for j in 0..c {
        for ia in 0..ra {
            let av = a[(ia, j)];
            for ib in 0..rb {
                out[(ia * rb + ib, j)] = av * b[(ib, j)];
            }
        }
    }
    Ok(out)
}

/// Entrywise product of two same-shape matrices.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "hadamard: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a.component_mul(b))
}

/// Ordered list of non-negative singular values, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSpectrum {
    values: Vec<f64>,
}

impl DiagSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for w in values.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(Error::Param(format!(
                    "spectrum not descending: {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = values.last() {
            if !(last >= 0.0) {
                return Err(Error::Param(format!("negative singular value {last}")));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Squared-Frobenius mass beyond the first `k` values: `Σ_{i>k} σ_i²`.
    pub fn tail_energy(&self, k: usize) -> f64 {
        self.values.iter().skip(k).map(|s| s * s).sum()
    }

    /// Number of values at or above `rel_tol` times the largest value.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        match self.values.first() {
            None => 0,
            Some(&s0) if s0 == 0.0 => 0,
            Some(&s0) => self.values.iter().take_while(|&&s| s >= rel_tol * s0).count(),
        }
    }
}

/// Thin SVD `a = u * diag(s) * v_t` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub spectrum: DiagSpectrum,
    pub v_t: Matrix,
}

/// Thin SVD, verified.
///
/// The matrix is first reduced to a square `min(m, n)` factor by a
/// Householder QR (of the transpose when wide), which is an exact
/// reformulation and bounds the iterative work. The square factor goes
/// through nalgebra's implicit-shift SVD, whose result is checked against
/// the input; on the rare inputs where that iteration goes wrong (observed
/// on exactly rank-deficient matrices) a one-sided Jacobi SVD takes over.
pub fn thin_svd(a: &Matrix) -> ThinSvd {
    let (m, n) = a.shape();
    if m >= n {
        let qr = a.clone().qr();
        let q = qr.q();
        let (ur, sv, v_t) = svd_square_verified(&qr.r());
        ThinSvd {
            u: q * ur,
            spectrum: DiagSpectrum::new(sv).expect("sorted by construction"),
            v_t,
        }
    } else {
        // a = Rᵀ Qᵀ with aᵀ = Q R; then Rᵀ = U Σ Wᵀ gives a = U Σ (Q W)ᵀ
        let qr = a.transpose().qr();
        let q = qr.q();
        let (u, sv, w_t) = svd_square_verified(&qr.r().transpose());
        ThinSvd {
            u,
            spectrum: DiagSpectrum::new(sv).expect("sorted by construction"),
            v_t: w_t * q.transpose(),
        }
    }
}

/// Singular values only, sorted descending, via the verified path.
pub fn singular_values(a: &Matrix) -> DiagSpectrum {
    thin_svd(a).spectrum
}

/// SVD of a square matrix: nalgebra fast path with residual and
/// orthogonality verification, Jacobi fallback. Returns `(u, sv, v_t)`
/// with `sv` sorted descending.
fn svd_square_verified(s: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let n = s.nrows();
    debug_assert_eq!(n, s.ncols());
    if n == 0 {
        return (Matrix::zeros(0, 0), Vec::new(), Matrix::zeros(0, 0));
    }
    let svd = s.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let sv: Vec<f64> = svd.singular_values.as_slice().to_vec();
    if svd_acceptable(s, &u, &sv, &v_t) {
        return (u, sv, v_t);
    }
    jacobi_svd(s)
}

fn svd_acceptable(s: &Matrix, u: &Matrix, sv: &[f64], v_t: &Matrix) -> bool {
    let n = s.nrows();
    if sv.windows(2).any(|w| !(w[0] >= w[1])) || sv.iter().any(|&x| !(x >= 0.0)) {
        return false;
    }
    let scale = s.norm().max(f64::MIN_POSITIVE);
    let mut recon = u.clone();
    for (j, &x) in sv.iter().enumerate() {
        recon.column_mut(j).scale_mut(x);
    }
    let resid = (recon * v_t - s).norm();
    if resid > 1e-11 * scale * (n as f64).max(1.0).sqrt() {
        return false;
    }
    let orth_u = (u.tr_mul(u) - Matrix::identity(n, n)).norm();
    let orth_v = (v_t * v_t.transpose() - Matrix::identity(n, n)).norm();
    orth_u <= 1e-10 * (n as f64).sqrt() && orth_v <= 1e-10 * (n as f64).sqrt()
}

/// One-sided Jacobi SVD of a square matrix. Slower than the implicit-shift
/// iteration but unconditionally accurate: columns are rotated until
/// mutually orthogonal, so the factorization holds by construction.
fn jacobi_svd(s: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = Matrix::identity(n, n);
    let tol = 1e-15;
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if app == 0.0 || aqq == 0.0 || apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = c * x - sn * y;
                    a[(i, q)] = sn * x + c * y;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = c * x - sn * y;
                    v[(i, q)] = sn * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let sigma_max = order.first().map(|&j| norms[j]).unwrap_or(0.0);
    let zero_cut = sigma_max * (n as f64) * f64::EPSILON;
    let mut u = Matrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    let mut v_sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sv.push(norms[src]);
        v_sorted.set_column(dst, &v.column(src));
        if norms[src] > zero_cut {
            let col = a.column(src) / norms[src];
            u.set_column(dst, &col);
        }
    }
    // complete the numerically-zero directions to an orthonormal basis
    for j in 0..n {
        if u.column(j).norm() > 0.5 {
            continue;
        }
        sv[j] = 0.0;
        let mut best = nalgebra::DVector::<f64>::zeros(n);
        let mut best_norm = -1.0;
        for e in 0..n {
            let mut cand = nalgebra::DVector::<f64>::zeros(n);
            cand[e] = 1.0;
            for _ in 0..2 {
                for l in 0..n {
                    if l == j {
                        continue;
                    }
                    let proj = u.column(l).dot(&cand);
                    cand -= u.column(l) * proj;
                }
            }
            let nrm = cand.norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = cand;
            }
        }
        best /= best_norm.max(f64::MIN_POSITIVE);
        u.set_column(j, &best);
    }
    (u, sv, v_sorted.transpose())
}

/// Sines of the principal angles between `range(a)` and `range(b)`.
///
/// Computed from the projection residual `(I - Q_a Q_a^T) Q_b`, which stays
/// accurate for angles near zero where the cosine formulation loses all
/// digits. Returned ascending (smallest angle first).
pub fn principal_angle_sines(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "principal angles: row counts differ ({} vs {})",
            a.nrows(),
            b.nrows()
        )));
    }
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let resid = &qb - &qa * (qa.tr_mul(&qb));
    let mut sines = singular_values(&resid).values().to_vec();
    sines.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sines.truncate(qa.ncols().min(qb.ncols()));
    Ok(sines)
}

/// Stacks `x` and `y` side by side into `[x y]`.
pub fn hcat(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.nrows() != y.nrows() {
        return Err(Error::Shape(format!(
            "hcat: row counts differ ({} vs {})",
            x.nrows(),
            y.nrows()
        )));
    }
    let m = x.nrows();
    let (n1, n2) = (x.ncols(), y.ncols());
    let mut out = Matrix::zeros(m, n1 + n2);
    out.view_mut((0, 0), (m, n1)).copy_from(x);
    out.view_mut((0, n1), (m, n2)).copy_from(y);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn khatri_rao_identity_columns() {
        let i2 = Matrix::identity(2, 2);
        let kr = khatri_rao(&i2, &i2).unwrap();
        assert_eq!(kr.shape(), (4, 2));
        // e1⊗e1 and e2⊗e2
        let expect = Matrix::from_column_slice(4, 2, &[1., 0., 0., 0., 0., 0., 0., 1.]);
        assert_eq!(kr, expect);
    }

    #[test]
    fn khatri_rao_single_column() {
        let a = Matrix::from_column_slice(2, 1, &[1., 2.]);
        let b = Matrix::from_column_slice(2, 1, &[3., 4.]);
        let kr = khatri_rao(&a, &b).unwrap();
        assert_eq!(kr.as_slice(), &[3., 4., 6., 8.]);
    }

    #[test]
    fn khatri_rao_rejects_column_mismatch() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 2);
        assert!(matches!(khatri_rao(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn hadamard_direct_definition() {
        let a = Matrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let b = Matrix::from_row_slice(2, 2, &[5., 6., 7., 8.]);
        let h = hadamard(&a, &b).unwrap();
        assert_eq!(h, Matrix::from_row_slice(2, 2, &[5., 12., 21., 32.]));
    }

    #[test]
    fn hadamard_ones_is_identity() {
        let a = Matrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let ones = Matrix::from_element(3, 4, 1.0);
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
    }

    #[test]
    fn hadamard_rejects_shape_mismatch() {
        assert!(matches!(
            hadamard(&Matrix::zeros(2, 2), &Matrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn frobenius_known_values() {
        assert!((frobenius_norm(&Matrix::identity(3, 3)) - 3f64.sqrt()).abs() < 1e-15);
        let v = Matrix::from_row_slice(1, 2, &[3., 4.]);
        assert!((frobenius_norm(&v) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn spectrum_validation_and_tail() {
        let s = DiagSpectrum::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.tail_energy(1), 5.0);
        assert_eq!(s.tail_energy(3), 0.0);
        assert_eq!(s.numerical_rank(1e-10), 3);
        assert!(DiagSpectrum::new(vec![1.0, 2.0]).is_err());
        assert!(DiagSpectrum::new(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn thin_svd_reconstructs_and_orders() {
        let a = Matrix::from_fn(17, 5, |i, j| ((3 * i + 7 * j) % 11) as f64 - 5.0);
        let svd = thin_svd(&a);
        let s = Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(svd.spectrum.values()));
        let recon = &svd.u * s * &svd.v_t;
        assert!((recon - &a).norm() / a.norm() < 1e-13);
        // tall path and direct path agree on the spectrum
        let direct = a.clone().svd(false, false);
        for (x, y) in svd.spectrum.values().iter().zip(direct.singular_values.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn angle_sines_detect_shared_and_disjoint() {
        let a = Matrix::from_column_slice(4, 2, &[1., 0., 0., 0., 0., 1., 0., 0.]);
        let b = Matrix::from_column_slice(4, 2, &[1., 0., 0., 0., 0., 0., 1., 0.]);
        let sines = principal_angle_sines(&a, &b).unwrap();
        assert!(sines[0] < 1e-14); // shared e1
        assert!((sines[1] - 1.0).abs() < 1e-12); // e2 vs e3 orthogonal
    }

    #[test]
    fn ensure_finite_flags_nan() {
        let mut m = Matrix::zeros(2, 2);
        m[(1, 0)] = f64::NAN;
        assert!(matches!(ensure_finite(&m, "test"), Err(Error::NonFinite(_))));
    }
}

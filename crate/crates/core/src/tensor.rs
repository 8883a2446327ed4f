//! Dense order-3 tensor with the matricizations, mode products and CP
//! kernels the factorization routines consume.
//!
//! Storage is column-major in the first mode: entry `(i, j, l)` lives at
//! linear index `i + n1*j + n1*n2*l`. With that layout the mode-1 unfolding
//! (fiber at column `j + l*n2`, Kolda–Bader ordering) is exactly the raw
//! buffer, so `unfold1`/`fold1` are plain copies. Mode-2 and mode-3
//! unfoldings use columns `i + l*n1` and `i + j*n1` of the respective
//! fiber matrices (same convention).

use crate::error::{Error, Result};
use crate::matrix::{khatri_rao, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    /// Builds a tensor from a mode-1 column-major buffer.
    pub fn new(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (n1, n2, n3) = dims;
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::Param(format!("tensor dims must be positive, got {dims:?}")));
        }
        if data.len() != n1 * n2 * n3 {
            return Err(Error::Shape(format!(
                "tensor data length {} != {}*{}*{}",
                data.len(),
                n1,
                n2,
                n3
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor entry at linear index {pos}")));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let (n1, n2, n3) = dims;
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for l in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, l));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Result<Self> {
        let (n1, n2, n3) = dims;
        Self::new(dims, vec![0.0; n1 * n2 * n3])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Frobenius-style tensor norm, `sqrt(Σ x_{ijl}²)`.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn lin(&self, i: usize, j: usize, l: usize) -> usize {
        let (n1, n2, _) = self.dims;
        i + n1 * j + n1 * n2 * l
    }
}

impl std::ops::Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, l): (usize, usize, usize)) -> &f64 {
        &self.data[self.lin(i, j, l)]
    }
}

/// Free-function alias for [`Tensor3::norm`].
pub fn tensor_norm(t: &Tensor3) -> f64 {
    t.norm()
}

/// Mode-1 matricization: `n1 × (n2·n3)`, entry `(i,j,l)` at column `j + l*n2`.
pub fn unfold1(t: &Tensor3) -> Matrix {
    let (n1, n2, n3) = t.dims;
    Matrix::from_column_slice(n1, n2 * n3, &t.data)
}

/// Mode-2 matricization: `n2 × (n1·n3)`, entry `(i,j,l)` at column `i + l*n1`.
pub fn unfold2(t: &Tensor3) -> Matrix {
    let (n1, n2, n3) = t.dims;
    let mut out = Matrix::zeros(n2, n1 * n3);
    for l in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                out[(j, i + l * n1)] = t.data[t.lin(i, j, l)];
            }
        }
    }
    out
}

/// Mode-3 matricization: `n3 × (n1·n2)`, entry `(i,j,l)` at column `i + j*n1`.
pub fn unfold3(t: &Tensor3) -> Matrix {
    let (n1, n2, n3) = t.dims;
    let mut out = Matrix::zeros(n3, n1 * n2);
    for l in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                out[(l, i + j * n1)] = t.data[t.lin(i, j, l)];
            }
        }
    }
    out
}

/// Exact inverse of [`unfold1`] for the stated dimensions.
pub fn fold1(m: &Matrix, dims: (usize, usize, usize)) -> Result<Tensor3> {
    let (n1, n2, n3) = dims;
    if m.nrows() != n1 || m.ncols() != n2 * n3 {
        return Err(Error::Shape(format!(
            "fold1: matrix is {}x{}, dims {:?} need {}x{}",
            m.nrows(),
            m.ncols(),
            dims,
            n1,
            n2 * n3
        )));
    }
    Tensor3::new(dims, m.as_slice().to_vec())
}

fn fold2(m: &Matrix, dims: (usize, usize, usize)) -> Result<Tensor3> {
    let (n1, n2, n3) = dims;
    if m.nrows() != n2 || m.ncols() != n1 * n3 {
        return Err(Error::Shape(format!(
            "fold2: matrix is {}x{}, dims {:?} need {}x{}",
            m.nrows(),
            m.ncols(),
            dims,
            n2,
            n1 * n3
        )));
    }
    Tensor3::from_fn(dims, |i, j, l| m[(j, i + l * n1)])
}

fn fold3(m: &Matrix, dims: (usize, usize, usize)) -> Result<Tensor3> {
    let (n1, n2, n3) = dims;
    if m.nrows() != n3 || m.ncols() != n1 * n2 {
        return Err(Error::Shape(format!(
            "fold3: matrix is {}x{}, dims {:?} need {}x{}",
            m.nrows(),
            m.ncols(),
            dims,
            n3,
            n1 * n2
        )));
    }
    Tensor3::from_fn(dims, |i, j, l| m[(l, i + j * n1)])
}

/// Mode-`mode` product `t ×_mode m`: every mode-`mode` fiber is multiplied
/// by `m`, so the unfolding in that mode becomes `m * unfold_mode(t)`.
pub fn mode_product(t: &Tensor3, m: &Matrix, mode: usize) -> Result<Tensor3> {
    let (n1, n2, n3) = t.dims();
    let dim = match mode {
        1 => n1,
        2 => n2,
        3 => n3,
        _ => return Err(Error::Param(format!("mode must be 1, 2 or 3, got {mode}"))),
    };
    if m.ncols() != dim {
        return Err(Error::Shape(format!(
            "mode-{mode} product: matrix has {} cols, tensor mode has size {dim}",
            m.ncols()
        )));
    }
    match mode {
        1 => fold1(&(m * unfold1(t)), (m.nrows(), n2, n3)),
        2 => fold2(&(m * unfold2(t)), (n1, m.nrows(), n3)),
        _ => fold3(&(m * unfold3(t)), (n1, n2, m.nrows())),
    }
}

/// Sum of rank-one outer products `Σ_t a_t ∘ b_t ∘ c_t`, evaluated
/// entrywise from the definition.
pub fn cp_reconstruct(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Tensor3> {
    let r = a.ncols();
    if b.ncols() != r || c.ncols() != r {
        return Err(Error::Shape(format!(
            "cp_reconstruct: factor column counts {} / {} / {} differ",
            a.ncols(),
            b.ncols(),
            c.ncols()
        )));
    }
    Tensor3::from_fn((a.nrows(), b.nrows(), c.nrows()), |i, j, l| {
        (0..r).map(|t| a[(i, t)] * b[(j, t)] * c[(l, t)]).sum()
    })
}

/// Mode-1 matricization of `[[a, b, c]]` via the Khatri-Rao identity
/// `X_(1) = A (C ⊙ B)^T`. Used by the ALS objective.
pub fn cp_unfold1(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    Ok(a * khatri_rao(c, b)?.transpose())
}

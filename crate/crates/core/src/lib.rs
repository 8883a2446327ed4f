//! Coupled low-rank factorizations of matrix pairs and tensor-matrix pairs
//! with a shared mode-1 factor, solved directly by a truncated SVD of the
//! concatenation or through randomized sketching (simple projection,
//! subspace iteration, block Krylov iteration), plus synthetic benchmark
//! generators and a face-recognition pipeline driven by coupled
//! approximation error.

pub mod cmf;
pub mod cmtf;
pub mod error;
pub mod facerec;
pub mod io;
pub mod matrix;
pub mod sketch;
pub mod tensor;
pub mod testgen;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor::Tensor3;

//! Dense linear algebra, reverse-mode autodiff, seeded randomness and Adam.

mod adam;
mod gradcheck;
mod matrix;
mod rng;
mod tape;

pub use adam::Adam;
pub use gradcheck::{compare_with_fd, grad_check, GradCheck};
pub use matrix::{matmul, matmul_nt, matmul_tn, Matrix};
pub use rng::{derive_seed, fnv1a, mix64, Rng};
pub use tape::{sigmoid, stable_bce, Gradients, Tape, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength {
        len: usize,
        rows: usize,
        cols: usize,
    },
    #[error("finite-difference step {0} outside (0, 1e-2]")]
    BadStep(f64),
    #[error("non-finite loss when perturbing parameter {param} entry {index}")]
    NonFinite { param: usize, index: usize },
}

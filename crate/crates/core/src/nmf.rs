//! Non-negative matrix factorization baseline on the user × assertion matrix.

use thiserror::Error;

use crate::bhin::{BhinGraph, NodeKind};
use crate::embedding::{Embedding, EmbeddingError};
use crate::evalkit::assign_axis;
use crate::numkit::{matmul, matmul_nt, matmul_tn, Matrix, NumError, Rng};

/// Floor applied to every factor entry after each update.
pub const NMF_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NmfError {
    #[error("matrix is empty or all zero")]
    Degenerate,
    #[error("matrix has a negative or non-finite entry at ({row}, {col})")]
    InvalidEntry { row: usize, col: usize },
    #[error("rank must be at least 1")]
    BadRank,
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NmfFactors {
    /// `n_users × k`.
    pub w: Matrix,
    /// `k × n_assertions`.
    pub h: Matrix,
    /// `‖B − WH‖²_F` before the first update and after every iteration.
    pub loss_history: Vec<f64>,
}

impl NmfFactors {
    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().unwrap_or(&f64::NAN)
    }
}

pub fn frobenius_loss(b: &Matrix, w: &Matrix, h: &Matrix) -> Result<f64, NumError> {
    let wh = matmul(w, h)?;
    Ok(b.data()
        .iter()
        .zip(wh.data())
        .map(|(x, y)| (x - y).powi(2))
        .sum())
}

/// Lee–Seung multiplicative updates minimizing `‖B − WH‖²_F`.
pub fn nmf_factorize(
    b: &Matrix,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<NmfFactors, NmfError> {
    if k == 0 {
        return Err(NmfError::BadRank);
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            let v = b.get(r, c);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(NmfError::InvalidEntry { row: r, col: c });
            }
        }
    }
    if b.is_empty() || b.sum() == 0.0 {
        return Err(NmfError::Degenerate);
    }
    let mut rng = Rng::new(seed);
    let scale = (b.sum() / b.len() as f64 / k as f64).sqrt();
    let mut w = Matrix::from_fn(b.rows(), k, |_, _| scale * (0.1 + rng.uniform()));
    let mut h = Matrix::from_fn(k, b.cols(), |_, _| scale * (0.1 + rng.uniform()));
    let mut loss_history = vec![frobenius_loss(b, &w, &h)?];

    for _ in 0..iters {
        // H ← H ⊙ (WᵀB) ⊘ (WᵀW H)
        let num = matmul_tn(&w, b)?;
        let wtw = matmul_tn(&w, &w)?;
        let den = matmul(&wtw, &h)?;
        for ((hv, n), d) in h.data_mut().iter_mut().zip(num.data()).zip(den.data()) {
            *hv = (*hv * n / d.max(NMF_FLOOR)).max(NMF_FLOOR);
        }
        // W ← W ⊙ (B Hᵀ) ⊘ (W H Hᵀ)
        let num = matmul_nt(b, &h)?;
        let hht = matmul_nt(&h, &h)?;
        let den = matmul(&w, &hht)?;
        for ((wv, n), d) in w.data_mut().iter_mut().zip(num.data()).zip(den.data()) {
            *wv = (*wv * n / d.max(NMF_FLOOR)).max(NMF_FLOOR);
        }
        loss_history.push(frobenius_loss(b, &w, &h)?);
    }
    Ok(NmfFactors { w, h, loss_history })
}

/// Component with the largest loading per assertion column; ties go to the
/// lower index and are flagged.
pub fn nmf_classify(f: &NmfFactors) -> Vec<(usize, bool)> {
    (0..f.h.cols())
        .map(|j| assign_axis(&f.h.column(j)))
        .collect()
}

/// Factorizes a graph's biadjacency and lays the factors out in node order:
/// user rows from `W`, assertion rows from columns of `H`.
pub fn nmf_embedding(
    g: &BhinGraph,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<(Embedding, NmfFactors), NmfError> {
    let b = g.biadjacency();
    let f = nmf_factorize(&b, k, iters, seed)?;
    let mut coords = Matrix::zeros(g.node_count(), k);
    let (mut ui, mut ai) = (0, 0);
    for (r, node) in g.nodes().iter().enumerate() {
        match node.kind {
            NodeKind::User => {
                coords.row_mut(r).copy_from_slice(f.w.row(ui));
                ui += 1;
            }
            NodeKind::Assertion => {
                for t in 0..k {
                    coords.set(r, t, f.h.get(t, ai));
                }
                ai += 1;
            }
        }
    }
    Ok((Embedding::from_graph(g, coords)?, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_matrix() -> Matrix {
        // users 0..4 post assertions 0..5, users 4..8 post 5..10
        Matrix::from_fn(8, 10, |u, a| {
            if (u < 4) == (a < 5) && (u + a) % 3 != 0 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn rank_one_is_recovered() {
        let w = [1.0, 2.0, 0.5, 3.0];
        let h = [0.2, 1.0, 4.0];
        let b = Matrix::from_fn(4, 3, |r, c| w[r] * h[c]);
        let f = nmf_factorize(&b, 1, 500, 7).unwrap();
        assert!(f.final_loss() < 1e-8, "{}", f.final_loss());
    }

    #[test]
    fn loss_never_increases_and_factors_stay_non_negative() {
        let b = block_matrix();
        for iters in [1, 5, 50] {
            let f = nmf_factorize(&b, 2, iters, 3).unwrap();
            assert!(f.w.data().iter().chain(f.h.data()).all(|&v| v >= 0.0));
            for pair in f.loss_history.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-10, "{pair:?}");
            }
        }
    }

    #[test]
    fn block_structure_is_recovered() {
        let f = nmf_factorize(&block_matrix(), 2, 500, 11).unwrap();
        let axes: Vec<usize> = nmf_classify(&f).into_iter().map(|(a, _)| a).collect();
        let first = axes[0];
        for (j, &a) in axes.iter().enumerate() {
            assert_eq!(a == first, j < 5, "{axes:?}");
        }
    }

    #[test]
    fn classify_ties_and_argmax() {
        let f = NmfFactors {
            w: Matrix::zeros(1, 2),
            h: Matrix::from_rows(&[vec![0.9, 0.3], vec![0.1, 0.3]]),
            loss_history: vec![],
        };
        assert_eq!(nmf_classify(&f), vec![(0, false), (0, true)]);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            nmf_factorize(&Matrix::zeros(2, 2), 2, 5, 1),
            Err(NmfError::Degenerate)
        ));
        assert!(matches!(
            nmf_factorize(&Matrix::filled(2, 2, 1.0), 0, 5, 1),
            Err(NmfError::BadRank)
        ));
        assert!(matches!(
            nmf_factorize(&Matrix::from_rows(&[vec![1.0, -1.0]]), 1, 5, 1),
            Err(NmfError::InvalidEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn seed_determinism() {
        let a = nmf_factorize(&block_matrix(), 2, 100, 5).unwrap();
        let b = nmf_factorize(&block_matrix(), 2, 100, 5).unwrap();
        assert_eq!(a, b);
    }
}

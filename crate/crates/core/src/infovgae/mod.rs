//! Variational graph auto-encoder with a rectified-Gaussian latent space,
//! total-correlation penalty and PI-controlled KL weight.

mod anchors;
mod config;
mod disc;
mod model;
mod pi;
mod train;

pub use anchors::select_anchors;
pub use config::TrainConfig;
pub use disc::{permute_dims, Discriminator};
pub use model::{
    anchor_mask, anchor_on_tape, anchor_penalty, decode, encode, encode_on_tape, glorot,
    kl_on_tape, kl_term, objective_on_tape, recon_loss, recon_on_tape, rectified_sample,
    reparameterize, reparameterize_on_tape, sample_noise, tc_loss, tc_on_tape, AnchorLabel,
    EncoderParams, EncoderVars, ObjectiveInputs, ObjectiveVars, ReconTargets, LOG_SIGMA_MAX,
    LOG_SIGMA_MIN,
};
pub use pi::PiController;
pub use train::{train, EpochRecord, LatentState, TrainOutcome};

use thiserror::Error;

use crate::numkit::NumError;

#[derive(Debug, Error)]
pub enum InfoVgaeError {
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("adjacency has no non-zero entries")]
    DegenerateGraph,
    #[error("adjacency matrix is not square and symmetric")]
    AsymmetricAdjacency,
    #[error("anchor on node {node} axis {axis} is out of range")]
    InvalidAnchor { node: usize, axis: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("non-finite loss at epoch {epoch}: recon={recon} kl={kl} tc={tc} anchor={anchor}")]
    NonFinite {
        epoch: usize,
        recon: f64,
        kl: f64,
        tc: f64,
        anchor: f64,
    },
}

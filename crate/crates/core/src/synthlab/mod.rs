//! Synthetic planted graphs and image suites for verification, plus the
//! neutral-content sweep.

mod experiment;
mod graph;
mod images;
mod sweep;

pub use experiment::{run_planted, Method, PlantedRun};
pub use graph::{gen_graph, image_id, user_id, SynthGraph, SynthGraphConfig};
pub use images::{
    apply_chain, gen_base_image, gen_image_suite, score_pairs, suite_image_id, write_image_suite,
    ImageSuite, PairScores, SuiteImage, TransformSpec, BASE_SIDE, RECOMPRESSION_SIGMA,
};
pub use sweep::{neutral_sweep, sweep_csv, write_sweep_csv, SweepRow};

use thiserror::Error;

use crate::bhin::GraphError;
use crate::embedding::EmbeddingError;
use crate::evalkit::EvalError;
use crate::infovgae::InfoVgaeError;
use crate::nmf::NmfError;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Train(#[from] InfoVgaeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Nmf(#[from] NmfError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

//! Near-duplicate detection and clustering of images into visual assertions.

mod candidates;
mod cluster;
mod dhash;
mod matching;
mod pipeline;
mod ransac;

pub use candidates::{
    candidate_pairs, pairs_by_embedding, read_embedding_vectors, CandidateFilter,
};
pub use cluster::{cluster_assertions, read_assertions, write_assertions, VisualAssertion};
pub use dhash::{area_resize, dhash64, hash_distance};
pub use matching::{match_descriptors, MAX_MATCH_DISTANCE, RATIO};
pub use pipeline::{
    find_near_duplicates, load_corpus, pair_seed, verify_features, verify_pair, NearDupConfig,
    NearDupResult, VerifiedPair,
};
pub use ransac::{plausible, ransac_affine, singular_values, AffineFit, Point};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NearDupError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("unknown image id {0}")]
    UnknownImage(String),
    #[error("no embedding vector for image {0}")]
    MissingEmbedding(String),
    #[error("image id {0} appears twice in the corpus")]
    DuplicateId(String),
    #[error("image {id}: {source}")]
    Image {
        id: String,
        #[source]
        source: crate::imgcore::ImageError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl NearDupError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

//! Classifying images by ideological leaning from how they spread.
//!
//! The pipeline clusters near-duplicate images into visual assertions
//! ([`neardup`]), links users to the assertions they posted ([`bhin`]),
//! embeds that bipartite graph with a disentangling variational graph
//! auto-encoder ([`infovgae`]), and reads each assertion's leaning off the
//! latent axis it aligns with ([`evalkit`]).

pub mod bhin;
pub mod cli;
pub mod embedding;
pub mod evalkit;
pub mod imgcore;
pub mod infovgae;
pub mod neardup;
pub mod nmf;
pub mod numkit;
pub mod synthlab;

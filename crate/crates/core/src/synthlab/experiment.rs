use std::collections::BTreeSet;

use crate::bhin::{build_graph, prepare_inputs, BhinGraph};
use crate::embedding::Embedding;
use crate::evalkit::{evaluate, AxisMapping, MetricsReport};
use crate::infovgae::{select_anchors, train, AnchorLabel, TrainConfig, TrainOutcome};
use crate::nmf::nmf_embedding;

use super::graph::{gen_graph, SynthGraph, SynthGraphConfig};
use super::SynthError;

/// Which model embeds the planted graph.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    InfoVgae,
    /// Anchors a share of the assertions (split evenly between labels).
    SemiSupervised {
        anchor_fraction: f64,
        min_anchor_degree: usize,
    },
    Nmf {
        iters: usize,
    },
}

#[derive(Debug)]
pub struct PlantedRun {
    pub graph: BhinGraph,
    pub synth: SynthGraph,
    pub embedding: Embedding,
    pub report: MetricsReport,
    pub anchors: Vec<AnchorLabel>,
    pub outcome: Option<TrainOutcome>,
}

/// Generates a planted graph, embeds it and scores non-neutral assertions
/// (anchors excluded).
pub fn run_planted(
    graph_cfg: &SynthGraphConfig,
    train_cfg: &TrainConfig,
    method: &Method,
) -> Result<PlantedRun, SynthError> {
    let synth = gen_graph(graph_cfg)?;
    let graph = build_graph(&synth.posts, &synth.assertions)?;
    let mut excluded: BTreeSet<u64> = synth.truth.neutral.clone();

    let (embedding, anchors, outcome, mapping) = match method {
        Method::Nmf { iters } => {
            let (e, _) = nmf_embedding(&graph, train_cfg.latent_dim, *iters, train_cfg.seed)?;
            (e, Vec::new(), None, AxisMapping::BestPermutation)
        }
        Method::InfoVgae => {
            let inputs = prepare_inputs(&graph)?;
            let out = train(&inputs, train_cfg, &[])?;
            let e = Embedding::from_graph(&graph, out.state.mu.clone())?;
            (e, Vec::new(), Some(out), AxisMapping::BestPermutation)
        }
        Method::SemiSupervised {
            anchor_fraction,
            min_anchor_degree,
        } => {
            let inputs = prepare_inputs(&graph)?;
            let n_assertions = graph.assertion_indices().len();
            let per_label = ((anchor_fraction * n_assertions as f64) / 2.0).round() as usize;
            let anchors = select_anchors(
                &graph,
                &synth.truth.labels,
                per_label,
                *min_anchor_degree,
                &synth.truth.neutral,
            );
            for a in &anchors {
                excluded.insert(graph.assertion_id(a.node).expect("anchor is an assertion"));
            }
            let out = train(&inputs, train_cfg, &anchors)?;
            let e = Embedding::from_graph(&graph, out.state.mu.clone())?;
            let identity: Vec<u8> = (0..train_cfg.latent_dim).map(|t| t.min(1) as u8).collect();
            (e, anchors, Some(out), AxisMapping::Fixed(identity))
        }
    };
    let report = evaluate(
        &embedding.assertion_axes(),
        &synth.truth.labels,
        &excluded,
        embedding.dim(),
        &mapping,
    )?;
    Ok(PlantedRun {
        graph,
        synth,
        embedding,
        report,
        anchors,
        outcome,
    })
}

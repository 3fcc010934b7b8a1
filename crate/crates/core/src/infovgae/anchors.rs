use std::collections::BTreeSet;

use crate::bhin::BhinGraph;
use crate::evalkit::GroundTruth;

use super::model::AnchorLabel;

/// Picks anchors among labeled assertions, least popular first.
///
/// Takes `per_label` assertions for each label, ordered by degree and then
/// node index, skipping ids in `ineligible` and nodes with degree below
/// `min_degree`. The anchor axis equals the label.
pub fn select_anchors(
    g: &BhinGraph,
    truth: &GroundTruth,
    per_label: usize,
    min_degree: usize,
    ineligible: &BTreeSet<u64>,
) -> Vec<AnchorLabel> {
    let deg = g.degrees();
    let mut candidates: Vec<(usize, usize, u8)> = g
        .assertion_indices()
        .into_iter()
        .filter_map(|i| {
            let id = g.assertion_id(i)?;
            if ineligible.contains(&id) || deg[i] < min_degree {
                return None;
            }
            truth.get(&id).map(|&l| (deg[i], i, l))
        })
        .collect();
    candidates.sort_unstable();
    let mut taken = [0usize; 2];
    let mut out = Vec::new();
    for (_, node, label) in candidates {
        let slot = usize::from(label.min(1));
        if taken[slot] < per_label {
            taken[slot] += 1;
            out.push(AnchorLabel {
                node,
                axis: usize::from(label),
            });
        }
    }
    out.sort_unstable();
    out
}

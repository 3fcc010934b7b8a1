use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Binary ground-truth label per assertion id.
pub type GroundTruth = BTreeMap<u64, u8>;

/// Argmax coordinate, lowest index on ties. The flag reports a tie.
pub fn assign_axis(row: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    let tie = row
        .iter()
        .enumerate()
        .any(|(i, &v)| i != best && v == row[best]);
    (best, tie)
}

/// True when the row sits near the origin (`‖row‖∞ < δ`) or near the
/// diagonal (`min/max > 1 − δ`).
pub fn neutral_flag(row: &[f64], delta: f64) -> bool {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let min = row.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let inf_norm = row.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if inf_norm < delta {
        return true;
    }
    max > 0.0 && min / max > 1.0 - delta
}

/// How axes are mapped to labels before scoring.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisMapping {
    /// Try every mapping and keep the one with the highest macro-F1.
    BestPermutation,
    /// `mapping[axis] = label`, e.g. implied by anchors.
    Fixed(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub purity: f64,
    /// `axis_mapping[axis]` is the label assigned to that axis.
    pub axis_mapping: Vec<u8>,
    pub n_evaluated: usize,
    pub averaging: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Prf {
    precision: f64,
    recall: f64,
    f1: f64,
}

fn macro_prf(pairs: &[(u8, u8)]) -> Prf {
    // pairs are (predicted, true)
    let mut sum = Prf::default();
    let mut classes = 0;
    for c in 0..=1u8 {
        let tp = pairs.iter().filter(|&&(p, t)| p == c && t == c).count() as f64;
        let pred = pairs.iter().filter(|&&(p, _)| p == c).count() as f64;
        let truth = pairs.iter().filter(|&&(_, t)| t == c).count() as f64;
        if pred == 0.0 && truth == 0.0 {
            continue;
        }
        classes += 1;
        let precision = if pred > 0.0 { tp / pred } else { 0.0 };
        let recall = if truth > 0.0 { tp / truth } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        sum.precision += precision;
        sum.recall += recall;
        sum.f1 += f1;
    }
    let k = classes.max(1) as f64;
    Prf {
        precision: sum.precision / k,
        recall: sum.recall / k,
        f1: sum.f1 / k,
    }
}

fn candidate_mappings(axes: usize) -> Vec<Vec<u8>> {
    if axes == 2 {
        return vec![vec![0, 1], vec![1, 0]];
    }
    // more axes than labels: every axis→label function
    (0..1u32 << axes)
        .map(|bits| (0..axes).map(|a| ((bits >> a) & 1) as u8).collect())
        .collect()
}

/// Scores axis assignments against binary labels.
///
/// `assignments` maps assertion id to axis; ids in `exclude` (anchors) are
/// skipped. Precision, recall and F1 are macro-averaged over the two labels;
/// purity does not depend on the mapping.
pub fn evaluate(
    assignments: &BTreeMap<u64, usize>,
    truth: &GroundTruth,
    exclude: &BTreeSet<u64>,
    axes: usize,
    mapping: &AxisMapping,
) -> Result<MetricsReport, EvalError> {
    let mut items: Vec<(usize, u8)> = Vec::new();
    for (id, &axis) in assignments {
        if exclude.contains(id) {
            continue;
        }
        let label = *truth.get(id).ok_or(EvalError::MissingLabel(*id))?;
        if label > 1 {
            return Err(EvalError::BadLabel { id: *id, label });
        }
        if axis >= axes {
            return Err(EvalError::BadAxis { id: *id, axis });
        }
        items.push((axis, label));
    }
    if items.is_empty() {
        return Err(EvalError::Empty);
    }

    let mut counts: BTreeMap<usize, [usize; 2]> = BTreeMap::new();
    for &(axis, label) in &items {
        counts.entry(axis).or_default()[label as usize] += 1;
    }
    let majority: usize = counts.values().map(|c| c[0].max(c[1])).sum();
    let purity = majority as f64 / items.len() as f64;

    let score = |m: &[u8]| {
        let pairs: Vec<(u8, u8)> = items.iter().map(|&(a, l)| (m[a], l)).collect();
        macro_prf(&pairs)
    };
    let (best_map, prf) = match mapping {
        AxisMapping::Fixed(m) => {
            if m.len() != axes {
                return Err(EvalError::MappingLength {
                    expected: axes,
                    got: m.len(),
                });
            }
            (m.clone(), score(m))
        }
        AxisMapping::BestPermutation => {
            let mut best: Option<(Vec<u8>, Prf)> = None;
            for m in candidate_mappings(axes) {
                let s = score(&m);
                if best.as_ref().map_or(true, |(_, b)| s.f1 > b.f1) {
                    best = Some((m, s));
                }
            }
            best.expect("at least one mapping")
        }
    };
    Ok(MetricsReport {
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        purity,
        axis_mapping: best_map,
        n_evaluated: items.len(),
        averaging: "macro".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(v: &[(u64, usize)]) -> BTreeMap<u64, usize> {
        v.iter().copied().collect()
    }

    fn truth(v: &[(u64, u8)]) -> GroundTruth {
        v.iter().copied().collect()
    }

    #[test]
    fn axis_assignment() {
        assert_eq!(assign_axis(&[0.9, 0.1]), (0, false));
        assert_eq!(assign_axis(&[0.5, 0.5]), (0, true));
        assert_eq!(assign_axis(&[0.1, 0.7, 0.3]), (1, false));
        assert_eq!(assign_axis(&[0.2, 0.9].map(|v| v * 3.5)), (1, false));
    }

    #[test]
    fn neutral_examples() {
        assert!(neutral_flag(&[0.01, 0.01], 0.1));
        assert!(neutral_flag(&[0.8, 0.78], 0.1));
        assert!(!neutral_flag(&[0.9, 0.05], 0.1));
    }

    #[test]
    fn perfect_assignment() {
        let a = assign(&[(1, 0), (2, 0), (3, 1)]);
        let t = truth(&[(1, 0), (2, 0), (3, 1)]);
        let r = evaluate(&a, &t, &BTreeSet::new(), 2, &AxisMapping::BestPermutation).unwrap();
        assert_eq!(
            (r.precision, r.recall, r.f1, r.purity),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(r.n_evaluated, 3);
    }

    #[test]
    fn purity_five_sixths() {
        let a = assign(&[(1, 0), (2, 0), (3, 0), (4, 0), (5, 1), (6, 1)]);
        let t = truth(&[(1, 0), (2, 0), (3, 0), (4, 1), (5, 1), (6, 1)]);
        let r = evaluate(&a, &t, &BTreeSet::new(), 2, &AxisMapping::BestPermutation).unwrap();
        assert_eq!(r.purity, 5.0 / 6.0);
    }

    #[test]
    fn inverted_labels_score_the_same() {
        let a = assign(&[(1, 0), (2, 1), (3, 1), (4, 0)]);
        let t = truth(&[(1, 0), (2, 1), (3, 0), (4, 0)]);
        let inv = assign(&[(1, 1), (2, 0), (3, 0), (4, 1)]);
        let r1 = evaluate(&a, &t, &BTreeSet::new(), 2, &AxisMapping::BestPermutation).unwrap();
        let r2 = evaluate(&inv, &t, &BTreeSet::new(), 2, &AxisMapping::BestPermutation).unwrap();
        assert_eq!(r1.f1, r2.f1);
        assert_eq!(r1.purity, r2.purity);
        assert_ne!(r1.axis_mapping, r2.axis_mapping);
    }

    #[test]
    fn fixed_mapping_is_not_searched() {
        let a = assign(&[(1, 1), (2, 0)]);
        let t = truth(&[(1, 0), (2, 1)]);
        let r = evaluate(&a, &t, &BTreeSet::new(), 2, &AxisMapping::Fixed(vec![0, 1])).unwrap();
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.purity, 1.0);
    }

    #[test]
    fn excluded_and_empty() {
        let a = assign(&[(1, 0)]);
        let t = truth(&[(1, 0)]);
        let ex: BTreeSet<u64> = [1].into();
        assert!(matches!(
            evaluate(&a, &t, &ex, 2, &AxisMapping::BestPermutation),
            Err(EvalError::Empty)
        ));
    }

    #[test]
    fn missing_label_is_error() {
        let a = assign(&[(9, 0)]);
        assert!(matches!(
            evaluate(
                &a,
                &GroundTruth::new(),
                &BTreeSet::new(),
                2,
                &AxisMapping::BestPermutation
            ),
            Err(EvalError::MissingLabel(9))
        ));
    }
}

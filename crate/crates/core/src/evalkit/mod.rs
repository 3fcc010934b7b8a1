//! Axis assignment, metrics against ground truth, and embedding plots.

mod metrics;
mod svg;

pub use metrics::{assign_axis, evaluate, neutral_flag, AxisMapping, GroundTruth, MetricsReport};
pub use svg::{render_svg, to_canvas, viewport_range, write_svg, ScatterPoint, MARGIN, SIZE};

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
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
    #[error("nothing to evaluate")]
    Empty,
    #[error("assertion {0} has no ground-truth label")]
    MissingLabel(u64),
    #[error("assertion {id} has label {label}; labels must be 0 or 1")]
    BadLabel { id: u64, label: u8 },
    #[error("assertion {id} assigned to axis {axis}, beyond the latent dimension")]
    BadAxis { id: u64, axis: usize },
    #[error("axis mapping has {got} entries, expected {expected}")]
    MappingLength { expected: usize, got: usize },
}

/// One line of a truth file. `neutral` marks synthetic neutral content.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub assertion_id: u64,
    pub label: u8,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub neutral: bool,
}

/// Labels plus the set of assertions flagged as neutral.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledTruth {
    pub labels: GroundTruth,
    pub neutral: BTreeSet<u64>,
}

impl LabeledTruth {
    pub fn from_records(records: &[TruthRecord]) -> Self {
        let mut out = Self::default();
        for r in records {
            out.labels.insert(r.assertion_id, r.label);
            if r.neutral {
                out.neutral.insert(r.assertion_id);
            }
        }
        out
    }

    pub fn records(&self) -> Vec<TruthRecord> {
        self.labels
            .iter()
            .map(|(&assertion_id, &label)| TruthRecord {
                assertion_id,
                label,
                neutral: self.neutral.contains(&assertion_id),
            })
            .collect()
    }
}

pub fn read_truth(path: &Path) -> Result<LabeledTruth, EvalError> {
    let display = path.display().to_string();
    let f = fs::File::open(path).map_err(|source| EvalError::Io {
        path: display.clone(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io {
            path: display.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TruthRecord = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            path: display.clone(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        if rec.label > 1 {
            return Err(EvalError::BadLabel {
                id: rec.assertion_id,
                label: rec.label,
            });
        }
        records.push(rec);
    }
    Ok(LabeledTruth::from_records(&records))
}

pub fn write_truth(path: &Path, truth: &LabeledTruth) -> Result<(), EvalError> {
    let mut out = String::new();
    for r in truth.records() {
        out.push_str(&serde_json::to_string(&r).expect("truth serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_report(path: &Path, report: &MetricsReport) -> Result<(), EvalError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

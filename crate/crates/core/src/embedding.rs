//! Embedding CSV: `node_id,kind,mu_0,…,mu_{T-1},assigned_axis`.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::bhin::{BhinGraph, NodeKind};
use crate::evalkit::assign_axis;
use crate::numkit::Matrix;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{rows} embedding rows for {nodes} nodes")]
    RowCount { rows: usize, nodes: usize },
}

/// Per-node latent coordinates with node identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub node_ids: Vec<String>,
    pub kinds: Vec<NodeKind>,
    pub coords: Matrix,
}

impl Embedding {
    pub fn from_graph(g: &BhinGraph, coords: Matrix) -> Result<Self, EmbeddingError> {
        if coords.rows() != g.node_count() {
            return Err(EmbeddingError::RowCount {
                rows: coords.rows(),
                nodes: g.node_count(),
            });
        }
        Ok(Self {
            node_ids: g.nodes().iter().map(|n| n.id.clone()).collect(),
            kinds: g.nodes().iter().map(|n| n.kind).collect(),
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.cols()
    }

    /// Axis of every assertion node, keyed by numeric assertion id.
    pub fn assertion_axes(&self) -> BTreeMap<u64, usize> {
        self.assertion_rows()
            .into_iter()
            .map(|(id, r)| (id, assign_axis(self.coords.row(r)).0))
            .collect()
    }

    /// `(assertion id, row)` for assertion nodes with numeric ids.
    pub fn assertion_rows(&self) -> Vec<(u64, usize)> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == NodeKind::Assertion)
            .filter_map(|(r, _)| self.node_ids[r].parse().ok().map(|id| (id, r)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["node_id".to_string(), "kind".to_string()];
        header.extend((0..self.dim()).map(|t| format!("mu_{t}")));
        header.push("assigned_axis".into());
        w.write_record(&header).expect("in-memory write");
        for r in 0..self.coords.rows() {
            let kind = match self.kinds[r] {
                NodeKind::User => "user",
                NodeKind::Assertion => "assertion",
            };
            let mut rec = vec![self.node_ids[r].clone(), kind.to_string()];
            rec.extend(self.coords.row(r).iter().map(|v| format!("{v}")));
            rec.push(assign_axis(self.coords.row(r)).0.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        std::fs::write(path, self.to_csv()).map_err(|e| EmbeddingError::Csv {
            path: path.display().to_string(),
            source: e.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let display = path.display().to_string();
        let csv_err = |source| EmbeddingError::Csv {
            path: display.clone(),
            source,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let dim = headers.iter().filter(|h| h.starts_with("mu_")).count();
        let mut node_ids = Vec::new();
        let mut kinds = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let parse_err = |msg: String| EmbeddingError::Parse {
                path: display.clone(),
                line,
                msg,
            };
            if rec.len() != dim + 3 {
                return Err(parse_err(format!(
                    "expected {} fields, got {}",
                    dim + 3,
                    rec.len()
                )));
            }
            node_ids.push(rec[0].to_string());
            kinds.push(match &rec[1] {
                "user" => NodeKind::User,
                "assertion" => NodeKind::Assertion,
                other => return Err(parse_err(format!("unknown kind {other}"))),
            });
            for t in 0..dim {
                let v: f64 = rec[2 + t]
                    .parse()
                    .map_err(|e| parse_err(format!("mu_{t}: {e}")))?;
                data.push(v);
            }
        }
        let rows = node_ids.len();
        let coords = Matrix::from_vec(rows, dim, data).map_err(|e| EmbeddingError::Parse {
            path: display.clone(),
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(Self {
            node_ids,
            kinds,
            coords,
        })
    }
}

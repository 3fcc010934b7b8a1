//! Bipartite user–assertion graph: ingestion, construction, degree filtering
//! and encoder inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neardup::VisualAssertion;
use crate::numkit::Matrix;

#[derive(Debug, Error)]
pub enum GraphError {
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
    #[error("post by {user_id} references image {image_id}, which is in no assertion")]
    UnknownImage { user_id: String, image_id: String },
    #[error("image {0} appears in more than one assertion")]
    DuplicateImage(String),
    #[error(
        "graph is empty after removing nodes with degree <= {min_deg}; try a lower --min-degree"
    )]
    EmptyAfterFilter { min_deg: usize },
    #[error("graph has no nodes")]
    Empty,
    #[error("edge references unknown node {0}")]
    UnknownNode(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub user_id: String,
    pub image_id: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    User,
    Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

/// Undirected, unweighted bipartite graph.
///
/// Nodes are users (sorted by id) followed by assertions (sorted by numeric
/// assertion id). Edges are stored as `(user index, assertion index)`, sorted
/// and unique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BhinGraph {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
}

impl BhinGraph {
    /// Builds a graph from explicit nodes and index edges. Edges are
    /// canonicalized to (user, assertion) order; non-bipartite edges panic.
    pub fn from_parts(nodes: Vec<Node>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (u, s) = match (nodes[a].kind, nodes[b].kind) {
                (NodeKind::User, NodeKind::Assertion) => (a, b),
                (NodeKind::Assertion, NodeKind::User) => (b, a),
                _ => panic!("edge ({a}, {b}) is not user-assertion"),
            };
            set.insert((u, s));
        }
        Self {
            nodes,
            edges: set.into_iter().collect(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(u, a) in &self.edges {
            deg[u] += 1;
            deg[a] += 1;
        }
        deg
    }

    pub fn user_indices(&self) -> Vec<usize> {
        self.indices_of(NodeKind::User)
    }

    pub fn assertion_indices(&self) -> Vec<usize> {
        self.indices_of(NodeKind::Assertion)
    }

    fn indices_of(&self, kind: NodeKind) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// Numeric assertion id of node `idx`, when it is an assertion node with a
    /// numeric id.
    pub fn assertion_id(&self, idx: usize) -> Option<u64> {
        let n = &self.nodes[idx];
        (n.kind == NodeKind::Assertion)
            .then(|| n.id.parse().ok())
            .flatten()
    }

    /// User × assertion 0/1 matrix with rows and columns in node order.
    pub fn biadjacency(&self) -> Matrix {
        let users = self.user_indices();
        let assertions = self.assertion_indices();
        let upos: HashMap<usize, usize> = users.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let apos: HashMap<usize, usize> = assertions
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i))
            .collect();
        let mut b = Matrix::zeros(users.len(), assertions.len());
        for &(u, a) in &self.edges {
            b.set(upos[&u], apos[&a], 1.0);
        }
        b
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, a)| (self.nodes[u].id.clone(), self.nodes[a].id.clone()))
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse {
            path: path.to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        let lookup: HashMap<(NodeKind, &str), usize> = file
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| ((n.kind, n.id.as_str()), i))
            .collect();
        let mut edges = Vec::with_capacity(file.edges.len());
        for (u, a) in &file.edges {
            let ui = *lookup
                .get(&(NodeKind::User, u.as_str()))
                .ok_or_else(|| GraphError::UnknownNode(u.clone()))?;
            let ai = *lookup
                .get(&(NodeKind::Assertion, a.as_str()))
                .ok_or_else(|| GraphError::UnknownNode(a.clone()))?;
            edges.push((ui, ai));
        }
        Ok(Self::from_parts(file.nodes, edges))
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        fs::write(path, self.to_json()).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }
}

/// Reads posts from a JSON-lines file. Blank lines are skipped.
pub fn ingest_posts(path: &Path) -> Result<Vec<PostRecord>, GraphError> {
    let display = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| GraphError::Io {
        path: display.clone(),
        source,
    })?;
    parse_posts(BufReader::new(file), &display)
}

pub fn parse_posts(reader: impl BufRead, path: &str) -> Result<Vec<PostRecord>, GraphError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GraphError::Io {
            path: path.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| GraphError::Parse {
            path: path.to_string(),
            line: i + 1,
            msg,
        };
        let rec: PostRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.user_id.is_empty() || rec.image_id.is_empty() {
            return Err(parse_err("user_id and image_id must be non-empty".into()));
        }
        out.push(rec);
    }
    Ok(out)
}

/// One user node per distinct poster, one assertion node per assertion, and
/// an edge wherever a user posted any image of an assertion.
pub fn build_graph(
    posts: &[PostRecord],
    assertions: &[VisualAssertion],
) -> Result<BhinGraph, GraphError> {
    let mut image_to_assertion: HashMap<&str, u64> = HashMap::new();
    for a in assertions {
        for img in &a.image_ids {
            if image_to_assertion
                .insert(img.as_str(), a.assertion_id)
                .is_some()
            {
                return Err(GraphError::DuplicateImage(img.clone()));
            }
        }
    }
    let mut pairs: BTreeSet<(&str, u64)> = BTreeSet::new();
    let mut users: BTreeSet<&str> = BTreeSet::new();
    for p in posts {
        let aid = image_to_assertion.get(p.image_id.as_str()).ok_or_else(|| {
            GraphError::UnknownImage {
                user_id: p.user_id.clone(),
                image_id: p.image_id.clone(),
            }
        })?;
        users.insert(p.user_id.as_str());
        pairs.insert((p.user_id.as_str(), *aid));
    }
    let assertion_ids: BTreeSet<u64> = assertions.iter().map(|a| a.assertion_id).collect();

    let mut nodes = Vec::with_capacity(users.len() + assertion_ids.len());
    let mut user_index = HashMap::new();
    for u in &users {
        user_index.insert(*u, nodes.len());
        nodes.push(Node {
            id: (*u).to_string(),
            kind: NodeKind::User,
        });
    }
    let mut assertion_index = HashMap::new();
    for a in &assertion_ids {
        assertion_index.insert(*a, nodes.len());
        nodes.push(Node {
            id: a.to_string(),
            kind: NodeKind::Assertion,
        });
    }
    let edges: Vec<_> = pairs
        .iter()
        .map(|(u, a)| (user_index[u], assertion_index[a]))
        .collect();
    Ok(BhinGraph::from_parts(nodes, edges))
}

/// Drops every node whose degree in `g` is `<= min_deg`, in a single pass.
/// A threshold of zero disables filtering, so isolated nodes survive it.
pub fn filter_min_degree(g: &BhinGraph, min_deg: usize) -> Result<BhinGraph, GraphError> {
    if min_deg == 0 {
        return Ok(g.clone());
    }
    let deg = g.degrees();
    let out = restrict(g, |i| deg[i] > min_deg);
    if out.nodes.is_empty() {
        return Err(GraphError::EmptyAfterFilter { min_deg });
    }
    Ok(out)
}

/// Repeats [`filter_min_degree`] until no node falls at or below `min_deg`.
pub fn filter_min_degree_fixpoint(g: &BhinGraph, min_deg: usize) -> Result<BhinGraph, GraphError> {
    let mut cur = filter_min_degree(g, min_deg)?;
    loop {
        let next = filter_min_degree(&cur, min_deg)?;
        if next.node_count() == cur.node_count() {
            return Ok(next);
        }
        cur = next;
    }
}

fn restrict(g: &BhinGraph, keep: impl Fn(usize) -> bool) -> BhinGraph {
    let mut remap = vec![usize::MAX; g.nodes.len()];
    let mut nodes = Vec::new();
    for (i, n) in g.nodes.iter().enumerate() {
        if keep(i) {
            remap[i] = nodes.len();
            nodes.push(n.clone());
        }
    }
    let edges: Vec<_> = g
        .edges
        .iter()
        .filter(|(u, a)| remap[*u] != usize::MAX && remap[*a] != usize::MAX)
        .map(|&(u, a)| (remap[u], remap[a]))
        .collect();
    BhinGraph { nodes, edges }
}

/// Encoder inputs derived from a graph.
#[derive(Clone, Debug)]
pub struct PreparedInputs {
    /// Adjacency with self-loops.
    pub adjacency: Matrix,
    /// `D^-1/2 A D^-1/2`.
    pub normalized: Matrix,
    /// One-hot node features (identity).
    pub features: Matrix,
}

impl PreparedInputs {
    pub fn node_count(&self) -> usize {
        self.adjacency.rows()
    }
}

pub fn prepare_inputs(g: &BhinGraph) -> Result<PreparedInputs, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut a = Matrix::identity(n);
    for &(u, s) in &g.edges {
        a.set(u, s, 1.0);
        a.set(s, u, 1.0);
    }
    Ok(inputs_from_adjacency(a))
}

/// Normalizes a symmetric adjacency that already contains self-loops.
pub fn inputs_from_adjacency(adjacency: Matrix) -> PreparedInputs {
    let n = adjacency.rows();
    let inv_sqrt: Vec<f64> = adjacency
        .row_sums()
        .iter()
        .map(|d| 1.0 / d.sqrt())
        .collect();
    let normalized = Matrix::from_fn(n, n, |i, j| {
        let v = adjacency.get(i, j);
        if v == 0.0 {
            0.0
        } else {
            inv_sqrt[i] * v * inv_sqrt[j]
        }
    });
    PreparedInputs {
        adjacency,
        normalized,
        features: Matrix::identity(n),
    }
}

/// Node index of each assertion id present in `g`.
pub fn assertion_index_map(g: &BhinGraph) -> BTreeMap<u64, usize> {
    g.assertion_indices()
        .into_iter()
        .filter_map(|i| g.assertion_id(i).map(|id| (id, i)))
        .collect()
}

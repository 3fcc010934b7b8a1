//! Python bindings: graphs, training, the NMF baseline, evaluation,
//! synthetic data and near-duplicate detection.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use memeaxis::bhin::{
    build_graph, filter_min_degree, prepare_inputs, BhinGraph, NodeKind, PostRecord,
};
use memeaxis::embedding::Embedding;
use memeaxis::evalkit::{evaluate as eval_report, AxisMapping};
use memeaxis::imgcore::load_image;
use memeaxis::infovgae::{select_anchors, train as train_model, TrainConfig};
use memeaxis::neardup::{
    dhash64 as dhash, find_near_duplicates, load_corpus, ransac_affine as ransac, NearDupConfig,
    VisualAssertion,
};
use memeaxis::nmf::nmf_embedding;
use memeaxis::numkit::Rng;
use memeaxis::synthlab::{gen_graph, SynthGraphConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// Serializes keyword arguments with Python's json module and decodes them
/// into `T`, so unknown or mistyped keys raise `ValueError`.
fn from_kwargs<T: serde::de::DeserializeOwned>(
    py: Python<'_>,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<T> {
    let text: String = match kwargs {
        Some(k) => py.import("json")?.call_method1("dumps", (k,))?.extract()?,
        None => "{}".to_string(),
    };
    serde_json::from_str(&text).map_err(value_err)
}

/// InfoVGAE hyper-parameters. Keyword arguments mirror the field names.
#[pyclass(name = "TrainConfig", from_py_object)]
#[derive(Clone)]
struct PyTrainConfig {
    inner: TrainConfig,
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(py: Python<'_>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let inner: TrainConfig = from_kwargs(py, kwargs)?;
        inner.validate().map_err(PyValueError::new_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("config serializes")
    }

    #[getter]
    fn epochs(&self) -> usize {
        self.inner.epochs
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn kl_target(&self) -> f64 {
        self.inner.kl_target
    }

    fn __repr__(&self) -> String {
        format!("TrainConfig({})", self.to_json())
    }
}

/// Bipartite user–assertion graph.
#[pyclass(name = "Graph", from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: BhinGraph,
}

#[pymethods]
impl PyGraph {
    /// `posts` are `(user_id, image_id)` pairs; `assertions` maps an
    /// assertion id to its image ids.
    #[new]
    fn new(posts: Vec<(String, String)>, assertions: BTreeMap<u64, Vec<String>>) -> PyResult<Self> {
        let posts: Vec<PostRecord> = posts
            .into_iter()
            .map(|(user_id, image_id)| PostRecord { user_id, image_id })
            .collect();
        let assertions: Vec<VisualAssertion> = assertions
            .into_iter()
            .map(|(assertion_id, ids)| VisualAssertion {
                assertion_id,
                image_ids: ids.into_iter().collect(),
            })
            .collect();
        let inner = build_graph(&posts, &assertions).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        BhinGraph::load(&path)
            .map(|inner| Self { inner })
            .map_err(io_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(io_err)
    }

    /// Drops nodes with degree `<= min_deg` in one pass.
    fn filter_min_degree(&self, min_deg: usize) -> PyResult<Self> {
        filter_min_degree(&self.inner, min_deg)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|n| n.id.clone()).collect()
    }

    #[getter]
    fn kinds(&self) -> Vec<&'static str> {
        self.inner
            .nodes()
            .iter()
            .map(|n| kind_name(n.kind))
            .collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }
}

fn kind_name(k: NodeKind) -> &'static str {
    match k {
        NodeKind::User => "user",
        NodeKind::Assertion => "assertion",
    }
}

/// Per-node coordinates with node ids and kinds.
#[pyclass(name = "Embedding", from_py_object)]
#[derive(Clone)]
struct PyEmbedding {
    inner: Embedding,
}

#[pymethods]
impl PyEmbedding {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Embedding::load(&path)
            .map(|inner| Self { inner })
            .map_err(io_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(io_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.inner.node_ids.clone()
    }

    #[getter]
    fn kinds(&self) -> Vec<&'static str> {
        self.inner.kinds.iter().map(|k| kind_name(*k)).collect()
    }

    #[getter]
    fn coords(&self) -> Vec<Vec<f64>> {
        (0..self.inner.coords.rows())
            .map(|r| self.inner.coords.row(r).to_vec())
            .collect()
    }

    /// Assertion id → index of its largest coordinate.
    fn assertion_axes(&self) -> BTreeMap<u64, usize> {
        self.inner.assertion_axes()
    }
}

/// Unsupervised InfoVGAE, or semi-supervised when `labels` (assertion id →
/// 0/1) and `anchors_per_label` are given.
#[pyfunction]
#[pyo3(signature = (graph, config=None, labels=None, anchors_per_label=0, min_anchor_degree=4))]
fn train(
    py: Python<'_>,
    graph: &PyGraph,
    config: Option<&PyTrainConfig>,
    labels: Option<BTreeMap<u64, u8>>,
    anchors_per_label: usize,
    min_anchor_degree: usize,
) -> PyResult<(PyEmbedding, Vec<u64>)> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let g = &graph.inner;
    let anchors = match &labels {
        Some(l) => select_anchors(g, l, anchors_per_label, min_anchor_degree, &BTreeSet::new()),
        None => Vec::new(),
    };
    let anchor_ids: Vec<u64> = anchors
        .iter()
        .filter_map(|a| g.assertion_id(a.node))
        .collect();
    let emb = py.detach(|| -> Result<Embedding, String> {
        let inputs = prepare_inputs(g).map_err(|e| e.to_string())?;
        let out = train_model(&inputs, &cfg, &anchors).map_err(|e| e.to_string())?;
        Embedding::from_graph(g, out.state.mu).map_err(|e| e.to_string())
    });
    let inner = emb.map_err(PyValueError::new_err)?;
    Ok((PyEmbedding { inner }, anchor_ids))
}

/// Non-negative matrix factorization baseline.
#[pyfunction]
#[pyo3(signature = (graph, rank=2, iters=500, seed=42))]
fn nmf(graph: &PyGraph, rank: usize, iters: usize, seed: u64) -> PyResult<PyEmbedding> {
    let (inner, _) = nmf_embedding(&graph.inner, rank, iters, seed).map_err(value_err)?;
    Ok(PyEmbedding { inner })
}

/// Macro precision/recall/F1 and purity of axis assignments. Without a
/// fixed `mapping` the best axis-to-label mapping is chosen.
#[pyfunction]
#[pyo3(signature = (assignments, truth, exclude=None, axes=2, mapping=None))]
fn evaluate(
    py: Python<'_>,
    assignments: BTreeMap<u64, usize>,
    truth: BTreeMap<u64, u8>,
    exclude: Option<BTreeSet<u64>>,
    axes: usize,
    mapping: Option<Vec<u8>>,
) -> PyResult<Py<PyDict>> {
    let mapping = mapping.map_or(AxisMapping::BestPermutation, AxisMapping::Fixed);
    let r = eval_report(
        &assignments,
        &truth,
        &exclude.unwrap_or_default(),
        axes,
        &mapping,
    )
    .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("purity", r.purity)?;
    d.set_item("axis_mapping", r.axis_mapping)?;
    d.set_item("n_evaluated", r.n_evaluated)?;
    Ok(d.unbind())
}

/// Planted two-camp graph. Keyword arguments mirror the generator config.
/// Returns `(graph, labels, neutral_ids)`.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn synth_graph(
    py: Python<'_>,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<(PyGraph, BTreeMap<u64, u8>, Vec<u64>)> {
    let cfg: SynthGraphConfig = from_kwargs(py, kwargs)?;
    let s = gen_graph(&cfg).map_err(value_err)?;
    let g = build_graph(&s.posts, &s.assertions).map_err(value_err)?;
    Ok((
        PyGraph { inner: g },
        s.truth.labels,
        s.truth.neutral.into_iter().collect(),
    ))
}

/// 64-bit difference hash of a PGM/PPM image.
#[pyfunction]
fn dhash64(path: PathBuf) -> PyResult<u64> {
    Ok(dhash(&load_image(&path).map_err(io_err)?))
}

/// Clusters the images in `directory` into visual assertions; returns the
/// image ids of each assertion.
#[pyfunction]
#[pyo3(signature = (directory, seed=42))]
fn cluster_images(py: Python<'_>, directory: PathBuf, seed: u64) -> PyResult<Vec<Vec<String>>> {
    let corpus = load_corpus(&directory).map_err(io_err)?;
    let res = py
        .detach(|| find_near_duplicates(&corpus, &NearDupConfig::default(), seed))
        .map_err(value_err)?;
    Ok(res
        .assertions
        .into_iter()
        .map(|a| a.image_ids.into_iter().collect())
        .collect())
}

/// RANSAC affine fit over `((x, y), (x', y'))` correspondences. Returns
/// `None` when no model has three inliers.
#[pyfunction]
#[pyo3(signature = (matches, iters=1000, tol_px=3.0, seed=42))]
fn ransac_affine(
    py: Python<'_>,
    matches: Vec<((f64, f64), (f64, f64))>,
    iters: usize,
    tol_px: f64,
    seed: u64,
) -> PyResult<Option<Py<PyDict>>> {
    if !(tol_px > 0.0) {
        return Err(PyValueError::new_err("tol_px must be positive"));
    }
    let mut rng = Rng::new(seed);
    let Some(f) = ransac(&matches, iters, tol_px, &mut rng) else {
        return Ok(None);
    };
    let d = PyDict::new(py);
    d.set_item("matrix", [[f.a11, f.a12], [f.a21, f.a22]])?;
    d.set_item("translation", (f.tx, f.ty))?;
    d.set_item("inliers", f.inliers)?;
    d.set_item("inlier_ratio", f.inlier_ratio)?;
    Ok(Some(d.unbind()))
}

#[pymodule]
#[pyo3(name = "memeaxis")]
fn memeaxis_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(nmf, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(synth_graph, m)?)?;
    m.add_function(wrap_pyfunction!(dhash64, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_images, m)?)?;
    m.add_function(wrap_pyfunction!(ransac_affine, m)?)?;
    Ok(())
}

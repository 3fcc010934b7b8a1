//! Command-line pipeline: one subcommand per stage, file handoff between
//! stages, and a `run-manifest.json` next to every output.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bhin::{
    build_graph, filter_min_degree, filter_min_degree_fixpoint, ingest_posts, prepare_inputs,
    BhinGraph,
};
use crate::embedding::Embedding;
use crate::evalkit::{evaluate, read_truth, write_report, write_svg, AxisMapping, ScatterPoint};
use crate::infovgae::{select_anchors, train, AnchorLabel, TrainConfig};
use crate::neardup::{
    find_near_duplicates, load_corpus, read_assertions, write_assertions, NearDupConfig,
};
use crate::nmf::nmf_embedding;
use crate::synthlab::{
    gen_graph, gen_image_suite, neutral_sweep, write_image_suite, write_sweep_csv, SynthGraphConfig,
};

pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Nodes with degree `<=` this are dropped; zero disables the filter.
    pub min_degree: usize,
    /// Repeat the filter until no node is removed.
    pub fixpoint: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_degree: 10,
            fixpoint: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemiConfig {
    /// Share of labeled assertions used as anchors, split evenly by label.
    pub anchor_fraction: f64,
    pub min_anchor_degree: usize,
}

impl Default for SemiConfig {
    fn default() -> Self {
        Self {
            anchor_fraction: 0.05,
            min_anchor_degree: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmfConfig {
    pub rank: usize,
    pub iters: usize,
}

impl Default for NmfConfig {
    fn default() -> Self {
        Self {
            rank: 2,
            iters: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageSuiteConfig {
    pub n_base: usize,
    pub variants_per_base: usize,
}

impl Default for ImageSuiteConfig {
    fn default() -> Self {
        Self {
            n_base: 50,
            variants_per_base: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    /// Seeds used per fraction: `seed, seed + 1, …`.
    pub seeds: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            seeds: 5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Output location used when `--out` is not given.
    pub out: Option<PathBuf>,
}

/// Stage-keyed configuration document. Absent keys take their defaults;
/// unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub train: TrainConfig,
    pub semi: SemiConfig,
    pub nmf: NmfConfig,
    pub neardup: NearDupConfig,
    pub filter: FilterConfig,
    pub synth_graph: SynthGraphConfig,
    pub synth_images: ImageSuiteConfig,
    pub sweep: SweepConfig,
    pub paths: PathsConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::data("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::usage(
                "config",
                format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()),
            )
        })
    }
}

/// Error carrying the failing stage and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

fn data_err<E: Display>(stage: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::data(stage, e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "memeaxis",
    version,
    about = "Ideological leaning of images from their propagation graph"
)]
pub struct Cli {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic stage (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `filter.min_degree`.
    #[arg(long, global = true)]
    pub min_degree: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster near-duplicate images into visual assertions.
    Cluster {
        /// Directory of .pgm/.ppm images.
        #[arg(long)]
        images: PathBuf,
        /// Assertions JSON-lines output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the user–assertion graph and apply the degree filter.
    BuildGraph {
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        assertions: PathBuf,
        /// Iterate the degree filter to a fixpoint.
        #[arg(long)]
        fixpoint: bool,
        /// Graph JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train InfoVGAE and write the embedding CSV.
    Train {
        #[arg(long)]
        graph: PathBuf,
        /// Truth JSON-lines; enables semi-supervised anchors.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-negative matrix factorization baseline embedding.
    Nmf {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an embedding against ground truth.
    Evaluate {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Anchors written by `train --labels`; excluded from scoring.
        #[arg(long)]
        anchors: Option<PathBuf>,
        /// Scatter plot of the assertion embedding.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Report JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a planted two-camp graph with posts, assertions and truth.
    SynthGraph {
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the near-duplicate image suite.
    SynthImages {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// F1 as neutral content grows.
    SweepNeutral {
        /// Sweep CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Anchor list persisted next to a semi-supervised embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub assertion_id: u64,
    pub axis: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config: &'a PipelineConfig,
    inputs: Vec<String>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<serde_json::Value>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn out_path(given: &Option<PathBuf>, cfg: &PipelineConfig, fallback: &str) -> PathBuf {
    given
        .clone()
        .or_else(|| cfg.paths.out.clone())
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_dir(stage: &'static str, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(stage, format!("{}: {e}", dir.display())))
}

fn write_text(stage: &'static str, path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(stage, format!("{}: {e}", path.display())))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Effective configuration after the file and command-line overrides.
pub fn effective_config(cli: &Cli) -> Result<(PipelineConfig, u64), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    cfg.train.seed = seed;
    cfg.synth_graph.seed = seed;
    if let Some(d) = cli.min_degree {
        cfg.filter.min_degree = d;
    }
    cfg.train
        .validate()
        .map_err(|e| CliError::usage("config", format!("train: {e}")))?;
    cfg.neardup
        .validate()
        .map_err(|e| CliError::usage("config", format!("neardup: {e}")))?;
    cfg.synth_graph
        .validate()
        .map_err(|e| CliError::usage("config", format!("synth_graph: {e}")))?;
    if !(0.0..=1.0).contains(&cfg.semi.anchor_fraction) {
        return Err(CliError::usage(
            "config",
            "semi.anchor_fraction outside [0, 1]",
        ));
    }
    Ok((cfg, seed))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (cfg, seed) = effective_config(cli)?;
    eprintln!("seed: {seed}");
    let manifest = |command: &str,
                    dir: &Path,
                    inputs: Vec<String>,
                    outputs: Vec<String>,
                    extra|
     -> Result<(), CliError> {
        let m = Manifest {
            command,
            seed,
            config: &cfg,
            inputs,
            outputs,
            extra,
        };
        // one entry per command, so stages sharing a directory keep theirs
        let path = dir.join("run-manifest.json");
        let mut all: serde_json::Map<String, serde_json::Value> = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default();
        all.insert(
            command.to_string(),
            serde_json::to_value(&m).expect("manifest serializes"),
        );
        let mut text = serde_json::to_string_pretty(&all).expect("manifest serializes");
        text.push('\n');
        write_text("manifest", &path, &text)
    };

    match &cli.command {
        Command::Cluster { images, out } => {
            let stage = "cluster";
            let out = out_path(out, &cfg, "assertions.jsonl");
            let corpus = load_corpus(images).map_err(data_err(stage))?;
            let res = find_near_duplicates(&corpus, &cfg.neardup, seed).map_err(data_err(stage))?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            write_assertions(&out, &res.assertions).map_err(data_err(stage))?;
            eprintln!(
                "{stage}: {} images, {} candidate pairs, {} verified, {} assertions",
                corpus.len(),
                res.candidates,
                res.verified.len(),
                res.assertions.len()
            );
            let extra = serde_json::json!({
                "images": corpus.len(),
                "candidate_pairs": res.candidates,
                "verified_pairs": res.verified.len(),
                "assertions": res.assertions.len(),
            });
            manifest(
                "cluster",
                &dir,
                vec![display(images)],
                vec![display(&out)],
                Some(extra),
            )
        }
        Command::BuildGraph {
            posts,
            assertions,
            fixpoint,
            out,
        } => {
            let stage = "build-graph";
            let out = out_path(out, &cfg, "graph.json");
            let p = ingest_posts(posts).map_err(data_err(stage))?;
            let a = read_assertions(assertions).map_err(data_err(stage))?;
            let g = build_graph(&p, &a).map_err(data_err(stage))?;
            let before = (g.user_indices().len(), g.assertion_indices().len());
            let g = if *fixpoint || cfg.filter.fixpoint {
                filter_min_degree_fixpoint(&g, cfg.filter.min_degree)
            } else {
                filter_min_degree(&g, cfg.filter.min_degree)
            }
            .map_err(data_err(stage))?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            g.save(&out).map_err(data_err(stage))?;
            let after = (g.user_indices().len(), g.assertion_indices().len());
            eprintln!(
                "{stage}: {} users, {} assertions ({} users, {} assertions before the degree filter)",
                after.0, after.1, before.0, before.1
            );
            let extra = serde_json::json!({
                "users": after.0, "assertions": after.1, "edges": g.edge_count(),
                "users_before_filter": before.0, "assertions_before_filter": before.1,
            });
            manifest(
                "build-graph",
                &dir,
                vec![display(posts), display(assertions)],
                vec![display(&out)],
                Some(extra),
            )
        }
        Command::Train { graph, labels, out } => {
            let stage = "train";
            let out = out_path(out, &cfg, "embedding.csv");
            let g = BhinGraph::load(graph).map_err(data_err(stage))?;
            let inputs = prepare_inputs(&g).map_err(data_err(stage))?;
            let anchors = match labels {
                Some(path) => {
                    let truth = read_truth(path).map_err(data_err(stage))?;
                    let n = g.assertion_indices().len();
                    let per_label = ((cfg.semi.anchor_fraction * n as f64) / 2.0).round() as usize;
                    select_anchors(
                        &g,
                        &truth.labels,
                        per_label,
                        cfg.semi.min_anchor_degree,
                        &truth.neutral,
                    )
                }
                None => Vec::new(),
            };
            let outcome = train(&inputs, &cfg.train, &anchors).map_err(data_err(stage))?;
            let emb =
                Embedding::from_graph(&g, outcome.state.mu.clone()).map_err(data_err(stage))?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            emb.save(&out).map_err(data_err(stage))?;
            let mut outputs = vec![display(&out)];
            let mut inputs_list = vec![display(graph)];
            if let Some(l) = labels {
                inputs_list.push(display(l));
                let path = anchors_path(&out);
                let records = anchor_records(&g, &anchors);
                let text =
                    serde_json::to_string_pretty(&records).expect("anchors serialize") + "\n";
                write_text(stage, &path, &text)?;
                outputs.push(display(&path));
            }
            let last = outcome.history.last();
            eprintln!(
                "{stage}: {} epochs, {} anchors{}",
                outcome.history.len(),
                anchors.len(),
                last.map(|r| format!(
                    ", final recon {:.4} kl {:.2} beta {:.3e}",
                    r.recon, r.kl, r.beta
                ))
                .unwrap_or_default()
            );
            let extra = serde_json::json!({
                "anchors": anchors.len(),
                "final": last.map(|r| serde_json::json!({"recon": r.recon, "kl": r.kl, "tc": r.tc, "beta": r.beta})),
            });
            manifest("train", &dir, inputs_list, outputs, Some(extra))
        }
        Command::Nmf { graph, out } => {
            let stage = "nmf";
            let out = out_path(out, &cfg, "embedding-nmf.csv");
            let g = BhinGraph::load(graph).map_err(data_err(stage))?;
            let (emb, factors) =
                nmf_embedding(&g, cfg.nmf.rank, cfg.nmf.iters, seed).map_err(data_err(stage))?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            emb.save(&out).map_err(data_err(stage))?;
            let extra = serde_json::json!({ "final_loss": factors.final_loss() });
            manifest(
                "nmf",
                &dir,
                vec![display(graph)],
                vec![display(&out)],
                Some(extra),
            )
        }
        Command::Evaluate {
            embedding,
            truth,
            anchors,
            plot,
            out,
        } => {
            let stage = "evaluate";
            let out = out_path(out, &cfg, "report.json");
            let emb = Embedding::load(embedding).map_err(data_err(stage))?;
            let t = read_truth(truth).map_err(data_err(stage))?;
            let mut exclude: BTreeSet<u64> = t.neutral.clone();
            let mapping = match anchors {
                Some(p) => {
                    let text = fs::read_to_string(p)
                        .map_err(|e| CliError::data(stage, format!("{}: {e}", p.display())))?;
                    let recs: Vec<AnchorRecord> = serde_json::from_str(&text).map_err(|e| {
                        CliError::data(stage, format!("{}:{}: {e}", p.display(), e.line()))
                    })?;
                    exclude.extend(recs.iter().map(|r| r.assertion_id));
                    // anchors pin axis k to label k
                    AxisMapping::Fixed((0..emb.dim()).map(|k| k.min(1) as u8).collect())
                }
                None => AxisMapping::BestPermutation,
            };
            let report = evaluate(
                &emb.assertion_axes(),
                &t.labels,
                &exclude,
                emb.dim(),
                &mapping,
            )
            .map_err(data_err(stage))?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            write_report(&out, &report).map_err(data_err(stage))?;
            let mut outputs = vec![display(&out)];
            if let Some(plot) = plot {
                let points = scatter_points(&emb, &t.labels, &t.neutral);
                ensure_dir(stage, &parent_dir(plot))?;
                write_svg(&points, plot).map_err(data_err(stage))?;
                outputs.push(display(plot));
            }
            println!(
                "f1={:.4} precision={:.4} recall={:.4} purity={:.4} n={}",
                report.f1, report.precision, report.recall, report.purity, report.n_evaluated
            );
            let mut inputs_list = vec![display(embedding), display(truth)];
            if let Some(a) = anchors {
                inputs_list.push(display(a));
            }
            manifest("evaluate", &dir, inputs_list, outputs, None)
        }
        Command::SynthGraph { out } => {
            let stage = "synth-graph";
            let dir = out_path(out, &cfg, "synth-graph");
            if let Some(w) = cfg.synth_graph.warning() {
                eprintln!("warning: {w}");
            }
            let s = gen_graph(&cfg.synth_graph).map_err(data_err(stage))?;
            let g = build_graph(&s.posts, &s.assertions).map_err(data_err(stage))?;
            ensure_dir(stage, &dir)?;
            let posts = dir.join("posts.jsonl");
            let mut text = String::new();
            for p in &s.posts {
                text.push_str(&serde_json::to_string(p).expect("post serializes"));
                text.push('\n');
            }
            write_text(stage, &posts, &text)?;
            let assertions = dir.join("assertions.jsonl");
            write_assertions(&assertions, &s.assertions).map_err(data_err(stage))?;
            let truth = dir.join("truth.jsonl");
            crate::evalkit::write_truth(&truth, &s.truth).map_err(data_err(stage))?;
            let graph = dir.join("graph.json");
            g.save(&graph).map_err(data_err(stage))?;
            eprintln!(
                "{stage}: {} posts, {} users, {} assertions, {} edges",
                s.posts.len(),
                g.user_indices().len(),
                g.assertion_indices().len(),
                g.edge_count()
            );
            let outputs = [posts, assertions, truth, graph]
                .iter()
                .map(|p| display(p))
                .collect();
            manifest("synth-graph", &dir, Vec::new(), outputs, None)
        }
        Command::SynthImages { out } => {
            let stage = "synth-images";
            let dir = out_path(out, &cfg, "synth-images");
            let suite = gen_image_suite(
                cfg.synth_images.n_base,
                cfg.synth_images.variants_per_base,
                seed,
            )
            .map_err(|e| CliError::usage(stage, e.to_string()))?;
            ensure_dir(stage, &dir)?;
            write_image_suite(&suite, &dir).map_err(data_err(stage))?;
            eprintln!(
                "{stage}: {} images, {} true pairs",
                suite.images.len(),
                suite.true_pairs.len()
            );
            manifest("synth-images", &dir, Vec::new(), vec![display(&dir)], None)
        }
        Command::SweepNeutral { out } => {
            let stage = "sweep-neutral";
            let out = out_path(out, &cfg, "sweep.csv");
            let seeds: Vec<u64> = (0..cfg.sweep.seeds as u64)
                .map(|i| seed.wrapping_add(i))
                .collect();
            let rows = neutral_sweep(&cfg.synth_graph, &cfg.sweep.fractions, &cfg.train, &seeds)
                .map_err(|e| match e {
                    crate::synthlab::SynthError::Config(m) => CliError::usage(stage, m),
                    other => CliError::data(stage, other.to_string()),
                })?;
            let dir = parent_dir(&out);
            ensure_dir(stage, &dir)?;
            write_sweep_csv(&rows, &out).map_err(data_err(stage))?;
            for r in &rows {
                println!(
                    "fraction={} mean_f1={:.4} std_f1={:.4}",
                    r.fraction, r.mean_f1, r.std_f1
                );
            }
            manifest("sweep-neutral", &dir, Vec::new(), vec![display(&out)], None)
        }
    }
}

/// `embedding.csv` → `embedding.anchors.json`.
pub fn anchors_path(embedding: &Path) -> PathBuf {
    let stem = embedding
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("embedding");
    embedding.with_file_name(format!("{stem}.anchors.json"))
}

fn anchor_records(g: &BhinGraph, anchors: &[AnchorLabel]) -> Vec<AnchorRecord> {
    anchors
        .iter()
        .filter_map(|a| {
            g.assertion_id(a.node).map(|assertion_id| AnchorRecord {
                assertion_id,
                axis: a.axis,
            })
        })
        .collect()
}

fn scatter_points(
    emb: &Embedding,
    labels: &crate::evalkit::GroundTruth,
    neutral: &BTreeSet<u64>,
) -> Vec<ScatterPoint> {
    emb.assertion_rows()
        .into_iter()
        .map(|(id, r)| {
            let row = emb.coords.row(r);
            ScatterPoint {
                x: row[0],
                y: row.get(1).copied().unwrap_or(0.0),
                label: if neutral.contains(&id) {
                    None
                } else {
                    labels.get(&id).copied()
                },
            }
        })
        .collect()
}

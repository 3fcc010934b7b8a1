use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::{candidate_pairs, CandidateFilter};
use super::cluster::{cluster_assertions, VisualAssertion};
use super::matching::match_descriptors;
use super::ransac::{plausible, ransac_affine, AffineFit, Point};
use super::NearDupError;
use crate::imgcore::{extract_features, load_image, FeatureConfig, ImageFeatures, RasterImage};
use crate::numkit::{derive_seed, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NearDupConfig {
    pub features: FeatureConfig,
    pub min_inliers: usize,
    pub min_ratio: f64,
    pub tol_px: f64,
    pub ransac_iters: usize,
    pub filter: CandidateFilter,
}

impl Default for NearDupConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            min_inliers: 15,
            min_ratio: 0.2,
            tol_px: 3.0,
            ransac_iters: 1000,
            filter: CandidateFilter::PerceptualHash {
                hamming_threshold: 24,
            },
        }
    }
}

impl NearDupConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.filter.validate()?;
        if !(self.tol_px > 0.0) {
            return Err(format!("tol_px must be positive, got {}", self.tol_px));
        }
        if !(0.0..=1.0).contains(&self.min_ratio) {
            return Err(format!("min_ratio {} outside [0, 1]", self.min_ratio));
        }
        if !(5..=100).contains(&self.features.fast_threshold) {
            return Err(format!(
                "fast_threshold {} outside [5, 100]",
                self.features.fast_threshold
            ));
        }
        Ok(())
    }
}

/// A verified near-duplicate pair, ids in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifiedPair {
    pub a: String,
    pub b: String,
    pub fit: AffineFit,
}

#[derive(Clone, Debug)]
pub struct NearDupResult {
    pub candidates: usize,
    pub verified: Vec<VerifiedPair>,
    pub assertions: Vec<VisualAssertion>,
}

/// Matches descriptors, fits an affine with RANSAC and applies the
/// plausibility gate. `seed` drives the RANSAC sampling.
pub fn verify_features(
    fa: &ImageFeatures,
    fb: &ImageFeatures,
    cfg: &NearDupConfig,
    seed: u64,
) -> Option<AffineFit> {
    let matches = match_descriptors(&fa.descriptors, &fb.descriptors);
    if matches.len() < cfg.min_inliers.max(3) {
        return None;
    }
    let pts: Vec<(Point, Point)> = matches
        .iter()
        .map(|&(i, j)| {
            let (p, q) = (&fa.keypoints[i], &fb.keypoints[j]);
            ((p.x, p.y), (q.x, q.y))
        })
        .collect();
    let mut rng = Rng::new(seed);
    let fit = ransac_affine(&pts, cfg.ransac_iters, cfg.tol_px, &mut rng)?;
    plausible(&fit, cfg.min_inliers, cfg.min_ratio).then_some(fit)
}

/// Seed for a pair, independent of argument order.
pub fn pair_seed(global: u64, a: &str, b: &str) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    derive_seed(global, &[lo, hi])
}

/// Verifies a pair of named images. The pair is put in id order before
/// anything else, so `verify(a, b)` and `verify(b, a)` agree.
pub fn verify_pair(
    a: (&str, &ImageFeatures),
    b: (&str, &ImageFeatures),
    cfg: &NearDupConfig,
    global_seed: u64,
) -> Option<VerifiedPair> {
    let (lo, hi) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let fit = verify_features(lo.1, hi.1, cfg, pair_seed(global_seed, lo.0, hi.0))?;
    Some(VerifiedPair {
        a: lo.0.to_string(),
        b: hi.0.to_string(),
        fit,
    })
}

/// Candidate generation, parallel verification and clustering.
pub fn find_near_duplicates(
    corpus: &[(String, RasterImage)],
    cfg: &NearDupConfig,
    seed: u64,
) -> Result<NearDupResult, NearDupError> {
    cfg.validate().map_err(NearDupError::Config)?;
    let pairs = candidate_pairs(corpus, &cfg.filter)?;
    let mut needed = vec![false; corpus.len()];
    for &(i, j) in &pairs {
        needed[i] = true;
        needed[j] = true;
    }
    let features: Vec<Option<ImageFeatures>> = corpus
        .par_iter()
        .zip(needed.par_iter())
        .map(|((id, img), &need)| {
            if !need {
                return Ok(None);
            }
            extract_features(img, &cfg.features)
                .map(Some)
                .map_err(|e| NearDupError::Image {
                    id: id.clone(),
                    source: e,
                })
        })
        .collect::<Result<_, _>>()?;
    let mut verified: Vec<VerifiedPair> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let fa = features[i].as_ref()?;
            let fb = features[j].as_ref()?;
            verify_pair((&corpus[i].0, fa), (&corpus[j].0, fb), cfg, seed)
        })
        .collect();
    verified.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    let edges: Vec<(&str, &str)> = verified
        .iter()
        .map(|p| (p.a.as_str(), p.b.as_str()))
        .collect();
    let ids: Vec<&str> = corpus.iter().map(|(id, _)| id.as_str()).collect();
    let assertions = cluster_assertions(&edges, &ids)?;
    Ok(NearDupResult {
        candidates: pairs.len(),
        verified,
        assertions,
    })
}

/// Loads every `.pgm`/`.ppm` file in `dir`; the image id is the file stem.
/// Images are returned sorted by id.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, RasterImage)>, NearDupError> {
    let entries = fs::read_dir(dir).map_err(|e| NearDupError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| NearDupError::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("pgm") | Some("ppm")) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let id = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let img = load_image(&p).map_err(|e| NearDupError::Image {
            id: id.clone(),
            source: e,
        })?;
        out.push((id, img));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    for w in out.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(NearDupError::DuplicateId(w[0].0.clone()));
        }
    }
    Ok(out)
}

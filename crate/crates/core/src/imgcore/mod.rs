//! Grayscale image I/O, FAST corners with Harris ranking, and steered
//! binary descriptors.

mod brief;
mod detect;
mod raster;

pub use brief::{
    describe, generate_pattern, BinaryDescriptor, DescriptorContext, BRIEF_PATTERN, PATTERN_SEED,
};
pub use detect::{detect_keypoints, harris_response, is_fast_corner, orientation, Keypoint};
pub use raster::{decode_pnm, load_image, RasterImage};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest side accepted for feature extraction.
pub const MIN_SIDE: usize = 32;
/// Keypoints closer than this to any border are not described.
pub const DESCRIBE_BORDER: usize = 20;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("unsupported image format {0:?} (expected P5 or P6)")]
    UnsupportedFormat(String),
    #[error("image is {width}x{height}; at least {MIN_SIDE}x{MIN_SIDE} is required")]
    TooSmall { width: usize, height: usize },
    #[error("FAST threshold {0} outside [5, 100]")]
    BadThreshold(i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub fast_threshold: i32,
    pub max_keypoints: usize,
    /// Images are rescaled so their longer side has this length.
    pub max_side: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20,
            max_keypoints: 500,
            max_side: 512,
        }
    }
}

/// Keypoints and descriptors of one image, in the normalized frame.
#[derive(Clone, Debug)]
pub struct ImageFeatures {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<BinaryDescriptor>,
}

/// Normalizes, detects, drops keypoints near the border and describes the rest.
pub fn extract_features(
    img: &RasterImage,
    cfg: &FeatureConfig,
) -> Result<ImageFeatures, ImageError> {
    let norm = img.normalize_max_side(cfg.max_side);
    let kps = detect_keypoints(&norm, cfg.fast_threshold, cfg.max_keypoints)?;
    let ctx = DescriptorContext::new(&norm);
    let (w, h) = (norm.width() as f64, norm.height() as f64);
    let b = DESCRIBE_BORDER as f64;
    let keypoints: Vec<Keypoint> = kps
        .into_iter()
        .filter(|k| k.x >= b && k.y >= b && k.x < w - b && k.y < h - b)
        .collect();
    let descriptors = keypoints.iter().map(|k| ctx.describe(k)).collect();
    Ok(ImageFeatures {
        keypoints,
        descriptors,
    })
}

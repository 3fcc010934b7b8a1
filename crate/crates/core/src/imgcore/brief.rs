use serde::{Deserialize, Serialize};

use crate::numkit::Rng;

use super::{Keypoint, RasterImage};

/// Seed the committed test pattern was drawn from.
pub const PATTERN_SEED: u64 = 0x5EED;
const PATCH: f64 = 31.0;
/// Test coordinates are clamped so a rotated test stays inside the border.
const PATTERN_LIMIT: f64 = 13.0;
const BLUR_SIGMA: f64 = 2.0;
const BLUR_RADIUS: isize = 4;

/// 256 intensity tests `(x1, y1, x2, y2)`, offsets from the keypoint.
pub const BRIEF_PATTERN: [[i8; 4]; 256] = include!("brief_pattern.in");

/// Draws a test pattern: isotropic Gaussian offsets with σ = 31/5, rounded
/// and clamped to ±13.
pub fn generate_pattern(seed: u64) -> [[i8; 4]; 256] {
    let mut rng = Rng::new(seed);
    let sigma = PATCH / 5.0;
    let mut out = [[0i8; 4]; 256];
    for test in out.iter_mut() {
        for c in test.iter_mut() {
            *c = (rng.normal() * sigma)
                .round()
                .clamp(-PATTERN_LIMIT, PATTERN_LIMIT) as i8;
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryDescriptor(pub [u8; 32]);

impl std::fmt::Debug for BinaryDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl BinaryDescriptor {
    #[inline]
    pub fn hamming(&self, other: &Self) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        Self(self.0.map(|b| !b))
    }
}

/// A Gaussian-smoothed copy of an image, shared by all its descriptors.
pub struct DescriptorContext {
    width: usize,
    height: usize,
    smooth: Vec<f32>,
}

fn gaussian_taps() -> Vec<f64> {
    let taps: Vec<f64> = (-BLUR_RADIUS..=BLUR_RADIUS)
        .map(|i| (-((i * i) as f64) / (2.0 * BLUR_SIGMA * BLUR_SIGMA)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / s).collect()
}

impl DescriptorContext {
    pub fn new(img: &RasterImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let taps = gaussian_taps();
        let mut horiz = vec![0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    acc += t * img.get_clamped(x as isize + k as isize - BLUR_RADIUS, y as isize)
                        as f64;
                }
                horiz[y * w + x] = acc;
            }
        }
        let mut smooth = vec![0f32; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let yy =
                        (y as isize + k as isize - BLUR_RADIUS).clamp(0, h as isize - 1) as usize;
                    acc += t * horiz[yy * w + x];
                }
                smooth[y * w + x] = acc as f32;
            }
        }
        Self {
            width: w,
            height: h,
            smooth,
        }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.smooth[y * self.width + x]
    }

    /// Steered BRIEF: each test pair is rotated by the keypoint angle and bit
    /// `i` is set when the first point is darker than the second.
    pub fn describe(&self, kp: &Keypoint) -> BinaryDescriptor {
        let (s, c) = kp.angle.sin_cos();
        let (kx, ky) = (kp.x.round() as isize, kp.y.round() as isize);
        let rot = |px: i8, py: i8| {
            let (px, py) = (px as f64, py as f64);
            (
                kx + (c * px - s * py).round() as isize,
                ky + (s * px + c * py).round() as isize,
            )
        };
        let mut bits = [0u8; 32];
        for (i, t) in BRIEF_PATTERN.iter().enumerate() {
            let (x1, y1) = rot(t[0], t[1]);
            let (x2, y2) = rot(t[2], t[3]);
            if self.at(x1, y1) < self.at(x2, y2) {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        BinaryDescriptor(bits)
    }
}

/// Describes one keypoint. Smooths the whole image; use
/// [`DescriptorContext`] when describing many keypoints.
pub fn describe(img: &RasterImage, kp: &Keypoint) -> BinaryDescriptor {
    DescriptorContext::new(img).describe(kp)
}

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ImageError, RasterImage, MIN_SIDE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub response: f64,
    /// Radians in `[0, 2π)`.
    pub angle: f64,
}

/// Bresenham circle of radius 3, clockwise from the top.
const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

const ARC: usize = 9;
const ORIENT_RADIUS: isize = 15;
const HARRIS_K: f64 = 0.04;

fn longest_run(flags: &[bool; 16]) -> usize {
    let mut best = 0;
    let mut run = 0;
    // walk twice around so wrap-around runs are counted
    for i in 0..32 {
        if flags[i % 16] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best.min(16)
}

/// Segment test at an interior pixel; returns the corner score when it passes.
fn fast_score(img: &RasterImage, x: usize, y: usize, t: i32) -> Option<i32> {
    let w = img.width();
    let luma = img.luma();
    let c = luma[y * w + x] as i32;
    let mut ring = [0i32; 16];
    for (k, &(dx, dy)) in CIRCLE.iter().enumerate() {
        let px = (x as isize + dx) as usize;
        let py = (y as isize + dy) as usize;
        ring[k] = luma[py * w + px] as i32;
    }
    // quick rejection on the compass points
    let compass = [ring[0], ring[4], ring[8], ring[12]];
    let bright_n = compass.iter().filter(|&&v| v > c + t).count();
    let dark_n = compass.iter().filter(|&&v| v < c - t).count();
    if bright_n < 2 && dark_n < 2 {
        return None;
    }
    let bright: [bool; 16] = std::array::from_fn(|k| ring[k] > c + t);
    let dark: [bool; 16] = std::array::from_fn(|k| ring[k] < c - t);
    let mut score = None;
    if longest_run(&bright) >= ARC {
        let s: i32 = ring
            .iter()
            .filter(|&&v| v > c + t)
            .map(|&v| v - c - t)
            .sum();
        score = Some(s);
    }
    if longest_run(&dark) >= ARC {
        let s: i32 = ring
            .iter()
            .filter(|&&v| v < c - t)
            .map(|&v| c - t - v)
            .sum();
        score = Some(score.map_or(s, |b: i32| b.max(s)));
    }
    score
}

/// FAST-9/16 segment test at `(x, y)`. Pixels within 3 of the border fail.
pub fn is_fast_corner(img: &RasterImage, x: usize, y: usize, threshold: i32) -> bool {
    if x < 3 || y < 3 || x + 3 >= img.width() || y + 3 >= img.height() {
        return false;
    }
    fast_score(img, x, y, threshold).is_some()
}

/// Harris corner response from Sobel gradients in a Gaussian (σ = 1) window.
pub fn harris_response(img: &RasterImage, x: usize, y: usize) -> f64 {
    const R: isize = 3;
    let px = |xx: isize, yy: isize| img.get_clamped(xx, yy) as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for dy in -R..=R {
        for dx in -R..=R {
            let w = (-((dx * dx + dy * dy) as f64) / 2.0).exp();
            let (cx, cy) = (x as isize + dx, y as isize + dy);
            let gx = (px(cx + 1, cy - 1) + 2.0 * px(cx + 1, cy) + px(cx + 1, cy + 1))
                - (px(cx - 1, cy - 1) + 2.0 * px(cx - 1, cy) + px(cx - 1, cy + 1));
            let gy = (px(cx - 1, cy + 1) + 2.0 * px(cx, cy + 1) + px(cx + 1, cy + 1))
                - (px(cx - 1, cy - 1) + 2.0 * px(cx, cy - 1) + px(cx + 1, cy - 1));
            sxx += w * gx * gx;
            syy += w * gy * gy;
            sxy += w * gx * gy;
        }
    }
    let det = sxx * syy - sxy * sxy;
    let tr = sxx + syy;
    det - HARRIS_K * tr * tr
}

/// Intensity-centroid angle `atan2(m01, m10)` over a disc of radius 15.
pub fn orientation(img: &RasterImage, x: usize, y: usize) -> f64 {
    let (mut m10, mut m01) = (0.0, 0.0);
    for dy in -ORIENT_RADIUS..=ORIENT_RADIUS {
        for dx in -ORIENT_RADIUS..=ORIENT_RADIUS {
            if dx * dx + dy * dy > ORIENT_RADIUS * ORIENT_RADIUS {
                continue;
            }
            let v = img.get_clamped(x as isize + dx, y as isize + dy) as f64;
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
        }
    }
    let a = m01.atan2(m10);
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// FAST corners with 3×3 non-maximum suppression, ranked by Harris response
/// and truncated to `max_kp`.
pub fn detect_keypoints(
    img: &RasterImage,
    fast_threshold: i32,
    max_kp: usize,
) -> Result<Vec<Keypoint>, ImageError> {
    if !(5..=100).contains(&fast_threshold) {
        return Err(ImageError::BadThreshold(fast_threshold));
    }
    let (w, h) = (img.width(), img.height());
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(ImageError::TooSmall {
            width: w,
            height: h,
        });
    }
    let mut scores = vec![0i32; w * h];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            if let Some(s) = fast_score(img, x, y, fast_threshold) {
                // +1 keeps zero-margin corners distinguishable from non-corners
                scores[y * w + x] = s + 1;
            }
        }
    }
    let mut kept = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = scores[y * w + x];
            if s == 0 {
                continue;
            }
            // ties are broken toward the earlier pixel in raster order
            let mut is_max = true;
            'nb: for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let j = ((y as isize + dy) as usize) * w + (x as isize + dx) as usize;
                    let later = dy > 0 || (dy == 0 && dx > 0);
                    if scores[j] > s || (scores[j] == s && !later) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                kept.push((x, y));
            }
        }
    }
    let mut kps: Vec<Keypoint> = kept
        .into_iter()
        .map(|(x, y)| Keypoint {
            x: x as f64,
            y: y as f64,
            response: harris_response(img, x, y),
            angle: 0.0,
        })
        .collect();
    kps.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    kps.truncate(max_kp);
    for k in &mut kps {
        k.angle = orientation(img, k.x as usize, k.y as usize);
    }
    Ok(kps)
}

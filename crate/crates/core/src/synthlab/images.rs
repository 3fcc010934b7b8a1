use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::imgcore::RasterImage;
use crate::numkit::Rng;

use super::SynthError;

pub const BASE_SIDE: usize = 256;
/// Standard deviation of the pixel noise standing in for lossy recompression.
pub const RECOMPRESSION_SIGMA: f64 = 3.0;

/// One edit applied to a base image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    /// Bilinear rescale by `factor` in `[0.5, 2]`.
    Resize { factor: f64 },
    /// Keeps `1 − fraction` of each side (`fraction ≤ 0.2`); the anchors in
    /// `[0, 1]` place the kept window inside the removed margin.
    Crop {
        fraction: f64,
        anchor_x: f64,
        anchor_y: f64,
    },
    /// Saturating intensity shift, `|delta| ≤ 30`.
    Brightness { delta: i32 },
    /// Solid rectangle of the given fractional geometry (area ≤ 0.15).
    Overlay {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        value: u8,
    },
    /// Additive Gaussian noise from its own seed, clamped.
    Noise { sigma: f64, seed: u64 },
}

impl TransformSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        match *self {
            Self::Resize { factor } if !(0.5..=2.0).contains(&factor) => {
                bad(format!("resize factor {factor}"))
            }
            Self::Crop {
                fraction,
                anchor_x,
                anchor_y,
            } if !(0.0..=0.2).contains(&fraction)
                || !(0.0..=1.0).contains(&anchor_x)
                || !(0.0..=1.0).contains(&anchor_y) =>
            {
                bad(format!("crop fraction {fraction}"))
            }
            Self::Brightness { delta } if delta.abs() > 30 => {
                bad(format!("brightness delta {delta}"))
            }
            Self::Overlay { x, y, w, h, .. }
                if w * h > 0.15 || x < 0.0 || y < 0.0 || x + w > 1.0 || y + h > 1.0 =>
            {
                bad(format!("overlay rect ({x}, {y}, {w}, {h})"))
            }
            Self::Noise { sigma, .. } if !(sigma >= 0.0) => bad(format!("noise sigma {sigma}")),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, img: &RasterImage) -> RasterImage {
        match *self {
            Self::Resize { factor } => {
                let w = ((img.width() as f64 * factor).round() as usize).max(1);
                let h = ((img.height() as f64 * factor).round() as usize).max(1);
                img.resize(w, h)
            }
            Self::Crop {
                fraction,
                anchor_x,
                anchor_y,
            } => {
                let kw = ((img.width() as f64 * (1.0 - fraction)).round() as usize)
                    .clamp(1, img.width());
                let kh = ((img.height() as f64 * (1.0 - fraction)).round() as usize)
                    .clamp(1, img.height());
                let x0 = ((img.width() - kw) as f64 * anchor_x).round() as usize;
                let y0 = ((img.height() - kh) as f64 * anchor_y).round() as usize;
                img.crop(x0, y0, kw, kh)
            }
            Self::Brightness { delta } => {
                RasterImage::from_fn(img.width(), img.height(), |x, y| {
                    (img.get(x, y) as i32 + delta).clamp(0, 255) as u8
                })
            }
            Self::Overlay { x, y, w, h, value } => {
                let (iw, ih) = (img.width() as f64, img.height() as f64);
                let (x0, x1) = ((x * iw).round() as usize, ((x + w) * iw).round() as usize);
                let (y0, y1) = ((y * ih).round() as usize, ((y + h) * ih).round() as usize);
                let mut out = img.clone();
                for yy in y0..y1.min(img.height()) {
                    for xx in x0..x1.min(img.width()) {
                        out.set(xx, yy, value);
                    }
                }
                out
            }
            Self::Noise { sigma, seed } => {
                let mut rng = Rng::new(seed);
                RasterImage::from_fn(img.width(), img.height(), |x, y| {
                    (img.get(x, y) as f64 + sigma * rng.normal())
                        .round()
                        .clamp(0.0, 255.0) as u8
                })
            }
        }
    }
}

pub fn apply_chain(img: &RasterImage, chain: &[TransformSpec]) -> RasterImage {
    chain.iter().fold(img.clone(), |acc, t| t.apply(&acc))
}

fn random_transform(rng: &mut Rng) -> TransformSpec {
    match rng.below(5) {
        0 => TransformSpec::Resize {
            factor: rng.uniform_range(0.5, 2.0),
        },
        1 => TransformSpec::Crop {
            fraction: rng.uniform_range(0.05, 0.2),
            anchor_x: rng.uniform(),
            anchor_y: rng.uniform(),
        },
        2 => {
            let mag = 10 + rng.below(21) as i32;
            TransformSpec::Brightness {
                delta: if rng.bernoulli(0.5) { mag } else { -mag },
            }
        }
        3 => {
            let w = rng.uniform_range(0.2, 0.5);
            let h = rng.uniform_range(0.08, 0.15_f64.min(0.15 / w));
            TransformSpec::Overlay {
                x: rng.uniform() * (1.0 - w),
                y: rng.uniform() * (1.0 - h),
                w,
                h,
                value: if rng.bernoulli(0.5) { 255 } else { 0 },
            }
        }
        _ => TransformSpec::Noise {
            sigma: RECOMPRESSION_SIGMA,
            seed: rng.next_u64(),
        },
    }
}

/// Procedural base image: shaded background with random rectangles,
/// ellipses and lines.
pub fn gen_base_image(rng: &mut Rng) -> RasterImage {
    let s = BASE_SIDE;
    let g0 = rng.uniform_range(40.0, 200.0);
    let gx = rng.uniform_range(-0.25, 0.25);
    let gy = rng.uniform_range(-0.25, 0.25);
    let mut img = RasterImage::from_fn(s, s, |x, y| {
        (g0 + gx * x as f64 + gy * y as f64).clamp(0.0, 255.0) as u8
    });
    let shapes = 18 + rng.below(10);
    for _ in 0..shapes {
        let value = rng.below(256) as u8;
        match rng.below(3) {
            0 => {
                let (w, h) = (8 + rng.below(70), 8 + rng.below(70));
                let (x0, y0) = (rng.below(s - w), rng.below(s - h));
                for y in y0..y0 + h {
                    for x in x0..x0 + w {
                        img.set(x, y, value);
                    }
                }
            }
            1 => {
                let (cx, cy) = (rng.uniform() * s as f64, rng.uniform() * s as f64);
                let (rx, ry) = (rng.uniform_range(6.0, 40.0), rng.uniform_range(6.0, 40.0));
                for y in 0..s {
                    for x in 0..s {
                        let dx = (x as f64 - cx) / rx;
                        let dy = (y as f64 - cy) / ry;
                        if dx * dx + dy * dy <= 1.0 {
                            img.set(x, y, value);
                        }
                    }
                }
            }
            _ => {
                let (x0, y0) = (rng.uniform() * s as f64, rng.uniform() * s as f64);
                let (x1, y1) = (rng.uniform() * s as f64, rng.uniform() * s as f64);
                let half = rng.uniform_range(1.0, 3.0);
                let len2 = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).max(1e-9);
                for y in 0..s {
                    for x in 0..s {
                        let (px, py) = (x as f64 - x0, y as f64 - y0);
                        let t = ((px * (x1 - x0) + py * (y1 - y0)) / len2).clamp(0.0, 1.0);
                        let (qx, qy) = (px - t * (x1 - x0), py - t * (y1 - y0));
                        if qx * qx + qy * qy <= half * half {
                            img.set(x, y, value);
                        }
                    }
                }
            }
        }
    }
    img
}

#[derive(Clone, Debug)]
pub struct SuiteImage {
    pub id: String,
    pub base: usize,
    /// Empty for the base image itself.
    pub chain: Vec<TransformSpec>,
    pub image: RasterImage,
}

#[derive(Clone, Debug)]
pub struct ImageSuite {
    pub images: Vec<SuiteImage>,
    pub bases: Vec<RasterImage>,
    /// Unordered pairs of ids derived from the same base, smaller id first.
    pub true_pairs: BTreeSet<(String, String)>,
}

impl ImageSuite {
    pub fn corpus(&self) -> Vec<(String, RasterImage)> {
        self.images
            .iter()
            .map(|s| (s.id.clone(), s.image.clone()))
            .collect()
    }
}

pub fn suite_image_id(base: usize, variant: usize) -> String {
    format!("b{base:03}_v{variant}")
}

/// `n_base` random base images, each with `variants_per_base` copies edited
/// by a random chain of one or two transforms.
pub fn gen_image_suite(
    n_base: usize,
    variants_per_base: usize,
    seed: u64,
) -> Result<ImageSuite, SynthError> {
    if n_base < 2 {
        return Err(SynthError::Config(format!(
            "n_base must be at least 2, got {n_base}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut images = Vec::new();
    let mut bases = Vec::new();
    let mut true_pairs = BTreeSet::new();
    for b in 0..n_base {
        let base = gen_base_image(&mut rng);
        let mut group = vec![suite_image_id(b, 0)];
        images.push(SuiteImage {
            id: group[0].clone(),
            base: b,
            chain: Vec::new(),
            image: base.clone(),
        });
        for v in 1..=variants_per_base {
            let len = 1 + rng.below(2);
            let chain: Vec<TransformSpec> = (0..len).map(|_| random_transform(&mut rng)).collect();
            let id = suite_image_id(b, v);
            images.push(SuiteImage {
                id: id.clone(),
                base: b,
                image: apply_chain(&base, &chain),
                chain,
            });
            group.push(id);
        }
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                true_pairs.insert((group[i].clone(), group[j].clone()));
            }
        }
        bases.push(base);
    }
    Ok(ImageSuite {
        images,
        bases,
        true_pairs,
    })
}

#[derive(Serialize)]
struct ManifestLine<'a> {
    image_id: &'a str,
    base: usize,
    chain: &'a [TransformSpec],
}

/// Writes `<id>.pgm` files under `dir/images`, `transforms.jsonl` and
/// `true_pairs.jsonl`.
pub fn write_image_suite(suite: &ImageSuite, dir: &Path) -> Result<(), SynthError> {
    let io = |p: &Path, e: std::io::Error| SynthError::Io {
        path: p.display().to_string(),
        source: e,
    };
    let img_dir = dir.join("images");
    fs::create_dir_all(&img_dir).map_err(|e| io(&img_dir, e))?;
    for s in &suite.images {
        let p = img_dir.join(format!("{}.pgm", s.id));
        fs::write(&p, s.image.to_pgm()).map_err(|e| io(&p, e))?;
    }
    let mut manifest = Vec::new();
    for s in &suite.images {
        let line = ManifestLine {
            image_id: &s.id,
            base: s.base,
            chain: &s.chain,
        };
        serde_json::to_writer(&mut manifest, &line).expect("manifest serializes");
        manifest.push(b'\n');
    }
    let p = dir.join("transforms.jsonl");
    fs::write(&p, manifest).map_err(|e| io(&p, e))?;
    let p = dir.join("true_pairs.jsonl");
    let mut f = fs::File::create(&p).map_err(|e| io(&p, e))?;
    for (a, b) in &suite.true_pairs {
        writeln!(f, "{}", serde_json::json!({ "a": a, "b": b })).map_err(|e| io(&p, e))?;
    }
    Ok(())
}

/// Pair-level agreement between predicted clusters and true near-duplicate
/// pairs. Two images form a predicted pair when they share a cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub predicted: usize,
    pub truth: usize,
    pub true_positive: usize,
    /// 1 when nothing was predicted.
    pub precision: f64,
    /// 1 when there are no true pairs.
    pub recall: f64,
}

pub fn score_pairs<'a, I, S>(clusters: I, true_pairs: &BTreeSet<(String, String)>) -> PairScores
where
    I: IntoIterator<Item = &'a BTreeSet<S>>,
    S: AsRef<str> + Ord + 'a,
{
    let (mut predicted, mut tp) = (0usize, 0usize);
    for c in clusters {
        let ids: Vec<&str> = c.iter().map(AsRef::as_ref).collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                predicted += 1;
                let (a, b) = if ids[i] <= ids[j] {
                    (ids[i], ids[j])
                } else {
                    (ids[j], ids[i])
                };
                if true_pairs.contains(&(a.to_string(), b.to_string())) {
                    tp += 1;
                }
            }
        }
    }
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    PairScores {
        predicted,
        truth: true_pairs.len(),
        true_positive: tp,
        precision: ratio(tp, predicted),
        recall: ratio(tp, true_pairs.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neardup::{dhash64, hash_distance};

    #[test]
    fn pair_scores_count_co_membership() {
        let truth: BTreeSet<(String, String)> = [("a", "b"), ("a", "c"), ("b", "c")]
            .iter()
            .map(|&(x, y)| (x.into(), y.into()))
            .collect();
        let clusters: Vec<BTreeSet<String>> = vec![
            ["a", "b"].iter().map(|s| s.to_string()).collect(),
            ["c", "d"].iter().map(|s| s.to_string()).collect(),
        ];
        let s = score_pairs(&clusters, &truth);
        assert_eq!((s.predicted, s.true_positive, s.truth), (2, 1, 3));
        assert_eq!(s.precision, 0.5);
        assert!((s.recall - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_variants_no_pairs() {
        let s = gen_image_suite(3, 0, 1).unwrap();
        assert!(s.true_pairs.is_empty());
        assert_eq!(s.images.len(), 3);
    }

    #[test]
    fn rejects_single_base() {
        assert!(gen_image_suite(1, 2, 1).is_err());
    }

    #[test]
    fn chains_reproduce_variants() {
        let s = gen_image_suite(4, 3, 9).unwrap();
        for img in &s.images {
            assert!(img.chain.len() <= 2);
            for t in &img.chain {
                t.validate().unwrap();
            }
            assert_eq!(
                apply_chain(&s.bases[img.base], &img.chain),
                img.image,
                "{}",
                img.id
            );
        }
        assert_eq!(s.true_pairs.len(), 4 * 6);
    }

    #[test]
    fn bases_are_distinct() {
        let s = gen_image_suite(30, 0, 11).unwrap();
        let hashes: Vec<u64> = s.bases.iter().map(dhash64).collect();
        let (mut far, mut total) = (0, 0);
        for i in 0..hashes.len() {
            for j in i + 1..hashes.len() {
                total += 1;
                if hash_distance(hashes[i], hashes[j]) >= 16 {
                    far += 1;
                }
            }
        }
        assert!(far as f64 >= 0.95 * total as f64, "{far}/{total}");
    }

    #[test]
    fn transform_ranges() {
        assert!(TransformSpec::Resize { factor: 2.5 }.validate().is_err());
        assert!(TransformSpec::Brightness { delta: -31 }.validate().is_err());
        assert!(TransformSpec::Overlay {
            x: 0.0,
            y: 0.0,
            w: 0.5,
            h: 0.5,
            value: 0
        }
        .validate()
        .is_err());
        let img = RasterImage::filled(10, 10, 250);
        let b = TransformSpec::Brightness { delta: 30 }.apply(&img);
        assert!(b.luma().iter().all(|&v| v == 255));
        let c = TransformSpec::Crop {
            fraction: 0.2,
            anchor_x: 1.0,
            anchor_y: 0.0,
        }
        .apply(&img);
        assert_eq!((c.width(), c.height()), (8, 8));
    }
}

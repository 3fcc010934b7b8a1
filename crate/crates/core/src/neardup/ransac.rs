use serde::{Deserialize, Serialize};

use crate::numkit::Rng;

pub type Point = (f64, f64);

/// `p' = [[a11, a12], [a21, a22]] p + (tx, ty)` with its support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub tx: f64,
    pub ty: f64,
    pub inliers: usize,
    pub inlier_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Affine([f64; 6]);

impl Affine {
    fn apply(&self, p: Point) -> Point {
        let m = &self.0;
        (
            m[0] * p.0 + m[1] * p.1 + m[4],
            m[2] * p.0 + m[3] * p.1 + m[5],
        )
    }

    fn residual(&self, (src, dst): (Point, Point)) -> f64 {
        let q = self.apply(src);
        (q.0 - dst.0).hypot(q.1 - dst.1)
    }
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares affine through the given correspondences (exact for three
/// non-collinear points). Coordinates are centred first for conditioning.
fn fit_affine(pairs: &[(Point, Point)]) -> Option<Affine> {
    let n = pairs.len() as f64;
    let (cx, cy) = pairs
        .iter()
        .fold((0.0, 0.0), |acc, (s, _)| (acc.0 + s.0 / n, acc.1 + s.1 / n));
    let (dx, dy) = pairs
        .iter()
        .fold((0.0, 0.0), |acc, (_, d)| (acc.0 + d.0 / n, acc.1 + d.1 / n));
    let mut ata = [[0.0; 3]; 3];
    let mut bx = [0.0; 3];
    let mut by = [0.0; 3];
    for (s, d) in pairs {
        let row = [s.0 - cx, s.1 - cy, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            bx[i] += row[i] * (d.0 - dx);
            by[i] += row[i] * (d.1 - dy);
        }
    }
    let px = solve3(ata, bx)?;
    let py = solve3(ata, by)?;
    // undo the centring: d = A (s − c) + t' + d̄
    let tx = px[2] + dx - px[0] * cx - px[1] * cy;
    let ty = py[2] + dy - py[0] * cx - py[1] * cy;
    Some(Affine([px[0], px[1], py[0], py[1], tx, ty]))
}

fn collinear(a: Point, b: Point, c: Point) -> bool {
    let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let span = (b.0 - a.0)
        .hypot(b.1 - a.1)
        .max((c.0 - a.0).hypot(c.1 - a.1));
    area.abs() <= 1e-6 * span.max(1.0)
}

/// RANSAC over minimal three-point samples, then a least-squares refit on the
/// best sample's inliers. Collinear samples are skipped.
///
/// Returns `None` with fewer than three matches, or when the best model has
/// fewer than three inliers.
pub fn ransac_affine(
    matches: &[(Point, Point)],
    iters: usize,
    tol_px: f64,
    rng: &mut Rng,
) -> Option<AffineFit> {
    assert!(tol_px > 0.0, "tol_px must be positive");
    let n = matches.len();
    if n < 3 {
        return None;
    }
    let inliers_of = |m: &Affine| -> Vec<usize> {
        (0..n)
            .filter(|&k| m.residual(matches[k]) <= tol_px)
            .collect()
    };
    let mut best: Option<Vec<usize>> = None;
    for _ in 0..iters {
        let i = rng.below(n);
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.below(n - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let (a, b, c) = (matches[i], matches[j], matches[k]);
        if collinear(a.0, b.0, c.0) {
            continue;
        }
        let Some(model) = fit_affine(&[a, b, c]) else {
            continue;
        };
        let inl = inliers_of(&model);
        if best.as_ref().map_or(true, |b| inl.len() > b.len()) {
            let all = inl.len() == n;
            best = Some(inl);
            if all {
                break;
            }
        }
    }
    let support = best?;
    if support.len() < 3 {
        return None;
    }
    let pts: Vec<(Point, Point)> = support.iter().map(|&k| matches[k]).collect();
    let model = fit_affine(&pts)?;
    let inliers = inliers_of(&model).len();
    if inliers < 3 {
        return None;
    }
    let m = model.0;
    Some(AffineFit {
        a11: m[0],
        a12: m[1],
        a21: m[2],
        a22: m[3],
        tx: m[4],
        ty: m[5],
        inliers,
        inlier_ratio: inliers as f64 / n as f64,
    })
}

/// Singular values of the linear part, largest first.
pub fn singular_values(fit: &AffineFit) -> (f64, f64) {
    let t = fit.a11 * fit.a11 + fit.a12 * fit.a12 + fit.a21 * fit.a21 + fit.a22 * fit.a22;
    let det = fit.a11 * fit.a22 - fit.a12 * fit.a21;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    (
        ((t + disc) / 2.0).sqrt(),
        ((t - disc) / 2.0).max(0.0).sqrt(),
    )
}

/// Accepts fits with enough support, a moderate scale change and no mirroring.
pub fn plausible(fit: &AffineFit, min_inliers: usize, min_ratio: f64) -> bool {
    let (s1, s2) = singular_values(fit);
    let det = fit.a11 * fit.a22 - fit.a12 * fit.a21;
    fit.inliers >= min_inliers
        && fit.inlier_ratio >= min_ratio
        && (0.2..=5.0).contains(&s1)
        && (0.2..=5.0).contains(&s2)
        && det > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(n: usize, rng: &mut Rng, a: [f64; 6]) -> Vec<(Point, Point)> {
        let m = Affine(a);
        (0..n)
            .map(|_| {
                let s = (rng.uniform() * 200.0, rng.uniform() * 200.0);
                (s, m.apply(s))
            })
            .collect()
    }

    fn fit(a11: f64, a12: f64, a21: f64, a22: f64, inliers: usize, ratio: f64) -> AffineFit {
        AffineFit {
            a11,
            a12,
            a21,
            a22,
            tx: 0.0,
            ty: 0.0,
            inliers,
            inlier_ratio: ratio,
        }
    }

    #[test]
    fn exact_scale_and_shift() {
        let mut rng = Rng::new(1);
        let m = planted(20, &mut rng, [2.0, 0.0, 0.0, 2.0, 10.0, 5.0]);
        let f = ransac_affine(&m, 100, 3.0, &mut rng).unwrap();
        let got = [f.a11, f.a12, f.a21, f.a22, f.tx, f.ty];
        for (g, w) in got.iter().zip([2.0, 0.0, 0.0, 2.0, 10.0, 5.0]) {
            assert!((g - w).abs() < 1e-6, "{got:?}");
        }
        assert_eq!(f.inliers, 20);
        assert_eq!(f.inlier_ratio, 1.0);
    }

    #[test]
    fn too_few_matches() {
        let mut rng = Rng::new(2);
        let m = planted(2, &mut rng, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(ransac_affine(&m, 100, 3.0, &mut rng).is_none());
    }

    #[test]
    fn inliers_with_outliers() {
        let truth = [0.9, -0.2, 0.25, 1.1, -7.0, 12.0];
        for seed in 0..5 {
            let mut rng = Rng::new(seed);
            let mut m = planted(12, &mut rng, truth);
            for _ in 0..8 {
                m.push((
                    (rng.uniform() * 200.0, rng.uniform() * 200.0),
                    (rng.uniform() * 200.0, rng.uniform() * 200.0),
                ));
            }
            let f = ransac_affine(&m, 1000, 3.0, &mut rng).unwrap();
            let got = [f.a11, f.a12, f.a21, f.a22, f.tx, f.ty];
            for (g, w) in got.iter().zip(truth) {
                assert!((g - w).abs() < 1e-2, "seed {seed}: {got:?}");
            }
            assert_eq!(f.inliers, 12, "seed {seed}");
        }
    }

    #[test]
    fn collinear_only_is_absent() {
        let mut rng = Rng::new(3);
        let m: Vec<(Point, Point)> = (0..10)
            .map(|i| ((i as f64, 2.0 * i as f64), (i as f64, 0.0)))
            .collect();
        assert!(ransac_affine(&m, 200, 3.0, &mut rng).is_none());
    }

    #[test]
    fn plausibility_gates() {
        assert!(plausible(&fit(1.0, 0.0, 0.0, 1.0, 30, 1.0), 15, 0.2));
        assert!(!plausible(&fit(10.0, 0.0, 0.0, 10.0, 30, 1.0), 15, 0.2));
        assert!(!plausible(&fit(-1.0, 0.0, 0.0, 1.0, 30, 1.0), 15, 0.2));
        assert!(!plausible(&fit(1.0, 0.0, 0.0, 1.0, 14, 1.0), 15, 0.2));
        assert!(!plausible(&fit(1.0, 0.0, 0.0, 1.0, 30, 0.1), 15, 0.2));
    }

    #[test]
    fn singular_values_of_rotation_scale() {
        let (c, s) = (0.6_f64, 0.8_f64);
        let (s1, s2) = singular_values(&fit(2.0 * c, -2.0 * s, 2.0 * s, 2.0 * c, 3, 1.0));
        assert!((s1 - 2.0).abs() < 1e-12 && (s2 - 2.0).abs() < 1e-12);
        let (s1, s2) = singular_values(&fit(3.0, 0.0, 0.0, 0.5, 3, 1.0));
        assert!((s1 - 3.0).abs() < 1e-12 && (s2 - 0.5).abs() < 1e-12);
    }
}

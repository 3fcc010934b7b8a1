use crate::imgcore::RasterImage;

/// Box-filter resample where every output pixel is the coverage-weighted
/// mean of the source pixels it overlaps.
pub fn area_resize(img: &RasterImage, out_w: usize, out_h: usize) -> Vec<f64> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let sx = w / out_w as f64;
    let sy = h / out_h as f64;
    let spans = |lo: f64, hi: f64| {
        // (index, covered length) pairs of source cells intersecting [lo, hi)
        let mut out = Vec::new();
        let mut k = lo.floor() as usize;
        while (k as f64) < hi {
            let a = lo.max(k as f64);
            let b = hi.min(k as f64 + 1.0);
            if b > a {
                out.push((k, b - a));
            }
            k += 1;
        }
        out
    };
    let mut res = vec![0.0; out_w * out_h];
    for oy in 0..out_h {
        let ys = spans(oy as f64 * sy, (oy as f64 + 1.0) * sy);
        for ox in 0..out_w {
            let xs = spans(ox as f64 * sx, (ox as f64 + 1.0) * sx);
            let mut acc = 0.0;
            for &(y, wy) in &ys {
                for &(x, wx) in &xs {
                    acc +=
                        wy * wx * img.get(x.min(img.width() - 1), y.min(img.height() - 1)) as f64;
                }
            }
            res[oy * out_w + ox] = acc / (sx * sy);
        }
    }
    res
}

/// Difference hash: area-average to 9×8, then bit `8i + j` is set when pixel
/// `(row i, col j)` is brighter than its right neighbour.
pub fn dhash64(img: &RasterImage) -> u64 {
    let small = area_resize(img, 9, 8);
    let mut hash = 0u64;
    for i in 0..8 {
        for j in 0..8 {
            if small[i * 9 + j] > small[i * 9 + j + 1] {
                hash |= 1 << (i * 8 + j);
            }
        }
    }
    hash
}

#[inline]
pub fn hash_distance(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

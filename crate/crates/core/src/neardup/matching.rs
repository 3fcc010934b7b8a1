use crate::imgcore::BinaryDescriptor;

pub const MAX_MATCH_DISTANCE: u32 = 64;
pub const RATIO: f64 = 0.8;

/// Best and second-best distances from `d` into `pool`, with the best index.
fn two_nearest(
    d: &BinaryDescriptor,
    pool: &[BinaryDescriptor],
) -> Option<(usize, u32, Option<u32>)> {
    let mut best: Option<(usize, u32)> = None;
    let mut second: Option<u32> = None;
    for (j, p) in pool.iter().enumerate() {
        let dist = d.hamming(p);
        match best {
            None => best = Some((j, dist)),
            Some((_, b)) if dist < b => {
                second = Some(b);
                best = Some((j, dist));
            }
            Some(_) => {
                if second.map_or(true, |s| dist < s) {
                    second = Some(dist);
                }
            }
        }
    }
    best.map(|(j, b)| (j, b, second))
}

fn passes_ratio(best: u32, second: Option<u32>) -> bool {
    match second {
        None => true,
        // two equally perfect candidates are ambiguous
        Some(0) => false,
        Some(s) => best as f64 <= RATIO * s as f64,
    }
}

/// Mutual nearest neighbours under Hamming distance, kept when the distance
/// is at most 64 and the best/second-best ratio is at most 0.8 on both sides.
pub fn match_descriptors(da: &[BinaryDescriptor], db: &[BinaryDescriptor]) -> Vec<(usize, usize)> {
    if da.is_empty() || db.is_empty() {
        return Vec::new();
    }
    let back: Vec<Option<(usize, u32, Option<u32>)>> =
        db.iter().map(|d| two_nearest(d, da)).collect();
    let mut out = Vec::new();
    for (i, d) in da.iter().enumerate() {
        let Some((j, best, second)) = two_nearest(d, db) else {
            continue;
        };
        if best > MAX_MATCH_DISTANCE || !passes_ratio(best, second) {
            continue;
        }
        if let Some((bi, bbest, bsecond)) = back[j] {
            if bi == i && passes_ratio(bbest, bsecond) {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rng;

    fn random_desc(rng: &mut Rng) -> BinaryDescriptor {
        let mut b = [0u8; 32];
        for v in &mut b {
            *v = rng.below(256) as u8;
        }
        BinaryDescriptor(b)
    }

    fn flip_bits(d: &BinaryDescriptor, k: usize, rng: &mut Rng) -> BinaryDescriptor {
        let mut out = *d;
        let mut idx: Vec<usize> = (0..256).collect();
        rng.shuffle(&mut idx);
        for &i in &idx[..k] {
            out.0[i / 8] ^= 1 << (i % 8);
        }
        out
    }

    #[test]
    fn identical_lists_match_identity() {
        let mut rng = Rng::new(3);
        let d: Vec<_> = (0..30).map(|_| random_desc(&mut rng)).collect();
        let m = match_descriptors(&d, &d);
        assert_eq!(m, (0..30).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn complement_does_not_match() {
        let mut rng = Rng::new(4);
        let d = random_desc(&mut rng);
        assert!(match_descriptors(&[d], &[d.complement()]).is_empty());
    }

    #[test]
    fn empty_inputs() {
        let mut rng = Rng::new(5);
        assert!(match_descriptors(&[], &[random_desc(&mut rng)]).is_empty());
        assert!(match_descriptors(&[random_desc(&mut rng)], &[]).is_empty());
    }

    #[test]
    fn planted_pairs_among_distractors() {
        let mut rng = Rng::new(6);
        let planted: Vec<_> = (0..20).map(|_| random_desc(&mut rng)).collect();
        let mut da = planted.clone();
        let mut db: Vec<_> = planted.iter().map(|d| flip_bits(d, 20, &mut rng)).collect();
        for _ in 0..80 {
            da.push(random_desc(&mut rng));
            db.push(random_desc(&mut rng));
        }
        let m = match_descriptors(&da, &db);
        let recovered = m.iter().filter(|&&(i, j)| i < 20 && i == j).count();
        let wrong = m
            .iter()
            .filter(|&&(i, j)| (i < 20 || j < 20) && i != j)
            .count();
        assert!(recovered >= 18, "{recovered}");
        assert_eq!(wrong, 0);
    }
}

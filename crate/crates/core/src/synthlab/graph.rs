use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bhin::PostRecord;
use crate::evalkit::LabeledTruth;
use crate::neardup::VisualAssertion;
use crate::numkit::Rng;

use super::SynthError;

/// Planted two-camp bipartite graph parameters.
///
/// The assertion pool has `2 · assertions_per_side` items; a
/// `neutral_fraction` share of it is neutral and the rest is split evenly
/// between the sides, so the node count does not change with the fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthGraphConfig {
    pub users_per_side: usize,
    pub assertions_per_side: usize,
    pub neutral_fraction: f64,
    pub p_in: f64,
    pub p_out: f64,
    /// Defaults to `(p_in + p_out) / 2`.
    pub p_neutral: Option<f64>,
    pub seed: u64,
}

impl Default for SynthGraphConfig {
    fn default() -> Self {
        Self::standard(42)
    }
}

impl SynthGraphConfig {
    /// 100 users and 200 assertions per side, `p_in = 0.05`, `p_out = 0.001`.
    pub fn standard(seed: u64) -> Self {
        Self {
            users_per_side: 100,
            assertions_per_side: 200,
            neutral_fraction: 0.0,
            p_in: 0.05,
            p_out: 0.001,
            p_neutral: None,
            seed,
        }
    }

    /// Standard sizes with `p_out = 0.01` and 10% neutral content.
    pub fn noisy(seed: u64) -> Self {
        Self {
            p_out: 0.01,
            neutral_fraction: 0.1,
            ..Self::standard(seed)
        }
    }

    pub fn p_neutral(&self) -> f64 {
        self.p_neutral.unwrap_or((self.p_in + self.p_out) / 2.0)
    }

    pub fn neutral_count(&self) -> usize {
        let total = 2 * self.assertions_per_side;
        let n = (self.neutral_fraction * total as f64).round() as usize;
        // keep the partisan remainder even
        n + (total - n) % 2
    }

    pub fn partisan_per_side(&self) -> usize {
        (2 * self.assertions_per_side - self.neutral_count()) / 2
    }

    /// Expected number of edges.
    pub fn expected_edges(&self) -> f64 {
        let u = self.users_per_side as f64;
        let p = self.partisan_per_side() as f64;
        let n = self.neutral_count() as f64;
        2.0 * u * p * (self.p_in + self.p_out) + 2.0 * u * n * self.p_neutral()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.users_per_side == 0 || self.assertions_per_side == 0 {
            return bad("users_per_side and assertions_per_side must be positive".into());
        }
        if !(0.0..1.0).contains(&self.neutral_fraction) {
            return bad(format!(
                "neutral_fraction {} outside [0, 1)",
                self.neutral_fraction
            ));
        }
        for (name, p) in [
            ("p_in", self.p_in),
            ("p_out", self.p_out),
            ("p_neutral", self.p_neutral()),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// A warning when the planted structure is not assortative.
    pub fn warning(&self) -> Option<String> {
        (self.p_in <= self.p_out).then(|| {
            format!(
                "p_in ({}) <= p_out ({}): no planted echo-chamber structure",
                self.p_in, self.p_out
            )
        })
    }
}

/// Generated posts, one-image assertions and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthGraph {
    pub posts: Vec<PostRecord>,
    pub assertions: Vec<VisualAssertion>,
    pub truth: LabeledTruth,
}

pub fn user_id(side: usize, i: usize) -> String {
    format!("u{side}_{i:04}")
}

pub fn image_id(assertion: u64) -> String {
    format!("img{assertion:05}")
}

/// Samples the planted graph. Assertions `[0, P)` belong to side 0,
/// `[P, 2P)` to side 1, and the rest are neutral with a uniformly drawn
/// nominal label.
pub fn gen_graph(cfg: &SynthGraphConfig) -> Result<SynthGraph, SynthError> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let per_side = cfg.partisan_per_side();
    let total = 2 * cfg.assertions_per_side;
    let side_of = |a: usize| -> Option<usize> {
        if a < per_side {
            Some(0)
        } else if a < 2 * per_side {
            Some(1)
        } else {
            None
        }
    };

    let mut truth = LabeledTruth::default();
    let mut assertions = Vec::with_capacity(total);
    for a in 0..total {
        let id = a as u64;
        let label = match side_of(a) {
            Some(s) => s as u8,
            None => {
                truth.neutral.insert(id);
                u8::from(rng.bernoulli(0.5))
            }
        };
        truth.labels.insert(id, label);
        assertions.push(VisualAssertion {
            assertion_id: id,
            image_ids: BTreeSet::from([image_id(id)]),
        });
    }

    let p_neutral = cfg.p_neutral();
    let mut posts = Vec::new();
    for side in 0..2 {
        for i in 0..cfg.users_per_side {
            let uid = user_id(side, i);
            for a in 0..total {
                let p = match side_of(a) {
                    Some(s) if s == side => cfg.p_in,
                    Some(_) => cfg.p_out,
                    None => p_neutral,
                };
                if rng.bernoulli(p) {
                    posts.push(PostRecord {
                        user_id: uid.clone(),
                        image_id: image_id(a as u64),
                    });
                }
            }
        }
    }
    Ok(SynthGraph {
        posts,
        assertions,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn side_of_user(u: &str) -> usize {
        usize::from(u.starts_with("u1"))
    }

    #[test]
    fn no_cross_edges_without_noise() {
        let cfg = SynthGraphConfig {
            p_out: 0.0,
            ..SynthGraphConfig::standard(1)
        };
        let g = gen_graph(&cfg).unwrap();
        for p in &g.posts {
            let aid: u64 = p.image_id[3..].parse().unwrap();
            assert_eq!(g.truth.labels[&aid] as usize, side_of_user(&p.user_id));
        }
        assert!(g.truth.neutral.is_empty());
    }

    #[test]
    fn edge_count_within_three_sigma() {
        for cfg in [SynthGraphConfig::standard(3), SynthGraphConfig::noisy(4)] {
            let g = gen_graph(&cfg).unwrap();
            let u = cfg.users_per_side as f64;
            let p = cfg.partisan_per_side() as f64;
            let n = cfg.neutral_count() as f64;
            let var = 2.0 * u * p * (cfg.p_in * (1.0 - cfg.p_in) + cfg.p_out * (1.0 - cfg.p_out))
                + 2.0 * u * n * cfg.p_neutral() * (1.0 - cfg.p_neutral());
            let dev = (g.posts.len() as f64 - cfg.expected_edges()).abs();
            assert!(dev <= 3.0 * var.sqrt(), "{dev} vs sigma {}", var.sqrt());
        }
    }

    #[test]
    fn seed_determinism() {
        let cfg = SynthGraphConfig::noisy(9);
        assert_eq!(gen_graph(&cfg).unwrap(), gen_graph(&cfg).unwrap());
        let other = SynthGraphConfig::noisy(10);
        assert_ne!(
            gen_graph(&cfg).unwrap().posts,
            gen_graph(&other).unwrap().posts
        );
    }

    #[test]
    fn neutral_share_of_pool() {
        let cfg = SynthGraphConfig::noisy(1);
        let g = gen_graph(&cfg).unwrap();
        assert_eq!(g.truth.neutral.len(), 40);
        assert_eq!(cfg.partisan_per_side(), 180);
        assert_eq!(g.assertions.len(), 400);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cfg = SynthGraphConfig {
            p_in: 1.5,
            ..SynthGraphConfig::standard(1)
        };
        assert!(gen_graph(&cfg).is_err());
        let cfg = SynthGraphConfig {
            neutral_fraction: 1.0,
            ..SynthGraphConfig::standard(1)
        };
        assert!(gen_graph(&cfg).is_err());
    }
}

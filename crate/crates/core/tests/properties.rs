use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use memeaxis::bhin::{build_graph, filter_min_degree, prepare_inputs, NodeKind, PostRecord};
use memeaxis::evalkit::{evaluate, AxisMapping};
use memeaxis::imgcore::RasterImage;
use memeaxis::infovgae::{rectified_sample, PiController};
use memeaxis::neardup::{
    cluster_assertions, dhash64, hash_distance, ransac_affine, VisualAssertion,
};
use memeaxis::nmf::nmf_factorize;
use memeaxis::numkit::{matmul, Matrix, Rng};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, rows * cols)
        .prop_map(move |d| Matrix::from_vec(rows, cols, d).unwrap())
}

fn posts_and_assertions() -> impl Strategy<Value = (Vec<PostRecord>, Vec<VisualAssertion>)> {
    // images 0..n_img spread over assertions by `owner`; posts pick users and images
    (2usize..12, 1usize..6, 1usize..8)
        .prop_flat_map(|(n_img, n_assert, n_users)| {
            (
                prop::collection::vec(0..n_assert, n_img),
                prop::collection::vec((0..n_users, 0..n_img), 1..40),
            )
        })
        .prop_map(|(owner, posts)| {
            let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
            for (img, &a) in owner.iter().enumerate() {
                groups.entry(a).or_default().insert(format!("i{img}"));
            }
            let assertions = groups
                .into_iter()
                .map(|(a, image_ids)| VisualAssertion {
                    assertion_id: a as u64,
                    image_ids,
                })
                .collect();
            let posts = posts
                .into_iter()
                .map(|(u, i)| PostRecord {
                    user_id: format!("u{u}"),
                    image_id: format!("i{i}"),
                })
                .collect();
            (posts, assertions)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rectified_samples_are_non_negative(mu in matrix(6, 2), ls in matrix(6, 2), eps in matrix(6, 2)) {
        let ls = ls.map(|v| v.clamp(-6.0, 6.0));
        let z = rectified_sample(&mu, &ls, &eps).unwrap();
        prop_assert!(z.data().iter().all(|&v| v >= 0.0));
        // positive pre-activations pass through unchanged
        for i in 0..z.len() {
            let pre = mu.data()[i] + ls.data()[i].exp() * eps.data()[i];
            if pre > 0.0 {
                prop_assert_eq!(z.data()[i], pre);
            }
        }
    }

    #[test]
    fn pi_beta_stays_in_bounds(kls in prop::collection::vec(0.0f64..1e4, 1..200), target in 1.0f64..2000.0) {
        let mut pi = PiController::new(0.01, 0.001, target, 0.0, 1.0);
        for kl in kls {
            let b = pi.update(kl);
            prop_assert!((0.0..=1.0).contains(&b));
            prop_assert_eq!(b, pi.beta());
        }
    }

    #[test]
    fn matmul_is_associative(a in matrix(3, 4), b in matrix(4, 2), c in matrix(2, 5)) {
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        prop_assert!(left.sub(&right).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn graph_is_bipartite_and_inputs_symmetric((posts, assertions) in posts_and_assertions()) {
        let g = build_graph(&posts, &assertions).unwrap();
        let users: BTreeSet<&str> = posts.iter().map(|p| p.user_id.as_str()).collect();
        prop_assert_eq!(g.node_count(), users.len() + assertions.len());
        let mut seen = BTreeSet::new();
        for &(u, a) in g.edges() {
            prop_assert_eq!(g.nodes()[u].kind, NodeKind::User);
            prop_assert_eq!(g.nodes()[a].kind, NodeKind::Assertion);
            prop_assert!(seen.insert((u, a)));
        }
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        let inp = prepare_inputs(&g).unwrap();
        let n = &inp.normalized;
        prop_assert!(n.sub(&n.transpose()).unwrap().max_abs() < 1e-15);
        for i in 0..inp.node_count() {
            prop_assert_eq!(inp.adjacency.get(i, i), 1.0);
        }
    }

    #[test]
    fn degree_filter_removes_low_degree_nodes((posts, assertions) in posts_and_assertions(), k in 0usize..3) {
        let g = build_graph(&posts, &assertions).unwrap();
        if k == 0 {
            prop_assert_eq!(filter_min_degree(&g, 0).unwrap(), g);
        } else if let Ok(f) = filter_min_degree(&g, k) {
            let before: BTreeMap<&str, usize> =
                g.nodes().iter().zip(g.degrees()).map(|(n, d)| (n.id.as_str(), d)).collect();
            for n in f.nodes() {
                prop_assert!(before[n.id.as_str()] > k);
            }
            prop_assert!(f.edge_count() <= g.edge_count());
        }
    }

    #[test]
    fn clusters_partition_ids(n in 1usize..20, raw in prop::collection::vec((0usize..20, 0usize..20), 0..30)) {
        let ids: Vec<String> = (0..n).map(|i| format!("img{i:02}")).collect();
        let pairs: Vec<(String, String)> = raw
            .into_iter()
            .filter(|&(a, b)| a < n && b < n)
            .map(|(a, b)| (ids[a].clone(), ids[b].clone()))
            .collect();
        let clusters = cluster_assertions(&pairs, &ids).unwrap();
        let mut all = BTreeSet::new();
        for (k, c) in clusters.iter().enumerate() {
            prop_assert_eq!(c.assertion_id, k as u64);
            for id in &c.image_ids {
                prop_assert!(all.insert(id.clone()));
            }
        }
        prop_assert_eq!(all.len(), n);
        let owner: BTreeMap<&String, u64> =
            clusters.iter().flat_map(|c| c.image_ids.iter().map(move |i| (i, c.assertion_id))).collect();
        for (a, b) in &pairs {
            prop_assert_eq!(owner[a], owner[b]);
        }
    }

    #[test]
    fn metrics_are_bounded_and_label_symmetric(raw in prop::collection::vec((0usize..2, 0u8..2), 1..30)) {
        let assign: BTreeMap<u64, usize> = raw.iter().enumerate().map(|(i, &(a, _))| (i as u64, a)).collect();
        let truth: BTreeMap<u64, u8> = raw.iter().enumerate().map(|(i, &(_, l))| (i as u64, l)).collect();
        let flipped: BTreeMap<u64, u8> = truth.iter().map(|(&k, &l)| (k, 1 - l)).collect();
        let none = BTreeSet::new();
        let r = evaluate(&assign, &truth, &none, 2, &AxisMapping::BestPermutation).unwrap();
        let f = evaluate(&assign, &flipped, &none, 2, &AxisMapping::BestPermutation).unwrap();
        for v in [r.precision, r.recall, r.f1, r.purity] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((r.f1 - f.f1).abs() < 1e-12);
        prop_assert!((r.purity - f.purity).abs() < 1e-12);
    }

    #[test]
    fn dhash_distance_is_a_metric(seed_a in 0u64..1000, seed_b in 0u64..1000) {
        let img = |s: u64| {
            let mut rng = Rng::new(s);
            let v: Vec<u8> = (0..32 * 24).map(|_| rng.below(256) as u8).collect();
            RasterImage::new(32, 24, v).unwrap()
        };
        let (a, b) = (dhash64(&img(seed_a)), dhash64(&img(seed_b)));
        prop_assert_eq!(hash_distance(a, a), 0);
        prop_assert_eq!(hash_distance(a, b), hash_distance(b, a));
        prop_assert!(hash_distance(a, b) <= 64);
    }

    #[test]
    fn ransac_recovers_exact_affine(
        m in prop::array::uniform4(-1.5f64..1.5),
        t in prop::array::uniform2(-50.0f64..50.0),
        seed in 0u64..1000,
    ) {
        prop_assume!((m[0] * m[3] - m[1] * m[2]).abs() > 0.1);
        let mut rng = Rng::new(seed);
        let pts: Vec<((f64, f64), (f64, f64))> = (0..30)
            .map(|_| {
                let (x, y) = (rng.uniform_range(0.0, 200.0), rng.uniform_range(0.0, 200.0));
                ((x, y), (m[0] * x + m[1] * y + t[0], m[2] * x + m[3] * y + t[1]))
            })
            .collect();
        let fit = ransac_affine(&pts, 200, 1.0, &mut Rng::new(seed ^ 7)).unwrap();
        prop_assert_eq!(fit.inliers, 30);
        for (got, want) in [fit.a11, fit.a12, fit.a21, fit.a22, fit.tx, fit.ty].iter().zip([m[0], m[1], m[2], m[3], t[0], t[1]]) {
            prop_assert!((got - want).abs() < 1e-6, "{} vs {}", got, want);
        }
    }

    #[test]
    fn nmf_loss_never_increases(b in prop::collection::vec(0.0f64..1.0, 6 * 5), seed in 0u64..100) {
        let b = Matrix::from_vec(6, 5, b).unwrap();
        if let Ok(f) = nmf_factorize(&b, 2, 50, seed) {
            prop_assert!(f.w.data().iter().chain(f.h.data()).all(|&v| v >= 0.0));
            for w in f.loss_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

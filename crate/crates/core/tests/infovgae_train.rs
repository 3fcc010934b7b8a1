use memeaxis::bhin::{build_graph, prepare_inputs, BhinGraph, NodeKind, PostRecord};
use memeaxis::infovgae::{
    anchor_mask, encode, objective_on_tape, sample_noise, train, AnchorLabel, Discriminator,
    EncoderParams, ObjectiveInputs, ReconTargets, TrainConfig,
};
use memeaxis::neardup::VisualAssertion;
use memeaxis::numkit::{grad_check, Rng};
use memeaxis::synthlab::{run_planted, Method, SynthGraphConfig};

/// u1, u2 share assertion 0; u2, u3 share 1; u3 alone posts 2.
fn hand_graph() -> BhinGraph {
    let posts: Vec<PostRecord> = [
        ("u1", "a"),
        ("u2", "a"),
        ("u2", "b"),
        ("u3", "b"),
        ("u3", "c"),
    ]
    .iter()
    .map(|&(u, i)| PostRecord {
        user_id: u.into(),
        image_id: i.into(),
    })
    .collect();
    let assertions: Vec<VisualAssertion> = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(k, i)| VisualAssertion {
            assertion_id: k as u64,
            image_ids: [i.to_string()].into_iter().collect(),
        })
        .collect();
    build_graph(&posts, &assertions).unwrap()
}

fn small_cfg(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        hidden_dim: 8,
        ..TrainConfig::default()
    }
}

/// The KL set-point is a sum over nodes, so it scales with graph size.
fn two_camp_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 500,
        kl_target: 150.0,
        tc_weight: 0.0,
        seed,
        ..TrainConfig::default()
    }
}

fn two_camp(seed: u64) -> SynthGraphConfig {
    SynthGraphConfig {
        users_per_side: 40,
        assertions_per_side: 60,
        p_in: 0.15,
        p_out: 0.005,
        ..SynthGraphConfig::standard(seed)
    }
}

#[test]
fn zero_epochs_returns_initial_state() {
    let g = hand_graph();
    let inputs = prepare_inputs(&g).unwrap();
    let cfg = small_cfg(0);
    let out = train(&inputs, &cfg, &[]).unwrap();
    assert!(out.history.is_empty());
    let init = EncoderParams::glorot(6, 8, 2, &mut Rng::new(cfg.seed));
    let (mu, ls) = encode(&inputs, &init).unwrap();
    assert_eq!(out.state.mu, mu);
    assert_eq!(out.state.log_sigma, ls);
    assert!(out.state.z.data().iter().all(|&v| v >= 0.0));
}

#[test]
fn hand_graph_full_objective_gradient() {
    let g = hand_graph();
    assert_eq!(g.node_count(), 6);
    let inputs = prepare_inputs(&g).unwrap();
    let mut rng = Rng::new(5);
    let params = EncoderParams::glorot(6, 8, 2, &mut rng).to_vec();
    let noise = sample_noise(6, 2, &mut rng);
    let recon = ReconTargets::new(&inputs.adjacency).unwrap();
    let disc = Discriminator::new(2, 16, 1e-3, &mut rng);
    let mask = anchor_mask(&[AnchorLabel { node: 3, axis: 1 }], 6, 2).unwrap();
    let fixed = ObjectiveInputs {
        inputs: &inputs,
        recon: &recon,
        noise: &noise,
        disc: &disc,
        anchor_mask: &mask,
        beta: 0.7,
        tc_weight: 0.5,
        anchor_weight: 1.0,
    };
    let r = grad_check(
        |t, v| Ok(objective_on_tape(t, v, &fixed)?.total),
        &params,
        1e-6,
    )
    .unwrap();
    assert!(r.max_rel_error < 1e-4, "{r:?}");
}

#[test]
fn training_is_deterministic_and_bounded() {
    let g = hand_graph();
    let inputs = prepare_inputs(&g).unwrap();
    let cfg = TrainConfig {
        kl_target: 2.0,
        k_p: 0.01,
        k_i: 0.001,
        ..small_cfg(150)
    };
    let a = train(&inputs, &cfg, &[]).unwrap();
    let b = train(&inputs, &cfg, &[]).unwrap();
    assert_eq!(a.state.mu, b.state.mu);
    assert_eq!(a.history, b.history);
    assert_eq!(a.history.len(), 150);
    for (k, e) in a.history.iter().enumerate() {
        assert_eq!(e.epoch, k);
        assert!((cfg.beta_min..=cfg.beta_max).contains(&e.beta));
        assert!(e.total.is_finite());
    }
    assert_eq!(a.z_negative, 0);
    // one sample per epoch plus the returned one
    assert_eq!(a.z_samples, 151 * 6 * 2);
}

#[test]
fn bad_anchor_is_rejected() {
    let inputs = prepare_inputs(&hand_graph()).unwrap();
    assert!(train(&inputs, &small_cfg(1), &[AnchorLabel { node: 6, axis: 0 }]).is_err());
    assert!(train(&inputs, &small_cfg(1), &[AnchorLabel { node: 3, axis: 2 }]).is_err());
}

#[test]
fn two_camp_graph_is_recovered_in_500_epochs() {
    let cfg = two_camp_cfg(1);
    let run = run_planted(&two_camp(1), &cfg, &Method::InfoVgae).unwrap();
    assert!(run.report.f1 >= 0.95, "{:?}", run.report);
}

#[test]
fn anchored_assertions_sit_on_their_axis() {
    let cfg = two_camp_cfg(2);
    let method = Method::SemiSupervised {
        anchor_fraction: 0.05,
        min_anchor_degree: 4,
    };
    let run = run_planted(&two_camp(2), &cfg, &method).unwrap();
    assert_eq!(run.anchors.len(), 6);
    let (mut on, mut off) = (0.0, 0.0);
    for a in &run.anchors {
        assert_eq!(run.graph.nodes()[a.node].kind, NodeKind::Assertion);
        let row = run.embedding.coords.row(a.node);
        on += row[a.axis];
        off += row[1 - a.axis].max(0.0);
    }
    assert!(on > 0.0 && off < 0.1 * on, "on {on} off {off}");
}

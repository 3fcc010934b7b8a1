use crate::bhin::PreparedInputs;
use crate::numkit::{Adam, Matrix, Rng, Tape, Var};

use super::config::TrainConfig;
use super::disc::Discriminator;
use super::model::{
    anchor_mask, encode, objective_on_tape, rectified_sample, sample_noise, AnchorLabel,
    EncoderParams, ObjectiveInputs, ReconTargets,
};
use super::pi::PiController;
use super::InfoVgaeError;

/// Per-node Gaussian parameters and one rectified sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentState {
    pub mu: Matrix,
    pub log_sigma: Matrix,
    pub z: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub recon: f64,
    pub kl: f64,
    pub tc: f64,
    pub anchor: f64,
    pub total: f64,
    /// β used for this epoch's step.
    pub beta: f64,
    pub disc_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub state: LatentState,
    pub params: EncoderParams,
    pub history: Vec<EpochRecord>,
    /// Latent coordinates sampled during training.
    pub z_samples: u64,
    /// Sampled coordinates that came out negative (always zero).
    pub z_negative: u64,
}

/// Full-graph training of the encoder.
///
/// Each epoch: draw fresh noise, train the discriminator one step on the
/// detached sample, take one Adam step on the total loss with the current β,
/// then update β from that epoch's KL.
pub fn train(
    inputs: &PreparedInputs,
    cfg: &TrainConfig,
    anchors: &[AnchorLabel],
) -> Result<TrainOutcome, InfoVgaeError> {
    cfg.validate().map_err(InfoVgaeError::Config)?;
    let n = inputs.node_count();
    let latent = cfg.latent_dim;
    let recon = ReconTargets::new(&inputs.adjacency)?;
    let mask = anchor_mask(anchors, n, latent)?;

    let mut rng = Rng::new(cfg.seed);
    let mut params =
        EncoderParams::glorot(inputs.features.cols(), cfg.hidden_dim, latent, &mut rng).to_vec();
    let mut disc = Discriminator::new(latent, cfg.disc_hidden, cfg.lr, &mut rng);
    let mut opt = Adam::for_params(cfg.lr, &params);
    let mut pi = PiController::new(cfg.k_p, cfg.k_i, cfg.kl_target, cfg.beta_min, cfg.beta_max);

    let mut history = Vec::with_capacity(cfg.epochs);
    let (mut z_samples, mut z_negative) = (0u64, 0u64);

    for epoch in 0..cfg.epochs {
        let noise = sample_noise(n, latent, &mut rng);
        let beta = pi.beta();

        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
        // sample first so the discriminator trains on this epoch's Z
        let z_now = {
            let enc = EncoderParams::from_slice(&params);
            let (mu, ls) = encode(inputs, &enc)?;
            rectified_sample(&mu, &ls, &noise)?
        };
        z_samples += z_now.len() as u64;
        z_negative += z_now.data().iter().filter(|&&v| v < 0.0).count() as u64;
        let disc_loss = disc.step(&z_now, &mut rng)?;

        let fixed = ObjectiveInputs {
            inputs,
            recon: &recon,
            noise: &noise,
            disc: &disc,
            anchor_mask: &mask,
            beta,
            tc_weight: cfg.tc_weight,
            anchor_weight: cfg.anchor_weight,
        };
        let obj = objective_on_tape(&mut tape, &vars, &fixed)?;
        let rec = EpochRecord {
            epoch,
            recon: tape.scalar(obj.recon),
            kl: tape.scalar(obj.kl),
            tc: tape.scalar(obj.tc),
            anchor: tape.scalar(obj.anchor),
            total: tape.scalar(obj.total),
            beta,
            disc_loss,
        };
        if !rec.total.is_finite() {
            return Err(InfoVgaeError::NonFinite {
                epoch,
                recon: rec.recon,
                kl: rec.kl,
                tc: rec.tc,
                anchor: rec.anchor,
            });
        }
        let grads = tape.backward(obj.total)?;
        let gs: Vec<Matrix> = vars
            .iter()
            .zip(&params)
            .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
            .collect();
        opt.step(&mut params, &gs)?;
        pi.update(rec.kl);
        history.push(rec);
    }

    let enc = EncoderParams::from_slice(&params);
    let (mu, log_sigma) = encode(inputs, &enc)?;
    let noise = sample_noise(n, latent, &mut rng);
    let z = rectified_sample(&mu, &log_sigma, &noise)?;
    z_samples += z.len() as u64;
    z_negative += z.data().iter().filter(|&&v| v < 0.0).count() as u64;
    Ok(TrainOutcome {
        state: LatentState { mu, log_sigma, z },
        params: enc,
        history,
        z_samples,
        z_negative,
    })
}

//! Encoder, latent sampling, decoder and the loss terms, each available as a
//! plain function and as a tape builder used for training.

use crate::bhin::PreparedInputs;
use crate::numkit::{sigmoid, Matrix, NumError, Rng, Tape, Var};

use super::disc::Discriminator;
use super::InfoVgaeError;

pub const LOG_SIGMA_MIN: f64 = -6.0;
pub const LOG_SIGMA_MAX: f64 = 6.0;

/// Weights of the two-layer GCN encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    /// `F × d₁` shared layer.
    pub w_hidden: Matrix,
    /// `d₁ × T` mean head.
    pub w_mu: Matrix,
    /// `d₁ × T` log-std head.
    pub w_sigma: Matrix,
}

pub fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(-limit, limit))
}

impl EncoderParams {
    pub fn glorot(features: usize, hidden: usize, latent: usize, rng: &mut Rng) -> Self {
        Self {
            w_hidden: glorot(features, hidden, rng),
            w_mu: glorot(hidden, latent, rng),
            w_sigma: glorot(hidden, latent, rng),
        }
    }

    pub fn zeros(features: usize, hidden: usize, latent: usize) -> Self {
        Self {
            w_hidden: Matrix::zeros(features, hidden),
            w_mu: Matrix::zeros(hidden, latent),
            w_sigma: Matrix::zeros(hidden, latent),
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.w_mu.cols()
    }

    pub fn to_vec(&self) -> Vec<Matrix> {
        vec![
            self.w_hidden.clone(),
            self.w_mu.clone(),
            self.w_sigma.clone(),
        ]
    }

    pub fn from_slice(m: &[Matrix]) -> Self {
        Self {
            w_hidden: m[0].clone(),
            w_mu: m[1].clone(),
            w_sigma: m[2].clone(),
        }
    }
}

/// Encoder output recorded on a tape.
#[derive(Clone, Copy, Debug)]
pub struct EncoderVars {
    pub mu: Var,
    pub log_sigma: Var,
}

/// `H = ReLU(Ã X W₁)`, `μ = Ã H W_μ`, `log σ = clamp(Ã H W_σ, −6, 6)`.
pub fn encode_on_tape(
    tape: &mut Tape,
    a_norm: Var,
    features: Var,
    w_hidden: Var,
    w_mu: Var,
    w_sigma: Var,
) -> Result<EncoderVars, NumError> {
    let xw = tape.matmul(features, w_hidden)?;
    let pre = tape.matmul(a_norm, xw)?;
    let h = tape.relu(pre);
    let ah = tape.matmul(a_norm, h)?;
    let mu = tape.matmul(ah, w_mu)?;
    let raw_sigma = tape.matmul(ah, w_sigma)?;
    let log_sigma = tape.clamp(raw_sigma, LOG_SIGMA_MIN, LOG_SIGMA_MAX);
    Ok(EncoderVars { mu, log_sigma })
}

pub fn encode(
    inputs: &PreparedInputs,
    params: &EncoderParams,
) -> Result<(Matrix, Matrix), NumError> {
    let mut t = Tape::new();
    let a = t.constant(inputs.normalized.clone());
    let x = t.constant(inputs.features.clone());
    let w1 = t.constant(params.w_hidden.clone());
    let wm = t.constant(params.w_mu.clone());
    let ws = t.constant(params.w_sigma.clone());
    let enc = encode_on_tape(&mut t, a, x, w1, wm, ws)?;
    Ok((t.value(enc.mu).clone(), t.value(enc.log_sigma).clone()))
}

/// Standard normal noise of the given shape, drawn row-major.
pub fn sample_noise(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// `Z = ReLU(μ + exp(log σ) ⊙ ε)` on the tape.
pub fn reparameterize_on_tape(
    tape: &mut Tape,
    enc: EncoderVars,
    noise: &Matrix,
) -> Result<Var, NumError> {
    let sigma = tape.exp(enc.log_sigma);
    let spread = tape.mul_const(sigma, noise.clone())?;
    let shifted = tape.add(enc.mu, spread)?;
    Ok(tape.relu(shifted))
}

pub fn reparameterize(mu: &Matrix, log_sigma: &Matrix, rng: &mut Rng) -> Result<Matrix, NumError> {
    mu.check_same(log_sigma, "reparameterize")?;
    let noise = sample_noise(mu.rows(), mu.cols(), rng);
    rectified_sample(mu, log_sigma, &noise)
}

pub fn rectified_sample(
    mu: &Matrix,
    log_sigma: &Matrix,
    noise: &Matrix,
) -> Result<Matrix, NumError> {
    mu.check_same(log_sigma, "rectified_sample")?;
    mu.check_same(noise, "rectified_sample")?;
    let mut z = mu.clone();
    for ((zv, &ls), &e) in z
        .data_mut()
        .iter_mut()
        .zip(log_sigma.data())
        .zip(noise.data())
    {
        *zv = (*zv + ls.exp() * e).max(0.0);
    }
    Ok(z)
}

/// Edge probabilities `sigmoid(Z Zᵀ)`.
pub fn decode(z: &Matrix) -> Matrix {
    let n = z.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = z.row(i).iter().zip(z.row(j)).map(|(a, b)| a * b).sum();
            let p = sigmoid(dot);
            out.set(i, j, p);
            out.set(j, i, p);
        }
    }
    out
}

/// Targets and per-entry weights for the reconstruction term.
#[derive(Clone, Debug)]
pub struct ReconTargets {
    pub targets: Matrix,
    pub weights: Matrix,
    pub pos_weight: f64,
}

impl ReconTargets {
    /// Ones get weight `(N² − n₁)/n₁`, zeros weight 1.
    pub fn new(adjacency: &Matrix) -> Result<Self, InfoVgaeError> {
        let n2 = adjacency.len() as f64;
        let ones = adjacency.data().iter().filter(|&&v| v != 0.0).count();
        if ones == 0 {
            return Err(InfoVgaeError::DegenerateGraph);
        }
        if adjacency.rows() != adjacency.cols()
            || adjacency.sub(&adjacency.transpose())?.max_abs() != 0.0
        {
            return Err(InfoVgaeError::AsymmetricAdjacency);
        }
        let pos_weight = (n2 - ones as f64) / ones as f64;
        let targets = adjacency.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
        let weights = adjacency.map(|v| if v != 0.0 { pos_weight } else { 1.0 });
        Ok(Self {
            targets,
            weights,
            pos_weight,
        })
    }
}

/// Mean weighted BCE between logits `Z Zᵀ` and the adjacency.
pub fn recon_on_tape(tape: &mut Tape, z: Var, recon: &ReconTargets) -> Result<Var, NumError> {
    let total = tape.gram_bce(z, recon.targets.clone(), recon.weights.clone())?;
    Ok(tape.scale(total, 1.0 / recon.targets.len() as f64))
}

pub fn recon_loss(z: &Matrix, adjacency: &Matrix) -> Result<f64, InfoVgaeError> {
    let recon = ReconTargets::new(adjacency)?;
    let mut t = Tape::new();
    let zv = t.constant(z.clone());
    let l = recon_on_tape(&mut t, zv, &recon)?;
    Ok(t.scalar(l))
}

/// `Σ ½(μ² + σ² − 1 − 2 log σ)` on the Gaussian parameters.
pub fn kl_on_tape(tape: &mut Tape, enc: EncoderVars) -> Result<Var, NumError> {
    let mu2 = tape.square(enc.mu);
    let two_ls = tape.scale(enc.log_sigma, 2.0);
    let sigma2 = tape.exp(two_ls);
    let a = tape.add(mu2, sigma2)?;
    let b = tape.sub(a, two_ls)?;
    let c = tape.add_scalar(b, -1.0);
    let s = tape.sum(c);
    Ok(tape.scale(s, 0.5))
}

pub fn kl_term(mu: &Matrix, log_sigma: &Matrix) -> Result<f64, NumError> {
    mu.check_same(log_sigma, "kl_term")?;
    let mut t = Tape::new();
    let enc = EncoderVars {
        mu: t.constant(mu.clone()),
        log_sigma: t.constant(log_sigma.clone()),
    };
    let k = kl_on_tape(&mut t, enc)?;
    Ok(t.scalar(k))
}

/// Mean discriminator logit over the rows of `Z`, i.e. the stable form of
/// `log Φ − log(1 − Φ)`. The discriminator weights are held fixed.
pub fn tc_on_tape(tape: &mut Tape, z: Var, disc: &Discriminator) -> Result<Var, NumError> {
    let logits = disc.logits_fixed(tape, z)?;
    Ok(tape.mean(logits))
}

pub fn tc_loss(z: &Matrix, disc: &Discriminator) -> Result<f64, NumError> {
    let mut t = Tape::new();
    let zv = t.constant(z.clone());
    let l = tc_on_tape(&mut t, zv, disc)?;
    Ok(t.scalar(l))
}

/// Semi-supervised label pinning a node to one latent axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnchorLabel {
    pub node: usize,
    pub axis: usize,
}

/// Mask with ones on every off-axis coordinate of every anchored row.
pub fn anchor_mask(
    anchors: &[AnchorLabel],
    rows: usize,
    latent: usize,
) -> Result<Matrix, InfoVgaeError> {
    let mut mask = Matrix::zeros(rows, latent);
    for a in anchors {
        if a.node >= rows || a.axis >= latent {
            return Err(InfoVgaeError::InvalidAnchor {
                node: a.node,
                axis: a.axis,
            });
        }
        for t in 0..latent {
            if t != a.axis {
                mask.set(a.node, t, 1.0);
            }
        }
    }
    Ok(mask)
}

pub fn anchor_on_tape(tape: &mut Tape, z: Var, mask: &Matrix) -> Result<Var, NumError> {
    let z2 = tape.square(z);
    let off = tape.mul_const(z2, mask.clone())?;
    Ok(tape.sum(off))
}

/// `Σ_anchors Σ_{t≠k} Z[i,t]²`.
pub fn anchor_penalty(z: &Matrix, anchors: &[AnchorLabel]) -> Result<f64, InfoVgaeError> {
    let mask = anchor_mask(anchors, z.rows(), z.cols())?;
    let mut t = Tape::new();
    let zv = t.constant(z.clone());
    let p = anchor_on_tape(&mut t, zv, &mask)?;
    Ok(t.scalar(p))
}

/// Fixed inputs of the full objective for one evaluation.
pub struct ObjectiveInputs<'a> {
    pub inputs: &'a PreparedInputs,
    pub recon: &'a ReconTargets,
    pub noise: &'a Matrix,
    pub disc: &'a Discriminator,
    pub anchor_mask: &'a Matrix,
    pub beta: f64,
    pub tc_weight: f64,
    pub anchor_weight: f64,
}

/// Every intermediate of interest from one objective evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ObjectiveVars {
    pub mu: Var,
    pub log_sigma: Var,
    pub z: Var,
    pub recon: Var,
    pub kl: Var,
    pub tc: Var,
    pub anchor: Var,
    pub total: Var,
}

/// `recon + β·KL + λ·tc + γ·anchor`, with `params` as
/// `[w_hidden, w_mu, w_sigma]` vars.
pub fn objective_on_tape(
    tape: &mut Tape,
    params: &[Var],
    fixed: &ObjectiveInputs<'_>,
) -> Result<ObjectiveVars, NumError> {
    let a = tape.constant(fixed.inputs.normalized.clone());
    let x = tape.constant(fixed.inputs.features.clone());
    let enc = encode_on_tape(tape, a, x, params[0], params[1], params[2])?;
    let z = reparameterize_on_tape(tape, enc, fixed.noise)?;
    let recon = recon_on_tape(tape, z, fixed.recon)?;
    let kl = kl_on_tape(tape, enc)?;
    let tc = tc_on_tape(tape, z, fixed.disc)?;
    let anchor = anchor_on_tape(tape, z, fixed.anchor_mask)?;
    let kl_w = tape.scale(kl, fixed.beta);
    let tc_w = tape.scale(tc, fixed.tc_weight);
    let an_w = tape.scale(anchor, fixed.anchor_weight);
    let s1 = tape.add(recon, kl_w)?;
    let s2 = tape.add(s1, tc_w)?;
    let total = tape.add(s2, an_w)?;
    Ok(ObjectiveVars {
        mu: enc.mu,
        log_sigma: enc.log_sigma,
        z,
        recon,
        kl,
        tc,
        anchor,
        total,
    })
}

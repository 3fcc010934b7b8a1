use crate::numkit::{Adam, Matrix, NumError, Rng, Tape, Var};

use super::model::glorot;

/// Two-layer perceptron scoring whether latent rows come from the joint
/// distribution (logit > 0) or from the product of marginals.
#[derive(Clone, Debug)]
pub struct Discriminator {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
    opt: Adam,
}

impl Discriminator {
    pub fn new(latent: usize, hidden: usize, lr: f64, rng: &mut Rng) -> Self {
        let w1 = glorot(latent, hidden, rng);
        let b1 = Matrix::zeros(1, hidden);
        let w2 = glorot(hidden, 1, rng);
        let b2 = Matrix::zeros(1, 1);
        let opt = Adam::for_params(lr, &[w1.clone(), b1.clone(), w2.clone(), b2.clone()]);
        Self {
            w1,
            b1,
            w2,
            b2,
            opt,
        }
    }

    /// A discriminator whose output is the constant `logit` for any input.
    pub fn constant(latent: usize, hidden: usize, logit: f64) -> Self {
        let w1 = Matrix::zeros(latent, hidden);
        let b1 = Matrix::zeros(1, hidden);
        let w2 = Matrix::zeros(hidden, 1);
        let b2 = Matrix::scalar(logit);
        let opt = Adam::for_params(1e-3, &[w1.clone(), b1.clone(), w2.clone(), b2.clone()]);
        Self {
            w1,
            b1,
            w2,
            b2,
            opt,
        }
    }

    fn params(&self) -> [Matrix; 4] {
        [
            self.w1.clone(),
            self.b1.clone(),
            self.w2.clone(),
            self.b2.clone(),
        ]
    }

    fn forward(tape: &mut Tape, z: Var, p: [Var; 4]) -> Result<Var, NumError> {
        let h = tape.matmul(z, p[0])?;
        let h = tape.add_row(h, p[1])?;
        let h = tape.relu(h);
        let o = tape.matmul(h, p[2])?;
        tape.add_row(o, p[3])
    }

    /// Per-row logits with the weights recorded as constants.
    pub fn logits_fixed(&self, tape: &mut Tape, z: Var) -> Result<Var, NumError> {
        let p = self.params().map(|m| tape.constant(m));
        Self::forward(tape, z, p)
    }

    pub fn logits(&self, z: &Matrix) -> Result<Matrix, NumError> {
        let mut t = Tape::new();
        let zv = t.constant(z.clone());
        let out = self.logits_fixed(&mut t, zv)?;
        Ok(t.value(out).clone())
    }

    /// One Adam step of binary cross-entropy: label 1 on `z`, label 0 on a
    /// copy whose columns are shuffled independently. Returns the loss
    /// before the step.
    pub fn step(&mut self, z: &Matrix, rng: &mut Rng) -> Result<f64, NumError> {
        let permuted = permute_dims(z, rng);
        let n = z.rows();
        let mut t = Tape::new();
        let p = self.params().map(|m| t.param(m));
        let zt = t.constant(z.clone());
        let zp = t.constant(permuted);
        let lt = Self::forward(&mut t, zt, p)?;
        let lp = Self::forward(&mut t, zp, p)?;
        let ones = Matrix::filled(n, 1, 1.0);
        let zeros = Matrix::zeros(n, 1);
        let bt = t.bce_with_logits(lt, ones.clone(), ones.clone())?;
        let bp = t.bce_with_logits(lp, zeros, ones)?;
        let sum = t.add(bt, bp)?;
        let loss = t.scale(sum, 1.0 / (2 * n.max(1)) as f64);
        let grads = t.backward(loss)?;
        let gs: Vec<Matrix> = p
            .iter()
            .map(|&v| grads.get_or_zeros(v, t.value(v).shape()))
            .collect();
        let mut params = self.params().to_vec();
        self.opt.step(&mut params, &gs)?;
        let [w1, b1, w2, b2]: [Matrix; 4] = params.try_into().expect("four params");
        self.w1 = w1;
        self.b1 = b1;
        self.w2 = w2;
        self.b2 = b2;
        Ok(t.scalar(loss))
    }
}

/// Shuffles each column of `z` independently across rows.
pub fn permute_dims(z: &Matrix, rng: &mut Rng) -> Matrix {
    let mut out = z.clone();
    let n = z.rows();
    let mut order: Vec<usize> = (0..n).collect();
    for c in 0..z.cols() {
        for (i, v) in order.iter_mut().enumerate() {
            *v = i;
        }
        rng.shuffle(&mut order);
        for (r, &src) in order.iter().enumerate() {
            out.set(r, c, z.get(src, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infovgae::model::tc_loss;

    #[test]
    fn constant_discriminator_tc() {
        let z = Matrix::from_fn(10, 2, |r, c| (r * (c + 1)) as f64 * 0.1);
        assert_eq!(
            tc_loss(&z, &Discriminator::constant(2, 8, 0.0)).unwrap(),
            0.0
        );
        assert!((tc_loss(&z, &Discriminator::constant(2, 8, 3.0)).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn permutation_preserves_columns() {
        let mut rng = Rng::new(4);
        let z = Matrix::from_fn(30, 3, |r, c| ((r * 7 + c * 13) % 17) as f64);
        let p = permute_dims(&z, &mut rng);
        for c in 0..3 {
            let mut a = z.column(c);
            let mut b = p.column(c);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
        assert_ne!(p, z);
    }

    #[test]
    fn learns_to_spot_dependence() {
        // perfectly correlated columns vs their shuffled product
        let mut rng = Rng::new(8);
        let z = Matrix::from_fn(200, 2, |r, _| (r % 20) as f64 * 0.1);
        let mut d = Discriminator::new(2, 16, 0.01, &mut rng);
        let first = d.step(&z, &mut rng).unwrap();
        let mut last = first;
        for _ in 0..400 {
            last = d.step(&z, &mut rng).unwrap();
        }
        assert!(last < first, "{last} !< {first}");
    }
}

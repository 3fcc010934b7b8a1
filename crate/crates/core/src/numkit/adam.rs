use super::matrix::Matrix;
use super::NumError;

/// Adam optimizer state for a fixed list of parameter matrices.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl Adam {
    pub fn new(lr: f64, shapes: &[(usize, usize)]) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
            second: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
        }
    }

    pub fn for_params(lr: f64, params: &[Matrix]) -> Self {
        let shapes: Vec<_> = params.iter().map(Matrix::shape).collect();
        Self::new(lr, &shapes)
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [Matrix], grads: &[Matrix]) -> Result<(), NumError> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(NumError::Shape {
                op: "adam_step",
                left: (params.len(), 0),
                right: (grads.len(), self.first.len()),
            });
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            p.check_same(g, "adam_step")?;
            p.check_same(m, "adam_step")?;
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mv = self.beta1 * *mv + (1.0 - self.beta1) * gv;
                *vv = self.beta2 * *vv + (1.0 - self.beta2) * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = vec![Matrix::from_rows(&[vec![1.5, -2.0]])];
        let before = p.clone();
        let mut opt = Adam::for_params(0.1, &p);
        opt.step(&mut p, &[Matrix::zeros(1, 2)]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr() {
        for g in [3.0, -0.02] {
            let mut p = vec![Matrix::scalar(1.0)];
            let mut opt = Adam::for_params(0.1, &p);
            opt.step(&mut p, &[Matrix::scalar(g)]).unwrap();
            let moved = p[0].data()[0] - 1.0;
            assert!((moved + 0.1 * f64::signum(g)).abs() < 1e-6, "{moved}");
        }
    }

    #[test]
    fn descends_on_quadratic() {
        let mut p = vec![Matrix::scalar(1.0)];
        let mut opt = Adam::for_params(0.1, &p);
        let mut last = 1.0;
        for _ in 0..10 {
            let x = p[0].data()[0];
            opt.step(&mut p, &[Matrix::scalar(2.0 * x)]).unwrap();
            let f = p[0].data()[0].powi(2);
            assert!(f < last, "{f} >= {last}");
            last = f;
        }
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut p = vec![Matrix::zeros(2, 2)];
        let mut opt = Adam::for_params(0.1, &p);
        assert!(opt.step(&mut p, &[Matrix::zeros(1, 2)]).is_err());
        assert_eq!(opt.steps(), 0);
    }
}

//! Matrix-valued reverse-mode automatic differentiation.
//!
//! A [`Tape`] records every operation as a node holding its forward value and
//! the indices of its parents. Because nodes are only ever appended, parents
//! always precede children and a single reverse sweep visits each node once.
//!
//! ```
//! use memeaxis::numkit::{Matrix, Tape};
//!
//! let mut tape = Tape::new();
//! let x = tape.param(Matrix::from_rows(&[vec![1.0, 2.0]]));
//! let y = tape.square(x);
//! let loss = tape.sum(y);
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(x).unwrap().data(), &[2.0, 4.0]);
//! ```

use super::matrix::{matmul, matmul_nt, matmul_tn, Matrix};
use super::NumError;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulNt(Var, Var),
    GramBce {
        z: Var,
        targets: Matrix,
        weights: Matrix,
    },
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    MulConst(Var, Matrix),
    AddRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Exp(Var),
    Relu(Var),
    Clamp(Var, f64, f64),
    Square(Var),
    Sum(Var),
    Mean(Var),
    Bce {
        logits: Var,
        targets: Matrix,
        weights: Matrix,
    },
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
    needs_grad: bool,
}

/// Recording of a computation, differentiated with [`Tape::backward`].
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node that needed one.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of `shape` when `v` did not influence the
    /// output.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
}

/// Numerically stable weighted binary cross-entropy on a logit:
/// `weight * (max(x,0) - x*target + ln(1 + e^-|x|))`.
pub fn stable_bce(logit: f64, target: f64, weight: f64) -> f64 {
    weight * (logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Differentiable leaf.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    fn push(&mut self, value: Matrix, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn unary(&mut self, a: Var, value: Matrix, op: Op) -> Var {
        let ng = self.needs(a);
        self.push(value, op, ng)
    }

    fn binary(&mut self, a: Var, b: Var, value: Matrix, op: Op) -> Var {
        let ng = self.needs(a) || self.needs(b);
        self.push(value, op, ng)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        let value = matmul(self.value(a), self.value(b))?;
        Ok(self.binary(a, b, value, Op::MatMul(a, b)))
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        let value = matmul_nt(self.value(a), self.value(b))?;
        Ok(self.binary(a, b, value, Op::MatMulNt(a, b)))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).transpose();
        self.unary(a, value, Op::Transpose(a))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.binary(a, b, value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        let value = self.value(a).sub(self.value(b))?;
        Ok(self.binary(a, b, value, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumError> {
        let value = self.value(a).hadamard(self.value(b))?;
        Ok(self.binary(a, b, value, Op::Mul(a, b)))
    }

    /// Elementwise product with a fixed matrix (masks, noise).
    pub fn mul_const(&mut self, a: Var, c: Matrix) -> Result<Var, NumError> {
        let value = self.value(a).hadamard(&c)?;
        Ok(self.unary(a, value, Op::MulConst(a, c)))
    }

    /// Adds a `1×cols` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NumError> {
        let (av, rv) = (self.value(a), self.value(row));
        if rv.rows() != 1 || rv.cols() != av.cols() {
            return Err(NumError::Shape {
                op: "add_row",
                left: av.shape(),
                right: rv.shape(),
            });
        }
        let mut value = av.clone();
        for r in 0..value.rows() {
            for (x, b) in value.row_mut(r).iter_mut().zip(rv.data()) {
                *x += b;
            }
        }
        Ok(self.binary(a, row, value, Op::AddRow(a, row)))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).scale(c);
        self.unary(a, value, Op::Scale(a, c))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|v| v + c);
        self.unary(a, value, Op::AddScalar(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.unary(a, value, Op::Exp(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| v.max(0.0));
        self.unary(a, value, Op::Relu(a))
    }

    /// Clamp into `[lo, hi]`; the gradient is zero wherever the input lies
    /// outside the interval.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let value = self.value(a).map(|v| v.clamp(lo, hi));
        self.unary(a, value, Op::Clamp(a, lo, hi))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| v * v);
        self.unary(a, value, Op::Square(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).sum());
        self.unary(a, value, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let value = Matrix::scalar(m.sum() / m.len().max(1) as f64);
        self.unary(a, value, Op::Mean(a))
    }

    /// Sum over entries of [`stable_bce`]`(logit, target, weight)`.
    pub fn bce_with_logits(
        &mut self,
        logits: Var,
        targets: Matrix,
        weights: Matrix,
    ) -> Result<Var, NumError> {
        let lv = self.value(logits);
        lv.check_same(&targets, "bce_with_logits")?;
        lv.check_same(&weights, "bce_with_logits")?;
        let mut total = 0.0;
        for ((&x, &t), &w) in lv.data().iter().zip(targets.data()).zip(weights.data()) {
            total += stable_bce(x, t, w);
        }
        Ok(self.unary(
            logits,
            Matrix::scalar(total),
            Op::Bce {
                logits,
                targets,
                weights,
            },
        ))
    }

    /// `Σᵢⱼ stable_bce(zᵢ·zⱼ, tᵢⱼ, wᵢⱼ)` without materializing `Z Zᵀ`.
    ///
    /// `targets` and `weights` must be symmetric `N×N`; each unordered pair
    /// is evaluated once.
    pub fn gram_bce(&mut self, z: Var, targets: Matrix, weights: Matrix) -> Result<Var, NumError> {
        let zv = self.value(z);
        let n = zv.rows();
        if targets.shape() != (n, n) {
            return Err(NumError::Shape {
                op: "gram_bce",
                left: zv.shape(),
                right: targets.shape(),
            });
        }
        targets.check_same(&weights, "gram_bce")?;
        let d = zv.cols();
        let (zd, td, wd) = (zv.data(), targets.data(), weights.data());
        let mut total = 0.0;
        for i in 0..n {
            let zi = &zd[i * d..(i + 1) * d];
            let dot = zi.iter().map(|v| v * v).sum::<f64>();
            total += stable_bce(dot, td[i * n + i], wd[i * n + i]);
            let mut off = 0.0;
            for j in i + 1..n {
                let zj = &zd[j * d..(j + 1) * d];
                let dot: f64 = zi.iter().zip(zj).map(|(a, b)| a * b).sum();
                off += stable_bce(dot, td[i * n + j], wd[i * n + j]);
            }
            total += 2.0 * off;
        }
        Ok(self.unary(
            z,
            Matrix::scalar(total),
            Op::GramBce {
                z,
                targets,
                weights,
            },
        ))
    }

    /// Reverse sweep from a `1×1` output.
    pub fn backward(&self, output: Var) -> Result<Gradients, NumError> {
        let out_shape = self.value(output).shape();
        if out_shape != (1, 1) {
            return Err(NumError::Shape {
                op: "backward",
                left: out_shape,
                right: (1, 1),
            });
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Matrix::scalar(1.0));

        for idx in (0..=output.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Matrix>], v: Var, g: Matrix) -> Result<(), NumError> {
        if !self.needs(v) {
            return Ok(());
        }
        match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => {
                *slot = Some(g);
                Ok(())
            }
        }
    }

    fn propagate(
        &self,
        node: &Node,
        g: &Matrix,
        grads: &mut [Option<Matrix>],
    ) -> Result<(), NumError> {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.needs(*a) {
                    let ga = matmul_nt(g, self.value(*b))?;
                    self.accumulate(grads, *a, ga)?;
                }
                if self.needs(*b) {
                    let gb = matmul_tn(self.value(*a), g)?;
                    self.accumulate(grads, *b, gb)?;
                }
            }
            Op::MatMulNt(a, b) => {
                // out = a bᵀ: da = g b, db = gᵀ a
                if self.needs(*a) {
                    let ga = matmul(g, self.value(*b))?;
                    self.accumulate(grads, *a, ga)?;
                }
                if self.needs(*b) {
                    let gb = matmul_tn(g, self.value(*a))?;
                    self.accumulate(grads, *b, gb)?;
                }
            }
            Op::GramBce {
                z,
                targets,
                weights,
            } => {
                let gs = g.data()[0];
                let zv = self.value(*z);
                let (n, d) = zv.shape();
                let (zd, td, wd) = (zv.data(), targets.data(), weights.data());
                let mut gz = Matrix::zeros(n, d);
                let gd = gz.data_mut();
                for i in 0..n {
                    for j in i..n {
                        let mut dot = 0.0;
                        for k in 0..d {
                            dot += zd[i * d + k] * zd[j * d + k];
                        }
                        let c = 2.0 * gs * wd[i * n + j] * (sigmoid(dot) - td[i * n + j]);
                        if c == 0.0 {
                            continue;
                        }
                        for k in 0..d {
                            gd[i * d + k] += c * zd[j * d + k];
                            if j != i {
                                gd[j * d + k] += c * zd[i * d + k];
                            }
                        }
                    }
                }
                self.accumulate(grads, *z, gz)?;
            }
            Op::Transpose(a) => self.accumulate(grads, *a, g.transpose())?,
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.clone())?;
                self.accumulate(grads, *b, g.clone())?;
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, g.clone())?;
                self.accumulate(grads, *b, g.scale(-1.0))?;
            }
            Op::Mul(a, b) => {
                if self.needs(*a) {
                    let ga = g.hadamard(self.value(*b))?;
                    self.accumulate(grads, *a, ga)?;
                }
                if self.needs(*b) {
                    let gb = g.hadamard(self.value(*a))?;
                    self.accumulate(grads, *b, gb)?;
                }
            }
            Op::MulConst(a, c) => self.accumulate(grads, *a, g.hadamard(c)?)?,
            Op::AddRow(a, row) => {
                self.accumulate(grads, *a, g.clone())?;
                if self.needs(*row) {
                    let mut gr = Matrix::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (acc, v) in gr.data_mut().iter_mut().zip(g.row(r)) {
                            *acc += v;
                        }
                    }
                    self.accumulate(grads, *row, gr)?;
                }
            }
            Op::Scale(a, c) => self.accumulate(grads, *a, g.scale(*c))?,
            Op::AddScalar(a) => self.accumulate(grads, *a, g.clone())?,
            Op::Exp(a) => self.accumulate(grads, *a, g.hadamard(&node.value)?)?,
            Op::Relu(a) => {
                let ga = g.zip_map(
                    self.value(*a),
                    "relu_grad",
                    |gv, x| if x > 0.0 { gv } else { 0.0 },
                )?;
                self.accumulate(grads, *a, ga)?;
            }
            Op::Clamp(a, lo, hi) => {
                let (lo, hi) = (*lo, *hi);
                let ga = g.zip_map(self.value(*a), "clamp_grad", |gv, x| {
                    if x >= lo && x <= hi {
                        gv
                    } else {
                        0.0
                    }
                })?;
                self.accumulate(grads, *a, ga)?;
            }
            Op::Square(a) => {
                let ga = g.zip_map(self.value(*a), "square_grad", |gv, x| 2.0 * x * gv)?;
                self.accumulate(grads, *a, ga)?;
            }
            Op::Sum(a) => {
                let (r, c) = self.value(*a).shape();
                self.accumulate(grads, *a, Matrix::filled(r, c, g.data()[0]))?;
            }
            Op::Mean(a) => {
                let (r, c) = self.value(*a).shape();
                let n = (r * c).max(1) as f64;
                self.accumulate(grads, *a, Matrix::filled(r, c, g.data()[0] / n))?;
            }
            Op::Bce {
                logits,
                targets,
                weights,
            } => {
                let gs = g.data()[0];
                let lv = self.value(*logits);
                let mut ga = Matrix::zeros(lv.rows(), lv.cols());
                for (((o, &x), &t), &w) in ga
                    .data_mut()
                    .iter_mut()
                    .zip(lv.data())
                    .zip(targets.data())
                    .zip(weights.data())
                {
                    *o = gs * w * (sigmoid(x) - t);
                }
                self.accumulate(grads, *logits, ga)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::gradcheck::grad_check;
    use crate::numkit::rng::Rng;

    fn random(rng: &mut Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.uniform_range(-2.0, 2.0))
    }

    #[test]
    fn stable_bce_values() {
        assert!((stable_bce(0.0, 1.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        let sat = stable_bce(50.0, 1.0, 1.0);
        assert!(sat < 1e-20, "{sat}");
        let (x, w) = (-2.5_f64, 3.0);
        let s = 1.0 / (1.0 + (-x).exp());
        let naive = -w * (1.0 - s).ln();
        let stable = stable_bce(x, 0.0, w);
        assert!(((stable - naive) / naive).abs() < 1e-12);
    }

    #[test]
    fn stable_bce_is_finite_on_large_logits() {
        let mut x = -1e3;
        while x <= 1e3 {
            for t in [0.0, 1.0] {
                assert!(stable_bce(x, t, 2.0).is_finite(), "x={x}");
            }
            x += 0.5;
        }
    }

    fn symmetric_targets(n: usize, rng: &mut Rng) -> (Matrix, Matrix) {
        let mut t = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = if rng.bernoulli(0.4) { 1.0 } else { 0.0 };
                t.set(i, j, v);
                t.set(j, i, v);
            }
        }
        let w = t.map(|v| if v == 1.0 { 3.5 } else { 1.0 });
        (t, w)
    }

    #[test]
    fn gram_bce_equals_dense_form() {
        let mut rng = Rng::new(21);
        let z = random(&mut rng, 7, 3);
        let (t, w) = symmetric_targets(7, &mut rng);
        let mut tape = Tape::new();
        let zv = tape.param(z.clone());
        let fused = tape.gram_bce(zv, t.clone(), w.clone()).unwrap();
        let logits = tape.matmul_nt(zv, zv).unwrap();
        let dense = tape.bce_with_logits(logits, t, w).unwrap();
        let (a, b) = (tape.scalar(fused), tape.scalar(dense));
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        let ga = tape.backward(fused).unwrap().get(zv).unwrap().clone();
        let gb = tape.backward(dense).unwrap().get(zv).unwrap().clone();
        assert!(ga.sub(&gb).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn gram_bce_matches_fd_and_checks_shape() {
        let mut rng = Rng::new(22);
        let z = random(&mut rng, 5, 2);
        let (t, w) = symmetric_targets(5, &mut rng);
        let report = grad_check(
            |tp, p| {
                let l = tp.gram_bce(p[0], t.clone(), w.clone())?;
                Ok(tp.scale(l, 0.1))
            },
            &[z],
            1e-6,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
        let mut tape = Tape::new();
        let zv = tape.param(Matrix::zeros(4, 2));
        assert!(tape
            .gram_bce(zv, Matrix::zeros(5, 5), Matrix::zeros(5, 5))
            .is_err());
    }

    #[test]
    fn matmul_gradient_matches_fd() {
        let mut rng = Rng::new(11);
        let a = random(&mut rng, 4, 3);
        let b = random(&mut rng, 3, 2);
        let report = grad_check(
            |t, p| {
                let m = t.matmul(p[0], p[1])?;
                Ok(t.sum(m))
            },
            &[a, b],
            1e-5,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }

    #[test]
    fn primitives_match_fd() {
        let mut rng = Rng::new(5);
        let a = random(&mut rng, 3, 4);
        let b = random(&mut rng, 3, 4);
        let row = random(&mut rng, 1, 4);
        let mask = random(&mut rng, 3, 4);
        let targets = Matrix::from_fn(3, 3, |r, c| ((r + c) % 2) as f64);
        let weights = Matrix::from_fn(3, 3, |r, _| 1.0 + r as f64);

        type Build = Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var, NumError>>;
        let cases: Vec<(&str, Build)> = vec![
            (
                "add",
                Box::new(|t, p| {
                    let v = t.add(p[0], p[1])?;
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "sub",
                Box::new(|t, p| {
                    let v = t.sub(p[0], p[1])?;
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "mul",
                Box::new(|t, p| {
                    let v = t.mul(p[0], p[1])?;
                    Ok(t.sum(v))
                }),
            ),
            ("mul_const", {
                let mask = mask.clone();
                Box::new(move |t, p| {
                    let v = t.mul_const(p[0], mask.clone())?;
                    let s = t.square(v);
                    Ok(t.sum(s))
                })
            }),
            (
                "add_row",
                Box::new(|t, p| {
                    let v = t.add_row(p[0], p[2])?;
                    let s = t.square(v);
                    Ok(t.mean(s))
                }),
            ),
            (
                "scale",
                Box::new(|t, p| {
                    let v = t.scale(p[0], -1.7);
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "add_scalar",
                Box::new(|t, p| {
                    let v = t.add_scalar(p[0], 0.3);
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "exp",
                Box::new(|t, p| {
                    let v = t.exp(p[0]);
                    Ok(t.sum(v))
                }),
            ),
            (
                "relu",
                Box::new(|t, p| {
                    let v = t.relu(p[0]);
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "clamp",
                Box::new(|t, p| {
                    let v = t.clamp(p[0], -1.0, 1.0);
                    let s = t.square(v);
                    Ok(t.sum(s))
                }),
            ),
            (
                "transpose",
                Box::new(|t, p| {
                    let v = t.transpose(p[0]);
                    let m = t.matmul(v, p[1])?;
                    Ok(t.sum(m))
                }),
            ),
            (
                "matmul_nt",
                Box::new(|t, p| {
                    let m = t.matmul_nt(p[0], p[1])?;
                    let s = t.square(m);
                    Ok(t.sum(s))
                }),
            ),
            ("bce", {
                let (targets, weights) = (targets.clone(), weights.clone());
                Box::new(move |t, p| {
                    let m = t.matmul_nt(p[0], p[1])?;
                    t.bce_with_logits(m, targets.clone(), weights.clone())
                })
            }),
        ];
        for (name, build) in cases {
            let report = grad_check(&build, &[a.clone(), b.clone(), row.clone()], 1e-5).unwrap();
            assert!(report.max_rel_error < 1e-6, "{name}: {report:?}");
        }
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut t = Tape::new();
        let c = t.constant(Matrix::identity(2));
        let p = t.param(Matrix::filled(2, 2, 1.0));
        let m = t.matmul(c, p).unwrap();
        let s = t.sum(m);
        let g = t.backward(s).unwrap();
        assert!(g.get(c).is_none());
        assert_eq!(g.get(p).unwrap(), &Matrix::filled(2, 2, 1.0));
    }

    #[test]
    fn backward_requires_scalar() {
        let mut t = Tape::new();
        let p = t.param(Matrix::zeros(2, 2));
        assert!(t.backward(p).is_err());
    }

    #[test]
    fn shared_node_accumulates() {
        // f = sum(x * x) through mul with the same var twice
        let mut t = Tape::new();
        let x = t.param(Matrix::from_rows(&[vec![3.0, -1.0]]));
        let m = t.mul(x, x).unwrap();
        let s = t.sum(m);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[6.0, -2.0]);
    }
}

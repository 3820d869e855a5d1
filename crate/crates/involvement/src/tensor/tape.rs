//! Reverse-mode autodiff over a recorded tape of tensor operations.
//!
//! Each op appends a node holding the forward value and a backward closure
//! that maps the upstream gradient to gradients for the node's parents.
//! The tape is single-use: run the forward pass, call [`Tape::backward`],
//! harvest leaf gradients, drop the tape.

use super::array::Tensor;
use super::TensorError;

pub type NodeId = usize;

type BackFn = Box<dyn Fn(&Tensor) -> Vec<Tensor>>;

struct Node {
    value: Tensor,
    parents: Vec<NodeId>,
    backward: Option<BackFn>,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of every tape node after a backward pass, indexed by node id.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id).and_then(|g| g.as_ref())
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

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    fn push(&mut self, value: Tensor, parents: Vec<NodeId>, backward: Option<BackFn>) -> NodeId {
        self.nodes.push(Node {
            value,
            parents,
            backward,
        });
        self.nodes.len() - 1
    }

    /// Insert a leaf value (input or parameter).
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(value, vec![], None)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(
            value,
            vec![a, b],
            Some(Box::new(|g: &Tensor| vec![g.clone(), g.clone()])),
        ))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).sub(self.value(b))?;
        Ok(self.push(
            value,
            vec![a, b],
            Some(Box::new(|g: &Tensor| vec![g.clone(), g.scale(-1.0)])),
        ))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).mul(self.value(b))?;
        let av = self.value(a).clone();
        let bv = self.value(b).clone();
        Ok(self.push(
            value,
            vec![a, b],
            Some(Box::new(move |g: &Tensor| {
                vec![g.mul(&bv).unwrap(), g.mul(&av).unwrap()]
            })),
        ))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).div(self.value(b))?;
        let av = self.value(a).clone();
        let bv = self.value(b).clone();
        Ok(self.push(
            value,
            vec![a, b],
            Some(Box::new(move |g: &Tensor| {
                let da = g.div(&bv).unwrap();
                let db = g
                    .mul(&av)
                    .unwrap()
                    .div(&bv.mul(&bv).unwrap())
                    .unwrap()
                    .scale(-1.0);
                vec![da, db]
            })),
        ))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.value(a).scale(c);
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| vec![g.scale(c)])),
        )
    }

    pub fn add_const(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.value(a).add_scalar(c);
        self.push(value, vec![a], Some(Box::new(|g: &Tensor| vec![g.clone()])))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).matmul(self.value(b))?;
        let av = self.value(a).clone();
        let bv = self.value(b).clone();
        Ok(self.push(
            value,
            vec![a, b],
            Some(Box::new(move |g: &Tensor| {
                let da = g.matmul(&bv.transpose()).unwrap();
                let db = av.transpose().matmul(g).unwrap();
                vec![da, db]
            })),
        ))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).transpose();
        self.push(
            value,
            vec![a],
            Some(Box::new(|g: &Tensor| vec![g.transpose()])),
        )
    }

    /// Add a `1xn` bias row to every row of an `mxn` matrix.
    pub fn add_bias(&mut self, x: NodeId, bias: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(x).add_bias(self.value(bias))?;
        Ok(self.push(
            value,
            vec![x, bias],
            Some(Box::new(|g: &Tensor| vec![g.clone(), g.col_sums()])),
        ))
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let input = self.value(a).clone();
        let value = input.relu();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                let mask = input.map(|x| if x > 0.0 { 1.0 } else { 0.0 });
                vec![g.mul(&mask).unwrap()]
            })),
        )
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).sigmoid();
        let out = value.clone();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                let dy = out.map(|y| y * (1.0 - y));
                vec![g.mul(&dy).unwrap()]
            })),
        )
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(f64::sqrt);
        let out = value.clone();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                vec![g.mul(&out.map(|y| 0.5 / y)).unwrap()]
            })),
        )
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).softmax_rows();
        let y = value.clone();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                // dx_ij = y_ij * (g_ij - sum_k g_ik y_ik)
                let mut dx = Tensor::zeros(y.rows, y.cols);
                for r in 0..y.rows {
                    let dot: f64 = (0..y.cols).map(|c| g.get(r, c) * y.get(r, c)).sum();
                    for c in 0..y.cols {
                        dx.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                    }
                }
                vec![dx]
            })),
        )
    }

    /// Per-row layer normalization with affine gain/bias (`1xn` each).
    pub fn layer_norm(
        &mut self,
        x: NodeId,
        gain: NodeId,
        bias: NodeId,
        eps: f64,
    ) -> Result<NodeId, TensorError> {
        let xv = self.value(x).clone();
        let gv = self.value(gain).clone();
        let bv = self.value(bias).clone();
        if gv.shape() != (1, xv.cols) || bv.shape() != (1, xv.cols) {
            return Err(TensorError::ShapeMismatch {
                op: "layer_norm",
                lhs: xv.shape(),
                rhs: gv.shape(),
            });
        }
        let n = xv.cols;
        let mut xhat = Tensor::zeros(xv.rows, n);
        let mut inv_sigma = vec![0.0; xv.rows];
        let mut value = Tensor::zeros(xv.rows, n);
        for r in 0..xv.rows {
            let row = xv.row(r);
            let mu: f64 = row.iter().sum::<f64>() / n as f64;
            let var: f64 = row.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
            let is = 1.0 / (var + eps).sqrt();
            inv_sigma[r] = is;
            for c in 0..n {
                let xh = (row[c] - mu) * is;
                xhat.set(r, c, xh);
                value.set(r, c, gv.data[c] * xh + bv.data[c]);
            }
        }
        Ok(self.push(
            value,
            vec![x, gain, bias],
            Some(Box::new(move |g: &Tensor| {
                let mut dx = Tensor::zeros(g.rows, n);
                let mut dgain = Tensor::zeros(1, n);
                let mut dbias = Tensor::zeros(1, n);
                for r in 0..g.rows {
                    // dxhat_c = g_c * gain_c
                    let dxhat: Vec<f64> = (0..n).map(|c| g.get(r, c) * gv.data[c]).collect();
                    let mean_dxhat: f64 = dxhat.iter().sum::<f64>() / n as f64;
                    let mean_dxhat_xhat: f64 =
                        (0..n).map(|c| dxhat[c] * xhat.get(r, c)).sum::<f64>() / n as f64;
                    for c in 0..n {
                        let v = inv_sigma[r]
                            * (dxhat[c] - mean_dxhat - xhat.get(r, c) * mean_dxhat_xhat);
                        dx.set(r, c, v);
                        dgain.data[c] += g.get(r, c) * xhat.get(r, c);
                        dbias.data[c] += g.get(r, c);
                    }
                }
                vec![dx, dgain, dbias]
            })),
        ))
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId, TensorError> {
        let values: Vec<&Tensor> = parts.iter().map(|&id| self.value(id)).collect();
        let value = Tensor::concat_cols(&values)?;
        let widths: Vec<usize> = values.iter().map(|v| v.cols).collect();
        Ok(self.push(
            value,
            parts.to_vec(),
            Some(Box::new(move |g: &Tensor| {
                let mut out = Vec::with_capacity(widths.len());
                let mut offset = 0;
                for &w in &widths {
                    let mut part = Tensor::zeros(g.rows, w);
                    for r in 0..g.rows {
                        for c in 0..w {
                            part.set(r, c, g.get(r, offset + c));
                        }
                    }
                    out.push(part);
                    offset += w;
                }
                out
            })),
        ))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a).clone();
        let value = Tensor::scalar(av.sum_all());
        let (rows, cols) = av.shape();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                vec![Tensor::ones(rows, cols).scale(g.data[0])]
            })),
        )
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a).clone();
        let value = Tensor::scalar(av.mean_all());
        let (rows, cols) = av.shape();
        let inv = 1.0 / (rows * cols) as f64;
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                vec![Tensor::ones(rows, cols).scale(g.data[0] * inv)]
            })),
        )
    }

    /// Mean over rows: `mxn -> 1xn`.
    pub fn mean_rows(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a).clone();
        let value = av.mean_rows();
        let (rows, cols) = av.shape();
        self.push(
            value,
            vec![a],
            Some(Box::new(move |g: &Tensor| {
                let mut dx = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        dx.set(r, c, g.data[c] / rows as f64);
                    }
                }
                vec![dx]
            })),
        )
    }

    /// Divide every entry of `x` by the `1x1` scalar node `s`.
    pub fn div_bcast(&mut self, x: NodeId, s: NodeId) -> Result<NodeId, TensorError> {
        let sv = self.value(s).clone();
        if sv.shape() != (1, 1) {
            return Err(TensorError::NotScalar(sv.shape()));
        }
        let xv = self.value(x).clone();
        let value = xv.scale(1.0 / sv.data[0]);
        Ok(self.push(
            value,
            vec![x, s],
            Some(Box::new(move |g: &Tensor| {
                let s0 = sv.data[0];
                let dx = g.scale(1.0 / s0);
                let ds = -g.mul(&xv).unwrap().sum_all() / (s0 * s0);
                vec![dx, Tensor::scalar(ds)]
            })),
        ))
    }

    /// Backpropagate from a scalar loss node, returning per-node gradients.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients, TensorError> {
        let loss_value = self.value(loss);
        if loss_value.shape() != (1, 1) {
            return Err(TensorError::NotScalar(loss_value.shape()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss] = Some(Tensor::scalar(1.0));
        for id in (0..=loss).rev() {
            let Some(grad) = grads[id].clone() else {
                continue;
            };
            let node = &self.nodes[id];
            let Some(backward) = &node.backward else {
                continue;
            };
            let parent_grads = backward(&grad);
            debug_assert_eq!(parent_grads.len(), node.parents.len());
            for (&pid, pgrad) in node.parents.iter().zip(parent_grads) {
                match &mut grads[pid] {
                    Some(existing) => *existing = existing.add(&pgrad)?,
                    slot @ None => *slot = Some(pgrad),
                }
            }
        }
        Ok(Gradients { grads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_of_sum_is_ones() {
        let mut tape = Tape::new();
        let w = tape.input(Tensor::from_vec(2, 3, vec![1.0, -2.0, 0.5, 3.0, 4.0, -1.0]));
        let loss = tape.sum_all(w);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap(), &Tensor::ones(2, 3));
    }

    #[test]
    fn grad_of_sum_of_squares() {
        let mut tape = Tape::new();
        let w = tape.input(Tensor::row_vector(vec![1.0, 2.0]));
        let sq = tape.mul(w, w).unwrap();
        let loss = tape.sum_all(sq);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().data, vec![2.0, 4.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let w = tape.input(Tensor::row_vector(vec![1.0, 2.0]));
        assert!(matches!(tape.backward(w), Err(TensorError::NotScalar(_))));
    }

    #[test]
    fn layer_norm_forward_values() {
        let mut tape = Tape::new();
        let x = tape.input(Tensor::row_vector(vec![1.0, 3.0]));
        let gain = tape.input(Tensor::row_vector(vec![1.0, 1.0]));
        let bias = tape.input(Tensor::row_vector(vec![0.0, 0.0]));
        let y = tape.layer_norm(x, gain, bias, 1e-5).unwrap();
        let out = tape.value(y);
        assert!((out.data[0] + 1.0).abs() < 1e-4);
        assert!((out.data[1] - 1.0).abs() < 1e-4);
        assert!(out.data.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn layer_norm_constant_row_is_zero() {
        let mut tape = Tape::new();
        let x = tape.input(Tensor::row_vector(vec![4.0, 4.0, 4.0]));
        let gain = tape.input(Tensor::ones(1, 3));
        let bias = tape.input(Tensor::zeros(1, 3));
        let y = tape.layer_norm(x, gain, bias, 1e-5).unwrap();
        for v in &tape.value(y).data {
            assert_eq!(*v, 0.0);
        }
    }

    /// Central finite differences over a scalar function of a flat input.
    fn finite_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            })
            .collect()
    }

    /// Composed graph: loss = mean( softmax(relu(x W + b) W2) * layer_norm path ... )
    /// checked against central finite differences.
    #[test]
    fn composed_graph_matches_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x0: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w0: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let eval = |xs: &[f64], ws: &[f64]| -> f64 {
            let mut tape = Tape::new();
            let x = tape.input(Tensor::from_vec(2, 3, xs.to_vec()));
            let w = tape.input(Tensor::from_vec(3, 3, ws.to_vec()));
            let gain = tape.input(Tensor::ones(1, 3));
            let bias = tape.input(Tensor::zeros(1, 3));
            let h = tape.matmul(x, w).unwrap();
            let h = tape.relu(h);
            let h = tape.layer_norm(h, gain, bias, 1e-5).unwrap();
            let h = tape.softmax_rows(h);
            let h = tape.sigmoid(h);
            let loss = tape.mean_all(h);
            tape.value(loss).data[0]
        };

        // Analytic grads.
        let mut tape = Tape::new();
        let x = tape.input(Tensor::from_vec(2, 3, x0.clone()));
        let w = tape.input(Tensor::from_vec(3, 3, w0.clone()));
        let gain = tape.input(Tensor::ones(1, 3));
        let bias = tape.input(Tensor::zeros(1, 3));
        let h = tape.matmul(x, w).unwrap();
        let h = tape.relu(h);
        let h = tape.layer_norm(h, gain, bias, 1e-5).unwrap();
        let h = tape.softmax_rows(h);
        let h = tape.sigmoid(h);
        let loss = tape.mean_all(h);
        let grads = tape.backward(loss).unwrap();

        let fd_x = finite_diff(|xs| eval(xs, &w0), &x0, 1e-4);
        let fd_w = finite_diff(|ws| eval(&x0, ws), &w0, 1e-4);
        let gx = &grads.get(x).unwrap().data;
        let gw = &grads.get(w).unwrap().data;
        for (a, b) in gx.iter().zip(&fd_x) {
            let denom = a.abs().max(b.abs()).max(1e-6);
            assert!((a - b).abs() / denom <= 1e-4, "x grad {a} vs fd {b}");
        }
        for (a, b) in gw.iter().zip(&fd_w) {
            let denom = a.abs().max(b.abs()).max(1e-6);
            assert!((a - b).abs() / denom <= 1e-4, "w grad {a} vs fd {b}");
        }
    }
}

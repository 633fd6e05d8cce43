//! Batched multilayer perceptron with rectifier hidden layers and
//! hand-written backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use super::Element;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer<F> {
    /// `in_dim` x `out_dim`.
    pub w: Array2<F>,
    pub b: Array1<F>,
}

/// Fully connected network: affine layers with rectifiers between them and
/// an identity output layer. Batches are row-major (`batch` x `dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F: Element> {
    pub(crate) layers: Vec<Layer<F>>,
}

/// Parameter gradients, shaped exactly like the network's layers.
#[derive(Debug, Clone)]
pub struct Grads<F> {
    pub(crate) layers: Vec<(Array2<F>, Array1<F>)>,
}

impl<F: Element> Grads<F> {
    /// Rescales every gradient in place.
    pub fn scale(&mut self, factor: F) {
        for (w, b) in &mut self.layers {
            w.mapv_inplace(|x| x * factor);
            b.mapv_inplace(|x| x * factor);
        }
    }

    /// Accumulates another gradient of identical shape.
    pub fn add_assign(&mut self, other: &Grads<F>) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }
}

/// Activations recorded during a forward pass, reused by the backward pass.
pub struct ForwardCache<F> {
    /// Input to each layer: `inputs[0]` is the batch itself, `inputs[k]` the
    /// rectified output feeding layer `k`.
    inputs: Vec<Array2<F>>,
    output: Array2<F>,
}

impl<F: Element> ForwardCache<F> {
    pub fn output(&self) -> &Array2<F> {
        &self.output
    }
}

impl<F: Element> Mlp<F> {
    /// Builds a network with the given layer widths, at least `[in, out]`.
    /// Weights and biases start uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new<R: Rng>(dims: &[usize], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(LabError::Dimension(format!(
                "layer widths {dims:?} must list at least input and output, all positive"
            )));
        }
        let layers = dims
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let bound = F::from_f64(1.0 / (fan_in as f64).sqrt());
                let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
                    F::uniform(rng, -bound, bound)
                });
                let b = Array1::from_shape_fn(fan_out, |_| F::uniform(rng, -bound, bound));
                Layer { w, b }
            })
            .collect();
        Ok(Self { layers })
    }

    pub(crate) fn from_layers(layers: Vec<Layer<F>>) -> Self {
        Self { layers }
    }

    /// Builds a network from explicit `(weights, bias)` pairs; weights are
    /// `in_dim` x `out_dim`. For hand-crafted diagnostic networks.
    pub fn from_parts(parts: Vec<(Array2<F>, Array1<F>)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(LabError::Dimension("network needs at least one layer".into()));
        }
        for (k, (w, b)) in parts.iter().enumerate() {
            if w.ncols() != b.len() {
                return Err(LabError::Dimension(format!(
                    "layer {k}: weight columns {} vs bias length {}",
                    w.ncols(),
                    b.len()
                )));
            }
            if k > 0 && parts[k - 1].0.ncols() != w.nrows() {
                return Err(LabError::Dimension(format!(
                    "layer {k}: input width {} does not match previous output {}",
                    w.nrows(),
                    parts[k - 1].0.ncols()
                )));
            }
        }
        Ok(Self::from_layers(parts.into_iter().map(|(w, b)| Layer { w, b }).collect()))
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].w.nrows()];
        dims.extend(self.layers.iter().map(|l| l.w.ncols()));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").w.ncols()
    }

    fn check_input(&self, x: &Array2<F>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(LabError::Dimension(format!(
                "input width {} does not match network input {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batch forward pass.
    pub fn forward(&self, x: &Array2<F>) -> Result<Array2<F>> {
        self.check_input(x)?;
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        for layer in &self.layers[1..] {
            a.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
            a = a.dot(&layer.w) + &layer.b;
        }
        Ok(a)
    }

    /// Forward pass over a single row.
    pub fn forward_row(&self, x: &[F]) -> Result<Vec<F>> {
        let arr = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|e| LabError::Dimension(e.to_string()))?;
        Ok(self.forward(&arr)?.row(0).to_vec())
    }

    /// Forward pass that records per-layer inputs for backpropagation.
    pub fn forward_cached(&self, x: &Array2<F>) -> Result<ForwardCache<F>> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        inputs.push(x.clone());
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        for layer in &self.layers[1..] {
            a.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
            inputs.push(a.clone());
            a = a.dot(&layer.w) + &layer.b;
        }
        Ok(ForwardCache { inputs, output: a })
    }

    /// Backpropagates `d_output` (gradient of a scalar loss with respect to
    /// the network output) into parameter gradients.
    pub fn backward(&self, cache: &ForwardCache<F>, d_output: &Array2<F>) -> Grads<F> {
        self.backprop(cache, d_output, false).0
    }

    /// Like [`Mlp::backward`], additionally returning the gradient with
    /// respect to the network input.
    pub fn backward_with_input(
        &self,
        cache: &ForwardCache<F>,
        d_output: &Array2<F>,
    ) -> (Grads<F>, Array2<F>) {
        let (grads, dx) = self.backprop(cache, d_output, true);
        (grads, dx.expect("input gradient requested"))
    }

    /// Gradient with respect to the input only; parameter gradient matrix
    /// products are skipped entirely.
    pub fn input_gradient(&self, cache: &ForwardCache<F>, d_output: &Array2<F>) -> Array2<F> {
        let mut delta = d_output.clone();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let mut dx = delta.dot(&layer.w.t());
            if k > 0 {
                let gate = &cache.inputs[k];
                dx.zip_mut_with(gate, |d, &a| {
                    if a <= F::zero() {
                        *d = F::zero();
                    }
                });
            }
            delta = dx;
        }
        delta
    }

    fn backprop(
        &self,
        cache: &ForwardCache<F>,
        d_output: &Array2<F>,
        want_input_grad: bool,
    ) -> (Grads<F>, Option<Array2<F>>) {
        let mut layers = vec![None; self.layers.len()];
        let mut delta = d_output.clone();
        let mut input_grad = None;
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let dw = cache.inputs[k].t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            layers[k] = Some((dw, db));
            if k > 0 {
                let mut dx = delta.dot(&layer.w.t());
                let gate = &cache.inputs[k];
                dx.zip_mut_with(gate, |d, &a| {
                    if a <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = dx;
            } else if want_input_grad {
                input_grad = Some(delta.dot(&layer.w.t()));
            }
        }
        let layers = layers.into_iter().map(|g| g.expect("filled")).collect();
        (Grads { layers }, input_grad)
    }

    /// Moves every parameter toward `online`: `p <- (1 - tau) p + tau q`.
    pub fn soft_update_from(&mut self, online: &Mlp<F>, tau: F) -> Result<()> {
        if self.dims() != online.dims() {
            return Err(LabError::Dimension(format!(
                "target dims {:?} differ from online dims {:?}",
                self.dims(),
                online.dims()
            )));
        }
        let keep = F::one() - tau;
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            t.w.zip_mut_with(&o.w, |a, &b| *a = keep * *a + tau * b);
            t.b.zip_mut_with(&o.b, |a, &b| *a = keep * *a + tau * b);
        }
        Ok(())
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Reads the parameter at a flat index (weights row-major, then biases,
    /// layer by layer).
    pub fn param_get(&self, mut index: usize) -> f64 {
        for layer in &self.layers {
            if index < layer.w.len() {
                return layer.w[(index / layer.w.ncols(), index % layer.w.ncols())].to_f64();
            }
            index -= layer.w.len();
            if index < layer.b.len() {
                return layer.b[index].to_f64();
            }
            index -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Writes the parameter at a flat index.
    pub fn param_set(&mut self, mut index: usize, value: f64) {
        for layer in &mut self.layers {
            if index < layer.w.len() {
                let cols = layer.w.ncols();
                layer.w[(index / cols, index % cols)] = F::from_f64(value);
                return;
            }
            index -= layer.w.len();
            if index < layer.b.len() {
                layer.b[index] = F::from_f64(value);
                return;
            }
            index -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Gradient value at the same flat indexing as [`Mlp::param_get`].
    pub fn grad_get(grads: &Grads<F>, mut index: usize) -> f64 {
        for (w, b) in &grads.layers {
            if index < w.len() {
                return w[(index / w.ncols(), index % w.ncols())].to_f64();
            }
            index -= w.len();
            if index < b.len() {
                return b[index].to_f64();
            }
            index -= b.len();
        }
        panic!("gradient index out of range");
    }

    /// All parameters as `f64`, in flat-index order.
    pub fn params_f64(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend(layer.w.iter().map(|&v| Element::to_f64(v)));
            out.extend(layer.b.iter().map(|&v| Element::to_f64(v)));
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(50)
    }

    /// Plain nested-loop forward pass.
    fn naive_forward(net: &Mlp<f64>, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for (k, layer) in net.layers.iter().enumerate() {
            if k > 0 {
                for v in &mut a {
                    *v = v.max(0.0);
                }
            }
            let mut next = vec![0.0; layer.w.ncols()];
            for (j, out) in next.iter_mut().enumerate() {
                let mut s = layer.b[j];
                for (i, &xi) in a.iter().enumerate() {
                    s += xi * layer.w[(i, j)];
                }
                *out = s;
            }
            a = next;
        }
        a
    }

    #[test]
    fn zero_network_maps_everything_to_zero() {
        let mut net: Mlp<f64> = Mlp::new(&[4, 8, 2], &mut rng()).unwrap();
        for i in 0..net.param_count() {
            net.param_set(i, 0.0);
        }
        let out = net.forward_row(&[1.0, -2.0, 3.0, 4.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_identity_layer_is_identity() {
        let mut net: Mlp<f64> = Mlp::new(&[3, 3], &mut rng()).unwrap();
        for i in 0..net.param_count() {
            net.param_set(i, 0.0);
        }
        for d in 0..3 {
            net.param_set(d * 3 + d, 1.0);
        }
        let x = [0.3, -0.7, 2.5];
        assert_eq!(net.forward_row(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn forward_matches_naive_reference() {
        let mut r = rng();
        let net: Mlp<f64> = Mlp::new(&[4, 16, 2], &mut r).unwrap();
        use rand::Rng;
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| r.gen_range(-2.0..2.0)).collect();
            let got = net.forward_row(&x).unwrap();
            let want = naive_forward(&net, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bias_gradient_of_sum_loss_is_all_ones() {
        let mut net: Mlp<f64> = Mlp::new(&[3, 2], &mut rng()).unwrap();
        for i in 0..net.param_count() {
            net.param_set(i, 0.0);
        }
        let x = Array2::from_shape_vec((1, 3), vec![0.5, -1.0, 2.0]).unwrap();
        let cache = net.forward_cached(&x).unwrap();
        let d_out = Array2::from_elem((1, 2), 1.0);
        let grads = net.backward(&cache, &d_out);
        let (_, db) = &grads.layers[0];
        assert_eq!(db.to_vec(), vec![1.0, 1.0]);
    }

    /// Central finite differences over every parameter of a squared-error
    /// loss; relative error below 1e-4 (or both magnitudes below 1e-8).
    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let mut r = rng();
        let mut net: Mlp<f64> = Mlp::new(&[4, 8, 1], &mut r).unwrap();
        let x = Array2::from_shape_fn((5, 4), |_| r.gen_range(-1.0..1.0));
        let target = Array2::from_shape_fn((5, 1), |_| r.gen_range(-1.0..1.0));
        let loss = |net: &Mlp<f64>| -> f64 {
            let out = net.forward(&x).unwrap();
            let diff = &out - &target;
            diff.iter().map(|d| d * d).sum::<f64>() / (2.0 * 5.0)
        };
        let cache = net.forward_cached(&x).unwrap();
        let d_out = (cache.output() - &target) / 5.0;
        let grads = net.backward(&cache, &d_out);
        let h = 1e-5;
        for i in 0..net.param_count() {
            let p = net.param_get(i);
            net.param_set(i, p + h);
            let up = loss(&net);
            net.param_set(i, p - h);
            let down = loss(&net);
            net.param_set(i, p);
            let numeric = (up - down) / (2.0 * h);
            let analytic = Mlp::grad_get(&grads, i);
            if analytic.abs() < 1e-8 && numeric.abs() < 1e-8 {
                continue;
            }
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs());
            assert!(rel < 1e-4, "param {i}: analytic {analytic}, numeric {numeric}");
        }
    }

    #[test]
    fn duplicated_batch_row_doubles_its_gradient() {
        let mut r = rng();
        let net: Mlp<f64> = Mlp::new(&[3, 6, 2], &mut r).unwrap();
        let row = vec![0.4, -0.2, 0.9];
        let single = Array2::from_shape_vec((1, 3), row.clone()).unwrap();
        let double =
            Array2::from_shape_vec((2, 3), row.iter().chain(&row).copied().collect()).unwrap();
        let cache1 = net.forward_cached(&single).unwrap();
        let grads1 = net.backward(&cache1, &Array2::from_elem((1, 2), 1.0));
        let cache2 = net.forward_cached(&double).unwrap();
        let grads2 = net.backward(&cache2, &Array2::from_elem((2, 2), 1.0));
        for i in 0..net.param_count() {
            let a = Mlp::grad_get(&grads1, i);
            let b = Mlp::grad_get(&grads2, i);
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn input_gradient_agrees_with_full_backward() {
        let mut r = rng();
        let net: Mlp<f64> = Mlp::new(&[5, 7, 3], &mut r).unwrap();
        use rand::Rng;
        let x = Array2::from_shape_fn((4, 5), |_| r.gen_range(-1.0..1.0));
        let d_out = Array2::from_shape_fn((4, 3), |_| r.gen_range(-1.0..1.0));
        let cache = net.forward_cached(&x).unwrap();
        let (_, dx_full) = net.backward_with_input(&cache, &d_out);
        let dx_only = net.input_gradient(&cache, &d_out);
        assert!(dx_full.iter().zip(dx_only.iter()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn soft_update_endpoints_and_contraction() {
        let mut r = rng();
        let online: Mlp<f64> = Mlp::new(&[3, 4, 2], &mut r).unwrap();
        let make_zero = || {
            let mut n = online.clone();
            for i in 0..n.param_count() {
                n.param_set(i, 0.0);
            }
            n
        };

        let mut target = make_zero();
        target.soft_update_from(&online, 0.05).unwrap();
        assert!((target.param_get(0) - 0.05 * online.param_get(0)).abs() < 1e-15);

        let mut copy = make_zero();
        copy.soft_update_from(&online, 1.0).unwrap();
        assert_eq!(copy, online);

        let mut frozen = make_zero();
        frozen.soft_update_from(&online, 0.0).unwrap();
        assert_eq!(frozen.param_get(0), 0.0);

        // Repeated smoothing converges geometrically with ratio (1 - tau).
        let mut tracking = make_zero();
        let mut prev_gap = (online.param_get(0) - tracking.param_get(0)).abs();
        for _ in 0..20 {
            tracking.soft_update_from(&online, 0.05).unwrap();
            let gap = (online.param_get(0) - tracking.param_get(0)).abs();
            assert!((gap - 0.95 * prev_gap).abs() < 1e-12);
            prev_gap = gap;
        }
    }

    #[test]
    fn soft_update_rejects_mismatched_architectures() {
        let mut r = rng();
        let a: Mlp<f64> = Mlp::new(&[3, 4, 2], &mut r).unwrap();
        let mut b: Mlp<f64> = Mlp::new(&[3, 5, 2], &mut r).unwrap();
        assert!(matches!(b.soft_update_from(&a, 0.1), Err(LabError::Dimension(_))));
    }

    #[test]
    fn initialization_is_seed_reproducible() {
        let a: Mlp<f32> = Mlp::new(&[8, 16, 4], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b: Mlp<f32> = Mlp::new(&[8, 16, 4], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        let c: Mlp<f32> = Mlp::new(&[8, 16, 4], &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let net: Mlp<f64> = Mlp::new(&[4, 2], &mut rng()).unwrap();
        assert!(net.forward_row(&[1.0, 2.0]).is_err());
        assert!(Mlp::<f64>::new(&[4], &mut rng()).is_err());
        assert!(Mlp::<f64>::new(&[4, 0, 2], &mut rng()).is_err());
    }
}

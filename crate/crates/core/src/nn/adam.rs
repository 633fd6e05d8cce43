//! Bias-corrected Adam for network and scalar parameters.

use ndarray::{Array1, Array2};

use super::mlp::{Grads, Mlp};
use super::Element;
use crate::error::{LabError, Result};

/// Adam state for one [`Mlp`]: first and second moments per parameter.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    lr: F,
    beta1: F,
    beta2: F,
    eps: F,
    step: u64,
    moments: Vec<(Array2<F>, Array1<F>, Array2<F>, Array1<F>)>,
}

impl<F: Element> Adam<F> {
    /// Moments start at zero, shaped after `net`; defaults beta1 = 0.9,
    /// beta2 = 0.999, epsilon = 1e-8.
    pub fn new(net: &Mlp<F>, lr: f64) -> Self {
        let moments = net
            .layers
            .iter()
            .map(|l| {
                (
                    Array2::zeros(l.w.raw_dim()),
                    Array1::zeros(l.b.raw_dim()),
                    Array2::zeros(l.w.raw_dim()),
                    Array1::zeros(l.b.raw_dim()),
                )
            })
            .collect();
        Self {
            lr: F::from_f64(lr),
            beta1: F::from_f64(0.9),
            beta2: F::from_f64(0.999),
            eps: F::from_f64(1e-8),
            step: 0,
            moments,
        }
    }

    /// Applies one update to `net` in place.
    pub fn step(&mut self, net: &mut Mlp<F>, grads: &Grads<F>) -> Result<()> {
        if net.layers.len() != self.moments.len() || grads.layers.len() != self.moments.len() {
            return Err(LabError::Dimension(
                "optimizer state does not match network shape".into(),
            ));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = F::one() / (F::one() - self.beta1.powi(t));
        let c2 = F::one() / (F::one() - self.beta2.powi(t));
        let (b1, b2) = (self.beta1, self.beta2);
        let one_m_b1 = F::one() - b1;
        let one_m_b2 = F::one() - b2;
        let (lr, eps) = (self.lr, self.eps);
        for (layer, ((gw, gb), (mw, mb, vw, vb))) in net
            .layers
            .iter_mut()
            .zip(grads.layers.iter().zip(self.moments.iter_mut()))
        {
            if gw.raw_dim() != layer.w.raw_dim() || gb.raw_dim() != layer.b.raw_dim() {
                return Err(LabError::Dimension(
                    "gradient shape does not match parameters".into(),
                ));
            }
            mw.zip_mut_with(gw, |m, &g| *m = b1 * *m + one_m_b1 * g);
            vw.zip_mut_with(gw, |v, &g| *v = b2 * *v + one_m_b2 * g * g);
            azip_update(&mut layer.w, mw, vw, lr, c1, c2, eps);
            mb.zip_mut_with(gb, |m, &g| *m = b1 * *m + one_m_b1 * g);
            vb.zip_mut_with(gb, |v, &g| *v = b2 * *v + one_m_b2 * g * g);
            for ((p, m), v) in layer.b.iter_mut().zip(mb.iter()).zip(vb.iter()) {
                *p = *p - lr * (*m * c1) / ((*v * c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}

fn azip_update<F: Element>(
    p: &mut Array2<F>,
    m: &Array2<F>,
    v: &Array2<F>,
    lr: F,
    c1: F,
    c2: F,
    eps: F,
) {
    ndarray::Zip::from(p).and(m).and(v).for_each(|p, &m, &v| {
        *p = *p - lr * (m * c1) / ((v * c2).sqrt() + eps);
    });
}

/// Adam over a single scalar, used for the entropy temperature.
#[derive(Debug, Clone)]
pub struct ScalarAdam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: f64,
    v: f64,
}

impl ScalarAdam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: 0.0, v: 0.0 }
    }

    /// Returns the updated parameter.
    pub fn step(&mut self, param: f64, grad: f64) -> f64 {
        self.step += 1;
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad;
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad;
        let m_hat = self.m / (1.0 - self.beta1.powi(self.step as i32));
        let v_hat = self.v / (1.0 - self.beta2.powi(self.step as i32));
        param - self.lr * m_hat / (v_hat.sqrt() + self.eps)
    }
}

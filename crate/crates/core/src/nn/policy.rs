//! Squashed-Gaussian policy head: the actor's output parameterizes a
//! diagonal Gaussian whose samples are pushed through `tanh`.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::Element;
use crate::error::{LabError, Result};

/// Clamp range for the head's log standard deviations.
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918938533204672742; // ln(2*pi)/2

/// Splits a `batch` x `2k` head output into `(means, bounded log-stds,
/// d log-std / d raw)`. Raw log-stds pass through a softplus-rounded clamp:
/// the identity deep inside the range, saturating smoothly towards either
/// bound. Unlike a hard clamp its derivative fades near the bounds but never
/// cuts off, so the entropy term can always pull a saturated coordinate back;
/// with a hard clamp the temperature controller winds up without effect once
/// out-of-distribution states push the raw value past a bound.
pub fn split_head<F: Element>(
    head: &Array2<F>,
) -> Result<(Array2<F>, Array2<F>, Array2<F>)> {
    let cols = head.ncols();
    if cols == 0 || cols % 2 != 0 {
        return Err(LabError::Dimension(format!(
            "policy head width {cols} is not an even split of means and log-stds"
        )));
    }
    if head.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Numeric("policy head produced non-finite values".into()));
    }
    let k = cols / 2;
    let mean = head.slice(ndarray::s![.., ..k]).to_owned();
    let raw = head.slice(ndarray::s![.., k..]).to_owned();
    let lo = F::from_f64(LOG_STD_MIN);
    let hi = F::from_f64(LOG_STD_MAX);
    let log_std = raw.mapv(|v| lo + softplus(v - lo) - softplus(v - hi));
    let jac = raw.mapv(|v| sigmoid(v - lo) - sigmoid(v - hi));
    Ok((mean, log_std, jac))
}

/// A reparameterized draw from the squashed Gaussian.
pub struct SquashedSample<F> {
    /// Standard-normal noise used by the draw.
    pub eps: Array2<F>,
    pub sigma: Array2<F>,
    /// Gaussian sample before squashing: `mean + sigma * eps`.
    pub pre_tanh: Array2<F>,
    /// `tanh(pre_tanh)`, strictly inside `(-1, 1)`.
    pub action: Array2<F>,
    /// Per-sample log-density of the squashed action.
    pub log_prob: Array1<F>,
}

fn softplus<F: Element>(x: F) -> F {
    let zero = F::zero();
    x.max(zero) + (F::one() + (-x.abs()).exp()).ln()
}

// sigmoid(x) = exp(-softplus(-x)), stable across the whole range.
fn sigmoid<F: Element>(x: F) -> F {
    (-softplus(-x)).exp()
}

/// Per-sample log-density of `tanh(u)` for `u ~ Normal(mean, exp(log_std))`,
/// summed over action dimensions. Uses the identity
/// `log(1 - tanh(u)^2) = 2 (ln 2 - u - softplus(-2u))`.
pub fn log_prob_given<F: Element>(
    mean: &Array2<F>,
    log_std: &Array2<F>,
    pre_tanh: &Array2<F>,
) -> Array1<F> {
    let ln2 = F::from_f64(std::f64::consts::LN_2);
    let half = F::from_f64(0.5);
    let half_ln_2pi = F::from_f64(HALF_LN_2PI);
    let two = F::from_f64(2.0);
    let mut out = Array1::zeros(mean.nrows());
    for (i, mut_total) in out.iter_mut().enumerate() {
        let mut total = F::zero();
        for d in 0..mean.ncols() {
            let m = mean[(i, d)];
            let ls = log_std[(i, d)];
            let u = pre_tanh[(i, d)];
            let z = (u - m) / ls.exp();
            let gauss = -half * z * z - ls - half_ln_2pi;
            let correction = two * (ln2 - u - softplus(-two * u));
            total = total + gauss - correction;
        }
        *mut_total = total;
    }
    out
}

/// Draws actions for a whole batch with reparameterized noise.
pub fn sample_squashed<F: Element, R: Rng>(
    mean: &Array2<F>,
    log_std: &Array2<F>,
    rng: &mut R,
) -> SquashedSample<F> {
    let sigma = log_std.mapv(|v| v.exp());
    let eps = Array2::from_shape_fn(mean.raw_dim(), |_| F::std_normal(rng));
    let pre_tanh = mean + &(&sigma * &eps);
    let action = pre_tanh.mapv(|u| u.tanh());
    let log_prob = log_prob_given(mean, log_std, &pre_tanh);
    SquashedSample { eps, sigma, pre_tanh, action, log_prob }
}

/// Evaluation-mode action: the squashed mean, no sampling.
pub fn deterministic_action<F: Element>(mean: &Array2<F>) -> Array2<F> {
    mean.mapv(|m| m.tanh())
}

/// Monte-Carlo entropy estimate of the squashed policy for one state row.
pub fn entropy_estimate<F: Element, R: Rng>(
    mean: &Array2<F>,
    log_std: &Array2<F>,
    draws: usize,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for _ in 0..draws {
        let s = sample_squashed(mean, log_std, rng);
        total += s.log_prob.mapv(|v| v.to_f64()).mean().unwrap_or(0.0);
    }
    -total / draws as f64
}

//! Soft actor-critic learner: twin critics with slowly tracking targets,
//! a squashed-Gaussian actor, and an auto-tuned entropy temperature.

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;

use super::replay::Batch;
use crate::error::{LabError, Result};
use crate::nn::{
    log_prob_given, sample_squashed, split_head, Adam, Element, Grads, Mlp, ScalarAdam,
};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SacConfig {
    pub gamma: f64,
    /// Target-network blend per update.
    pub tau: f64,
    pub batch: usize,
    pub lr: f64,
    /// Environment steps driven by uniform random actions before the policy
    /// takes over and gradient updates begin.
    pub initial_random_steps: u64,
    pub total_steps: u64,
    /// Period, in environment steps, of held-out policy evaluation.
    pub eval_every: u64,
    pub target_entropy: f64,
    pub replay_capacity: usize,
    /// Hidden layer widths shared by actor and critics.
    pub hidden: Vec<usize>,
    pub alpha_init: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.05,
            batch: 256,
            lr: 3e-4,
            initial_random_steps: 10_000,
            total_steps: 100_000,
            eval_every: 2_000,
            target_entropy: -2.0,
            replay_capacity: 1_000_000,
            hidden: vec![256, 256],
            alpha_init: 1.0,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(LabError::Domain(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(LabError::Domain(format!("tau {} outside (0, 1]", self.tau)));
        }
        if self.batch == 0 {
            return Err(LabError::Domain("batch size must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(LabError::Domain(format!("learning rate {} invalid", self.lr)));
        }
        if self.alpha_init <= 0.0 {
            return Err(LabError::Domain("initial temperature must be positive".into()));
        }
        if self.replay_capacity == 0 || self.hidden.iter().any(|&h| h == 0) {
            return Err(LabError::Domain(
                "replay capacity and hidden widths must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Diagnostics from one full gradient update.
#[derive(Debug, Clone, Copy)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    /// Single-sample Monte-Carlo entropy estimate from the actor batch.
    pub entropy: f64,
}

/// Temperature loss `-alpha * (mean log pi + target entropy)` as a function
/// of `log alpha`.
pub fn alpha_loss(log_alpha: f64, mean_log_pi: f64, target_entropy: f64) -> f64 {
    -log_alpha.exp() * (mean_log_pi + target_entropy)
}

/// Analytic derivative of [`alpha_loss`] with respect to `log alpha`.
pub fn alpha_grad(log_alpha: f64, mean_log_pi: f64, target_entropy: f64) -> f64 {
    -log_alpha.exp() * (mean_log_pi + target_entropy)
}

pub struct SacAgent<F: Element> {
    cfg: SacConfig,
    state_dim: usize,
    action_dim: usize,
    actor: Mlp<F>,
    critic1: Mlp<F>,
    critic2: Mlp<F>,
    target1: Mlp<F>,
    target2: Mlp<F>,
    actor_opt: Adam<F>,
    critic1_opt: Adam<F>,
    critic2_opt: Adam<F>,
    log_alpha: f64,
    alpha_opt: ScalarAdam,
}

impl<F: Element> SacAgent<F> {
    pub fn new<R: Rng>(
        state_dim: usize,
        action_dim: usize,
        cfg: SacConfig,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        if state_dim == 0 || action_dim == 0 {
            return Err(LabError::Dimension(
                "state and action dimensions must be positive".into(),
            ));
        }
        let mut actor_dims = vec![state_dim];
        actor_dims.extend_from_slice(&cfg.hidden);
        actor_dims.push(2 * action_dim);
        let mut critic_dims = vec![state_dim + action_dim];
        critic_dims.extend_from_slice(&cfg.hidden);
        critic_dims.push(1);

        let actor = Mlp::new(&actor_dims, rng)?;
        let critic1 = Mlp::new(&critic_dims, rng)?;
        let critic2 = Mlp::new(&critic_dims, rng)?;
        let target1 = critic1.clone();
        let target2 = critic2.clone();
        Ok(Self {
            actor_opt: Adam::new(&actor, cfg.lr),
            critic1_opt: Adam::new(&critic1, cfg.lr),
            critic2_opt: Adam::new(&critic2, cfg.lr),
            alpha_opt: ScalarAdam::new(cfg.lr),
            log_alpha: cfg.alpha_init.ln(),
            actor,
            critic1,
            critic2,
            target1,
            target2,
            cfg,
            state_dim,
            action_dim,
        })
    }

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    pub fn set_log_alpha(&mut self, v: f64) {
        self.log_alpha = v;
    }

    pub fn actor(&self) -> &Mlp<F> {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp<F> {
        &mut self.actor
    }

    pub fn critic1(&self) -> &Mlp<F> {
        &self.critic1
    }

    pub fn critic1_mut(&mut self) -> &mut Mlp<F> {
        &mut self.critic1
    }

    pub fn critic2(&self) -> &Mlp<F> {
        &self.critic2
    }

    pub fn critic2_mut(&mut self) -> &mut Mlp<F> {
        &mut self.critic2
    }

    /// Replaces both critics and resets their targets; for diagnostics.
    pub fn install_critics(&mut self, c1: Mlp<F>, c2: Mlp<F>) -> Result<()> {
        if c1.input_dim() != self.state_dim + self.action_dim || c1.output_dim() != 1 {
            return Err(LabError::Dimension("critic shape mismatch".into()));
        }
        if c2.input_dim() != self.state_dim + self.action_dim || c2.output_dim() != 1 {
            return Err(LabError::Dimension("critic shape mismatch".into()));
        }
        self.target1 = c1.clone();
        self.target2 = c2.clone();
        self.critic1 = c1;
        self.critic2 = c2;
        Ok(())
    }

    fn state_row(&self, state: &[f64]) -> Result<Array2<F>> {
        if state.len() != self.state_dim {
            return Err(LabError::Dimension(format!(
                "state length {} does not match agent input {}",
                state.len(),
                self.state_dim
            )));
        }
        Ok(Array2::from_shape_fn((1, self.state_dim), |(_, j)| {
            F::from_f64(state[j])
        }))
    }

    /// One exploratory action drawn from the current policy.
    pub fn stochastic_action<R: Rng>(&self, state: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let x = self.state_row(state)?;
        let head = self.actor.forward(&x)?;
        let (mean, log_std, _) = split_head(&head)?;
        let s = sample_squashed(&mean, &log_std, rng);
        Ok(s.action.row(0).iter().map(|&a| Element::to_f64(a)).collect())
    }

    /// The evaluation-mode action: squashed mean, no noise.
    pub fn greedy_action(&self, state: &[f64]) -> Result<Vec<f64>> {
        let x = self.state_row(state)?;
        let head = self.actor.forward(&x)?;
        let (mean, _, _) = split_head(&head)?;
        Ok(mean.row(0).iter().map(|&m| Element::to_f64(m.tanh())).collect())
    }

    /// Soft state values `min(Q1', Q2')(s', a') - alpha log pi(a'|s')` with
    /// `a'` freshly sampled from the current policy.
    pub fn soft_next_values<R: Rng>(
        &self,
        next_states: &Array2<F>,
        rng: &mut R,
    ) -> Result<Array1<F>> {
        let head = self.actor.forward(next_states)?;
        let (mean, log_std, _) = split_head(&head)?;
        let s = sample_squashed(&mean, &log_std, rng);
        let x = join_state_action(next_states, &s.action);
        let q1 = self.target1.forward(&x)?;
        let q2 = self.target2.forward(&x)?;
        let alpha = F::from_f64(self.alpha());
        let mut out = Array1::zeros(next_states.nrows());
        for i in 0..out.len() {
            let q = q1[(i, 0)].min(q2[(i, 0)]);
            out[i] = q - alpha * s.log_prob[i];
        }
        Ok(out)
    }

    /// Bellman targets: `r` for terminal rows, otherwise
    /// `r + gamma * soft_value`.
    pub fn td_targets(
        rewards: &Array1<F>,
        dones: &Array1<F>,
        soft_values: &Array1<F>,
        gamma: f64,
    ) -> Array1<F> {
        let g = F::from_f64(gamma);
        let one = F::one();
        let mut out = Array1::zeros(rewards.len());
        for i in 0..rewards.len() {
            out[i] = rewards[i] + g * (one - dones[i]) * soft_values[i];
        }
        out
    }

    /// Full critic regression targets for a batch.
    pub fn critic_targets<R: Rng>(&self, batch: &Batch<F>, rng: &mut R) -> Result<Array1<F>> {
        let v = self.soft_next_values(&batch.next_states, rng)?;
        Ok(Self::td_targets(&batch.rewards, &batch.dones, &v, self.cfg.gamma))
    }

    /// Mean squared Bellman loss `mean(0.5 (Q - y)^2)` over both critics and
    /// its parameter gradients; pure, no optimizer step.
    pub fn critic_loss_and_grads(
        &self,
        batch: &Batch<F>,
        targets: &Array1<F>,
    ) -> Result<(f64, Grads<F>, Grads<F>)> {
        let b = batch.states.nrows();
        if b == 0 || targets.len() != b {
            return Err(LabError::Dimension(
                "critic batch and target lengths disagree".into(),
            ));
        }
        let x = join_state_action(&batch.states, &batch.actions);
        let inv_b = F::from_f64(1.0 / b as f64);
        let half = F::from_f64(0.5);
        let mut total = F::zero();
        let mut grads = Vec::with_capacity(2);
        for critic in [&self.critic1, &self.critic2] {
            let cache = critic.forward_cached(&x)?;
            let mut d_out = Array2::zeros((b, 1));
            for i in 0..b {
                let r = cache.output()[(i, 0)] - targets[i];
                total += half * r * r * inv_b;
                d_out[(i, 0)] = r * inv_b;
            }
            grads.push(critic.backward(&cache, &d_out));
        }
        let loss = total.to_f64() / 2.0;
        if !loss.is_finite() {
            return Err(LabError::Numeric("critic loss is not finite".into()));
        }
        let g2 = grads.pop().expect("two critics");
        let g1 = grads.pop().expect("two critics");
        Ok((loss, g1, g2))
    }

    /// One Adam step on both critics toward fresh Bellman targets; returns
    /// the mean loss.
    pub fn critic_update<R: Rng>(&mut self, batch: &Batch<F>, rng: &mut R) -> Result<f64> {
        let targets = self.critic_targets(batch, rng)?;
        let (loss, g1, g2) = self.critic_loss_and_grads(batch, &targets)?;
        self.critic1_opt.step(&mut self.critic1, &g1)?;
        self.critic2_opt.step(&mut self.critic2, &g2)?;
        Ok(loss)
    }

    /// Policy loss `mean(alpha log pi - min(Q1, Q2))` under fixed
    /// reparameterization noise `eps`; pure, used by gradient checks.
    pub fn actor_loss_given_eps(&self, states: &Array2<F>, eps: &Array2<F>) -> Result<f64> {
        let (loss, _, _) = self.actor_eval(states, eps, false)?;
        Ok(loss)
    }

    /// Like [`SacAgent::actor_loss_given_eps`] but also returns the actor
    /// parameter gradients and the per-sample log-probabilities.
    pub fn actor_grads_given_eps(
        &self,
        states: &Array2<F>,
        eps: &Array2<F>,
    ) -> Result<(f64, Grads<F>, Array1<F>)> {
        let (loss, grads, log_pi) = self.actor_eval(states, eps, true)?;
        Ok((loss, grads.expect("gradients requested"), log_pi))
    }

    fn actor_eval(
        &self,
        states: &Array2<F>,
        eps: &Array2<F>,
        want_grads: bool,
    ) -> Result<(f64, Option<Grads<F>>, Array1<F>)> {
        let b = states.nrows();
        if b == 0 {
            return Err(LabError::Dimension("actor batch is empty".into()));
        }
        if eps.dim() != (b, self.action_dim) {
            return Err(LabError::Dimension(format!(
                "noise shape {:?} does not match batch {} x {}",
                eps.dim(),
                b,
                self.action_dim
            )));
        }
        let cache = self.actor.forward_cached(states)?;
        let (mean, log_std, ls_jac) = split_head(cache.output())?;
        let sigma = log_std.mapv(|v| v.exp());
        let pre_tanh = &mean + &(&sigma * eps);
        let action = pre_tanh.mapv(|u| u.tanh());
        let log_pi = log_prob_given(&mean, &log_std, &pre_tanh);

        let x = join_state_action(states, &action);
        let cache1 = self.critic1.forward_cached(&x)?;
        let cache2 = self.critic2.forward_cached(&x)?;
        let alpha = F::from_f64(self.alpha());
        let inv_b = F::from_f64(1.0 / b as f64);

        let mut loss = F::zero();
        let mut pick1 = Array2::zeros((b, 1));
        let mut pick2 = Array2::zeros((b, 1));
        for i in 0..b {
            let (q1, q2) = (cache1.output()[(i, 0)], cache2.output()[(i, 0)]);
            let qmin = if q1 <= q2 {
                pick1[(i, 0)] = F::one();
                q1
            } else {
                pick2[(i, 0)] = F::one();
                q2
            };
            loss += (alpha * log_pi[i] - qmin) * inv_b;
        }
        let loss = loss.to_f64();
        if !loss.is_finite() {
            return Err(LabError::Numeric("actor loss is not finite".into()));
        }
        if !want_grads {
            return Ok((loss, None, log_pi));
        }

        // d(min Q)/d(action): route ones through whichever critic won.
        let dq1 = self.critic1.input_gradient(&cache1, &pick1);
        let dq2 = self.critic2.input_gradient(&cache2, &pick2);
        let k = self.action_dim;
        let two = F::from_f64(2.0);
        let one = F::one();
        let mut d_head = Array2::zeros((b, 2 * k));
        for i in 0..b {
            for d in 0..k {
                let a = action[(i, d)];
                let g = dq1[(i, self.state_dim + d)] + dq2[(i, self.state_dim + d)];
                let jac = one - a * a;
                let es = eps[(i, d)] * sigma[(i, d)];
                d_head[(i, d)] = (alpha * two * a - g * jac) * inv_b;
                d_head[(i, k + d)] =
                    (alpha * (two * a * es - one) - g * jac * es) * inv_b * ls_jac[(i, d)];
            }
        }
        let grads = self.actor.backward(&cache, &d_head);
        Ok((loss, Some(grads), log_pi))
    }

    /// One Adam step on the actor; returns `(loss, mean log pi)`.
    pub fn actor_update<R: Rng>(
        &mut self,
        batch: &Batch<F>,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        let eps = Array2::from_shape_fn((batch.states.nrows(), self.action_dim), |_| {
            F::std_normal(rng)
        });
        let (loss, grads, log_pi) = self.actor_grads_given_eps(&batch.states, &eps)?;
        self.actor_opt.step(&mut self.actor, &grads)?;
        let mean_log_pi =
            log_pi.iter().map(|&v| Element::to_f64(v)).sum::<f64>() / log_pi.len() as f64;
        Ok((loss, mean_log_pi))
    }

    /// Adam step on `log alpha` toward the entropy target; returns the new
    /// temperature. Entropy below target raises alpha, above lowers it.
    pub fn alpha_update(&mut self, mean_log_pi: f64) -> f64 {
        let g = alpha_grad(self.log_alpha, mean_log_pi, self.cfg.target_entropy);
        self.log_alpha = self.alpha_opt.step(self.log_alpha, g);
        self.alpha()
    }

    /// Blends both target critics toward the online critics by `tau`.
    pub fn soft_update_targets(&mut self) -> Result<()> {
        let tau = F::from_f64(self.cfg.tau);
        self.target1.soft_update_from(&self.critic1, tau)?;
        self.target2.soft_update_from(&self.critic2, tau)
    }

    /// One full learner step: critic, actor, temperature, target blend.
    pub fn update<R: Rng>(&mut self, batch: &Batch<F>, rng: &mut R) -> Result<UpdateStats> {
        let critic_loss = self.critic_update(batch, rng)?;
        let (actor_loss, mean_log_pi) = self.actor_update(batch, rng)?;
        let alpha = self.alpha_update(mean_log_pi);
        self.soft_update_targets()?;
        Ok(UpdateStats { critic_loss, actor_loss, alpha, entropy: -mean_log_pi })
    }
}

fn join_state_action<F: Element>(states: &Array2<F>, actions: &Array2<F>) -> Array2<F> {
    concatenate![Axis(1), states.view(), actions.view()]
}

//! Exposure controllers evaluated by the comparison harness.
//!
//! Each controller sees the latest state vector, RoI patch, and camera
//! parameters once per captured frame and answers with a [`ControlRequest`].
//! The harness applies the request, captures the next frame, and calls again,
//! so controllers that probe (like Nelder-Mead) pay one frame per probe
//! exactly as a real camera would.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{builtin_ae_step, NelderMead, SearchBox};
use crate::camsim::ExposureParams;
use crate::error::{LabError, Result};
use crate::imaging::Image;
use crate::nn::Mlp;
use crate::percept::{r_single_frame, RewardConfig, STATE_LEN};
use crate::sac::Action;

/// What a controller wants done before the next frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlRequest {
    /// Capture the next frame with unchanged parameters.
    Hold,
    /// Apply a relative exposure/gain action.
    Relative(Action),
    /// Set the parameters outright (clamped by the camera).
    Absolute(ExposureParams),
}

/// A sequential exposure-control policy.
pub trait Controller {
    /// Short identifier used in report rows.
    fn name(&self) -> &str;

    /// Clears per-episode state before a new episode.
    fn reset(&mut self);

    /// Chooses the next request given the current observation.
    fn decide(
        &mut self,
        state: &[f64],
        patch: &Image,
        params: ExposureParams,
    ) -> Result<ControlRequest>;
}

/// Greedy policy head: runs the trained actor and takes tanh of the mean.
#[derive(Debug, Clone)]
pub struct DrlController {
    actor: Mlp<f32>,
}

impl DrlController {
    pub fn new(actor: Mlp<f32>) -> Result<Self> {
        let dims = actor.dims();
        let (first, last) = (dims[0], dims[dims.len() - 1]);
        if first != STATE_LEN || last != 4 {
            return Err(LabError::Argument(format!(
                "actor shape {dims:?} is not a {STATE_LEN}-input, 2-action policy head"
            )));
        }
        Ok(Self { actor })
    }

    pub fn actor(&self) -> &Mlp<f32> {
        &self.actor
    }
}

impl Controller for DrlController {
    fn name(&self) -> &str {
        "drl"
    }

    fn reset(&mut self) {}

    fn decide(
        &mut self,
        state: &[f64],
        _patch: &Image,
        _params: ExposureParams,
    ) -> Result<ControlRequest> {
        if state.len() != STATE_LEN {
            return Err(LabError::Dimension(format!(
                "state length {} does not match the policy input {STATE_LEN}",
                state.len()
            )));
        }
        let row: Vec<f32> = state.iter().map(|&v| v as f32).collect();
        let head = self.actor.forward_row(&row)?;
        let action = Action::clamped(
            f64::from(head[0]).tanh(),
            f64::from(head[1]).tanh(),
        );
        Ok(ControlRequest::Relative(action))
    }
}

/// The surrogate vendor auto-exposure loop applied once per frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinAeController;

impl Controller for BuiltinAeController {
    fn name(&self) -> &str {
        "builtin"
    }

    fn reset(&mut self) {}

    fn decide(
        &mut self,
        _state: &[f64],
        patch: &Image,
        params: ExposureParams,
    ) -> Result<ControlRequest> {
        Ok(ControlRequest::Absolute(builtin_ae_step(patch.mean(), params)))
    }
}

/// Nelder-Mead run as a sequential controller: every objective probe costs
/// one captured frame, scored by the single-frame reward of the patch that
/// comes back. After the simplex terminates the controller jumps to the best
/// probed parameters and holds.
#[derive(Debug, Clone)]
pub struct NelderMeadController {
    reward: RewardConfig,
    bounds: SearchBox,
    budget: usize,
    search: Option<NelderMead>,
    awaiting_probe: bool,
    parked: bool,
}

impl NelderMeadController {
    pub fn new(reward: RewardConfig, bounds: SearchBox, budget: usize) -> Self {
        Self { reward, bounds, budget, search: None, awaiting_probe: false, parked: false }
    }

    /// Searches the camera's full parameter range.
    pub fn full_range(reward: RewardConfig, budget: usize) -> Self {
        Self::new(reward, SearchBox::full_camera_range(), budget)
    }

    /// Objective probes spent so far this episode.
    pub fn probes(&self) -> usize {
        self.search.as_ref().map_or(0, NelderMead::evaluations)
    }

    /// Whether the simplex has terminated and the controller is holding.
    pub fn settled(&self) -> bool {
        self.search.as_ref().is_some_and(NelderMead::is_terminated)
    }
}

impl Controller for NelderMeadController {
    fn name(&self) -> &str {
        "nm"
    }

    fn reset(&mut self) {
        self.search = None;
        self.awaiting_probe = false;
        self.parked = false;
    }

    fn decide(
        &mut self,
        _state: &[f64],
        patch: &Image,
        params: ExposureParams,
    ) -> Result<ControlRequest> {
        if self.search.is_none() {
            self.search = Some(NelderMead::new(
                self.bounds,
                self.bounds.point_of(params),
                self.budget,
            )?);
        }
        let search = self.search.as_mut().expect("installed above");
        if self.awaiting_probe {
            search.report(r_single_frame(patch, &self.reward)?)?;
            self.awaiting_probe = false;
        }
        if let Some(point) = search.next_point() {
            self.awaiting_probe = true;
            return Ok(ControlRequest::Absolute(self.bounds.params_at(point)));
        }
        if !self.parked {
            self.parked = true;
            let (best, _) = search.best().expect("terminated searches have evaluations");
            return Ok(ControlRequest::Absolute(self.bounds.params_at(best)));
        }
        Ok(ControlRequest::Hold)
    }
}

/// Uniform random actions from a fixed seed; the do-nothing-smart baseline.
#[derive(Debug, Clone)]
pub struct RandomController {
    base_seed: u64,
    episode: u64,
    rng: ChaCha8Rng,
}

impl RandomController {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed, episode: 0, rng: ChaCha8Rng::seed_from_u64(base_seed) }
    }
}

impl Controller for RandomController {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self) {
        self.episode += 1;
        self.rng = ChaCha8Rng::seed_from_u64(self.base_seed.wrapping_add(self.episode));
    }

    fn decide(
        &mut self,
        _state: &[f64],
        _patch: &Image,
        _params: ExposureParams,
    ) -> Result<ControlRequest> {
        Ok(ControlRequest::Relative(Action::clamped(
            self.rng.gen_range(-1.0..=1.0),
            self.rng.gen_range(-1.0..=1.0),
        )))
    }
}

//! Frame-to-state episode bookkeeping shared by the darkroom and grid
//! environments: RoI extraction, state stacking, and reward evaluation.

use crate::error::Result;
use crate::imaging::{Image, RoiSpec};
use crate::percept::{
    push_state, r_flk, r_total, vectorize_patch, RewardConfig, StateVector,
};

/// Mutable per-episode cursor over successive frames. Both environments feed
/// frames through this type, so state and reward semantics are identical.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeCore {
    reward_cfg: RewardConfig,
    roi: RoiSpec,
    state: StateVector,
    prev_patch: Image,
    last_flicker: Option<f64>,
}

impl EpisodeCore {
    /// Starts an episode on its first frame; the history is seeded by
    /// repeating the first intensity profile.
    pub fn start(frame: &Image, roi: RoiSpec, reward_cfg: RewardConfig) -> Result<Self> {
        let patch = frame.crop(&roi)?;
        let v = vectorize_patch(&patch);
        Ok(Self {
            reward_cfg,
            roi,
            state: StateVector::seeded(&v),
            prev_patch: patch,
            last_flicker: None,
        })
    }

    /// Ingests the next frame, returning `(reward, flicker)`.
    pub fn advance(&mut self, frame: &Image) -> Result<(f64, f64)> {
        let patch = frame.crop(&self.roi)?;
        let flicker = r_flk(&patch, &self.prev_patch)?;
        let reward = r_total(&patch, &self.prev_patch, &self.reward_cfg)?;
        let v = vectorize_patch(&patch);
        self.state = push_state(&self.state, &v);
        self.prev_patch = patch;
        self.last_flicker = Some(flicker);
        Ok((reward, flicker))
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// RoI patch of the most recent frame.
    pub fn last_patch(&self) -> &Image {
        &self.prev_patch
    }

    pub fn last_flicker(&self) -> Option<f64> {
        self.last_flicker
    }
}

//! The synthetic darkroom: an episodic environment that renders procedural
//! scenes under scripted lighting and exposes reset/step semantics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::camera::{render, CameraModel, ExposureParams};
use super::episode::EpisodeCore;
use super::lighting::{illuminance_at, sample_scenario, Difficulty, LightingScenario};
use super::scene::{Scene, SceneKind};
use super::EPISODE_LEN;
use crate::error::{LabError, Result};
use crate::imaging::{apply_augmentation, AugmentationSpec, Image, RoiSpec};
use crate::percept::{RewardConfig, StateVector};
use crate::sac::{apply_action, Action, ActionScale};

/// Darkroom environment parameters.
#[derive(Debug, Clone, Copy)]
pub struct EnvConfig {
    /// Rendered frame size (height, width).
    pub frame_size: (usize, usize),
    pub camera: CameraModel,
    pub reward: RewardConfig,
    pub action_scale: ActionScale,
    /// Sample a spatial augmentation and RoI per episode; when off, frames
    /// pass through unmodified and the RoI covers the full frame.
    pub domain_randomization: bool,
    pub episode_len: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            frame_size: (128, 128),
            camera: CameraModel::default(),
            reward: RewardConfig::default(),
            action_scale: ActionScale::default(),
            domain_randomization: true,
            episode_len: EPISODE_LEN,
        }
    }
}

/// Draws the per-episode spatial augmentation: optional crop of at least
/// half the frame, random flips, quarter turns, and an optional resize.
pub fn sample_augmentation<R: Rng>(rng: &mut R, height: usize, width: usize) -> AugmentationSpec {
    let crop = if rng.gen_bool(0.5) {
        let ch = rng.gen_range(height / 2..=height);
        let cw = rng.gen_range(width / 2..=width);
        let y0 = rng.gen_range(0..=height - ch);
        let x0 = rng.gen_range(0..=width - cw);
        Some(RoiSpec { x0, y0, w: cw, h: ch })
    } else {
        None
    };
    let resize_to = if rng.gen_bool(0.5) {
        Some((rng.gen_range(64..=128), rng.gen_range(64..=128)))
    } else {
        None
    };
    AugmentationSpec {
        flip_h: rng.gen_bool(0.5),
        flip_v: rng.gen_bool(0.5),
        quarter_turns: rng.gen_range(0..4),
        crop,
        resize_to,
    }
}

/// Frame dimensions after applying `spec` to a `height` x `width` frame.
fn augmented_dims(spec: &AugmentationSpec, height: usize, width: usize) -> (usize, usize) {
    let (mut h, mut w) = match &spec.crop {
        Some(roi) => (roi.h, roi.w),
        None => (height, width),
    };
    if spec.quarter_turns % 2 == 1 {
        std::mem::swap(&mut h, &mut w);
    }
    if let Some((rh, rw)) = spec.resize_to {
        (h, w) = (rh, rw);
    }
    (h, w)
}

/// Draws the episode RoI: the full frame half the time, otherwise a random
/// window of at least half each dimension.
fn sample_roi<R: Rng>(rng: &mut R, height: usize, width: usize) -> RoiSpec {
    if rng.gen_bool(0.5) {
        return RoiSpec { x0: 0, y0: 0, w: width, h: height };
    }
    let h = rng.gen_range((height / 2).max(8)..=height);
    let w = rng.gen_range((width / 2).max(8)..=width);
    let y0 = rng.gen_range(0..=height - h);
    let x0 = rng.gen_range(0..=width - w);
    RoiSpec { x0, y0, w, h }
}

struct Episode {
    scenario: LightingScenario,
    difficulty: Option<Difficulty>,
    scene: Scene,
    aug: AugmentationSpec,
    core: EpisodeCore,
    params: ExposureParams,
    render_rng: ChaCha8Rng,
    step: usize,
    done: bool,
}

/// Episodic simulator: reset samples a scenario, scene, augmentation, RoI,
/// and random initial exposure parameters; step applies a relative action,
/// advances the lighting script one frame, and returns the next observation.
pub struct DarkroomEnv {
    cfg: EnvConfig,
    rng: ChaCha8Rng,
    episode: Option<Episode>,
}

impl DarkroomEnv {
    pub fn new(cfg: EnvConfig, seed: u64) -> Self {
        Self { cfg, rng: ChaCha8Rng::seed_from_u64(seed), episode: None }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Starts an episode at the given difficulty, sampling everything else.
    pub fn reset(&mut self, level: Difficulty) -> Result<StateVector> {
        let scenario = sample_scenario(level, &mut self.rng);
        let episode_seed = self.rng.gen();
        self.reset_with(scenario, episode_seed, Some(level))
    }

    /// Starts an episode with a fixed scenario; `episode_seed` determines the
    /// scene, augmentation, RoI, initial parameters, and sensor noise.
    pub fn reset_with(
        &mut self,
        scenario: LightingScenario,
        episode_seed: u64,
        difficulty: Option<Difficulty>,
    ) -> Result<StateVector> {
        let (fh, fw) = self.cfg.frame_size;
        let mut ep_rng = ChaCha8Rng::seed_from_u64(episode_seed);
        let kind = SceneKind::sample(&mut ep_rng);
        let scene_seed = ep_rng.gen();
        let scene = Scene::generate(kind, scene_seed, fh, fw)?;
        let aug = if self.cfg.domain_randomization {
            sample_augmentation(&mut ep_rng, fh, fw)
        } else {
            AugmentationSpec::identity()
        };
        let (ah, aw) = augmented_dims(&aug, fh, fw);
        let roi = if self.cfg.domain_randomization {
            sample_roi(&mut ep_rng, ah, aw)
        } else {
            RoiSpec { x0: 0, y0: 0, w: aw, h: ah }
        };
        let params = ExposureParams::sample_uniform(&mut ep_rng);
        let mut render_rng = ChaCha8Rng::seed_from_u64(ep_rng.gen());
        let first = render(
            &scene,
            illuminance_at(&scenario, 0),
            params,
            &self.cfg.camera,
            &mut render_rng,
        )?;
        let first = apply_augmentation(&first, &aug)?;
        let core = EpisodeCore::start(&first, roi, self.cfg.reward)?;
        let state = core.state().clone();
        self.episode = Some(Episode {
            scenario,
            difficulty,
            scene,
            aug,
            core,
            params,
            render_rng,
            step: 0,
            done: false,
        });
        Ok(state)
    }

    /// Applies a relative action and advances one frame.
    pub fn step(&mut self, action: Action) -> Result<(StateVector, f64, bool)> {
        let scale = self.cfg.action_scale;
        let ep = self.episode_mut()?;
        ep.params = apply_action(ep.params, action, &scale);
        self.advance()
    }

    /// Jumps to absolute parameters (clamped into bounds) and advances one
    /// frame; used by controllers that compute target parameters directly.
    pub fn step_absolute(&mut self, params: ExposureParams) -> Result<(StateVector, f64, bool)> {
        let ep = self.episode_mut()?;
        ep.params = ExposureParams::clamped(params.exposure_time_ms, params.gain_db);
        self.advance()
    }

    fn episode_mut(&mut self) -> Result<&mut Episode> {
        let ep = self
            .episode
            .as_mut()
            .ok_or_else(|| LabError::State("step before reset".into()))?;
        if ep.done {
            return Err(LabError::State("step after episode finished".into()));
        }
        Ok(ep)
    }

    fn advance(&mut self) -> Result<(StateVector, f64, bool)> {
        let cam = self.cfg.camera;
        let episode_len = self.cfg.episode_len;
        let ep = self.episode.as_mut().expect("episode checked by caller");
        ep.step += 1;
        let l = illuminance_at(&ep.scenario, ep.step);
        let frame = render(&ep.scene, l, ep.params, &cam, &mut ep.render_rng)?;
        let frame = apply_augmentation(&frame, &ep.aug)?;
        let (reward, _flicker) = ep.core.advance(&frame)?;
        ep.done = ep.step >= episode_len;
        Ok((ep.core.state().clone(), reward, ep.done))
    }

    pub fn state(&self) -> Option<&StateVector> {
        self.episode.as_ref().map(|e| e.core.state())
    }

    pub fn params(&self) -> Option<ExposureParams> {
        self.episode.as_ref().map(|e| e.params)
    }

    /// RoI patch of the most recent frame.
    pub fn last_patch(&self) -> Option<&Image> {
        self.episode.as_ref().map(|e| e.core.last_patch())
    }

    /// Flicker term of the most recent step, if any step has run.
    pub fn last_flicker(&self) -> Option<f64> {
        self.episode.as_ref().and_then(|e| e.core.last_flicker())
    }

    pub fn steps_taken(&self) -> usize {
        self.episode.as_ref().map_or(0, |e| e.step)
    }

    pub fn episode_len(&self) -> usize {
        self.cfg.episode_len
    }

    pub fn scenario(&self) -> Option<&LightingScenario> {
        self.episode.as_ref().map(|e| &e.scenario)
    }

    pub fn difficulty(&self) -> Option<Difficulty> {
        self.episode.as_ref().and_then(|e| e.difficulty)
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.done)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::STATE_LEN;

    fn quiet_config() -> EnvConfig {
        EnvConfig {
            camera: CameraModel::noiseless(),
            domain_randomization: false,
            ..EnvConfig::default()
        }
    }

    #[test]
    fn reset_produces_full_length_state() {
        let mut env = DarkroomEnv::new(EnvConfig::default(), 1);
        let state = env.reset(Difficulty::Easy).unwrap();
        assert_eq!(state.as_slice().len(), STATE_LEN);
    }

    #[test]
    fn equal_seeds_give_identical_episodes() {
        let mut a = DarkroomEnv::new(EnvConfig::default(), 77);
        let mut b = DarkroomEnv::new(EnvConfig::default(), 77);
        let sa = a.reset(Difficulty::Hard).unwrap();
        let sb = b.reset(Difficulty::Hard).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(a.params(), b.params());
        for k in 0..5 {
            let act = Action::clamped(0.3 - 0.1 * k as f64, -0.2);
            let (xa, ra, da) = a.step(act).unwrap();
            let (xb, rb, db) = b.step(act).unwrap();
            assert_eq!(xa, xb);
            assert_eq!(ra, rb);
            assert_eq!(da, db);
        }
    }

    #[test]
    fn easy_reset_lands_in_moderate_illuminance() {
        let mut env = DarkroomEnv::new(EnvConfig::default(), 3);
        for _ in 0..20 {
            env.reset(Difficulty::Easy).unwrap();
            let s = env.scenario().unwrap();
            assert!((0.5..=5.0).contains(&s.level_start));
        }
    }

    #[test]
    fn episode_finishes_after_exactly_200_steps() {
        let mut env = DarkroomEnv::new(quiet_config(), 5);
        env.reset(Difficulty::Easy).unwrap();
        for k in 1..=200 {
            let (state, reward, done) = env.step(Action::ZERO).unwrap();
            assert_eq!(state.as_slice().len(), STATE_LEN);
            assert!(reward.is_finite());
            assert_eq!(done, k == 200, "wrong done flag at step {k}");
        }
        assert!(matches!(env.step(Action::ZERO), Err(LabError::State(_))));
    }

    #[test]
    fn step_before_reset_is_state_error() {
        let mut env = DarkroomEnv::new(quiet_config(), 6);
        assert!(matches!(env.step(Action::ZERO), Err(LabError::State(_))));
    }

    #[test]
    fn zero_action_under_static_noise_free_lighting_repeats_reward() {
        let mut env = DarkroomEnv::new(quiet_config(), 8);
        env.reset(Difficulty::Easy).unwrap();
        let (_, r1, _) = env.step(Action::ZERO).unwrap();
        let (_, r2, _) = env.step(Action::ZERO).unwrap();
        let (_, r3, _) = env.step(Action::ZERO).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r2, r3);
    }

    #[test]
    fn domain_randomization_keeps_frames_consistent() {
        let cfg = EnvConfig { camera: CameraModel::noiseless(), ..EnvConfig::default() };
        let mut env = DarkroomEnv::new(cfg, 9);
        for _ in 0..10 {
            env.reset(Difficulty::Normal).unwrap();
            let first_dims =
                (env.last_patch().unwrap().height(), env.last_patch().unwrap().width());
            for _ in 0..3 {
                env.step(Action::clamped(0.5, 0.5)).unwrap();
                let patch = env.last_patch().unwrap();
                assert_eq!((patch.height(), patch.width()), first_dims);
            }
        }
    }

    #[test]
    fn absolute_step_clamps_and_moves_params() {
        let mut env = DarkroomEnv::new(quiet_config(), 10);
        env.reset(Difficulty::Easy).unwrap();
        env.step_absolute(ExposureParams { exposure_time_ms: 500.0, gain_db: -3.0 }).unwrap();
        let p = env.params().unwrap();
        assert_eq!(p.exposure_time_ms, ExposureParams::EXPOSURE_MAX_MS);
        assert_eq!(p.gain_db, ExposureParams::GAIN_MIN_DB);
    }

    #[test]
    fn sampled_augmentations_are_valid_for_the_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let spec = sample_augmentation(&mut rng, 128, 128);
            let img = Image::constant(128, 128, 0.5).unwrap();
            let out = apply_augmentation(&img, &spec).unwrap();
            let (h, w) = augmented_dims(&spec, 128, 128);
            assert_eq!((out.height(), out.width()), (h, w));
        }
    }
}

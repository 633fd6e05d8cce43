//! Flat key-value run configuration.
//!
//! Every tunable constant in the laboratory appears here under one top-level
//! TOML key, so a single file pins a whole experiment. Unknown keys are
//! rejected; omitted keys fall back to the library defaults. The camera
//! parameter bounds are compiled into the binary and are listed for the
//! record only: loading a file that contradicts them is an error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camsim::{CameraModel, EnvConfig, ExposureParams};
use crate::error::{LabError, Result};
use crate::percept::{MeanTermForm, RewardConfig};
use crate::sac::{ActionScale, CurriculumMode, CurriculumSchedule, SacConfig, TrainSetup};

/// One flat namespace of every named constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    // Reward shaping.
    pub reward_target_mean: f64,
    pub reward_mean_exponent: f64,
    pub reward_mean_weight: f64,
    pub reward_flicker_weight: f64,
    pub reward_noise_weight: f64,
    /// "closeness" scores `1 - distance`; "literal" weights the raw distance.
    pub reward_mean_term: String,

    // Per-step action scale.
    pub action_exposure_factor: f64,
    pub action_gain_step_db: f64,

    // Sensor model.
    pub camera_t_ref_ms: f64,
    pub camera_full_well: f64,
    pub camera_read_noise_sigma: f64,
    pub camera_quantize_bits: u8,

    // Parameter box (compiled in; here for the record).
    pub exposure_min_ms: f64,
    pub exposure_max_ms: f64,
    pub gain_min_db: f64,
    pub gain_max_db: f64,

    // Environment.
    pub frame_height: usize,
    pub frame_width: usize,
    pub episode_len: usize,
    pub domain_randomization: bool,

    // Difficulty curriculum.
    pub curriculum_t_easy: u64,
    pub curriculum_t_normal: u64,
    pub curriculum_final_easy: f64,
    pub curriculum_final_normal: f64,
    pub curriculum_final_hard: f64,
    /// "literal" or "monotone".
    pub curriculum_mode: String,

    // Agent.
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub initial_random_steps: u64,
    pub total_steps: u64,
    pub eval_every: u64,
    pub target_entropy: f64,
    pub replay_capacity: usize,
    pub hidden_layers: Vec<usize>,
    pub alpha_init: f64,

    // Evaluation.
    pub convergence_epsilon: f64,
    pub eval_episodes: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self::from_setup(&TrainSetup::default())
    }
}

impl LabConfig {
    /// Captures an in-memory setup as a config.
    pub fn from_setup(setup: &TrainSetup) -> Self {
        let env = &setup.env;
        let reward = &env.reward;
        let cur = &setup.curriculum;
        let sac = &setup.sac;
        Self {
            reward_target_mean: reward.m,
            reward_mean_exponent: reward.p_m,
            reward_mean_weight: reward.w_m,
            reward_flicker_weight: reward.w_f,
            reward_noise_weight: reward.w_n,
            reward_mean_term: match reward.mean_term_form {
                MeanTermForm::Closeness => "closeness".into(),
                MeanTermForm::Literal => "literal".into(),
            },
            action_exposure_factor: env.action_scale.exposure_factor,
            action_gain_step_db: env.action_scale.gain_step_db,
            camera_t_ref_ms: env.camera.t_ref_ms,
            camera_full_well: env.camera.full_well,
            camera_read_noise_sigma: env.camera.read_noise_sigma,
            camera_quantize_bits: env.camera.quantize_bits,
            exposure_min_ms: ExposureParams::EXPOSURE_MIN_MS,
            exposure_max_ms: ExposureParams::EXPOSURE_MAX_MS,
            gain_min_db: ExposureParams::GAIN_MIN_DB,
            gain_max_db: ExposureParams::GAIN_MAX_DB,
            frame_height: env.frame_size.0,
            frame_width: env.frame_size.1,
            episode_len: env.episode_len,
            domain_randomization: env.domain_randomization,
            curriculum_t_easy: cur.t_easy,
            curriculum_t_normal: cur.t_normal,
            curriculum_final_easy: cur.final_probs.0,
            curriculum_final_normal: cur.final_probs.1,
            curriculum_final_hard: cur.final_probs.2,
            curriculum_mode: match cur.mode {
                CurriculumMode::Literal => "literal".into(),
                CurriculumMode::Monotone => "monotone".into(),
            },
            gamma: sac.gamma,
            tau: sac.tau,
            batch_size: sac.batch,
            learning_rate: sac.lr,
            initial_random_steps: sac.initial_random_steps,
            total_steps: sac.total_steps,
            eval_every: sac.eval_every,
            target_entropy: sac.target_entropy,
            replay_capacity: sac.replay_capacity,
            hidden_layers: sac.hidden.clone(),
            alpha_init: sac.alpha_init,
            convergence_epsilon: setup.convergence_epsilon,
            eval_episodes: setup.eval_episodes,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Format(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("flat scalar fields always serialize")
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            LabError::Format(format!("config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        Ok(fs::write(path, self.to_toml())?)
    }

    pub fn reward_config(&self) -> Result<RewardConfig> {
        Ok(RewardConfig {
            m: self.reward_target_mean,
            p_m: self.reward_mean_exponent,
            w_m: self.reward_mean_weight,
            w_f: self.reward_flicker_weight,
            w_n: self.reward_noise_weight,
            mean_term_form: match self.reward_mean_term.as_str() {
                "closeness" => MeanTermForm::Closeness,
                "literal" => MeanTermForm::Literal,
                other => {
                    return Err(LabError::Format(format!(
                        "reward_mean_term {other:?} is neither \"closeness\" nor \"literal\""
                    )))
                }
            },
        })
    }

    pub fn action_scale(&self) -> ActionScale {
        ActionScale {
            exposure_factor: self.action_exposure_factor,
            gain_step_db: self.action_gain_step_db,
        }
    }

    pub fn camera(&self) -> CameraModel {
        CameraModel {
            t_ref_ms: self.camera_t_ref_ms,
            full_well: self.camera_full_well,
            read_noise_sigma: self.camera_read_noise_sigma,
            quantize_bits: self.camera_quantize_bits,
        }
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        Ok(EnvConfig {
            frame_size: (self.frame_height, self.frame_width),
            camera: self.camera(),
            reward: self.reward_config()?,
            action_scale: self.action_scale(),
            domain_randomization: self.domain_randomization,
            episode_len: self.episode_len,
        })
    }

    pub fn curriculum(&self) -> Result<CurriculumSchedule> {
        Ok(CurriculumSchedule {
            t_easy: self.curriculum_t_easy,
            t_normal: self.curriculum_t_normal,
            final_probs: (
                self.curriculum_final_easy,
                self.curriculum_final_normal,
                self.curriculum_final_hard,
            ),
            mode: match self.curriculum_mode.as_str() {
                "literal" => CurriculumMode::Literal,
                "monotone" => CurriculumMode::Monotone,
                other => {
                    return Err(LabError::Format(format!(
                        "curriculum_mode {other:?} is neither \"literal\" nor \"monotone\""
                    )))
                }
            },
        })
    }

    pub fn sac_config(&self) -> SacConfig {
        SacConfig {
            gamma: self.gamma,
            tau: self.tau,
            batch: self.batch_size,
            lr: self.learning_rate,
            initial_random_steps: self.initial_random_steps,
            total_steps: self.total_steps,
            eval_every: self.eval_every,
            target_entropy: self.target_entropy,
            replay_capacity: self.replay_capacity,
            hidden: self.hidden_layers.clone(),
            alpha_init: self.alpha_init,
        }
    }

    /// Builds the full training setup, validating strings and the compiled
    /// parameter box.
    pub fn to_setup(&self) -> Result<TrainSetup> {
        let compiled = [
            ("exposure_min_ms", self.exposure_min_ms, ExposureParams::EXPOSURE_MIN_MS),
            ("exposure_max_ms", self.exposure_max_ms, ExposureParams::EXPOSURE_MAX_MS),
            ("gain_min_db", self.gain_min_db, ExposureParams::GAIN_MIN_DB),
            ("gain_max_db", self.gain_max_db, ExposureParams::GAIN_MAX_DB),
        ];
        for (key, got, expect) in compiled {
            if got != expect {
                return Err(LabError::Format(format!(
                    "{key} = {got} contradicts the compiled camera limit {expect}"
                )));
            }
        }
        let setup = TrainSetup {
            env: self.env_config()?,
            sac: self.sac_config(),
            curriculum: self.curriculum()?,
            convergence_epsilon: self.convergence_epsilon,
            eval_episodes: self.eval_episodes,
        };
        setup.sac.validate()?;
        Ok(setup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = LabConfig::default();
        let text = cfg.to_toml();
        let parsed = LabConfig::parse(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn default_config_reproduces_the_default_setup() {
        let setup = LabConfig::default().to_setup().unwrap();
        let expect = TrainSetup::default();
        assert_eq!(setup.env.frame_size, expect.env.frame_size);
        assert_eq!(setup.env.reward, expect.env.reward);
        assert_eq!(setup.sac, expect.sac);
        assert_eq!(setup.curriculum, expect.curriculum);
        assert_eq!(setup.convergence_epsilon, expect.convergence_epsilon);
        assert_eq!(setup.eval_episodes, expect.eval_episodes);
    }

    #[test]
    fn missing_keys_take_defaults_and_present_keys_win() {
        let cfg = LabConfig::parse("gamma = 0.5\nhidden_layers = [32, 16]\n").unwrap();
        assert_eq!(cfg.gamma, 0.5);
        assert_eq!(cfg.hidden_layers, vec![32, 16]);
        assert_eq!(cfg.tau, LabConfig::default().tau);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = LabConfig::parse("gamm = 0.5\n").unwrap_err();
        assert!(matches!(err, LabError::Format(_)), "got {err:?}");
    }

    #[test]
    fn bad_enum_strings_are_rejected() {
        let cfg = LabConfig::parse("reward_mean_term = \"inverted\"\n").unwrap();
        assert!(cfg.reward_config().is_err());
        let cfg = LabConfig::parse("curriculum_mode = \"banana\"\n").unwrap();
        assert!(cfg.curriculum().is_err());
    }

    #[test]
    fn contradicting_the_compiled_box_fails() {
        let cfg = LabConfig::parse("exposure_max_ms = 250.0\n").unwrap();
        let err = cfg.to_setup().unwrap_err();
        assert!(err.to_string().contains("exposure_max_ms"), "got {err}");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lab.toml");
        let mut cfg = LabConfig::default();
        cfg.total_steps = 1234;
        cfg.save(&path).unwrap();
        assert_eq!(LabConfig::load(&path).unwrap(), cfg);
        assert!(LabConfig::load(dir.path().join("absent.toml")).is_err());
    }
}

//! The training loop: curriculum-driven episodes in the darkroom, replay,
//! one gradient update per environment step after warm-up, and periodic
//! held-out validation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::agent::{SacAgent, SacConfig};
use super::curriculum::CurriculumSchedule;
use super::replay::{ReplayBuffer, Transition};
use super::Action;
use crate::camsim::{sample_scenario, DarkroomEnv, Difficulty, EnvConfig, LightingScenario};
use crate::error::{LabError, Result};
use crate::harness::{convergence_index, converged_fraction, DEFAULT_EPSILON};
use crate::nn::Mlp;
use crate::percept::STATE_LEN;

/// Everything a training run needs besides its seed.
#[derive(Debug, Clone)]
pub struct TrainSetup {
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub curriculum: CurriculumSchedule,
    /// Threshold for the per-episode frames-to-converge log column.
    pub convergence_epsilon: f64,
    /// Held-out episodes per validation pass, spread over difficulties.
    pub eval_episodes: usize,
}

impl Default for TrainSetup {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            sac: SacConfig::default(),
            curriculum: CurriculumSchedule::default(),
            convergence_epsilon: DEFAULT_EPSILON,
            eval_episodes: 6,
        }
    }
}

/// One line of the training log, emitted when an episode finishes.
#[derive(Debug, Clone)]
pub struct EpisodeLogRow {
    /// Global environment step count at episode end.
    pub step: u64,
    pub episode: u64,
    pub difficulty: Difficulty,
    pub episode_return: f64,
    pub frames_to_converge: Option<usize>,
    pub alpha: f64,
    /// Mean losses over the episode's updates; absent during warm-up.
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
}

/// Periodic validation summary on the frozen held-out scenarios.
#[derive(Debug, Clone)]
pub struct EvalLogRow {
    pub step: u64,
    pub mean_return: f64,
    pub converged_fraction: f64,
}

pub struct TrainOutput {
    /// The trained policy network (greedy head in evaluation use).
    pub actor: Mlp<f32>,
    pub episodes: Vec<EpisodeLogRow>,
    pub evals: Vec<EvalLogRow>,
}

/// Serializes episode rows in the stable training-log schema.
pub fn write_training_log<W: std::io::Write>(
    rows: &[EpisodeLogRow],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "step",
        "episode",
        "difficulty",
        "return",
        "frames_to_converge",
        "alpha",
        "critic_loss",
        "actor_loss",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            r.episode.to_string(),
            r.difficulty.name().to_string(),
            format!("{:.6}", r.episode_return),
            r.frames_to_converge.map_or("-1".to_string(), |k| k.to_string()),
            format!("{:.6}", r.alpha),
            r.critic_loss.map_or(String::new(), |v| format!("{v:.6}")),
            r.actor_loss.map_or(String::new(), |v| format!("{v:.6}")),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Format(format!("csv write failed: {e}"))
}

fn to_f32(xs: &[f64]) -> Vec<f32> {
    xs.iter().map(|&x| x as f32).collect()
}

/// Runs SAC training to `total_steps`. Fully deterministic under `rng`:
/// every stochastic choice (environment seeds, network init, exploration,
/// replay sampling, curriculum draws) flows from it in a fixed order.
pub fn train<R: Rng>(
    setup: &TrainSetup,
    rng: &mut R,
    mut progress: Option<&mut dyn FnMut(&EpisodeLogRow)>,
) -> Result<TrainOutput> {
    setup.sac.validate()?;
    if !(setup.convergence_epsilon > 0.0) {
        return Err(LabError::Domain("convergence threshold must be positive".into()));
    }
    let env_seed: u64 = rng.gen();
    let mut env = DarkroomEnv::new(setup.env.clone(), env_seed);
    let mut agent: SacAgent<f32> = SacAgent::new(STATE_LEN, 2, setup.sac.clone(), rng)?;
    let mut replay = ReplayBuffer::new(STATE_LEN, 2, setup.sac.replay_capacity)?;

    // Freeze the validation suite up front so every pass sees the same
    // scenarios and the same environment noise stream.
    let mut eval_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let eval_set: Vec<(LightingScenario, Difficulty, u64)> = (0..setup.eval_episodes)
        .map(|i| {
            let difficulty = match i % 3 {
                0 => Difficulty::Easy,
                1 => Difficulty::Normal,
                _ => Difficulty::Hard,
            };
            let scenario = sample_scenario(difficulty, &mut eval_rng);
            (scenario, difficulty, eval_rng.gen())
        })
        .collect();
    let mut eval_env = DarkroomEnv::new(setup.env.clone(), eval_rng.gen());

    let sac = &setup.sac;
    let mut episodes = Vec::new();
    let mut evals = Vec::new();
    let mut step: u64 = 0;
    let mut episode: u64 = 0;

    while step < sac.total_steps {
        let difficulty = setup.curriculum.sample(episode, rng);
        let scenario = sample_scenario(difficulty, rng);
        let episode_seed: u64 = rng.gen();
        let mut state = env
            .reset_with(scenario, episode_seed, Some(difficulty))?
            .as_slice()
            .to_vec();
        episode += 1;

        let mut ep_return = 0.0;
        let mut diffs = Vec::with_capacity(env.episode_len());
        let mut critic_sum = 0.0;
        let mut actor_sum = 0.0;
        let mut updates = 0u64;

        loop {
            let action = if step < sac.initial_random_steps {
                Action {
                    a_exposure: rng.gen_range(-1.0..=1.0),
                    a_gain: rng.gen_range(-1.0..=1.0),
                }
            } else {
                let a = agent.stochastic_action(&state, rng).map_err(|e| {
                    LabError::Numeric(format!("policy failed at step {step}: {e}"))
                })?;
                Action::clamped(a[0], a[1])
            };
            let (next_state, reward, done) = env
                .step(action)
                .map_err(|e| LabError::State(format!("env failed at step {step}: {e}")))?;
            let next_state = next_state.as_slice().to_vec();
            ep_return += reward;
            diffs.push(env.last_flicker().unwrap_or(0.0));

            // Episodes end only by time limit, which is not a true terminal
            // state; bootstrapping continues through it.
            replay.push(&Transition {
                state: to_f32(&state),
                action: vec![action.a_exposure as f32, action.a_gain as f32],
                reward: reward as f32,
                next_state: to_f32(&next_state),
                done: false,
            })?;
            state = next_state;
            step += 1;

            if step > sac.initial_random_steps && replay.len() >= sac.batch {
                let batch = replay.sample_batch::<f32, _>(rng, sac.batch)?;
                let stats = agent.update(&batch, rng).map_err(|e| {
                    LabError::Numeric(format!("update failed at step {step}: {e}"))
                })?;
                critic_sum += stats.critic_loss;
                actor_sum += stats.actor_loss;
                updates += 1;
            }

            if step % sac.eval_every == 0 {
                evals.push(validate(&agent, &mut eval_env, &eval_set, setup, step)?);
            }
            if done || step >= sac.total_steps {
                break;
            }
        }

        let row = EpisodeLogRow {
            step,
            episode,
            difficulty,
            episode_return: ep_return,
            frames_to_converge: convergence_index(&diffs, setup.convergence_epsilon)?,
            alpha: agent.alpha(),
            critic_loss: (updates > 0).then(|| critic_sum / updates as f64),
            actor_loss: (updates > 0).then(|| actor_sum / updates as f64),
        };
        if let Some(cb) = progress.as_deref_mut() {
            cb(&row);
        }
        episodes.push(row);
    }

    Ok(TrainOutput { actor: agent.actor().clone(), episodes, evals })
}

fn validate(
    agent: &SacAgent<f32>,
    env: &mut DarkroomEnv,
    eval_set: &[(LightingScenario, Difficulty, u64)],
    setup: &TrainSetup,
    step: u64,
) -> Result<EvalLogRow> {
    let mut returns = 0.0;
    let mut results = Vec::with_capacity(eval_set.len());
    for (scenario, difficulty, seed) in eval_set {
        let mut state =
            env.reset_with(scenario.clone(), *seed, Some(*difficulty))?.as_slice().to_vec();
        let mut diffs = Vec::with_capacity(env.episode_len());
        loop {
            let a = agent.greedy_action(&state)?;
            let (next, reward, done) = env.step(Action::clamped(a[0], a[1]))?;
            returns += reward;
            diffs.push(env.last_flicker().unwrap_or(0.0));
            state = next.as_slice().to_vec();
            if done {
                break;
            }
        }
        results.push(convergence_index(&diffs, setup.convergence_epsilon)?);
    }
    Ok(EvalLogRow {
        step,
        mean_return: returns / eval_set.len() as f64,
        converged_fraction: converged_fraction(&results),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camsim::CameraModel;

    /// A configuration small enough for unit tests: short episodes, tiny
    /// networks, tiny warm-up.
    fn tiny_setup() -> TrainSetup {
        let mut setup = TrainSetup::default();
        setup.env.frame_size = (32, 32);
        setup.env.episode_len = 10;
        setup.env.camera = CameraModel::noiseless();
        setup.sac = SacConfig {
            batch: 8,
            hidden: vec![16, 16],
            initial_random_steps: 20,
            total_steps: 60,
            eval_every: 30,
            replay_capacity: 128,
            ..SacConfig::default()
        };
        setup.eval_episodes = 2;
        setup
    }

    #[test]
    fn identical_seeds_give_identical_logs() {
        let setup = tiny_setup();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            train(&setup, &mut rng, None).unwrap()
        };
        let (a, b) = (run(5), run(5));
        assert_eq!(a.episodes.len(), b.episodes.len());
        for (x, y) in a.episodes.iter().zip(&b.episodes) {
            assert_eq!(x.step, y.step);
            assert_eq!(x.episode, y.episode);
            assert_eq!(x.episode_return.to_bits(), y.episode_return.to_bits());
            assert_eq!(x.frames_to_converge, y.frames_to_converge);
            assert_eq!(x.alpha.to_bits(), y.alpha.to_bits());
        }
        assert_eq!(a.actor.params_f64(), b.actor.params_f64());
        let c = run(6);
        assert_ne!(
            a.episodes
                .iter()
                .map(|r| r.episode_return)
                .collect::<Vec<_>>(),
            c.episodes
                .iter()
                .map(|r| r.episode_return)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn warm_up_episodes_carry_no_losses() {
        let mut setup = tiny_setup();
        setup.sac.initial_random_steps = 1000;
        setup.sac.total_steps = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let out = train(&setup, &mut rng, None).unwrap();
        assert!(!out.episodes.is_empty());
        for row in &out.episodes {
            assert!(row.critic_loss.is_none());
            assert!(row.actor_loss.is_none());
        }
    }

    #[test]
    fn updates_begin_after_warm_up_and_losses_are_finite() {
        let setup = tiny_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let out = train(&setup, &mut rng, None).unwrap();
        let with_losses: Vec<_> =
            out.episodes.iter().filter(|r| r.critic_loss.is_some()).collect();
        assert!(!with_losses.is_empty());
        for row in with_losses {
            assert!(row.critic_loss.unwrap().is_finite());
            assert!(row.actor_loss.unwrap().is_finite());
            assert!(row.alpha > 0.0);
        }
    }

    #[test]
    fn step_counts_and_episode_numbers_advance_monotonically() {
        let setup = tiny_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = train(&setup, &mut rng, None).unwrap();
        let last = out.episodes.last().unwrap();
        assert_eq!(last.step, setup.sac.total_steps);
        for pair in out.episodes.windows(2) {
            assert!(pair[1].step > pair[0].step);
            assert_eq!(pair[1].episode, pair[0].episode + 1);
        }
        assert_eq!(out.evals.len(), 2);
        assert_eq!(out.evals[0].step, 30);
        assert_eq!(out.evals[1].step, 60);
    }

    #[test]
    fn training_log_csv_schema_is_stable() {
        let rows = vec![
            EpisodeLogRow {
                step: 10,
                episode: 1,
                difficulty: Difficulty::Easy,
                episode_return: 1.25,
                frames_to_converge: Some(3),
                alpha: 0.5,
                critic_loss: None,
                actor_loss: None,
            },
            EpisodeLogRow {
                step: 20,
                episode: 2,
                difficulty: Difficulty::Hard,
                episode_return: -0.5,
                frames_to_converge: None,
                alpha: 0.25,
                critic_loss: Some(0.125),
                actor_loss: Some(-0.75),
            },
        ];
        let mut buf = Vec::new();
        write_training_log(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,episode,difficulty,return,frames_to_converge,alpha,critic_loss,actor_loss"
        );
        assert_eq!(lines.next().unwrap(), "10,1,easy,1.250000,3,0.500000,,");
        assert_eq!(
            lines.next().unwrap(),
            "20,2,hard,-0.500000,-1,0.250000,0.125000,-0.750000"
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn progress_callback_sees_every_episode() {
        let setup = tiny_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut seen = 0usize;
        let mut cb = |_: &EpisodeLogRow| seen += 1;
        let out = train(&setup, &mut rng, Some(&mut cb)).unwrap();
        assert_eq!(seen, out.episodes.len());
    }
}

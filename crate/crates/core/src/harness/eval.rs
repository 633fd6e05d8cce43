//! Episode evaluation and controller comparison reports.

use std::io::Write;

use crate::camsim::{DarkroomEnv, EnvConfig, EvalScenario, ExposureParams};
use crate::dataset_env::GridEpisode;
use crate::error::{LabError, Result};
use crate::harness::controllers::{ControlRequest, Controller};
use crate::harness::convergence::{convergence_percentile, frames_to_converge};
use crate::imaging::Image;
use crate::sac::Action;

/// CSV stand-in for episodes that never converge.
pub const NOT_CONVERGED: i64 = -1;

/// Outcome of one evaluated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    pub scenario: String,
    pub controller: String,
    pub frames_to_converge: Option<usize>,
    pub reward_per_frame: f64,
    /// Mean frame-to-frame difference over the episode.
    pub flicker_index: f64,
    pub final_mean_intensity: f64,
}

/// Anything that can play out one exposure-control episode frame by frame.
///
/// Both the live darkroom simulator and pre-captured grid replays implement
/// this, so every controller is scored by the same loop.
pub trait EpisodeDriver {
    /// Human-readable scenario label for report rows.
    fn descriptor(&self) -> String;
    /// True when an episode has been started and no steps taken yet.
    fn ready(&self) -> bool;
    fn state_slice(&self) -> &[f64];
    fn current_params(&self) -> ExposureParams;
    fn patch(&self) -> &Image;
    /// Frame difference produced by the latest step.
    fn flicker(&self) -> f64;
    fn done(&self) -> bool;
    /// Applies a control request, captures the next frame, returns the reward.
    fn apply(&mut self, request: &ControlRequest) -> Result<f64>;
}

impl EpisodeDriver for DarkroomEnv {
    fn descriptor(&self) -> String {
        match (self.scenario(), self.difficulty()) {
            (Some(s), d) => format!(
                "{}{} {:.3}->{:.3}",
                d.map(|d| format!("{} ", d.name())).unwrap_or_default(),
                s.kind.name(),
                s.level_start,
                s.level_end
            ),
            (None, _) => "unstarted".into(),
        }
    }

    fn ready(&self) -> bool {
        self.state().is_some() && self.steps_taken() == 0 && !self.is_done()
    }

    fn state_slice(&self) -> &[f64] {
        self.state().expect("episode started").as_slice()
    }

    fn current_params(&self) -> ExposureParams {
        self.params().expect("episode started")
    }

    fn patch(&self) -> &Image {
        self.last_patch().expect("episode started")
    }

    fn flicker(&self) -> f64 {
        self.last_flicker().unwrap_or(0.0)
    }

    fn done(&self) -> bool {
        self.is_done()
    }

    fn apply(&mut self, request: &ControlRequest) -> Result<f64> {
        let (_, reward, _) = match *request {
            ControlRequest::Hold => self.step(Action::clamped(0.0, 0.0))?,
            ControlRequest::Relative(a) => self.step(a)?,
            ControlRequest::Absolute(p) => self.step_absolute(p)?,
        };
        Ok(reward)
    }
}

impl EpisodeDriver for GridEpisode<'_> {
    fn descriptor(&self) -> String {
        format!("grid-{}c", self.grid().manifest().cells())
    }

    fn ready(&self) -> bool {
        self.steps_taken() == 0 && !self.is_done()
    }

    fn state_slice(&self) -> &[f64] {
        self.state().as_slice()
    }

    fn current_params(&self) -> ExposureParams {
        self.params()
    }

    fn patch(&self) -> &Image {
        self.last_patch()
    }

    fn flicker(&self) -> f64 {
        self.last_flicker().unwrap_or(0.0)
    }

    fn done(&self) -> bool {
        self.is_done()
    }

    fn apply(&mut self, request: &ControlRequest) -> Result<f64> {
        let (_, reward, _) = match *request {
            ControlRequest::Hold => self.step(Action::clamped(0.0, 0.0))?,
            ControlRequest::Relative(a) => self.step(a)?,
            ControlRequest::Absolute(p) => self.step_absolute(p)?,
        };
        Ok(reward)
    }
}

/// Plays one full episode under `controller` and summarizes it.
///
/// The driver must be freshly reset. The controller is reset here, then asked
/// once per frame; convergence is judged on the full captured-patch sequence
/// with threshold `epsilon`.
pub fn run_episode_eval<E: EpisodeDriver + ?Sized>(
    env: &mut E,
    controller: &mut dyn Controller,
    epsilon: f64,
) -> Result<EpisodeReport> {
    if !env.ready() {
        return Err(LabError::State(
            "run_episode_eval needs a freshly reset episode".into(),
        ));
    }
    controller.reset();
    let mut frames = vec![env.patch().clone()];
    let mut reward_sum = 0.0;
    let mut flicker_sum = 0.0;
    let mut steps = 0usize;
    while !env.done() {
        let request =
            controller.decide(env.state_slice(), env.patch(), env.current_params())?;
        let reward = env.apply(&request)?;
        reward_sum += reward;
        flicker_sum += env.flicker();
        steps += 1;
        frames.push(env.patch().clone());
    }
    let converged = frames_to_converge(&frames, epsilon)?;
    debug_assert!(converged.map_or(true, |k| (1..=steps).contains(&k)));
    Ok(EpisodeReport {
        scenario: env.descriptor(),
        controller: controller.name().to_string(),
        frames_to_converge: converged,
        reward_per_frame: reward_sum / steps as f64,
        flicker_index: flicker_sum / steps as f64,
        final_mean_intensity: frames.last().expect("at least the seed frame").mean(),
    })
}

/// Column header shared by every comparison CSV.
pub const COMPARE_CSV_HEADER: &str = "record,controller,scenario,frames_to_converge,\
reward_per_frame,flicker_index,final_mean_intensity,ftc_median,ftc_p90";

fn ftc_cell(v: Option<usize>) -> String {
    v.map_or_else(|| NOT_CONVERGED.to_string(), |k| k.to_string())
}

/// Runs every controller over every scenario and writes the report CSV.
///
/// Episode rows come out ordered by (controller, scenario index), followed by
/// one summary row per controller carrying the median and 90th-percentile
/// frames-to-converge. Returns the episode reports in row order.
pub fn compare<W: Write>(
    controllers: &mut [Box<dyn Controller>],
    scenarios: &[EvalScenario],
    cfg: &EnvConfig,
    epsilon: f64,
    mut out: W,
) -> Result<Vec<EpisodeReport>> {
    if controllers.is_empty() || scenarios.is_empty() {
        return Err(LabError::Argument(
            "compare needs at least one controller and one scenario".into(),
        ));
    }
    writeln!(out, "{COMPARE_CSV_HEADER}")?;
    let mut reports = Vec::with_capacity(controllers.len() * scenarios.len());
    let mut env = DarkroomEnv::new(*cfg, 0);
    for controller in controllers.iter_mut() {
        let mut ftcs = Vec::with_capacity(scenarios.len());
        for (index, s) in scenarios.iter().enumerate() {
            env.reset_with(s.scenario, s.seed, Some(s.difficulty))?;
            let mut report = run_episode_eval(&mut env, controller.as_mut(), epsilon)?;
            report.scenario = format!("{index}:{}", report.scenario);
            writeln!(
                out,
                "episode,{},{},{},{:.6},{:.6},{:.6},,",
                report.controller,
                report.scenario,
                ftc_cell(report.frames_to_converge),
                report.reward_per_frame,
                report.flicker_index,
                report.final_mean_intensity,
            )?;
            ftcs.push(report.frames_to_converge);
            reports.push(report);
        }
        let median = convergence_percentile(&ftcs, 50.0);
        let p90 = convergence_percentile(&ftcs, 90.0);
        writeln!(
            out,
            "summary,{},all,,,,,{},{}",
            controller.name(),
            ftc_cell(median),
            ftc_cell(p90),
        )?;
    }
    Ok(reports)
}

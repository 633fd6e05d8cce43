//! Scripted illuminance scenarios and their difficulty-based samplers.

use std::io::{BufRead, Write};

use rand::Rng;

use super::{EPISODE_LEN, L_MAX, L_MIN};
use crate::error::{LabError, Result};

/// Scenario difficulty levels used by the training curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Normal,
    Hard,
}

impl Difficulty {
    pub fn name(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Normal => "normal",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "normal" => Ok(Difficulty::Normal),
            "hard" => Ok(Difficulty::Hard),
            other => Err(LabError::Format(format!("unknown difficulty {other:?}"))),
        }
    }
}

/// Temporal illuminance pattern of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Constant,
    Step,
    LinearRamp,
    Sinusoid,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Constant => "constant",
            ScenarioKind::Step => "step",
            ScenarioKind::LinearRamp => "linear_ramp",
            ScenarioKind::Sinusoid => "sinusoid",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(ScenarioKind::Constant),
            "step" => Ok(ScenarioKind::Step),
            "linear_ramp" => Ok(ScenarioKind::LinearRamp),
            "sinusoid" => Ok(ScenarioKind::Sinusoid),
            other => Err(LabError::Format(format!("unknown scenario kind {other:?}"))),
        }
    }
}

/// Scripted lighting over an episode. Levels are relative illuminance in
/// `[0.01, 100]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightingScenario {
    pub kind: ScenarioKind,
    pub level_start: f64,
    pub level_end: f64,
    /// Step index at which a step change fires (step kind only).
    pub change_step: usize,
    /// Oscillation period in steps (sinusoid kind only).
    pub period: usize,
}

fn check_level(l: f64) -> Result<f64> {
    if (L_MIN..=L_MAX).contains(&l) {
        Ok(l)
    } else {
        Err(LabError::Domain(format!("illuminance {l} outside [{L_MIN}, {L_MAX}]")))
    }
}

impl LightingScenario {
    pub fn constant(level: f64) -> Result<Self> {
        Ok(Self {
            kind: ScenarioKind::Constant,
            level_start: check_level(level)?,
            level_end: level,
            change_step: 0,
            period: 0,
        })
    }

    pub fn step(start: f64, end: f64, change_step: usize) -> Result<Self> {
        Ok(Self {
            kind: ScenarioKind::Step,
            level_start: check_level(start)?,
            level_end: check_level(end)?,
            change_step,
            period: 0,
        })
    }

    pub fn linear_ramp(start: f64, end: f64) -> Result<Self> {
        Ok(Self {
            kind: ScenarioKind::LinearRamp,
            level_start: check_level(start)?,
            level_end: check_level(end)?,
            change_step: 0,
            period: 0,
        })
    }

    pub fn sinusoid(start: f64, end: f64, period: usize) -> Result<Self> {
        if period < 2 {
            return Err(LabError::Domain(format!("sinusoid period {period} below 2")));
        }
        Ok(Self {
            kind: ScenarioKind::Sinusoid,
            level_start: check_level(start)?,
            level_end: check_level(end)?,
            change_step: 0,
            period,
        })
    }
}

/// Illuminance at an episode step.
///
/// Constant scenarios hold their level; step scenarios switch to the end
/// level once `step >= change_step`; linear ramps interpolate over the
/// 200-step episode; sinusoids oscillate between the two levels in log
/// space, starting at the start level.
pub fn illuminance_at(scenario: &LightingScenario, step: usize) -> f64 {
    match scenario.kind {
        ScenarioKind::Constant => scenario.level_start,
        ScenarioKind::Step => {
            if step < scenario.change_step {
                scenario.level_start
            } else {
                scenario.level_end
            }
        }
        ScenarioKind::LinearRamp => {
            let t = (step as f64 / EPISODE_LEN as f64).min(1.0);
            scenario.level_start + (scenario.level_end - scenario.level_start) * t
        }
        ScenarioKind::Sinusoid => {
            let mid = 0.5 * (scenario.level_start.ln() + scenario.level_end.ln());
            let amp = 0.5 * (scenario.level_end.ln() - scenario.level_start.ln());
            let phase = 2.0 * std::f64::consts::PI * step as f64 / scenario.period as f64;
            (mid - amp * phase.cos()).exp()
        }
    }
}

/// Draws a scenario of the requested difficulty.
///
/// Easy: constant level in `[0.5, 5]`. Normal: constant level drawn from
/// `[0.01, 0.5]` or `[5, 100]` with equal probability per side. Hard: step,
/// ramp, or sinusoid whose start and end levels differ by at least a factor
/// of ten in either direction.
pub fn sample_scenario<R: Rng>(level: Difficulty, rng: &mut R) -> LightingScenario {
    match level {
        Difficulty::Easy => {
            LightingScenario::constant(rng.gen_range(0.5..=5.0)).expect("in range")
        }
        Difficulty::Normal => {
            let l = if rng.gen_bool(0.5) {
                rng.gen_range(L_MIN..=0.5)
            } else {
                rng.gen_range(5.0..=L_MAX)
            };
            LightingScenario::constant(l).expect("in range")
        }
        Difficulty::Hard => {
            // Log-uniform start in [0.01, 10]; the span ratio is log-uniform
            // in [10, L_MAX / start] so the end level stays in range.
            let start = (rng.gen_range(L_MIN.ln()..=10f64.ln())).exp();
            let max_ratio = L_MAX / start;
            let ratio = (rng.gen_range(10f64.ln()..=max_ratio.ln())).exp();
            let (mut a, mut b) = (start, (start * ratio).min(L_MAX));
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut a, &mut b);
            }
            match rng.gen_range(0..3u8) {
                0 => LightingScenario::step(a, b, rng.gen_range(50..150)).expect("in range"),
                1 => LightingScenario::linear_ramp(a, b).expect("in range"),
                _ => LightingScenario::sinusoid(a, b, rng.gen_range(100..=200))
                    .expect("in range"),
            }
        }
    }
}

/// One evaluation episode: a scenario plus the seed that fixes the scene,
/// augmentation, and initial exposure parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalScenario {
    pub scenario: LightingScenario,
    pub seed: u64,
    pub difficulty: Difficulty,
}

/// Writes scenarios as a plain-text pack: one `key value` pair per line,
/// blank line between scenarios, `#` comments ignored.
pub fn write_scenario_pack<W: Write>(scenarios: &[EvalScenario], mut out: W) -> Result<()> {
    for (i, s) in scenarios.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "kind {}", s.scenario.kind.name())?;
        writeln!(out, "level_start {}", s.scenario.level_start)?;
        writeln!(out, "level_end {}", s.scenario.level_end)?;
        writeln!(out, "change_step {}", s.scenario.change_step)?;
        writeln!(out, "period {}", s.scenario.period)?;
        writeln!(out, "seed {}", s.seed)?;
        writeln!(out, "difficulty {}", s.difficulty.name())?;
    }
    Ok(())
}

/// Parses a scenario pack written by [`write_scenario_pack`].
pub fn read_scenario_pack<R: BufRead>(reader: R) -> Result<Vec<EvalScenario>> {
    let mut scenarios = Vec::new();
    let mut fields: Vec<(String, String)> = Vec::new();
    let mut flush = |fields: &mut Vec<(String, String)>| -> Result<()> {
        if fields.is_empty() {
            return Ok(());
        }
        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| LabError::Format(format!("scenario pack missing key {key:?}")))
        };
        let parse_f = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| LabError::Format(format!("bad number for {key:?}")))
        };
        let parse_u = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| LabError::Format(format!("bad integer for {key:?}")))
        };
        let kind: ScenarioKind = get("kind")?.parse()?;
        let scenario = LightingScenario {
            kind,
            level_start: check_level(parse_f("level_start")?)?,
            level_end: check_level(parse_f("level_end")?)?,
            change_step: parse_u("change_step")?,
            period: parse_u("period")?,
        };
        if kind == ScenarioKind::Sinusoid && scenario.period < 2 {
            return Err(LabError::Format("sinusoid scenario needs period >= 2".into()));
        }
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|_| LabError::Format("bad integer for \"seed\"".into()))?;
        let difficulty: Difficulty = get("difficulty")?.parse()?;
        scenarios.push(EvalScenario { scenario, seed, difficulty });
        fields.clear();
        Ok(())
    };
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut fields)?;
            continue;
        }
        match line.split_once(char::is_whitespace) {
            Some((k, v)) => fields.push((k.to_string(), v.trim().to_string())),
            None => {
                return Err(LabError::Format(format!(
                    "scenario pack line {line:?} is not a key-value pair"
                )))
            }
        }
    }
    flush(&mut fields)?;
    Ok(scenarios)
}

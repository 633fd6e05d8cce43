//! Episode-count curriculum over scenario difficulty.

use rand::Rng;

use crate::camsim::Difficulty;

/// Which shape the middle branch of the schedule takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurriculumMode {
    /// The published piecewise formulas as printed: between the two
    /// thresholds the easy probability rises from 0 back toward 1 while the
    /// normal probability falls, leaving a discontinuity at each threshold.
    #[default]
    Literal,
    /// Same branches with the easy/normal roles swapped in the middle, so
    /// the mix moves continuously from all-easy through all-normal.
    Monotone,
}

/// Difficulty mixture as a function of completed episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurriculumSchedule {
    /// Episode count at which the easy-only phase ends.
    pub t_easy: u64,
    /// Episode count at which the final mixture takes over.
    pub t_normal: u64,
    /// Final probabilities (easy, normal, hard).
    pub final_probs: (f64, f64, f64),
    pub mode: CurriculumMode,
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self {
            t_easy: 25_000,
            t_normal: 45_000,
            final_probs: (0.1, 0.4, 0.5),
            mode: CurriculumMode::Literal,
        }
    }
}

impl CurriculumSchedule {
    /// Probabilities `(p_easy, p_normal, p_hard)` after `t_e` episodes.
    /// Always sums to one.
    pub fn probs(&self, t_e: u64) -> (f64, f64, f64) {
        if t_e < self.t_easy {
            (1.0, 0.0, 0.0)
        } else if t_e < self.t_normal {
            let x = (t_e - self.t_easy) as f64 / (self.t_normal - self.t_easy) as f64;
            match self.mode {
                CurriculumMode::Literal => (x, 1.0 - x, 0.0),
                CurriculumMode::Monotone => (1.0 - x, x, 0.0),
            }
        } else {
            self.final_probs
        }
    }

    /// Draws a difficulty by inverse CDF over the current probabilities.
    pub fn sample<R: Rng>(&self, t_e: u64, rng: &mut R) -> Difficulty {
        let (pe, pn, _) = self.probs(t_e);
        let u: f64 = rng.gen();
        if u < pe {
            Difficulty::Easy
        } else if u < pe + pn {
            Difficulty::Normal
        } else {
            Difficulty::Hard
        }
    }
}

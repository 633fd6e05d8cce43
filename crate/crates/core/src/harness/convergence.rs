//! When has an exposure controller settled? A frame sequence counts as
//! converged at index `k` when the mean absolute difference to the previous
//! frame stays under a threshold for two consecutive comparisons.

use crate::error::{LabError, Result};
use crate::imaging::Image;
use crate::percept::r_flk;

/// Default convergence threshold in mean-absolute-intensity units.
pub const DEFAULT_EPSILON: f64 = 0.02;

/// Scans a series of consecutive-frame differences `d_1, d_2, ...` and
/// returns the smallest `k` with `d_k < epsilon` and `d_{k+1} < epsilon`,
/// or `None` when no such pair exists. The confirming diff must exist, so
/// a single trailing sub-threshold diff does not count.
pub fn convergence_index(diffs: &[f64], epsilon: f64) -> Result<Option<usize>> {
    if !(epsilon > 0.0) {
        return Err(LabError::Argument(format!(
            "convergence threshold must be positive, got {epsilon}"
        )));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(LabError::Numeric("non-finite frame difference".into()));
    }
    for k in 0..diffs.len().saturating_sub(1) {
        if diffs[k] < epsilon && diffs[k + 1] < epsilon {
            return Ok(Some(k + 1));
        }
    }
    Ok(None)
}

/// [`convergence_index`] over rendered frames: differences are mean absolute
/// intensity changes between consecutive frames, indexed from 1.
pub fn frames_to_converge(frames: &[Image], epsilon: f64) -> Result<Option<usize>> {
    if frames.len() < 2 {
        return Err(LabError::Argument(format!(
            "need at least two frames to assess convergence, got {}",
            frames.len()
        )));
    }
    let diffs = frames
        .windows(2)
        .map(|pair| r_flk(&pair[1], &pair[0]))
        .collect::<Result<Vec<f64>>>()?;
    convergence_index(&diffs, epsilon)
}

/// Nearest-rank percentile of a value list, `p` in (0, 100]. `None` on an
/// empty list.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(p > 0.0 && p <= 100.0) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Nearest-rank percentile of convergence results where unconverged
/// episodes (`None`) rank above every finite index. Returns `None` when the
/// rank falls among unconverged entries or the list is empty.
pub fn convergence_percentile(results: &[Option<usize>], p: f64) -> Option<usize> {
    if results.is_empty() || !(p > 0.0 && p <= 100.0) {
        return None;
    }
    let mut converged: Vec<usize> = results.iter().flatten().copied().collect();
    converged.sort_unstable();
    let rank = ((p / 100.0) * results.len() as f64).ceil() as usize;
    let idx = rank.clamp(1, results.len()) - 1;
    converged.get(idx).copied()
}

/// Fraction of episodes that converged at all.
pub fn converged_fraction(results: &[Option<usize>]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().filter(|r| r.is_some()).count() as f64 / results.len() as f64
}

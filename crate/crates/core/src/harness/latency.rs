//! Wall-clock measurement of the per-frame control path.

use std::time::Instant;

use crate::error::{LabError, Result};
use crate::imaging::{resize_bilinear, Image};
use crate::nn::Mlp;
use crate::par;
use crate::percept::{push_state, vectorize_patch, StateVector, PROFILE_LEN, STATE_LEN};

/// Order statistics of a latency sample, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    pub min_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
}

impl LatencyStats {
    fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_by(|a, b| a.partial_cmp(b).expect("durations are finite"));
        let rank = |p: f64| {
            let n = samples.len();
            let k = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
            samples[k - 1]
        };
        Self { min_ms: samples[0], median_ms: rank(50.0), p99_ms: rank(99.0) }
    }
}

/// Latency of the two stages of the control path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyReport {
    pub iterations: usize,
    /// Scaling the source frame down to the working resolution.
    pub resize: LatencyStats,
    /// Intensity-profile extraction, state update, and actor forward pass.
    pub policy: LatencyStats,
}

/// Times `iterations` passes of resize, state construction, and the actor
/// forward on one thread. The resize stage is reported separately because it
/// is the only part that depends on the source resolution.
pub fn bench_latency(actor: &Mlp<f32>, source: &Image, iterations: usize) -> Result<LatencyReport> {
    if iterations < 1000 {
        return Err(LabError::Argument(format!(
            "latency needs at least 1000 iterations to report a p99, got {iterations}"
        )));
    }
    let dims = actor.dims();
    if dims[0] != STATE_LEN {
        return Err(LabError::Argument(format!(
            "actor input width {} does not match the state length {STATE_LEN}",
            dims[0]
        )));
    }
    par::single_threaded(move || {
        let mut resize_ms = Vec::with_capacity(iterations);
        let mut policy_ms = Vec::with_capacity(iterations);
        let mut state = StateVector::seeded(&vectorize_patch(source));
        let mut row = vec![0.0f32; STATE_LEN];
        let mut sink = 0.0f32;
        for _ in 0..iterations {
            let t0 = Instant::now();
            let working = resize_bilinear(source, PROFILE_LEN, PROFILE_LEN)?;
            let t1 = Instant::now();
            state = push_state(&state, &vectorize_patch(&working));
            for (dst, &src) in row.iter_mut().zip(state.as_slice()) {
                *dst = src as f32;
            }
            let head = actor.forward_row(&row)?;
            let t2 = Instant::now();
            sink += head[0];
            resize_ms.push(t1.duration_since(t0).as_secs_f64() * 1e3);
            policy_ms.push(t2.duration_since(t1).as_secs_f64() * 1e3);
        }
        std::hint::black_box(sink);
        Ok(LatencyReport {
            iterations,
            resize: LatencyStats::from_samples(resize_ms),
            policy: LatencyStats::from_samples(policy_ms),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::save_mlp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_actor() -> Mlp<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        Mlp::new(&[STATE_LEN, 8, 4], &mut rng).unwrap()
    }

    fn noise_frame(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| ((r * 31 + c * 17) % 97) as f64 / 96.0).unwrap()
    }

    #[test]
    fn stats_are_ordered_and_iteration_count_is_enforced() {
        let actor = small_actor();
        let frame = noise_frame(128, 128);
        assert!(bench_latency(&actor, &frame, 999).is_err());
        let report = bench_latency(&actor, &frame, 1000).unwrap();
        assert_eq!(report.iterations, 1000);
        for stats in [report.resize, report.policy] {
            assert!(stats.min_ms > 0.0);
            assert!(stats.min_ms <= stats.median_ms);
            assert!(stats.median_ms <= stats.p99_ms);
        }
    }

    #[test]
    fn consecutive_runs_agree_within_half() {
        let actor = small_actor();
        let frame = noise_frame(128, 128);
        let a = bench_latency(&actor, &frame, 1500).unwrap().policy.median_ms;
        let b = bench_latency(&actor, &frame, 1500).unwrap().policy.median_ms;
        assert!(a <= 1.5 * b && b <= 1.5 * a, "medians drifted: {a:.6} vs {b:.6} ms");
    }

    #[test]
    fn policy_stage_is_insensitive_to_source_resolution() {
        let actor = small_actor();
        let small = bench_latency(&actor, &noise_frame(128, 128), 1500).unwrap();
        let large = bench_latency(&actor, &noise_frame(640, 480), 1500).unwrap();
        let (a, b) = (small.policy.median_ms, large.policy.median_ms);
        assert!(
            a <= 1.5 * b && b <= 1.5 * a,
            "policy medians depend on resolution: {a:.6} vs {b:.6} ms"
        );
    }

    #[test]
    fn benchmarking_leaves_the_checkpoint_bytes_untouched() {
        let actor = small_actor();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actor.ckpt");
        save_mlp(&actor, &path).unwrap();
        let before = std::fs::read(&path).unwrap();
        bench_latency(&actor, &noise_frame(128, 128), 1000).unwrap();
        save_mlp(&actor, &path).unwrap();
        let after = std::fs::read(&path).unwrap();
        assert_eq!(before, after);
    }
}

//! Uniform experience replay over a fixed-capacity ring.
//!
//! Storage is flat `f32`, grown lazily up to `capacity` so an
//! under-filled buffer costs only what it holds.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{LabError, Result};
use crate::nn::Element;

/// One environment step as seen by the learner.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f32>,
    pub action: Vec<f32>,
    pub reward: f32,
    pub next_state: Vec<f32>,
    pub done: bool,
}

/// A sampled minibatch, already shaped for network input.
pub struct Batch<F> {
    pub states: Array2<F>,
    pub actions: Array2<F>,
    pub rewards: Array1<F>,
    pub next_states: Array2<F>,
    pub dones: Array1<F>,
}

pub struct ReplayBuffer {
    state_dim: usize,
    action_dim: usize,
    capacity: usize,
    next: usize,
    len: usize,
    states: Vec<f32>,
    actions: Vec<f32>,
    rewards: Vec<f32>,
    next_states: Vec<f32>,
    dones: Vec<f32>,
}

impl ReplayBuffer {
    pub const DEFAULT_CAPACITY: usize = 1_000_000;

    pub fn new(state_dim: usize, action_dim: usize, capacity: usize) -> Result<Self> {
        if state_dim == 0 || action_dim == 0 || capacity == 0 {
            return Err(LabError::Dimension(
                "replay buffer dimensions and capacity must be positive".into(),
            ));
        }
        Ok(Self {
            state_dim,
            action_dim,
            capacity,
            next: 0,
            len: 0,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            dones: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: &Transition) -> Result<()> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(LabError::Dimension(format!(
                "transition state widths {}/{} do not match buffer width {}",
                t.state.len(),
                t.next_state.len(),
                self.state_dim
            )));
        }
        if t.action.len() != self.action_dim {
            return Err(LabError::Dimension(format!(
                "transition action width {} does not match buffer width {}",
                t.action.len(),
                self.action_dim
            )));
        }
        let done = if t.done { 1.0 } else { 0.0 };
        if self.len < self.capacity {
            self.states.extend_from_slice(&t.state);
            self.actions.extend_from_slice(&t.action);
            self.rewards.push(t.reward);
            self.next_states.extend_from_slice(&t.next_state);
            self.dones.push(done);
            self.len += 1;
        } else {
            let i = self.next;
            self.states[i * self.state_dim..(i + 1) * self.state_dim]
                .copy_from_slice(&t.state);
            self.actions[i * self.action_dim..(i + 1) * self.action_dim]
                .copy_from_slice(&t.action);
            self.rewards[i] = t.reward;
            self.next_states[i * self.state_dim..(i + 1) * self.state_dim]
                .copy_from_slice(&t.next_state);
            self.dones[i] = done;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    /// Samples `batch` rows uniformly with replacement.
    pub fn sample_batch<F: Element, R: Rng>(
        &self,
        rng: &mut R,
        batch: usize,
    ) -> Result<Batch<F>> {
        if self.len == 0 {
            return Err(LabError::State("cannot sample from an empty replay buffer".into()));
        }
        if batch == 0 {
            return Err(LabError::Dimension("batch size must be positive".into()));
        }
        let mut states = Array2::zeros((batch, self.state_dim));
        let mut actions = Array2::zeros((batch, self.action_dim));
        let mut rewards = Array1::zeros(batch);
        let mut next_states = Array2::zeros((batch, self.state_dim));
        let mut dones = Array1::zeros(batch);
        for row in 0..batch {
            let i = rng.gen_range(0..self.len);
            for d in 0..self.state_dim {
                states[(row, d)] = F::from_f64(self.states[i * self.state_dim + d] as f64);
                next_states[(row, d)] =
                    F::from_f64(self.next_states[i * self.state_dim + d] as f64);
            }
            for d in 0..self.action_dim {
                actions[(row, d)] = F::from_f64(self.actions[i * self.action_dim + d] as f64);
            }
            rewards[row] = F::from_f64(self.rewards[i] as f64);
            dones[row] = F::from_f64(self.dones[i] as f64);
        }
        Ok(Batch { states, actions, rewards, next_states, dones })
    }

    /// Reads one stored transition back out, oldest-write order not preserved
    /// after wrap; mainly for tests and diagnostics.
    pub fn get(&self, i: usize) -> Option<Transition> {
        if i >= self.len {
            return None;
        }
        Some(Transition {
            state: self.states[i * self.state_dim..(i + 1) * self.state_dim].to_vec(),
            action: self.actions[i * self.action_dim..(i + 1) * self.action_dim].to_vec(),
            reward: self.rewards[i],
            next_state: self.next_states[i * self.state_dim..(i + 1) * self.state_dim]
                .to_vec(),
            done: self.dones[i] > 0.5,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tagged(tag: f32) -> Transition {
        Transition {
            state: vec![tag; 3],
            action: vec![tag, -tag],
            reward: tag,
            next_state: vec![tag + 0.5; 3],
            done: tag as i64 % 2 == 0,
        }
    }

    #[test]
    fn fills_then_wraps_overwriting_oldest_slot() {
        let mut buf = ReplayBuffer::new(3, 2, 4).unwrap();
        for k in 0..4 {
            buf.push(&tagged(k as f32)).unwrap();
        }
        assert_eq!(buf.len(), 4);
        buf.push(&tagged(99.0)).unwrap();
        assert_eq!(buf.len(), 4);
        assert_eq!(buf.get(0).unwrap().reward, 99.0);
        assert_eq!(buf.get(1).unwrap().reward, 1.0);
        buf.push(&tagged(98.0)).unwrap();
        assert_eq!(buf.get(1).unwrap().reward, 98.0);
    }

    #[test]
    fn sampling_is_uniform_over_contents() {
        let mut buf = ReplayBuffer::new(1, 1, 200).unwrap();
        for k in 0..100 {
            buf.push(&Transition {
                state: vec![k as f32],
                action: vec![0.0],
                reward: k as f32,
                next_state: vec![0.0],
                done: false,
            })
            .unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let mut counts = vec![0u32; 100];
        let draws = 100_000;
        let per_call = 50;
        for _ in 0..draws / per_call {
            let b: Batch<f32> = buf.sample_batch(&mut rng, per_call).unwrap();
            for r in 0..per_call {
                counts[b.rewards[r] as usize] += 1;
            }
        }
        // Binomial(100000, 1/100): mean 1000, sigma ~ 31.5; accept 5 sigma.
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - 1000.0).abs() < 5.0 * 31.5,
                "index {i} drawn {c} times"
            );
        }
    }

    #[test]
    fn batch_shapes_and_round_trip_values() {
        let mut buf = ReplayBuffer::new(3, 2, 10).unwrap();
        buf.push(&tagged(7.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let b: Batch<f64> = buf.sample_batch(&mut rng, 5).unwrap();
        assert_eq!(b.states.dim(), (5, 3));
        assert_eq!(b.actions.dim(), (5, 2));
        assert_eq!(b.rewards.len(), 5);
        assert_eq!(b.next_states.dim(), (5, 3));
        assert_eq!(b.dones.len(), 5);
        assert_eq!(b.states[(0, 0)], 7.0);
        assert_eq!(b.actions[(0, 1)], -7.0);
        assert_eq!(b.next_states[(0, 2)], 7.5);
    }

    #[test]
    fn rejects_bad_shapes_and_empty_sampling() {
        assert!(ReplayBuffer::new(0, 2, 10).is_err());
        let mut buf = ReplayBuffer::new(3, 2, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        assert!(matches!(
            buf.sample_batch::<f32, _>(&mut rng, 4),
            Err(LabError::State(_))
        ));
        let mut bad = tagged(1.0);
        bad.action = vec![1.0];
        assert!(buf.push(&bad).is_err());
        let mut bad = tagged(1.0);
        bad.state = vec![1.0; 2];
        assert!(buf.push(&bad).is_err());
    }
}

//! Age of information and virtual queue bookkeeping.

use serde::{Deserialize, Serialize};

/// AoI at the start of the next slot: 1 after a sample, otherwise one more.
#[inline]
pub fn step_aoi(aoi: u32, sampled: bool) -> u32 {
    if sampled {
        1
    } else {
        aoi + 1
    }
}

/// Virtual queue update `max(Q - delta_max, 0) + aoi_next`.
#[inline]
pub fn step_queue(queue: f64, delta_max: f64, aoi_next: u32) -> f64 {
    (queue - delta_max).max(0.0) + f64::from(aoi_next)
}

/// Per-sensor coefficient of `b_k` in the per-slot objective,
/// `(1 - (aoi + 1)^2 - 2 Q aoi) / 2`. Never positive.
#[inline]
pub fn sampling_weight(aoi: u32, queue: f64) -> f64 {
    let d = f64::from(aoi);
    0.5 * (1.0 - (d + 1.0) * (d + 1.0) - 2.0 * queue * d)
}

/// Quadratic Lyapunov function `sum Q_k^2 / 2`.
pub fn lyapunov(queues: &[f64]) -> f64 {
    0.5 * queues.iter().map(|q| q * q).sum::<f64>()
}

/// Constant of the drift bound, `sum_k (delta_max_k^2 + aoi_max^2) / 2`,
/// with `aoi_max` the largest AoI seen.
pub fn theorem_b(delta_max: &[f64], aoi_max: u32) -> f64 {
    let d2 = f64::from(aoi_max).powi(2);
    0.5 * delta_max.iter().map(|dm| dm * dm + d2).sum::<f64>()
}

/// Per-sensor AoI and virtual queue backlog at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub slot: u64,
    pub aoi: Vec<u32>,
    pub queues: Vec<f64>,
}

impl NetworkState {
    /// All AoI and queues at zero, slot 0.
    pub fn initial(sensors: usize) -> Self {
        NetworkState {
            slot: 0,
            aoi: vec![0; sensors],
            queues: vec![0.0; sensors],
        }
    }

    pub fn sensors(&self) -> usize {
        self.aoi.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.aoi
            .iter()
            .zip(&self.queues)
            .map(|(&d, &q)| sampling_weight(d, q))
            .collect()
    }

    pub fn lyapunov(&self) -> f64 {
        lyapunov(&self.queues)
    }

    pub fn queue_sum(&self) -> f64 {
        self.queues.iter().sum()
    }

    /// State at the next slot after applying sampling vector `sampled`.
    pub fn advance(&self, sampled: &[bool], delta_max: &[f64]) -> NetworkState {
        debug_assert_eq!(sampled.len(), self.sensors());
        debug_assert_eq!(delta_max.len(), self.sensors());
        let aoi: Vec<u32> = self
            .aoi
            .iter()
            .zip(sampled)
            .map(|(&d, &b)| step_aoi(d, b))
            .collect();
        let queues = self
            .queues
            .iter()
            .zip(delta_max)
            .zip(&aoi)
            .map(|((&q, &dm), &d)| step_queue(q, dm, d))
            .collect();
        NetworkState {
            slot: self.slot + 1,
            aoi,
            queues,
        }
    }
}

/// Recorded AoI and queue paths, one entry per slot starting at slot 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub aoi: Vec<Vec<u32>>,
    pub queues: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn push(&mut self, state: &NetworkState) {
        self.aoi.push(state.aoi.clone());
        self.queues.push(state.queues.clone());
    }

    pub fn len(&self) -> usize {
        self.aoi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aoi.is_empty()
    }

    /// Run `decisions` from the initial state and record every state,
    /// including the initial one.
    pub fn replay(decisions: &[Vec<bool>], delta_max: &[f64]) -> Self {
        let mut state = NetworkState::initial(delta_max.len());
        let mut traj = Trajectory::default();
        traj.push(&state);
        for b in decisions {
            state = state.advance(b, delta_max);
            traj.push(&state);
        }
        traj
    }
}

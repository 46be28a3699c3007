//! Per-slot problem: choose who samples, split the sub-channels and set the
//! powers so that every sampling sensor delivers exactly one packet, while
//! minimizing `V * total_power + sum_{sampling k} w_k`.

mod greedy;
mod search;
mod waterfill;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelState;
use crate::error::{Error, Result};

pub use greedy::greedy_assign;
pub use search::{evaluate_sampling, solve, solve_exhaustive, solve_sub_optimal, EXHAUSTIVE_LIMIT};
pub use waterfill::{waterfill, WaterFill};

/// Achievable rate `W log2(1 + p g / (W N0))` in bits per (unit) slot.
pub fn rate(power: f64, gain: f64, bandwidth: f64, noise_psd: f64) -> f64 {
    bandwidth * (power * gain / (bandwidth * noise_psd)).ln_1p() / std::f64::consts::LN_2
}

/// How Algorithm-3-style greedy assignment refills the competing set once
/// every competitor has received a sub-channel in the current round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyRefill {
    /// Refill with the sampling sensors only.
    #[default]
    Sampling,
    /// Refill with every sensor; sub-channels given to non-sampling sensors
    /// stay unused.
    Paper,
}

/// Which per-slot solver the controller calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    SubOptimal,
    Exhaustive,
}

/// One instance of the per-slot problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotProblem {
    pub gains: ChannelState,
    /// Objective coefficient of `b_k`, see [`crate::aoi::sampling_weight`].
    pub weights: Vec<f64>,
    /// Power penalty `V`.
    pub v: f64,
    /// Sub-channel bandwidth `W` in Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density `N0` in W/Hz.
    pub noise_psd: f64,
    /// Packet size `eta` in bits.
    pub packet_bits: f64,
}

impl SlotProblem {
    pub fn sensors(&self) -> usize {
        self.gains.sensors()
    }

    pub fn channels(&self) -> usize {
        self.gains.channels()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.sensors() {
            return Err(Error::config(format!(
                "{} weights for {} sensors",
                self.weights.len(),
                self.sensors()
            )));
        }
        if self.sensors() > 64 {
            return Err(Error::config("at most 64 sensors are supported"));
        }
        if self.weights.iter().any(|w| !(*w <= 0.0)) {
            return Err(Error::config("sampling weights must be finite and <= 0"));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::config("V must be finite and >= 0"));
        }
        for (name, x) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_psd", self.noise_psd),
            ("packet_bits", self.packet_bits),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Rate delivered to `sensor` under `decision`.
    pub fn sensor_rate(&self, decision: &SlotDecision, sensor: usize) -> f64 {
        decision
            .assignment
            .iter()
            .enumerate()
            .filter(|(_, owner)| **owner == Some(sensor))
            .map(|(n, _)| {
                rate(
                    decision.power[n],
                    self.gains.gain(sensor, n),
                    self.bandwidth_hz,
                    self.noise_psd,
                )
            })
            .sum()
    }
}

/// Sampling vector, sub-channel owners and powers for one slot.
///
/// Each sub-channel has at most one owner, so the assignment matrix always
/// has column sums of at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    pub sampling: Vec<bool>,
    /// Owner of each sub-channel.
    pub assignment: Vec<Option<usize>>,
    /// Transmit power on each sub-channel (used by its owner), Watts.
    pub power: Vec<f64>,
    pub total_power: f64,
    pub objective: f64,
}

impl SlotDecision {
    pub fn idle(sensors: usize, channels: usize) -> Self {
        SlotDecision {
            sampling: vec![false; sensors],
            assignment: vec![None; channels],
            power: vec![0.0; channels],
            total_power: 0.0,
            objective: 0.0,
        }
    }

    pub fn samplers(&self) -> usize {
        self.sampling.iter().filter(|&&b| b).count()
    }

    /// Sampling vector as a bit mask, sensor 0 in bit 0.
    pub fn sampling_mask(&self) -> u64 {
        self.sampling
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    /// Binary assignment matrix `rho[k][n]`.
    pub fn rho(&self) -> Vec<Vec<u8>> {
        let mut rho = vec![vec![0; self.assignment.len()]; self.sampling.len()];
        for (n, owner) in self.assignment.iter().enumerate() {
            if let Some(k) = owner {
                rho[*k][n] = 1;
            }
        }
        rho
    }

    /// Power matrix `p[k][n]`.
    pub fn power_matrix(&self) -> Vec<Vec<f64>> {
        let mut p = vec![vec![0.0; self.assignment.len()]; self.sampling.len()];
        for (n, owner) in self.assignment.iter().enumerate() {
            if let Some(k) = owner {
                p[*k][n] = self.power[n];
            }
        }
        p
    }
}

/// Operation counters of one solver call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Sampling vectors visited.
    pub candidates: u64,
    /// Assignment + power-allocation evaluations.
    pub assignments: u64,
    /// Evaluations skipped because a sampling sensor had no usable channel.
    pub infeasible: u64,
}

impl std::ops::AddAssign for SolveStats {
    fn add_assign(&mut self, rhs: Self) {
        self.candidates += rhs.candidates;
        self.assignments += rhs.assignments;
        self.infeasible += rhs.infeasible;
    }
}

/// `|{b in {0,1}^K : |b| <= N}| = sum_{j <= min(K,N)} C(K, j)`.
pub fn count_sampling_vectors(sensors: usize, channels: usize) -> u128 {
    let mut binom: u128 = 1;
    let mut total: u128 = 1;
    for j in 1..=sensors.min(channels) {
        binom = binom * (sensors - j + 1) as u128 / j as u128;
        total += binom;
    }
    total
}

/// Sampling vectors with at most `max_ones` set bits, as masks in
/// increasing binary-counter order (sensor 0 is bit 0).
pub fn sampling_vectors(sensors: usize, max_ones: usize) -> impl Iterator<Item = u64> {
    assert!(sensors <= 63, "sampling enumeration supports at most 63 sensors");
    (0..1u64 << sensors).filter(move |m| m.count_ones() as usize <= max_ones)
}

//! Slot-by-slot control: observe the channel, pick sampling, assignment and
//! power, then advance AoI and virtual queues.

use serde::{Deserialize, Serialize};

use crate::aoi::NetworkState;
use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::solver::{
    evaluate_sampling, solve, GreedyRefill, SlotDecision, SlotProblem, SolveStats, SolverKind,
};

/// Periodic fixed-rate sampling schedule. Sensors are 0-based here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    sets: Vec<Vec<usize>>,
}

/// Period of the fixed-rate baseline (sampling rate 1/7).
pub const BASELINE_PERIOD: usize = 7;

impl Schedule {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::config("schedule period must be at least one slot"));
        }
        Ok(Schedule { sets })
    }

    /// Fixed-rate baseline with rate `1/7`: sensors are packed in index
    /// order into 7 slots, the last `K mod 7` slots taking one extra sensor.
    /// For `K = 10` this is `{1},{2},{3},{4},{5,6},{7,8},{9,10}`.
    pub fn baseline(sensors: usize) -> Self {
        let (base, extra) = (sensors / BASELINE_PERIOD, sensors % BASELINE_PERIOD);
        let mut next = 0;
        let sets = (0..BASELINE_PERIOD)
            .map(|i| {
                let size = base + usize::from(i >= BASELINE_PERIOD - extra);
                let set = (next..next + size).collect();
                next += size;
                set
            })
            .collect();
        Schedule { sets }
    }

    pub fn period(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Sensors forced to sample in slot `t`. Slot `t` uses entry
    /// `(t - 1) mod period`, so slots `1..=period` walk the table in order.
    pub fn sampling_set(&self, slot: u64) -> &[usize] {
        let p = self.sets.len() as u64;
        &self.sets[((slot + p - 1) % p) as usize]
    }

    pub fn validate(&self, sensors: usize, channels: usize) -> Result<()> {
        let mut seen = vec![false; sensors];
        for (i, set) in self.sets.iter().enumerate() {
            if set.len() > channels {
                return Err(Error::config(format!(
                    "schedule slot {} samples {} sensors but only {channels} sub-channels exist",
                    i + 1,
                    set.len()
                )));
            }
            for &k in set {
                if k >= sensors {
                    return Err(Error::config(format!("schedule names unknown sensor {}", k + 1)));
                }
                seen[k] = true;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::config(format!("schedule never samples sensor {}", k + 1)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Policy {
    /// Minimize the drift-plus-penalty bound each slot.
    DriftPlusPenalty { v: f64, solver: SolverKind },
    /// Sample by schedule; assignment and power as in the proposed method.
    /// `v` only scores the reported objective.
    FixedRate { schedule: Schedule, v: f64 },
}

impl Policy {
    pub fn v(&self) -> f64 {
        match self {
            Policy::DriftPlusPenalty { v, .. } | Policy::FixedRate { v, .. } => *v,
        }
    }
}

/// Physical and constraint parameters shared by every slot of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub bandwidth_hz: f64,
    pub noise_psd: f64,
    pub packet_bits: f64,
    pub delta_max: Vec<f64>,
    pub refill: GreedyRefill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub decision: SlotDecision,
    pub stats: SolveStats,
    /// Scheduled samples dropped because the sensor had no usable channel.
    pub forced_failures: u32,
}

fn slot_problem(state: &NetworkState, channel: &ChannelState, v: f64, link: &LinkParams) -> SlotProblem {
    SlotProblem {
        gains: channel.clone(),
        weights: state.weights(),
        v,
        bandwidth_hz: link.bandwidth_hz,
        noise_psd: link.noise_psd,
        packet_bits: link.packet_bits,
    }
}

/// One control step: decide for slot `state.slot` and return the state at
/// the next slot.
pub fn run_slot(
    state: &NetworkState,
    channel: &ChannelState,
    policy: &Policy,
    link: &LinkParams,
) -> Result<(SlotOutcome, NetworkState)> {
    let problem = slot_problem(state, channel, policy.v(), link);
    let outcome = match policy {
        Policy::DriftPlusPenalty { solver, .. } => {
            let (decision, stats) = solve(&problem, *solver, link.refill)?;
            SlotOutcome {
                decision,
                stats,
                forced_failures: 0,
            }
        }
        Policy::FixedRate { schedule, .. } => {
            let mut sampling = vec![false; state.sensors()];
            for &k in schedule.sampling_set(state.slot) {
                sampling[k] = true;
            }
            let mut failures = 0;
            let decision = loop {
                match evaluate_sampling(&problem, &sampling, link.refill) {
                    Ok(d) => break d,
                    Err(Error::Infeasible) => {
                        // drop the first forced sampler without a usable channel
                        let k = (0..sampling.len())
                            .find(|&k| sampling[k] && channel.row(k).iter().all(|&g| g <= 0.0))
                            .or_else(|| sampling.iter().position(|&b| b))
                            .expect("an infeasible decision has a sampler");
                        sampling[k] = false;
                        failures += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            SlotOutcome {
                decision,
                stats: SolveStats {
                    candidates: 1,
                    assignments: 1,
                    infeasible: u64::from(failures),
                },
                forced_failures: failures,
            }
        }
    };
    let next = state.advance(&outcome.decision.sampling, &link.delta_max);
    Ok((outcome, next))
}

/// A policy bound to its link parameters and current network state.
#[derive(Debug, Clone)]
pub struct Controller {
    policy: Policy,
    link: LinkParams,
    state: NetworkState,
}

impl Controller {
    pub fn new(policy: Policy, link: LinkParams) -> Self {
        let sensors = link.delta_max.len();
        Controller {
            policy,
            link,
            state: NetworkState::initial(sensors),
        }
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn link(&self) -> &LinkParams {
        &self.link
    }

    /// Decide for the current slot and move to the next one.
    pub fn step(&mut self, channel: &ChannelState) -> Result<SlotOutcome> {
        let (outcome, next) = run_slot(&self.state, channel, &self.policy, &self.link)?;
        self.state = next;
        Ok(outcome)
    }
}

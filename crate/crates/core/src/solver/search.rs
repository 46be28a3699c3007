//! Per-slot solvers.
//!
//! * [`solve_sub_optimal`]: every sampling vector with at most `N` ones,
//!   each scored with greedy assignment plus water-filling.
//! * [`solve_exhaustive`]: every sampling vector and every way to give each
//!   sub-channel to one sampling sensor or to nobody, each scored with
//!   water-filling. Optimal, exponential in `K N`.
//!
//! Both walk sampling vectors in binary-counter order starting from the
//! all-zero vector (objective 0) and only replace the incumbent on a strict
//! improvement. Per-sensor powers are always summed over the sensor's
//! channels in the same (gain-sorted) order, so both solvers score an
//! identical assignment to the same bits.

use super::greedy::{assign_into, ChannelOrder, GreedyScratch};
use super::waterfill::{channel_power, noise_ln, rate_target, total_power_sorted, water_level};
use super::{sampling_vectors, GreedyRefill, SlotDecision, SlotProblem, SolveStats, SolverKind};
use crate::error::{Error, Result};

/// Largest `K * N` accepted by [`solve_exhaustive`] (5 sensors x 5
/// sub-channels).
pub const EXHAUSTIVE_LIMIT: usize = 25;

/// Largest per-slot memo table (entries) kept for subset powers.
const MEMO_LIMIT: usize = 1 << 20;

struct Evaluator<'a> {
    problem: &'a SlotProblem,
    order: ChannelOrder,
    noise_ln: Vec<f64>,
    target: f64,
    scratch: GreedyScratch,
    owner: Vec<Option<usize>>,
    samplers: Vec<usize>,
    buf: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a SlotProblem) -> Self {
        let wn0_ln = (problem.bandwidth_hz * problem.noise_psd).ln();
        Evaluator {
            problem,
            order: ChannelOrder::new(&problem.gains),
            noise_ln: problem
                .gains
                .as_slice()
                .iter()
                .map(|&g| noise_ln(g, wn0_ln))
                .collect(),
            target: rate_target(problem.packet_bits, problem.bandwidth_hz),
            scratch: GreedyScratch::default(),
            owner: vec![None; problem.channels()],
            samplers: Vec::with_capacity(problem.sensors()),
            buf: Vec::with_capacity(problem.channels()),
        }
    }

    fn load_samplers(&mut self, mask: u64) {
        self.samplers.clear();
        self.samplers
            .extend((0..self.problem.sensors()).filter(|&k| mask >> k & 1 == 1));
    }

    /// `ln a` of the channels of `sensor` selected by `keep`, gain-sorted.
    fn gather(&mut self, sensor: usize, keep: impl Fn(usize) -> bool) {
        let n_ch = self.problem.channels();
        self.buf.clear();
        for &n in self.order.row(sensor) {
            if keep(n) {
                self.buf.push(self.noise_ln[sensor * n_ch + n]);
            }
        }
    }

    /// Power of each sampler over the channels it owns in `self.owner`,
    /// summed in sensor order. `None` if a sampler cannot be served.
    fn owned_power(&mut self) -> Option<f64> {
        let mut total = 0.0;
        for i in 0..self.samplers.len() {
            let k = self.samplers[i];
            let owner = std::mem::take(&mut self.owner);
            self.gather(k, |n| owner[n] == Some(k));
            self.owner = owner;
            total += total_power_sorted(&self.buf, self.target)?;
        }
        Some(total)
    }

    fn weight_sum(&self) -> f64 {
        self.samplers.iter().map(|&k| self.problem.weights[k]).sum()
    }

    fn objective(&self, total_power: f64) -> f64 {
        self.problem.v * total_power + self.weight_sum()
    }

    /// Greedy assignment + water-filling for sampling mask `mask`.
    fn greedy_objective(&mut self, mask: u64, refill: GreedyRefill) -> Option<f64> {
        self.load_samplers(mask);
        assign_into(
            &self.problem.gains,
            &self.order,
            &self.samplers,
            refill,
            &mut self.scratch,
            &mut self.owner,
        );
        let total = self.owned_power()?;
        Some(self.objective(total))
    }

    /// Full decision for the current `samplers` and `owner`.
    fn decision(&mut self) -> Option<SlotDecision> {
        let (sensors, channels) = (self.problem.sensors(), self.problem.channels());
        let mut decision = SlotDecision::idle(sensors, channels);
        decision.assignment.clone_from(&self.owner);
        let mut total = 0.0;
        for i in 0..self.samplers.len() {
            let k = self.samplers[i];
            decision.sampling[k] = true;
            let (active, level) = {
                let owner = std::mem::take(&mut self.owner);
                self.gather(k, |n| owner[n] == Some(k));
                self.owner = owner;
                water_level(&self.buf, self.target)?
            };
            let mut sensor_total = 0.0;
            for &n in self
                .order
                .row(k)
                .iter()
                .filter(|&&n| self.owner[n] == Some(k))
                .take(active)
            {
                let p = channel_power(self.noise_ln[k * channels + n], level);
                decision.power[n] = p;
                sensor_total += p;
            }
            total += sensor_total;
        }
        decision.total_power = total;
        decision.objective = self.objective(total);
        Some(decision)
    }
}

fn check_sampling(problem: &SlotProblem, sampling: &[bool]) -> Result<u64> {
    if sampling.len() != problem.sensors() {
        return Err(Error::config("sampling vector length must equal K"));
    }
    let ones = sampling.iter().filter(|&&b| b).count();
    if ones > problem.channels() {
        return Err(Error::config(format!(
            "{ones} sampling sensors exceed {} sub-channels",
            problem.channels()
        )));
    }
    Ok(sampling
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |m, (k, _)| m | 1 << k))
}

/// Greedy assignment then water-filling for a fixed sampling vector.
///
/// Fails with [`Error::Infeasible`] if some sampling sensor ends up with no
/// positive-gain sub-channel.
pub fn evaluate_sampling(
    problem: &SlotProblem,
    sampling: &[bool],
    refill: GreedyRefill,
) -> Result<SlotDecision> {
    problem.validate()?;
    let mask = check_sampling(problem, sampling)?;
    let mut ev = Evaluator::new(problem);
    ev.greedy_objective(mask, refill).ok_or(Error::Infeasible)?;
    ev.decision().ok_or(Error::Infeasible)
}

/// Enumerate all sampling vectors, score each with greedy assignment and
/// water-filling, return the best. Never worse than staying idle.
pub fn solve_sub_optimal(problem: &SlotProblem, refill: GreedyRefill) -> (SlotDecision, SolveStats) {
    let mut ev = Evaluator::new(problem);
    let mut stats = SolveStats::default();
    let mut best = (0.0, 0u64);
    for mask in sampling_vectors(problem.sensors(), problem.channels()) {
        stats.candidates += 1;
        stats.assignments += 1;
        match ev.greedy_objective(mask, refill) {
            Some(obj) if obj < best.0 => best = (obj, mask),
            Some(_) => {}
            None => stats.infeasible += 1,
        }
    }
    let decision = if best.1 == 0 {
        SlotDecision::idle(problem.sensors(), problem.channels())
    } else {
        ev.greedy_objective(best.1, refill);
        ev.decision().expect("incumbent was feasible")
    };
    (decision, stats)
}

/// Exact solution by enumerating sampling vectors and sub-channel
/// assignments. Refuses instances with `K * N > EXHAUSTIVE_LIMIT`.
pub fn solve_exhaustive(problem: &SlotProblem) -> Result<(SlotDecision, SolveStats)> {
    let (sensors, channels) = (problem.sensors(), problem.channels());
    let product = sensors * channels;
    if product > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeGuard {
            product,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut ev = Evaluator::new(problem);
    // minimum power of sensor k over channel subset s, memo[k << N | s]
    let memo_len = sensors.checked_shl(channels as u32).unwrap_or(usize::MAX);
    let mut memo = if memo_len <= MEMO_LIMIT {
        vec![f64::NAN; memo_len]
    } else {
        Vec::new()
    };
    let mut stats = SolveStats::default();
    let mut best_obj = 0.0;
    let mut best_owner: Option<(u64, Vec<Option<usize>>)> = None;

    let mut digits = vec![0usize; channels];
    let mut subsets: Vec<usize> = Vec::with_capacity(sensors);
    for mask in sampling_vectors(sensors, channels) {
        stats.candidates += 1;
        ev.load_samplers(mask);
        let m = ev.samplers.len();
        let weight_sum = ev.weight_sum();
        digits.fill(0);
        loop {
            stats.assignments += 1;
            // digit 0: nobody, digit j: the j-th sampler
            subsets.clear();
            subsets.resize(m, 0);
            for (n, &d) in digits.iter().enumerate() {
                if d > 0 {
                    subsets[d - 1] |= 1 << n;
                }
            }
            let mut total = 0.0;
            let mut feasible = true;
            for (j, &s) in subsets.iter().enumerate() {
                let k = ev.samplers[j];
                let slot = k << channels | s;
                let cached = memo.get(slot).copied().unwrap_or(f64::NAN);
                let power = if cached.is_nan() {
                    ev.gather(k, |n| s >> n & 1 == 1);
                    let p = total_power_sorted(&ev.buf, ev.target).unwrap_or(f64::INFINITY);
                    if let Some(m) = memo.get_mut(slot) {
                        *m = p;
                    }
                    p
                } else {
                    cached
                };
                if power.is_infinite() {
                    feasible = false;
                    break;
                }
                total += power;
            }
            if feasible {
                let obj = problem.v * total + weight_sum;
                if obj < best_obj {
                    best_obj = obj;
                    let owner = digits
                        .iter()
                        .map(|&d| (d > 0).then(|| ev.samplers[d - 1]))
                        .collect();
                    best_owner = Some((mask, owner));
                }
            } else {
                stats.infeasible += 1;
            }
            // odometer in base m + 1
            let mut n = 0;
            while n < channels {
                digits[n] += 1;
                if digits[n] <= m {
                    break;
                }
                digits[n] = 0;
                n += 1;
            }
            if n == channels {
                break;
            }
        }
    }

    let decision = match best_owner {
        None => SlotDecision::idle(sensors, channels),
        Some((mask, owner)) => {
            ev.load_samplers(mask);
            ev.owner = owner;
            ev.decision().expect("incumbent was feasible")
        }
    };
    Ok((decision, stats))
}

/// Dispatch on [`SolverKind`].
pub fn solve(
    problem: &SlotProblem,
    kind: SolverKind,
    refill: GreedyRefill,
) -> Result<(SlotDecision, SolveStats)> {
    match kind {
        SolverKind::SubOptimal => Ok(solve_sub_optimal(problem, refill)),
        SolverKind::Exhaustive => solve_exhaustive(problem),
    }
}

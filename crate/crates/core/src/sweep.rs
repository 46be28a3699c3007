//! Parameter sweeps and solver comparison.
//!
//! Every sweep point reuses the base seed, so for a fixed seed all points
//! see the same channel realization in every slot (common random numbers).
//! Points run on the rayon pool; results come back in input order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::config::{DeltaMax, PolicyKind, SystemConfig};
use crate::controller::{Controller, Policy};
use crate::error::{Error, Result};
use crate::sim::{run_metrics, RunMetrics};
use crate::solver::{solve_exhaustive, solve_sub_optimal, SlotProblem, SolverKind, EXHAUSTIVE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "V")]
    V,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "deltaMax")]
    DeltaMax,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V" | "v" => Ok(SweepParam::V),
            "N" | "n" | "channels" => Ok(SweepParam::N),
            "deltaMax" | "delta_max" | "delta-max" | "deltamax" => Ok(SweepParam::DeltaMax),
            other => Err(Error::config(format!(
                "unknown sweep parameter {other:?} (expected V, N or deltaMax)"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::V => "V",
            SweepParam::N => "N",
            SweepParam::DeltaMax => "deltaMax",
        })
    }
}

impl SweepParam {
    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParam::V => cfg.v = value,
            SweepParam::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config(format!("N = {value} is not a positive integer")));
                }
                cfg.channels = value as usize;
            }
            SweepParam::DeltaMax => cfg.delta_max = DeltaMax::Uniform(value),
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub seed: u64,
    pub metrics: RunMetrics,
}

/// One run per value, all with `base.seed`.
pub fn sweep(base: &SystemConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_replicated(base, param, values, &[base.seed])
}

/// One run per `(value, seed)`, value-major.
pub fn sweep_replicated(
    base: &SystemConfig,
    param: SweepParam,
    values: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::config("a sweep needs at least one value and one seed"));
    }
    let points: Vec<(f64, u64)> = values
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let configs = points
        .iter()
        .map(|&(v, s)| {
            let mut cfg = param.apply(base, v)?;
            cfg.seed = s;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(points.par_iter())
        .map(|(cfg, &(value, seed))| {
            Ok(SweepRow {
                param,
                value,
                seed,
                metrics: run_metrics(cfg)?,
            })
        })
        .collect()
}

/// Mean metric per sweep value across seeds, in value order.
pub fn mean_by_value(rows: &[SweepRow], metric: impl Fn(&RunMetrics) -> f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for row in rows {
        let x = metric(&row.metrics);
        match out.iter_mut().find(|(v, ..)| *v == row.value) {
            Some(entry) => {
                entry.1 += x;
                entry.2 += 1;
            }
            None => out.push((row.value, x, 1)),
        }
    }
    out.into_iter().map(|(v, s, n)| (v, s / n as f64)).collect()
}

/// Per-slot and end-of-run comparison of the two per-slot solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub slots: u64,
    /// Slots where the exhaustive optimum beats idling.
    pub active_slots: u64,
    pub zero_gap_slots: u64,
    /// Slots where the sub-optimal objective is below the optimum (must be 0).
    pub negative_gap_slots: u64,
    pub mean_gap: f64,
    pub max_gap: f64,
    /// Relative gap `(sub - opt) / |opt|`, zero when both idle.
    pub median_relative_gap: f64,
    pub p90_relative_gap: f64,
    pub max_relative_gap: f64,
    /// Median relative gap over active slots only.
    pub median_active_relative_gap: f64,
    pub sub_optimal: RunMetrics,
    pub exhaustive: RunMetrics,
    /// `(P_sub - P_opt) / P_opt` of the end-of-run average power.
    pub power_relative_difference: f64,
    /// Largest per-sensor difference in average AoI.
    pub max_aoi_difference: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Compare solvers on identical channel streams over `slots` slots.
///
/// Per-slot gaps are measured along the sub-optimal trajectory, solving
/// each slot's problem with both methods. End metrics come from two full
/// runs, one per solver, on the same seed.
pub fn compare_solvers(config: &SystemConfig, slots: u64) -> Result<GapReport> {
    let mut cfg = config.clone();
    cfg.policy = PolicyKind::DriftPlusPenalty;
    cfg.horizon = slots;
    cfg.solver = SolverKind::Exhaustive;
    cfg.validate()?;
    if cfg.sensors * cfg.channels > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeGuard {
            product: cfg.sensors * cfg.channels,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let exhaustive_cfg = cfg.clone();
    let sub_cfg = SystemConfig {
        solver: SolverKind::SubOptimal,
        ..cfg.clone()
    };

    let (gaps, (sub_metrics, opt_metrics)) = rayon::join(
        || per_slot_gaps(&sub_cfg),
        || rayon::join(|| run_metrics(&sub_cfg), || run_metrics(&exhaustive_cfg)),
    );
    let gaps = gaps?;
    let (sub_metrics, opt_metrics) = (sub_metrics?, opt_metrics?);

    let mut rel: Vec<f64> = gaps.iter().map(|g| g.relative).collect();
    rel.sort_by(f64::total_cmp);
    let mut active_rel: Vec<f64> = gaps.iter().filter(|g| g.active).map(|g| g.relative).collect();
    active_rel.sort_by(f64::total_cmp);
    let n = gaps.len().max(1) as f64;

    let power_relative_difference = if opt_metrics.avg_total_power > 0.0 {
        (sub_metrics.avg_total_power - opt_metrics.avg_total_power) / opt_metrics.avg_total_power
    } else {
        0.0
    };
    let max_aoi_difference = sub_metrics
        .avg_aoi
        .iter()
        .zip(&opt_metrics.avg_aoi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(GapReport {
        slots,
        active_slots: gaps.iter().filter(|g| g.active).count() as u64,
        zero_gap_slots: gaps.iter().filter(|g| g.absolute == 0.0).count() as u64,
        negative_gap_slots: gaps.iter().filter(|g| g.absolute < 0.0).count() as u64,
        mean_gap: gaps.iter().map(|g| g.absolute).sum::<f64>() / n,
        max_gap: gaps.iter().map(|g| g.absolute).fold(0.0, f64::max),
        median_relative_gap: quantile(&rel, 0.5),
        p90_relative_gap: quantile(&rel, 0.9),
        max_relative_gap: rel.last().copied().unwrap_or(0.0),
        median_active_relative_gap: quantile(&active_rel, 0.5),
        sub_optimal: sub_metrics,
        exhaustive: opt_metrics,
        power_relative_difference,
        max_aoi_difference,
    })
}

#[derive(Debug, Clone, Copy)]
struct SlotGap {
    absolute: f64,
    relative: f64,
    active: bool,
}

fn per_slot_gaps(cfg: &SystemConfig) -> Result<Vec<SlotGap>> {
    let model = ChannelModel::new(&cfg.topology()?, &cfg.fading, cfg.channels, cfg.seed)?;
    let link = cfg.link()?;
    let policy = Policy::DriftPlusPenalty {
        v: cfg.v,
        solver: SolverKind::SubOptimal,
    };
    let mut controller = Controller::new(policy, link.clone());
    let mut gaps = Vec::with_capacity(cfg.horizon as usize);
    for t in 0..cfg.horizon {
        let channel = model.draw(t);
        let problem = SlotProblem {
            gains: channel.clone(),
            weights: controller.state().weights(),
            v: cfg.v,
            bandwidth_hz: link.bandwidth_hz,
            noise_psd: link.noise_psd,
            packet_bits: link.packet_bits,
        };
        let (sub, _) = solve_sub_optimal(&problem, link.refill);
        let (opt, _) = solve_exhaustive(&problem)?;
        let absolute = sub.objective - opt.objective;
        let relative = if opt.objective < 0.0 {
            absolute / -opt.objective
        } else {
            0.0
        };
        gaps.push(SlotGap {
            absolute,
            relative,
            active: opt.objective < 0.0,
        });
        controller.step(&channel)?;
    }
    Ok(gaps)
}

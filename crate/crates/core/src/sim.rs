//! Single simulation runs and their metrics.

use serde::{Deserialize, Serialize};

use crate::aoi::theorem_b;
use crate::channel::ChannelModel;
use crate::config::SystemConfig;
use crate::controller::Controller;
use crate::error::Result;

/// Version of the trace / metrics / sweep output layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// State at the start of slot `t` and what was decided in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub aoi: Vec<u32>,
    pub queues: Vec<f64>,
    pub sampling: Vec<bool>,
    pub total_power: f64,
    pub objective: f64,
    /// Assignment + power-allocation evaluations spent by the solver.
    pub evaluations: u64,
    /// Skipped infeasible candidates (or dropped scheduled samples).
    pub infeasible: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    /// Number of slots averaged over.
    pub slots: u64,
    pub avg_total_power: f64,
    pub avg_queue_sum: f64,
    pub avg_aoi: Vec<f64>,
}

/// Sample-path time averages over slots `0..T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub schema_version: u32,
    pub slots: u64,
    pub avg_total_power: f64,
    pub avg_aoi: Vec<f64>,
    /// Average AoI over the last `T - T/2` slots.
    pub tail_avg_aoi: Vec<f64>,
    pub avg_queue_sum: f64,
    pub max_aoi: u32,
    /// Largest AoI over the first `T/2` slots.
    pub max_aoi_first_half: u32,
    /// Drift-bound constant evaluated with `max_aoi`.
    pub theorem_b: f64,
    pub evaluations: u64,
    pub infeasible: u64,
    pub series: Vec<SeriesPoint>,
}

/// Streaming computation of [`RunMetrics`] from trace records.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    horizon: u64,
    stride: u64,
    seen: u64,
    power_sum: f64,
    queue_sum: f64,
    aoi_sum: Vec<u64>,
    tail_aoi_sum: Vec<u64>,
    max_aoi: u32,
    max_aoi_first_half: u32,
    evaluations: u64,
    infeasible: u64,
    series: Vec<SeriesPoint>,
}

impl MetricsAccumulator {
    pub fn new(sensors: usize, horizon: u64, stride: u64) -> Self {
        MetricsAccumulator {
            horizon,
            stride: stride.max(1),
            seen: 0,
            power_sum: 0.0,
            queue_sum: 0.0,
            aoi_sum: vec![0; sensors],
            tail_aoi_sum: vec![0; sensors],
            max_aoi: 0,
            max_aoi_first_half: 0,
            evaluations: 0,
            infeasible: 0,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: &TraceRecord) {
        let tail = rec.t >= self.horizon / 2;
        self.power_sum += rec.total_power;
        self.queue_sum += rec.queues.iter().sum::<f64>();
        for (k, &d) in rec.aoi.iter().enumerate() {
            self.aoi_sum[k] += u64::from(d);
            if tail {
                self.tail_aoi_sum[k] += u64::from(d);
            }
            self.max_aoi = self.max_aoi.max(d);
            if !tail {
                self.max_aoi_first_half = self.max_aoi_first_half.max(d);
            }
        }
        self.evaluations += rec.evaluations;
        self.infeasible += rec.infeasible;
        self.seen += 1;
        if self.seen % self.stride == 0 || self.seen == self.horizon {
            let n = self.seen as f64;
            self.series.push(SeriesPoint {
                slots: self.seen,
                avg_total_power: self.power_sum / n,
                avg_queue_sum: self.queue_sum / n,
                avg_aoi: self.aoi_sum.iter().map(|&s| s as f64 / n).collect(),
            });
        }
    }

    pub fn finish(self, delta_max: &[f64]) -> RunMetrics {
        let n = self.seen.max(1) as f64;
        let tail_n = (self.seen - self.seen.min(self.horizon / 2)).max(1) as f64;
        RunMetrics {
            schema_version: SCHEMA_VERSION,
            slots: self.seen,
            avg_total_power: self.power_sum / n,
            avg_aoi: self.aoi_sum.iter().map(|&s| s as f64 / n).collect(),
            tail_avg_aoi: self.tail_aoi_sum.iter().map(|&s| s as f64 / tail_n).collect(),
            avg_queue_sum: self.queue_sum / n,
            max_aoi: self.max_aoi,
            max_aoi_first_half: self.max_aoi_first_half,
            theorem_b: theorem_b(delta_max, self.max_aoi.max(1)),
            evaluations: self.evaluations,
            infeasible: self.infeasible,
            series: self.series,
        }
    }
}

impl RunMetrics {
    /// Recompute metrics from a complete trace.
    pub fn from_trace(trace: &[TraceRecord], delta_max: &[f64], stride: u64) -> Self {
        let mut acc = MetricsAccumulator::new(delta_max.len(), trace.len() as u64, stride);
        for rec in trace {
            acc.push(rec);
        }
        acc.finish(delta_max)
    }
}

/// Run `config`, handing every trace record to `observe`.
pub fn run_simulation_with(
    config: &SystemConfig,
    mut observe: impl FnMut(&TraceRecord),
) -> Result<RunMetrics> {
    config.validate()?;
    let model = ChannelModel::new(&config.topology()?, &config.fading, config.channels, config.seed)?;
    let link = config.link()?;
    let delta_max = link.delta_max.clone();
    let mut controller = Controller::new(config.policy()?, link);
    let mut acc = MetricsAccumulator::new(config.sensors, config.horizon, config.series_stride());
    for t in 0..config.horizon {
        let channel = model.draw(t);
        let state = controller.state().clone();
        let outcome = controller.step(&channel)?;
        let rec = TraceRecord {
            t,
            aoi: state.aoi,
            queues: state.queues,
            sampling: outcome.decision.sampling,
            total_power: outcome.decision.total_power,
            objective: outcome.decision.objective,
            evaluations: outcome.stats.assignments,
            infeasible: outcome.stats.infeasible,
        };
        acc.push(&rec);
        observe(&rec);
    }
    Ok(acc.finish(&delta_max))
}

/// Run `config` and keep the whole trace.
pub fn run_simulation(config: &SystemConfig) -> Result<(RunMetrics, Vec<TraceRecord>)> {
    let mut trace = Vec::with_capacity(config.horizon.min(1 << 22) as usize);
    let metrics = run_simulation_with(config, |r| trace.push(r.clone()))?;
    Ok((metrics, trace))
}

/// Run `config` keeping only the metrics.
pub fn run_metrics(config: &SystemConfig) -> Result<RunMetrics> {
    run_simulation_with(config, |_| {})
}

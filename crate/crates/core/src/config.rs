//! Run configuration, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{FadingParams, Topology};
use crate::controller::{LinkParams, Policy, Schedule};
use crate::error::{Error, Result};
use crate::solver::{GreedyRefill, SolverKind, EXHAUSTIVE_LIMIT};

/// Thermal noise density at 290 K, W/Hz.
pub const DEFAULT_NOISE_PSD: f64 = 4e-21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    #[default]
    DriftPlusPenalty,
    FixedRate,
}

/// Maximum acceptable average AoI, shared or per sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaMax {
    Uniform(f64),
    PerSensor(Vec<f64>),
}

impl DeltaMax {
    pub fn expand(&self, sensors: usize) -> Result<Vec<f64>> {
        match self {
            DeltaMax::Uniform(d) => Ok(vec![*d; sensors]),
            DeltaMax::PerSensor(v) if v.len() == sensors => Ok(v.clone()),
            DeltaMax::PerSensor(v) => Err(Error::config(format!(
                "delta_max lists {} values for {sensors} sensors",
                v.len()
            ))),
        }
    }
}

/// Where the topology comes from: a file path or an inline table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologySource {
    File(PathBuf),
    Inline(Topology),
}

/// Everything a run needs. Missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of sensors `K`; the `K` nearest of the topology are used.
    pub sensors: usize,
    /// Number of sub-channels `N`.
    pub channels: usize,
    pub bandwidth_hz: f64,
    pub noise_psd: f64,
    /// Packet size in bytes.
    pub packet_bytes: f64,
    pub delta_max: DeltaMax,
    pub v: f64,
    /// Number of slots `T`.
    pub horizon: u64,
    pub seed: u64,
    pub topology: TopologySource,
    pub fading: FadingParams,
    pub policy: PolicyKind,
    pub solver: SolverKind,
    pub greedy_refill: GreedyRefill,
    /// Fixed-rate schedule as 1-based sensor lists; the rate-1/7 packing
    /// when absent.
    pub schedule: Option<Vec<Vec<usize>>>,
    /// Slots between points of the running-average series; `horizon / 100`
    /// when absent.
    pub series_stride: Option<u64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            sensors: 10,
            channels: 10,
            bandwidth_hz: 180e3,
            noise_psd: DEFAULT_NOISE_PSD,
            packet_bytes: 600.0,
            delta_max: DeltaMax::Uniform(4.0),
            v: 8000.0,
            horizon: 100_000,
            seed: 1,
            topology: TopologySource::Inline(Topology::default_topology()),
            fading: FadingParams::default(),
            policy: PolicyKind::DriftPlusPenalty,
            solver: SolverKind::SubOptimal,
            greedy_refill: GreedyRefill::Sampling,
            schedule: None,
            series_stride: None,
        }
    }
}

impl SystemConfig {
    /// Parse TOML; a relative topology path is resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: SystemConfig = toml::from_str(text)?;
        if let (TopologySource::File(p), Some(dir)) = (&cfg.topology, base_dir) {
            if p.is_relative() {
                cfg.topology = TopologySource::File(dir.join(p));
            }
        }
        cfg.resolve_topology()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Replace a topology file reference by its contents.
    pub fn resolve_topology(&mut self) -> Result<()> {
        if let TopologySource::File(p) = &self.topology {
            self.topology = TopologySource::Inline(Topology::load(p)?);
        }
        Ok(())
    }

    /// Topology restricted to the configured `K` sensors.
    pub fn topology(&self) -> Result<Topology> {
        let topo = match &self.topology {
            TopologySource::Inline(t) => t.clone(),
            TopologySource::File(p) => Topology::load(p)?,
        };
        topo.nearest(self.sensors)
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_bytes * 8.0
    }

    pub fn delta_max(&self) -> Result<Vec<f64>> {
        self.delta_max.expand(self.sensors)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        match &self.schedule {
            None => Ok(Schedule::baseline(self.sensors)),
            Some(sets) => {
                let sets = sets
                    .iter()
                    .map(|set| {
                        set.iter()
                            .map(|&k| {
                                k.checked_sub(1)
                                    .ok_or_else(|| Error::config("schedule sensors are 1-based"))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Schedule::new(sets)
            }
        }
    }

    pub fn policy(&self) -> Result<Policy> {
        Ok(match self.policy {
            PolicyKind::DriftPlusPenalty => Policy::DriftPlusPenalty {
                v: self.v,
                solver: self.solver,
            },
            PolicyKind::FixedRate => Policy::FixedRate {
                schedule: self.schedule()?,
                v: self.v,
            },
        })
    }

    pub fn link(&self) -> Result<LinkParams> {
        Ok(LinkParams {
            bandwidth_hz: self.bandwidth_hz,
            noise_psd: self.noise_psd,
            packet_bits: self.packet_bits(),
            delta_max: self.delta_max()?,
            refill: self.greedy_refill,
        })
    }

    pub fn series_stride(&self) -> u64 {
        self.series_stride.unwrap_or(self.horizon / 100).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensors == 0 || self.sensors > 63 {
            return Err(Error::config("sensors must be between 1 and 63"));
        }
        if self.channels == 0 {
            return Err(Error::config("channels must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least one slot"));
        }
        for (name, x) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_psd", self.noise_psd),
            ("packet_bytes", self.packet_bytes),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::config("v must be finite and >= 0"));
        }
        for (k, d) in self.delta_max()?.iter().enumerate() {
            if !(*d > 1.0 && d.is_finite()) {
                return Err(Error::config(format!(
                    "delta_max of sensor {} is {d}; it must exceed 1",
                    k + 1
                )));
            }
        }
        self.fading.validate()?;
        self.topology()?.validate()?;
        if self.policy == PolicyKind::DriftPlusPenalty
            && self.solver == SolverKind::Exhaustive
            && self.sensors * self.channels > EXHAUSTIVE_LIMIT
        {
            return Err(Error::SizeGuard {
                product: self.sensors * self.channels,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        if self.policy == PolicyKind::FixedRate {
            self.schedule()?.validate(self.sensors, self.channels)?;
        }
        Ok(())
    }
}

//! Block-fading uplink channel: deterministic path loss times Rayleigh
//! small-scale fading, redrawn independently every slot.
//!
//! The stored quantity is the power gain `|h|^2`, with
//! `h = (d / d0)^xi * c` and `c ~ Rayleigh(sigma)`.
//!
//! Every `(slot, sensor, sub-channel)` triple owns a fixed position in a
//! ChaCha8 keystream (stream = slot, block = sensor/sub-channel), so a draw
//! does not depend on evaluation order, on how many sub-channels exist, or
//! on what else was drawn before it.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path loss and fading parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingParams {
    /// Path-loss exponent `xi` (negative).
    pub path_loss_exponent: f64,
    /// Far-field reference distance `d0` in meters.
    pub reference_distance: f64,
    /// Rayleigh scale `sigma`; `E[c^2] = 2 sigma^2`.
    pub rayleigh_scale: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        FadingParams {
            path_loss_exponent: -3.0,
            reference_distance: 1.0,
            rayleigh_scale: 0.5,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.reference_distance > 0.0 && self.reference_distance.is_finite()) {
            return Err(Error::config("fading.reference_distance must be positive"));
        }
        if !(self.rayleigh_scale > 0.0 && self.rayleigh_scale.is_finite()) {
            return Err(Error::config("fading.rayleigh_scale must be positive"));
        }
        if !self.path_loss_exponent.is_finite() {
            return Err(Error::config("fading.path_loss_exponent must be finite"));
        }
        Ok(())
    }
}

/// Amplitude path loss `(d / d0)^xi`.
pub fn large_scale_gain(distance: f64, params: &FadingParams) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok((distance / params.reference_distance).powf(params.path_loss_exponent))
}

/// Sink and sensor coordinates in meters.
///
/// Sensors must be listed nearest first; sensor `k` (0-based here, 1-based
/// in output files) is the `k`-th closest to the sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub sink: [f64; 2],
    pub sensors: Vec<[f64; 2]>,
}

impl Topology {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let topo: Topology = toml::from_str(text)?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// The topology shipped with the crate (`data/topology.toml`).
    pub fn default_topology() -> Self {
        Self::from_toml_str(include_str!("../data/topology.toml"))
            .expect("bundled topology is valid")
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.sensors
            .iter()
            .map(|p| (p[0] - self.sink[0]).hypot(p[1] - self.sink[1]))
            .collect()
    }

    /// Keep the `k` nearest sensors.
    pub fn nearest(&self, k: usize) -> Result<Topology> {
        if k > self.sensors.len() {
            return Err(Error::config(format!(
                "topology has {} sensors, {} requested",
                self.sensors.len(),
                k
            )));
        }
        Ok(Topology {
            sink: self.sink,
            sensors: self.sensors[..k].to_vec(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensors.is_empty() {
            return Err(Error::config("topology lists no sensors"));
        }
        let d = self.distances();
        for (k, &dk) in d.iter().enumerate() {
            if !(dk > 0.0) || !dk.is_finite() {
                return Err(Error::config(format!(
                    "sensor {} is at distance {dk} from the sink",
                    k + 1
                )));
            }
        }
        if let Some(k) = d.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::config(format!(
                "sensors must be ordered by distance: sensor {} is farther than sensor {}",
                k + 1,
                k + 2
            )));
        }
        Ok(())
    }
}

/// `K x N` matrix of power gains `|h_{k,n}|^2` for one slot, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ChannelState {
    sensors: usize,
    channels: usize,
    gains: Vec<f64>,
}

impl ChannelState {
    pub fn new(sensors: usize, channels: usize, gains: Vec<f64>) -> Result<Self> {
        if sensors == 0 || channels == 0 {
            return Err(Error::Channel("empty gain matrix".into()));
        }
        if gains.len() != sensors * channels {
            return Err(Error::Channel(format!(
                "expected {} gains for a {sensors}x{channels} matrix, got {}",
                sensors * channels,
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::Channel(format!("gain {g} is negative or not finite")));
        }
        Ok(ChannelState {
            sensors,
            channels,
            gains,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let sensors = rows.len();
        let channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != channels) {
            return Err(Error::Channel("ragged gain matrix".into()));
        }
        Self::new(sensors, channels, rows.into_iter().flatten().collect())
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn gain(&self, sensor: usize, channel: usize) -> f64 {
        self.gains[sensor * self.channels + channel]
    }

    pub fn row(&self, sensor: usize) -> &[f64] {
        &self.gains[sensor * self.channels..(sensor + 1) * self.channels]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.gains.chunks(self.channels).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for ChannelState {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ChannelState::from_rows(rows)
    }
}

impl From<ChannelState> for Vec<Vec<f64>> {
    fn from(state: ChannelState) -> Self {
        state.to_rows()
    }
}

/// Squared Rayleigh coefficient `c^2` for one `(slot, sensor, channel)`.
///
/// Inverse-CDF draw: `c^2 = -2 sigma^2 ln(1 - U)` is exponential with mean
/// `2 sigma^2`.
pub fn fading_power(seed: u64, slot: u64, sensor: usize, channel: usize, sigma: f64) -> f64 {
    let mut rng = slot_rng(seed, slot);
    fading_power_at(&mut rng, sensor, channel, sigma)
}

fn slot_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot);
    rng
}

#[inline]
fn fading_power_at(rng: &mut ChaCha8Rng, sensor: usize, channel: usize, sigma: f64) -> f64 {
    // one 16-word block per (sensor, channel)
    let block = ((sensor as u128) << 32) | channel as u128;
    rng.set_word_pos(block << 4);
    let u: f64 = rng.gen();
    -2.0 * sigma * sigma * (-u).ln_1p()
}

/// Seeded generator of per-slot [`ChannelState`]s for a fixed topology.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    seed: u64,
    channels: usize,
    sigma: f64,
    /// `(d_k / d0)^(2 xi)` per sensor.
    path_gain: Vec<f64>,
}

impl ChannelModel {
    pub fn new(
        topology: &Topology,
        params: &FadingParams,
        channels: usize,
        seed: u64,
    ) -> Result<Self> {
        topology.validate()?;
        params.validate()?;
        if channels == 0 {
            return Err(Error::config("at least one sub-channel is required"));
        }
        let path_gain = topology
            .distances()
            .into_iter()
            .map(|d| large_scale_gain(d, params).map(|a| a * a))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelModel {
            seed,
            channels,
            sigma: params.rayleigh_scale,
            path_gain,
        })
    }

    pub fn sensors(&self) -> usize {
        self.path_gain.len()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn path_gains(&self) -> &[f64] {
        &self.path_gain
    }

    pub fn draw(&self, slot: u64) -> ChannelState {
        let mut rng = slot_rng(self.seed, slot);
        let mut gains = Vec::with_capacity(self.path_gain.len() * self.channels);
        for (k, &pg) in self.path_gain.iter().enumerate() {
            for n in 0..self.channels {
                gains.push(pg * fading_power_at(&mut rng, k, n, self.sigma));
            }
        }
        ChannelState {
            sensors: self.path_gain.len(),
            channels: self.channels,
            gains,
        }
    }
}

//! Minimum-power allocation over parallel sub-channels for a fixed rate.
//!
//! Minimize `sum p_n` subject to `sum W log2(1 + p_n g_n / (W N0)) = eta`.
//! With `a_n = W N0 / g_n` the optimum is `p_n = max(0, mu - a_n)`. Over an
//! active set `A` the rate equality gives
//! `ln mu = (eta ln 2 / W + sum_{A} ln a_n) / |A|`. Channels are added in
//! increasing `a_n`; the first time `mu <= a_next` the set is final.
//! Everything is done with `ln a_n` to avoid overflow and cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of [`waterfill`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFill {
    /// Power per input channel, in input order.
    pub powers: Vec<f64>,
    pub total: f64,
    /// Water level `mu`; zero when nothing has to be sent.
    pub level: f64,
    /// Number of channels with positive power.
    pub active: usize,
}

/// `ln(W N0 / g)`; `+inf` for unusable channels.
#[inline]
pub(crate) fn noise_ln(gain: f64, wn0_ln: f64) -> f64 {
    if gain > 0.0 {
        wn0_ln - gain.ln()
    } else {
        f64::INFINITY
    }
}

/// Required `sum ln(mu / a_n)` over the active set.
#[inline]
pub(crate) fn rate_target(packet_bits: f64, bandwidth: f64) -> f64 {
    packet_bits * std::f64::consts::LN_2 / bandwidth
}

/// Active-set size and `ln mu` for `noise_ln` sorted ascending.
/// `None` when not even the best channel is usable.
#[inline]
pub(crate) fn water_level(sorted_noise_ln: &[f64], target: f64) -> Option<(usize, f64)> {
    let first = *sorted_noise_ln.first()?;
    if !first.is_finite() {
        return None;
    }
    let mut sum = 0.0;
    let mut level = 0.0;
    for (m, &a) in sorted_noise_ln.iter().enumerate() {
        debug_assert!(m == 0 || sorted_noise_ln[m - 1] <= a);
        sum += a;
        level = (target + sum) / (m + 1) as f64;
        match sorted_noise_ln.get(m + 1) {
            Some(&next) if level > next => {}
            _ => return Some((m + 1, level)),
        }
    }
    Some((sorted_noise_ln.len(), level))
}

/// `a (mu / a - 1)` in a cancellation-free form.
#[inline]
pub(crate) fn channel_power(noise_ln: f64, level: f64) -> f64 {
    noise_ln.exp() * (level - noise_ln).exp_m1()
}

/// Total power for `noise_ln` sorted ascending, or `None` if infeasible.
#[inline]
pub(crate) fn total_power_sorted(sorted_noise_ln: &[f64], target: f64) -> Option<f64> {
    let (active, level) = water_level(sorted_noise_ln, target)?;
    Some(
        sorted_noise_ln[..active]
            .iter()
            .map(|&a| channel_power(a, level))
            .sum(),
    )
}

/// Minimum-power allocation delivering `packet_bits` over channels with
/// power gains `gains`.
///
/// Fails with [`Error::Infeasible`] when no gain is positive (and bits must
/// be sent). A non-positive packet size needs no power at all.
pub fn waterfill(
    gains: &[f64],
    bandwidth: f64,
    noise_psd: f64,
    packet_bits: f64,
) -> Result<WaterFill> {
    if packet_bits <= 0.0 {
        return Ok(WaterFill {
            powers: vec![0.0; gains.len()],
            total: 0.0,
            level: 0.0,
            active: 0,
        });
    }
    let wn0_ln = (bandwidth * noise_psd).ln();
    let mut idx: Vec<usize> = (0..gains.len()).collect();
    let a: Vec<f64> = gains.iter().map(|&g| noise_ln(g, wn0_ln)).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(i.cmp(&j)));
    let sorted: Vec<f64> = idx.iter().map(|&i| a[i]).collect();

    let target = rate_target(packet_bits, bandwidth);
    let (active, level) = water_level(&sorted, target).ok_or(Error::Infeasible)?;
    let mut powers = vec![0.0; gains.len()];
    let mut total = 0.0;
    for &i in &idx[..active] {
        let p = channel_power(a[i], level);
        powers[i] = p;
        total += p;
    }
    Ok(WaterFill {
        powers,
        total,
        level: level.exp(),
        active,
    })
}

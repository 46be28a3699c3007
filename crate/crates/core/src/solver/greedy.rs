//! Greedy sub-channel assignment.
//!
//! Repeatedly hand the globally strongest remaining (sensor, sub-channel)
//! pair among the competing sensors to that sensor, then drop the sensor
//! from the competition until every competitor has had its turn. Runs for
//! exactly `N` rounds. Ties go to the lowest sensor index, then the lowest
//! channel index.

use super::GreedyRefill;
use crate::channel::ChannelState;

/// Per-sensor channel indices sorted by gain (descending, ties by index).
#[derive(Debug, Clone)]
pub(crate) struct ChannelOrder {
    channels: usize,
    order: Vec<usize>,
}

impl ChannelOrder {
    pub(crate) fn new(gains: &ChannelState) -> Self {
        let channels = gains.channels();
        let mut order = Vec::with_capacity(gains.sensors() * channels);
        for k in 0..gains.sensors() {
            let row = gains.row(k);
            let start = order.len();
            order.extend(0..channels);
            order[start..].sort_by(|&i, &j| row[j].total_cmp(&row[i]).then(i.cmp(&j)));
        }
        ChannelOrder { channels, order }
    }

    #[inline]
    pub(crate) fn row(&self, sensor: usize) -> &[usize] {
        &self.order[sensor * self.channels..(sensor + 1) * self.channels]
    }
}

#[derive(Debug, Default)]
pub(crate) struct GreedyScratch {
    taken: Vec<bool>,
    cursor: Vec<usize>,
    competing: Vec<usize>,
}

/// Fill `owner` (length N) for the sampling sensors `samplers` (ascending).
pub(crate) fn assign_into(
    gains: &ChannelState,
    order: &ChannelOrder,
    samplers: &[usize],
    refill: GreedyRefill,
    scratch: &mut GreedyScratch,
    owner: &mut [Option<usize>],
) {
    let (sensors, channels) = (gains.sensors(), gains.channels());
    owner.fill(None);
    if samplers.is_empty() {
        return;
    }
    scratch.taken.clear();
    scratch.taken.resize(channels, false);
    scratch.cursor.clear();
    scratch.cursor.resize(sensors, 0);
    scratch.competing.clear();
    scratch.competing.extend_from_slice(samplers);

    for _ in 0..channels {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for (slot, &k) in scratch.competing.iter().enumerate() {
            let row = order.row(k);
            let mut c = scratch.cursor[k];
            while scratch.taken[row[c]] {
                c += 1;
            }
            scratch.cursor[k] = c;
            let n = row[c];
            let g = gains.gain(k, n);
            // competitors are in ascending sensor order: strict > keeps the lowest index
            if best.is_none_or(|(bg, ..)| g > bg) {
                best = Some((g, k, n, slot));
            }
        }
        let (_, k, n, slot) = best.expect("competing set is never empty");
        owner[n] = Some(k);
        scratch.taken[n] = true;
        scratch.competing.remove(slot);
        if scratch.competing.is_empty() {
            match refill {
                GreedyRefill::Sampling => scratch.competing.extend_from_slice(samplers),
                GreedyRefill::Paper => scratch.competing.extend(0..sensors),
            }
        }
    }
}

/// Owner of each sub-channel after greedy assignment for sampling vector
/// `sampling`. All-`None` when nobody samples.
pub fn greedy_assign(
    gains: &ChannelState,
    sampling: &[bool],
    refill: GreedyRefill,
) -> Vec<Option<usize>> {
    assert_eq!(sampling.len(), gains.sensors(), "one sampling flag per sensor");
    let samplers: Vec<usize> = (0..sampling.len()).filter(|&k| sampling[k]).collect();
    let order = ChannelOrder::new(gains);
    let mut owner = vec![None; gains.channels()];
    assign_into(
        gains,
        &order,
        &samplers,
        refill,
        &mut GreedyScratch::default(),
        &mut owner,
    );
    owner
}

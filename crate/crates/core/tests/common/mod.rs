//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// Minimum of a convex function on `[lo, hi]` by repeatedly refining a
/// uniform grid around its best point.
fn zoom_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let steps = 16;
    let mut best = f64::INFINITY;
    for _ in 0..30 {
        let h = (hi - lo) / steps as f64;
        let (mut here, mut arg) = (f64::INFINITY, lo);
        for i in 0..=steps {
            let x = lo + h * i as f64;
            let c = f(x);
            if c < here {
                here = c;
                arg = x;
            }
        }
        best = best.min(here);
        let (l, u) = ((arg - h).max(lo), (arg + h).min(hi));
        if u - l <= f64::EPSILON * (hi.abs() + 1.0) {
            break;
        }
        lo = l;
        hi = u;
    }
    best
}

/// Minimum total power for `bits` over channels with noise-to-gain ratios
/// `a` (each `W N0 / g`), by grid search over the rate split.
///
/// Power on a channel carrying `r` bits is `a (2^(r/W) - 1)`. The total is
/// convex in the split, and so is its minimum over the later channels, so
/// one refined 1-D grid per channel finds the optimum.
pub fn grid_min_power(a: &[f64], bandwidth: f64, bits: f64) -> f64 {
    let power = |a: f64, r: f64| a * (r * std::f64::consts::LN_2 / bandwidth).exp_m1();
    fn split(a: &[f64], bits: f64, power: &dyn Fn(f64, f64) -> f64) -> f64 {
        match a {
            [] => panic!("no channels"),
            [last] => power(*last, bits),
            [first, rest @ ..] => zoom_min(0.0, bits, |r| power(*first, r) + split(rest, bits - r, power)),
        }
    }
    assert!((1..=3).contains(&a.len()), "grid oracle handles 1 to 3 channels");
    split(a, bits, &power)
}

/// AoI and queue paths by direct application of the update rules, one row
/// per slot starting from the all-zero state.
pub fn replay(decisions: &[Vec<bool>], delta_max: &[f64]) -> (Vec<Vec<u32>>, Vec<Vec<f64>>) {
    let k = delta_max.len();
    let mut aoi = vec![vec![0u32; k]];
    let mut q = vec![vec![0.0f64; k]];
    for b in decisions {
        let prev_a = aoi.last().unwrap().clone();
        let prev_q = q.last().unwrap().clone();
        let next_a: Vec<u32> = (0..k).map(|i| if b[i] { 1 } else { prev_a[i] + 1 }).collect();
        let next_q: Vec<f64> = (0..k)
            .map(|i| {
                let drained = prev_q[i] - delta_max[i];
                (if drained > 0.0 { drained } else { 0.0 }) + next_a[i] as f64
            })
            .collect();
        aoi.push(next_a);
        q.push(next_q);
    }
    (aoi, q)
}

/// Number of `(b, rho)` pairs the exhaustive search visits, by brute force
/// over every binary `K x N` matrix: at most `N` samplers, each column used
/// at most once, and only by a sampling sensor.
pub fn brute_force_assignment_count(sensors: usize, channels: usize) -> u64 {
    let mut count = 0;
    for b in 0u32..1 << sensors {
        if b.count_ones() as usize > channels {
            continue;
        }
        'rho: for rho in 0u64..1 << (sensors * channels) {
            for n in 0..channels {
                let mut owners = 0;
                for k in 0..sensors {
                    if rho >> (k * channels + n) & 1 == 1 {
                        if b >> k & 1 == 0 {
                            continue 'rho;
                        }
                        owners += 1;
                    }
                }
                if owners > 1 {
                    continue 'rho;
                }
            }
            count += 1;
        }
    }
    count
}

/// Number of sampling vectors with at most `channels` ones, by brute force.
pub fn brute_force_sampling_count(sensors: usize, channels: usize) -> u64 {
    (0u64..1 << sensors)
        .filter(|b| b.count_ones() as usize <= channels)
        .count() as u64
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for t in i..=j {
            r[idx[t]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// Kendall tau-b.
pub fn kendall(x: &[f64], y: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = (x[i] - x[j]).signum() as i64 * (x[i] != x[j]) as i64;
            let dy = (y[i] - y[j]).signum() as i64 * (y[i] != y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tx += 1,
                (_, 0) => ty += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (concordant + discordant) as f64;
    (concordant - discordant) as f64 / ((n0 + tx as f64) * (n0 + ty as f64)).sqrt()
}

/// Random gain matrix with entries log-uniform over six decades.
pub fn random_gains(rng: &mut impl Rng, sensors: usize, channels: usize) -> Vec<Vec<f64>> {
    (0..sensors)
        .map(|_| (0..channels).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect())
        .collect()
}

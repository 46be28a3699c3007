use aoisim_core::channel::{fading_power, ChannelModel, FadingParams, Topology};

#[test]
fn rayleigh_second_moment() {
    // E[c^2] = 2 sigma^2 for a Rayleigh coefficient with scale sigma
    let sigma = 0.5;
    let draws = 1_000_000u64;
    let mut sum = 0.0;
    for i in 0..draws {
        sum += fading_power(42, i / 100, (i % 100 / 10) as usize, (i % 10) as usize, sigma);
    }
    let mean = sum / draws as f64;
    assert!((mean - 0.5).abs() <= 0.005, "mean c^2 = {mean}");
}

#[test]
fn fading_is_exponential() {
    // P(c^2 > x) = exp(-x / (2 sigma^2))
    let draws = 200_000u64;
    let xs = [0.1, 0.5, 1.0, 2.0];
    let mut above = [0usize; 4];
    for i in 0..draws {
        let c2 = fading_power(3, i, 0, 0, 0.5);
        for (j, x) in xs.iter().enumerate() {
            above[j] += (c2 > *x) as usize;
        }
    }
    for (j, x) in xs.iter().enumerate() {
        let frac = above[j] as f64 / draws as f64;
        let expect = (-x / 0.5f64).exp();
        assert!((frac - expect).abs() < 0.005, "x = {x}: {frac} vs {expect}");
    }
}

#[test]
fn stationary_over_slots() {
    let topo = Topology::default_topology();
    let model = ChannelModel::new(&topo, &FadingParams::default(), 10, 11).unwrap();
    let mean = |slots: std::ops::Range<u64>| {
        let n = (slots.end - slots.start) as f64;
        let mut acc = [0.0; 10];
        for t in slots {
            let g = model.draw(t);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += g.row(k).iter().sum::<f64>() / 10.0 / model.path_gains()[k];
            }
        }
        acc.map(|a| a / n)
    };
    let early = mean(0..5_000);
    let late = mean(95_000..100_000);
    for k in 0..10 {
        assert!((early[k] - 0.5).abs() < 0.02, "sensor {k} early {}", early[k]);
        assert!((late[k] - 0.5).abs() < 0.02, "sensor {k} late {}", late[k]);
    }
}

#[test]
fn adding_channels_keeps_existing_draws() {
    let topo = Topology::default_topology();
    let fading = FadingParams::default();
    let narrow = ChannelModel::new(&topo, &fading, 6, 5).unwrap();
    let wide = ChannelModel::new(&topo, &fading, 12, 5).unwrap();
    for t in [0, 1, 77, 100_000] {
        let (a, b) = (narrow.draw(t), wide.draw(t));
        for k in 0..10 {
            assert_eq!(a.row(k), &b.row(k)[..6]);
        }
    }
}

#[test]
fn seeds_and_slots_give_distinct_draws() {
    let a = fading_power(1, 0, 0, 0, 0.5);
    assert_ne!(a, fading_power(2, 0, 0, 0, 0.5));
    assert_ne!(a, fading_power(1, 1, 0, 0, 0.5));
    assert_ne!(a, fading_power(1, 0, 1, 0, 0.5));
    assert_ne!(a, fading_power(1, 0, 0, 1, 0.5));
}

use std::f64::consts::PI;

use thundering::apps::{estimate_pi, gaussian_pair, mc_option_price, OptionSpec};
use thundering::{GeneratorConfig, MultiStreamRng};

fn rng(seed: u64, streams: usize) -> MultiStreamRng {
    MultiStreamRng::new(GeneratorConfig::new(seed, streams)).unwrap()
}

const ATM: OptionSpec = OptionSpec {
    spot: 100.0,
    strike: 100.0,
    rate: 0.05,
    volatility: 0.2,
    maturity: 1.0,
    paths: 1_000_000,
};

#[test]
fn gaussian_moments() {
    let mut g = rng(11, 4);
    let pairs = 1_000_000usize;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for i in 0..pairs {
        let (a, b) = gaussian_pair(&mut g, i % 4).unwrap();
        sum += a + b;
        sq += a * a + b * b;
    }
    let n = 2.0 * pairs as f64;
    let mean = sum / n;
    let var = sq / n - mean * mean;
    assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
    // var of x^2 for a standard normal is 2
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "variance {var}");
}

#[test]
fn zero_strike_is_the_spot() {
    let opt = OptionSpec { strike: 0.0, ..ATM };
    let p = mc_option_price(&mut rng(5, 8), &opt).unwrap();
    assert!((p.price - 100.0).abs() <= 3.0 * p.standard_error, "{p:?}");
}

#[test]
fn monotone_in_strike_and_spot() {
    let small = OptionSpec {
        paths: 20_000,
        ..ATM
    };
    let price = |spot: f64, strike: f64| {
        // same seed for every grid point: common random numbers
        mc_option_price(
            &mut rng(77, 4),
            &OptionSpec {
                spot,
                strike,
                ..small
            },
        )
        .unwrap()
        .price
    };
    let grid = [60.0, 80.0, 100.0, 120.0, 140.0];
    for &s in &grid {
        for w in grid.windows(2) {
            assert!(price(s, w[0]) >= price(s, w[1]));
        }
    }
    for &k in &grid {
        for w in grid.windows(2) {
            assert!(price(w[0], k) <= price(w[1], k));
        }
    }
}

#[test]
fn pi_is_reproducible_and_accurate() {
    let a = estimate_pi(&mut rng(3, 8), 1_000_000, 8).unwrap();
    let b = estimate_pi(&mut rng(3, 8), 1_000_000, 8).unwrap();
    assert_eq!(a, b);
    assert!((a.estimate - PI).abs() <= 5.0 * a.standard_error);
    assert!(a.hits <= a.draws);
}

#[test]
fn pi_block_matches_stream_contribution() {
    // with the contiguous partition, stream 1 of a 2-stream run handles the
    // second half of the draws from its own sequence
    let two = estimate_pi(&mut rng(9, 2), 1000, 2).unwrap();
    let mut g = rng(9, 2);
    let mut hits = 0;
    for stream in 0..2 {
        for _ in 0..500 {
            let x = g.next_f64_unit(stream).unwrap();
            let y = g.next_f64_unit(stream).unwrap();
            hits += u64::from(x * x + y * y <= 1.0);
        }
    }
    assert_eq!(two.hits, hits);
}

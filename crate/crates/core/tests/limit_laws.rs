use cremona_core::families::henon;
use cremona_core::limitlaw::{ks_statistic, normalize, predict, Law, Target};
use cremona_core::parse::parse_univariate;
use cremona_core::walk::{run_trials, Backend, Measure, WalkConfig};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::statistics::Statistics;
use std::f64::consts::{LN_2, PI};

/// `|Σ ±log d|` over `n` fair signs, drawn 64 at a time from one word.
fn synthetic_walk(rng: &mut ChaCha8Rng, n: usize, log_d: f64) -> f64 {
    let mut ups = 0i64;
    let mut left = n;
    while left > 0 {
        let take = left.min(64);
        let bits = rng.next_u64() >> (64 - take);
        ups += i64::from(bits.count_ones());
        left -= take;
    }
    let sum = 2 * ups - n as i64;
    sum as f64 * log_d
}

#[test]
fn synthetic_signed_walk_is_folded_gaussian() {
    let n = 10_000;
    let log_d = 3f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<f64> = (0..10_000)
        .map(|_| synthetic_walk(&mut rng, n, log_d).abs())
        .collect();
    let z = normalize(&samples, 0.0, n);
    let ks = ks_statistic(&z, Target::FoldedGaussian(log_d), 0.03).unwrap();
    assert!(ks.passed(), "ks = {}", ks.statistic);
}

fn symmetric_henon() -> Measure {
    let (h, hi) = henon("h", &parse_univariate("x^2").unwrap()).unwrap();
    Measure::uniform(vec![h, hi], true, None).unwrap()
}

#[test]
fn symmetric_henon_walk_has_folded_mean() {
    let measure = symmetric_henon();
    let p = predict(&measure).unwrap();
    assert_eq!(p.law, Law::FoldedGaussian);
    let sigma = p.sigma.unwrap();
    assert!((sigma - LN_2).abs() < 1e-12);

    let n = 1000;
    let cfg = WalkConfig::new(measure, n, 10_000, 5, Backend::Fast);
    let ensemble = run_trials(&cfg).unwrap();
    assert!(ensemble.failures.is_empty());
    let finals: Vec<f64> = ensemble.samples.iter().map(|s| s.log_degree[0]).collect();
    let mean = normalize(&finals, 0.0, n).mean();
    let expected = sigma * (2.0 / PI).sqrt();
    assert!(
        (mean / expected - 1.0).abs() < 0.02,
        "mean {mean}, expected {expected}"
    );
}

//! Oracles shared by integration targets.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of ordered cell pairs of a 2^h x 2^h grid whose smallest common
/// region is at level `i`, by exhaustive enumeration.
pub fn first_shared_level_fraction(h: u32) -> Vec<Ratio<u64>> {
    let side = 1u64 << h;
    let mut counts = vec![0u64; h as usize + 1];
    for a in 0..side * side {
        for b in 0..side * side {
            let (ax, ay, bx, by) = (a % side, a / side, b % side, b / side);
            let level = (0..=h).find(|&i| ax >> i == bx >> i && ay >> i == by >> i).unwrap();
            counts[level as usize] += 1;
        }
    }
    counts.into_iter().map(|c| Ratio::new(c, side.pow(4))).collect()
}

/// `x` as a fraction over `denom`, requiring `x * denom` to be an integer.
pub fn as_ratio(x: f64, denom: u64) -> Ratio<u64> {
    let scaled = x * denom as f64;
    assert_eq!(scaled.fract(), 0.0, "{x} is not a multiple of 1/{denom}");
    Ratio::new(scaled as u64, denom)
}

/// Mean distance between uniform point pairs of the unit square and its
/// standard error.
pub fn unit_square_monte_carlo(samples: u64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let (x1, y1, x2, y2): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let d = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
        sum += d;
        sq += d * d;
    }
    let n = samples as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / n).sqrt())
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

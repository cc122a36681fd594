//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use lipq::measures::ModelParams;
use lipq::seeding::{open_uniform, replication_rng};

/// Monte Carlo evaluation of the second-level tail by sampling the first
/// jump `x` from `alpha x^(-alpha-1)` above `theta K + l (c - m) - (1 - theta) K`.
/// A first jump above `K` acts as a jump of exactly `K`.
/// Returns `(estimate, standard error)`.
pub fn mu2_mc_oracle(p: &ModelParams, l: f64, samples: usize, seed: u64) -> (f64, f64) {
    let (alpha, k, d) = (p.alpha, p.buffer, p.rate - p.mean);
    let top = (1.0 - p.theta) * k;
    let reach = p.theta * k + l * d;
    let lo = reach - top;
    let g = |x: f64| (x - lo) / (reach - x).powf(alpha);
    let mut rng = replication_rng(seed, 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let x = lo * open_uniform(&mut rng).powf(-1.0 / alpha);
        let v = g(x.min(k));
        sum += v;
        sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean) * n / (n - 1.0);
    let factor = (p.horizon - l) / d * lo.powf(-alpha);
    (factor * mean, factor * (var / n).sqrt())
}

/// `mu1((l, inf))` on `(0, kappa]` written out directly.
pub fn mu1_closed_form(p: &ModelParams, l: f64) -> f64 {
    (p.horizon - l) * (l * (p.rate - p.mean) + p.theta * p.buffer).powf(-p.alpha)
}

/// Draw from the normalised first-level law with the atom spread uniformly
/// over `(kappa - eps1, kappa + eps2)`, by inverting the tail numerically.
pub fn sample_spread_mu1(p: &ModelParams, eps1: f64, eps2: f64, n: usize, seed: u64) -> Vec<f64> {
    let kappa = (1.0 - p.theta) * p.buffer / (p.rate - p.mean);
    let total = mu1_closed_form(p, 0.0);
    let atom = (p.horizon - kappa) * p.buffer.powf(-p.alpha);
    let mut rng = replication_rng(seed, 0);
    (0..n)
        .map(|_| {
            let u = open_uniform(&mut rng) * total;
            if u < atom {
                kappa - eps1 + (eps1 + eps2) * u / atom
            } else {
                // continuous tail mu1(l) - atom equals u - atom
                let target = u;
                let (mut a, mut b) = (0.0, kappa);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if mu1_closed_form(p, m) > target {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        })
        .collect()
}

//! Empirical checks of the one-jump rate and of Bernstein's inequality.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heavytail::{nu_alpha_tail, ArrivalDist, TailParams};
use crate::measures::gamma_rate;
use crate::pathspace::bernstein_bound;
use crate::seeding::{open_uniform, replication_rng};

use super::stats::Estimate;

const WALKS_PER_STREAM: usize = 1024;

/// Centred random walks `S_k = sum_{i<=k} (A_i - m)` normalised by `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateConfig {
    pub n_steps: usize,
    pub lambda: f64,
    pub dist: ArrivalDist,
    pub n_walks: usize,
    pub seed: u64,
}

impl RateConfig {
    /// `lambda = n^rho`.
    pub fn with_exponent(n_steps: usize, rho: f64, dist: ArrivalDist, n_walks: usize, seed: u64) -> Self {
        Self {
            n_steps,
            lambda: (n_steps as f64).powf(rho),
            dist,
            n_walks,
            seed,
        }
    }

    /// `P(|A - m| > lambda)`.
    pub fn big_jump_prob(&self) -> Result<f64> {
        let m = self.dist.mean();
        let up = self.dist.survival(self.lambda + m)?;
        // A >= 0, so A - m < -lambda only when lambda < m
        let down = if self.lambda < m {
            1.0 - self.dist.survival(m - self.lambda)?
        } else {
            0.0
        };
        Ok(up + down)
    }

    /// `gamma_n^(1) = 1 / (n P(|A - m| > lambda))`.
    pub fn gamma(&self) -> Result<f64> {
        gamma_rate(self.n_steps as u64, self.big_jump_prob()?, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCheck {
    pub x: f64,
    pub hits: u64,
    pub walks: u64,
    /// `gamma P(sup_k S_k / lambda > x)` with its standard error.
    pub scaled: Estimate,
    /// `p x^(-alpha)`.
    pub analytic: f64,
    pub z: f64,
    /// No walk hit the event; the SE uses one pseudo-hit.
    pub low_power: bool,
}

fn walk_maximum<R: Rng>(dist: &ArrivalDist, n: usize, rng: &mut R) -> f64 {
    let m = dist.mean();
    let mut s = 0.0;
    let mut best = 0.0f64;
    for _ in 0..n {
        s += dist.sample_unchecked(open_uniform(rng)) - m;
        best = best.max(s);
    }
    best
}

/// Compare `gamma_n P(sup X^(n) > x)` with `nu_alpha((x, inf))` at each level.
pub fn verify_rate_j1(config: &RateConfig, levels: &[f64]) -> Result<Vec<RateCheck>> {
    if config.n_steps == 0 || config.n_walks == 0 {
        return Err(Error::domain("need at least one step and one walk"));
    }
    if !(config.lambda > 0.0) {
        return Err(Error::domain("lambda must be positive"));
    }
    if levels.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::domain("levels must be positive"));
    }
    let gamma = config.gamma()?;
    let tail = TailParams::positive(config.dist.alpha())?;
    let streams = config.n_walks.div_ceil(WALKS_PER_STREAM);
    let hits = (0..streams as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replication_rng(config.seed, k);
            let walks = WALKS_PER_STREAM.min(config.n_walks - k as usize * WALKS_PER_STREAM);
            let mut hits = vec![0u64; levels.len()];
            for _ in 0..walks {
                let top = walk_maximum(&config.dist, config.n_steps, &mut rng) / config.lambda;
                for (h, &x) in hits.iter_mut().zip(levels) {
                    *h += u64::from(top > x);
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; levels.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let walks = config.n_walks as u64;
    levels
        .iter()
        .zip(hits)
        .map(|(&x, h)| {
            let analytic = nu_alpha_tail(&tail, None, Some(x))?;
            let low_power = h == 0;
            let mut scaled = Estimate::binomial(h, walks).scale(gamma);
            if low_power {
                scaled.se = Estimate::binomial(1, walks).scale(gamma).se;
            }
            Ok(RateCheck {
                x,
                hits: h,
                walks,
                scaled,
                analytic,
                z: scaled.z_score(analytic),
                low_power,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinCheck {
    pub n: usize,
    pub t: f64,
    pub frequency: Estimate,
    pub bound: f64,
    pub holds: bool,
}

/// Frequency of `|S_n| >= t` for sums of uniform `(-1, 1)` increments versus
/// the Bernstein bound with `sigma^2 = 1/3`, `M = 1`. The check holds when the
/// frequency is at most the bound plus three standard errors.
pub fn verify_bernstein(n: usize, levels: &[f64], trials: usize, seed: u64) -> Result<Vec<BernsteinCheck>> {
    if n == 0 || trials == 0 {
        return Err(Error::domain("need at least one step and one trial"));
    }
    let sums: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replication_rng(seed, k);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>()
        })
        .collect();
    levels
        .iter()
        .map(|&t| {
            let bound = bernstein_bound(n as u64, 1.0 / 3.0, 1.0, t)?;
            let hits = sums.iter().filter(|s| s.abs() >= t).count();
            let frequency = Estimate::binomial(hits as u64, trials as u64);
            Ok(BernsteinCheck {
                n,
                t,
                frequency,
                bound,
                holds: frequency.value <= bound + 3.0 * frequency.se,
            })
        })
        .collect()
}

//! Importance sampler for the two-jump paths behind the second level.
//!
//! Each sample plants jumps `j1 > theta K` and `j2 > floor` at ordered times
//! `u1 < u2` drawn uniformly on `{0 < u1 < u2 < M}`, adds the drift
//! `-(c - m)`, reflects on `[0, K]` and records `L`. Every sample carries the
//! weight `nu((theta K, inf)) nu((floor, inf)) M^2 / 2`, so weighted sums
//! estimate the second-level measure. For `l >= kappa + floor / (c - m)`
//! the floor and the restriction `j1 > theta K` lose no mass: a shorter
//! first jump never starts a period longer than `kappa`, and `j2` extends
//! the period by at most `j2 / (c - m)` beyond `kappa`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intense::longest_intense;
use crate::measures::ModelParams;
use crate::pathspace::{h_j_path, JumpSpec};
use crate::reflect::reflect_path;
use crate::seeding::{open_uniform, replication_rng};

use super::stats::{Estimate, Histogram};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantedDraw {
    pub first_time: f64,
    pub first_size: f64,
    pub second_time: f64,
    pub second_size: f64,
    pub longest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedSample {
    pub floor: f64,
    /// Common importance weight of every draw.
    pub weight: f64,
    pub draws: Vec<PlantedDraw>,
}

/// Default floor `0.05 (1 - theta) K`, exact for `l >= 1.05 kappa`.
pub fn default_floor(params: &ModelParams) -> f64 {
    0.05 * (1.0 - params.theta) * params.buffer
}

/// `L` of the reflected two-jump path.
pub fn planted_length(params: &ModelParams, times: [f64; 2], sizes: [f64; 2]) -> Result<f64> {
    let spec = JumpSpec::new(times.to_vec(), sizes.to_vec(), -params.drain())?;
    let input = h_j_path(&spec, params.horizon)?;
    let q = reflect_path(&input, params.buffer, false)?;
    longest_intense(&q, params.level())
}

fn pareto_above(lo: f64, alpha: f64, u: f64) -> f64 {
    lo * u.powf(-1.0 / alpha)
}

/// Draw `n_samples` planted two-jump paths. Chunk `k` of 4096 draws uses
/// stream `k` of `seed`.
pub fn planted_two_jump_sampler(
    params: &ModelParams,
    n_samples: usize,
    seed: u64,
    floor: f64,
) -> Result<PlantedSample> {
    params.validate()?;
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::InvalidParameter {
            name: "floor",
            value: floor,
            reason: "second-jump floor must be positive",
        });
    }
    let (alpha, horizon) = (params.alpha, params.horizon);
    let level = params.level();
    let chunks = n_samples.div_ceil(CHUNK);
    let draws: Vec<Vec<PlantedDraw>> = (0..chunks as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replication_rng(seed, k);
            let len = CHUNK.min(n_samples - k as usize * CHUNK);
            let mut out = Vec::with_capacity(len);
            while out.len() < len {
                let a = open_uniform(&mut rng) * horizon;
                let b = open_uniform(&mut rng) * horizon;
                let j1 = pareto_above(level, alpha, open_uniform(&mut rng));
                let j2 = pareto_above(floor, alpha, open_uniform(&mut rng));
                if a == b {
                    continue;
                }
                let (u1, u2) = (a.min(b), a.max(b));
                let longest = planted_length(params, [u1, u2], [j1, j2])?;
                out.push(PlantedDraw {
                    first_time: u1,
                    first_size: j1,
                    second_time: u2,
                    second_size: j2,
                    longest,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(PlantedSample {
        floor,
        weight: level.powf(-alpha) * floor.powf(-alpha) * horizon * horizon / 2.0,
        draws: draws.into_iter().flatten().collect(),
    })
}

impl PlantedSample {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Weighted estimate of the second-level tail at `l`.
    pub fn tail_estimate(&self, l: f64) -> Estimate {
        let hits = self.draws.iter().filter(|d| d.longest > l).count();
        Estimate::binomial(hits as u64, self.draws.len() as u64).scale(self.weight)
    }

    /// Weighted histogram of `L` over `edges`.
    pub fn histogram(&self, edges: Vec<f64>) -> Histogram {
        let mut h = Histogram::new(edges);
        for d in &self.draws {
            h.add(d.longest, self.weight / self.draws.len() as f64);
        }
        h
    }
}

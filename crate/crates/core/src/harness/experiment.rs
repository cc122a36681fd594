use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavytail::ArrivalLaw;
use crate::intense::enumerate_periods;
use crate::measures::ModelParams;
use crate::pathspace::classify_jumps;
use crate::reflect::{simulate_queue_with_arrivals, Embedding, QueueModel};
use crate::seeding::{draw_arrivals, replication_rng};

use super::stats::{centred_edges, Estimate, Histogram};

/// Monte Carlo configuration for the long-intense-period experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n_arrivals: usize,
    pub n_reps: usize,
    pub master_seed: u64,
    /// Histogram bin width (time units).
    pub bin_width: f64,
    pub embedding: Embedding,
    /// Jump threshold for the per-run audit of the longest period; `None` skips it.
    pub audit_threshold: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Replace the arrival law by a constant (for plumbing checks).
    #[serde(default)]
    pub fixed_arrival: Option<f64>,
}

impl ExperimentConfig {
    /// Desk configuration: `n_arrivals = M`, bin width 5% of `kappa`,
    /// audit threshold [`default_audit_threshold`].
    pub fn new(params: ModelParams, n_reps: usize, master_seed: u64) -> Self {
        Self {
            params,
            n_arrivals: params.horizon as usize,
            n_reps,
            master_seed,
            bin_width: 0.05 * params.kappa(),
            embedding: Embedding::Step,
            audit_threshold: Some(default_audit_threshold(&params)),
            threads: None,
            fixed_arrival: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_reps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_reps",
                value: 0.0,
                reason: "need at least one replication",
            });
        }
        if !(self.bin_width > 0.0) || !self.bin_width.is_finite() {
            return Err(Error::InvalidParameter {
                name: "bin_width",
                value: self.bin_width,
                reason: "bin width must be positive",
            });
        }
        if self.n_arrivals as f64 != self.params.horizon {
            return Err(Error::InvalidParameter {
                name: "n_arrivals",
                value: self.n_arrivals as f64,
                reason: "arrivals at integer epochs must fill the horizon (n_arrivals = M)",
            });
        }
        if let Some(l) = self.audit_threshold {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "audit_threshold",
                    value: l,
                    reason: "jump threshold must be positive",
                });
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter {
                name: "threads",
                value: 0.0,
                reason: "need at least one thread",
            });
        }
        if let Some(a) = self.fixed_arrival {
            if !(a >= 0.0) || a >= self.params.rate {
                return Err(Error::InvalidParameter {
                    name: "fixed_arrival",
                    value: a,
                    reason: "constant arrival must lie in [0, c)",
                });
            }
        }
        Ok(())
    }

    fn arrival_law(&self) -> Result<ArrivalLaw> {
        Ok(match self.fixed_arrival {
            Some(a) => ArrivalLaw::Deterministic(a),
            None => self.params.arrival_dist()?.into(),
        })
    }

    fn model(&self) -> Result<QueueModel> {
        QueueModel::new(
            self.params.buffer,
            self.params.rate,
            self.arrival_law()?,
            self.params.horizon,
            self.embedding,
        )
    }
}

/// Audit threshold used to flag runs with more than two big jumps: the
/// smallest jump that can extend an intense period by 2% of `2 kappa`.
pub fn default_audit_threshold(params: &ModelParams) -> f64 {
    0.02 * 2.0 * params.kappa() * params.drain()
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: u64,
    /// Longest intense period `L` (0 if none).
    pub longest: f64,
    pub period_start: Option<f64>,
    pub period_end: Option<f64>,
    pub n_periods: usize,
    pub lost_work: f64,
    pub max_value: f64,
    /// Arrivals above the audit threshold within the longest period.
    pub big_jumps: Option<usize>,
}

/// Per-replication records of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipDataset {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
}

fn run_one(config: &ExperimentConfig, model: &QueueModel, rep: u64) -> Result<RunRecord> {
    let mut rng = replication_rng(config.master_seed, rep);
    let arrivals = draw_arrivals(model.arrivals(), config.n_arrivals, &mut rng);
    let q = simulate_queue_with_arrivals(model, &arrivals, false)?;
    let set = enumerate_periods(&q, config.params.level())?;
    let longest = set.longest_period();
    let big_jumps = match (config.audit_threshold, longest) {
        (Some(lambda), Some(p)) => {
            // arrival i (0-based) lands at epoch i + 1
            let lo = (p.start.ceil() as usize).max(1) - 1;
            let hi = (p.end.floor() as usize).min(arrivals.len());
            Some(classify_jumps(&arrivals[lo.min(hi)..hi], lambda)?)
        }
        (Some(_), None) => Some(0),
        (None, _) => None,
    };
    Ok(RunRecord {
        rep,
        longest: set.longest(),
        period_start: longest.map(|p| p.start),
        period_end: longest.map(|p| p.end),
        n_periods: set.len(),
        lost_work: q.lost_work(),
        max_value: q.max_value(),
        big_jumps,
    })
}

/// Run `n_reps` independent replications. Replication `r` uses stream `r`
/// of the master seed, so results do not depend on the thread count.
pub fn run_lip_experiment(config: &ExperimentConfig) -> Result<LipDataset> {
    config.validate()?;
    let model = config.model()?;
    let work = || -> Result<Vec<RunRecord>> {
        (0..config.n_reps as u64)
            .into_par_iter()
            .map(|rep| run_one(config, &model, rep))
            .collect()
    };
    let records = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Io(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(LipDataset {
        config: config.clone(),
        records,
    })
}

impl LipDataset {
    pub fn n_reps(&self) -> usize {
        self.records.len()
    }

    /// Lengths of all positive `L`.
    pub fn positive_lengths(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.longest > 0.0)
            .map(|r| r.longest)
            .collect()
    }

    pub fn n_positive(&self) -> usize {
        self.records.iter().filter(|r| r.longest > 0.0).count()
    }

    /// `P(L > 0)` with its binomial standard error.
    pub fn positive_fraction(&self) -> Estimate {
        self.tail_fraction(0.0)
    }

    /// `P(L > l)` with its binomial standard error.
    pub fn tail_fraction(&self, l: f64) -> Estimate {
        let hits = self.records.iter().filter(|r| r.longest > l).count();
        Estimate::binomial(hits as u64, self.records.len() as u64)
    }

    pub fn tail_curve(&self, grid: &[f64]) -> Vec<(f64, Estimate)> {
        grid.iter().map(|&l| (l, self.tail_fraction(l))).collect()
    }

    /// Histogram of `L | L > 0` on bins of the configured width, one bin
    /// centred on `kappa`, covering every observed length.
    pub fn conditional_histogram(&self) -> Histogram {
        let lengths = self.positive_lengths();
        let kappa = self.config.params.kappa();
        let top = lengths.iter().copied().fold(2.0 * kappa, f64::max);
        let mut h = Histogram::new(centred_edges(kappa, self.config.bin_width, top + f64::EPSILON * top));
        for l in lengths {
            h.add(l, 1.0);
        }
        h
    }

    pub fn mean_lost_work(&self) -> Estimate {
        let v: Vec<f64> = self.records.iter().map(|r| r.lost_work).collect();
        Estimate::mean_of(&v)
    }

    /// Runs with `L > bound` and fewer than three audited big jumps.
    pub fn support_violations(&self, bound: f64) -> Vec<RunRecord> {
        self.records
            .iter()
            .filter(|r| r.longest > bound && r.big_jumps.is_none_or(|j| j < 3))
            .copied()
            .collect()
    }
}

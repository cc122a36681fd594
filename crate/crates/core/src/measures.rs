//! Limit measures of the long-intense-period length `L`.
//!
//! Everything is evaluated at physical scale. Both levels are homogeneous in
//! `(K, M, l)`, so the rate factors of the scaled queue collapse into powers
//! of a single tail constant `C = n^alpha P(A > n)`:
//! `P(L > l) ≈ C mu1((l, inf))` on `(0, kappa]` and `≈ C^2 mu2((l, inf))` on
//! `(kappa, 2 kappa]`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavytail::ArrivalDist;
use crate::quadrature;
use crate::reflect::{Embedding, QueueModel};

/// Default relative tolerance for the second-level quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

const MAX_INTERVALS: usize = 20_000;

/// Queue and threshold parameters shared by the limit measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub mean: f64,
    pub rate: f64,
    pub theta: f64,
    pub buffer: f64,
    pub horizon: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, mean: f64, rate: f64, theta: f64, buffer: f64, horizon: f64) -> Result<Self> {
        let p = Self {
            alpha,
            mean,
            rate,
            theta,
            buffer,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Scaled-down desk version of the reference study: `alpha = 1.44`,
    /// `m = 0.5`, `c = 1`, `theta = 0.85`, `K = 2000`, `M = 5000`.
    pub fn desk() -> Self {
        Self {
            alpha: 1.44,
            mean: 0.5,
            rate: 1.0,
            theta: 0.85,
            buffer: 2000.0,
            horizon: 5000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return bad("alpha", self.alpha, "tail index must exceed 1");
        }
        if !(self.mean > 0.0) || !self.mean.is_finite() {
            return bad("mean", self.mean, "mean arrival must be positive");
        }
        if !(self.rate > self.mean) || !self.rate.is_finite() {
            return bad("rate", self.rate, "service rate must exceed the mean arrival");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("theta", self.theta, "threshold fraction must lie in (0, 1)");
        }
        if !(self.buffer > 0.0) || !self.buffer.is_finite() {
            return bad("buffer", self.buffer, "buffer must be positive");
        }
        if !(self.horizon > 2.0 * self.kappa()) || !self.horizon.is_finite() {
            return bad("horizon", self.horizon, "horizon must exceed 2 kappa");
        }
        Ok(())
    }

    /// `c - m`, the mean drain rate.
    pub fn drain(&self) -> f64 {
        self.rate - self.mean
    }

    /// `(1 - theta) K / (c - m)`.
    pub fn kappa(&self) -> f64 {
        (1.0 - self.theta) * self.buffer / self.drain()
    }

    /// Intense level `theta K`.
    pub fn level(&self) -> f64 {
        self.theta * self.buffer
    }

    pub fn arrival_dist(&self) -> Result<ArrivalDist> {
        ArrivalDist::new(self.alpha, self.mean)
    }

    pub fn queue_model(&self, embedding: Embedding) -> Result<QueueModel> {
        QueueModel::new(
            self.buffer,
            self.rate,
            self.arrival_dist()?.into(),
            self.horizon,
            embedding,
        )
    }

    /// Buffer and horizon divided by `n`.
    pub fn scaled_down(&self, n: f64) -> Result<Self> {
        Self::new(
            self.alpha,
            self.mean,
            self.rate,
            self.theta,
            self.buffer / n,
            self.horizon / n,
        )
    }
}

pub fn kappa(params: &ModelParams) -> f64 {
    params.kappa()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

fn check_positive(l: f64) -> Result<()> {
    if !(l > 0.0) {
        return Err(Error::domain(format!("measure lives on (0, M]; got l = {l}")));
    }
    Ok(())
}

/// `mu1((l, inf)) = (M - l)(l (c - m) + theta K)^(-alpha)` on `(0, kappa]`, else 0.
pub fn mu1_tail(params: &ModelParams, l: f64) -> Result<f64> {
    check_positive(l)?;
    if l > params.kappa() {
        return Ok(0.0);
    }
    Ok((params.horizon - l) * (l * params.drain() + params.level()).powf(-params.alpha))
}

/// Point mass `(M - kappa) K^(-alpha)` at `kappa`.
pub fn mu1_atom(params: &ModelParams) -> Atom {
    let kappa = params.kappa();
    Atom {
        location: kappa,
        mass: (params.horizon - kappa) * params.buffer.powf(-params.alpha),
    }
}

/// Tail of the absolutely continuous part of `mu1` (atom removed).
pub fn mu1_continuous_tail(params: &ModelParams, l: f64) -> Result<f64> {
    check_positive(l)?;
    if l >= params.kappa() {
        return Ok(0.0);
    }
    Ok((mu1_tail(params, l)? - mu1_atom(params).mass).max(0.0))
}

/// Density of the absolutely continuous part of `mu1` on `(0, kappa)`.
pub fn mu1_density(params: &ModelParams, l: f64) -> Result<f64> {
    check_positive(l)?;
    if l >= params.kappa() {
        return Ok(0.0);
    }
    let base = l * params.drain() + params.level();
    Ok(base.powf(-params.alpha)
        + params.alpha * params.drain() * (params.horizon - l) * base.powf(-params.alpha - 1.0))
}

/// `mu2((l, inf))` for `l` in `(kappa, 2 kappa]`; 0 beyond `2 kappa`.
pub fn mu2_tail(params: &ModelParams, l: f64, rel_tol: f64) -> Result<f64> {
    let kappa = params.kappa();
    if !(l > kappa) {
        return Err(Error::domain(format!(
            "second-level measure is only finite on (kappa, M]; got l = {l} <= kappa = {kappa}"
        )));
    }
    if l >= 2.0 * kappa {
        return Ok(0.0);
    }
    let (alpha, k, d) = (params.alpha, params.buffer, params.drain());
    let level = params.level();
    let top = (1.0 - params.theta) * k;
    let reach = l * d;
    let lower = level + reach - top;
    let integrand = |x: f64| {
        alpha * x.powf(-alpha - 1.0) * (x - level - reach + top) / (reach + level - x).powf(alpha)
    };
    let q = quadrature::integrate(integrand, lower, k, rel_tol, 0.0, MAX_INTERVALS)?;
    let overflow = k.powf(-alpha) * (2.0 * top - reach) / (reach - top).powf(alpha);
    Ok((params.horizon - l) / d * (q.value + overflow))
}

/// `gamma_n^(j) = [n p]^(-j)` where `p = P(|Z| > lambda_n)`.
pub fn gamma_rate(n: u64, tail_prob: f64, j: u32) -> Result<f64> {
    if n == 0 || j == 0 {
        return Err(Error::domain("gamma_rate needs n >= 1 and j >= 1"));
    }
    if !(tail_prob > 0.0 && tail_prob < 1.0) {
        return Err(Error::domain(format!("tail probability must lie in (0,1), got {tail_prob}")));
    }
    Ok((n as f64 * tail_prob).powi(-(j as i32)))
}

/// Piecewise estimate of `P(L > l)` combining the first two levels.
pub fn combined_tail_estimate(params: &ModelParams, tail_const: f64, l: f64) -> Result<f64> {
    combined_tail_estimate_with_tol(params, tail_const, l, DEFAULT_REL_TOL)
}

pub fn combined_tail_estimate_with_tol(
    params: &ModelParams,
    tail_const: f64,
    l: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_positive(l)?;
    let kappa = params.kappa();
    if l <= kappa {
        Ok(tail_const * mu1_tail(params, l)?)
    } else if l <= 2.0 * kappa {
        Ok(tail_const * tail_const * mu2_tail(params, l, rel_tol)?)
    } else {
        Ok(0.0)
    }
}

/// Probability attributed to `L ∈ (kappa - eps1, kappa + eps2)` by the atom of `mu1`.
pub fn atom_estimate(params: &ModelParams, tail_const: f64, eps1: f64, eps2: f64) -> Result<f64> {
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(Error::domain("atom window half-widths must be positive"));
    }
    Ok(tail_const * mu1_atom(params).mass)
}

type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A measure on `(0, M]` given by its atoms, tail function and support.
#[derive(Clone)]
pub struct MeasureRepr {
    atoms: Vec<Atom>,
    tail: TailFn,
    support: (f64, f64),
}

impl std::fmt::Debug for MeasureRepr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasureRepr")
            .field("atoms", &self.atoms)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl MeasureRepr {
    /// `mu1`: continuous part on `(0, kappa)` plus the atom at `kappa`.
    pub fn first_level(params: &ModelParams) -> Self {
        let p = *params;
        Self {
            atoms: vec![mu1_atom(params)],
            tail: Arc::new(move |l| mu1_tail(&p, l).unwrap_or(f64::NAN)),
            support: (0.0, p.kappa()),
        }
    }

    /// `mu2` on `(kappa, 2 kappa]`; the tail is infinite at and below `kappa`.
    pub fn second_level(params: &ModelParams, rel_tol: f64) -> Self {
        let p = *params;
        Self {
            atoms: Vec::new(),
            tail: Arc::new(move |l| mu2_tail(&p, l, rel_tol).unwrap_or(f64::INFINITY)),
            support: (p.kappa(), 2.0 * p.kappa()),
        }
    }

    /// The combined first/second-level probability estimate.
    pub fn combined(params: &ModelParams, tail_const: f64) -> Self {
        let p = *params;
        let mut atom = mu1_atom(params);
        atom.mass *= tail_const;
        Self {
            atoms: vec![atom],
            tail: Arc::new(move |l| combined_tail_estimate(&p, tail_const, l).unwrap_or(f64::NAN)),
            support: (0.0, 2.0 * p.kappa()),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Measure of `(l, inf)`.
    pub fn tail(&self, l: f64) -> f64 {
        (self.tail)(l)
    }
}

/// One tabulated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureRow {
    pub l: f64,
    pub mu1_tail: f64,
    pub mu2_tail: Option<f64>,
    pub combined_estimate: f64,
}

/// Tabulate `mu1`, `mu2` (blank where undefined) and the combined estimate.
pub fn tabulate(params: &ModelParams, tail_const: f64, grid: &[f64]) -> Result<Vec<MeasureRow>> {
    grid.iter()
        .map(|&l| {
            let mu2 = if l > params.kappa() {
                Some(mu2_tail(params, l, DEFAULT_REL_TOL)?)
            } else {
                None
            };
            Ok(MeasureRow {
                l,
                mu1_tail: mu1_tail(params, l)?,
                mu2_tail: mu2,
                combined_estimate: combined_tail_estimate(params, tail_const, l)?,
            })
        })
        .collect()
}

pub fn write_measures_csv<W: Write>(rows: &[MeasureRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

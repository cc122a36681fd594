//! Regularly varying distribution primitives.
//!
//! [`TailParams`] describes a two-sided tail (index `alpha`, positive-tail
//! weight `p`) and evaluates the limit measure `nu_alpha`. [`ArrivalDist`] is
//! the shifted power law used for queue arrivals,
//! `P(A > z) = (z / ((alpha - 1) m) + 1)^(-alpha)`, which has mean `m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail index and tail-balance weight of a regularly varying law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    alpha: f64,
    p: f64,
}

impl TailParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "tail index must be positive and finite",
            });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "tail-balance weight must lie in [0, 1]",
            });
        }
        Ok(Self { alpha, p })
    }

    /// One-sided (nonnegative) law: `p = 1`.
    pub fn positive(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// Mass that `nu_alpha` assigns to `(-inf, -y) ∪ (x, inf)`.
///
/// Either side may be omitted; at least one must be given and every given
/// level must be positive.
pub fn nu_alpha_tail(params: &TailParams, y: Option<f64>, x: Option<f64>) -> Result<f64> {
    if y.is_none() && x.is_none() {
        return Err(Error::domain("nu_alpha_tail needs at least one level"));
    }
    let side = |level: Option<f64>, weight: f64| -> Result<f64> {
        match level {
            None => Ok(0.0),
            Some(v) if v > 0.0 => Ok(weight * v.powf(-params.alpha)),
            Some(v) => Err(Error::domain(format!("level must be positive, got {v}"))),
        }
    };
    Ok(side(y, params.q())? + side(x, params.p)?)
}

/// Shifted power-law arrival distribution with tail index `alpha > 1` and mean `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistShape")]
pub struct ArrivalDist {
    alpha: f64,
    mean: f64,
    #[serde(skip)]
    scale: f64,
    #[serde(skip)]
    neg_inv_alpha: f64,
}

#[derive(Deserialize)]
struct DistShape {
    alpha: f64,
    mean: f64,
}

impl TryFrom<DistShape> for ArrivalDist {
    type Error = Error;

    fn try_from(d: DistShape) -> Result<Self> {
        ArrivalDist::new(d.alpha, d.mean)
    }
}

/// Reference scale used by [`tail_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TailScale {
    /// The `n -> inf` limit `((alpha - 1) m)^alpha`.
    #[default]
    Asymptotic,
    /// Finite reference scale `n`.
    Reference(f64),
}

impl ArrivalDist {
    pub fn new(alpha: f64, mean: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "arrival tail index must exceed 1 (finite mean)",
            });
        }
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "mean arrival must be positive and finite",
            });
        }
        Ok(Self {
            alpha,
            mean,
            scale: (alpha - 1.0) * mean,
            neg_inv_alpha: -1.0 / alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `(alpha - 1) m`, the scale of the shifted power law.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tail_params(&self) -> TailParams {
        TailParams {
            alpha: self.alpha,
            p: 1.0,
        }
    }

    /// `P(A > z)`.
    pub fn survival(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::domain(format!("survival needs z >= 0, got {z}")));
        }
        Ok((z / self.scale + 1.0).powf(-self.alpha))
    }

    /// Inverse-CDF draw from a uniform variate `u` in `(0, 1)`; `survival(sample(u)) == u`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("uniform variate must lie in (0,1), got {u}")));
        }
        Ok(self.sample_unchecked(u))
    }

    /// [`sample`](Self::sample) without the range check, for hot loops.
    #[inline]
    pub fn sample_unchecked(&self, u: f64) -> f64 {
        self.scale * (u.powf(self.neg_inv_alpha) - 1.0)
    }

    /// Exact truncated first moment `E[A; A <= t]`.
    pub fn truncated_mean(&self, t: f64) -> Result<f64> {
        let surv = self.survival(t)?;
        let integral =
            self.scale / (self.alpha - 1.0) * (1.0 - (1.0 + t / self.scale).powf(1.0 - self.alpha));
        Ok(integral - t * surv)
    }
}

/// Sample one arrival using [`ArrivalDist::sample`]; free-function form.
pub fn sample_arrival(dist: &ArrivalDist, u: f64) -> Result<f64> {
    dist.sample(u)
}

/// Survival function of the arrival law; free-function form.
pub fn survival(dist: &ArrivalDist, z: f64) -> Result<f64> {
    dist.survival(z)
}

/// `n^alpha * P(A > n)`, the factor that turns limit-measure mass into a probability.
pub fn tail_constant(dist: &ArrivalDist, scale: TailScale) -> Result<f64> {
    match scale {
        TailScale::Asymptotic => Ok(dist.scale.powf(dist.alpha)),
        TailScale::Reference(n) if n > 0.0 && n.is_finite() => {
            Ok(n.powf(dist.alpha) * dist.survival(n)?)
        }
        TailScale::Reference(n) => Err(Error::domain(format!(
            "reference scale must be positive and finite, got {n}"
        ))),
    }
}

/// Arrival law driving a queue: the heavy-tailed law or a constant (used to
/// pin down degenerate cases).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArrivalLaw {
    ShiftedPareto(ArrivalDist),
    Deterministic(f64),
}

impl ArrivalLaw {
    pub fn mean(&self) -> f64 {
        match self {
            ArrivalLaw::ShiftedPareto(d) => d.mean(),
            ArrivalLaw::Deterministic(a) => *a,
        }
    }

    #[inline]
    pub fn sample_unchecked(&self, u: f64) -> f64 {
        match self {
            ArrivalLaw::ShiftedPareto(d) => d.sample_unchecked(u),
            ArrivalLaw::Deterministic(a) => *a,
        }
    }
}

impl From<ArrivalDist> for ArrivalLaw {
    fn from(d: ArrivalDist) -> Self {
        ArrivalLaw::ShiftedPareto(d)
    }
}

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{mu1_atom, mu1_continuous_tail, mu1_tail, mu2_tail, ModelParams, DEFAULT_REL_TOL};

use super::experiment::LipDataset;
use super::stats::Histogram;

/// Half-widths of the window `(kappa - eps1, kappa + eps2)` over which the
/// atom of `mu1` is spread, and from which the second level starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomWindow {
    pub eps1: f64,
    pub eps2: f64,
}

impl AtomWindow {
    /// 5% of `kappa` on either side.
    pub fn default_for(params: &ModelParams) -> Self {
        let e = 0.05 * params.kappa();
        Self { eps1: e, eps2: e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistRow {
    pub bin: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub bin_center: f64,
    pub count: f64,
    /// Empirical density of `L | L > 0`.
    pub empirical: f64,
    /// First-level density, atom spread over the window.
    pub ldp: f64,
    /// Second-level density on `(kappa + eps2, 2 kappa]`.
    pub hld: f64,
    pub ratio_ldp: Option<f64>,
    pub ratio_hld: Option<f64>,
}

/// Per-bin comparison of the empirical conditional law of `L` with the
/// two analytic levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub kappa: f64,
    pub window: AtomWindow,
    pub tail_constant: f64,
    /// Predicted `P(L > 0) = C mu1((0, inf))`; both analytic columns are divided by it.
    pub normalizer: f64,
    pub n_positive: usize,
    pub rows: Vec<HistRow>,
}

/// `mu1` mass of `[a, b)` with the atom spread uniformly over the window.
pub fn mu1_bin_mass(params: &ModelParams, window: AtomWindow, a: f64, b: f64) -> Result<f64> {
    let kappa = params.kappa();
    let tail = |l: f64| -> Result<f64> {
        if l <= 0.0 {
            mu1_continuous_tail(params, f64::MIN_POSITIVE)
        } else {
            mu1_continuous_tail(params, l)
        }
    };
    let continuous = if a < kappa { tail(a)? - tail(b.min(kappa))? } else { 0.0 };
    let (wlo, whi) = (kappa - window.eps1, kappa + window.eps2);
    let overlap = (b.min(whi) - a.max(wlo)).max(0.0);
    Ok(continuous + mu1_atom(params).mass * overlap / (whi - wlo))
}

/// `mu2` mass of `[a, b)` restricted to `[kappa + eps2, 2 kappa)`.
pub fn mu2_bin_mass(params: &ModelParams, window: AtomWindow, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let kappa = params.kappa();
    let lo = a.max(kappa + window.eps2);
    let hi = b.min(2.0 * kappa);
    if lo >= hi {
        return Ok(0.0);
    }
    Ok(mu2_tail(params, lo, rel_tol)? - mu2_tail(params, hi, rel_tol)?)
}

/// Compare the conditional histogram of `dataset` with `C mu1` and `C^2 mu2`.
pub fn compare_histogram(
    dataset: &LipDataset,
    params: &ModelParams,
    tail_constant: f64,
    window: AtomWindow,
) -> Result<Comparison> {
    let hist = dataset.conditional_histogram();
    compare_with_histogram(&hist, params, tail_constant, window)
}

/// As [`compare_histogram`] for an already binned sample of `L | L > 0`.
pub fn compare_with_histogram(
    hist: &Histogram,
    params: &ModelParams,
    tail_constant: f64,
    window: AtomWindow,
) -> Result<Comparison> {
    params.validate()?;
    if !(window.eps1 > 0.0 && window.eps2 > 0.0 && window.eps1 < params.kappa()) {
        return Err(Error::domain("atom window must satisfy 0 < eps1 < kappa and eps2 > 0"));
    }
    if !(tail_constant > 0.0) {
        return Err(Error::domain("tail constant must be positive"));
    }
    if !(hist.total > 0.0) {
        return Err(Error::InsufficientData(
            "no replication produced a positive intense period".into(),
        ));
    }
    let first_total = mu1_tail(params, f64::MIN_POSITIVE)?;
    let normalizer = tail_constant * first_total;
    let mut rows = Vec::with_capacity(hist.bins());
    for i in 0..hist.bins() {
        let (a, b) = (hist.edges[i], hist.edges[i + 1]);
        let w = b - a;
        let empirical = hist.density(i);
        let ldp = tail_constant * mu1_bin_mass(params, window, a, b)? / (normalizer * w);
        let hld = tail_constant * tail_constant * mu2_bin_mass(params, window, a, b, DEFAULT_REL_TOL)?
            / (normalizer * w);
        rows.push(HistRow {
            bin: i,
            bin_lo: a,
            bin_hi: b,
            bin_center: 0.5 * (a + b),
            count: hist.counts[i],
            empirical,
            ldp,
            hld,
            ratio_ldp: (ldp > 0.0).then(|| empirical / ldp),
            ratio_hld: (hld > 0.0).then(|| empirical / hld),
        });
    }
    Ok(Comparison {
        kappa: params.kappa(),
        window,
        tail_constant,
        normalizer,
        n_positive: hist.total as usize,
        rows,
    })
}

impl Comparison {
    /// Write `hist.csv`: `#` metadata lines, then one row per bin.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kappa={}", self.kappa)?;
        writeln!(w, "# eps1={}", self.window.eps1)?;
        writeln!(w, "# eps2={}", self.window.eps2)?;
        writeln!(w, "# tail_constant={}", self.tail_constant)?;
        writeln!(w, "# normalizer={}", self.normalizer)?;
        writeln!(w, "# n_positive={}", self.n_positive)?;
        let mut wtr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::stats::centred_edges;

    #[test]
    fn bin_masses_add_up() {
        let p = ModelParams::desk();
        let w = AtomWindow::default_for(&p);
        let edges = centred_edges(p.kappa(), 30.0, 2.0 * p.kappa());
        let total: f64 = edges
            .windows(2)
            .map(|e| mu1_bin_mass(&p, w, e[0], e[1]).unwrap())
            .sum();
        let expected = mu1_tail(&p, f64::MIN_POSITIVE).unwrap();
        assert!((total / expected - 1.0).abs() < 1e-12);

        let hld: f64 = edges
            .windows(2)
            .map(|e| mu2_bin_mass(&p, w, e[0], e[1], 1e-10).unwrap())
            .sum();
        let direct = mu2_tail(&p, p.kappa() + w.eps2, 1e-10).unwrap();
        assert!((hld / direct - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hld_vanishes_below_window() {
        let p = ModelParams::desk();
        let w = AtomWindow::default_for(&p);
        assert_eq!(mu2_bin_mass(&p, w, 0.0, p.kappa(), 1e-8).unwrap(), 0.0);
        assert_eq!(mu2_bin_mass(&p, w, 2.0 * p.kappa(), 3.0 * p.kappa(), 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn empty_histogram_is_insufficient() {
        let p = ModelParams::desk();
        let h = Histogram::new(vec![0.0, 1.0]);
        let err = compare_with_histogram(&h, &p, 0.1, AtomWindow::default_for(&p)).unwrap_err();
        assert_eq!(err.kind(), "insufficient_data");
    }
}

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{atom_estimate, combined_tail_estimate, mu1_tail, ModelParams};

use super::compare::AtomWindow;
use super::experiment::{LipDataset, RunRecord};
use super::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub l: f64,
    pub empirical: Estimate,
    pub predicted: f64,
}

/// Scalar results of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub params: ModelParams,
    pub n_reps: usize,
    pub n_arrivals: usize,
    pub master_seed: u64,
    pub kappa: f64,
    pub level: f64,
    pub tail_constant: f64,
    pub n_positive: usize,
    pub p_positive: Estimate,
    pub predicted_p_positive: f64,
    pub window: AtomWindow,
    /// `P(kappa - eps1 < L < kappa + eps2)`.
    pub atom_empirical: Estimate,
    pub atom_predicted: f64,
    pub mean_lost_work: Estimate,
    pub support_bound: f64,
    pub support_violations: usize,
    pub tail_curve: Vec<TailPoint>,
}

impl Summary {
    /// Summarise `dataset`; `tail_grid` points must be positive.
    pub fn new(dataset: &LipDataset, tail_constant: f64, window: AtomWindow, tail_grid: &[f64]) -> Result<Self> {
        let cfg = &dataset.config;
        let p = &cfg.params;
        let kappa = p.kappa();
        let in_window = dataset
            .records
            .iter()
            .filter(|r| r.longest > kappa - window.eps1 && r.longest < kappa + window.eps2)
            .count();
        let support_bound = 2.0 * kappa * 1.02;
        let tail_curve = tail_grid
            .iter()
            .map(|&l| {
                Ok(TailPoint {
                    l,
                    empirical: dataset.tail_fraction(l),
                    predicted: combined_tail_estimate(p, tail_constant, l)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            params: *p,
            n_reps: dataset.n_reps(),
            n_arrivals: cfg.n_arrivals,
            master_seed: cfg.master_seed,
            kappa,
            level: p.level(),
            tail_constant,
            n_positive: dataset.n_positive(),
            p_positive: dataset.positive_fraction(),
            predicted_p_positive: tail_constant * mu1_tail(p, f64::MIN_POSITIVE)?,
            window,
            atom_empirical: Estimate::binomial(in_window as u64, dataset.n_reps() as u64),
            atom_predicted: atom_estimate(p, tail_constant, window.eps1, window.eps2)?,
            mean_lost_work: dataset.mean_lost_work(),
            support_bound,
            support_violations: dataset.support_violations(support_bound).len(),
            tail_curve,
        })
    }
}

pub fn write_runs_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Serialise `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Create `path` (and its parent directory) and hand a buffered writer to `f`.
pub fn with_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::{run_lip_experiment, ExperimentConfig};

    #[test]
    fn runs_csv_has_header_and_blank_options() {
        let mut cfg = ExperimentConfig::new(ModelParams::desk(), 3, 1);
        cfg.fixed_arrival = Some(0.0);
        let d = run_lip_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_runs_csv(&d.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rep,longest,period_start,period_end,n_periods,lost_work,max_value,big_jumps"
        );
        assert_eq!(lines.next().unwrap(), "0,0.0,,,0,0.0,0.0,0");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn summary_of_empty_experiment() {
        let mut cfg = ExperimentConfig::new(ModelParams::desk(), 4, 1);
        cfg.fixed_arrival = Some(0.0);
        let d = run_lip_experiment(&cfg).unwrap();
        let p = cfg.params;
        let s = Summary::new(&d, 0.1, AtomWindow::default_for(&p), &[p.kappa()]).unwrap();
        assert_eq!(s.p_positive.value, 0.0);
        assert_eq!(s.p_positive.se, 0.0);
        assert_eq!(s.support_violations, 0);
        let mut buf = Vec::new();
        write_json(&s, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["n_reps"], 4);
        assert_eq!(v["tail_curve"][0]["empirical"]["value"], 0.0);
    }
}

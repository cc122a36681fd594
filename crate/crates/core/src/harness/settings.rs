//! Flat `key = value` run settings shared by the config file and the CLI.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::measures::ModelParams;
use crate::reflect::Embedding;

use super::experiment::{default_audit_threshold, ExperimentConfig};
use super::output::OutputFormat;

/// Every field is optional; unset fields fall back to the desk defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub alpha: Option<f64>,
    pub mean: Option<f64>,
    pub rate: Option<f64>,
    pub buffer: Option<f64>,
    pub theta: Option<f64>,
    pub arrivals: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub bin_width: Option<f64>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub embedding: Option<String>,
    pub threads: Option<usize>,
    pub audit_threshold: Option<f64>,
    pub samples: Option<usize>,
    pub walks: Option<usize>,
    pub steps: Option<usize>,
    pub rho: Option<f64>,
    pub levels: Option<String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value `{value}` for `{key}`")))
}

impl Settings {
    /// Parse a config file: one `key = value` per line, `#` starts a comment.
    /// Keys are the long flag names; `-` and `_` are interchangeable.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
            s.set(&key.trim().replace('_', "-"), value.trim())?;
        }
        Ok(s)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "alpha" => self.alpha = Some(parse_value(key, v)?),
            "mean" => self.mean = Some(parse_value(key, v)?),
            "rate" => self.rate = Some(parse_value(key, v)?),
            "buffer" => self.buffer = Some(parse_value(key, v)?),
            "theta" => self.theta = Some(parse_value(key, v)?),
            "arrivals" => self.arrivals = Some(parse_value(key, v)?),
            "reps" => self.reps = Some(parse_value(key, v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "bin-width" => self.bin_width = Some(parse_value(key, v)?),
            "grid" => self.grid = Some(v.to_string()),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Some(v.to_string()),
            "embedding" => self.embedding = Some(v.to_string()),
            "threads" => self.threads = Some(parse_value(key, v)?),
            "audit-threshold" => self.audit_threshold = Some(parse_value(key, v)?),
            "samples" => self.samples = Some(parse_value(key, v)?),
            "walks" => self.walks = Some(parse_value(key, v)?),
            "steps" => self.steps = Some(parse_value(key, v)?),
            "rho" => self.rho = Some(parse_value(key, v)?),
            "levels" => self.levels = Some(v.to_string()),
            other => return Err(Error::Parse(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: top.$f.or(self.$f)),* } };
        }
        pick!(
            alpha, mean, rate, buffer, theta, arrivals, reps, seed, bin_width, grid, out, format,
            embedding, threads, audit_threshold, samples, walks, steps, rho, levels
        )
    }

    /// Model parameters; the horizon equals the number of arrivals.
    pub fn params(&self) -> Result<ModelParams> {
        let d = ModelParams::desk();
        let horizon = self.arrivals.map_or(d.horizon, |n| n as f64);
        ModelParams::new(
            self.alpha.unwrap_or(d.alpha),
            self.mean.unwrap_or(d.mean),
            self.rate.unwrap_or(d.rate),
            self.theta.unwrap_or(d.theta),
            self.buffer.unwrap_or(d.buffer),
            horizon,
        )
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let params = self.params()?;
        let mut cfg = ExperimentConfig::new(params, self.reps.unwrap_or(10_000), self.seed.unwrap_or(1));
        if let Some(w) = self.bin_width {
            cfg.bin_width = w;
        }
        if let Some(e) = &self.embedding {
            cfg.embedding = e.parse::<Embedding>()?;
        }
        cfg.threads = self.threads;
        cfg.audit_threshold = Some(self.audit_threshold.unwrap_or_else(|| default_audit_threshold(&params)));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn format(&self) -> Result<OutputFormat> {
        self.format.as_deref().map_or(Ok(OutputFormat::Csv), str::parse)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Evaluation grid. `a,b,c` lists points; `lo:hi:n` gives `n` equally
    /// spaced points from `lo` to `hi`. Default: 40 points `kappa i / 20`.
    pub fn grid(&self, params: &ModelParams) -> Result<Vec<f64>> {
        match &self.grid {
            None => Ok((1..=40).map(|i| params.kappa() * i as f64 / 20.0).collect()),
            Some(g) => parse_grid(g),
        }
    }

    /// Levels `x` for the rate check; default `1, 1.5, 2`.
    pub fn levels(&self) -> Result<Vec<f64>> {
        match &self.levels {
            None => Ok(vec![1.0, 1.5, 2.0]),
            Some(g) => parse_grid(g),
        }
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad grid `{text}`"));
    let points: Vec<f64> = if let [lo, hi, n] = text.split(':').collect::<Vec<_>>()[..] {
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        text.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if points.is_empty() || points.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
        return Err(Error::Parse(format!("grid points must be positive and finite: `{text}`")));
    }
    Ok(points)
}

use serde::Serialize;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Binomial proportion `k / n` with `SE = sqrt(p (1 - p) / n)`.
    pub fn binomial(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                value: f64::NAN,
                se: f64::NAN,
            };
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        Self {
            value: p,
            se: (p * (1.0 - p) / n).sqrt(),
        }
    }

    /// Sample mean and its standard error.
    pub fn mean_of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self {
                value: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            se: (var / n).sqrt(),
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            se: self.se * factor.abs(),
        }
    }

    /// `(value - target) / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }
}

/// Histogram over explicit, increasing bin edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
    /// Total weight, including anything outside the edges.
    pub total: f64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Self {
        let bins = edges.len().saturating_sub(1);
        Self {
            edges,
            counts: vec![0.0; bins],
            total: 0.0,
        }
    }

    /// Bin `i` is `[edges[i], edges[i+1])`.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if self.edges.len() < 2 || x < self.edges[0] || x >= *self.edges.last()? {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }

    pub fn add(&mut self, x: f64, weight: f64) {
        self.total += weight;
        if let Some(i) = self.bin_of(x) {
            self.counts[i] += weight;
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// `counts[i] / (total * width)`.
    pub fn density(&self, i: usize) -> f64 {
        self.counts[i] / (self.total * self.width(i))
    }

    /// Counts normalised to sum to one over the bins.
    pub fn normalized_masses(&self) -> Vec<f64> {
        let inside: f64 = self.counts.iter().sum();
        self.counts.iter().map(|c| c / inside).collect()
    }
}

/// Edges of width `width` arranged so that `center` is the midpoint of a
/// bin. The first edge is 0 (the first bin may be narrower); the last edge
/// is the first one at or beyond `upper`.
pub fn centred_edges(center: f64, width: f64, upper: f64) -> Vec<f64> {
    assert!(width > 0.0, "bin width must be positive");
    let first = center - 0.5 * width;
    let k0 = (first / width).floor();
    let mut edges = vec![0.0];
    let mut k = 0.0;
    loop {
        let e = first - (k0 - k) * width;
        if e > 0.0 {
            edges.push(e);
        }
        if e >= upper {
            break;
        }
        k += 1.0;
    }
    edges
}

/// `n` equal bins spanning `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

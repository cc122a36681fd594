//! Càdlàg paths on `[0, M]` built from linear pieces and jumps.
//!
//! A [`PiecewisePath`] is an ordered list of [`Segment`]s. Segment `i` covers
//! `[start_i, start_{i+1})` (the last one covers `[start_last, M]`) and takes
//! the value `value + slope * (t - start)` there. Any mismatch between the
//! left limit at a segment boundary and the next segment's value is a jump;
//! the path is right-continuous by construction. Jumps at time 0 are measured
//! from the convention `x(0-) = 0`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub value: f64,
    pub slope: f64,
}

impl Segment {
    pub fn new(start: f64, value: f64, slope: f64) -> Self {
        Self {
            start,
            value,
            slope,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.value + self.slope * (t - self.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    horizon: f64,
    segments: Vec<Segment>,
}

/// Incremental path construction. Pieces that continue the previous one
/// (same slope, no jump) are merged, and a piece starting where the previous
/// one started replaces it.
#[derive(Debug, Clone)]
pub struct PathBuilder {
    horizon: f64,
    segments: Vec<Segment>,
}

impl PathBuilder {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            segments: Vec::new(),
        }
    }

    pub fn with_capacity(horizon: f64, capacity: usize) -> Self {
        Self {
            horizon,
            segments: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, start: f64, value: f64, slope: f64) {
        if let Some(last) = self.segments.last_mut() {
            if start == last.start {
                *last = Segment::new(start, value, slope);
                self.merge_tail();
                return;
            }
            if slope == last.slope && last.at(start) == value {
                return;
            }
        }
        self.segments.push(Segment::new(start, value, slope));
    }

    fn merge_tail(&mut self) {
        let n = self.segments.len();
        if n >= 2 {
            let (prev, last) = (self.segments[n - 2], self.segments[n - 1]);
            if prev.slope == last.slope && prev.at(last.start) == last.value {
                self.segments.pop();
            }
        }
    }

    pub fn last(&self) -> Option<&Segment> {
        self.segments.last()
    }

    pub fn finish(self) -> Result<PiecewisePath> {
        PiecewisePath::new(self.horizon, self.segments)
    }

    /// Skips validation; for callers that push strictly increasing starts in `[0, M]`.
    pub(crate) fn finish_unchecked(self) -> PiecewisePath {
        debug_assert!(PiecewisePath::new(self.horizon, self.segments.clone()).is_ok());
        PiecewisePath {
            horizon: self.horizon,
            segments: self.segments,
        }
    }
}

impl PiecewisePath {
    pub fn new(horizon: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        let first = segments
            .first()
            .ok_or_else(|| Error::domain("path needs at least one segment"))?;
        if first.start != 0.0 {
            return Err(Error::domain("first segment must start at t = 0"));
        }
        for w in segments.windows(2) {
            if !(w[1].start > w[0].start) {
                return Err(Error::domain("segment starts must be strictly increasing"));
            }
        }
        if segments.last().is_some_and(|s| s.start > horizon) {
            return Err(Error::domain("segment starts beyond the horizon"));
        }
        if segments
            .iter()
            .any(|s| !s.value.is_finite() || !s.slope.is_finite())
        {
            return Err(Error::domain("segment values must be finite"));
        }
        Ok(Self { horizon, segments })
    }

    pub fn constant(horizon: f64, value: f64) -> Result<Self> {
        Self::new(horizon, vec![Segment::new(0.0, value, 0.0)])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// End of segment `i` (the next start, or the horizon).
    #[inline]
    pub fn segment_end(&self, i: usize) -> f64 {
        self.segments
            .get(i + 1)
            .map_or(self.horizon, |s| s.start)
    }

    fn index_at(&self, t: f64) -> usize {
        self.segments
            .partition_point(|s| s.start <= t)
            .saturating_sub(1)
    }

    /// `x(t)` for `t` in `[0, M]`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(self.segments[self.index_at(t)].at(t))
    }

    /// `x(t-)`, with `x(0-) = 0`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let idx = self.segments.partition_point(|s| s.start < t) - 1;
        Ok(self.segments[idx].at(t))
    }

    pub fn end_value(&self) -> f64 {
        let last = self.segments.last().expect("path is never empty");
        last.at(self.horizon)
    }

    /// Nonzero jumps as `(time, size)`, including one at `t = 0` when `x(0) != 0`.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut left = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let size = seg.value - left;
            if size != 0.0 {
                out.push((seg.start, size));
            }
            left = seg.at(self.segment_end(i));
        }
        out
    }

    /// Rescale time by `time_factor` and values by `value_factor`:
    /// `y(t) = value_factor * x(t / time_factor)` on `[0, time_factor * M]`.
    pub fn rescale(&self, time_factor: f64, value_factor: f64) -> Result<Self> {
        if !(time_factor > 0.0) || !(value_factor.is_finite()) {
            return Err(Error::domain("rescale needs a positive time factor"));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| {
                Segment::new(
                    s.start * time_factor,
                    s.value * value_factor,
                    s.slope * value_factor / time_factor,
                )
            })
            .collect();
        Self::new(self.horizon * time_factor, segments)
    }

    /// Line-oriented dump: a `# horizon=M` line, a header, then one
    /// `t,value_left,value_right,slope` row per segment start.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(32 * (self.segments.len() + 2));
        let _ = writeln!(s, "# horizon={}", self.horizon);
        s.push_str("t,value_left,value_right,slope\n");
        let mut left = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", seg.start, left, seg.value, seg.slope);
            left = seg.at(self.segment_end(i));
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut horizon = None;
        let mut segments = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with("t,") {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(h) = rest.trim().strip_prefix("horizon=") {
                    horizon = Some(parse_f64(h)?);
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, got `{line}`")));
            }
            segments.push(Segment::new(
                parse_f64(cols[0])?,
                parse_f64(cols[2])?,
                parse_f64(cols[3])?,
            ));
        }
        let horizon = horizon.ok_or_else(|| Error::Parse("missing `# horizon=` line".into()))?;
        Self::new(horizon, segments)
    }
}

impl AsRef<PiecewisePath> for PiecewisePath {
    fn as_ref(&self) -> &PiecewisePath {
        self
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

/// Jump times and sizes of a `j`-jump path plus a linear drift.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    times: Vec<f64>,
    sizes: Vec<f64>,
    drift: f64,
}

impl JumpSpec {
    pub fn new(times: Vec<f64>, sizes: Vec<f64>, drift: f64) -> Result<Self> {
        if times.len() != sizes.len() {
            return Err(Error::domain("jump times and sizes differ in length"));
        }
        if times.first().is_some_and(|&t| !(t >= 0.0)) {
            return Err(Error::domain("jump times must be nonnegative"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("jump times must be strictly increasing"));
        }
        if sizes.iter().any(|&z| z == 0.0 || !z.is_finite()) {
            return Err(Error::domain("jump sizes must be finite and nonzero"));
        }
        if !drift.is_finite() {
            return Err(Error::domain("drift must be finite"));
        }
        Ok(Self {
            times,
            sizes,
            drift,
        })
    }

    /// Pure drift, no jumps.
    pub fn drift_only(drift: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), drift)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Step path of the partial sums `S_i`, with step `i` at time `i * M / n`.
pub fn embed_walk(increments: &[f64], horizon: f64) -> Result<PiecewisePath> {
    if increments.is_empty() {
        return Err(Error::domain("embed_walk needs at least one increment"));
    }
    if !(horizon > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    let n = increments.len() as f64;
    let mut b = PathBuilder::with_capacity(horizon, increments.len() + 1);
    b.push(0.0, 0.0, 0.0);
    let mut sum = 0.0;
    for (i, &z) in increments.iter().enumerate() {
        sum += z;
        // i + 1 == n lands exactly on the horizon
        let t = if i + 1 == increments.len() {
            horizon
        } else {
            (i + 1) as f64 * horizon / n
        };
        b.push(t, sum, 0.0);
    }
    b.finish()
}

/// `h_j^m(z, u)(t) = sum_i z_i 1{u_i <= t} + m t` on `[0, M]`.
pub fn h_j_path(spec: &JumpSpec, horizon: f64) -> Result<PiecewisePath> {
    if spec.times.last().is_some_and(|&t| t > horizon) {
        return Err(Error::domain("jump time beyond the horizon"));
    }
    let mut b = PathBuilder::with_capacity(horizon, spec.len() + 1);
    b.push(0.0, 0.0, spec.drift);
    let mut level = 0.0;
    for (&t, &z) in spec.times.iter().zip(&spec.sizes) {
        level += z;
        b.push(t, level + spec.drift * t, spec.drift);
    }
    b.finish()
}

/// Number of increments with `|z| > lambda`.
pub fn classify_jumps(increments: &[f64], lambda: f64) -> Result<usize> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {lambda}")));
    }
    Ok(increments.iter().filter(|z| z.abs() > lambda).count())
}

/// `sup_t |x(t)|`; linear pieces attain their extrema at the endpoints.
pub fn sup_norm(path: &PiecewisePath) -> f64 {
    path.segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let end = path.segment_end(i);
            s.value.abs().max(s.at(end).abs())
        })
        .fold(0.0, f64::max)
}

/// Bernstein's inequality for `n` iid zero-mean variables bounded by
/// `bound` with variance `sigma2`: `2 exp(-t^2 / (2 n sigma2 + 2/3 bound t))`.
pub fn bernstein_bound(n: u64, sigma2: f64, bound: f64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("bernstein_bound needs n >= 1"));
    }
    if !(sigma2 >= 0.0) || !(bound > 0.0) {
        return Err(Error::domain("need sigma2 >= 0 and bound > 0"));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("level must be positive, got {t}")));
    }
    let denom = 2.0 * n as f64 * sigma2 + 2.0 / 3.0 * bound * t;
    Ok(2.0 * (-t * t / denom).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_walk_examples() {
        let p = embed_walk(&[1.0, -1.0], 1.0).unwrap();
        assert_eq!(p.value_at(0.0).unwrap(), 0.0);
        assert_eq!(p.value_at(0.49).unwrap(), 0.0);
        assert_eq!(p.value_at(0.5).unwrap(), 1.0);
        assert_eq!(p.value_at(0.99).unwrap(), 1.0);
        assert_eq!(p.value_at(1.0).unwrap(), 0.0);

        let z = embed_walk(&[0.0; 5], 2.0).unwrap();
        assert_eq!(z.segments().len(), 1);
        assert_eq!(sup_norm(&z), 0.0);
        assert!(z.jumps().is_empty());

        let p = embed_walk(&[2.0, -1.0, 5.0], 3.0).unwrap();
        for (t, v) in [(0.5, 0.0), (1.5, 2.0), (2.5, 1.0), (3.0, 6.0)] {
            assert_eq!(p.value_at(t).unwrap(), v);
        }
        assert!(embed_walk(&[], 1.0).is_err());
    }

    #[test]
    fn h_j_examples() {
        let spec = JumpSpec::new(vec![0.3], vec![5.0], 0.0).unwrap();
        let p = h_j_path(&spec, 1.0).unwrap();
        assert_eq!(p.value_at(0.29).unwrap(), 0.0);
        assert_eq!(p.value_at(0.3).unwrap(), 5.0);
        assert_eq!(p.jumps(), vec![(0.3, 5.0)]);

        let spec = JumpSpec::new(vec![0.2, 0.7], vec![3.0, 4.0], -1.0).unwrap();
        let p = h_j_path(&spec, 1.0).unwrap();
        assert!((p.value_at(0.5).unwrap() - 2.5).abs() < 1e-15);
        assert!((p.value_at(0.9).unwrap() - 6.1).abs() < 1e-15);

        let spec = JumpSpec::drift_only(-0.5).unwrap();
        let p = h_j_path(&spec, 4.0).unwrap();
        assert!(p.jumps().is_empty());
        assert_eq!(p.end_value(), -2.0);

        assert!(JumpSpec::new(vec![0.2, 0.2], vec![1.0, 1.0], 0.0).is_err());
        assert!(JumpSpec::new(vec![0.2], vec![0.0], 0.0).is_err());
        let late = JumpSpec::new(vec![2.0], vec![1.0], 0.0).unwrap();
        assert!(h_j_path(&late, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_jumps(&[1.0, -5.0, 2.0], 3.0).unwrap(), 1);
        assert_eq!(classify_jumps(&[1.0, -5.0, 2.0], 5.5).unwrap(), 0);
        assert!(classify_jumps(&[1.0], 0.0).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&PiecewisePath::constant(1.0, 0.0).unwrap()), 0.0);
        assert_eq!(sup_norm(&embed_walk(&[2.0, -5.0], 1.0).unwrap()), 3.0);
        let spec = JumpSpec::new(vec![0.5], vec![4.0], -1.0).unwrap();
        assert_eq!(sup_norm(&h_j_path(&spec, 1.0).unwrap()), 3.5);
    }

    #[test]
    fn bernstein_examples() {
        let tiny = bernstein_bound(10, 1.0, 1.0, 1e-12).unwrap();
        assert!((tiny - 2.0).abs() < 1e-20 + 1e-12);
        let v = bernstein_bound(1, 1.0, 1.0, 3.0).unwrap();
        assert!((v - 2.0 * (-9.0f64 / 4.0).exp()).abs() < 1e-15);
        let grid: Vec<f64> = (1..200).map(|k| 0.25 * k as f64).collect();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&t| bernstein_bound(100, 1.0 / 3.0, 1.0, t).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals.iter().all(|&b| b > 0.0 && b <= 2.0));
        assert!(bernstein_bound(10, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn left_limit_and_value() {
        let spec = JumpSpec::new(vec![0.0, 0.5], vec![2.0, 1.0], -1.0).unwrap();
        let p = h_j_path(&spec, 1.0).unwrap();
        assert_eq!(p.left_limit(0.0).unwrap(), 0.0);
        assert_eq!(p.value_at(0.0).unwrap(), 2.0);
        assert_eq!(p.left_limit(0.5).unwrap(), 1.5);
        assert_eq!(p.value_at(0.5).unwrap(), 2.5);
        assert_eq!(p.jumps(), vec![(0.0, 2.0), (0.5, 1.0)]);
        assert!(p.value_at(1.5).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let spec = JumpSpec::new(vec![0.25, 0.75], vec![1.5, -0.5], 0.125).unwrap();
        let p = h_j_path(&spec, 2.0).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("# horizon=2\nt,value_left,value_right,slope\n"));
        let back = PiecewisePath::read_text(text.as_bytes()).unwrap();
        assert_eq!(back, p);
        assert!(PiecewisePath::read_text("0,0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn builder_merges_and_replaces() {
        let mut b = PathBuilder::new(3.0);
        b.push(0.0, 0.0, 1.0);
        b.push(1.0, 1.0, 1.0); // continuation
        b.push(2.0, 5.0, 0.0);
        b.push(2.0, 2.0, 1.0); // replaces, then merges with the first piece
        let p = b.finish().unwrap();
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.end_value(), 3.0);
    }

    #[test]
    fn rejects_malformed_paths() {
        assert!(PiecewisePath::new(1.0, vec![]).is_err());
        assert!(PiecewisePath::new(1.0, vec![Segment::new(0.1, 0.0, 0.0)]).is_err());
        assert!(PiecewisePath::new(
            1.0,
            vec![Segment::new(0.0, 0.0, 0.0), Segment::new(0.0, 1.0, 0.0)]
        )
        .is_err());
        assert!(PiecewisePath::new(0.0, vec![Segment::new(0.0, 0.0, 0.0)]).is_err());
    }
}

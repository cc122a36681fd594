//! Intense periods: maximal intervals on which a path stays strictly above a level.
//!
//! Periods are reported half-open, `[s, t)`. Crossing times on linear pieces
//! are solved exactly; a period still open at the horizon closes at `M`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathspace::PiecewisePath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensePeriod {
    pub start: f64,
    pub end: f64,
}

impl IntensePeriod {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensePeriodSet {
    level: f64,
    periods: Vec<IntensePeriod>,
}

impl IntensePeriodSet {
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn periods(&self) -> &[IntensePeriod] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// First period of maximal length.
    pub fn longest_period(&self) -> Option<IntensePeriod> {
        self.periods
            .iter()
            .copied()
            .fold(None, |best: Option<IntensePeriod>, p| match best {
                Some(b) if b.length() >= p.length() => Some(b),
                _ => Some(p),
            })
    }

    /// `L`, or 0 when there is no period.
    pub fn longest(&self) -> f64 {
        self.longest_period().map_or(0.0, |p| p.length())
    }

    /// Lebesgue measure of the exceedance set.
    pub fn total_length(&self) -> f64 {
        self.periods.iter().map(IntensePeriod::length).sum()
    }
}

/// Part of one linear piece lying strictly above the level.
struct Exceedance {
    lo: f64,
    hi: f64,
    from_start: bool,
    to_end: bool,
}

fn piece_exceedance(a: f64, b: f64, v0: f64, slope: f64, level: f64) -> Option<Exceedance> {
    if slope == 0.0 {
        return (v0 > level).then_some(Exceedance {
            lo: a,
            hi: b,
            from_start: true,
            to_end: true,
        });
    }
    let cross = a + (level - v0) / slope;
    if slope > 0.0 {
        if v0 > level {
            Some(Exceedance {
                lo: a,
                hi: b,
                from_start: true,
                to_end: true,
            })
        } else if cross < b {
            Some(Exceedance {
                lo: cross,
                hi: b,
                from_start: false,
                to_end: true,
            })
        } else {
            None
        }
    } else if v0 > level {
        let to_end = cross >= b;
        Some(Exceedance {
            lo: a,
            hi: if to_end { b } else { cross },
            from_start: true,
            to_end,
        })
    } else {
        None
    }
}

/// All intense periods of `path` above `level`, in time order.
pub fn enumerate_periods<P: AsRef<PiecewisePath>>(path: &P, level: f64) -> Result<IntensePeriodSet> {
    let path = path.as_ref();
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::domain(format!("level must be finite and >= 0, got {level}")));
    }
    let mut periods = Vec::new();
    let mut open: Option<f64> = None;
    let close = |start: f64, end: f64, periods: &mut Vec<IntensePeriod>| {
        if end > start {
            periods.push(IntensePeriod { start, end });
        }
    };
    for (i, seg) in path.segments().iter().enumerate() {
        let a = seg.start;
        let b = path.segment_end(i);
        let ex = piece_exceedance(a, b, seg.value, seg.slope, level);
        if let Some(start) = open {
            if !ex.as_ref().is_some_and(|e| e.from_start) {
                close(start, a, &mut periods);
                open = None;
            }
        }
        if let Some(e) = ex {
            let start = *open.get_or_insert(e.lo);
            if !e.to_end {
                close(start, e.hi, &mut periods);
                open = None;
            }
        }
    }
    if let Some(start) = open {
        close(start, path.horizon(), &mut periods);
    }
    Ok(IntensePeriodSet { level, periods })
}

/// Length of the longest intense period above `level` (0 if none).
pub fn longest_intense<P: AsRef<PiecewisePath>>(path: &P, level: f64) -> Result<f64> {
    Ok(enumerate_periods(path, level)?.longest())
}

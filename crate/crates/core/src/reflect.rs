//! Finite-buffer queue dynamics.
//!
//! The queue content is the two-sided Skorohod reflection of the netput path
//! on `[0, K]`. Reflection is event-driven and exact: every linear piece is
//! clamped at the boundary-hitting time, which is solved in closed form.
//!
//! Two embeddings of the arrival sequence are supported (see [`Embedding`]).
//! Only the step embedding reproduces the buffered Lindley recursion
//! `Q_n = min(max(Q_{n-1} + A_n - c, 0), K)` at integer times; the drift
//! embedding serves before it admits, i.e. `Q_n = min(max(Q_{n-1} - c, 0) + A_n, K)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavytail::ArrivalLaw;
use crate::pathspace::{PathBuilder, PiecewisePath, Segment};
use crate::seeding::{draw_arrivals, StreamRng};

use rand::SeedableRng;

/// How the arrival sequence `A_1, A_2, ...` is embedded in continuous time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// `sum_i (A_i - c) 1{t >= i}`: pure steps at integer epochs.
    #[default]
    Step,
    /// `sum_i A_i 1{t >= i} - c t`: upward jumps at epochs, linear service in between.
    Drift,
}

impl std::str::FromStr for Embedding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(Embedding::Step),
            "drift" => Ok(Embedding::Drift),
            other => Err(Error::Parse(format!("unknown embedding `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueModel {
    buffer: f64,
    service_rate: f64,
    arrivals: ArrivalLaw,
    horizon: f64,
    embedding: Embedding,
}

impl QueueModel {
    pub fn new(
        buffer: f64,
        service_rate: f64,
        arrivals: ArrivalLaw,
        horizon: f64,
        embedding: Embedding,
    ) -> Result<Self> {
        if !(buffer > 0.0) || !buffer.is_finite() {
            return Err(Error::InvalidParameter {
                name: "buffer",
                value: buffer,
                reason: "buffer must be positive and finite",
            });
        }
        if !(service_rate > arrivals.mean()) {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: service_rate,
                reason: "service rate must exceed the mean arrival",
            });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                reason: "horizon must be positive and finite",
            });
        }
        Ok(Self {
            buffer,
            service_rate,
            arrivals,
            horizon,
            embedding,
        })
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }

    pub fn service_rate(&self) -> f64 {
        self.service_rate
    }

    pub fn arrivals(&self) -> &ArrivalLaw {
        &self.arrivals
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Self {
        self.embedding = embedding;
        self
    }
}

/// Lower (idle) and upper (lost work) regulator paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Regulators {
    pub lower: PiecewisePath,
    pub upper: PiecewisePath,
}

/// A reflected path on `[0, K]` with its regulator totals.
#[derive(Debug, Clone, PartialEq)]
pub struct QueuePath {
    path: PiecewisePath,
    buffer: f64,
    input_end: f64,
    lower_total: f64,
    upper_total: f64,
    max_value: f64,
    regulators: Option<Regulators>,
}

impl QueuePath {
    pub fn path(&self) -> &PiecewisePath {
        &self.path
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }

    /// Value of the unreflected input at the horizon.
    pub fn input_end(&self) -> f64 {
        self.input_end
    }

    /// `l(M)`.
    pub fn lower_total(&self) -> f64 {
        self.lower_total
    }

    /// `u(M)`, the work lost to overflow.
    pub fn lost_work(&self) -> f64 {
        self.upper_total
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn regulators(&self) -> Option<&Regulators> {
        self.regulators.as_ref()
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.path.value_at(t)
    }

    /// Time compressed by `n` and values divided by `n`.
    pub fn shrink(&self, n: f64) -> Result<QueuePath> {
        let f = 1.0 / n;
        let regulators = match &self.regulators {
            Some(r) => Some(Regulators {
                lower: r.lower.rescale(f, f)?,
                upper: r.upper.rescale(f, f)?,
            }),
            None => None,
        };
        Ok(QueuePath {
            path: self.path.rescale(f, f)?,
            buffer: self.buffer * f,
            input_end: self.input_end * f,
            lower_total: self.lower_total * f,
            upper_total: self.upper_total * f,
            max_value: self.max_value * f,
            regulators,
        })
    }
}

impl AsRef<PiecewisePath> for QueuePath {
    fn as_ref(&self) -> &PiecewisePath {
        &self.path
    }
}

/// Buffered Lindley recursion step.
pub fn lindley_step(q_prev: f64, a: f64, c: f64, buffer: f64) -> Result<f64> {
    if !(0.0..=buffer).contains(&q_prev) {
        return Err(Error::domain(format!(
            "queue content {q_prev} outside [0, {buffer}]"
        )));
    }
    if !(a >= 0.0) {
        return Err(Error::domain(format!("arrival must be nonnegative, got {a}")));
    }
    Ok((q_prev + a - c).max(0.0).min(buffer))
}

/// One unit of the drift embedding at integer times: serve for a unit of
/// time, then admit the arrival.
pub fn drift_lindley_step(q_prev: f64, a: f64, c: f64, buffer: f64) -> Result<f64> {
    if !(0.0..=buffer).contains(&q_prev) {
        return Err(Error::domain(format!(
            "queue content {q_prev} outside [0, {buffer}]"
        )));
    }
    if !(a >= 0.0) {
        return Err(Error::domain(format!("arrival must be nonnegative, got {a}")));
    }
    Ok(((q_prev - c).max(0.0) + a).min(buffer))
}

/// Input piece: at `start` the input jumps by `jump`, then moves with `slope`
/// until the next piece starts.
#[derive(Debug, Clone, Copy)]
struct InputPiece {
    start: f64,
    jump: f64,
    slope: f64,
}

struct Reflector {
    buffer: f64,
    v: f64,
    lower: f64,
    upper: f64,
    max_value: f64,
    input: f64,
    out: PathBuilder,
    regs: Option<(PathBuilder, PathBuilder)>,
}

impl Reflector {
    fn new(horizon: f64, buffer: f64, capacity: usize, track: bool) -> Self {
        Self {
            buffer,
            v: 0.0,
            lower: 0.0,
            upper: 0.0,
            max_value: 0.0,
            input: 0.0,
            out: PathBuilder::with_capacity(horizon, capacity),
            regs: track.then(|| (PathBuilder::new(horizon), PathBuilder::new(horizon))),
        }
    }

    fn emit(&mut self, t: f64, value: f64, slope: f64, lower_slope: f64, upper_slope: f64) {
        self.out.push(t, value, slope);
        if let Some((l, u)) = self.regs.as_mut() {
            l.push(t, self.lower, lower_slope);
            u.push(t, self.upper, upper_slope);
        }
    }

    fn piece(&mut self, p: InputPiece, end: f64) {
        let k = self.buffer;
        self.input += p.jump + p.slope * (end - p.start);

        let mut v = self.v + p.jump;
        if v > k {
            self.upper += v - k;
            v = k;
        } else if v < 0.0 {
            self.lower -= v;
            v = 0.0;
        }
        self.max_value = self.max_value.max(v);

        let dt = end - p.start;
        let s = p.slope;
        if s > 0.0 {
            if v >= k {
                self.emit(p.start, k, 0.0, 0.0, s);
                self.upper += s * dt;
            } else {
                let hit = settle(Segment::new(p.start, v, s), p.start + (k - v) / s, k);
                if hit < end {
                    self.emit(p.start, v, s, 0.0, 0.0);
                    self.emit(hit, k, 0.0, 0.0, s);
                    self.upper += (s * dt - (k - v)).max(0.0);
                    v = k;
                } else {
                    self.emit(p.start, v, s, 0.0, 0.0);
                    v = (v + s * dt).min(k);
                }
            }
        } else if s < 0.0 {
            if v <= 0.0 {
                self.emit(p.start, 0.0, 0.0, -s, 0.0);
                self.lower -= s * dt;
            } else {
                let hit = settle(Segment::new(p.start, v, s), p.start + v / -s, k);
                if hit < end {
                    self.emit(p.start, v, s, 0.0, 0.0);
                    self.emit(hit, 0.0, 0.0, -s, 0.0);
                    self.lower += (-s * dt - v).max(0.0);
                    v = 0.0;
                } else {
                    self.emit(p.start, v, s, 0.0, 0.0);
                    v = (v + s * dt).max(0.0);
                }
            }
        } else {
            self.emit(p.start, v, 0.0, 0.0, 0.0);
        }
        self.max_value = self.max_value.max(v);
        self.v = v;
    }

    fn finish(self) -> QueuePath {
        let regulators = self.regs.map(|(l, u)| Regulators {
            lower: l.finish_unchecked(),
            upper: u.finish_unchecked(),
        });
        QueuePath {
            path: self.out.finish_unchecked(),
            buffer: self.buffer,
            input_end: self.input,
            lower_total: self.lower,
            upper_total: self.upper,
            max_value: self.max_value,
            regulators,
        }
    }
}

/// Largest float not after `hit` at which `seg` still evaluates inside `[0, K]`.
fn settle(seg: Segment, mut hit: f64, buffer: f64) -> f64 {
    while hit > seg.start && !(0.0..=buffer).contains(&seg.at(hit)) {
        hit = hit.next_down();
    }
    hit
}

fn reflect_pieces(pieces: &[InputPiece], horizon: f64, buffer: f64, track: bool) -> QueuePath {
    let mut r = Reflector::new(horizon, buffer, pieces.len() * 2, track);
    for (i, p) in pieces.iter().enumerate() {
        let end = pieces.get(i + 1).map_or(horizon, |n| n.start);
        r.piece(*p, end);
    }
    r.finish()
}

fn check_buffer(buffer: f64) -> Result<()> {
    if !(buffer > 0.0) || !buffer.is_finite() {
        return Err(Error::domain(format!("buffer must be positive, got {buffer}")));
    }
    Ok(())
}

/// Two-sided reflection of `input` on `[0, K]`, regulator paths included.
pub fn skorohod_reflect(input: &PiecewisePath, buffer: f64) -> Result<QueuePath> {
    reflect_path(input, buffer, true)
}

/// As [`skorohod_reflect`], optionally skipping the regulator paths.
pub fn reflect_path(input: &PiecewisePath, buffer: f64, track_regulators: bool) -> Result<QueuePath> {
    check_buffer(buffer)?;
    let segs = input.segments();
    if segs[0].value != 0.0 {
        return Err(Error::domain(format!(
            "reflection needs input(0) = 0, got {}",
            segs[0].value
        )));
    }
    let mut left = 0.0;
    let pieces: Vec<InputPiece> = segs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let piece = InputPiece {
                start: s.start,
                jump: s.value - left,
                slope: s.slope,
            };
            left = s.at(input.segment_end(i));
            piece
        })
        .collect();
    Ok(reflect_pieces(&pieces, input.horizon(), buffer, track_regulators))
}

fn check_epochs(n: usize, horizon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("need at least one arrival"));
    }
    if n as f64 > horizon {
        return Err(Error::domain(format!(
            "{n} arrivals at integer epochs do not fit in horizon {horizon}"
        )));
    }
    Ok(())
}

fn arrival_pieces(arrivals: &[f64], c: f64, embedding: Embedding) -> Vec<InputPiece> {
    let base_slope = match embedding {
        Embedding::Step => 0.0,
        Embedding::Drift => -c,
    };
    let mut pieces = Vec::with_capacity(arrivals.len() + 1);
    pieces.push(InputPiece {
        start: 0.0,
        jump: 0.0,
        slope: base_slope,
    });
    pieces.extend(arrivals.iter().enumerate().map(|(i, &a)| InputPiece {
        start: (i + 1) as f64,
        jump: match embedding {
            Embedding::Step => a - c,
            Embedding::Drift => a,
        },
        slope: base_slope,
    }));
    pieces
}

/// Unreflected netput path for an explicit arrival sequence (arrival `i` at epoch `i`).
pub fn arrival_input_path(
    arrivals: &[f64],
    c: f64,
    horizon: f64,
    embedding: Embedding,
) -> Result<PiecewisePath> {
    check_epochs(arrivals.len(), horizon)?;
    let mut b = PathBuilder::with_capacity(horizon, arrivals.len() + 1);
    let mut level = 0.0;
    for p in arrival_pieces(arrivals, c, embedding) {
        level += p.jump;
        // drift embedding: value at epoch i is sum_{k<=i} A_k - c i
        let value = level + p.slope * p.start;
        b.push(p.start, value, p.slope);
    }
    b.finish()
}

/// Queue driven by an explicit arrival sequence.
pub fn simulate_queue_with_arrivals(
    model: &QueueModel,
    arrivals: &[f64],
    track_regulators: bool,
) -> Result<QueuePath> {
    check_epochs(arrivals.len(), model.horizon)?;
    if arrivals.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::domain("arrivals must be finite and nonnegative"));
    }
    let pieces = arrival_pieces(arrivals, model.service_rate, model.embedding);
    Ok(reflect_pieces(
        &pieces,
        model.horizon,
        model.buffer,
        track_regulators,
    ))
}

/// Queue path for `n_arrivals` arrivals drawn from the model's law with a
/// generator seeded by `seed`. Deterministic in `(model, n_arrivals, seed)`.
pub fn simulate_queue(model: &QueueModel, n_arrivals: usize, seed: u64) -> Result<QueuePath> {
    let mut rng = StreamRng::seed_from_u64(seed);
    check_epochs(n_arrivals, model.horizon)?;
    let arrivals = draw_arrivals(&model.arrivals, n_arrivals, &mut rng);
    simulate_queue_with_arrivals(model, &arrivals, true)
}

/// Sampler for the scaled queue `Q^{nK}(n t) / n` on `[0, M]`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledQueue {
    model: QueueModel,
    big: QueueModel,
    n: u32,
}

impl ScaledQueue {
    pub fn scale(&self) -> u32 {
        self.n
    }

    /// Model of the unscaled queue with buffer `nK` on horizon `nM`.
    pub fn unscaled_model(&self) -> &QueueModel {
        &self.big
    }

    /// One scaled path driven by `n * n_arrivals` arrivals.
    pub fn sample(&self, n_arrivals: usize, seed: u64) -> Result<QueuePath> {
        simulate_queue(&self.big, n_arrivals * self.n as usize, seed)?.shrink(f64::from(self.n))
    }

    /// Scaled path for an explicit arrival stream of the big queue.
    pub fn from_arrivals(&self, arrivals: &[f64]) -> Result<QueuePath> {
        simulate_queue_with_arrivals(&self.big, arrivals, true)?.shrink(f64::from(self.n))
    }

    pub fn model(&self) -> &QueueModel {
        &self.model
    }
}

pub fn scaled_queue(model: &QueueModel, n: u32) -> Result<ScaledQueue> {
    if n == 0 {
        return Err(Error::domain("scale must be at least 1"));
    }
    let f = f64::from(n);
    let big = QueueModel {
        buffer: model.buffer * f,
        horizon: model.horizon * f,
        ..*model
    };
    Ok(ScaledQueue {
        model: *model,
        big,
        n,
    })
}

//! Event sequences and inter-arrival sequences.
//!
//! An [`EventSequence`] is a strictly increasing list of occurrence times on
//! the half-line; an [`InterArrivalSequence`] is the list of positive waiting
//! times between consecutive events. Waiting times are taken between
//! consecutive events only; the gap from the observation origin to the first
//! event is treated as metadata, not as a waiting-time sample, because real
//! recordings rarely guarantee an event at the origin.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use rand::Rng;

/// Strictly increasing event timestamps plus the observation start.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    times: Vec<f64>,
    origin: f64,
}

/// Positive waiting times between consecutive events.
#[derive(Debug, Clone, PartialEq)]
pub struct InterArrivalSequence {
    taus: Vec<f64>,
}

impl EventSequence {
    /// Build a sequence with observation origin 0.
    pub fn new(times: Vec<f64>) -> Result<Self> {
        Self::with_origin(times, 0.0)
    }

    /// Build a sequence, validating strict increase and `times >= origin`.
    ///
    /// Duplicate timestamps are rejected: the processes modelled here are
    /// simple (at most one occurrence at any instant). Tick data with ties
    /// must be jittered at ingestion.
    pub fn with_origin(times: Vec<f64>, origin: f64) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidEvents("origin must be finite".into()));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidEvents(format!("times[{i}] is not finite")));
            }
            if t < origin {
                return Err(Error::InvalidEvents(format!(
                    "times[{i}] = {t} precedes origin {origin}"
                )));
            }
            if i > 0 && times[i - 1] >= t {
                return Err(Error::InvalidEvents(format!(
                    "times must be strictly increasing; times[{}] = {} !< times[{}] = {}",
                    i - 1,
                    times[i - 1],
                    i,
                    t
                )));
            }
        }
        Ok(EventSequence { times, origin })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// N(b) - N(a): number of events in the half-open window `(start, end]`.
    pub fn count_in(&self, window_start: f64, window_end: f64) -> Result<usize> {
        if window_start > window_end {
            return Err(Error::InvalidParameter(format!(
                "inverted window: ({window_start}, {window_end}]"
            )));
        }
        let lo = self.times.partition_point(|&t| t <= window_start);
        let hi = self.times.partition_point(|&t| t <= window_end);
        Ok(hi - lo)
    }
}

impl InterArrivalSequence {
    /// Validate that every waiting time is finite and strictly positive.
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        for (i, &tau) in taus.iter().enumerate() {
            if !tau.is_finite() || tau <= 0.0 {
                return Err(Error::InvalidInterArrivals(format!(
                    "taus[{i}] = {tau} must be a positive finite duration"
                )));
            }
        }
        Ok(InterArrivalSequence { taus })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.taus.is_empty() {
            return f64::NAN;
        }
        self.taus.iter().sum::<f64>() / self.taus.len() as f64
    }

    /// Events at `origin + cumulative sums`; the origin itself carries no event.
    pub fn to_events(&self, origin: f64) -> Result<EventSequence> {
        from_interarrivals(self, origin)
    }

    /// Events at the origin and at each cumulative sum, so that every waiting
    /// time in `self` is an inter-event gap of the result. This is the
    /// construction used when rebuilding a sequence for aging: the origin
    /// plays the role of the starting event.
    pub fn to_events_anchored(&self, origin: f64) -> EventSequence {
        let mut times = Vec::with_capacity(self.taus.len() + 1);
        let mut t = origin;
        times.push(t);
        for &tau in &self.taus {
            t += tau;
            times.push(t);
        }
        EventSequence { times, origin }
    }
}

/// Waiting times between consecutive events: `taus[i] = times[i+1] - times[i]`.
///
/// Needs at least two events; yields `len - 1` waiting times.
pub fn to_interarrivals(events: &EventSequence) -> Result<InterArrivalSequence> {
    if events.len() < 2 {
        return Err(Error::TooFewEvents {
            need: 2,
            got: events.len(),
        });
    }
    let taus = events.times.windows(2).map(|w| w[1] - w[0]).collect();
    // Strict increase guarantees positivity.
    Ok(InterArrivalSequence { taus })
}

/// Occurrence epochs as cumulative sums: `times[k] = origin + sum(taus[..=k])`.
pub fn from_interarrivals(taus: &InterArrivalSequence, origin: f64) -> Result<EventSequence> {
    if !origin.is_finite() {
        return Err(Error::InvalidEvents("origin must be finite".into()));
    }
    let mut times = Vec::with_capacity(taus.len());
    let mut t = origin;
    for &tau in &taus.taus {
        t += tau;
        times.push(t);
    }
    Ok(EventSequence { times, origin })
}

/// Uniform random permutation of the waiting times.
///
/// The multiset of values is preserved exactly; the draw is a Fisher–Yates
/// pass over the handle's stream, so the result is deterministic under
/// `(seed, stream)`.
pub fn shuffle(taus: &InterArrivalSequence, rng: &RngHandle) -> InterArrivalSequence {
    let mut out = taus.taus.clone();
    let mut r = rng.rng();
    for i in (1..out.len()).rev() {
        let j = r.random_range(0..=i);
        out.swap(i, j);
    }
    InterArrivalSequence { taus: out }
}

/// How a newline-delimited number file should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Timestamps,
    InterArrivals,
}

/// Parsed content of a newline-delimited decimal file.
#[derive(Debug, Clone)]
pub enum ParsedSequence {
    Events(EventSequence),
    InterArrivals(InterArrivalSequence),
}

/// Parse newline-delimited decimal text: one number per line, `#` comments
/// and blank lines ignored.
///
/// With `jitter = Some(eps)`, ties in timestamp mode are broken by adding
/// uniform noise in `(0, eps)` to the later of two equal values; off by
/// default because jitter changes the data.
pub fn parse_sequence(
    text: &str,
    kind: SequenceKind,
    jitter: Option<(f64, &RngHandle)>,
) -> Result<ParsedSequence> {
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("{e}: {line:?}"),
        })?;
        values.push(v);
    }
    match kind {
        SequenceKind::InterArrivals => Ok(ParsedSequence::InterArrivals(
            InterArrivalSequence::new(values)?,
        )),
        SequenceKind::Timestamps => {
            if let Some((eps, handle)) = jitter {
                if eps <= 0.0 {
                    return Err(Error::InvalidParameter("jitter must be positive".into()));
                }
                let mut r = handle.rng();
                for i in 1..values.len() {
                    if values[i] <= values[i - 1] {
                        let u: f64 = r.random();
                        values[i] = values[i - 1] + u.max(f64::MIN_POSITIVE) * eps;
                    }
                }
            }
            Ok(ParsedSequence::Events(EventSequence::new(values)?))
        }
    }
}

/// Serialize values in the same newline format, full round-trip precision.
pub fn format_sequence(values: &[f64], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        for line in h.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

//! The aging experiment.
//!
//! An observer with latency `t_a` opens a blind window of that length at an
//! event and records only the distance from the window end to the first event
//! it can perceive. Repeating this along a sequence yields the aged waiting
//! times. Comparing them against the same procedure applied to a shuffled
//! copy of the original inter-arrival times (which destroys inter-event
//! dependence while preserving the marginal law) is the basis of the whole
//! test: the two agree in distribution exactly when the process is renewal.
//!
//! The shuffle is applied to the original sequence *before* aging. Shuffling
//! the aged values after the fact would leave their empirical distribution
//! untouched and make the comparison vacuous.

use crate::error::{Error, Result};
use crate::events::{shuffle, EventSequence, InterArrivalSequence};
use crate::rng::RngHandle;

/// Window placement policy for the aging pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgeMode {
    /// Non-overlapping windows: restart at each detected event. The default;
    /// samples are non-overlapping portions of distinct laminar regions.
    Sequential,
    /// One window per event. Samples overlap and are statistically
    /// dependent; intended for ensemble-style diagnostics only.
    PerEvent,
}

impl AgeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgeMode::Sequential => "sequential",
            AgeMode::PerEvent => "per_event",
        }
    }
}

/// Aged waiting times recorded at one latency.
#[derive(Debug, Clone)]
pub struct AgedSample {
    pub t_a: f64,
    pub taus: Vec<f64>,
    /// Windows that extended past the last event and were discarded.
    pub n_discarded: usize,
    pub mode: AgeMode,
}

impl AgedSample {
    /// Overlapping windows produce statistically dependent samples.
    pub fn is_dependent(&self) -> bool {
        self.mode == AgeMode::PerEvent
    }
}

/// Pareto-type waiting-time law with survival `(theta / (tau + theta))^(mu-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoLaw {
    mu: f64,
    theta: f64,
}

impl ParetoLaw {
    pub fn new(mu: f64, theta: f64) -> Result<Self> {
        if (mu <= 1.0 || mu.is_nan()) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Pareto exponent mu = {mu} must exceed 1"
            )));
        }
        if (theta <= 0.0 || theta.is_nan()) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Pareto scale theta = {theta} must be positive"
            )));
        }
        Ok(ParetoLaw { mu, theta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Mean waiting time `theta / (mu - 2)`, defined only for mu > 2.
    pub fn mean(&self) -> Option<f64> {
        (self.mu > 2.0).then(|| self.theta / (self.mu - 2.0))
    }
}

/// Run the aging pass at latency `t_a`.
///
/// Sequential mode: the first window opens at the first event and spans
/// `t_a`; the recorded value is the distance from the window end to the first
/// event strictly after it, and the next window opens at that event. A final
/// window with no event beyond it is discarded and counted. At `t_a = 0` the
/// pass reproduces the plain inter-arrival sequence.
///
/// Per-event mode opens one window at every event instead.
pub fn age_sequence(events: &EventSequence, t_a: f64, mode: AgeMode) -> Result<AgedSample> {
    if events.is_empty() {
        return Err(Error::InvalidEvents("cannot age an empty sequence".into()));
    }
    if (t_a < 0.0 || t_a.is_nan()) || !t_a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "latency t_a = {t_a} must be >= 0"
        )));
    }
    let times = events.times();
    let mut taus = Vec::new();
    let mut n_discarded = 0usize;

    match mode {
        AgeMode::Sequential => {
            let mut i = 0usize;
            let mut j = 0usize;
            loop {
                let window_end = times[i] + t_a;
                // First event strictly after the window end. The scan pointer
                // only moves forward, so the whole pass is linear.
                if j <= i {
                    j = i + 1;
                }
                while j < times.len() && times[j] <= window_end {
                    j += 1;
                }
                if j == times.len() {
                    n_discarded += 1;
                    break;
                }
                taus.push(times[j] - window_end);
                i = j;
            }
        }
        AgeMode::PerEvent => {
            let mut j = 0usize;
            for i in 0..times.len() {
                let window_end = times[i] + t_a;
                if j <= i {
                    j = i + 1;
                }
                while j < times.len() && times[j] <= window_end {
                    j += 1;
                }
                if j == times.len() {
                    // Every remaining window also runs past the end.
                    n_discarded += times.len() - i;
                    break;
                }
                taus.push(times[j] - window_end);
            }
        }
    }

    if taus.is_empty() {
        return Err(Error::EmptyAgedSample { t_a, n_discarded });
    }
    Ok(AgedSample {
        t_a,
        taus,
        n_discarded,
        mode,
    })
}

/// Renewal baseline: shuffle the original inter-arrival times, rebuild the
/// event sequence (anchored so every shuffled value is an inter-event gap),
/// and age the rebuilt sequence.
pub fn shuffled_aged(
    taus: &InterArrivalSequence,
    t_a: f64,
    rng: &RngHandle,
    mode: AgeMode,
) -> Result<AgedSample> {
    if taus.is_empty() {
        return Err(Error::InvalidInterArrivals(
            "cannot age an empty sequence".into(),
        ));
    }
    let shuffled = shuffle(taus, rng);
    let events = shuffled.to_events_anchored(0.0);
    age_sequence(&events, t_a, mode)
}

/// Density of the aged waiting time for exponential(lambda) input, measured
/// from the window end: by memorylessness it equals the unaged law,
/// `lambda * exp(-lambda * tau)`, for every latency.
pub fn aged_pdf_exponential(lambda: f64, _t_a: f64, tau: f64) -> Result<f64> {
    if (lambda <= 0.0 || lambda.is_nan()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate lambda = {lambda} must be positive"
        )));
    }
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be >= 0")));
    }
    Ok(lambda * (-lambda * tau).exp())
}

/// Aged waiting-time density for a Pareto law with `2 < mu < 3`, in the
/// asymptotic regime where the renewal rate has settled to `(mu-2)/theta`:
///
/// ```text
/// psi_ta(tau) = (mu-2) theta^(mu-2) [ (tau+theta)^(1-mu) - (t_a+tau+theta)^(1-mu) ]
/// ```
///
/// `t_a` may be `f64::INFINITY`, giving the limiting law with exponent
/// `mu - 1`: aging a heavy-tailed renewal process lowers the tail exponent
/// by one. The `(mu-2)` prefactor is forced by normalization of that limit.
pub fn aged_pdf_pareto(law: &ParetoLaw, t_a: f64, tau: f64) -> Result<f64> {
    if !(law.mu > 2.0 && law.mu < 3.0) {
        return Err(Error::UnsupportedRegime(format!(
            "aged Pareto density requires 2 < mu < 3, got mu = {}",
            law.mu
        )));
    }
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be >= 0")));
    }
    if t_a < 0.0 || t_a.is_nan() {
        return Err(Error::InvalidParameter(format!("t_a = {t_a} must be >= 0")));
    }
    let (mu, theta) = (law.mu, law.theta);
    let head = (tau + theta).powf(1.0 - mu);
    // powf maps infinity to 0 here, so t_a = inf needs no special case.
    let tail = (t_a + tau + theta).powf(1.0 - mu);
    Ok((mu - 2.0) * theta.powf(mu - 2.0) * (head - tail))
}

/// Survival probability of the Pareto law: `(theta/(tau+theta))^(mu-1)`
/// brand new, `(theta/(tau+theta))^(mu-2)` fully aged (requires mu > 2).
pub fn survival_pareto(law: &ParetoLaw, tau: f64, aged: bool) -> Result<f64> {
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be >= 0")));
    }
    if aged && law.mu <= 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "aged survival requires mu > 2, got mu = {}",
            law.mu
        )));
    }
    let exponent = if aged { law.mu - 2.0 } else { law.mu - 1.0 };
    Ok((law.theta / (tau + law.theta)).powf(exponent))
}

//! The exact multi-realization test across observation time-scales.
//!
//! For each age `t_a` on a grid and each of N trials, an independent pair of
//! realizations `(A_i, B_i)` is drawn; `A_i` is aged raw while `B_i` is
//! shuffled first and then aged, and a two-sample test compares the two aged
//! samples. The N p-values of an age are combined into a geometric mean
//! (checked against the exact null law and its 95% stripe) and a Fisher
//! p-value; the geometric means across ages feed the global Z statistic and
//! the renewal verdict.
//!
//! The (age x trial) grid is embarrassingly parallel: every cell derives its
//! own RNG substreams from the run seed and results are stored by index, so
//! the outcome is bit-identical for any worker count.

use crate::aging::{age_sequence, shuffled_aged, AgeMode};
use crate::error::{Error, Result};
use crate::events::{to_interarrivals, EventSequence, InterArrivalSequence};
use crate::generators::GeneratorSpec;
use crate::meta::{
    fisher_combine, geo_null_quantile, geometric_mean, has_floored_values, uniformity_ks,
    z_statistic, Calibration, GeoNull,
};
use crate::rng::RngHandle;
use crate::two_sample::{ks_test, permutation_test, TestOutcome};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Which two-sample engine the grid runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Ks,
    Permutation,
}

impl MethodChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodChoice::Ks => "ks",
            MethodChoice::Permutation => "permutation",
        }
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks" => Ok(MethodChoice::Ks),
            "permutation" => Ok(MethodChoice::Permutation),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct XAConfig {
    pub t_a_min: f64,
    pub t_a_max: f64,
    /// Number of ages on the grid (the temporal resolution).
    pub t_a_count: usize,
    /// Trials (independent pairs, hence p-values) per age.
    pub trials: usize,
    pub method: MethodChoice,
    /// Permutation budget per cell when `method == Permutation`.
    pub s_max: usize,
    pub alpha: f64,
    pub calibration: Calibration,
    pub seed: u64,
}

impl XAConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_a_min >= 0.0 && self.t_a_min.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_a_min = {} must be >= 0",
                self.t_a_min
            )));
        }
        if (self.t_a_max <= self.t_a_min || self.t_a_max.is_nan()) || !self.t_a_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "need t_a_min < t_a_max, got [{}, {}]",
                self.t_a_min, self.t_a_max
            )));
        }
        if self.t_a_count < 2 {
            return Err(Error::InvalidConfig("need at least 2 ages".into()));
        }
        if self.trials < 2 {
            return Err(Error::InvalidConfig(
                "need at least 2 trials per age".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} must lie in (0,1)",
                self.alpha
            )));
        }
        if self.method == MethodChoice::Permutation && self.s_max < 100 {
            return Err(Error::InvalidConfig(
                "permutation budget s_max must be >= 100".into(),
            ));
        }
        Ok(())
    }

    /// The age grid: `t_a_count` evenly spaced latencies starting at
    /// `t_a_min` with step `(t_a_max - t_a_min) / t_a_count`.
    pub fn ages(&self) -> Vec<f64> {
        let delta = (self.t_a_max - self.t_a_min) / self.t_a_count as f64;
        (0..self.t_a_count)
            .map(|j| self.t_a_min + j as f64 * delta)
            .collect()
    }
}

/// What a run needs to know about its source data to pick defaults.
#[derive(Debug, Clone, Copy)]
pub struct SourceSummary {
    /// Number of waiting times in one realization.
    pub event_count: usize,
    pub mean_tau: f64,
    /// First percentile of the waiting times, if known.
    pub tau_p1: Option<f64>,
}

impl SourceSummary {
    pub fn from_taus(taus: &InterArrivalSequence) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::EmptySample("source summary"));
        }
        Ok(SourceSummary {
            event_count: taus.len(),
            mean_tau: taus.mean(),
            tau_p1: Some(quantile(taus.taus(), 0.01)),
        })
    }
}

/// Default run parameters for a source of `L` waiting times with the given
/// mean: the top age is `L/30 * mean_tau` (so roughly thirty aged samples
/// survive there), the grid starts at the larger of one grid step and the
/// 1st-percentile waiting time, with 20 ages and 100 trials.
///
/// Returns the config plus advisory warnings (the top of the default grid
/// deliberately sits at the edge of the KS validity conditions).
pub fn default_config(summary: &SourceSummary, seed: u64) -> Result<(XAConfig, Vec<String>)> {
    if summary.event_count < 100 {
        return Err(Error::InvalidConfig(format!(
            "source too short for a default grid: {} waiting times",
            summary.event_count
        )));
    }
    if (summary.mean_tau <= 0.0 || summary.mean_tau.is_nan()) || !summary.mean_tau.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "mean waiting time {} must be positive",
            summary.mean_tau
        )));
    }
    let t_a_count = 20usize;
    let t_a_max = summary.event_count as f64 / 30.0 * summary.mean_tau;
    let delta0 = t_a_max / t_a_count as f64;
    let t_a_min = delta0.max(summary.tau_p1.unwrap_or(0.0));
    if t_a_min >= t_a_max || t_a_min.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "degenerate default grid: t_a_min = {t_a_min}, t_a_max = {t_a_max}"
        )));
    }
    let config = XAConfig {
        t_a_min,
        t_a_max,
        t_a_count,
        trials: 100,
        method: MethodChoice::Ks,
        s_max: 1000,
        alpha: 0.05,
        calibration: Calibration::StripeCalibrated,
        seed,
    };
    let mut warnings = Vec::new();
    let span = summary.event_count as f64 * summary.mean_tau;
    let expected_top = span / (t_a_max + summary.mean_tau);
    if expected_top <= 30.0 {
        warnings.push(format!(
            "expected aged-sample size at t_a_max is ~{expected_top:.0}, at or below the \
             KS validity threshold of 30; the top ages will be flagged"
        ));
    }
    Ok((config, warnings))
}

/// Produces the independent realization pair for one grid cell.
///
/// Implementations must be pure functions of the cell's substreams so the
/// grid stays deterministic under any parallel schedule.
pub trait PairSource: Sync {
    fn pair(
        &self,
        age_index: usize,
        trial: usize,
        rng_a: &RngHandle,
        rng_b: &RngHandle,
    ) -> Result<(EventSequence, EventSequence)>;
}

/// A generator spec is a pair source: both realizations are fresh draws.
impl PairSource for GeneratorSpec {
    fn pair(
        &self,
        _age_index: usize,
        _trial: usize,
        rng_a: &RngHandle,
        rng_b: &RngHandle,
    ) -> Result<(EventSequence, EventSequence)> {
        Ok((self.generate_events(rng_a)?, self.generate_events(rng_b)?))
    }
}

impl<F> PairSource for F
where
    F: Fn(&RngHandle, &RngHandle) -> Result<(EventSequence, EventSequence)> + Sync,
{
    fn pair(
        &self,
        _age_index: usize,
        _trial: usize,
        rng_a: &RngHandle,
        rng_b: &RngHandle,
    ) -> Result<(EventSequence, EventSequence)> {
        self(rng_a, rng_b)
    }
}

/// Quartiles, 1.5-IQR whiskers and outlier count of a p-value vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub n_outliers: usize,
}

/// Linear-interpolation quantile of an unsorted slice.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return BoxStats {
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
                whisker_lo: f64::NAN,
                whisker_hi: f64::NAN,
                n_outliers: 0,
            };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q1 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let whisker_lo = sorted
            .iter()
            .copied()
            .find(|&v| v >= fence_lo)
            .unwrap_or(q1);
        let whisker_hi = sorted
            .iter()
            .rev()
            .copied()
            .find(|&v| v <= fence_hi)
            .unwrap_or(q3);
        let n_outliers = sorted
            .iter()
            .filter(|&&v| v < fence_lo || v > fence_hi)
            .count();
        BoxStats {
            q1,
            median,
            q3,
            whisker_lo,
            whisker_hi,
            n_outliers,
        }
    }
}

/// Everything recorded about one age.
#[derive(Debug, Clone)]
pub struct AgeResult {
    pub t_a: f64,
    /// One p-value per completed trial, in trial order.
    pub p_values: Vec<f64>,
    /// Full per-trial outcomes (method, sizes, validity), in trial order.
    pub outcomes: Vec<TestOutcome>,
    /// Trials that failed to produce an aged sample at this latency.
    pub failed_trials: usize,
    pub g_p: f64,
    pub fisher_p: f64,
    /// Bonferroni-adjusted Fisher p, when an adjustment is in force.
    pub fisher_p_adjusted: Option<f64>,
    pub uniformity_p: f64,
    pub in_stripe: bool,
    /// Whether this age entered the global statistic.
    pub valid: bool,
    pub box_stats: BoxStats,
}

/// The full analysis result.
#[derive(Debug, Clone)]
pub struct XAResult {
    pub config: XAConfig,
    pub ages: Vec<AgeResult>,
    pub mu0: f64,
    pub stripe_lo: f64,
    pub stripe_hi: f64,
    pub z_g: f64,
    pub reject_renewal: bool,
    pub warnings: Vec<String>,
}

impl XAResult {
    /// Geometric means of the ages that entered the global statistic.
    pub fn valid_g_means(&self) -> Vec<f64> {
        self.ages
            .iter()
            .filter(|a| a.valid)
            .map(|a| a.g_p)
            .collect()
    }
}

enum CellResult {
    Outcome(TestOutcome),
    Failed(String),
}

fn run_cell<S: PairSource + ?Sized>(
    source: &S,
    root: &RngHandle,
    config: &XAConfig,
    ages: &[f64],
    index: usize,
) -> CellResult {
    let age_index = index / config.trials;
    let trial = index % config.trials;
    let t_a = ages[age_index];
    let cell = [0u64, age_index as u64, trial as u64];
    let rng_a = root.substream(&cell).child(0);
    let rng_b = root.substream(&cell).child(1);
    let rng_shuffle = root.substream(&cell).child(2);
    let rng_perm = root.substream(&cell).child(3);

    let attempt = || -> Result<TestOutcome> {
        let (a, b) = source.pair(age_index, trial, &rng_a, &rng_b)?;
        let aged_a = age_sequence(&a, t_a, AgeMode::Sequential)?;
        let taus_b = to_interarrivals(&b)?;
        let aged_b = shuffled_aged(&taus_b, t_a, &rng_shuffle, AgeMode::Sequential)?;
        match config.method {
            MethodChoice::Ks => ks_test(&aged_a.taus, &aged_b.taus),
            MethodChoice::Permutation => {
                permutation_test(&aged_a.taus, &aged_b.taus, &rng_perm, config.s_max)
            }
        }
    };
    match attempt() {
        Ok(outcome) => CellResult::Outcome(outcome),
        Err(e) => CellResult::Failed(e.to_string()),
    }
}

/// Run the exact test: `trials` independent pairs per age, aged original
/// versus aged shuffle, p-values combined per age, verdict from the global
/// lower-tailed z-test at `config.alpha`.
///
/// Ages whose trials fall below the sample-size validity conditions (or fail
/// to produce aged samples at all) are excluded from the global statistic
/// but retained in the output with a warning.
pub fn run_exact<S: PairSource + ?Sized>(source: &S, config: &XAConfig) -> Result<XAResult> {
    run_exact_with_warnings(source, config, Vec::new())
}

fn run_exact_with_warnings<S: PairSource + ?Sized>(
    source: &S,
    config: &XAConfig,
    mut warnings: Vec<String>,
) -> Result<XAResult> {
    config.validate()?;
    let ages = config.ages();
    let root = RngHandle::new(config.seed);
    let n_cells = config.t_a_count * config.trials;

    let cells: Vec<CellResult> = (0..n_cells)
        .into_par_iter()
        .map(|index| run_cell(source, &root, config, &ages, index))
        .collect();

    let null = GeoNull::new(config.trials)?;
    let stripe_lo = geo_null_quantile(config.trials, 0.025)?;
    let stripe_hi = geo_null_quantile(config.trials, 0.975)?;

    let mut age_results = Vec::with_capacity(config.t_a_count);
    for (age_index, chunk) in cells.chunks(config.trials).enumerate() {
        let t_a = ages[age_index];
        let mut outcomes = Vec::new();
        let mut p_values = Vec::new();
        let mut failed = 0usize;
        let mut first_failure: Option<&str> = None;
        for cell in chunk {
            match cell {
                CellResult::Outcome(o) => {
                    p_values.push(o.p_value);
                    outcomes.push(o.clone());
                }
                CellResult::Failed(msg) => {
                    failed += 1;
                    first_failure.get_or_insert(msg);
                }
            }
        }
        if failed > 0 {
            warnings.push(format!(
                "age {age_index} (t_a = {t_a}): {failed}/{} trials failed ({})",
                config.trials,
                first_failure.unwrap_or("unknown")
            ));
        }
        if has_floored_values(&p_values) {
            warnings.push(format!(
                "age {age_index} (t_a = {t_a}): zero p-values floored at 1e-300"
            ));
        }

        let enough = p_values.len() >= 2 && failed == 0;
        let size_ok = !outcomes.is_empty()
            && outcomes.iter().filter(|o| o.valid).count() * 2 >= outcomes.len();
        let valid = enough && size_ok;
        let (g_p, fisher_p, uniformity_p) = if p_values.len() >= 2 {
            (
                geometric_mean(&p_values)?,
                fisher_combine(&p_values)?,
                uniformity_ks(&p_values)?.1,
            )
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let in_stripe = g_p >= stripe_lo && g_p <= stripe_hi;
        if !valid {
            warnings.push(format!(
                "age {age_index} (t_a = {t_a}) excluded from the global statistic \
                 (sample sizes below validity thresholds or failed trials)"
            ));
        }
        age_results.push(AgeResult {
            t_a,
            p_values,
            outcomes,
            failed_trials: failed,
            g_p,
            fisher_p,
            fisher_p_adjusted: None,
            uniformity_p,
            in_stripe,
            valid,
            box_stats: BoxStats::from_values(&[]),
        });
        let bs = BoxStats::from_values(&age_results.last().unwrap().p_values);
        age_results.last_mut().unwrap().box_stats = bs;
    }

    let g_means: Vec<f64> = age_results
        .iter()
        .filter(|a| a.valid)
        .map(|a| a.g_p)
        .collect();
    if g_means.is_empty() {
        return Err(Error::AllAgesInvalid(
            "every age was excluded; shrink t_a_max or supply longer realizations".into(),
        ));
    }
    let z_g = z_statistic(&g_means, config.trials, config.calibration)?;
    let z_alpha = Normal::standard().inverse_cdf(config.alpha);
    let reject_renewal = z_g < z_alpha;

    Ok(XAResult {
        config: config.clone(),
        ages: age_results,
        mu0: null.mu0(),
        stripe_lo,
        stripe_hi,
        z_g,
        reject_renewal,
        warnings,
    })
}

struct RecordedPairs<'a> {
    realizations: &'a [EventSequence],
    tables: Vec<Vec<usize>>,
}

impl PairSource for RecordedPairs<'_> {
    fn pair(
        &self,
        age_index: usize,
        trial: usize,
        _rng_a: &RngHandle,
        _rng_b: &RngHandle,
    ) -> Result<(EventSequence, EventSequence)> {
        let table = &self.tables[age_index];
        Ok((
            self.realizations[table[2 * trial]].clone(),
            self.realizations[table[2 * trial + 1]].clone(),
        ))
    }
}

/// Run the exact test on recorded realizations instead of a generator.
///
/// Within each age, realizations are paired without reuse (a fresh random
/// pairing per age); the trial count is capped at `len/2` so no sequence
/// appears twice in one age. Identical realizations trigger an independence
/// warning.
pub fn run_exact_on_samples(realizations: &[EventSequence], config: &XAConfig) -> Result<XAResult> {
    if realizations.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 recorded realizations, got {}",
            realizations.len()
        )));
    }
    let mut warnings = Vec::new();
    let max_trials = realizations.len() / 2;
    let mut config = config.clone();
    if config.trials > max_trials {
        warnings.push(format!(
            "only {} realizations supplied: trials per age reduced from {} to {max_trials} \
             (pairing without reuse within an age)",
            realizations.len(),
            config.trials
        ));
        config.trials = max_trials;
    }
    config.validate()?;

    // Bitwise-duplicate realizations break the independence assumption.
    {
        use std::collections::HashSet;
        let mut seen = HashSet::new();
        let mut dup = false;
        for r in realizations {
            let key: Vec<u64> = r.times().iter().map(|t| t.to_bits()).collect();
            if !seen.insert(key) {
                dup = true;
                break;
            }
        }
        if dup {
            warnings.push(
                "duplicate realizations detected: trials are not independent and p-values \
                 will be conservative"
                    .into(),
            );
        }
    }

    let root = RngHandle::new(config.seed);
    let tables: Vec<Vec<usize>> = (0..config.t_a_count)
        .map(|age| {
            let mut idx: Vec<usize> = (0..realizations.len()).collect();
            let mut r = root.substream(&[1, age as u64]).rng();
            use rand::Rng;
            for i in (1..idx.len()).rev() {
                let j = r.random_range(0..=i);
                idx.swap(i, j);
            }
            idx
        })
        .collect();

    let source = RecordedPairs {
        realizations,
        tables,
    };
    run_exact_with_warnings(&source, &config, warnings)
}

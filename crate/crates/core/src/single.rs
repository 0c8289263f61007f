//! Approximated test for a single observed sequence.
//!
//! With only one realization there are no independent pairs to feed the
//! exact grid, so the sequence is split into non-overlapping windows of
//! `t_w` waiting times (the replicas) and each window is compared against a
//! surrogate of the same size bootstrapped from the empirical distribution
//! of the whole observation. Bootstrap draws are iid by construction, so the
//! surrogate is a renewal baseline with the observed marginal.
//!
//! Windows cut from one realization are not fully independent, which makes
//! Fisher-style combination optimistic; every result carries a structural
//! warning and a Bonferroni-adjusted per-age verdict is available (and is
//! the default decision rule here).

use crate::aging::{age_sequence, AgeMode};
use crate::error::{Error, Result};
use crate::events::InterArrivalSequence;
use crate::meta::{
    fisher_combine, geo_null_quantile, geometric_mean, uniformity_ks, z_statistic, Calibration,
    GeoNull,
};
use crate::rng::RngHandle;
use crate::two_sample::{ks_test, permutation_test, validity_check, TestOutcome};
use crate::xa::{quantile, AgeResult, BoxStats, MethodChoice, XAConfig, XAResult};
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Multiple-testing adjustment for the per-age Fisher p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjustment {
    None,
    Bonferroni,
}

impl Adjustment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Adjustment::None => "none",
            Adjustment::Bonferroni => "bonferroni",
        }
    }
}

impl std::str::FromStr for Adjustment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Adjustment::None),
            "bonferroni" => Ok(Adjustment::Bonferroni),
            other => Err(Error::InvalidParameter(format!(
                "unknown adjustment {other:?}"
            ))),
        }
    }
}

/// Parameters of a single-realization run.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleConfig {
    /// Waiting times per window (the replica size). At least 50.
    pub t_w: usize,
    /// Number of ages on the grid.
    pub t_a_count: usize,
    /// Permutation budget per cell.
    pub s_max: usize,
    pub alpha: f64,
    pub seed: u64,
    pub adjust: Adjustment,
    pub calibration: Calibration,
    /// Age grid overrides; derived from the data when absent.
    pub t_a_min: Option<f64>,
    pub t_a_max: Option<f64>,
}

impl Default for SingleConfig {
    fn default() -> Self {
        SingleConfig {
            t_w: 500,
            t_a_count: 10,
            s_max: 1000,
            alpha: 0.05,
            seed: 0,
            adjust: Adjustment::Bonferroni,
            calibration: Calibration::StripeCalibrated,
            t_a_min: None,
            t_a_max: None,
        }
    }
}

impl SingleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_w < 50 {
            return Err(Error::InvalidConfig(format!(
                "window size t_w = {} too small (need >= 50 waiting times)",
                self.t_w
            )));
        }
        if self.t_a_count < 2 {
            return Err(Error::InvalidConfig("need at least 2 ages".into()));
        }
        if self.s_max < 100 {
            return Err(Error::InvalidConfig(
                "permutation budget s_max must be >= 100".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} must lie in (0,1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Split into `floor(L / t_w)` consecutive disjoint windows of exactly `t_w`
/// waiting times; the trailing remainder is discarded (callers should warn).
pub fn split_windows(taus: &InterArrivalSequence, t_w: usize) -> Result<Vec<Vec<f64>>> {
    if t_w == 0 {
        return Err(Error::InvalidParameter("t_w must be >= 1".into()));
    }
    let len = taus.len();
    if len < 2 * t_w {
        return Err(Error::InvalidConfig(format!(
            "sequence of {len} waiting times is too short for two windows of {t_w}"
        )));
    }
    Ok(taus.taus().chunks_exact(t_w).map(|c| c.to_vec()).collect())
}

/// `size` draws with replacement from the observed waiting times.
pub fn bootstrap_sample(
    taus: &InterArrivalSequence,
    size: usize,
    rng: &RngHandle,
) -> Result<InterArrivalSequence> {
    if taus.is_empty() {
        return Err(Error::EmptySample("bootstrap source"));
    }
    let mut r = rng.rng();
    let values = taus.taus();
    let draws = (0..size)
        .map(|_| values[r.random_range(0..values.len())])
        .collect();
    InterArrivalSequence::new(draws)
}

/// Age grid for one observed sequence: the top age is the smaller of the
/// whole-sequence scale `L/30 * mean` and the within-window scale
/// `t_w/10 * mean` (each window must retain a handful of aged samples); the
/// grid starts at the larger of one step and the 1st-percentile waiting
/// time.
fn derive_grid(taus: &InterArrivalSequence, config: &SingleConfig) -> Result<(f64, f64)> {
    let mean = taus.mean();
    let span_cap = taus.len() as f64 / 30.0 * mean;
    let window_cap = config.t_w as f64 / 10.0 * mean;
    let t_a_max = config.t_a_max.unwrap_or_else(|| span_cap.min(window_cap));
    if (t_a_max <= 0.0 || t_a_max.is_nan()) || !t_a_max.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "derived t_a_max = {t_a_max} is not usable"
        )));
    }
    let delta0 = t_a_max / config.t_a_count as f64;
    let t_a_min = config
        .t_a_min
        .unwrap_or_else(|| delta0.max(quantile(taus.taus(), 0.01)));
    if t_a_min < 0.0 || t_a_min.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "t_a_min = {t_a_min} must be >= 0"
        )));
    }
    if t_a_min >= t_a_max || t_a_min.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "degenerate single-run grid: t_a_min = {t_a_min}, t_a_max = {t_a_max}"
        )));
    }
    // Keep aged windows meaningfully separated: the step must dominate the
    // smallest waiting time.
    let min_tau = taus.taus().iter().cloned().fold(f64::INFINITY, f64::min);
    let delta = (t_a_max - t_a_min) / config.t_a_count as f64;
    if delta < 10.0 * min_tau {
        return Err(Error::InvalidConfig(format!(
            "age step {delta} is below 10x the smallest waiting time {min_tau}; \
             reduce the number of ages or the grid range"
        )));
    }
    Ok((t_a_min, t_a_max))
}

/// Run the approximated test on one observed inter-arrival sequence.
///
/// For each age and each window, the window is aged raw and compared against
/// an aged bootstrap surrogate of the same pre-aging size; the two-sample
/// engine is the permutation test, switching to asymptotic KS for the cells
/// whose aged samples satisfy the KS validity conditions.
pub fn run_single(taus: &InterArrivalSequence, config: &SingleConfig) -> Result<XAResult> {
    config.validate()?;
    let windows = split_windows(taus, config.t_w)?;
    let n_windows = windows.len();
    let mut warnings = vec![
        "windows cut from one realization are not mutually independent; combined \
         p-values are approximate"
            .to_string(),
    ];
    let remainder = taus.len() - n_windows * config.t_w;
    if remainder > 0 {
        warnings.push(format!(
            "trailing {remainder} waiting times beyond the last window ignored"
        ));
    }

    let (t_a_min, t_a_max) = derive_grid(taus, config)?;
    let ages: Vec<f64> = {
        let delta = (t_a_max - t_a_min) / config.t_a_count as f64;
        (0..config.t_a_count)
            .map(|j| t_a_min + j as f64 * delta)
            .collect()
    };

    // Expected aged samples per window at the smallest age.
    let mean = taus.mean();
    let expected = config.t_w as f64 * mean / (ages[0] + mean);
    if expected < 5.0 {
        return Err(Error::InvalidConfig(format!(
            "windows of {} waiting times yield only ~{expected:.1} aged samples at \
             t_a_min = {}; enlarge t_w or shrink the grid",
            config.t_w, ages[0]
        )));
    }

    let root = RngHandle::new(config.seed);
    let n_cells = config.t_a_count * n_windows;
    let cell_outcomes: Vec<Result<TestOutcome>> = (0..n_cells)
        .into_par_iter()
        .map(|index| {
            let age_index = index / n_windows;
            let window = index % n_windows;
            let t_a = ages[age_index];
            let cell = [0u64, age_index as u64, window as u64];
            let window_taus = InterArrivalSequence::new(windows[window].clone())?;
            let aged_a = age_sequence(
                &window_taus.to_events_anchored(0.0),
                t_a,
                AgeMode::Sequential,
            )?;
            let surrogate = bootstrap_sample(taus, config.t_w, &root.substream(&cell).child(0))?;
            let aged_b =
                age_sequence(&surrogate.to_events_anchored(0.0), t_a, AgeMode::Sequential)?;
            if validity_check(aged_a.taus.len(), aged_b.taus.len()) {
                ks_test(&aged_a.taus, &aged_b.taus)
            } else {
                permutation_test(
                    &aged_a.taus,
                    &aged_b.taus,
                    &root.substream(&cell).child(1),
                    config.s_max,
                )
            }
        })
        .collect();

    let null = GeoNull::new(n_windows)?;
    let stripe_lo = geo_null_quantile(n_windows, 0.025)?;
    let stripe_hi = geo_null_quantile(n_windows, 0.975)?;

    let mut age_results = Vec::with_capacity(config.t_a_count);
    for (age_index, chunk) in cell_outcomes.chunks(n_windows).enumerate() {
        let t_a = ages[age_index];
        let mut outcomes = Vec::new();
        let mut p_values = Vec::new();
        let mut failed = 0usize;
        for cell in chunk {
            match cell {
                Ok(o) => {
                    p_values.push(o.p_value);
                    outcomes.push(o.clone());
                }
                Err(e) => {
                    if failed == 0 {
                        warnings.push(format!("age {age_index} (t_a = {t_a}): {e}"));
                    }
                    failed += 1;
                }
            }
        }
        let valid = failed == 0 && p_values.len() >= 2;
        if !valid {
            warnings.push(format!(
                "age {age_index} (t_a = {t_a}) excluded from the global statistic"
            ));
        }
        let (g_p, fisher_p, uniformity_p) = if p_values.len() >= 2 {
            (
                geometric_mean(&p_values)?,
                fisher_combine(&p_values)?,
                uniformity_ks(&p_values)?.1,
            )
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let fisher_p_adjusted = match config.adjust {
            Adjustment::None => None,
            Adjustment::Bonferroni => Some((fisher_p * config.t_a_count as f64).min(1.0)),
        };
        let box_stats = BoxStats::from_values(&p_values);
        age_results.push(AgeResult {
            t_a,
            p_values,
            outcomes,
            failed_trials: failed,
            g_p,
            fisher_p,
            fisher_p_adjusted,
            uniformity_p,
            in_stripe: g_p >= stripe_lo && g_p <= stripe_hi,
            valid,
            box_stats,
        });
    }

    let g_means: Vec<f64> = age_results
        .iter()
        .filter(|a| a.valid)
        .map(|a| a.g_p)
        .collect();
    if g_means.is_empty() {
        return Err(Error::AllAgesInvalid(
            "every age was excluded; shrink the grid or enlarge t_w".into(),
        ));
    }
    let z_g = z_statistic(&g_means, n_windows, config.calibration)?;
    let z_alpha = Normal::standard().inverse_cdf(config.alpha);
    let z_rejects = z_g < z_alpha;

    let reject_renewal = match config.adjust {
        Adjustment::None => {
            warnings
                .push("verdict from the z-test on dependent windows; interpret with care".into());
            z_rejects
        }
        Adjustment::Bonferroni => {
            // Reject when any age stays significant after the correction.
            let any = age_results
                .iter()
                .filter(|a| a.valid)
                .filter_map(|a| a.fisher_p_adjusted)
                .any(|p| p < config.alpha);
            warnings.push(format!(
                "unadjusted z-test on dependent windows: z_g = {z_g:.3} \
                 ({}reject at alpha = {})",
                if z_rejects { "" } else { "no " },
                config.alpha
            ));
            any
        }
    };

    // Echo the run as an XAConfig so serialization is uniform.
    let config_echo = XAConfig {
        t_a_min,
        t_a_max,
        t_a_count: config.t_a_count,
        trials: n_windows,
        method: MethodChoice::Permutation,
        s_max: config.s_max,
        alpha: config.alpha,
        calibration: config.calibration,
        seed: config.seed,
    };
    Ok(XAResult {
        config: config_echo,
        ages: age_results,
        mu0: null.mu0(),
        stripe_lo,
        stripe_hi,
        z_g,
        reject_renewal,
        warnings,
    })
}

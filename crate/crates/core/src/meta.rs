//! Combining p-values across repeated tests.
//!
//! Under the joint null the p-values of N independent tests are U(0,1), so
//! `-N log g` of their geometric mean `g` is a Gamma(N, 1) sum. That gives
//! the exact null density of the geometric mean,
//!
//! ```text
//! rho_N(g) = N / Gamma(N) * (-N g log g)^(N-1)   on (0, 1),
//! ```
//!
//! with closed-form CDF `Q(N, -N log g)` (regularized upper incomplete
//! gamma), mean `(1 + 1/N)^-N` and variance `(1 + 2/N)^-N - (1 + 1/N)^-2N`.
//! Everything in this module (confidence stripe, global Z statistic, power,
//! Gaussianizing transform) is built on that law plus Fisher's chi-square
//! combination.

use crate::error::{Error, Result};
use crate::two_sample::ks_one_sample;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// P-values at or below this are floored before taking logs.
pub const P_FLOOR: f64 = 1e-300;

/// Null law summary of the geometric mean of N uniform p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoNull {
    n: usize,
    mu0: f64,
    sigma: f64,
}

impl GeoNull {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("GeoNull needs N >= 1".into()));
        }
        let nf = n as f64;
        let mu0 = (1.0 + 1.0 / nf).powf(-nf);
        let var = (1.0 + 2.0 / nf).powf(-nf) - (1.0 + 1.0 / nf).powf(-2.0 * nf);
        Ok(GeoNull {
            n,
            mu0,
            sigma: var.sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Null mean `(1 + 1/N)^-N`, tending to 1/e.
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    /// Null standard deviation, tending to `e^-1 / sqrt(N)`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

fn check_probs(name: &'static str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptySample(name));
    }
    for (i, &x) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "{name}[{i}] = {x} is not a probability"
            )));
        }
    }
    Ok(())
}

/// Geometric mean `(prod p_i)^(1/N)`, computed in log space.
///
/// Values at or below zero are floored at [`P_FLOOR`]; the caller is expected
/// to surface a warning when that happens (see [`has_floored_values`]).
pub fn geometric_mean(p: &[f64]) -> Result<f64> {
    check_probs("p", p)?;
    let sum: f64 = p.iter().map(|&x| x.max(P_FLOOR).ln()).sum();
    Ok((sum / p.len() as f64).exp())
}

/// True when [`geometric_mean`] or [`fisher_combine`] would floor a value.
pub fn has_floored_values(p: &[f64]) -> bool {
    p.iter().any(|&x| x <= P_FLOOR)
}

/// Regularized upper incomplete gamma Q(a, x), total on `x <= 0`.
fn gamma_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// Fisher's combined p-value: `X = -2 sum log p_i` has a chi-square law with
/// 2N degrees of freedom under the null; returns its upper tail at X.
pub fn fisher_combine(p: &[f64]) -> Result<f64> {
    check_probs("p", p)?;
    let x: f64 = p.iter().map(|&v| -2.0 * v.max(P_FLOOR).ln()).sum();
    // Chi-square(2N) upper tail at x equals Q(N, x/2).
    Ok(gamma_upper(p.len() as f64, x / 2.0))
}

fn check_unit_open(name: &'static str, g: f64) -> Result<()> {
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {g} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Exact null density of the geometric mean of N uniform p-values.
pub fn geo_null_pdf(n: usize, g: f64) -> Result<f64> {
    let _ = GeoNull::new(n)?;
    check_unit_open("g", g)?;
    let nf = n as f64;
    // log-space to survive large N
    let log_core = (nf - 1.0) * (-nf * g * g.ln()).ln();
    Ok((nf.ln() + log_core - ln_gamma(nf)).exp())
}

/// Exact null CDF: `P(G <= g) = Q(N, -N log g)`.
pub fn geo_null_cdf(n: usize, g: f64) -> Result<f64> {
    let _ = GeoNull::new(n)?;
    check_unit_open("g", g)?;
    Ok(gamma_upper(n as f64, -(n as f64) * g.ln()))
}

/// Quantile of the null law, by bisection of the CDF to 1e-10.
pub fn geo_null_quantile(n: usize, q: f64) -> Result<f64> {
    let _ = GeoNull::new(n)?;
    check_unit_open("q", q)?;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if geo_null_cdf(n, mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How the global statistic is standardized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibration {
    /// `Z = sqrt(N) (e gbar - 1)`: centers at the limiting mean 1/e and
    /// ignores how many ages were averaged. Kept for reproducing legacy
    /// analyses; not standard normal under the null.
    PaperLiteral,
    /// `Z = (gbar - mu0(N)) sqrt(T_a) / sigma(N)`: exact null mean and
    /// standard error of the mean over `T_a` ages, asymptotically standard
    /// normal under the null. The default.
    StripeCalibrated,
}

impl Calibration {
    pub fn as_str(&self) -> &'static str {
        match self {
            Calibration::PaperLiteral => "paper_literal",
            Calibration::StripeCalibrated => "stripe_calibrated",
        }
    }
}

impl std::str::FromStr for Calibration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_literal" => Ok(Calibration::PaperLiteral),
            "stripe_calibrated" => Ok(Calibration::StripeCalibrated),
            other => Err(Error::InvalidParameter(format!(
                "unknown calibration {other:?}"
            ))),
        }
    }
}

/// Global Z statistic over the per-age geometric means.
pub fn z_statistic(g_means: &[f64], n: usize, calibration: Calibration) -> Result<f64> {
    if g_means.is_empty() {
        return Err(Error::EmptySample("g_means"));
    }
    let null = GeoNull::new(n)?;
    let gbar = g_means.iter().sum::<f64>() / g_means.len() as f64;
    match calibration {
        Calibration::PaperLiteral => Ok((n as f64).sqrt() * (std::f64::consts::E * gbar - 1.0)),
        Calibration::StripeCalibrated => {
            let t_a = g_means.len() as f64;
            Ok((gbar - null.mu0()) * t_a.sqrt() / null.sigma())
        }
    }
}

/// Standard error of the mean geometric mean under the chosen calibration.
fn sigma_n(n: usize, t_a: usize, calibration: Calibration) -> Result<f64> {
    let null = GeoNull::new(n)?;
    match calibration {
        Calibration::PaperLiteral => Ok((-1.0f64).exp() / (n as f64).sqrt()),
        Calibration::StripeCalibrated => {
            if t_a == 0 {
                return Err(Error::InvalidParameter("T_a must be >= 1".into()));
            }
            Ok(null.sigma() / (t_a as f64).sqrt())
        }
    }
}

/// Power of the lower-tailed z-test against an alternative with mean `mu1`:
/// `Phi((mu0 - mu1)/sigma_n - z_{1-alpha})`.
///
/// Increasing either N (tighter sigma(N)) or T_a (more averaged ages)
/// shrinks `sigma_n` and raises the power whenever `mu1 < mu0`.
pub fn power_lower_tailed(
    mu1: f64,
    n: usize,
    t_a: usize,
    alpha: f64,
    calibration: Calibration,
) -> Result<f64> {
    if !(mu1 > 0.0 && mu1 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mu1 = {mu1} must lie in (0,1)"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0,1)"
        )));
    }
    let null = GeoNull::new(n)?;
    let sn = sigma_n(n, t_a, calibration)?;
    let std_normal = Normal::standard();
    let z_one_minus_alpha = std_normal.inverse_cdf(1.0 - alpha);
    Ok(std_normal.cdf((null.mu0() - mu1) / sn - z_one_minus_alpha))
}

/// Gaussianizing transform: maps a null-distributed geometric mean to a
/// Normal(mu_y, sigma_y^2) variable via the probability integral transform,
/// `h(g) = mu_y + sigma_y * Phi^-1(cdf_N(g))`.
///
/// The CDF is clamped to `[1e-15, 1 - 1e-15]` so domain-edge inputs map to
/// large finite values instead of infinities. Strictly increasing in `g`.
pub fn gaussianize(g: f64, n: usize, mu_y: f64, sigma_y: f64) -> Result<f64> {
    if sigma_y <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma_y = {sigma_y} must be positive"
        )));
    }
    check_unit_open("g", g)?;
    let u = geo_null_cdf(n, g)?.clamp(1e-15, 1.0 - 1e-15);
    Ok(mu_y + sigma_y * Normal::standard().inverse_cdf(u))
}

/// Maximum-likelihood normal fit plus a KS goodness-of-fit p-value against
/// the fitted law.
pub fn mle_normal_fit(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "normal fit needs at least 3 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    if var == 0.0 || !var.is_finite() {
        return Err(Error::DegenerateSample(
            "zero variance in normal fit".into(),
        ));
    }
    let sd = var.sqrt();
    let fitted = Normal::new(mean, sd)
        .map_err(|e| Error::InvalidParameter(format!("normal fit failed: {e}")))?;
    let (_, gof_p) = ks_one_sample(values, |x| fitted.cdf(x))?;
    Ok((mean, sd, gof_p))
}

/// One-sample KS uniformity diagnostic for a vector of p-values: distance to
/// U(0,1) and the corresponding p-value.
pub fn uniformity_ks(p_values: &[f64]) -> Result<(f64, f64)> {
    check_probs("p_values", p_values)?;
    ks_one_sample(p_values, |x| x.clamp(0.0, 1.0))
}

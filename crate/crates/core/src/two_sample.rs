//! Two-sample equality-of-distribution testing.
//!
//! The workhorse is the two-sample Kolmogorov-Smirnov distance
//! `D = sup_z |T_m(z) - S_n(z)|` between empirical distribution functions,
//! with the asymptotic p-value computed from the Kolmogorov limit law through
//! the Stephens numerical correction. For small or discrete samples, where
//! the asymptotic approximation degrades, a permutation test over label
//! rearrangements of the pooled sample is provided (exact enumeration when
//! feasible, Monte Carlo otherwise).

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use rand::Rng;

/// Which procedure produced a [`TestOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    KsAsymptotic,
    PermutationExact,
    PermutationMonteCarlo,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestMethod::KsAsymptotic => "ks_asymptotic",
            TestMethod::PermutationExact => "permutation_exact",
            TestMethod::PermutationMonteCarlo => "permutation_monte_carlo",
        }
    }
}

/// One two-sample comparison.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub m: usize,
    pub n: usize,
    /// Whether the asymptotic KS validity conditions hold for these sizes.
    /// Permutation methods do not rely on them and always report `true`.
    pub valid: bool,
}

/// Asymptotic KS sample-size conditions: `nm/(n+m) > 4` and `min(n,m) > 30`.
pub fn validity_check(m: usize, n: usize) -> bool {
    if m == 0 || n == 0 {
        return false;
    }
    let (mf, nf) = (m as f64, n as f64);
    mf * nf / (mf + nf) > 4.0 && m.min(n) > 30
}

fn check_sample(name: &'static str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptySample(name));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample(format!(
            "{name} contains non-finite values"
        )));
    }
    Ok(())
}

/// Sup-distance between ECDFs, walked over the pooled sorted values.
///
/// Ties are resolved by evaluating the difference only after all equal pooled
/// values have been consumed, the exact convention. This matters because
/// aged samples from discrete inputs produce ties.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sample("a", a)?;
    check_sample("b", b)?;
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let labels: Vec<bool> = pooled.iter().map(|p| p.1).collect();
    let values: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    Ok(d_from_labels(&values, &labels, a.len(), b.len()))
}

/// D for a label assignment over pre-sorted pooled values.
fn d_from_labels(sorted_values: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let total = sorted_values.len();
    let (mut in_a, mut in_b) = (0usize, 0usize);
    let mut best = 0.0f64;
    let mut i = 0;
    while i < total {
        let v = sorted_values[i];
        let mut j = i;
        while j < total && sorted_values[j] == v {
            if labels[j] {
                in_a += 1;
            } else {
                in_b += 1;
            }
            j += 1;
        }
        let diff = (in_a as f64 / m as f64 - in_b as f64 / n as f64).abs();
        if diff > best {
            best = diff;
        }
        i = j;
    }
    best
}

/// CDF of the Kolmogorov-Smirnov limit distribution,
/// `Q(z) = 1 - 2 * sum_{i>=1} (-1)^(i-1) exp(-2 i^2 z^2)`.
///
/// Returns 0 for `z <= 0`. The series is truncated once a term drops below
/// 1e-12; below z = 0.18 the true value is under 1e-14, smaller than the
/// cancellation noise of the slowly-converging alternating sum, so 0 is
/// returned directly.
pub fn kolmogorov_cdf(z: f64) -> f64 {
    if z <= 0.18 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for i in 1..100_000u64 {
        let term = (-2.0 * (i * i) as f64 * z * z).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic two-sample KS p-value via the Stephens correction:
/// `p = 1 - Q(lambda)` with `lambda = (sqrt(Ne) + 0.12 + 0.11/sqrt(Ne)) * D`
/// and effective size `Ne = mn/(m+n)`.
pub fn ks_p_value(d_obs: f64, m: usize, n: usize) -> Result<TestOutcome> {
    if !(0.0..=1.0).contains(&d_obs) || d_obs.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "KS statistic must lie in [0,1], got {d_obs}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptySample("ks_p_value"));
    }
    let ne = (m as f64) * (n as f64) / ((m + n) as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d_obs;
    let p = (1.0 - kolmogorov_cdf(lambda)).clamp(0.0, 1.0);
    Ok(TestOutcome {
        statistic: d_obs,
        p_value: p,
        method: TestMethod::KsAsymptotic,
        m,
        n,
        valid: validity_check(m, n),
    })
}

/// Two-sample KS test: statistic plus asymptotic p-value.
pub fn ks_test(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    let d = ks_statistic(a, b)?;
    ks_p_value(d, a.len(), b.len())
}

/// Number of label rearrangements C(m+n, m), capped at `limit + 1`.
fn rearrangement_count_capped(m: usize, n: usize, limit: usize) -> usize {
    let mut c = 1.0f64;
    let k = m.min(n);
    let total = (m + n) as f64;
    for i in 0..k {
        c *= (total - i as f64) / (i as f64 + 1.0);
        if c > limit as f64 {
            return limit + 1;
        }
    }
    c.round() as usize
}

/// Two-sample permutation test on the KS statistic.
///
/// When the number of label rearrangements `C(m+n, m)` is at most `s_max`,
/// all of them are enumerated; otherwise `s_max` random rearrangements are
/// drawn from the handle's stream. Either way the p-value uses the add-one
/// rule, `p = (1 + #{rearrangements with D >= D_obs}) / (1 + s)`, where the
/// observed assignment itself is represented by the two `+1`s and is not
/// tallied again, so the smallest attainable p-value is `1/(s+1)`.
pub fn permutation_test(
    a: &[f64],
    b: &[f64],
    rng: &RngHandle,
    s_max: usize,
) -> Result<TestOutcome> {
    check_sample("a", a)?;
    check_sample("b", b)?;
    if s_max < 100 {
        return Err(Error::InvalidParameter(format!(
            "permutation budget s_max must be at least 100, got {s_max}"
        )));
    }
    let (m, n) = (a.len(), b.len());

    // Pool in (a then b) order; the identity assignment is "first m pooled
    // indices are sample a". Sorting once lets every rearrangement reuse the
    // same value array with relabelled positions.
    let mut order: Vec<usize> = (0..m + n).collect();
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    order.sort_by(|&x, &y| pooled[x].partial_cmp(&pooled[y]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| pooled[i]).collect();
    // position of pooled index i in the sorted array
    let mut rank = vec![0usize; m + n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }

    let observed_labels: Vec<bool> = {
        let mut l = vec![false; m + n];
        for (i, r) in rank.iter().enumerate().take(m) {
            let _ = i;
            l[*r] = true;
        }
        l
    };
    let d_obs = d_from_labels(&sorted_values, &observed_labels, m, n);

    let s_exact = rearrangement_count_capped(m, n, s_max);
    if s_exact <= s_max {
        // Exhaustive enumeration over index subsets of size m. The subset
        // {0, .., m-1} is the observed assignment and is skipped in the
        // tally; the add-one terms stand in for it.
        let mut count = 0usize;
        let mut subset: Vec<usize> = (0..m).collect();
        let mut labels = vec![false; m + n];
        let mut first = true;
        loop {
            if !first {
                labels.iter_mut().for_each(|l| *l = false);
                for &i in &subset {
                    labels[rank[i]] = true;
                }
                if d_from_labels(&sorted_values, &labels, m, n) >= d_obs {
                    count += 1;
                }
            }
            first = false;
            // next lexicographic combination
            let mut k = m;
            loop {
                if k == 0 {
                    return Ok(TestOutcome {
                        statistic: d_obs,
                        p_value: (1 + count) as f64 / (1 + s_exact) as f64,
                        method: TestMethod::PermutationExact,
                        m,
                        n,
                        valid: true,
                    });
                }
                k -= 1;
                if subset[k] != k + n {
                    break;
                }
            }
            subset[k] += 1;
            for j in k + 1..m {
                subset[j] = subset[j - 1] + 1;
            }
        }
    } else {
        // Monte Carlo: uniformly random label assignments over the sorted
        // positions, drawn by shuffling a fixed label pool.
        let mut r = rng.rng();
        let mut labels = vec![false; m + n];
        labels[..m].iter_mut().for_each(|l| *l = true);
        let mut count = 0usize;
        for _ in 0..s_max {
            for i in (1..labels.len()).rev() {
                let j = r.random_range(0..=i);
                labels.swap(i, j);
            }
            if d_from_labels(&sorted_values, &labels, m, n) >= d_obs {
                count += 1;
            }
        }
        Ok(TestOutcome {
            statistic: d_obs,
            p_value: (1 + count) as f64 / (1 + s_max) as f64,
            method: TestMethod::PermutationMonteCarlo,
            m,
            n,
            valid: true,
        })
    }
}

/// One-sample KS distance and asymptotic p-value of `sample` against the
/// continuous CDF `cdf`. Used for uniformity diagnostics of p-value vectors
/// and for goodness-of-fit checks.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<(f64, f64)> {
    check_sample("sample", sample)?;
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok((d, (1.0 - kolmogorov_cdf(lambda)).clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_statistic_identical_samples() {
        assert_eq!(
            ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn ks_statistic_disjoint_supports() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
    }

    #[test]
    fn ks_statistic_interleaved() {
        // ECDF steps at pooled points: after 1 -> |1/2 - 0| = 1/2, after 2 ->
        // |1/2 - 1/2| = 0, after 3 -> |1 - 1/2| = 1/2, after 4 -> 0.
        assert_eq!(ks_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn ks_statistic_symmetric_and_bounded() {
        let a = [0.3, 1.7, 2.2, 5.0];
        let b = [0.1, 0.4, 2.5];
        let d1 = ks_statistic(&a, &b).unwrap();
        let d2 = ks_statistic(&b, &a).unwrap();
        assert_eq!(d1, d2);
        assert!((0.0..=1.0).contains(&d1));
    }

    #[test]
    fn ks_statistic_ties_consume_runs() {
        // All mass tied at one value: ECDFs agree after the run, D = 0.
        assert_eq!(ks_statistic(&[1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        // a = {1,1,2}, b = {1,2,2}: after the 1-run |2/3 - 1/3| = 1/3.
        let d = ks_statistic(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(d, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_statistic_rejects_empty() {
        assert!(ks_statistic(&[], &[1.0]).is_err());
        assert!(ks_statistic(&[1.0], &[]).is_err());
    }

    #[test]
    fn kolmogorov_cdf_limits() {
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
        assert_eq!(kolmogorov_cdf(0.01), 0.0);
        assert!((kolmogorov_cdf(10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_cdf_95_point() {
        // 1.3581 is the standard 95% point.
        assert_abs_diff_eq!(kolmogorov_cdf(1.3581), 0.95, epsilon = 5e-4);
    }

    #[test]
    fn kolmogorov_cdf_monotone() {
        let mut prev = 0.0;
        for i in 1..=400 {
            let q = kolmogorov_cdf(i as f64 * 0.01);
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn ks_p_value_extremes() {
        assert_eq!(ks_p_value(0.0, 10, 10).unwrap().p_value, 1.0);
        assert!(ks_p_value(1.0, 100, 100).unwrap().p_value < 1e-12);
        assert!(ks_p_value(1.5, 10, 10).is_err());
        assert!(ks_p_value(-0.1, 10, 10).is_err());
    }

    #[test]
    fn ks_p_value_five_percent_point() {
        // Inverting the full lambda map at Q = 0.95 gives the d whose p-value
        // is exactly 0.05 under this approximation.
        let ne = 50.0f64;
        let factor = ne.sqrt() + 0.12 + 0.11 / ne.sqrt();
        let d_star = 1.3581 / factor;
        let out = ks_p_value(d_star, 100, 100).unwrap();
        assert_abs_diff_eq!(out.p_value, 0.05, epsilon = 5e-4);
        // The classical uncorrected critical value 1.3581*sqrt(2/100) lands
        // slightly below 0.05 once the Stephens correction is applied.
        let d_classical = 1.3581 * (2.0f64 / 100.0).sqrt();
        let out = ks_p_value(d_classical, 100, 100).unwrap();
        assert!(
            out.p_value > 0.035 && out.p_value < 0.05,
            "p = {}",
            out.p_value
        );
    }

    #[test]
    fn validity_thresholds() {
        assert!(validity_check(31, 31));
        assert!(!validity_check(30, 30));
        assert!(!validity_check(1000, 3));
        assert!(!validity_check(0, 10));
    }

    #[test]
    fn permutation_exact_fixture() {
        // Pooled {1,2,3,4}, C(4,2) = 6 splits; besides the observed one only
        // its mirror attains D = 1, and the observed assignment itself is
        // covered by the add-one terms: p = (1 + 1) / (1 + 6) = 2/7.
        let out = permutation_test(&[1.0, 2.0], &[3.0, 4.0], &RngHandle::new(0), 1000).unwrap();
        assert_eq!(out.method, TestMethod::PermutationExact);
        assert_eq!(out.statistic, 1.0);
        assert_abs_diff_eq!(out.p_value, 2.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn permutation_exact_equal_multisets() {
        // Every rearrangement ties D = 0, so p takes its maximum s/(s+1).
        let out = permutation_test(&[1.0, 2.0], &[2.0, 1.0], &RngHandle::new(0), 1000).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_abs_diff_eq!(out.p_value, 6.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn permutation_exact_deterministic_no_rng() {
        let a = [0.3, 1.9, 2.4];
        let b = [0.8, 1.1, 3.3];
        let p1 = permutation_test(&a, &b, &RngHandle::new(1), 1000).unwrap();
        let p2 = permutation_test(&a, &b, &RngHandle::new(999), 1000).unwrap();
        assert_eq!(p1.p_value, p2.p_value);
        assert_eq!(p1.method, TestMethod::PermutationExact);
    }

    #[test]
    fn permutation_monte_carlo_engages_on_large_samples() {
        let a: Vec<f64> = (0..30).map(|i| i as f64 * 1.37).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 * 1.41 + 0.2).collect();
        let out = permutation_test(&a, &b, &RngHandle::new(3), 200).unwrap();
        assert_eq!(out.method, TestMethod::PermutationMonteCarlo);
        assert!(out.p_value >= 1.0 / 201.0);
        // deterministic under the handle
        let again = permutation_test(&a, &b, &RngHandle::new(3), 200).unwrap();
        assert_eq!(out.p_value, again.p_value);
    }

    #[test]
    fn permutation_budget_floor() {
        assert!(permutation_test(&[1.0], &[2.0], &RngHandle::new(0), 99).is_err());
    }

    #[test]
    fn permutation_null_p_values_roughly_uniform() {
        // Monte Carlo permutation p-values on null pairs are uniform up to
        // the add-one granularity.
        let root = RngHandle::new(8841);
        let mut ps = Vec::with_capacity(200);
        for s in 0..200u64 {
            let h = root.child(s);
            let mut r = h.child(0).rng();
            let mut draw = || -> Vec<f64> {
                (0..60)
                    .map(|_| {
                        let u: f64 = r.random();
                        -(1.0 - u).ln()
                    })
                    .collect()
            };
            let a = draw();
            let b = draw();
            ps.push(permutation_test(&a, &b, &h.child(1), 400).unwrap().p_value);
        }
        let (_, p) = ks_one_sample(&ps, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(p > 0.01, "permutation null uniformity p = {p}");
    }

    #[test]
    fn null_p_values_roughly_uniform() {
        // Null calibration: both samples exponential(1); the asymptotic
        // p-values over seeds should be close to U(0,1).
        let root = RngHandle::new(7119);
        let mut ps = Vec::with_capacity(500);
        for s in 0..500u64 {
            let mut r = root.child(s).rng();
            let draw = |r: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
                (0..200)
                    .map(|_| {
                        let u: f64 = r.random();
                        -(1.0 - u).ln()
                    })
                    .collect()
            };
            let a = draw(&mut r);
            let b = draw(&mut r);
            ps.push(ks_test(&a, &b).unwrap().p_value);
        }
        let (d, _) = ks_one_sample(&ps, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.08, "distance to U(0,1) was {d}");
    }

    #[test]
    fn one_sample_ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let (d, p) = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01);
        assert!(p > 0.99);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.5).collect();
        let (_, p) = ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(p < 1e-6);
    }
}

//! Result serialization: per-trial table, per-age table, summary document,
//! manifest, and the flat key-value config format.
//!
//! All numbers are written with Rust's shortest round-trip formatting, so
//! `parse(print(x)) == x` exactly, and rows are emitted in index order, so
//! identical results serialize to identical bytes.

use crate::error::{Error, Result};
use crate::xa::XAResult;

/// Per-trial rows: one line per (age, trial) comparison.
pub fn results_table(result: &XAResult) -> String {
    let mut s = String::from("age_index,t_a,trial,p_value,method,m,n,valid\n");
    for (age_index, age) in result.ages.iter().enumerate() {
        for (trial, outcome) in age.outcomes.iter().enumerate() {
            s.push_str(&format!(
                "{age_index},{},{trial},{},{},{},{},{}\n",
                age.t_a,
                outcome.p_value,
                outcome.method.as_str(),
                outcome.m,
                outcome.n,
                outcome.valid
            ));
        }
    }
    s
}

/// Per-age summary rows: combined statistics and boxplot data.
pub fn ages_table(result: &XAResult) -> String {
    let mut s = String::from(
        "age_index,t_a,n_trials,failed_trials,g_p,fisher_p,fisher_p_adjusted,uniformity_p,\
         in_stripe,valid,q1,median,q3,whisker_lo,whisker_hi,n_outliers\n",
    );
    for (age_index, age) in result.ages.iter().enumerate() {
        let adjusted = match age.fisher_p_adjusted {
            Some(v) => format!("{v}"),
            None => String::new(),
        };
        s.push_str(&format!(
            "{age_index},{},{},{},{},{},{adjusted},{},{},{},{},{},{},{},{},{}\n",
            age.t_a,
            age.p_values.len(),
            age.failed_trials,
            age.g_p,
            age.fisher_p,
            age.uniformity_p,
            age.in_stripe,
            age.valid,
            age.box_stats.q1,
            age.box_stats.median,
            age.box_stats.q3,
            age.box_stats.whisker_lo,
            age.box_stats.whisker_hi,
            age.box_stats.n_outliers
        ));
    }
    s
}

/// Key-value summary document.
pub fn summary_text(result: &XAResult) -> String {
    let c = &result.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    kv("t_a_min", format!("{}", c.t_a_min));
    kv("t_a_max", format!("{}", c.t_a_max));
    kv("t_a_count", format!("{}", c.t_a_count));
    kv("trials", format!("{}", c.trials));
    kv("method", c.method.as_str().into());
    kv("s_max", format!("{}", c.s_max));
    kv("seed", format!("{}", c.seed));
    kv("mu0", format!("{}", result.mu0));
    kv("stripe_lo", format!("{}", result.stripe_lo));
    kv("stripe_hi", format!("{}", result.stripe_hi));
    kv("z_g", format!("{}", result.z_g));
    kv("calibration", c.calibration.as_str().into());
    kv("reject_renewal", format!("{}", result.reject_renewal));
    kv("alpha", format!("{}", c.alpha));
    kv(
        "valid_ages",
        format!("{}", result.ages.iter().filter(|a| a.valid).count()),
    );
    kv(
        "ages_in_stripe",
        format!("{}", result.ages.iter().filter(|a| a.in_stripe).count()),
    );
    kv("warnings", result.warnings.join(" | "));
    s
}

/// Key-value manifest; pairs are written in the given order.
pub fn manifest_text(entries: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in entries {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(v);
        s.push('\n');
    }
    s
}

/// Parse the flat `key = value` format used by config files, manifests and
/// summaries. `#` comments and blank lines are ignored; keys may repeat
/// (later wins when read through [`lookup`]).
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Last value for a key, if present.
pub fn lookup<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

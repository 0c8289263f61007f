//! Layered option resolution: flags override config-file values, which
//! override the environment seed and built-in defaults. The resolved set is
//! echoed into the manifest so every run can be reproduced from it.

use std::path::Path;
use std::str::FromStr;
use xalab_core::report::{lookup, parse_key_values};
use xalab_core::xa::XAConfig;

/// Seed taken from `XALAB_SEED` when neither flag nor config provides one.
pub fn env_seed() -> Option<u64> {
    std::env::var("XALAB_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
}

/// Key-value pairs loaded from an optional config file.
pub struct Layered {
    pairs: Vec<(String, String)>,
}

impl Layered {
    pub fn from_config_file(path: Option<&Path>) -> Result<Self, String> {
        let pairs = match path {
            None => Vec::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                parse_key_values(&text).map_err(|e| e.to_string())?
            }
        };
        Ok(Layered { pairs })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        lookup(&self.pairs, key)
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key {key:?}: {e}")),
        }
    }
}

/// The fully resolved run parameters, for the manifest.
pub fn config_echo(config: &XAConfig) -> Vec<(String, String)> {
    vec![
        ("ta-min".into(), format!("{}", config.t_a_min)),
        ("ta-max".into(), format!("{}", config.t_a_max)),
        ("Ta".into(), config.t_a_count.to_string()),
        ("N".into(), config.trials.to_string()),
        ("method".into(), config.method.as_str().into()),
        ("smax".into(), config.s_max.to_string()),
        ("alpha".into(), format!("{}", config.alpha)),
        ("calibration".into(), config.calibration.as_str().into()),
        ("seed".into(), config.seed.to_string()),
    ]
}

//! Run configuration for the verification harness: truncation bounds, the
//! tolerance override, the random seed and the quick/timing switches.
//!
//! Values come from three layers, later ones winning: built-in defaults, an
//! optional file named by `HCLASS_CONFIG` (`key = value` lines), and flags.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::qform::TruncationConfig;

pub const CONFIG_ENV: &str = "HCLASS_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub truncation: TruncationConfig,
    /// Replaces the per-suite tolerance of every non-exact comparison.
    pub tol: Option<f64>,
    pub seed: u64,
    pub quick: bool,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: TruncationConfig::default(),
            tol: None,
            seed: 20_240_917,
            quick: false,
            timing: false,
        }
    }
}

/// The keys accepted in a config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub a_max: Option<u64>,
    pub c_max: Option<u64>,
    pub lattice_bound: Option<u64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub quick: Option<bool>,
    pub timing: Option<bool>,
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.a_max {
            self.truncation.a_max = v;
        }
        if let Some(v) = o.c_max {
            self.truncation.c_max = v;
        }
        if let Some(v) = o.lattice_bound {
            self.truncation.lattice_bound = v;
        }
        if let Some(v) = o.tol {
            self.tol = Some(v);
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.quick {
            self.quick = v;
        }
        if let Some(v) = o.timing {
            self.timing = v;
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides::parse(&std::fs::read_to_string(path)?)?);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, then the file named by `HCLASS_CONFIG` if the variable is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(RunConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::Config(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// The truncation actually used: quick mode halves every bound.
    pub fn effective_truncation(&self) -> TruncationConfig {
        let mut t = self.truncation.clone();
        if self.quick {
            t.a_max = (t.a_max / 2).max(1);
            t.c_max = (t.c_max / 2).max(1);
            t.lattice_bound = (t.lattice_bound / 2).max(1);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let o = Overrides::parse("a_max = 1000\nlattice_bound = 50\ntol = 1e-6\nquick = true\n")
            .unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply(&o);
        assert_eq!(cfg.truncation.a_max, 1000);
        assert_eq!(cfg.truncation.lattice_bound, 50);
        assert_eq!(cfg.truncation.c_max, 20_000);
        assert_eq!(cfg.tol, Some(1e-6));
        assert!(cfg.quick);
        assert_eq!(cfg.effective_truncation().a_max, 500);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Overrides::parse("amax = 3").is_err());
        assert!(Overrides::parse("a_max = \"many\"").is_err());
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            a_max: Some(0),
            ..Default::default()
        });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn reads_file() {
        let dir = std::env::temp_dir().join(format!("hclass-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "seed = 7\nc_max = 300\n").unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.truncation.c_max, 300);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

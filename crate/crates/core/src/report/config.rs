use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::ConeParams;
use crate::error::{Error, Result};
use crate::map::HenonParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Usage(format!("unknown format {other:?} (expected csv, json or svg)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

/// Everything a run needs. Loaded from TOML, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub a_star: f64,
    pub epsilon: f64,
    pub mu_h: f64,
    pub mu_v: f64,
    pub mu: f64,
    pub n_min: i64,
    pub n_max: i64,
    /// Lattice size per strip intersection for the sector sweep.
    pub grid: usize,
    pub depth: usize,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    /// Time slice for `lambda`, `oracle` and `plot`.
    pub n: i64,
    /// Survival window for the oracle.
    pub window: usize,
    pub oracle_grid: usize,
    pub adaptive: bool,
    /// Refinement rounds used to measure the width contraction per time step.
    pub contraction_depth: usize,
    pub a1_samples: usize,
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a_star: 9.5,
            epsilon: 0.1,
            mu_h: 0.615,
            mu_v: 0.615,
            mu: 0.618,
            n_min: -100,
            n_max: 100,
            grid: 256,
            depth: 8,
            out: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            n: 0,
            window: 6,
            oracle_grid: 2048,
            adaptive: false,
            contraction_depth: 3,
            a1_samples: 1000,
            force: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Usage(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the fields that make a run meaningless. The contraction
    /// hypotheses on `mu` are left to the verification itself.
    pub fn validate(&self) -> Result<()> {
        self.params().map_err(|e| Error::Usage(e.to_string()))?;
        self.cone_params().map_err(|e| Error::Usage(e.to_string()))?;
        if self.n_min > self.n_max {
            return Err(Error::Usage(format!(
                "n window [{}, {}] is empty",
                self.n_min, self.n_max
            )));
        }
        if self.grid < 2 {
            return Err(Error::Usage(format!("grid must be at least 2, got {}", self.grid)));
        }
        if self.depth == 0 {
            return Err(Error::Usage("depth must be at least 1".into()));
        }
        if self.oracle_grid < 32 {
            return Err(Error::Usage(format!(
                "oracle grid must be at least 32, got {}",
                self.oracle_grid
            )));
        }
        if self.formats.is_empty() {
            return Err(Error::Usage("no output format selected".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<HenonParams> {
        HenonParams::new(self.a_star, self.epsilon)
    }

    pub fn cone_params(&self) -> Result<ConeParams> {
        ConeParams::new(self.mu_h, self.mu_v, self.mu)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_instance() {
        let c = RunConfig::default();
        assert_eq!(c.params().unwrap(), HenonParams::reference());
        assert_eq!(c.cone_params().unwrap(), ConeParams::reference());
        assert_eq!((c.n_min, c.n_max, c.grid, c.depth), (-100, 100, 256, 8));
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml_str(&c.to_toml()).unwrap(), c);
        let partial = RunConfig::from_toml_str("a_star = 10.0\nformats = [\"csv\"]\n").unwrap();
        assert_eq!(partial.a_star, 10.0);
        assert_eq!(partial.formats, vec![Format::Csv]);
        assert_eq!(partial.epsilon, 0.1);
        assert!(matches!(RunConfig::from_toml_str("bogus = 1"), Err(Error::Usage(_))));
    }

    #[test]
    fn validation() {
        let bad = RunConfig {
            n_min: 3,
            n_max: 2,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Usage(_))));
        let bad = RunConfig {
            mu_h: 2.0,
            mu_v: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("SVG".parse::<Format>().unwrap(), Format::Svg);
        assert!("png".parse::<Format>().is_err());
    }
}

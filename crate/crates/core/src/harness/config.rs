//! Run configuration, read from a flat TOML key-value file.
//!
//! ```toml
//! scheme = "twice-filtered"          # used by `run`
//! schemes = ["twice-filtered", "single-filtered", "lie-splitting", "exponential-euler"]
//! s0 = 1.0
//! epsilon = 0.0833333333333333
//! t_final = 1.0
//! tau_exponents = [4, 5, 6, 7, 8]    # tau = 2^-e; or tau_grid = [0.0625, ...]
//! n = 1024                           # grid of the filtered schemes
//! comparison_n = 1024                # band of the unfiltered schemes
//! data = "paper8"                    # paper8 | randomized-sobolev | plane-wave | smooth-profile
//! data_s = 1.0                       # regularity for randomized-sobolev
//! data_k = 1                         # wavenumber for plane-wave
//! seed = 0
//! ref_scheme = "strang-reference"
//! ref_tau_divisor = 64
//! ref_n = 2048
//! output_dir = "out"
//! save_fields = true
//! record_wallclock = false
//! ```

use crate::error::{Error, Result};
use crate::initial_data::{DataKind, DataSpec};
use crate::integrators::SchemeId;
use crate::spectral::TorusGrid;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_EPSILON: f64 = 1.0 / 12.0;

/// Initial datum, independent of the grid it is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataChoice {
    Paper8 { seed: u64 },
    RandomizedSobolev { s: f64, seed: u64 },
    PlaneWave { k: i64 },
    SmoothProfile,
}

impl DataChoice {
    pub fn on(&self, grid: TorusGrid) -> DataSpec {
        let kind = match *self {
            DataChoice::Paper8 { seed } => DataKind::Paper8Datum { seed },
            DataChoice::RandomizedSobolev { s, seed } => DataKind::RandomizedSobolev { s, seed },
            DataChoice::PlaneWave { k } => DataKind::PlaneWave {
                k,
                amplitude: [1.0, 0.0],
            },
            DataChoice::SmoothProfile => DataKind::SmoothProfile,
        };
        DataSpec { kind, grid }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            DataChoice::Paper8 { .. } => DataChoice::Paper8 { seed },
            DataChoice::RandomizedSobolev { s, .. } => DataChoice::RandomizedSobolev { s, seed },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub scheme: SchemeId,
    pub tau_divisor: u32,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheme: SchemeId,
    pub schemes: Vec<SchemeId>,
    pub s0: f64,
    pub epsilon: f64,
    pub t_final: f64,
    /// Step sizes, largest first.
    pub tau_grid: Vec<f64>,
    pub n: usize,
    pub comparison_n: usize,
    pub data: DataChoice,
    pub reference: ReferenceSpec,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub save_fields: bool,
    pub record_wallclock: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scheme: Option<String>,
    schemes: Option<Vec<String>>,
    s0: Option<f64>,
    epsilon: Option<f64>,
    t_final: Option<f64>,
    tau_grid: Option<Vec<f64>>,
    tau_exponents: Option<Vec<i32>>,
    n: Option<usize>,
    comparison_n: Option<usize>,
    data: Option<String>,
    data_s: Option<f64>,
    data_k: Option<i64>,
    seed: Option<u64>,
    ref_scheme: Option<String>,
    ref_tau_divisor: Option<u32>,
    ref_n: Option<usize>,
    output_dir: Option<PathBuf>,
    save_fields: Option<bool>,
    record_wallclock: Option<bool>,
}

impl Default for RunConfig {
    /// The rough-data experiment at reduced size: `N = 2^10`, `tau = 2^-4 .. 2^-8`.
    fn default() -> Self {
        Self {
            scheme: SchemeId::TwiceFiltered,
            schemes: vec![
                SchemeId::TwiceFiltered,
                SchemeId::SingleFiltered,
                SchemeId::LieSplitting,
                SchemeId::ExponentialEuler,
            ],
            s0: 1.0,
            epsilon: DEFAULT_EPSILON,
            t_final: 1.0,
            tau_grid: (4..=8).map(|e| 2f64.powi(-e)).collect(),
            n: 1024,
            comparison_n: 1024,
            data: DataChoice::Paper8 { seed: 0 },
            reference: ReferenceSpec {
                scheme: SchemeId::StrangReference,
                tau_divisor: 64,
                n: 2048,
            },
            output_dir: PathBuf::from("out"),
            save_fields: true,
            record_wallclock: false,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    /// The full-size rough-data experiment: `N = 2^13`, `tau = 2^-4 .. 2^-12`.
    pub fn full_scale() -> Self {
        Self {
            tau_grid: (4..=12).map(|e| 2f64.powi(-e)).collect(),
            n: 8192,
            reference: ReferenceSpec {
                n: 8192,
                ..Self::default().reference
            },
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mut cfg = Self::default();
        if let Some(s) = raw.scheme {
            cfg.scheme = s.parse()?;
        }
        if let Some(list) = raw.schemes {
            cfg.schemes = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        cfg.s0 = raw.s0.unwrap_or(cfg.s0);
        cfg.epsilon = raw.epsilon.unwrap_or(cfg.epsilon);
        cfg.t_final = raw.t_final.unwrap_or(cfg.t_final);
        match (raw.tau_grid, raw.tau_exponents) {
            (Some(_), Some(_)) => {
                return Err(bad("give either tau_grid or tau_exponents, not both"))
            }
            (Some(g), None) => cfg.tau_grid = g,
            (None, Some(e)) => cfg.tau_grid = e.iter().map(|&e| 2f64.powi(-e)).collect(),
            (None, None) => {}
        }
        cfg.n = raw.n.unwrap_or(cfg.n);
        cfg.comparison_n = raw.comparison_n.unwrap_or(cfg.n.min(1024));
        let seed = raw.seed.unwrap_or(0);
        cfg.data = match raw.data.as_deref().unwrap_or("paper8") {
            "paper8" => DataChoice::Paper8 { seed },
            "randomized-sobolev" => DataChoice::RandomizedSobolev {
                s: raw.data_s.unwrap_or(cfg.s0),
                seed,
            },
            "plane-wave" => DataChoice::PlaneWave {
                k: raw.data_k.unwrap_or(1),
            },
            "smooth-profile" => DataChoice::SmoothProfile,
            other => return Err(bad(format!("unknown data kind {other:?}"))),
        };
        if let Some(s) = raw.ref_scheme {
            cfg.reference.scheme = s.parse()?;
        }
        cfg.reference.tau_divisor = raw.ref_tau_divisor.unwrap_or(cfg.reference.tau_divisor);
        cfg.reference.n = raw.ref_n.unwrap_or(cfg.n.max(2048));
        if let Some(dir) = raw.output_dir {
            cfg.output_dir = dir;
        }
        cfg.save_fields = raw.save_fields.unwrap_or(cfg.save_fields);
        cfg.record_wallclock = raw.record_wallclock.unwrap_or(cfg.record_wallclock);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.data = self.data.with_seed(seed);
        self
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_grid.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0 <= 1.0) {
            return Err(bad(format!("s0 must lie in (0, 1], got {}", self.s0)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(bad("t_final must be positive"));
        }
        if self.tau_grid.is_empty() {
            return Err(bad("tau grid is empty"));
        }
        for w in self.tau_grid.windows(2) {
            if !(w[1] < w[0]) {
                return Err(bad("tau grid must be strictly descending"));
            }
        }
        for &tau in &self.tau_grid {
            let e = -tau.log2();
            if !(tau > 0.0 && tau <= 1.0 && (e - e.round()).abs() < 1e-12) {
                return Err(bad(format!("tau = {tau} is not a dyadic step in (0, 1]")));
            }
            crate::integrators::step_count(tau, self.t_final)?;
        }
        for n in [self.n, self.comparison_n, self.reference.n] {
            TorusGrid::new(n).map_err(|e| bad(e.to_string()))?;
        }
        if self.comparison_n > self.reference.n || self.n > self.reference.n {
            return Err(bad(
                "reference grid must be at least as fine as the run grids",
            ));
        }
        if self.reference.tau_divisor < 32 {
            return Err(bad("reference step divisor must be at least 32"));
        }
        if self.reference.scheme.is_filtered() {
            return Err(bad("reference scheme must be an unfiltered scheme"));
        }
        let all: Vec<SchemeId> = std::iter::once(self.scheme)
            .chain(self.schemes.iter().copied())
            .collect();
        if all.contains(&SchemeId::TwiceFiltered) {
            let k = super::choose_k(self.s0, self.tau_min(), self.epsilon)?;
            if 8.0 * k > self.n as f64 * (1.0 + 1e-9) {
                return Err(bad(format!(
                    "grid too coarse: 8 K(tau_min) = {} exceeds N = {}",
                    8.0 * k,
                    self.n
                )));
            }
        }
        if all.contains(&SchemeId::SingleFiltered)
            && 8.0 * self.tau_min().powf(-0.5) > self.n as f64 * (1.0 + 1e-9)
        {
            return Err(bad("grid too coarse for the single-filtered cutoff"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        RunConfig::full_scale().validate().unwrap();
    }

    #[test]
    fn parses_flat_file() {
        let cfg = RunConfig::from_toml_str(
            r#"
            scheme = "exponential-euler"
            tau_exponents = [3, 4, 5]
            n = 256
            data = "randomized-sobolev"
            data_s = 0.6
            seed = 9
            s0 = 0.6
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scheme, SchemeId::ExponentialEuler);
        assert_eq!(cfg.tau_grid, vec![0.125, 0.0625, 0.03125]);
        assert_eq!(cfg.comparison_n, 256);
        assert_eq!(cfg.reference.n, 2048);
        assert_eq!(cfg.data, DataChoice::RandomizedSobolev { s: 0.6, seed: 9 });
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "unknown_key = 1",
            "scheme = \"rk4\"",
            "tau_grid = [0.1, 0.05]",
            "tau_grid = [0.0625, 0.125]",
            "s0 = 1.5",
            "ref_tau_divisor = 8",
            "n = 100",
            "n = 64\ntau_exponents = [4, 8]",
            "data = \"bogus\"",
            "tau_grid = [0.5]\ntau_exponents = [1]",
        ] {
            assert!(RunConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}

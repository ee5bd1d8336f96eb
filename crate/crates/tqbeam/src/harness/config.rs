//! Flat JSON experiment configuration.
//!
//! Angles are given in degrees in the config file and converted to radians
//! internally. Power values are in dB relative to the noise power.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{one_ring_covariance, OneRingParams};
use crate::error::{Error, Result};
use crate::inner::InnerKind;
use crate::outer::{GroupConfig, OuterMethod, Scenario};
use crate::spectral::HermitianMatrix;

/// Experiment selector, matching the CLI names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "sumrate")]
    Sumrate,
    #[serde(rename = "as-sweep")]
    AsSweep,
    #[serde(rename = "convergence")]
    Convergence,
    #[serde(rename = "power")]
    Power,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Sumrate => "sumrate",
            Experiment::AsSweep => "as-sweep",
            Experiment::Convergence => "convergence",
            Experiment::Power => "power",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sumrate" => Ok(Experiment::Sumrate),
            "as-sweep" => Ok(Experiment::AsSweep),
            "convergence" => Ok(Experiment::Convergence),
            "power" => Ok(Experiment::Power),
            other => Err(Error::Config(format!(
                "unknown experiment {other:?}; expected sumrate, as-sweep, convergence, or power"
            ))),
        }
    }
}

fn default_spacing() -> f64 {
    0.5
}

fn default_w() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    crate::outer::DEFAULT_EPS
}

fn default_energy() -> f64 {
    crate::outer::DEFAULT_ENERGY_THRESHOLD
}

/// Full experiment description, deserialized from a flat JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of base-station antennas `M`.
    pub m: usize,
    /// Number of user groups `G`.
    pub g: usize,
    /// Per-group sector center angles, degrees.
    pub theta_deg: Vec<f64>,
    /// Per-group angle spreads, degrees.
    pub delta_deg: Vec<f64>,
    /// Per-group served user counts `K_g`.
    pub k_g: Vec<usize>,
    /// Per-group outer beamformer dimensions `M_g`.
    pub m_g: Vec<usize>,
    /// Antenna spacing in carrier wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Noise power (linear).
    pub sigma2: f64,
    /// Transmit power grid, dB.
    pub pt_db: Vec<f64>,
    /// Angle-spread grid for the sweep experiment, degrees.
    #[serde(default)]
    pub as_grid_deg: Vec<f64>,
    /// Channel realizations per grid point.
    pub trials: usize,
    /// Master seed for the per-trial substreams.
    pub seed: u64,
    /// Outer beamformer designs to evaluate.
    pub methods: Vec<OuterMethod>,
    /// Inner beamformer family.
    pub inner: InnerKind,
    /// Weighting factor of the fixed-weight difference baseline.
    #[serde(default = "default_w")]
    pub w: f64,
    /// Trace-quotient stopping tolerance.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Dominant-eigenspace energy threshold for block diagonalization.
    #[serde(default = "default_energy")]
    pub energy_threshold: f64,
    /// Default CSV output path (the CLI `--out` flag overrides it).
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("bad config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| Err(Error::Config(msg));
        if self.g == 0 {
            return cfg_err("g must be >= 1".into());
        }
        for (name, len) in [
            ("theta_deg", self.theta_deg.len()),
            ("delta_deg", self.delta_deg.len()),
            ("k_g", self.k_g.len()),
            ("m_g", self.m_g.len()),
        ] {
            if len != self.g {
                return cfg_err(format!("{name} has {len} entries for g = {}", self.g));
            }
        }
        if self.trials == 0 {
            return cfg_err("trials must be >= 1".into());
        }
        if self.pt_db.is_empty() {
            return cfg_err("pt_db grid must not be empty".into());
        }
        if self.methods.is_empty() {
            return cfg_err("methods must not be empty".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return cfg_err(format!("eps = {} must be positive", self.eps));
        }
        if !(self.w.is_finite() && self.w > 0.0) {
            return cfg_err(format!("w = {} must be positive", self.w));
        }
        if !(self.energy_threshold > 0.0 && self.energy_threshold <= 1.0) {
            return cfg_err(format!(
                "energy_threshold = {} outside (0, 1]",
                self.energy_threshold
            ));
        }
        // Angle and scenario limits surface through the builders.
        self.scenario(&self.covariances(None)?, self.pt_db[0])?;
        Ok(())
    }

    /// Per-group one-ring covariances, optionally overriding every group's
    /// angle spread (radians) as the sweep experiment does.
    pub fn covariances(&self, delta_override_rad: Option<f64>) -> Result<Vec<HermitianMatrix>> {
        (0..self.g)
            .map(|g| {
                let delta = delta_override_rad.unwrap_or(self.delta_deg[g].to_radians());
                let params = OneRingParams::new(
                    self.m,
                    self.theta_deg[g].to_radians(),
                    delta,
                    self.spacing,
                )
                .map_err(|e| Error::Config(format!("group {g}: {e}")))?;
                Ok(one_ring_covariance(&params))
            })
            .collect()
    }

    /// Assembles the scenario for one transmit-power grid point.
    pub fn scenario(&self, covariances: &[HermitianMatrix], pt_db: f64) -> Result<Scenario> {
        let groups = covariances
            .iter()
            .enumerate()
            .map(|(g, cov)| GroupConfig {
                covariance: cov.clone(),
                users: self.k_g[g],
                outer_dim: self.m_g[g],
                streams: self.k_g[g],
            })
            .collect();
        Scenario::new(self.m, groups, self.sigma2, db_to_linear(pt_db))
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// First group's configured angle spread in radians; reported in result
    /// rows of experiments that do not sweep the spread.
    pub fn nominal_delta_rad(&self) -> f64 {
        self.delta_deg[0].to_radians()
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "m": 16,
            "g": 2,
            "theta_deg": [-30.0, 30.0],
            "delta_deg": [13.846153846153847, 13.846153846153847],
            "k_g": [2, 2],
            "m_g": [4, 4],
            "sigma2": 1.0,
            "pt_db": [10.0, 15.0],
            "trials": 5,
            "seed": 7,
            "methods": ["TQP", "WEIGHTED_DIFF"],
            "inner": "ZF"
        })
    }

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = ExperimentConfig::from_json_str(&base_json().to_string()).unwrap();
        assert_eq!(cfg.spacing, 0.5);
        assert_eq!(cfg.w, 1.0);
        assert_eq!(cfg.eps, 1e-4);
        assert_eq!(cfg.energy_threshold, 0.95);
        assert_eq!(cfg.methods, vec![OuterMethod::Tqp, OuterMethod::WeightedDiff]);
        assert_eq!(cfg.inner, InnerKind::Zf);
    }

    #[test]
    fn rejects_unknown_method() {
        let mut v = base_json();
        v["methods"] = serde_json::json!(["TQP", "MAGIC"]);
        assert!(matches!(
            ExperimentConfig::from_json_str(&v.to_string()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_unknown_field() {
        let mut v = base_json();
        v["surprise"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json_str(&v.to_string()).is_err());
    }

    #[test]
    fn rejects_grid_and_count_errors() {
        for (field, value) in [
            ("trials", serde_json::json!(0)),
            ("pt_db", serde_json::json!([])),
            ("methods", serde_json::json!([])),
            ("k_g", serde_json::json!([2])),
            ("m_g", serde_json::json!([17, 17])),
        ] {
            let mut v = base_json();
            v[field] = value;
            let got = ExperimentConfig::from_json_str(&v.to_string());
            assert!(
                matches!(got, Err(Error::Config(_))),
                "field {field} should be rejected, got {got:?}"
            );
        }
    }

    #[test]
    fn covariances_respect_delta_override() {
        let cfg = ExperimentConfig::from_json_str(&base_json().to_string()).unwrap();
        let base = cfg.covariances(None).unwrap();
        let swept = cfg.covariances(Some(0.05)).unwrap();
        assert_eq!(base.len(), 2);
        assert!((base[0].as_matrix() - swept[0].as_matrix()).norm() > 1e-6);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in [
            Experiment::Sumrate,
            Experiment::AsSweep,
            Experiment::Convergence,
            Experiment::Power,
        ] {
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
        assert!("bogus".parse::<Experiment>().is_err());
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(15.0) - 10f64.powf(1.5)).abs() < 1e-12);
    }
}

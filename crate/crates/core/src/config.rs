//! Experiment configuration: a flat TOML document whose keys carry their
//! units. Scenario keys are required; run controls have defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{CacheProfile, Catalog};
use crate::channel::{LinkBudget, PathLoss};
use crate::error::{Error, Result};
use crate::network::{satellite_link, NetworkConfig};
use crate::policy::PolicyKind;
use crate::reward::{LatencyReading, QuadratureSpec};
use crate::scalar::{db_to_linear, dbm_to_watts};
use crate::{FadingParams, RateTable, TimingConstants};

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PTsDbm,
    PTrDbm,
    #[serde(alias = "tau_s")]
    TauSMs,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p_ts_dbm" => Ok(SweepAxis::PTsDbm),
            "p_tr_dbm" => Ok(SweepAxis::PTrDbm),
            "tau_s" | "tau_s_ms" => Ok(SweepAxis::TauSMs),
            _ => Err(Error::config(
                "sweep_axis",
                format!("unknown axis {s:?}, expected p_ts_dbm, p_tr_dbm or tau_s_ms"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyReadingKey {
    #[default]
    Protocol,
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cells: usize,
    pub cell_radius_m: f64,
    pub altitude_km: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,

    pub p_ts_dbm: f64,
    pub p_tr_dbm: f64,
    pub g_sat_dbi: f64,
    pub g_ts_dbi: f64,
    pub g_user_dbi: f64,
    pub terrestrial_ref_loss_db: f64,
    pub terrestrial_exponent: f64,

    pub sat_user_m: f64,
    pub sat_user_b: f64,
    pub sat_user_omega: f64,
    pub sat_ts_m: f64,
    pub sat_ts_b: f64,
    pub sat_ts_omega: f64,

    pub zipf_zeta: f64,
    pub file_sizes_mbits: Vec<f64>,
    pub sat_cache_mbits: f64,
    pub ts_cache_mbits: f64,
    pub sat_cache_probs: Vec<f64>,
    pub ts_cache_probs: Vec<f64>,

    pub rates_mbps: Vec<f64>,
    pub thresholds_db: Vec<f64>,

    pub tau_p_ms: f64,
    pub t1_ms: f64,
    pub t2_ms: f64,
    pub tau_s_ms: f64,

    #[serde(default = "default_frames")]
    pub frames: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    #[serde(default)]
    pub sweep_axis: Option<SweepAxis>,
    #[serde(default)]
    pub sweep_grid: Vec<f64>,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_snr_nodes")]
    pub snr_nodes: usize,
    #[serde(default = "default_truncation")]
    pub snr_truncation_quantile: f64,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub latency_reading: LatencyReadingKey,
}

fn default_frames() -> u64 {
    100_000
}
fn default_seed() -> u64 {
    1
}
fn default_policies() -> Vec<String> {
    PolicyKind::ALL
        .iter()
        .map(|p| p.name().to_string())
        .collect()
}
fn default_radial_nodes() -> usize {
    QuadratureSpec::default().radial_nodes
}
fn default_snr_nodes() -> usize {
    QuadratureSpec::default().snr_nodes
}
fn default_truncation() -> f64 {
    QuadratureSpec::default().snr_truncation_quantile
}
fn default_tol() -> f64 {
    1e-6
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn rekey<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain { detail, .. } => Error::config(key, detail),
        other => other,
    })
}

impl ExperimentConfig {
    /// The shipped default scenario.
    pub fn reference_scenario() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG_TOML).expect("shipped config parses")
    }

    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let key = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("<document>")
                .to_string();
            Error::config(key, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.network()?;
        self.quadrature().validate()?;
        self.policy_kinds()?;
        if self.frames == 0 {
            return Err(Error::config("frames", "at least one frame is required"));
        }
        positive("solver_tol", self.solver_tol)?;
        for &v in &self.sweep_grid {
            finite("sweep_grid", v)?;
        }
        Ok(())
    }

    /// Noise power over the bandwidth, watts.
    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_density_dbm_hz) * self.bandwidth_hz
    }

    /// Builds the SI scenario record.
    pub fn network(&self) -> Result<NetworkConfig> {
        positive("cell_radius_m", self.cell_radius_m)?;
        positive("altitude_km", self.altitude_km)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        for (k, v) in [
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("p_ts_dbm", self.p_ts_dbm),
            ("p_tr_dbm", self.p_tr_dbm),
            ("g_sat_dbi", self.g_sat_dbi),
            ("g_ts_dbi", self.g_ts_dbi),
            ("g_user_dbi", self.g_user_dbi),
            ("terrestrial_ref_loss_db", self.terrestrial_ref_loss_db),
        ] {
            finite(k, v)?;
        }
        positive("terrestrial_exponent", self.terrestrial_exponent)?;
        let noise = self.noise_watts();
        let (g_s, g_t, g_u) = (
            db_to_linear(self.g_sat_dbi),
            db_to_linear(self.g_ts_dbi),
            db_to_linear(self.g_user_dbi),
        );
        let p_s = dbm_to_watts(self.p_ts_dbm);
        let sat_user = rekey(
            "carrier_hz",
            satellite_link(p_s, g_s, g_u, noise, self.carrier_hz),
        )?;
        let sat_ts = rekey(
            "carrier_hz",
            satellite_link(p_s, g_s, g_t, noise, self.carrier_hz),
        )?;
        let ts_user = rekey(
            "terrestrial_exponent",
            LinkBudget::new(
                dbm_to_watts(self.p_tr_dbm),
                g_t,
                g_u,
                noise,
                PathLoss::Terrestrial {
                    ref_loss_db: self.terrestrial_ref_loss_db,
                    exponent: self.terrestrial_exponent,
                },
            ),
        )?;
        let sat_fading = rekey(
            "sat_user_m",
            FadingParams::new(self.sat_user_m, self.sat_user_b, self.sat_user_omega),
        )?;
        let ts_fading = rekey(
            "sat_ts_m",
            FadingParams::new(self.sat_ts_m, self.sat_ts_b, self.sat_ts_omega),
        )?;
        let catalog = Catalog::zipf(
            self.file_sizes_mbits.iter().map(|b| b * 1e6).collect(),
            self.zipf_zeta,
        )?;
        let cache = CacheProfile {
            sat_probs: self.sat_cache_probs.clone(),
            ts_probs: self.ts_cache_probs.clone(),
            sat_capacity: self.sat_cache_mbits * 1e6,
            ts_capacity: self.ts_cache_mbits * 1e6,
        };
        let rates = RateTable::new(
            self.rates_mbps.iter().map(|r| r * 1e6).collect(),
            self.thresholds_db
                .iter()
                .map(|&g| db_to_linear(g))
                .collect(),
        )?;
        let timing =
            TimingConstants::new(self.t1_ms * 1e-3, self.t2_ms * 1e-3, self.tau_p_ms * 1e-3)?;
        let env = NetworkConfig {
            sat_user,
            sat_ts,
            ts_user,
            sat_distance: self.altitude_km * 1e3,
            sat_fading,
            ts_fading,
            catalog,
            cache,
            rates,
            timing,
            tau_s: self.tau_s_ms * 1e-3,
            cells: self.cells,
            cell_radius: self.cell_radius_m,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            radial_nodes: self.radial_nodes,
            snr_nodes: self.snr_nodes,
            snr_truncation_quantile: self.snr_truncation_quantile,
        }
    }

    pub fn reading(&self) -> LatencyReading {
        match self.latency_reading {
            LatencyReadingKey::Protocol => LatencyReading::Protocol,
            LatencyReadingKey::Printed => LatencyReading::Printed,
        }
    }

    pub fn policy_kinds(&self) -> Result<Vec<PolicyKind>> {
        if self.policies.is_empty() {
            return Err(Error::config("policies", "at least one policy is required"));
        }
        self.policies.iter().map(|p| p.parse()).collect()
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_toml_str(&text)
}

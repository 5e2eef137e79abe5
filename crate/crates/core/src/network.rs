//! The immutable scenario record shared by the reward engine, the policies
//! and the simulator. Everything here is SI: watts, metres, seconds, bits.

use crate::catalog::{validate_cache_profile, CacheProfile, Catalog};
use crate::channel::{avg_snr, LinkBudget, PathLoss};
use crate::error::{Error, Result};
use crate::{FadingParams, RateTable, TimingConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Satellite to user link.
    pub sat_user: LinkBudget<f64>,
    /// Satellite to terrestrial station link.
    pub sat_ts: LinkBudget<f64>,
    /// Terrestrial station to user link.
    pub ts_user: LinkBudget<f64>,
    /// Satellite-to-ground distance `d_0`, metres.
    pub sat_distance: f64,
    pub sat_fading: FadingParams,
    pub ts_fading: FadingParams,
    pub catalog: Catalog,
    pub cache: CacheProfile,
    pub rates: RateTable,
    pub timing: TimingConstants,
    /// Mean request inter-arrival time, seconds.
    pub tau_s: f64,
    pub cells: usize,
    /// Cell radius `R`, metres.
    pub cell_radius: f64,
}

impl NetworkConfig {
    /// Checks the cross-field constraints that the component types cannot
    /// check on their own.
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s > 0.0) || !self.tau_s.is_finite() {
            return Err(Error::config(
                "tau_s_ms",
                "mean inter-arrival time must be positive",
            ));
        }
        if self.cells == 0 {
            return Err(Error::config("cells", "at least one cell is required"));
        }
        if !(self.cell_radius > 0.0) {
            return Err(Error::config(
                "cell_radius_m",
                "cell radius must be positive",
            ));
        }
        if !(self.sat_distance > 0.0) {
            return Err(Error::config(
                "altitude_km",
                "satellite distance must be positive",
            ));
        }
        if let Err(v) = validate_cache_profile(&self.cache, &self.catalog)? {
            let key = match &v[0] {
                crate::catalog::CacheViolation::ProbabilityRange { site, .. }
                | crate::catalog::CacheViolation::Capacity { site, .. } => match site {
                    crate::catalog::CacheSite::Satellite => "sat_cache_probs",
                    crate::catalog::CacheSite::Station => "ts_cache_probs",
                },
            };
            let detail = v
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::config(key, detail));
        }
        Ok(())
    }

    /// Average SNR of the direct satellite link, `gbar_s`.
    pub fn gbar_s(&self) -> f64 {
        avg_snr(&self.sat_user, self.sat_distance).expect("validated distance")
    }

    /// Average SNR at a terrestrial station, `gbar_t`.
    pub fn gbar_t(&self) -> f64 {
        avg_snr(&self.sat_ts, self.sat_distance).expect("validated distance")
    }

    /// Average terrestrial SNR at user distance `d` from its station.
    pub fn gbar_u(&self, d: f64) -> Result<f64> {
        avg_snr(&self.ts_user, d)
    }

    pub fn with_tau_s(&self, tau_s: f64) -> Self {
        Self {
            tau_s,
            ..self.clone()
        }
    }

    /// A copy with the satellite power replaced (both satellite links).
    pub fn with_sat_power(&self, watts: f64) -> Self {
        let mut out = self.clone();
        out.sat_user.p_tx = watts;
        out.sat_ts.p_tx = watts;
        out
    }

    pub fn with_ts_power(&self, watts: f64) -> Self {
        let mut out = self.clone();
        out.ts_user.p_tx = watts;
        out
    }
}

/// Free-space link used for both satellite hops.
pub fn satellite_link(
    p_tx: f64,
    g_tx: f64,
    g_rx: f64,
    noise: f64,
    carrier_hz: f64,
) -> Result<LinkBudget<f64>> {
    LinkBudget::new(p_tx, g_tx, g_rx, noise, PathLoss::FreeSpace { carrier_hz })
}

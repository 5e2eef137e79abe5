//! Discrete rate adaptation and delivery latencies.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rates `R_1 < .. < R_M` (bits/s) with linear SNR thresholds
/// `gamma_1 < .. < gamma_M`. Below `gamma_1` the link is in outage
/// (`R_0 = 0`); above `gamma_M` it runs at `R_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable<F> {
    rates: Vec<F>,
    thresholds: Vec<F>,
}

impl<F: Scalar> RateTable<F> {
    pub fn new(rates: Vec<F>, thresholds: Vec<F>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::config(
                "rates_mbps",
                "rate table needs at least one mode",
            ));
        }
        if rates.len() != thresholds.len() {
            return Err(Error::config(
                "thresholds_db",
                format!("{} thresholds for {} rates", thresholds.len(), rates.len()),
            ));
        }
        if !(rates[0] > F::zero()) || rates.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config(
                "rates_mbps",
                "rates must be positive and strictly increasing",
            ));
        }
        if !(thresholds[0] >= F::zero()) || thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config(
                "thresholds_db",
                "thresholds must be strictly increasing",
            ));
        }
        Ok(Self { rates, thresholds })
    }

    pub fn rates(&self) -> &[F] {
        &self.rates
    }

    pub fn thresholds(&self) -> &[F] {
        &self.thresholds
    }

    pub fn modes(&self) -> usize {
        self.rates.len()
    }

    pub fn max_rate(&self) -> F {
        self.rates[self.rates.len() - 1]
    }

    /// Index of the highest threshold not above `gamma`, `None` in outage.
    pub fn mode_index(&self, gamma: F) -> Option<usize> {
        let k = self.thresholds.partition_point(|&t| t <= gamma);
        k.checked_sub(1)
    }

    /// `R_m` for `gamma_m <= gamma < gamma_{m+1}`, zero in outage.
    pub fn rate_from_snr(&self, gamma: F) -> F {
        self.mode_index(gamma).map_or(F::zero(), |m| self.rates[m])
    }
}

/// Latency constants: satellite-ground latency `t1`, gateway fetch `t2`
/// and station probe duration `tau_p`, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConstants<F> {
    pub t1: F,
    pub t2: F,
    pub tau_p: F,
}

impl<F: Scalar> TimingConstants<F> {
    pub fn new(t1: F, t2: F, tau_p: F) -> Result<Self> {
        for (key, v) in [("t1_ms", t1), ("t2_ms", t2), ("tau_p_ms", tau_p)] {
            if !(v >= F::zero()) || !v.is_finite() {
                return Err(Error::config(key, "must be finite and non-negative"));
            }
        }
        Ok(Self { t1, t2, tau_p })
    }
}

/// `B / R_s + T_1 + [beta_s = 0] T_2`; `None` when the direct link is in outage.
pub fn direct_latency<F: Scalar>(
    bits: F,
    rate: F,
    beta_s: bool,
    t: &TimingConstants<F>,
) -> Option<F> {
    if !(rate > F::zero()) {
        return None;
    }
    let fetch = if beta_s { F::zero() } else { t.t2 };
    Some(bits / rate + t.t1 + fetch)
}

/// Station-assisted latency: `B / R_{r,1}` from the station cache when
/// `beta_r`, otherwise `B / R_{r,2} + T_1` relaying from the satellite.
/// `None` when the selected mode is in outage.
pub fn assisted_latency<F: Scalar>(
    bits: F,
    beta_r: bool,
    rate_cache: F,
    rate_relay: F,
    t: &TimingConstants<F>,
) -> Option<F> {
    if beta_r {
        (rate_cache > F::zero()).then(|| bits / rate_cache)
    } else {
        (rate_relay > F::zero()).then(|| bits / rate_relay + t.t1)
    }
}

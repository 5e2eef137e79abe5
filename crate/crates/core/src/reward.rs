//! Priced rewards, the probe-expected reward and the Bellman right-hand
//! side `Lambda(eta)`.
//!
//! With time priced at `eta` bits/s, a stopped user is worth
//! `B - eta T`. Probing the user's terrestrial station is worth the
//! expectation of `max{B - eta T_{k,2}, 0}` over the station's cache state and
//! link gains, less the probe cost `eta tau_p`. All of it reduces to the
//! survival functions of the cache-hit and relay SNRs evaluated at the rate
//! thresholds, which do not depend on `eta`; [`LambdaTable`] precomputes
//! them once so that `Lambda(eta)` is a cheap weighted sum.

use crate::channel::{pdf_snr_direct, RelaySurvival};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::policy::{classify_stage1, Decision};
use crate::quadrature::GaussLegendre;
use crate::{RateTable, TimingConstants};

/// A reward with its time cost under price `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricedReward {
    /// bits
    pub value: f64,
    /// seconds
    pub time_cost: f64,
    /// `value - eta * time_cost`, bits
    pub priced: f64,
}

pub fn priced(value: f64, time_cost: f64, eta: f64) -> PricedReward {
    PricedReward {
        value,
        time_cost,
        priced: value - eta * time_cost,
    }
}

/// Discretization of the radial and direct-SNR integrals in `Lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub snr_nodes: usize,
    /// The direct-SNR integral is truncated where its CDF reaches this level.
    pub snr_truncation_quantile: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 48,
            snr_nodes: 256,
            snr_truncation_quantile: 1.0 - 1e-7,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes == 0 {
            return Err(Error::config("radial_nodes", "must be positive"));
        }
        if self.snr_nodes == 0 {
            return Err(Error::config("snr_nodes", "must be positive"));
        }
        let q = self.snr_truncation_quantile;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::config(
                "snr_truncation_quantile",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            snr_nodes: 2 * self.snr_nodes,
            ..*self
        }
    }
}

/// Which latency enters the direct-delivery term of `Lambda`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LatencyReading {
    /// `T_{k,1} = B/R_s + T_1 + [beta_s = 0] T_2`, the latency the
    /// simulator charges.
    #[default]
    Protocol,
    /// The protocol latency plus a further `T_1` (and `T_2` on a satellite
    /// cache miss), as the fixed-point equation is typeset.
    Printed,
}

/// `E[max{B - eta T_{k,2}, 0}] - eta tau_p` from the survival functions of
/// the cache-hit SNR and relay SNR at the thresholds `gamma_1..gamma_M`.
///
/// Modes are visited from the top down and stop at the first inadmissible
/// one, so the survival callbacks are only invoked where they matter.
pub(crate) fn omega_from_survival(
    bits: f64,
    p_ts: f64,
    eta: f64,
    rates: &RateTable,
    timing: &TimingConstants,
    mut cache_survival: impl FnMut(usize) -> f64,
    mut relay_survival: impl FnMut(usize) -> f64,
) -> f64 {
    let r = rates.rates();
    let mut cache = 0.0;
    if p_ts > 0.0 {
        let mut above = 0.0;
        for k in (0..r.len()).rev() {
            if r[k] < eta {
                break;
            }
            let s = cache_survival(k);
            cache += (s - above) * (bits - eta * bits / r[k]);
            above = s;
        }
    }
    let mut relay = 0.0;
    let budget = bits - eta * timing.t1;
    if p_ts < 1.0 && budget > 0.0 {
        let needed = eta * bits / budget;
        let mut above = 0.0;
        for k in (0..r.len()).rev() {
            if r[k] < needed {
                break;
            }
            let s = relay_survival(k);
            relay += (s - above) * (budget - eta * bits / r[k]);
            above = s;
        }
    }
    p_ts * cache + (1.0 - p_ts) * relay - eta * timing.tau_p
}

/// Per-scenario constants for evaluating rewards of individual users.
#[derive(Debug, Clone)]
pub struct RewardModel<'a> {
    env: &'a NetworkConfig,
    gbar_s: f64,
    gbar_t: f64,
    relay: RelaySurvival,
}

impl<'a> RewardModel<'a> {
    pub fn new(env: &'a NetworkConfig) -> Self {
        let gbar_t = env.gbar_t();
        Self {
            env,
            gbar_s: env.gbar_s(),
            gbar_t,
            relay: RelaySurvival::new(&env.ts_fading, gbar_t),
        }
    }

    pub fn env(&self) -> &'a NetworkConfig {
        self.env
    }

    pub fn gbar_s(&self) -> f64 {
        self.gbar_s
    }

    pub fn gbar_t(&self) -> f64 {
        self.gbar_t
    }

    pub fn relay(&self) -> &RelaySurvival {
        &self.relay
    }

    /// Direct-delivery latency `T_{k,1}`, `None` in outage.
    pub fn direct_latency(&self, bits: f64, beta_s: bool, h_sq: f64) -> Option<f64> {
        let rate = self.env.rates.rate_from_snr(self.gbar_s * h_sq);
        crate::rates::direct_latency(bits, rate, beta_s, &self.env.timing)
    }

    /// Immediate priced reward `B - eta T_{k,1}`, `None` in outage.
    pub fn immediate(&self, bits: f64, beta_s: bool, h_sq: f64, eta: f64) -> Option<f64> {
        self.direct_latency(bits, beta_s, h_sq)
            .map(|t| bits - eta * t)
    }

    /// Probe-expected reward of a user requesting `file` with direct gain
    /// `h_sq` at distance `d` from its station.
    ///
    /// The satellite cache state is not an argument: neither assisted
    /// latency depends on it.
    pub fn omega(&self, file: usize, h_sq: f64, d: f64, eta: f64) -> Result<f64> {
        let mu = self.env.gbar_u(d)?;
        Ok(self.omega_at(file, self.gbar_s * h_sq, mu, eta))
    }

    fn omega_at(&self, file: usize, direct_snr: f64, mu: f64, eta: f64) -> f64 {
        let env = self.env;
        let th = env.rates.thresholds();
        omega_from_survival(
            env.catalog.sizes()[file],
            env.cache.ts_probs[file],
            eta,
            &env.rates,
            &env.timing,
            |k| (-th[k] / mu).exp(),
            |k| self.relay.survival(th[k] - direct_snr, mu),
        )
    }

    /// An upper bound on [`Self::omega`] that skips the relay integral:
    /// the harmonic relay term never exceeds the terrestrial hop, so
    /// `P(relay SNR >= gamma) <= exp(-(gamma - direct) / mu)`.
    pub fn omega_upper_bound(&self, file: usize, h_sq: f64, d: f64, eta: f64) -> Result<f64> {
        let env = self.env;
        let mu = env.gbar_u(d)?;
        let direct = self.gbar_s * h_sq;
        let th = env.rates.thresholds();
        let bits = env.catalog.sizes()[file];
        let p_ts = env.cache.ts_probs[file];
        let cache_only = omega_from_survival(
            bits,
            p_ts,
            eta,
            &env.rates,
            &env.timing,
            |k| (-th[k] / mu).exp(),
            |_| 0.0,
        );
        let budget = bits - eta * env.timing.t1;
        if p_ts >= 1.0 || budget <= 0.0 {
            return Ok(cache_only);
        }
        let needed = eta * bits / budget;
        let r = env.rates.rates();
        let Some(lowest) = (0..r.len()).find(|&k| r[k] >= needed) else {
            return Ok(cache_only);
        };
        let best = budget - eta * bits / env.rates.max_rate();
        let y = th[lowest] - direct;
        let tail = if y <= 0.0 { 1.0 } else { (-y / mu).exp() };
        Ok(cache_only + (1.0 - p_ts) * best.max(0.0) * tail)
    }
}

/// Probe-expected reward of one user; see [`RewardModel::omega`].
pub fn omega_reward(file: usize, h_sq: f64, d: f64, eta: f64, env: &NetworkConfig) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::domain("omega_reward", "price must be non-negative"));
    }
    if !(d > 0.0 && d <= env.cell_radius) {
        return Err(Error::domain(
            "omega_reward",
            format!("distance {d} outside (0, R]"),
        ));
    }
    RewardModel::new(env).omega(file, h_sq, d, eta)
}

#[derive(Debug, Clone, Copy)]
struct FileTerm {
    popularity: f64,
    bits: f64,
    p_sat: f64,
    p_ts: f64,
}

#[derive(Debug, Clone)]
struct RadialNode {
    /// Quadrature weight times the radial density `2r / R^2`.
    weight: f64,
    /// Survival of the cache-hit SNR at each threshold.
    cache_survival: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct SnrNode {
    /// Quadrature weight times the direct-SNR density.
    weight: f64,
    mode: Option<usize>,
}

/// Probability that a fresh user falls in each stage-1 decision region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionMasses {
    pub direct: f64,
    pub wait: f64,
    pub probe: f64,
}

/// `Lambda(eta)` discretized on a radial x direct-SNR product grid with all
/// `eta`-independent survival probabilities cached.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    files: Vec<FileTerm>,
    radial: Vec<RadialNode>,
    snr: Vec<SnrNode>,
    /// `[radial][snr][mode]`, survival of the relay SNR at each threshold.
    relay_survival: Vec<f64>,
    rates: RateTable,
    timing: TimingConstants,
    reading: LatencyReading,
}

impl LambdaTable {
    pub fn build(
        env: &NetworkConfig,
        quad: &QuadratureSpec,
        reading: LatencyReading,
    ) -> Result<Self> {
        quad.validate()?;
        let model = RewardModel::new(env);
        let m = env.rates.modes();
        let th = env.rates.thresholds();

        let radius = env.cell_radius;
        let radial_rule = GaussLegendre::<f64>::new(quad.radial_nodes);
        let mut radial = Vec::with_capacity(quad.radial_nodes);
        let mut mus = Vec::with_capacity(quad.radial_nodes);
        for (r, w) in radial_rule.mapped(0.0, radius) {
            let mu = env.gbar_u(r)?;
            mus.push(mu);
            radial.push(RadialNode {
                weight: w * 2.0 * r / (radius * radius),
                cache_survival: th.iter().map(|&g| (-g / mu).exp()).collect(),
            });
        }

        // The direct rate jumps at every threshold, so each bracket gets its
        // own rule.
        let gbar_s = model.gbar_s();
        let tail = 1.0 - quad.snr_truncation_quantile;
        let snr_max = gbar_s * env.sat_fading.power_survival_quantile(tail);
        let mut breaks = vec![0.0];
        breaks.extend(th.iter().copied().filter(|&g| g < snr_max));
        breaks.push(snr_max);
        let segments = breaks.len() - 1;
        let per_segment = (quad.snr_nodes / segments).max(4);
        let snr_rule = GaussLegendre::<f64>::new(per_segment);
        let mut snr = Vec::new();
        let mut snr_points = Vec::new();
        for s in 0..segments {
            let mode = s.checked_sub(1);
            for (g, w) in snr_rule.mapped(breaks[s], breaks[s + 1]) {
                let density = pdf_snr_direct(g, gbar_s, &env.sat_fading)?;
                snr.push(SnrNode {
                    weight: w * density,
                    mode,
                });
                snr_points.push(g);
            }
        }

        let mut relay_survival = Vec::with_capacity(mus.len() * snr.len() * m);
        for &mu in &mus {
            for &g in &snr_points {
                for &t in th {
                    relay_survival.push(model.relay().survival(t - g, mu));
                }
            }
        }

        let files = (0..env.catalog.len())
            .map(|i| FileTerm {
                popularity: env.catalog.popularity()[i],
                bits: env.catalog.sizes()[i],
                p_sat: env.cache.sat_probs[i],
                p_ts: env.cache.ts_probs[i],
            })
            .collect();

        Ok(Self {
            files,
            radial,
            snr,
            relay_survival,
            rates: env.rates.clone(),
            timing: env.timing,
            reading,
        })
    }

    fn direct_priced(
        &self,
        file: &FileTerm,
        mode: Option<usize>,
        beta_s: bool,
        eta: f64,
    ) -> Option<f64> {
        let rate = self.rates.rates()[mode?];
        let mut t = crate::rates::direct_latency(file.bits, rate, beta_s, &self.timing)?;
        if self.reading == LatencyReading::Printed {
            t += self.timing.t1 + if beta_s { 0.0 } else { self.timing.t2 };
        }
        Some(file.bits - eta * t)
    }

    /// Visits every grid point with its weight, the two direct priced
    /// rewards (satellite cache hit, miss) and the probe-expected reward.
    fn for_each_point(
        &self,
        eta: f64,
        mut visit: impl FnMut(&FileTerm, f64, [Option<f64>; 2], f64),
    ) {
        let m = self.rates.modes();
        let per_radial = self.snr.len() * m;
        for file in &self.files {
            for (j, node) in self.radial.iter().enumerate() {
                let base = j * per_radial;
                for (l, s) in self.snr.iter().enumerate() {
                    let relay = &self.relay_survival[base + l * m..base + (l + 1) * m];
                    let omega = omega_from_survival(
                        file.bits,
                        file.p_ts,
                        eta,
                        &self.rates,
                        &self.timing,
                        |k| node.cache_survival[k],
                        |k| relay[k],
                    );
                    let direct = [
                        self.direct_priced(file, s.mode, true, eta),
                        self.direct_priced(file, s.mode, false, eta),
                    ];
                    visit(file, node.weight * s.weight, direct, omega);
                }
            }
        }
    }

    /// `Lambda(eta)`: the expected best of stopping, skipping and probing
    /// for one fresh user.
    pub fn eval(&self, eta: f64) -> f64 {
        let mut total = 0.0;
        self.for_each_point(eta, |file, w, direct, omega| {
            let best = |d: Option<f64>| d.map_or(0.0, |d| d.max(0.0)).max(omega);
            let v = file.p_sat * best(direct[0]) + (1.0 - file.p_sat) * best(direct[1]);
            total += file.popularity * w * v;
        });
        total
    }

    /// Decision-region probabilities of the threshold policy at price `eta`.
    pub fn decision_masses(&self, eta: f64) -> DecisionMasses {
        let mut out = DecisionMasses {
            direct: 0.0,
            wait: 0.0,
            probe: 0.0,
        };
        self.for_each_point(eta, |file, w, direct, omega| {
            for (d, p) in direct.into_iter().zip([file.p_sat, 1.0 - file.p_sat]) {
                let mass = file.popularity * w * p;
                match classify_stage1(d, omega) {
                    Decision::DirectDelivery => out.direct += mass,
                    Decision::Wait => out.wait += mass,
                    _ => out.probe += mass,
                }
            }
        });
        out
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.radial.len(), self.snr.len())
    }
}

/// `Lambda(eta)` for one price; builds a fresh table. Use [`LambdaTable`]
/// directly to evaluate many prices.
pub fn lambda_of_eta(eta: f64, env: &NetworkConfig, quad: &QuadratureSpec) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::domain("lambda_of_eta", "price must be non-negative"));
    }
    Ok(LambdaTable::build(env, quad, LatencyReading::Protocol)?.eval(eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn env() -> NetworkConfig {
        ExperimentConfig::reference_scenario().network().unwrap()
    }

    #[test]
    fn priced_arithmetic() {
        assert_eq!(priced(1e8, 1.0, 5e7).priced, 5e7);
        assert_eq!(priced(3.0, 2.0, 0.0).priced, 3.0);
        assert_eq!(priced(0.0, 2.0, 4.0).priced, -8.0);
        let p = priced(7.0, 0.5, 2.0);
        assert_eq!(p.priced, p.value - 2.0 * p.time_cost);
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            snr_truncation_quantile: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            radial_nodes: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn omega_at_zero_price_telescopes() {
        let env = env();
        let model = RewardModel::new(&env);
        let (h, d) = (0.5, 150.0);
        let mu = env.gbar_u(d).unwrap();
        let g1 = env.rates.thresholds()[0];
        let b = 1e8;
        let p_t = env.cache.ts_probs[0];
        let f1 = 1.0 - (-g1 / mu).exp();
        let f2 = 1.0 - model.relay().survival(g1 - model.gbar_s() * h, mu);
        let want = b * (p_t * (1.0 - f1) + (1.0 - p_t) * (1.0 - f2));
        let got = omega_reward(0, h, d, 0.0, &env).unwrap();
        assert!((got - want).abs() < 1e-6 * b, "{got} vs {want}");
    }

    #[test]
    fn omega_with_prohibitive_price_is_probe_cost() {
        let env = env();
        let eta = 1e12;
        let got = omega_reward(0, 0.5, 300.0, eta, &env).unwrap();
        assert_eq!(got, -eta * env.timing.tau_p);
    }

    #[test]
    fn omega_bounded_by_file_size() {
        let env = env();
        for &(h, d) in &[(0.1, 10.0), (3.0, 1.0), (0.5, 999.0), (10.0, 50.0)] {
            for &eta in &[0.0, 1e7, 8e7] {
                let v = omega_reward(0, h, d, eta, &env).unwrap();
                assert!(v + eta * env.timing.tau_p <= 1e8 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn upper_bound_dominates_omega() {
        let env = env();
        let model = RewardModel::new(&env);
        for &(h, d) in &[
            (0.1, 10.0),
            (0.9, 120.0),
            (0.5, 400.0),
            (2.0, 80.0),
            (0.3, 999.0),
        ] {
            for &eta in &[0.0, 3e7, 6e7, 1e8, 1.3e8] {
                let exact = model.omega(0, h, d, eta).unwrap();
                let ub = model.omega_upper_bound(0, h, d, eta).unwrap();
                assert!(ub >= exact - 1e-6, "h={h} d={d} eta={eta}: {ub} < {exact}");
            }
        }
    }

    #[test]
    fn relay_branch_unreachable_when_latency_exceeds_budget() {
        let env = env();
        // eta T_1 >= B: only the cache branch can pay
        let eta = 1e8 / env.timing.t1;
        let model = RewardModel::new(&env);
        let got = model.omega(0, 0.5, 50.0, eta).unwrap();
        let cache_only = omega_from_survival(
            1e8,
            env.cache.ts_probs[0],
            eta,
            &env.rates,
            &env.timing,
            |_| 1.0,
            |_| panic!("relay branch evaluated"),
        );
        assert_eq!(got, cache_only);
    }

    #[test]
    fn rejects_bad_arguments() {
        let env = env();
        assert!(omega_reward(0, 0.5, 0.0, 1.0, &env).is_err());
        assert!(omega_reward(0, 0.5, 2000.0, 1.0, &env).is_err());
        assert!(omega_reward(0, 0.5, 10.0, -1.0, &env).is_err());
        assert!(lambda_of_eta(-1.0, &env, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn lambda_limits() {
        let env = env();
        let table =
            LambdaTable::build(&env, &QuadratureSpec::default(), LatencyReading::Protocol).unwrap();
        // at zero price only users with no usable mode at all are lost
        let l0 = table.eval(0.0);
        assert!(l0 <= env.catalog.mean_size() * (1.0 + 1e-9), "{l0}");
        assert!(l0 > 0.5 * env.catalog.mean_size(), "{l0}");
        assert_eq!(table.eval(1e13), 0.0);
    }

    #[test]
    fn printed_reading_never_exceeds_protocol() {
        let env = env();
        let q = QuadratureSpec {
            radial_nodes: 16,
            snr_nodes: 64,
            ..Default::default()
        };
        let a = LambdaTable::build(&env, &q, LatencyReading::Protocol).unwrap();
        let b = LambdaTable::build(&env, &q, LatencyReading::Printed).unwrap();
        for &eta in &[1e7, 5e7, 1e8] {
            assert!(b.eval(eta) <= a.eval(eta));
        }
        assert!(b.eval(5e7) < a.eval(5e7));
    }

    #[test]
    fn decision_masses_partition_unity() {
        let env = env();
        let q = QuadratureSpec {
            radial_nodes: 16,
            snr_nodes: 64,
            ..Default::default()
        };
        let t = LambdaTable::build(&env, &q, LatencyReading::Protocol).unwrap();
        let m = t.decision_masses(9e7);
        assert!((m.direct + m.wait + m.probe - 1.0).abs() < 1e-3);
    }
}

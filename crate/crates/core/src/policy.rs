//! The two-stage threshold rule and the no-wait baselines.

use std::fmt;
use std::str::FromStr;

use crate::catalog::Request;
use crate::channel::{combined_relay_snr, ChannelDraw};
use crate::error::{Error, Result};
use crate::rates::assisted_latency;
use crate::reward::RewardModel;

/// What the satellite sees when a user arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Obs {
    pub request: Request,
    pub beta_s: bool,
    pub h_sq: f64,
    /// One-based cell index.
    pub cell: usize,
    /// Distance to the cell's terrestrial station, metres.
    pub d: f64,
}

/// What the station reports after being probed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2Obs {
    pub beta_r: bool,
    pub alpha_sq: f64,
    pub g_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    DirectDelivery,
    Wait,
    Probe,
    AssistedCacheDelivery,
    AssistedRelayDelivery,
    WaitAfterProbe,
}

impl Decision {
    pub fn is_delivery(self) -> bool {
        matches!(
            self,
            Decision::DirectDelivery
                | Decision::AssistedCacheDelivery
                | Decision::AssistedRelayDelivery
        )
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::DirectDelivery => "direct",
            Decision::Wait => "wait",
            Decision::Probe => "probe",
            Decision::AssistedCacheDelivery => "assisted-cache",
            Decision::AssistedRelayDelivery => "assisted-relay",
            Decision::WaitAfterProbe => "wait-after-probe",
        })
    }
}

/// Stage-1 regions from the immediate priced reward (`None` in outage) and
/// the probe-expected reward.
pub fn classify_stage1(immediate: Option<f64>, omega: f64) -> Decision {
    match immediate {
        Some(z) if z >= omega.max(0.0) => Decision::DirectDelivery,
        Some(z) if z.max(omega) < 0.0 => Decision::Wait,
        None if omega < 0.0 => Decision::Wait,
        _ => Decision::Probe,
    }
}

/// Immediate priced reward and probe-expected reward of a stage-1 observation.
pub fn stage1_comparands(
    obs: &Stage1Obs,
    eta: f64,
    model: &RewardModel,
) -> Result<(Option<f64>, f64)> {
    let immediate = model.immediate(obs.request.size, obs.beta_s, obs.h_sq, eta);
    let omega = model.omega(obs.request.file_index, obs.h_sq, obs.d, eta)?;
    Ok((immediate, omega))
}

/// Stage-1 rule at price `eta`.
///
/// Most arrivals are settled by a closed-form bound on the probe-expected
/// reward; the relay integral is only evaluated when the bound is not
/// decisive. The result is the same as classifying the exact comparands.
pub fn decide_stage1(obs: &Stage1Obs, eta: f64, model: &RewardModel) -> Result<Decision> {
    let immediate = model.immediate(obs.request.size, obs.beta_s, obs.h_sq, eta);
    let bound = model.omega_upper_bound(obs.request.file_index, obs.h_sq, obs.d, eta)?;
    let z = immediate.unwrap_or(f64::NEG_INFINITY);
    if z >= bound.max(0.0) {
        return Ok(Decision::DirectDelivery);
    }
    if z.max(bound) < 0.0 {
        return Ok(Decision::Wait);
    }
    let omega = model.omega(obs.request.file_index, obs.h_sq, obs.d, eta)?;
    Ok(classify_stage1(immediate, omega))
}

/// Rates of the two assisted modes: station cache to user and satellite
/// relayed through the station.
pub fn assisted_rates(
    obs1: &Stage1Obs,
    obs2: &Stage2Obs,
    model: &RewardModel,
) -> Result<(f64, f64)> {
    let env = model.env();
    let mu = env.gbar_u(obs1.d)?;
    let cache = env.rates.rate_from_snr(mu * obs2.g_sq);
    let draw = ChannelDraw {
        h_sq: obs1.h_sq,
        alpha_sq: obs2.alpha_sq,
        g_sq: obs2.g_sq,
    };
    let relay = env.rates.rate_from_snr(combined_relay_snr(
        &draw,
        model.gbar_s(),
        model.gbar_t(),
        mu,
    ));
    Ok((cache, relay))
}

/// Stage-2 rule after a probe: the station's cache state picks the mode,
/// which is used only if its priced reward is non-negative.
pub fn decide_stage2(
    obs2: &Stage2Obs,
    obs1: &Stage1Obs,
    eta: f64,
    model: &RewardModel,
) -> Result<Decision> {
    let (cache, relay) = assisted_rates(obs1, obs2, model)?;
    let bits = obs1.request.size;
    if obs2.beta_r {
        return Ok(if cache > 0.0 && cache >= eta {
            Decision::AssistedCacheDelivery
        } else {
            Decision::WaitAfterProbe
        });
    }
    let budget = bits - eta * model.env().timing.t1;
    if budget > 0.0 && relay > 0.0 && relay >= eta * bits / budget {
        Ok(Decision::AssistedRelayDelivery)
    } else {
        Ok(Decision::WaitAfterProbe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    NoWaitDirect,
    NoWaitAssisted,
    NoWaitNoTsCache,
}

impl BaselineKind {
    pub fn probes(self) -> bool {
        !matches!(self, BaselineKind::NoWaitDirect)
    }
}

/// Baseline schedulers serve every arrival at once. A user with no usable
/// mode is dropped and the frame continues with the next arrival.
///
/// Called without `obs2`, the probing baselines answer [`Decision::Probe`].
pub fn baseline_decide(
    kind: BaselineKind,
    obs1: &Stage1Obs,
    obs2: Option<&Stage2Obs>,
    model: &RewardModel,
) -> Result<Decision> {
    let direct = model.direct_latency(obs1.request.size, obs1.beta_s, obs1.h_sq);
    if kind == BaselineKind::NoWaitDirect {
        return Ok(if direct.is_some() {
            Decision::DirectDelivery
        } else {
            Decision::Wait
        });
    }
    let Some(obs2) = obs2 else {
        return Ok(Decision::Probe);
    };
    let beta_r = obs2.beta_r && kind == BaselineKind::NoWaitAssisted;
    let (cache, relay) = assisted_rates(obs1, obs2, model)?;
    let assisted = assisted_latency(obs1.request.size, beta_r, cache, relay, &model.env().timing);
    let assisted_mode = if beta_r {
        Decision::AssistedCacheDelivery
    } else {
        Decision::AssistedRelayDelivery
    };
    Ok(match (direct, assisted) {
        (Some(d), Some(a)) if a <= d => assisted_mode,
        (Some(_), _) => Decision::DirectDelivery,
        (None, Some(_)) => assisted_mode,
        (None, None) => Decision::WaitAfterProbe,
    })
}

/// Record of the observations taken in one frame: `(true, probed)` per
/// arrival, stopping at the scheduled user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationPath {
    pub steps: Vec<(bool, bool)>,
}

impl ObservationPath {
    pub fn push(&mut self, probed: bool) {
        self.steps.push((true, probed));
    }

    /// One-based index of the scheduled user.
    pub fn terminal_index(&self) -> usize {
        self.steps.len()
    }

    pub fn probes(&self) -> usize {
        self.steps.iter().filter(|s| s.1).count()
    }
}

/// Scheduling policy run by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Optimal,
    Baseline(BaselineKind),
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Optimal,
        PolicyKind::Baseline(BaselineKind::NoWaitDirect),
        PolicyKind::Baseline(BaselineKind::NoWaitAssisted),
        PolicyKind::Baseline(BaselineKind::NoWaitNoTsCache),
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Optimal => "optimal",
            PolicyKind::Baseline(BaselineKind::NoWaitDirect) => "no-wait-direct",
            PolicyKind::Baseline(BaselineKind::NoWaitAssisted) => "no-wait-assisted",
            PolicyKind::Baseline(BaselineKind::NoWaitNoTsCache) => "no-wait-no-ts-cache",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = PolicyKind::ALL.iter().map(|p| p.name()).collect();
                Error::config(
                    "policies",
                    format!("unknown policy {s:?}, expected one of {}", names.join(", ")),
                )
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::network::NetworkConfig;
    use proptest::prelude::*;

    fn env() -> NetworkConfig {
        ExperimentConfig::reference_scenario().network().unwrap()
    }

    fn obs1(env: &NetworkConfig, h_sq: f64, d: f64, beta_s: bool) -> Stage1Obs {
        Stage1Obs {
            request: Request {
                file_index: 0,
                size: env.catalog.sizes()[0],
                arrival_gap: 1e-4,
            },
            beta_s,
            h_sq,
            cell: 1,
            d,
        }
    }

    #[test]
    fn stage1_regions() {
        assert_eq!(classify_stage1(Some(5e7), 2e7), Decision::DirectDelivery);
        assert_eq!(classify_stage1(Some(-1e6), -2e5), Decision::Wait);
        assert_eq!(classify_stage1(Some(-1e6), 3e6), Decision::Probe);
        assert_eq!(classify_stage1(None, -1.0), Decision::Wait);
        assert_eq!(classify_stage1(None, 1.0), Decision::Probe);
        assert_eq!(classify_stage1(Some(1.0), 2.0), Decision::Probe);
    }

    #[test]
    fn stage2_thresholds() {
        let env = env();
        let model = RewardModel::new(&env);
        let eta = 5e7;
        let bits = 1e8;
        let threshold = eta * bits / (bits - eta * env.timing.t1);
        assert!((threshold - 5.005_005e7).abs() < 1e2);
        // find draws giving the tabulated rates
        let o1 = obs1(&env, 0.5, 200.0, true);
        let mu = env.gbar_u(o1.d).unwrap();
        let th = env.rates.thresholds();
        let g_for = |k: usize| 1.0001 * th[k] / mu;
        let hit = Stage2Obs {
            beta_r: true,
            alpha_sq: 1.0,
            g_sq: g_for(2),
        };
        assert_eq!(assisted_rates(&o1, &hit, &model).unwrap().0, 86.7e6);
        assert_eq!(
            decide_stage2(&hit, &o1, eta, &model).unwrap(),
            Decision::AssistedCacheDelivery
        );
        let low = Stage2Obs {
            beta_r: true,
            alpha_sq: 1.0,
            g_sq: g_for(0),
        };
        assert_eq!(
            decide_stage2(&low, &o1, eta, &model).unwrap(),
            Decision::WaitAfterProbe
        );

        // relay rate is set by the weaker hop; make the satellite hop strong
        let o1 = obs1(&env, 0.0, 200.0, true);
        let relay_at = |k: usize| Stage2Obs {
            beta_r: false,
            alpha_sq: 1e6,
            g_sq: 1.0005 * th[k] / mu,
        };
        assert_eq!(assisted_rates(&o1, &relay_at(1), &model).unwrap().1, 57.8e6);
        assert_eq!(
            decide_stage2(&relay_at(1), &o1, eta, &model).unwrap(),
            Decision::AssistedRelayDelivery
        );
        assert_eq!(assisted_rates(&o1, &relay_at(0), &model).unwrap().1, 43.3e6);
        assert_eq!(
            decide_stage2(&relay_at(0), &o1, eta, &model).unwrap(),
            Decision::WaitAfterProbe
        );
        // unreachable relay condition
        let eta = bits / env.timing.t1;
        assert_eq!(
            decide_stage2(&relay_at(5), &o1, eta, &model).unwrap(),
            Decision::WaitAfterProbe
        );
    }

    #[test]
    fn baselines() {
        let env = env();
        let model = RewardModel::new(&env);
        let outage = obs1(&env, 0.0, 100.0, true);
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitDirect, &outage, None, &model).unwrap(),
            Decision::Wait
        );
        let good = obs1(&env, 1.0, 100.0, true);
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitDirect, &good, None, &model).unwrap(),
            Decision::DirectDelivery
        );
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitAssisted, &good, None, &model).unwrap(),
            Decision::Probe
        );
        let cached = Stage2Obs {
            beta_r: true,
            alpha_sq: 0.0,
            g_sq: 10.0,
        };
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitAssisted, &good, Some(&cached), &model).unwrap(),
            Decision::AssistedCacheDelivery
        );
        // cache ignored and alpha = 0: the relayed SNR is the direct SNR, so
        // both latencies tie and the assisted mode is kept
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitNoTsCache, &good, Some(&cached), &model).unwrap(),
            Decision::AssistedRelayDelivery
        );
        let miss = obs1(&env, 1.0, 100.0, false);
        let weak = Stage2Obs {
            beta_r: true,
            alpha_sq: 0.0,
            g_sq: 1e-9,
        };
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitNoTsCache, &miss, Some(&weak), &model).unwrap(),
            Decision::AssistedRelayDelivery
        );
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitAssisted, &miss, Some(&weak), &model).unwrap(),
            Decision::DirectDelivery
        );
        let dead = Stage2Obs {
            beta_r: false,
            alpha_sq: 0.0,
            g_sq: 0.0,
        };
        assert_eq!(
            baseline_decide(BaselineKind::NoWaitAssisted, &outage, Some(&dead), &model).unwrap(),
            Decision::WaitAfterProbe
        );
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PolicyKind::ALL {
            assert_eq!(p.name().parse::<PolicyKind>().unwrap(), p);
        }
        assert!("greedy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn observation_path_counts() {
        let mut p = ObservationPath::default();
        p.push(false);
        p.push(true);
        p.push(false);
        assert_eq!(p.terminal_index(), 3);
        assert_eq!(p.probes(), 1);
        assert!(p.steps.iter().all(|s| s.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn shortcut_matches_exact_classification(
            h in 0.0f64..6.0, d in 1.0f64..1000.0, eta in 0.0f64..1.6e8, beta_s in any::<bool>()
        ) {
            let env = env();
            let model = RewardModel::new(&env);
            let o = obs1(&env, h, d, beta_s);
            let (imm, om) = stage1_comparands(&o, eta, &model).unwrap();
            prop_assert_eq!(decide_stage1(&o, eta, &model).unwrap(), classify_stage1(imm, om));
        }

        #[test]
        fn zero_price_never_waits_when_deliverable(h in 0.0f64..6.0, d in 1.0f64..1000.0, beta_s in any::<bool>()) {
            let env = env();
            let model = RewardModel::new(&env);
            let o = obs1(&env, h, d, beta_s);
            let (imm, om) = stage1_comparands(&o, 0.0, &model).unwrap();
            if imm.is_some() || om > 0.0 {
                prop_assert_ne!(decide_stage1(&o, 0.0, &model).unwrap(), Decision::Wait);
            }
        }

        #[test]
        fn better_gain_never_turns_direct_into_wait(
            h in 0.0f64..6.0, dh in 0.0f64..6.0, d in 1.0f64..1000.0, eta in 0.0f64..1.6e8
        ) {
            let env = env();
            let model = RewardModel::new(&env);
            let lo = decide_stage1(&obs1(&env, h, d, true), eta, &model).unwrap();
            let hi = decide_stage1(&obs1(&env, h + dh, d, true), eta, &model).unwrap();
            prop_assert!(!(lo == Decision::DirectDelivery && hi == Decision::Wait));
        }
    }
}

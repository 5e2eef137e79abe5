//! Renewal simulation of scheduling frames.
//!
//! A frame runs from one scheduled delivery to the next. Arrivals are
//! i.i.d.; every frame draws from its own generator stream
//! (`seed`, frame index), so results do not depend on execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::catalog::{sample_cache_states, sample_request};
use crate::channel::{sample_rayleigh_power, ShadowedRician};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::policy::{
    assisted_rates, baseline_decide, decide_stage1, decide_stage2, Decision, ObservationPath,
    PolicyKind, Stage1Obs, Stage2Obs,
};
use crate::rates::assisted_latency;
use crate::reward::RewardModel;

pub const DEFAULT_FRAME_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    /// Bits delivered to the scheduled user.
    pub reward: f64,
    /// Frame duration: arrival gaps, probes and the delivery latency, seconds.
    pub time: f64,
    pub users_seen: u64,
    pub probes: u64,
    pub mode: Decision,
}

/// A frame with its observation path and event clock.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    pub outcome: FrameOutcome,
    pub path: ObservationPath,
    /// Event timestamps relative to the frame start: each arrival, probe
    /// completion and the delivery completion.
    pub events: Vec<f64>,
}

/// Draws and decides one frame at a time for a fixed scenario and policy.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    model: RewardModel<'a>,
    policy: PolicyKind,
    eta_star: f64,
    sat: ShadowedRician,
    ts: ShadowedRician,
    frame_cap: u64,
}

impl<'a> Simulator<'a> {
    /// `eta_star` is ignored by the baselines.
    pub fn new(env: &'a NetworkConfig, policy: PolicyKind, eta_star: f64) -> Self {
        Self {
            model: RewardModel::new(env),
            policy,
            eta_star,
            sat: ShadowedRician::new(&env.sat_fading),
            ts: ShadowedRician::new(&env.ts_fading),
            frame_cap: DEFAULT_FRAME_CAP,
        }
    }

    pub fn with_frame_cap(mut self, cap: u64) -> Self {
        self.frame_cap = cap;
        self
    }

    pub fn model(&self) -> &RewardModel<'a> {
        &self.model
    }

    fn stage1<R: Rng + ?Sized>(&self, rng: &mut R) -> (Stage1Obs, bool) {
        let env = self.model.env();
        let request = sample_request(&env.catalog, env.tau_s, rng);
        let (beta_s, beta_r) = sample_cache_states(&env.cache, request.file_index, rng);
        let cell = rng.random_range(1..=env.cells);
        let u: f64 = 1.0 - rng.random::<f64>();
        let d = env.cell_radius * u.sqrt();
        let h_sq = self.sat.sample(rng);
        (
            Stage1Obs {
                request,
                beta_s,
                h_sq,
                cell,
                d,
            },
            beta_r,
        )
    }

    fn stage2<R: Rng + ?Sized>(&self, beta_r: bool, rng: &mut R) -> Stage2Obs {
        let alpha_sq = self.ts.sample(rng);
        let g_sq = sample_rayleigh_power(rng);
        Stage2Obs {
            beta_r,
            alpha_sq,
            g_sq,
        }
    }

    fn decide1(&self, obs: &Stage1Obs) -> Result<Decision> {
        match self.policy {
            PolicyKind::Optimal => decide_stage1(obs, self.eta_star, &self.model),
            PolicyKind::Baseline(kind) => baseline_decide(kind, obs, None, &self.model),
        }
    }

    fn decide2(&self, obs1: &Stage1Obs, obs2: &Stage2Obs) -> Result<Decision> {
        match self.policy {
            PolicyKind::Optimal => decide_stage2(obs2, obs1, self.eta_star, &self.model),
            PolicyKind::Baseline(kind) => baseline_decide(kind, obs1, Some(obs2), &self.model),
        }
    }

    fn latency(&self, mode: Decision, obs1: &Stage1Obs, obs2: Option<&Stage2Obs>) -> Result<f64> {
        let env = self.model.env();
        let bits = obs1.request.size;
        let t = match (mode, obs2) {
            (Decision::DirectDelivery, _) => {
                self.model.direct_latency(bits, obs1.beta_s, obs1.h_sq)
            }
            (Decision::AssistedCacheDelivery | Decision::AssistedRelayDelivery, Some(o2)) => {
                let (cache, relay) = assisted_rates(obs1, o2, &self.model)?;
                let from_cache = mode == Decision::AssistedCacheDelivery;
                assisted_latency(bits, from_cache, cache, relay, &env.timing)
            }
            _ => None,
        };
        t.ok_or_else(|| Error::domain("run_frame", format!("{mode} chosen with no usable mode")))
    }

    fn frame<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        mut trace: Option<&mut FrameTrace>,
    ) -> Result<FrameOutcome> {
        let tau_p = self.model.env().timing.tau_p;
        let mut gaps = 0.0;
        let mut probes = 0u64;
        let mut clock = 0.0;
        for users in 1..=self.frame_cap {
            let (obs1, beta_r) = self.stage1(rng);
            gaps += obs1.request.arrival_gap;
            clock += obs1.request.arrival_gap;
            if let Some(t) = trace.as_deref_mut() {
                t.events.push(clock);
            }
            let mut mode = self.decide1(&obs1)?;
            let mut obs2 = None;
            if mode == Decision::Probe {
                probes += 1;
                clock += tau_p;
                let o2 = self.stage2(beta_r, rng);
                mode = self.decide2(&obs1, &o2)?;
                obs2 = Some(o2);
                if let Some(t) = trace.as_deref_mut() {
                    t.events.push(clock);
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                t.path.push(obs2.is_some());
            }
            if mode.is_delivery() {
                let latency = self.latency(mode, &obs1, obs2.as_ref())?;
                clock += latency;
                if let Some(t) = trace.as_deref_mut() {
                    t.events.push(clock);
                }
                return Ok(FrameOutcome {
                    reward: obs1.request.size,
                    time: gaps + probes as f64 * tau_p + latency,
                    users_seen: users,
                    probes,
                    mode,
                });
            }
        }
        Err(Error::FrameCap {
            cap: self.frame_cap,
        })
    }

    pub fn run_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameOutcome> {
        self.frame(rng, None)
    }

    pub fn run_frame_traced<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameTrace> {
        let mut trace = FrameTrace {
            outcome: FrameOutcome {
                reward: 0.0,
                time: 0.0,
                users_seen: 0,
                probes: 0,
                mode: Decision::Wait,
            },
            path: ObservationPath::default(),
            events: Vec::new(),
        };
        trace.outcome = self.frame(rng, Some(&mut trace))?;
        Ok(trace)
    }
}

/// One frame of `policy` with a caller-supplied generator.
pub fn run_frame<R: Rng + ?Sized>(
    policy: PolicyKind,
    eta_star: f64,
    env: &NetworkConfig,
    rng: &mut R,
) -> Result<FrameOutcome> {
    Simulator::new(env, policy, eta_star).run_frame(rng)
}

/// Generator for frame `index` of the experiment seeded with `seed`.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    /// Total bits over total time, bits/s.
    pub throughput: f64,
    /// Batch-means 95% half-width, bits/s; infinite with fewer than two batches.
    pub ci95_halfwidth: f64,
    pub std_error: f64,
    pub frames: u64,
    pub seed: u64,
    pub total_reward: f64,
    pub total_time: f64,
    pub users: u64,
    pub probes: u64,
    pub batches: usize,
}

/// Batches used for the confidence interval.
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, Default)]
struct Totals {
    reward: f64,
    time: f64,
    users: u64,
    probes: u64,
}

impl Totals {
    fn add(&mut self, o: &FrameOutcome) {
        self.reward += o.reward;
        self.time += o.time;
        self.users += o.users_seen;
        self.probes += o.probes;
    }
}

/// Ratio-of-sums throughput over `frames` independent frames.
pub fn run_experiment(
    policy: PolicyKind,
    eta_star: f64,
    env: &NetworkConfig,
    frames: u64,
    seed: u64,
    execution: Execution,
) -> Result<ThroughputEstimate> {
    if frames == 0 {
        return Err(Error::config("frames", "at least one frame is required"));
    }
    let sim = Simulator::new(env, policy, eta_star);
    let batches = BATCHES.min(frames as usize);
    let bounds: Vec<(u64, u64)> = (0..batches as u64)
        .map(|b| {
            (
                b * frames / batches as u64,
                (b + 1) * frames / batches as u64,
            )
        })
        .collect();
    let run_batch = |&(lo, hi): &(u64, u64)| -> Result<Totals> {
        let mut t = Totals::default();
        for f in lo..hi {
            t.add(&sim.run_frame(&mut frame_rng(seed, f))?);
        }
        Ok(t)
    };
    let per_batch: Vec<Totals> = match execution {
        Execution::Sequential => bounds.iter().map(run_batch).collect::<Result<_>>()?,
        Execution::Parallel => bounds.par_iter().map(run_batch).collect::<Result<_>>()?,
    };
    let mut all = Totals::default();
    for b in &per_batch {
        all.reward += b.reward;
        all.time += b.time;
        all.users += b.users;
        all.probes += b.probes;
    }
    let throughput = all.reward / all.time;
    let (std_error, ci95_halfwidth) = batch_means_ci(&per_batch);
    Ok(ThroughputEstimate {
        throughput,
        ci95_halfwidth,
        std_error,
        frames,
        seed,
        total_reward: all.reward,
        total_time: all.time,
        users: all.users,
        probes: all.probes,
        batches,
    })
}

fn batch_means_ci(batches: &[Totals]) -> (f64, f64) {
    let n = batches.len();
    if n < 2 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let ratios: Vec<f64> = batches.iter().map(|b| b.reward / b.time).collect();
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (se, t * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::policy::BaselineKind;

    fn env() -> NetworkConfig {
        ExperimentConfig::reference_scenario().network().unwrap()
    }

    #[test]
    fn zero_price_schedules_first_deliverable_user() {
        let env = env();
        let sim = Simulator::new(&env, PolicyKind::Optimal, 0.0);
        let mut rng = frame_rng(3, 0);
        for _ in 0..200 {
            let o = sim.run_frame(&mut rng).unwrap();
            assert!(o.reward > 0.0 && o.time > 0.0);
            assert!(o.probes <= o.users_seen);
        }
    }

    #[test]
    fn trace_matches_outcome() {
        let env = env();
        let sim = Simulator::new(&env, PolicyKind::Optimal, 1.2e8);
        for f in 0..50 {
            let t = sim.run_frame_traced(&mut frame_rng(9, f)).unwrap();
            assert_eq!(t.path.terminal_index() as u64, t.outcome.users_seen);
            assert_eq!(t.path.probes() as u64, t.outcome.probes);
            let end = *t.events.last().unwrap();
            assert!((end - t.outcome.time).abs() <= 1e-12 * t.outcome.time);
            assert!(t.events.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn single_frame_experiment() {
        let env = env();
        let est = run_experiment(
            PolicyKind::Baseline(BaselineKind::NoWaitDirect),
            0.0,
            &env,
            1,
            4,
            Execution::Sequential,
        )
        .unwrap();
        let o = run_frame(
            PolicyKind::Baseline(BaselineKind::NoWaitDirect),
            0.0,
            &env,
            &mut frame_rng(4, 0),
        )
        .unwrap();
        assert_eq!(est.throughput, o.reward / o.time);
        assert!(est.ci95_halfwidth.is_infinite());
    }

    #[test]
    fn frame_cap_is_reported() {
        let env = env();
        // a price above every rate makes the optimal rule wait forever
        let sim = Simulator::new(&env, PolicyKind::Optimal, 1e12).with_frame_cap(100);
        assert_eq!(
            sim.run_frame(&mut frame_rng(1, 0)),
            Err(Error::FrameCap { cap: 100 })
        );
    }

    #[test]
    fn rejects_zero_frames() {
        let env = env();
        assert!(
            run_experiment(PolicyKind::Optimal, 0.0, &env, 0, 1, Execution::Sequential).is_err()
        );
    }
}

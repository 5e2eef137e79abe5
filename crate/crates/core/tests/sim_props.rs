//! Renewal-simulation properties.

mod common;

use common::default_env;
use hstjps::config::ExperimentConfig;
use hstjps::policy::{BaselineKind, PolicyKind};
use hstjps::reward::{LambdaTable, LatencyReading, QuadratureSpec};
use hstjps::sim::{frame_rng, run_experiment, Execution, Simulator};
use hstjps::solver::solve_eta_star;

#[test]
fn renewal_identity_and_reordering() {
    let env = default_env();
    let sim = Simulator::new(&env, PolicyKind::Optimal, 1.25e8);
    let frames: Vec<_> = (0..3000)
        .map(|f| sim.run_frame_traced(&mut frame_rng(12, f)).unwrap())
        .collect();
    // an independent clock: the last event of each frame, chained
    let mut clock = 0.0;
    for t in &frames {
        clock += *t.events.last().unwrap();
    }
    let total: f64 = frames.iter().map(|t| t.outcome.time).sum();
    assert!((clock - total).abs() <= 1e-12 * total, "{clock} vs {total}");

    let ratio = |it: &mut dyn Iterator<Item = &hstjps::sim::FrameTrace>| {
        let (mut v, mut t) = (0.0, 0.0);
        for f in it {
            v += f.outcome.reward;
            t += f.outcome.time;
        }
        v / t
    };
    let forward = ratio(&mut frames.iter());
    let backward = ratio(&mut frames.iter().rev());
    assert!((forward / backward - 1.0).abs() < 1e-12);

    let est = run_experiment(
        PolicyKind::Optimal,
        1.25e8,
        &env,
        3000,
        12,
        Execution::Sequential,
    )
    .unwrap();
    assert!((est.total_time / total - 1.0).abs() < 1e-12);
    assert!((est.throughput / forward - 1.0).abs() < 1e-12);
}

#[test]
fn single_step_frames() {
    // overwhelming link budgets and zero price: the first arrival is served
    let mut cfg = ExperimentConfig::reference_scenario();
    cfg.p_ts_dbm = 90.0;
    cfg.p_tr_dbm = 80.0;
    let env = cfg.network().unwrap();
    let sim = Simulator::new(&env, PolicyKind::Optimal, 0.0);
    for f in 0..2000 {
        let t = sim.run_frame_traced(&mut frame_rng(1, f)).unwrap();
        assert_eq!(t.outcome.users_seen, 1);
        assert_eq!(t.path.steps, vec![(true, false)]);
        let gap = t.events[0];
        let latency = t.outcome.time - gap;
        assert!(latency >= 1e8 / 144e6 + env.timing.t1 - 1e-12);
        assert_eq!(t.outcome.reward, 1e8);
    }
}

#[test]
fn probe_fraction_matches_analysis() {
    let env = default_env();
    let sol = solve_eta_star(&env, &QuadratureSpec::default(), 1e-6).unwrap();
    let fine = QuadratureSpec::default().doubled().doubled();
    let masses = LambdaTable::build(&env, &fine, LatencyReading::Protocol)
        .unwrap()
        .decision_masses(sol.eta_star);
    let est = run_experiment(
        PolicyKind::Optimal,
        sol.eta_star,
        &env,
        60_000,
        5,
        Execution::Sequential,
    )
    .unwrap();
    let empirical = est.probes as f64 / est.users as f64;
    assert!(
        (empirical / masses.probe - 1.0).abs() < 0.01,
        "empirical {empirical} vs analytic {}",
        masses.probe
    );
}

#[test]
fn disjoint_seeds_agree_statistically() {
    let env = default_env();
    let p = PolicyKind::Baseline(BaselineKind::NoWaitAssisted);
    let a = run_experiment(p, 0.0, &env, 100_000, 1, Execution::Sequential).unwrap();
    let b = run_experiment(p, 0.0, &env, 100_000, 2, Execution::Sequential).unwrap();
    let joint = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.throughput - b.throughput).abs() < 3.0 * joint);
    assert_ne!(a.throughput, b.throughput);
}

#[test]
fn optimal_dominates_baselines() {
    for (p_ts, tau_ms) in [(38.0, 0.5), (44.0, 4.0)] {
        let mut cfg = ExperimentConfig::reference_scenario();
        cfg.p_ts_dbm = p_ts;
        cfg.tau_s_ms = tau_ms;
        let env = cfg.network().unwrap();
        let sol = solve_eta_star(&env, &QuadratureSpec::default(), 1e-6).unwrap();
        let opt = run_experiment(
            PolicyKind::Optimal,
            sol.eta_star,
            &env,
            10_000,
            3,
            Execution::Sequential,
        )
        .unwrap();
        for p in &PolicyKind::ALL[1..] {
            let b =
                run_experiment(*p, sol.eta_star, &env, 10_000, 3, Execution::Sequential).unwrap();
            let joint = (opt.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(
                opt.throughput >= b.throughput - 2.0 * joint,
                "{p} at {p_ts} dBm, {tau_ms} ms"
            );
        }
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let env = default_env();
    for p in PolicyKind::ALL {
        let a = run_experiment(p, 1.2e8, &env, 500, 9, Execution::Sequential).unwrap();
        let b = run_experiment(p, 1.2e8, &env, 500, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

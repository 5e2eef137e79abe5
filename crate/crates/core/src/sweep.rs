//! Parameter sweeps: one re-solve and one simulation per grid point and
//! policy, emitted as CSV rows in grid order.

use std::io::Write;

use serde::Serialize;

use crate::config::{ExperimentConfig, SweepAxis};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::policy::PolicyKind;
use crate::sim::{run_experiment, Execution};
use crate::solver::{solve_eta_star_with, EtaSolution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub policy: String,
    pub p_ts_dbm: f64,
    pub p_tr_dbm: f64,
    pub tau_s_s: f64,
    pub frames: u64,
    pub seed: u64,
    pub eta_star_bps: f64,
    pub throughput_bps: f64,
    pub ci95_bps: f64,
}

/// The configuration with one axis set to `value` (dBm or ms).
pub fn at_point(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> ExperimentConfig {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::PTsDbm => c.p_ts_dbm = value,
        SweepAxis::PTrDbm => c.p_tr_dbm = value,
        SweepAxis::TauSMs => c.tau_s_ms = value,
    }
    c
}

/// Solves the scenario of a configuration.
pub fn solve_config(cfg: &ExperimentConfig) -> Result<(NetworkConfig, EtaSolution)> {
    let env = cfg.network()?;
    let sol = solve_eta_star_with(&env, &cfg.quadrature(), cfg.reading(), cfg.solver_tol)?;
    Ok((env, sol))
}

fn annotate(axis: SweepAxis, value: f64, policy: Option<PolicyKind>, e: Error) -> Error {
    let what = policy.map_or_else(|| "solver".to_string(), |p| format!("policy {p}"));
    Error::Sweep {
        point: format!("{axis:?} = {value}, {what}"),
        message: e.to_string(),
    }
}

/// Rows for every grid point and policy, grid-major.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    grid: &[f64],
    policies: &[PolicyKind],
    execution: Execution,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::config("sweep_grid", "grid must not be empty"));
    }
    let mut rows = Vec::with_capacity(grid.len() * policies.len());
    for &value in grid {
        let point = at_point(cfg, axis, value);
        let (env, sol) = solve_config(&point).map_err(|e| annotate(axis, value, None, e))?;
        for &policy in policies {
            let est = run_experiment(
                policy,
                sol.eta_star,
                &env,
                point.frames,
                point.seed,
                execution,
            )
            .map_err(|e| annotate(axis, value, Some(policy), e))?;
            rows.push(SweepRow {
                policy: policy.name().to_string(),
                p_ts_dbm: point.p_ts_dbm,
                p_tr_dbm: point.p_tr_dbm,
                tau_s_s: env.tau_s,
                frames: est.frames,
                seed: est.seed,
                eta_star_bps: sol.eta_star,
                throughput_bps: est.throughput,
                ci95_bps: est.ci95_halfwidth,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    })
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

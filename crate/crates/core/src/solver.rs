//! Bisection for the throughput fixed point `Lambda(eta) = eta tau_s`.

use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::reward::{LambdaTable, LatencyReading, QuadratureSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolution<F = f64> {
    pub eta_star: F,
    /// `|Lambda(eta_star) - eta_star tau_s|`, bits.
    pub residual: F,
    pub iterations: usize,
    pub bracket: (F, F),
}

const MAX_ITERATIONS: usize = 400;

/// Root of `g(eta) = lambda(eta) - eta tau_s` on `[0, upper]` for a
/// non-increasing `lambda` with `lambda(0) > 0`.
///
/// Stops once the bracket is within `tol` of the midpoint and the residual
/// is within `tol` of `eta tau_s`.
pub fn solve_fixed_point<F: Scalar>(
    lambda: impl Fn(F) -> F,
    tau_s: F,
    upper: F,
    tol: F,
) -> Result<EtaSolution<F>> {
    if !(tau_s > F::zero()) {
        return Err(Error::domain("solve_fixed_point", "tau_s must be positive"));
    }
    if !(tol > F::zero()) {
        return Err(Error::domain(
            "solve_fixed_point",
            "tolerance must be positive",
        ));
    }
    let g = |eta: F| lambda(eta) - eta * tau_s;
    let g0 = g(F::zero());
    if !(g0 > F::zero()) {
        return Err(Error::Bracket(format!("g(0) = {g0:?} is not positive")));
    }
    let g_hi = g(upper);
    if !(g_hi <= F::zero()) {
        return Err(Error::Bracket(format!(
            "g stays positive up to eta = {upper:?} (g = {g_hi:?})"
        )));
    }
    let (mut lo, mut hi) = (F::zero(), upper);
    let two = F::lit(2.0);
    for it in 1..=MAX_ITERATIONS {
        let mid = (lo + hi) / two;
        let gm = g(mid);
        if gm > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        let residual = gm.abs();
        if hi - lo <= tol * mid && residual <= tol * mid * tau_s {
            return Ok(EtaSolution {
                eta_star: mid,
                residual,
                iterations: it,
                bracket: (lo, hi),
            });
        }
        if hi <= lo {
            break;
        }
    }
    Err(Error::NonConvergence {
        function: "solve_fixed_point",
        partial: ((lo + hi) / two).as_f64(),
        terms: MAX_ITERATIONS,
    })
}

/// Maximal long-run throughput of the scenario, bits/s.
pub fn solve_eta_star(
    env: &NetworkConfig,
    quad: &QuadratureSpec,
    tol_rel: f64,
) -> Result<EtaSolution> {
    solve_eta_star_with(env, quad, LatencyReading::Protocol, tol_rel)
}

pub fn solve_eta_star_with(
    env: &NetworkConfig,
    quad: &QuadratureSpec,
    reading: LatencyReading,
    tol_rel: f64,
) -> Result<EtaSolution> {
    let table = LambdaTable::build(env, quad, reading)?;
    solve_fixed_point(
        |eta| table.eval(eta),
        env.tau_s,
        env.rates.max_rate(),
        tol_rel,
    )
}

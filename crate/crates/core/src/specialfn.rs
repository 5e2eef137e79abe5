//! Confluent (`1F1`) and generalized (`2F2`) hypergeometric functions.
//!
//! Both are evaluated by their power series with the Pochhammer-ratio
//! recurrence `t_{n+1} = t_n * z * prod(a_j + n) / (prod(b_j + n) * (n + 1))`.
//! The in-crate call sites only use moderate non-negative arguments, where
//! the series has positive terms and no cancellation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stopping rule for the hypergeometric power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl<F> {
    pub rel_tol: F,
    pub max_terms: usize,
}

impl<F: Scalar> Default for SeriesControl<F> {
    fn default() -> Self {
        Self {
            rel_tol: F::lit(1e-12),
            max_terms: 500,
        }
    }
}

impl<F: Scalar> SeriesControl<F> {
    pub fn new(rel_tol: F, max_terms: usize) -> Result<Self> {
        if !(rel_tol > F::zero()) {
            return Err(Error::domain("SeriesControl", "rel_tol must be positive"));
        }
        if max_terms == 0 {
            return Err(Error::domain(
                "SeriesControl",
                "max_terms must be at least 1",
            ));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

fn is_non_positive_integer<F: Scalar>(x: F) -> bool {
    x <= F::zero() && x == x.round()
}

/// Generalized hypergeometric series `pFq(num; den; z)`.
fn pfq<F: Scalar>(
    function: &'static str,
    num: &[F],
    den: &[F],
    z: F,
    ctl: SeriesControl<F>,
) -> Result<F> {
    if let Some(b) = den.iter().find(|b| is_non_positive_integer(**b)) {
        return Err(Error::domain(
            function,
            format!("lower parameter {b:?} is a non-positive integer"),
        ));
    }
    let mut term = F::one();
    let mut sum = F::one();
    if z == F::zero() {
        return Ok(sum);
    }
    for n in 0..ctl.max_terms {
        let nf = F::usize(n);
        let mut ratio = z / (nf + F::one());
        for &a in num {
            ratio = ratio * (a + nf);
        }
        for &b in den {
            ratio = ratio / (b + nf);
        }
        term = term * ratio;
        sum = sum + term;
        if term == F::zero() {
            // terminating series (a non-positive integer upper parameter)
            return Ok(sum);
        }
        // past the peak the terms shrink geometrically, so a small term is
        // a genuine tail estimate; before it a small term can still grow
        if ratio.abs() < F::one() && term.abs() <= ctl.rel_tol * sum.abs() {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        function,
        partial: sum.as_f64(),
        terms: ctl.max_terms,
    })
}

/// Kummer's confluent hypergeometric function `1F1(a; b; z)`.
pub fn kummer_1f1<F: Scalar>(a: F, b: F, z: F, ctl: SeriesControl<F>) -> Result<F> {
    pfq("kummer_1f1", &[a], &[b], z, ctl)
}

/// Generalized hypergeometric function `2F2(a1, a2; b1, b2; z)`.
pub fn hyp_2f2<F: Scalar>(a1: F, a2: F, b1: F, b2: F, z: F, ctl: SeriesControl<F>) -> Result<F> {
    pfq("hyp_2f2", &[a1, a2], &[b1, b2], z, ctl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl<f64> {
        SeriesControl::default()
    }

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(kummer_1f1(5.0, 1.0, 0.0, ctl()).unwrap(), 1.0);
        assert_eq!(hyp_2f2(2.0, 5.0, 3.0, 1.0, 0.0, ctl()).unwrap(), 1.0);
    }

    #[test]
    fn exponential_identities() {
        let e = std::f64::consts::E;
        assert!((kummer_1f1(1.0, 1.0, 1.0, ctl()).unwrap() - e).abs() < 1e-12);
        assert!((hyp_2f2(2.0, 5.0, 2.0, 5.0, 1.0, ctl()).unwrap() - e).abs() < 1e-12);
        let z = 7.5;
        let v = kummer_1f1(3.0, 3.0, z, ctl()).unwrap();
        assert!((v / z.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integer_order_matches_laguerre_form() {
        // 1F1(m; 1; z) = e^z L_{m-1}(-z) for integer m
        let laguerre4_neg =
            |z: f64| 1.0 + 4.0 * z + 3.0 * z * z + (2.0 / 3.0) * z.powi(3) + z.powi(4) / 24.0;
        for &z in &[0.1, 1.0, 4.0, 12.0, 30.0] {
            let v = kummer_1f1(5.0, 1.0, z, ctl()).unwrap();
            let want = z.exp() * laguerre4_neg(z);
            assert!((v / want - 1.0).abs() < 1e-11, "z={z}: {v} vs {want}");
        }
    }

    #[test]
    fn terminating_series() {
        // 1F1(-2; 1; z) = 1 - 2z + z^2/2
        let z = 3.0;
        let v = kummer_1f1(-2.0, 1.0, z, ctl()).unwrap();
        assert!((v - (1.0 - 2.0 * z + z * z / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_pole_parameters() {
        assert!(matches!(
            kummer_1f1(1.0, -2.0, 1.0, ctl()),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            hyp_2f2(1.0, 1.0, 1.0, 0.0, 1.0, ctl()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn reports_partial_value_on_non_convergence() {
        let tight = SeriesControl::new(1e-15, 5).unwrap();
        match kummer_1f1(1.0, 1.0, 20.0, tight) {
            Err(Error::NonConvergence { partial, terms, .. }) => {
                assert_eq!(terms, 5);
                assert!(partial > 1.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn control_validation() {
        assert!(SeriesControl::<f64>::new(0.0, 10).is_err());
        assert!(SeriesControl::<f64>::new(1e-9, 0).is_err());
    }

    #[test]
    fn single_precision() {
        let v = kummer_1f1(1.0f32, 1.0, 1.0, SeriesControl::new(1e-7, 100).unwrap()).unwrap();
        assert!((v - std::f32::consts::E).abs() < 1e-5);
    }

    #[test]
    fn increasing_in_z() {
        let mut prev = 0.0;
        for k in 0..200 {
            let z = k as f64 * 0.25;
            let v = kummer_1f1(2.5, 1.5, z, ctl()).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}

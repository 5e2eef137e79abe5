//! Floating point abstraction shared by the numerical kernels.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the special functions, quadrature rules and
/// closed-form channel distributions.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    fn lit(x: f64) -> Self;

    fn usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

/// Converts a decibel ratio to linear scale.
pub fn db_to_linear<F: Scalar>(db: F) -> F {
    F::lit(10.0).powf(db / F::lit(10.0))
}

pub fn linear_to_db<F: Scalar>(x: F) -> F {
    F::lit(10.0) * x.log10()
}

/// Converts dBm to watts.
pub fn dbm_to_watts<F: Scalar>(dbm: F) -> F {
    db_to_linear(dbm - F::lit(30.0))
}

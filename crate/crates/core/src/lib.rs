#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Opportunistic joint probing and scheduling for a cache-aided hybrid
//! satellite-terrestrial network.
//!
//! The numerical kernels ([`specialfn`], [`quadrature`], the closed forms in
//! [`channel`], [`rates`] and the bisection in [`solver`]) are generic over
//! the scalar type; the scenario, reward engine and simulator run in `f64`.

pub mod catalog;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod network;
pub mod policy;
pub mod quadrature;
pub mod rates;
pub mod reward;
pub mod scalar;
pub mod sim;
pub mod solver;
pub mod specialfn;
pub mod sweep;

pub use error::{Error, Result};

/// Scalar used by the scenario layer.
pub type Real = f64;
pub type FadingParams = channel::FadingParams<Real>;
pub type RateTable = rates::RateTable<Real>;
pub type TimingConstants = rates::TimingConstants<Real>;
pub type SeriesControl = specialfn::SeriesControl<Real>;
pub type GaussLegendre = quadrature::GaussLegendre<Real>;
pub type EtaSolution = solver::EtaSolution<Real>;

//! Content catalog, Zipf popularity and probabilistic cache placement.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};

/// Normalized Zipf weights `p_i = i^-zeta / sum_u u^-zeta`, `i = 1..=count`.
pub fn zipf_popularity(count: usize, zeta: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=count).map(|i| (i as f64).powf(-zeta)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    sizes: Vec<f64>,
    popularity: Vec<f64>,
    zeta: f64,
    cumulative: Vec<f64>,
}

impl Catalog {
    /// Catalog with Zipf(`zeta`) popularity over files of the given sizes (bits).
    pub fn zipf(sizes: Vec<f64>, zeta: f64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::config(
                "file_sizes_mbits",
                "catalog needs at least one file",
            ));
        }
        if let Some((i, s)) = sizes.iter().enumerate().find(|(_, s)| !(**s > 0.0)) {
            return Err(Error::config(
                "file_sizes_mbits",
                format!("file {} has non-positive size {s}", i + 1),
            ));
        }
        if !zeta.is_finite() || zeta < 0.0 {
            return Err(Error::config(
                "zipf_zeta",
                "skewness must be finite and non-negative",
            ));
        }
        let popularity = zipf_popularity(sizes.len(), zeta);
        let mut acc = 0.0;
        let cumulative = popularity
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            sizes,
            popularity,
            zeta,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `sum_i p_i b_i`.
    pub fn mean_size(&self) -> f64 {
        self.sizes
            .iter()
            .zip(&self.popularity)
            .map(|(b, p)| b * p)
            .sum()
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.len() - 1)
    }
}

/// Per-file caching probabilities at the satellite and at each terrestrial
/// station, with the capacities they are meant to fill.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheProfile {
    pub sat_probs: Vec<f64>,
    pub ts_probs: Vec<f64>,
    /// bits
    pub sat_capacity: f64,
    /// bits
    pub ts_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheSite {
    Satellite,
    Station,
}

impl fmt::Display for CacheSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CacheSite::Satellite => "satellite",
            CacheSite::Station => "terrestrial station",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheViolation {
    ProbabilityRange {
        site: CacheSite,
        file: usize,
        value: f64,
    },
    Capacity {
        site: CacheSite,
        capacity: f64,
        expected_bits: f64,
        rel_error: f64,
    },
}

impl fmt::Display for CacheViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CacheViolation::ProbabilityRange { site, file, value } => {
                write!(f, "{site} caching probability of file {file} is {value}, outside [0, 1]")
            }
            CacheViolation::Capacity { site, capacity, expected_bits, rel_error } => write!(
                f,
                "{site} expected cached bits {expected_bits} differ from capacity {capacity} (relative error {rel_error:.3e})"
            ),
        }
    }
}

/// Capacity equalities must hold to this relative error.
pub const CAPACITY_REL_TOL: f64 = 1e-9;

/// Checks range bounds and both capacity equalities; every failed
/// constraint is reported.
pub fn validate_cache_profile(
    profile: &CacheProfile,
    catalog: &Catalog,
) -> Result<std::result::Result<(), Vec<CacheViolation>>> {
    let n = catalog.len();
    if profile.sat_probs.len() != n {
        return Err(Error::config(
            "sat_cache_probs",
            format!("expected {n} entries, got {}", profile.sat_probs.len()),
        ));
    }
    if profile.ts_probs.len() != n {
        return Err(Error::config(
            "ts_cache_probs",
            format!("expected {n} entries, got {}", profile.ts_probs.len()),
        ));
    }
    let mut violations = Vec::new();
    for (site, probs, capacity) in [
        (
            CacheSite::Satellite,
            &profile.sat_probs,
            profile.sat_capacity,
        ),
        (CacheSite::Station, &profile.ts_probs, profile.ts_capacity),
    ] {
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                violations.push(CacheViolation::ProbabilityRange {
                    site,
                    file: i + 1,
                    value: p,
                });
            }
        }
        let expected: f64 = probs.iter().zip(catalog.sizes()).map(|(p, b)| p * b).sum();
        let scale = capacity.abs().max(f64::MIN_POSITIVE);
        let rel = (expected - capacity).abs() / scale;
        if !(rel <= CAPACITY_REL_TOL) {
            violations.push(CacheViolation::Capacity {
                site,
                capacity,
                expected_bits: expected,
                rel_error: rel,
            });
        }
    }
    Ok(if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    })
}

/// One file request: the file, its size in bits and the gap since the
/// previous arrival in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    /// Zero-based index into the catalog.
    pub file_index: usize,
    pub size: f64,
    pub arrival_gap: f64,
}

/// Draws the next request: a Zipf file and an exponential gap of mean `tau_s`.
pub fn sample_request<R: Rng + ?Sized>(catalog: &Catalog, tau_s: f64, rng: &mut R) -> Request {
    let exp = Exp::new(1.0 / tau_s).expect("tau_s > 0");
    let arrival_gap = exp.sample(rng);
    let file_index = catalog.draw_index(rng);
    Request {
        file_index,
        size: catalog.sizes[file_index],
        arrival_gap,
    }
}

/// Independent Bernoulli cache states `(beta_s, beta_r)` for one request.
pub fn sample_cache_states<R: Rng + ?Sized>(
    profile: &CacheProfile,
    file_index: usize,
    rng: &mut R,
) -> (bool, bool) {
    let s = rng.random::<f64>() < profile.sat_probs[file_index];
    let r = rng.random::<f64>() < profile.ts_probs[file_index];
    (s, r)
}

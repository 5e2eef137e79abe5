//! Link budgets, fading models and SNR distributions.
//!
//! Satellite links (satellite to user, satellite to terrestrial station)
//! use the shadowed-Rician land-mobile-satellite model; the terrestrial
//! station to user link is Rayleigh with unit-mean exponential power.
//!
//! The shadowed-Rician power `|h|^2` with parameters `(m, b, omega)` is a
//! negative-binomial mixture of Gamma laws: with `q = omega / (2bm + omega)`,
//! `|h|^2 ~ Gamma(n + 1, 2b)` where `n ~ NegBin(m, q)`. That mixture gives the
//! CDF and survival function as positive series, which is what the relay
//! distribution below integrates against.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{db_to_linear, Scalar};
use crate::specialfn::{hyp_2f2, kummer_1f1, SeriesControl};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Shadowed-Rician parameters: fading order `m`, half the average
/// scattered power `b`, and the average line-of-sight power `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams<F> {
    pub m: F,
    pub b: F,
    pub omega: F,
}

impl<F: Scalar> FadingParams<F> {
    pub fn new(m: F, b: F, omega: F) -> Result<Self> {
        if !(m >= F::lit(0.5)) {
            return Err(Error::domain(
                "FadingParams",
                "fading order m must be >= 0.5",
            ));
        }
        if !(b > F::zero()) {
            return Err(Error::domain(
                "FadingParams",
                "scattered power b must be positive",
            ));
        }
        if !(omega >= F::zero()) {
            return Err(Error::domain(
                "FadingParams",
                "LoS power omega must be non-negative",
            ));
        }
        Ok(Self { m, b, omega })
    }

    /// `E[|h|^2] = 2b + omega`.
    pub fn mean_power(&self) -> F {
        F::lit(2.0) * self.b + self.omega
    }

    /// `E[|h|^4] = omega^2 (1 + 1/m) + 8 b omega + 8 b^2`.
    pub fn second_moment(&self) -> F {
        let (m, b, o) = (self.m, self.b, self.omega);
        o * o * (F::one() + F::one() / m) + F::lit(8.0) * b * o + F::lit(8.0) * b * b
    }

    /// Success probability of the negative-binomial mixing law.
    pub fn los_ratio(&self) -> F {
        self.omega / (F::lit(2.0) * self.b * self.m + self.omega)
    }

    /// Mixture weights `P(n)` of the Gamma components, truncated once the
    /// remaining mass is below `1e-17`.
    pub fn mixture_weights(&self) -> Vec<F> {
        let q = self.los_ratio();
        let mut w = (F::one() - q).powf(self.m);
        let mut out = vec![w];
        let eps = F::lit(1e-17);
        for n in 0..2000 {
            let nf = F::usize(n);
            let ratio = (self.m + nf) / (nf + F::one()) * q;
            w = w * ratio;
            out.push(w);
            if ratio < F::one() && w / (F::one() - ratio) < eps {
                break;
            }
            if w == F::zero() {
                break;
            }
        }
        out
    }

    /// Survival `P(|h|^2 > x)` of the unit-scale power.
    pub fn power_survival(&self, x: F) -> F {
        survival_from_weights(&self.mixture_weights(), F::lit(2.0) * self.b, x)
    }

    /// Smallest `x` with `P(|h|^2 > x) <= p`, found by bisection.
    pub fn power_survival_quantile(&self, p: F) -> F {
        let weights = self.mixture_weights();
        let scale = F::lit(2.0) * self.b;
        let mut hi = self.mean_power();
        while survival_from_weights(&weights, scale, hi) > p {
            hi = hi * F::lit(2.0);
        }
        let mut lo = F::zero();
        for _ in 0..200 {
            let mid = (lo + hi) * F::lit(0.5);
            if survival_from_weights(&weights, scale, mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= F::lit(1e-14) * hi {
                break;
            }
        }
        hi
    }
}

/// `sum_n w_n Q(n + 1, x / scale)` with `Q` the regularized upper
/// incomplete gamma function of integer order.
fn survival_from_weights<F: Scalar>(weights: &[F], scale: F, x: F) -> F {
    if x <= F::zero() {
        return F::one();
    }
    let z = x / scale;
    let mut term = (-z).exp();
    if term == F::zero() {
        return F::zero();
    }
    let mut partial = term;
    let mut acc = F::zero();
    for (n, &w) in weights.iter().enumerate() {
        if n > 0 {
            term = term * z / F::usize(n);
            partial = partial + term;
        }
        acc = acc + w * partial;
    }
    acc.min(F::one()).max(F::zero())
}

/// Large-scale path loss as a linear power factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLoss<F> {
    /// `(c / (4 pi f_c d))^2`.
    FreeSpace { carrier_hz: F },
    /// `10^(ref_loss_db / 10) * d^(-exponent)`, anchored at 1 m.
    Terrestrial { ref_loss_db: F, exponent: F },
    /// Always 1; useful for unit link budgets.
    Unity,
}

impl<F: Scalar> PathLoss<F> {
    pub fn factor(&self, d: F) -> F {
        match *self {
            PathLoss::FreeSpace { carrier_hz } => {
                let l = F::lit(SPEED_OF_LIGHT) / (F::lit(4.0) * F::PI() * carrier_hz * d);
                l * l
            }
            PathLoss::Terrestrial {
                ref_loss_db,
                exponent,
            } => db_to_linear(ref_loss_db) * d.powf(-exponent),
            PathLoss::Unity => F::one(),
        }
    }
}

/// Transmit power, antenna gains, noise power and path-loss model of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<F> {
    pub p_tx: F,
    pub g_tx: F,
    pub g_rx: F,
    pub noise_power: F,
    pub pathloss: PathLoss<F>,
}

impl<F: Scalar> LinkBudget<F> {
    pub fn new(p_tx: F, g_tx: F, g_rx: F, noise_power: F, pathloss: PathLoss<F>) -> Result<Self> {
        for (name, v) in [
            ("p_tx", p_tx),
            ("g_tx", g_tx),
            ("g_rx", g_rx),
            ("noise_power", noise_power),
        ] {
            if !(v > F::zero()) || !v.is_finite() {
                return Err(Error::domain(
                    "LinkBudget",
                    format!("{name} must be positive"),
                ));
            }
        }
        match pathloss {
            PathLoss::FreeSpace { carrier_hz } if !(carrier_hz > F::zero()) => {
                return Err(Error::domain(
                    "LinkBudget",
                    "carrier frequency must be positive",
                ))
            }
            PathLoss::Terrestrial { exponent, .. } if !(exponent > F::zero()) => {
                return Err(Error::domain(
                    "LinkBudget",
                    "path-loss exponent must be positive",
                ))
            }
            _ => {}
        }
        Ok(Self {
            p_tx,
            g_tx,
            g_rx,
            noise_power,
            pathloss,
        })
    }
}

/// Linear average SNR `p_tx g_tx g_rx L(d) / N` at distance `d` metres.
pub fn avg_snr<F: Scalar>(link: &LinkBudget<F>, d: F) -> Result<F> {
    if !(d > F::zero()) {
        return Err(Error::domain(
            "avg_snr",
            format!("distance must be positive, got {d:?}"),
        ));
    }
    Ok(link.p_tx * link.g_tx * link.g_rx * link.pathloss.factor(d) / link.noise_power)
}

/// Power gains of the three links seen by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw<F> {
    /// Satellite to user, `|h_k|^2`.
    pub h_sq: F,
    /// Satellite to terrestrial station, `|alpha|^2`.
    pub alpha_sq: F,
    /// Terrestrial station to user, `|g|^2`.
    pub g_sq: F,
}

/// Received SNR of relayed delivery: the direct satellite term plus the
/// harmonic combination of the two relay hops.
pub fn combined_relay_snr<F: Scalar>(draw: &ChannelDraw<F>, gbar_s: F, gbar_t: F, gbar_u: F) -> F {
    gbar_s * draw.h_sq + harmonic_relay_term(gbar_t * draw.alpha_sq, gbar_u * draw.g_sq)
}

/// `x y / (x + y)`, zero when both hops are dead.
pub fn harmonic_relay_term<F: Scalar>(x: F, y: F) -> F {
    let s = x + y;
    if s > F::zero() {
        x * y / s
    } else {
        F::zero()
    }
}

/// Density of `gbar |h|^2` under the shadowed-Rician power law.
pub fn pdf_snr_direct<F: Scalar>(x: F, gbar: F, params: &FadingParams<F>) -> Result<F> {
    if x < F::zero() {
        return Ok(F::zero());
    }
    let two_b = F::lit(2.0) * params.b;
    let k = two_b * params.m + params.omega;
    let lead = (two_b * params.m / k).powf(params.m) / (two_b * gbar);
    let arg = params.omega * x / (two_b * gbar * k);
    let f11 = kummer_1f1(params.m, F::one(), arg, SeriesControl::default())?;
    Ok(lead * (-x / (two_b * gbar)).exp() * f11)
}

/// CDF of `gbar |h|^2`.
pub fn cdf_snr_direct<F: Scalar>(x: F, gbar: F, params: &FadingParams<F>) -> F {
    F::one() - params.power_survival(x / gbar)
}

/// CDF of the Rayleigh-faded terrestrial SNR with mean `gbar_u`.
pub fn cdf_snr_terrestrial<F: Scalar>(x: F, gbar_u: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    F::one() - (-x / gbar_u).exp()
}

/// Survival function of the harmonic relay term `X Y / (X + Y)`, where
/// `X = gbar_t |alpha|^2` is shadowed-Rician and `Y` is exponential.
///
/// Conditioning on `Y = y + mu u` gives
/// `P(H > y) = e^{-y/mu} E_u[ S_X(y + y^2 / (mu u)) ]` with `u ~ Exp(1)`;
/// the expectation is integrated in `v = ln u` on fixed-width panels.
#[derive(Debug, Clone)]
pub struct RelaySurvival {
    weights: Vec<f64>,
    scale: f64,
    x_tail: f64,
    rule: GaussLegendre<f64>,
}

const PANEL_WIDTH: f64 = 2.0;
const PANEL_NODES: usize = 10;
const V_MIN: f64 = -36.8;

impl RelaySurvival {
    pub fn new(params_t: &FadingParams<f64>, gbar_t: f64) -> Self {
        Self {
            weights: params_t.mixture_weights(),
            scale: 2.0 * params_t.b * gbar_t,
            x_tail: gbar_t * params_t.power_survival_quantile(1e-17),
            rule: GaussLegendre::new(PANEL_NODES),
        }
    }

    /// `P(X > x)` for the scaled satellite-to-station SNR.
    pub fn hop_survival(&self, x: f64) -> f64 {
        survival_from_weights(&self.weights, self.scale, x)
    }

    /// `P(H > y)` for terrestrial mean SNR `mu`.
    pub fn survival(&self, y: f64, mu: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let lead = y / mu;
        if lead > 745.0 {
            return 0.0;
        }
        let a = y * y / mu;
        let v_hi = 45f64.ln();
        let mut v_lo = V_MIN;
        if a > 0.0 {
            v_lo = v_lo.max((a / self.x_tail).ln());
        }
        if v_lo >= v_hi {
            return 0.0;
        }
        let panels = ((v_hi - v_lo) / PANEL_WIDTH).ceil().max(1.0) as usize;
        let width = (v_hi - v_lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = v_lo + p as f64 * width;
            for (v, w) in self.rule.mapped(lo, lo + width) {
                let ev = v.exp();
                acc += w * (v - ev).exp() * self.hop_survival(y + a / ev);
            }
        }
        ((-lead).exp() * acc).clamp(0.0, 1.0)
    }
}

/// Conditional CDF of the relayed SNR given `|h|^2 = h_sq`, evaluated
/// exactly (up to quadrature) for the harmonic combiner.
pub fn cdf_snr_relay(
    x: f64,
    gbar_s: f64,
    gbar_t: f64,
    gbar_u: f64,
    h_sq: f64,
    params_t: &FadingParams<f64>,
) -> Result<f64> {
    for (name, v) in [("gbar_s", gbar_s), ("gbar_t", gbar_t), ("gbar_u", gbar_u)] {
        if !(v > 0.0) {
            return Err(Error::domain(
                "cdf_snr_relay",
                format!("{name} must be positive"),
            ));
        }
    }
    let y = x - gbar_s * h_sq;
    if y <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - RelaySurvival::new(params_t, gbar_t).survival(y, gbar_u))
}

/// The relay CDF in its printed closed form, with the exponential factor's
/// sign corrected and the result clamped to `[0, 1]`.
///
/// Kept as a diagnostic: it does not reproduce the harmonic combiner's
/// distribution, see [`cdf_snr_relay`] for the evaluation path in use.
pub fn cdf_snr_relay_printed<F: Scalar>(
    x: F,
    gbar_s: F,
    gbar_t: F,
    gbar_u: F,
    h_sq: F,
    params_t: &FadingParams<F>,
) -> Result<F> {
    let delta = x - gbar_s * h_sq;
    if delta <= F::zero() {
        return Ok(F::zero());
    }
    let (m, b, o) = (params_t.m, params_t.b, params_t.omega);
    let two = F::lit(2.0);
    let k = two * b * m + o;
    let arg = o * o * delta / (two * gbar_t * b * k);
    let ctl = SeriesControl::default();
    let first = o * delta * (two * b * m).powf(m) / (two * b * gbar_t * k.powf(m))
        * kummer_1f1(m, two, arg, ctl)?;
    let second = o * o / (F::lit(8.0) * b * b)
        * (two * b * m / k).powf(m)
        * (delta / gbar_t).powi(2)
        * hyp_2f2(two, m, F::lit(3.0), F::one(), arg, ctl)?;
    let v = F::one() - (-delta / gbar_u).exp() * (F::one() - first + second);
    Ok(v.max(F::zero()).min(F::one()))
}

/// Exact sampler for shadowed-Rician power gains: a Gamma(m, omega/m)
/// line-of-sight power plus a complex Gaussian scattered component of
/// power `2b`.
#[derive(Debug, Clone, Copy)]
pub struct ShadowedRician {
    los: Option<Gamma<f64>>,
    sigma: f64,
}

impl ShadowedRician {
    pub fn new(params: &FadingParams<f64>) -> Self {
        let los = (params.omega > 0.0).then(|| {
            Gamma::new(params.m, params.omega / params.m).expect("validated fading params")
        });
        Self {
            los,
            sigma: params.b.sqrt(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let amp = self.los.map_or(0.0, |g| g.sample(rng).sqrt());
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let i = amp + self.sigma * re;
        let q = self.sigma * im;
        i * i + q * q
    }
}

pub fn sample_shadowed_rician<R: Rng + ?Sized>(params: &FadingParams<f64>, rng: &mut R) -> f64 {
    ShadowedRician::new(params).sample(rng)
}

/// Unit-mean exponential power gain of a Rayleigh link.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

#![allow(dead_code)]

use hstjps::channel::{combined_relay_snr, sample_rayleigh_power, ChannelDraw, ShadowedRician};
use hstjps::config::ExperimentConfig;
use hstjps::network::NetworkConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn default_env() -> NetworkConfig {
    ExperimentConfig::reference_scenario().network().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sorted Monte Carlo draws of the relayed SNR given the direct gain.
pub fn relay_snr_samples(env: &NetworkConfig, h_sq: f64, d: f64, n: usize, seed: u64) -> Vec<f64> {
    let ts = ShadowedRician::new(&env.ts_fading);
    let (gs, gt, gu) = (env.gbar_s(), env.gbar_t(), env.gbar_u(d).unwrap());
    let mut r = rng(seed);
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let draw = ChannelDraw {
                h_sq,
                alpha_sq: ts.sample(&mut r),
                g_sq: sample_rayleigh_power(&mut r),
            };
            combined_relay_snr(&draw, gs, gt, gu)
        })
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Sup-norm gap between the empirical CDF of sorted `samples` and `cdf`,
/// evaluated at every `stride`-th order statistic. Between checked points
/// both functions move by at most the reported `slack`.
pub fn ks_distance(samples: &[f64], stride: usize, mut cdf: impl FnMut(f64) -> f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    let mut slack = 0.0f64;
    let mut prev_f = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let f = cdf(samples[i]);
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        worst = worst.max((f - below).abs()).max((f - above).abs());
        slack = slack.max(f - prev_f);
        prev_f = f;
        i += stride;
    }
    slack = slack.max(stride as f64 / n);
    (worst, slack)
}

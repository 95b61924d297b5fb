//! CP-OFDM and the propagation channels.

pub mod fading;
pub mod ofdm;
pub mod profile;

pub use fading::{apply_channel, realize_tdl, ChannelRealization, SumOfSinusoids};
pub use ofdm::{ofdm_demodulate, ofdm_modulate, CpMode, Numerology, OfdmEngine};
pub use profile::{doppler_hz, ChannelModel, ChannelProfile};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Noise variance per complex sample for a CNR (dB) defined per resource
/// element of power `re_power`. Infinite CNR gives zero noise.
pub fn noise_variance(cnr_db: f64, re_power: f64) -> f64 {
    if cnr_db == f64::INFINITY {
        0.0
    } else {
        re_power / 10f64.powf(cnr_db / 10.0)
    }
}

/// Adds circularly-symmetric Gaussian noise of variance `noise_var`.
pub fn add_noise<R: Rng + ?Sized>(samples: &mut [Complex64], noise_var: f64, rng: &mut R) {
    let sigma = (noise_var / 2.0).sqrt();
    for s in samples {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *s += Complex64::new(re, im) * sigma;
    }
}

/// AWGN at `cnr_db` relative to unit-power resource elements.
pub fn apply_awgn(samples: &[Complex64], cnr_db: f64, seed: u64) -> Vec<Complex64> {
    let mut out = samples.to_vec();
    let var = noise_variance(cnr_db, 1.0);
    if var > 0.0 {
        add_noise(&mut out, var, &mut ChaCha8Rng::seed_from_u64(seed));
    }
    out
}

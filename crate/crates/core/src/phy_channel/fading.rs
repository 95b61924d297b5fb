//! Sum-of-sinusoids Rayleigh fading and the tapped delay line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::add_noise;
use super::ofdm::Numerology;
use super::profile::{ChannelModel, ChannelProfile};
use crate::{Error, Result};

/// Oscillators per quadrature component.
pub const OSCILLATORS: usize = 32;
/// Samples between evaluated fading snapshots; values in between are
/// linearly interpolated.
pub const SNAPSHOT_INTERVAL: usize = 64;

/// Zheng-Xiao sum-of-sinusoids generator with unit average power.
#[derive(Clone, Debug)]
pub struct SumOfSinusoids {
    /// Angular frequencies of the in-phase and quadrature oscillators.
    w_i: [f64; OSCILLATORS],
    w_q: [f64; OSCILLATORS],
    phase_i: [f64; OSCILLATORS],
    phase_q: [f64; OSCILLATORS],
}

impl SumOfSinusoids {
    pub fn new<R: Rng + ?Sized>(max_doppler: f64, rng: &mut R) -> Self {
        let wd = 2.0 * PI * max_doppler;
        let theta = rng.random_range(-PI..PI);
        let mut s = Self {
            w_i: [0.0; OSCILLATORS],
            w_q: [0.0; OSCILLATORS],
            phase_i: [0.0; OSCILLATORS],
            phase_q: [0.0; OSCILLATORS],
        };
        for n in 0..OSCILLATORS {
            let alpha = (2.0 * PI * (n + 1) as f64 - PI + theta) / (4 * OSCILLATORS) as f64;
            s.w_i[n] = wd * alpha.cos();
            s.w_q[n] = wd * alpha.sin();
            s.phase_i[n] = rng.random_range(-PI..PI);
            s.phase_q[n] = rng.random_range(-PI..PI);
        }
        s
    }

    fn scale() -> f64 {
        (2.0 / OSCILLATORS as f64).sqrt() * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn at(&self, t: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for n in 0..OSCILLATORS {
            re += (self.w_i[n] * t + self.phase_i[n]).cos();
            im += (self.w_q[n] * t + self.phase_q[n]).cos();
        }
        Complex64::new(re, im) * Self::scale()
    }

    /// `count` values at `t0, t0 + dt, ...`, advancing each oscillator by a
    /// constant rotation.
    pub fn series(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64> {
        let mut z_i = [Complex64::new(0.0, 0.0); OSCILLATORS];
        let mut z_q = z_i;
        let mut r_i = z_i;
        let mut r_q = z_i;
        for n in 0..OSCILLATORS {
            z_i[n] = Complex64::from_polar(1.0, self.w_i[n] * t0 + self.phase_i[n]);
            z_q[n] = Complex64::from_polar(1.0, self.w_q[n] * t0 + self.phase_q[n]);
            r_i[n] = Complex64::from_polar(1.0, self.w_i[n] * dt);
            r_q[n] = Complex64::from_polar(1.0, self.w_q[n] * dt);
        }
        let scale = Self::scale();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut re = 0.0;
            let mut im = 0.0;
            for n in 0..OSCILLATORS {
                re += z_i[n].re;
                im += z_q[n].re;
                z_i[n] *= r_i[n];
                z_q[n] *= r_q[n];
            }
            out.push(Complex64::new(re, im) * scale);
        }
        out
    }
}

/// One draw of a time-varying tapped delay line plus its noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// Tap delays in samples.
    pub delays: Vec<usize>,
    /// `snapshots[tap][s]` is the tap gain at sample `s * interval`.
    pub snapshots: Vec<Vec<Complex64>>,
    pub interval: usize,
    /// Number of samples the realization covers.
    pub len: usize,
    /// Noise variance per complex sample.
    pub noise_var: f64,
    /// Seed of the noise stream.
    pub noise_seed: u64,
}

impl ChannelRealization {
    /// Time-invariant taps `(delay, gain)`.
    pub fn static_taps(taps: &[(usize, Complex64)], len: usize) -> Self {
        Self {
            delays: taps.iter().map(|t| t.0).collect(),
            snapshots: taps.iter().map(|t| vec![t.1; 2]).collect(),
            interval: len.max(1),
            len,
            noise_var: 0.0,
            noise_seed: 0,
        }
    }

    /// Unit gain, no delay: the AWGN channel.
    pub fn identity(len: usize) -> Self {
        Self::static_taps(&[(0, Complex64::new(1.0, 0.0))], len)
    }

    pub fn with_noise(mut self, noise_var: f64, noise_seed: u64) -> Self {
        self.noise_var = noise_var;
        self.noise_seed = noise_seed;
        self
    }

    pub fn num_taps(&self) -> usize {
        self.delays.len()
    }

    /// Gain of tap `l` at sample `n`.
    pub fn tap(&self, l: usize, n: usize) -> Complex64 {
        let s = n / self.interval;
        let snaps = &self.snapshots[l];
        if s + 1 >= snaps.len() {
            return snaps[snaps.len() - 1];
        }
        let frac = (n % self.interval) as f64 / self.interval as f64;
        snaps[s] + (snaps[s + 1] - snaps[s]) * frac
    }

    /// Frequency response `sum_l h_l(n) exp(-j 2 pi b d_l / N)` at sample
    /// `n` for FFT bin `bin` of an `fft_size`-point transform.
    pub fn frequency_response(&self, n: usize, bin: usize, fft_size: usize) -> Complex64 {
        (0..self.num_taps())
            .map(|l| {
                let phase =
                    -2.0 * PI * ((bin * self.delays[l]) % fft_size) as f64 / fft_size as f64;
                self.tap(l, n) * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }
}

impl ChannelRealization {
    /// Frequency response at sample `n` on `count` consecutive FFT bins
    /// starting at `first_bin` (wrapping modulo `fft_size`).
    pub fn response_on_bins(
        &self,
        n: usize,
        first_bin: usize,
        count: usize,
        fft_size: usize,
    ) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        for l in 0..self.num_taps() {
            let d = self.delays[l];
            let step = Complex64::from_polar(1.0, -2.0 * PI * d as f64 / fft_size as f64);
            let start = -2.0 * PI * ((first_bin * d) % fft_size) as f64 / fft_size as f64;
            let mut z = self.tap(l, n) * Complex64::from_polar(1.0, start);
            for h in out.iter_mut() {
                *h += z;
                z *= step;
            }
        }
        out
    }
}

/// Draws independent Rayleigh processes for the merged taps of `profile`
/// over `len` samples.
pub fn realize_tdl(
    profile: &ChannelProfile,
    len: usize,
    num: &Numerology,
    seed: u64,
) -> Result<ChannelRealization> {
    if profile.model == ChannelModel::Awgn {
        return Err(Error::config("AWGN has no tapped-delay-line realization"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = num.sample_rate();
    let taps = profile.discrete_taps(fs);
    let count = len.div_ceil(SNAPSHOT_INTERVAL) + 1;
    let dt = SNAPSHOT_INTERVAL as f64 / fs;
    let snapshots = taps
        .iter()
        .map(|&(_, p)| {
            let g = SumOfSinusoids::new(profile.max_doppler(), &mut rng);
            g.series(0.0, dt, count)
                .into_iter()
                .map(|h| h * p.sqrt())
                .collect()
        })
        .collect();
    Ok(ChannelRealization {
        delays: taps.iter().map(|t| t.0).collect(),
        snapshots,
        interval: SNAPSHOT_INTERVAL,
        len,
        noise_var: 0.0,
        noise_seed: seed,
    })
}

/// Time-varying convolution followed by AWGN at the realization's level.
pub fn apply_channel(samples: &[Complex64], rz: &ChannelRealization) -> Result<Vec<Complex64>> {
    if samples.len() > rz.len {
        return Err(Error::config(format!(
            "channel realization covers {} samples, signal has {}",
            rz.len,
            samples.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); samples.len()];
    for l in 0..rz.num_taps() {
        let d = rz.delays[l];
        let snaps = &rz.snapshots[l];
        if snaps.iter().all(|&g| g == snaps[0]) {
            let g = snaps[0];
            for n in d..samples.len() {
                out[n] += g * samples[n - d];
            }
        } else {
            for n in d..samples.len() {
                out[n] += rz.tap(l, n) * samples[n - d];
            }
        }
    }
    if rz.noise_var > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rz.noise_seed);
        add_noise(&mut out, rz.noise_var, &mut rng);
    }
    Ok(out)
}

//! Channel estimation and MMSE equalisation.

pub mod estimation;

pub use estimation::{
    estimate_ideal, estimate_pilot_2d, ChannelEstimate, DmrsPattern, EstimationMode,
};

use num_complex::Complex64;

use crate::resource_map::qpsk_demap_per_symbol;
use crate::{Error, Result};

/// MMSE output per resource element.
#[derive(Clone, Debug, PartialEq)]
pub struct Equalized {
    /// `conj(h) y / (|h|^2 + noise + error_var)`.
    pub symbols: Vec<Complex64>,
    /// Bias `|h|^2 / (|h|^2 + noise + error_var)` of each symbol.
    pub gain: Vec<f64>,
    /// Noise variance after removing the bias; infinite in a null.
    pub noise_var: Vec<f64>,
}

impl Equalized {
    /// Exact QPSK LLRs of the de-biased symbols.
    pub fn llr(&self) -> Result<Vec<f64>> {
        let unbiased: Vec<Complex64> = self
            .symbols
            .iter()
            .zip(&self.gain)
            .map(|(&x, &g)| {
                if g > 0.0 {
                    x / g
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        // A noiseless link still needs a positive variance for the demapper.
        let var: Vec<f64> = self.noise_var.iter().map(|&v| v.max(1e-12)).collect();
        qpsk_demap_per_symbol(&unbiased, &var)
    }
}

/// Per-RE linear MMSE with the estimation error folded into the noise.
pub fn mmse_equalize(y: &[Complex64], est: &ChannelEstimate, noise_var: f64) -> Result<Equalized> {
    if y.len() != est.h_hat.len() {
        return Err(Error::format(format!(
            "{} received symbols but {} channel estimates",
            y.len(),
            est.h_hat.len()
        )));
    }
    let n = y.len();
    let mut out = Equalized {
        symbols: Vec::with_capacity(n),
        gain: Vec::with_capacity(n),
        noise_var: Vec::with_capacity(n),
    };
    for ((&y, &h), &ev) in y.iter().zip(&est.h_hat).zip(&est.error_var) {
        let p = h.norm_sqr();
        let denom = p + noise_var + ev;
        if p == 0.0 || denom == 0.0 {
            out.symbols.push(Complex64::new(0.0, 0.0));
            out.gain.push(0.0);
            out.noise_var.push(f64::INFINITY);
            continue;
        }
        out.symbols.push(h.conj() * y / denom);
        out.gain.push(p / denom);
        out.noise_var.push((noise_var + ev) / p);
    }
    Ok(out)
}

//! Gray QPSK mapping and soft demapping.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::bits::Bit;
use crate::{Error, Result};

pub fn qpsk_map(bits: &[Bit]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::format(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            Complex64::new(
                (1.0 - 2.0 * p[0] as f64) * FRAC_1_SQRT_2,
                (1.0 - 2.0 * p[1] as f64) * FRAC_1_SQRT_2,
            )
        })
        .collect())
}

/// Exact LLRs for a common noise variance per complex symbol.
pub fn qpsk_demap(symbols: &[Complex64], noise_var: f64) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) {
        return Err(Error::config(format!(
            "demapper noise variance must be positive, got {noise_var}"
        )));
    }
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var;
    Ok(symbols
        .iter()
        .flat_map(|y| [scale * y.re, scale * y.im])
        .collect())
}

/// Per-symbol variant used after equalisation. An infinite variance marks a
/// deep fade and yields zero LLRs.
pub fn qpsk_demap_per_symbol(symbols: &[Complex64], noise_var: &[f64]) -> Result<Vec<f64>> {
    if symbols.len() != noise_var.len() {
        return Err(Error::format(format!(
            "{} symbols but {} noise variances",
            symbols.len(),
            noise_var.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * symbols.len());
    for (y, &v) in symbols.iter().zip(noise_var) {
        if v.is_infinite() {
            out.extend([0.0, 0.0]);
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::config(format!(
                "demapper noise variance must be positive, got {v}"
            )));
        }
        let scale = 2.0 * std::f64::consts::SQRT_2 / v;
        out.extend([scale * y.re, scale * y.im]);
    }
    Ok(out)
}

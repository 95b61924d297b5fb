//! Hard bits and soft values as they flow between the chain stages.
//!
//! Bits are stored one per byte (`0` or `1`). Soft values are
//! log-likelihood ratios `ln(P(0)/P(1))`, so a positive LLR favours `0`.

use rand::Rng;

use crate::{Error, Result};

pub type Bit = u8;

/// Log-likelihood ratio standing in for a bit that is known to be zero.
///
/// Finite so that min-sum and path-metric arithmetic never produces NaN.
pub const KNOWN_ZERO_LLR: f64 = 1.0e9;

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Bit> {
    (0..len).map(|_| rng.random::<bool>() as Bit).collect()
}

pub fn xor(a: &[Bit], b: &[Bit]) -> Vec<Bit> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Hard decision on soft values; ties resolve to `0`.
pub fn hard_decision(llr: &[f64]) -> Vec<Bit> {
    llr.iter().map(|&l| (l < 0.0) as Bit).collect()
}

/// Noiseless antipodal soft values for a codeword: `0 -> +magnitude`.
pub fn to_llr(bits: &[Bit], magnitude: f64) -> Vec<f64> {
    bits.iter()
        .map(|&b| if b == 0 { magnitude } else { -magnitude })
        .collect()
}

pub fn count_errors(a: &[Bit], b: &[Bit]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// MSB-first bits of `value` in a field of `width` bits.
pub fn from_uint(value: u64, width: usize) -> Vec<Bit> {
    (0..width)
        .rev()
        .map(|i| ((value >> i) & 1) as Bit)
        .collect()
}

pub fn to_uint(bits: &[Bit]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// Golden-vector text form: one `'0'`/`'1'` character per bit, MSB first.
pub fn to_string(bits: &[Bit]) -> String {
    bits.iter()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

pub fn parse(text: &str) -> Result<Vec<Bit>> {
    text.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::format(format!("invalid bit character {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uint_fields_are_msb_first() {
        assert_eq!(from_uint(0b1011, 4), vec![1, 0, 1, 1]);
        assert_eq!(from_uint(1, 3), vec![0, 0, 1]);
        assert_eq!(to_uint(&[1, 1, 0, 1]), 13);
    }

    #[test]
    fn string_form_round_trips() {
        let bits = vec![0, 1, 1, 0, 1];
        assert_eq!(to_string(&bits), "01101");
        assert_eq!(parse("01101\n").unwrap(), bits);
        assert!(parse("01x").is_err());
    }

    #[test]
    fn hard_decision_follows_llr_sign() {
        assert_eq!(hard_decision(&[2.0, -0.1, 0.0]), vec![0, 1, 0]);
        assert_eq!(to_llr(&[0, 1], 3.0), vec![3.0, -3.0]);
    }
}

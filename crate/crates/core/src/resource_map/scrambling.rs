//! Length-31 Gold sequences and bit scrambling.

use crate::bits::Bit;

/// Output offset of the Gold generator.
pub const GOLD_NC: usize = 1600;

/// LTE PDCCH initializer: subframe 0, cell identity 1.
pub const LTE_SCRAMBLING_INIT: u32 = 1;
/// NR PDCCH initializer: RNTI 0x4601 in the upper half, scrambling identity 1.
pub const NR_SCRAMBLING_INIT: u32 = 0x4601_0001;
/// Base initializer of the NR PDCCH DMRS; the symbol index is added on top.
pub const NR_DMRS_INIT: u32 = 0x0002_0003;

/// First `len` bits of the Gold sequence seeded with `c_init` (31 bits).
pub fn gold_sequence(c_init: u32, len: usize) -> Vec<Bit> {
    let mut x1: u32 = 1;
    let mut x2: u32 = c_init & 0x7FFF_FFFF;
    let step = |x1: &mut u32, x2: &mut u32| {
        let f1 = (*x1 ^ (*x1 >> 3)) & 1;
        let f2 = (*x2 ^ (*x2 >> 1) ^ (*x2 >> 2) ^ (*x2 >> 3)) & 1;
        *x1 = (*x1 >> 1) | (f1 << 30);
        *x2 = (*x2 >> 1) | (f2 << 30);
    };
    for _ in 0..GOLD_NC {
        step(&mut x1, &mut x2);
    }
    (0..len)
        .map(|_| {
            let c = ((x1 ^ x2) & 1) as Bit;
            step(&mut x1, &mut x2);
            c
        })
        .collect()
}

/// XOR with the Gold sequence; applying it twice restores the input.
pub fn scramble(bits: &[Bit], seed: u32) -> Vec<Bit> {
    bits.iter()
        .zip(gold_sequence(seed, bits.len()))
        .map(|(b, c)| b ^ c)
        .collect()
}

/// Soft descrambling: flips the sign wherever the sequence bit is one.
pub fn descramble_llr(llr: &[f64], seed: u32) -> Vec<f64> {
    llr.iter()
        .zip(gold_sequence(seed, llr.len()))
        .map(|(&l, c)| if c == 1 { -l } else { l })
        .collect()
}

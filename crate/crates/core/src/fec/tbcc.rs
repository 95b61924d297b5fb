//! Rate-1/3 tail-biting convolutional code with constraint length 7.
//!
//! The encoder register is preloaded with the last six information bits so
//! that the trellis path starts and ends in the same state. Decoding uses
//! the wrap-around Viterbi algorithm: the trellis is traversed repeatedly,
//! each pass seeded with the previous pass's final metrics, and the best
//! path whose start and end states agree is returned.

use serde::{Deserialize, Serialize};

use crate::bits::Bit;
use crate::{Error, Result};

pub const CONSTRAINT_LENGTH: usize = 7;
pub const MEMORY: usize = CONSTRAINT_LENGTH - 1;
pub const NUM_STATES: usize = 1 << MEMORY;
pub const RATE_INVERSE: usize = 3;

/// Generators 133, 171, 165 (octal); bit 6 taps the current input.
pub const LTE_GENERATORS: [u8; 3] = [0o133, 0o171, 0o165];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TbccConfig {
    pub generators: [u8; 3],
    /// Passes around the circular trellis.
    pub wava_iterations: usize,
}

impl Default for TbccConfig {
    fn default() -> Self {
        Self {
            generators: LTE_GENERATORS,
            wava_iterations: 2,
        }
    }
}

/// Encoder outputs for each (state, input) pair, packed as `d0 | d1<<1 | d2<<2`.
/// State bit 5 is the most recent input, bit 0 the oldest.
fn output_table(generators: &[u8; 3]) -> [[u8; 2]; NUM_STATES] {
    let mut table = [[0u8; 2]; NUM_STATES];
    for (state, row) in table.iter_mut().enumerate() {
        for input in 0..2usize {
            let reg = (input << MEMORY) | state;
            let mut packed = 0u8;
            for (i, &g) in generators.iter().enumerate() {
                packed |= (((reg & g as usize).count_ones() & 1) as u8) << i;
            }
            row[input] = packed;
        }
    }
    table
}

fn next_state(state: usize, input: usize) -> usize {
    (input << (MEMORY - 1)) | (state >> 1)
}

/// Encodes `info`, interleaving the three generator streams per input bit.
pub fn tbcc_encode(info: &[Bit], cfg: &TbccConfig) -> Result<Vec<Bit>> {
    if info.len() < MEMORY {
        return Err(Error::format(format!(
            "tail-biting encoding needs at least {MEMORY} bits, got {}",
            info.len()
        )));
    }
    let table = output_table(&cfg.generators);
    let mut state = info[info.len() - MEMORY..].iter().fold(0usize, |acc, &b| {
        (acc >> 1) | ((b as usize) << (MEMORY - 1))
    });
    let mut out = Vec::with_capacity(RATE_INVERSE * info.len());
    for &b in info {
        let packed = table[state][b as usize];
        out.extend((0..RATE_INVERSE).map(|i| (packed >> i) & 1));
        state = next_state(state, b as usize);
    }
    Ok(out)
}

/// Wrap-around Viterbi decoding of soft values (`LLR > 0` favours `0`).
pub fn tbcc_decode(llr: &[f64], cfg: &TbccConfig) -> Result<Vec<Bit>> {
    tbcc_decode_path(llr, cfg).map(|p| p.bits)
}

/// Surviving trellis path chosen by the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct TbccPath {
    pub bits: Vec<Bit>,
    pub start_state: usize,
    pub end_state: usize,
}

impl TbccPath {
    pub fn is_closed(&self) -> bool {
        self.start_state == self.end_state
    }
}

pub fn tbcc_decode_path(llr: &[f64], cfg: &TbccConfig) -> Result<TbccPath> {
    if !llr.len().is_multiple_of(RATE_INVERSE) {
        return Err(Error::format(format!(
            "soft input length {} is not a multiple of {RATE_INVERSE}",
            llr.len()
        )));
    }
    let k = llr.len() / RATE_INVERSE;
    if k < MEMORY {
        return Err(Error::format(format!(
            "tail-biting decoding needs at least {MEMORY} trellis steps, got {k}"
        )));
    }
    let table = output_table(&cfg.generators);

    // Correlation of each of the 8 possible output triples with the received values.
    let branch: Vec<[f64; 8]> = llr
        .chunks_exact(RATE_INVERSE)
        .map(|c| {
            let mut m = [0.0; 8];
            for (packed, v) in m.iter_mut().enumerate() {
                *v = c
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| if (packed >> i) & 1 == 0 { l } else { -l })
                    .sum();
            }
            m
        })
        .collect();

    let mut metrics = [0.0f64; NUM_STATES];
    let mut decisions = vec![[0u8; NUM_STATES]; k];
    let mut best: Option<(f64, TbccPath)> = None;
    let passes = cfg.wava_iterations.max(1);

    for pass in 0..passes {
        let start_metrics = metrics;
        for (step, bm) in branch.iter().enumerate() {
            let mut next = [f64::NEG_INFINITY; NUM_STATES];
            let dec = &mut decisions[step];
            for (ns, slot) in next.iter_mut().enumerate() {
                let input = ns >> (MEMORY - 1);
                let base = (ns & ((1 << (MEMORY - 1)) - 1)) << 1;
                let s0 = base;
                let s1 = base | 1;
                let m0 = metrics[s0] + bm[table[s0][input] as usize];
                let m1 = metrics[s1] + bm[table[s1][input] as usize];
                if m1 > m0 {
                    *slot = m1;
                    dec[ns] = 1;
                } else {
                    *slot = m0;
                    dec[ns] = 0;
                }
            }
            metrics = next;
        }

        // Candidate end states by decreasing metric; the first closing path is
        // the best tail-biting path of this pass.
        let mut order: Vec<usize> = (0..NUM_STATES).collect();
        order.sort_by(|&a, &b| metrics[b].total_cmp(&metrics[a]));
        for &end in &order {
            let (start, bits) = traceback(&decisions, end);
            if start == end {
                // Path metric accumulated in this pass alone.
                let gained = metrics[end] - start_metrics[start];
                if best.as_ref().is_none_or(|(m, _)| gained > *m) {
                    let path = TbccPath {
                        bits,
                        start_state: start,
                        end_state: end,
                    };
                    best = Some((gained, path));
                }
                break;
            }
            if pass + 1 < passes {
                // Earlier passes only need to test the overall best state.
                break;
            }
        }

        let max = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for m in metrics.iter_mut() {
            *m -= max;
        }
    }

    Ok(match best {
        Some((_, path)) => path,
        None => {
            let end = (0..NUM_STATES)
                .max_by(|&a, &b| metrics[a].total_cmp(&metrics[b]))
                .unwrap_or(0);
            let (start, bits) = traceback(&decisions, end);
            TbccPath {
                bits,
                start_state: start,
                end_state: end,
            }
        }
    })
}

fn traceback(decisions: &[[u8; NUM_STATES]], end: usize) -> (usize, Vec<Bit>) {
    let mut bits = vec![0u8; decisions.len()];
    let mut state = end;
    for step in (0..decisions.len()).rev() {
        bits[step] = (state >> (MEMORY - 1)) as Bit;
        let prev = ((state & ((1 << (MEMORY - 1)) - 1)) << 1) | decisions[step][state] as usize;
        state = prev;
    }
    (state, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{random_bits, to_llr, xor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct shift-register oracle: run the register over the information
    /// bits twice and keep the second lap, which starts from the state
    /// left by the first lap.
    fn two_lap_oracle(info: &[Bit]) -> Vec<Bit> {
        let mut reg = [0u8; MEMORY];
        let mut out = Vec::new();
        for lap in 0..2 {
            for &b in info {
                let window: Vec<u8> = std::iter::once(b).chain(reg.iter().copied()).collect();
                for g in LTE_GENERATORS {
                    let mut acc = 0;
                    for (tap, &w) in window.iter().enumerate() {
                        if (g >> (MEMORY - tap)) & 1 == 1 {
                            acc ^= w;
                        }
                    }
                    if lap == 1 {
                        out.push(acc);
                    }
                }
                reg.rotate_right(1);
                reg[0] = b;
            }
        }
        out
    }

    #[test]
    fn zero_word_encodes_to_zero() {
        assert_eq!(
            tbcc_encode(&[0; 28], &TbccConfig::default()).unwrap(),
            vec![0; 84]
        );
    }

    #[test]
    fn output_is_three_times_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info = random_bits(28, &mut rng);
        assert_eq!(
            tbcc_encode(&info, &TbccConfig::default()).unwrap().len(),
            84
        );
    }

    #[test]
    fn encoder_matches_two_lap_register() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for len in [6, 8, 28, 40] {
            let info = random_bits(len, &mut rng);
            assert_eq!(
                tbcc_encode(&info, &TbccConfig::default()).unwrap(),
                two_lap_oracle(&info)
            );
        }
    }

    #[test]
    fn short_input_is_rejected() {
        assert!(tbcc_encode(&[1; 5], &TbccConfig::default()).is_err());
        assert!(tbcc_decode(&[1.0; 10], &TbccConfig::default()).is_err());
        assert!(tbcc_decode(&[1.0; 15], &TbccConfig::default()).is_err());
    }

    #[test]
    fn noiseless_zero_word_decodes() {
        let llr = vec![1.0e6; 84];
        assert_eq!(
            tbcc_decode(&llr, &TbccConfig::default()).unwrap(),
            vec![0; 28]
        );
    }

    #[test]
    fn noiseless_round_trip() {
        let cfg = TbccConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let info = random_bits(28, &mut rng);
            let coded = tbcc_encode(&info, &cfg).unwrap();
            assert_eq!(tbcc_decode(&to_llr(&coded, 1.0), &cfg).unwrap(), info);
        }
    }

    #[test]
    fn encoder_is_linear() {
        let cfg = TbccConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = random_bits(28, &mut rng);
            let b = random_bits(28, &mut rng);
            let lhs = tbcc_encode(&xor(&a, &b), &cfg).unwrap();
            let rhs = xor(
                &tbcc_encode(&a, &cfg).unwrap(),
                &tbcc_encode(&b, &cfg).unwrap(),
            );
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn winning_path_closes_on_itself() {
        let cfg = TbccConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut closed = 0;
        for _ in 0..200 {
            let info = random_bits(28, &mut rng);
            let coded = tbcc_encode(&info, &cfg).unwrap();
            let llr: Vec<f64> = coded
                .iter()
                .map(|&b| {
                    let n: f64 =
                        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                    2.0 * ((1.0 - 2.0 * b as f64) + 0.8 * n) / 0.64
                })
                .collect();
            let path = tbcc_decode_path(&llr, &cfg).unwrap();
            closed += path.is_closed() as usize;
        }
        assert_eq!(closed, 200);
    }
}

//! Rate matching between mother codewords and the `E` bits that fit the
//! aggregation level, and the soft inverse used at the receiver.

use crate::bits::{Bit, KNOWN_ZERO_LLR};
use crate::fec::polar::{PolarConfig, PolarRateMatch};
use crate::fec::tbcc::RATE_INVERSE;
use crate::{Error, Result};

/// Column permutation of the LTE convolutional-code sub-block interleaver.
const LTE_COLUMN_PERMUTATION: [usize; 32] = [
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31, 0, 16, 8, 24, 4, 20, 12, 28, 2, 18,
    10, 26, 6, 22, 14, 30,
];

/// Block permutation of the NR polar sub-block interleaver.
const NR_BLOCK_PERMUTATION: [usize; 32] = [
    0, 1, 2, 4, 3, 5, 6, 7, 8, 16, 9, 17, 10, 18, 11, 19, 12, 20, 13, 21, 14, 22, 15, 23, 24, 25,
    26, 28, 27, 29, 30, 31,
];

/// NR sub-block interleaver: output position `m` reads input `pattern[m]`.
pub fn subblock_pattern(n: usize) -> Vec<usize> {
    assert!(
        n >= 32 && n.is_multiple_of(32),
        "sub-block interleaving needs a multiple of 32"
    );
    let block = n / 32;
    (0..n)
        .map(|m| NR_BLOCK_PERMUTATION[32 * m / n] * block + m % block)
        .collect()
}

/// LTE sub-block interleaver of one stream of `d` bits. `None` marks the
/// dummy bits padded in front of the first row.
fn lte_subblock_pattern(d: usize) -> Vec<Option<usize>> {
    let rows = d.div_ceil(32);
    let dummies = rows * 32 - d;
    let mut out = Vec::with_capacity(rows * 32);
    for &col in &LTE_COLUMN_PERMUTATION {
        for r in 0..rows {
            let idx = r * 32 + col;
            out.push(idx.checked_sub(dummies));
        }
    }
    out
}

/// Precomputed mapping from transmitted positions to mother-code positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateMatchPlan {
    pub mother_len: usize,
    /// Mother-code index of every transmitted bit, in transmission order.
    pub indices: Vec<usize>,
    /// Mother-code positions that are known zeros (shortening).
    pub known_zero: Vec<usize>,
}

impl RateMatchPlan {
    /// Circular-buffer selection for the rate-1/3 convolutional code. The
    /// mother codeword interleaves the three streams per input bit.
    pub fn lte(mother_len: usize, e: usize) -> Result<Self> {
        if e == 0 {
            return Err(Error::config("rate matching needs E > 0"));
        }
        if mother_len == 0 || !mother_len.is_multiple_of(RATE_INVERSE) {
            return Err(Error::format(format!(
                "convolutional mother codeword length {mother_len} is not 3K"
            )));
        }
        let d = mother_len / RATE_INVERSE;
        let stream = lte_subblock_pattern(d);
        let buffer: Vec<usize> = (0..RATE_INVERSE)
            .flat_map(|s| stream.iter().flatten().map(move |&k| RATE_INVERSE * k + s))
            .collect();
        let indices = (0..e).map(|j| buffer[j % buffer.len()]).collect();
        Ok(Self {
            mother_len,
            indices,
            known_zero: Vec::new(),
        })
    }

    /// Sub-block interleaving and bit collection for a polar mother code of
    /// `cfg.n()` bits; channel interleaving is bypassed.
    pub fn nr(cfg: &PolarConfig, e: usize) -> Result<Self> {
        if e == 0 {
            return Err(Error::config("rate matching needs E > 0"));
        }
        let n = cfg.n();
        let pattern = subblock_pattern(n);
        let mode = nr_mode(cfg.k, e, n);
        let (indices, known_zero) = match mode {
            PolarRateMatch::Repetition => ((0..e).map(|k| pattern[k % n]).collect(), Vec::new()),
            PolarRateMatch::Puncturing => (pattern[n - e..].to_vec(), Vec::new()),
            PolarRateMatch::Shortening => (pattern[..e].to_vec(), pattern[e..].to_vec()),
        };
        Ok(Self {
            mother_len: n,
            indices,
            known_zero,
        })
    }

    pub fn e(&self) -> usize {
        self.indices.len()
    }

    pub fn apply(&self, coded: &[Bit]) -> Result<Vec<Bit>> {
        if coded.len() != self.mother_len {
            return Err(Error::format(format!(
                "rate matcher expects {} coded bits, got {}",
                self.mother_len,
                coded.len()
            )));
        }
        Ok(self.indices.iter().map(|&i| coded[i]).collect())
    }

    /// Soft inverse: repeated copies are summed, punctured positions get 0
    /// and shortened positions get a known-zero value.
    pub fn recover(&self, llr: &[f64]) -> Result<Vec<f64>> {
        if llr.len() != self.e() {
            return Err(Error::format(format!(
                "rate recovery expects {} soft values, got {}",
                self.e(),
                llr.len()
            )));
        }
        let mut out = vec![0.0; self.mother_len];
        for (&i, &l) in self.indices.iter().zip(llr) {
            out[i] += l;
        }
        for &i in &self.known_zero {
            out[i] = KNOWN_ZERO_LLR;
        }
        Ok(out)
    }

    /// Number of times each mother-code position is transmitted.
    pub fn repetition_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.mother_len];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }
}

fn nr_mode(k: usize, e: usize, n: usize) -> PolarRateMatch {
    if e >= n {
        PolarRateMatch::Repetition
    } else if 16 * k <= 7 * e {
        PolarRateMatch::Puncturing
    } else {
        PolarRateMatch::Shortening
    }
}

pub fn lte_rate_match(coded: &[Bit], e: usize) -> Result<Vec<Bit>> {
    RateMatchPlan::lte(coded.len(), e)?.apply(coded)
}

pub fn nr_rate_match(coded: &[Bit], e: usize, cfg: &PolarConfig) -> Result<Vec<Bit>> {
    RateMatchPlan::nr(cfg, e)?.apply(coded)
}

#[derive(Clone, Copy, Debug)]
pub enum RateMatchScheme<'a> {
    Lte,
    Nr(&'a PolarConfig),
}

/// Soft rate recovery onto a mother codeword of `mother_len` positions.
pub fn rate_recover(
    llr: &[f64],
    scheme: RateMatchScheme<'_>,
    mother_len: usize,
) -> Result<Vec<f64>> {
    let plan = match scheme {
        RateMatchScheme::Lte => RateMatchPlan::lte(mother_len, llr.len())?,
        RateMatchScheme::Nr(cfg) => {
            if cfg.n() != mother_len {
                return Err(Error::format(format!(
                    "polar mother length {} differs from {mother_len}",
                    cfg.n()
                )));
            }
            RateMatchPlan::nr(cfg, llr.len())?
        }
    };
    plan.recover(llr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::fec::polar::{polar_construct, polar_encode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn is_permutation(p: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        p.len() == n
            && p.iter()
                .all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn nr_subblock_patterns_are_bijections() {
        for log2 in 5..=9 {
            let n = 1 << log2;
            assert!(is_permutation(&subblock_pattern(n), n));
        }
        // N/32 = 4: blocks 0,1,2 then block 4 before block 3.
        assert_eq!(
            &subblock_pattern(128)[8..16],
            &[8, 9, 10, 11, 16, 17, 18, 19]
        );
    }

    #[test]
    fn lte_circular_buffer_covers_every_bit_once() {
        for k in [6, 20, 28, 40, 64] {
            let plan = RateMatchPlan::lte(3 * k, 3 * k).unwrap();
            assert!(is_permutation(&plan.indices, 3 * k));
        }
    }

    #[test]
    fn lte_aggregation_level_one_punctures_twelve_bits() {
        let plan = RateMatchPlan::lte(84, 72).unwrap();
        assert_eq!(plan.e(), 72);
        let counts = plan.repetition_counts();
        assert_eq!(counts.iter().filter(|&&c| c == 0).count(), 12);
        assert!(counts.iter().all(|&c| c <= 1));
    }

    #[test]
    fn lte_double_length_repeats_every_bit_twice() {
        let plan = RateMatchPlan::lte(84, 168).unwrap();
        assert!(plan.repetition_counts().iter().all(|&c| c == 2));
    }

    #[test]
    fn lte_first_stream_bits_lead_the_buffer() {
        // 28 bits per stream: 4 dummies, column 1 of row 0 holds input 1-4 = none,
        // column 17 holds 17-4 = 13.
        let plan = RateMatchPlan::lte(84, 84).unwrap();
        assert_eq!(plan.indices[0], 3 * 13);
        assert_eq!(plan.indices[1], 3 * 5);
    }

    #[test]
    fn nr_paper_geometry_punctures_two_bits() {
        let cfg = polar_construct(36, 126).unwrap();
        let plan = RateMatchPlan::nr(&cfg, 126).unwrap();
        assert_eq!(plan.e(), 126);
        let counts = plan.repetition_counts();
        assert_eq!(counts.iter().filter(|&&c| c == 0).count(), 2);
        // The punctured bits are the first two of the interleaved buffer.
        assert_eq!(counts[0], 0);
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn nr_full_length_is_the_subblock_permutation() {
        let cfg = polar_construct(36, 126).unwrap();
        let plan = RateMatchPlan::nr(&cfg, 128).unwrap();
        assert_eq!(plan.indices, subblock_pattern(128));
    }

    #[test]
    fn nr_double_length_repeats_every_bit_twice() {
        let cfg = polar_construct(36, 126).unwrap();
        let plan = RateMatchPlan::nr(&cfg, 256).unwrap();
        assert!(plan.repetition_counts().iter().all(|&c| c == 2));
    }

    #[test]
    fn shortened_positions_are_zero_in_every_codeword() {
        let cfg = polar_construct(30, 40).unwrap();
        assert_eq!(cfg.rate_match, PolarRateMatch::Shortening);
        let plan = RateMatchPlan::nr(&cfg, 40).unwrap();
        assert_eq!(plan.known_zero.len(), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let x = polar_encode(&random_bits(30, &mut rng), &cfg).unwrap();
            assert!(plan.known_zero.iter().all(|&i| x[i] == 0));
        }
    }

    #[test]
    fn recovery_without_repetition_only_permutes() {
        let plan = RateMatchPlan::lte(84, 84).unwrap();
        let llr: Vec<f64> = (0..84).map(|i| i as f64 - 40.0).collect();
        let back = plan.recover(&llr).unwrap();
        for (t, &i) in plan.indices.iter().enumerate() {
            assert_eq!(back[i], llr[t]);
        }
    }

    #[test]
    fn recovery_adds_repetitions() {
        let cfg = polar_construct(36, 126).unwrap();
        let plan = RateMatchPlan::nr(&cfg, 256).unwrap();
        let llr: Vec<f64> = (0..256).map(|i| (i % 7) as f64 - 2.5).collect();
        let back = rate_recover(&llr, RateMatchScheme::Nr(&cfg), 128).unwrap();
        for pos in 0..128 {
            let expected: f64 = plan
                .indices
                .iter()
                .zip(&llr)
                .filter(|(&i, _)| i == pos)
                .map(|(_, &l)| l)
                .sum();
            assert_eq!(back[pos], expected);
        }
    }

    #[test]
    fn punctured_positions_recover_as_erasures_and_shortened_as_known() {
        let cfg = polar_construct(36, 126).unwrap();
        let back = rate_recover(&[1.0; 126], RateMatchScheme::Nr(&cfg), 128).unwrap();
        assert_eq!(back[0], 0.0);
        assert_eq!(back[1], 0.0);
        let short = polar_construct(30, 40).unwrap();
        let plan = RateMatchPlan::nr(&short, 40).unwrap();
        let back = plan.recover(&[1.0; 40]).unwrap();
        assert!(plan.known_zero.iter().all(|&i| back[i] == KNOWN_ZERO_LLR));
    }

    #[test]
    fn invalid_lengths() {
        assert!(matches!(lte_rate_match(&[0; 84], 0), Err(Error::Config(_))));
        assert!(RateMatchPlan::lte(85, 72).is_err());
        assert!(RateMatchPlan::lte(84, 72)
            .unwrap()
            .recover(&[0.0; 71])
            .is_err());
    }

    mod props {
        use super::*;
        use crate::bits::{hard_decision, to_llr};
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn recovered_signs_match_transmitted_bits(
                k in 6usize..48,
                e in 1usize..600,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coded = random_bits(3 * k, &mut rng);
                let plan = RateMatchPlan::lte(3 * k, e).unwrap();
                let tx = plan.apply(&coded).unwrap();
                let back = plan.recover(&to_llr(&tx, 1.0)).unwrap();
                let counts = plan.repetition_counts();
                let hard = hard_decision(&back);
                for i in 0..3 * k {
                    if counts[i] > 0 {
                        prop_assert_eq!(hard[i], coded[i]);
                        prop_assert_eq!(back[i].abs(), counts[i] as f64);
                    }
                }
            }
        }
    }
}

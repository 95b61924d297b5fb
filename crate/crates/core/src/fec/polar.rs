//! NR polar code: construction, encoding and CRC-aided successive
//! cancellation list decoding.

use serde::{Deserialize, Serialize};

use super::reliability::RELIABILITY_1024;
use crate::bits::Bit;
use crate::dci::{crc_check, CrcConfig};
use crate::rate_match::subblock_pattern;
use crate::{Error, Result};

pub const MIN_LOG2_N: u32 = 5;
/// Downlink mother code length limit.
pub const MAX_LOG2_N: u32 = 9;
/// Largest rate-matched length accepted by [`polar_construct`].
pub const MAX_E: usize = 8192;
pub const DEFAULT_LIST_SIZE: usize = 8;

/// How the mother codeword is fitted to `E` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarRateMatch {
    /// `E >= N`: the circular buffer wraps around.
    Repetition,
    /// The first `N - E` interleaved bits are not transmitted.
    Puncturing,
    /// The last `N - E` interleaved bits are known zeros and not transmitted.
    Shortening,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarConfig {
    pub log2_n: u32,
    pub k: usize,
    pub e: usize,
    /// Information positions in increasing order.
    pub info_set: Vec<usize>,
    /// `frozen[i]` is true for frozen positions; `frozen.len() == N`.
    pub frozen: Vec<bool>,
    pub rate_match: PolarRateMatch,
    pub list_size: usize,
}

impl PolarConfig {
    pub fn n(&self) -> usize {
        1 << self.log2_n
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.frozen[i]).collect()
    }

    pub fn with_list_size(mut self, list_size: usize) -> Self {
        self.list_size = list_size.max(1);
        self
    }

    /// Configuration with an explicit information set and no rate matching
    /// (`E = N`).
    pub fn from_info_set(log2_n: u32, info_set: Vec<usize>, list_size: usize) -> Result<Self> {
        let n = 1usize << log2_n;
        let mut frozen = vec![true; n];
        let mut sorted = info_set;
        sorted.sort_unstable();
        sorted.dedup();
        for &i in &sorted {
            if i >= n {
                return Err(Error::config(format!(
                    "information index {i} outside [0, {n})"
                )));
            }
            frozen[i] = false;
        }
        Ok(Self {
            log2_n,
            k: sorted.len(),
            e: n,
            info_set: sorted,
            frozen,
            rate_match: PolarRateMatch::Repetition,
            list_size: list_size.max(1),
        })
    }
}

fn ceil_log2(x: usize) -> u32 {
    usize::BITS - (x - 1).leading_zeros()
}

/// Mother code length selection for downlink control.
pub fn select_log2_n(k: usize, e: usize) -> u32 {
    let ce = ceil_log2(e);
    // E <= (9/8) 2^(ceil(log2 E) - 1)  and  K/E < 9/16
    let n1 = if 8 * e <= 9 * (1usize << (ce - 1)) && 16 * k < 9 * e {
        ce - 1
    } else {
        ce
    };
    // Lowest rate 1/8.
    let n2 = ceil_log2(8 * k);
    n1.min(n2).clamp(MIN_LOG2_N, MAX_LOG2_N)
}

/// Builds the code for `k` information bits (CRC included) sent in `e` bits.
pub fn polar_construct(k: usize, e: usize) -> Result<PolarConfig> {
    if k == 0 || k >= e {
        return Err(Error::config(format!(
            "polar code needs 0 < K < E, got K = {k}, E = {e}"
        )));
    }
    if e > MAX_E {
        return Err(Error::Unsupported(format!("E = {e} exceeds {MAX_E}")));
    }
    let log2_n = select_log2_n(k, e);
    let n = 1usize << log2_n;
    if k > n {
        return Err(Error::Unsupported(format!(
            "K = {k} does not fit a mother code of at most {n} bits"
        )));
    }

    let mut frozen = vec![false; n];
    let rate_match = if e >= n {
        PolarRateMatch::Repetition
    } else {
        let pattern = subblock_pattern(n);
        let u = n - e;
        // K/E <= 7/16
        if 16 * k <= 7 * e {
            for &j in &pattern[..u] {
                frozen[j] = true;
            }
            let t = if 4 * e >= 3 * n {
                // ceil(3N/4 - E/2)
                (3 * n - 2 * e).div_ceil(4)
            } else {
                // ceil(9N/16 - E/4)
                (9 * n).saturating_sub(4 * e).div_ceil(16)
            };
            for f in frozen.iter_mut().take(t) {
                *f = true;
            }
            PolarRateMatch::Puncturing
        } else {
            for &j in &pattern[e..] {
                frozen[j] = true;
            }
            PolarRateMatch::Shortening
        }
    };

    let available = frozen.iter().filter(|f| !**f).count();
    if available < k {
        return Err(Error::config(format!(
            "only {available} unfrozen positions remain for K = {k}"
        )));
    }
    let mut info_set: Vec<usize> = RELIABILITY_1024
        .iter()
        .rev()
        .map(|&q| q as usize)
        .filter(|&q| q < n && !frozen[q])
        .take(k)
        .collect();
    info_set.sort_unstable();
    frozen.iter_mut().for_each(|f| *f = true);
    for &i in &info_set {
        frozen[i] = false;
    }

    Ok(PolarConfig {
        log2_n,
        k,
        e,
        info_set,
        frozen,
        rate_match,
        list_size: DEFAULT_LIST_SIZE,
    })
}

/// In-place `x = u F^{(x)n}` over GF(2), `F = [[1,0],[1,1]]`. Self-inverse.
pub fn polar_transform(bits: &mut [Bit]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

pub fn polar_encode(info: &[Bit], cfg: &PolarConfig) -> Result<Vec<Bit>> {
    if info.len() != cfg.k {
        return Err(Error::format(format!(
            "polar encoder expects {} bits, got {}",
            cfg.k,
            info.len()
        )));
    }
    let mut u = vec![0u8; cfg.n()];
    for (&pos, &b) in cfg.info_set.iter().zip(info) {
        u[pos] = b;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// Output of the list decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarDecoded {
    /// The `K` information bits of the selected path.
    pub bits: Vec<Bit>,
    /// Whether the selected path passed the CRC. Always true when decoding
    /// without CRC.
    pub crc_pass: bool,
}

/// CRC-aided successive cancellation list decoding of `N` soft values.
pub fn polar_decode(
    llr: &[f64],
    cfg: &PolarConfig,
    crc: Option<&CrcConfig>,
) -> Result<PolarDecoded> {
    let n = cfg.n();
    if llr.len() != n {
        return Err(Error::format(format!(
            "polar decoder expects {n} soft values, got {}",
            llr.len()
        )));
    }
    let mut dec = ListDecoder::new(llr, cfg);
    dec.node(0, 0);

    let mut order: Vec<usize> = (0..dec.paths.len()).collect();
    order.sort_by(|&a, &b| dec.paths[a].metric.total_cmp(&dec.paths[b].metric));
    let info_of = |p: &Path| -> Vec<Bit> { cfg.info_set.iter().map(|&i| p.u[i]).collect() };

    if let Some(crc) = crc {
        for &idx in &order {
            let bits = info_of(&dec.paths[idx]);
            if crc_check(&bits, crc)?.is_pass() {
                return Ok(PolarDecoded {
                    bits,
                    crc_pass: true,
                });
            }
        }
        Ok(PolarDecoded {
            bits: info_of(&dec.paths[order[0]]),
            crc_pass: false,
        })
    } else {
        Ok(PolarDecoded {
            bits: info_of(&dec.paths[order[0]]),
            crc_pass: true,
        })
    }
}

#[derive(Clone)]
struct Path {
    /// Soft values per tree depth; depth `d` lives at `offset(d)..offset(d) + N/2^d`.
    alpha: Vec<f64>,
    /// Partial sums with the same layout.
    beta: Vec<Bit>,
    u: Vec<Bit>,
    metric: f64,
}

struct ListDecoder<'a> {
    channel: &'a [f64],
    frozen: &'a [bool],
    /// `rate0[depth][node]`: every leaf below the node is frozen.
    rate0: Vec<Vec<bool>>,
    n: usize,
    list_size: usize,
    paths: Vec<Path>,
}

#[inline]
fn min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

impl<'a> ListDecoder<'a> {
    fn new(channel: &'a [f64], cfg: &'a PolarConfig) -> Self {
        let n = cfg.n();
        let depth = cfg.log2_n as usize;
        let mut rate0 = vec![Vec::new(); depth + 1];
        rate0[depth] = cfg.frozen.clone();
        for d in (0..depth).rev() {
            rate0[d] = rate0[d + 1].chunks_exact(2).map(|c| c[0] && c[1]).collect();
        }
        let root = Path {
            alpha: vec![0.0; 2 * n],
            beta: vec![0; 2 * n],
            u: vec![0; n],
            metric: 0.0,
        };
        Self {
            channel,
            frozen: &cfg.frozen,
            rate0,
            n,
            list_size: cfg.list_size.max(1),
            paths: vec![root],
        }
    }

    fn offset(&self, depth: usize) -> usize {
        2 * self.n - 2 * (self.n >> depth)
    }

    fn node(&mut self, depth: usize, leaf: usize) {
        let len = self.n >> depth;
        let off = self.offset(depth);
        if self.rate0[depth][leaf / len] {
            for p in &mut self.paths {
                let alpha: &[f64] = if depth == 0 {
                    self.channel
                } else {
                    &p.alpha[off..off + len]
                };
                p.metric += alpha.iter().map(|&a| (-a).max(0.0)).sum::<f64>();
                p.beta[off..off + len].fill(0);
            }
            return;
        }
        if len == 1 {
            self.leaf(depth, leaf);
            return;
        }
        let half = len / 2;
        let child = self.offset(depth + 1);

        for p in &mut self.paths {
            let (parent, rest) = p.alpha.split_at_mut(child);
            let parent: &[f64] = if depth == 0 {
                self.channel
            } else {
                &parent[off..off + len]
            };
            for i in 0..half {
                rest[i] = min_sum(parent[i], parent[i + half]);
            }
        }
        self.node(depth + 1, leaf);
        for p in &mut self.paths {
            p.beta.copy_within(child..child + half, off);
            let (parent, rest) = p.alpha.split_at_mut(child);
            let parent: &[f64] = if depth == 0 {
                self.channel
            } else {
                &parent[off..off + len]
            };
            for i in 0..half {
                let a = parent[i];
                let b = parent[i + half];
                rest[i] = if p.beta[off + i] == 0 { b + a } else { b - a };
            }
        }
        self.node(depth + 1, leaf + half);
        for p in &mut self.paths {
            for i in 0..half {
                let right = p.beta[child + i];
                p.beta[off + i] ^= right;
                p.beta[off + half + i] = right;
            }
        }
    }

    fn leaf(&mut self, depth: usize, index: usize) {
        let off = self.offset(depth);
        let n = self.n;
        let value = |p: &Path, channel: &[f64]| if n == 1 { channel[0] } else { p.alpha[off] };

        if self.frozen[index] {
            for p in &mut self.paths {
                let a = value(p, self.channel);
                p.metric += (-a).max(0.0);
                p.beta[off] = 0;
                p.u[index] = 0;
            }
            return;
        }

        // (metric, path, bit) for both continuations of every path.
        let mut candidates: Vec<(f64, usize, Bit)> = Vec::with_capacity(2 * self.paths.len());
        for (i, p) in self.paths.iter().enumerate() {
            let a = value(p, self.channel);
            candidates.push((p.metric + (-a).max(0.0), i, 0));
            candidates.push((p.metric + a.max(0.0), i, 1));
        }
        if candidates.len() > self.list_size {
            candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
            candidates.truncate(self.list_size);
        }

        let mut uses = vec![0usize; self.paths.len()];
        for &(_, i, _) in &candidates {
            uses[i] += 1;
        }
        let mut old: Vec<Option<Path>> = std::mem::take(&mut self.paths)
            .into_iter()
            .map(Some)
            .collect();
        let mut next = Vec::with_capacity(candidates.len());
        for (metric, i, bit) in candidates {
            uses[i] -= 1;
            let mut p = if uses[i] == 0 {
                old[i].take().expect("path consumed twice")
            } else {
                old[i].clone().expect("path consumed twice")
            };
            p.metric = metric;
            p.beta[off] = bit;
            p.u[index] = bit;
            next.push(p);
        }
        self.paths = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{random_bits, to_llr, xor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noisy_llr<R: Rng>(code: &[Bit], sigma: f64, rng: &mut R) -> Vec<f64> {
        code.iter()
            .map(|&b| {
                let n: f64 = StandardNormal.sample(rng);
                2.0 * ((1.0 - 2.0 * b as f64) + sigma * n) / (sigma * sigma)
            })
            .collect()
    }

    /// Textbook recursive successive cancellation: returns (u, x) of a node.
    fn sc_reference(llr: &[f64], frozen: &[bool]) -> (Vec<Bit>, Vec<Bit>) {
        if llr.len() == 1 {
            let u = if frozen[0] { 0 } else { (llr[0] < 0.0) as Bit };
            return (vec![u], vec![u]);
        }
        let half = llr.len() / 2;
        let a: Vec<f64> = (0..half).map(|i| min_sum(llr[i], llr[i + half])).collect();
        let (u1, x1) = sc_reference(&a, &frozen[..half]);
        let b: Vec<f64> = (0..half)
            .map(|i| llr[i + half] + if x1[i] == 0 { llr[i] } else { -llr[i] })
            .collect();
        let (u2, x2) = sc_reference(&b, &frozen[half..]);
        let mut x = xor(&x1, &x2);
        x.extend_from_slice(&x2);
        let mut u = u1;
        u.extend(u2);
        (u, x)
    }

    #[test]
    fn length_selection_matches_examples() {
        let cfg = polar_construct(36, 126).unwrap();
        assert_eq!(cfg.n(), 128);
        assert_eq!(cfg.frozen_set().len(), 92);
        assert_eq!(cfg.rate_match, PolarRateMatch::Puncturing);
        assert_eq!(polar_construct(36, 252).unwrap().n(), 256);
        assert_eq!(polar_construct(36, 504).unwrap().n(), 512);
        let al8 = polar_construct(36, 1008).unwrap();
        assert_eq!(al8.n(), 512);
        assert_eq!(al8.rate_match, PolarRateMatch::Repetition);
        assert_eq!(polar_construct(36, 108).unwrap().n(), 128);
    }

    #[test]
    fn short_codes_respect_the_lower_bound() {
        assert_eq!(polar_construct(8, 24).unwrap().n(), 32);
        // Rate close to one selects shortening.
        let cfg = polar_construct(30, 40).unwrap();
        assert_eq!(cfg.n(), 64);
        assert_eq!(cfg.rate_match, PolarRateMatch::Shortening);
    }

    #[test]
    fn information_and_frozen_sets_partition_positions() {
        for (k, e) in [
            (36, 126),
            (36, 252),
            (36, 504),
            (36, 1008),
            (30, 40),
            (8, 32),
        ] {
            let cfg = polar_construct(k, e).unwrap();
            assert_eq!(cfg.info_set.len(), k);
            assert_eq!(cfg.frozen_set().len(), cfg.n() - k);
            for &i in &cfg.info_set {
                assert!(!cfg.frozen[i]);
            }
        }
    }

    #[test]
    fn punctured_and_prefrozen_positions_carry_no_information() {
        let cfg = polar_construct(36, 126).unwrap();
        // ceil(3*128/4 - 126/2) = 33 leading positions are frozen.
        assert!(cfg.frozen[..33].iter().all(|&f| f));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(polar_construct(40, 40), Err(Error::Config(_))));
        assert!(matches!(
            polar_construct(36, 9000),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_info_encodes_to_zero() {
        let cfg = polar_construct(36, 126).unwrap();
        assert_eq!(polar_encode(&[0; 36], &cfg).unwrap(), vec![0; 128]);
        assert!(polar_encode(&[0; 35], &cfg).is_err());
    }

    #[test]
    fn two_point_kernel() {
        let mut u = vec![0, 1];
        polar_transform(&mut u);
        assert_eq!(u, vec![1, 1]);
    }

    #[test]
    fn transform_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for log2 in 1..=9 {
            let u = random_bits(1 << log2, &mut rng);
            let mut x = u.clone();
            polar_transform(&mut x);
            polar_transform(&mut x);
            assert_eq!(x, u);
        }
    }

    #[test]
    fn encoder_is_linear() {
        let cfg = polar_construct(36, 252).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let a = random_bits(36, &mut rng);
            let b = random_bits(36, &mut rng);
            assert_eq!(
                polar_encode(&xor(&a, &b), &cfg).unwrap(),
                xor(
                    &polar_encode(&a, &cfg).unwrap(),
                    &polar_encode(&b, &cfg).unwrap()
                )
            );
        }
    }

    #[test]
    fn noiseless_decoding_recovers_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (k, e) in [(36, 126), (36, 252), (36, 504), (8, 32)] {
            let cfg = polar_construct(k, e).unwrap();
            for _ in 0..20 {
                let info = random_bits(k, &mut rng);
                let x = polar_encode(&info, &cfg).unwrap();
                let out = polar_decode(&to_llr(&x, 4.0), &cfg, None).unwrap();
                assert_eq!(out.bits, info);
            }
        }
    }

    #[test]
    fn list_of_one_is_successive_cancellation() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for (k, e) in [(36, 126), (36, 252), (20, 64)] {
            let cfg = polar_construct(k, e).unwrap().with_list_size(1);
            for _ in 0..100 {
                let x = polar_encode(&random_bits(k, &mut rng), &cfg).unwrap();
                let llr = noisy_llr(&x, 0.9, &mut rng);
                let (u, _) = sc_reference(&llr, &cfg.frozen);
                let expected: Vec<Bit> = cfg.info_set.iter().map(|&i| u[i]).collect();
                assert_eq!(polar_decode(&llr, &cfg, None).unwrap().bits, expected);
            }
        }
    }

    #[test]
    fn crc_selects_a_passing_path() {
        let crc = CrcConfig::nr(Some(0x4601));
        let cfg = polar_construct(36, 126).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let word = crate::dci::crc_attach(&random_bits(12, &mut rng), &crc);
            let x = polar_encode(&word, &cfg).unwrap();
            let out = polar_decode(&noisy_llr(&x, 0.7, &mut rng), &cfg, Some(&crc)).unwrap();
            if out.crc_pass {
                assert!(crc_check(&out.bits, &crc).unwrap().is_pass());
            }
        }
    }
}

//! The PDCCH transmit chain and its receiver, end to end.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::{count_errors, hard_decision, random_bits, xor, Bit};
use crate::dci::{
    build_dci, crc_attach, crc_check, payload_len, Bandwidth, CrcConfig, DciFormat,
    LTE_1C_NOTIFICATION_BITS, M_RNTI, NR_DEFAULT_RNTI,
};
use crate::fec::polar::DEFAULT_LIST_SIZE;
use crate::fec::{polar_construct, polar_decode, polar_encode, tbcc_decode, tbcc_encode};
use crate::fec::{PolarConfig, TbccConfig};
use crate::phy_channel::{ChannelProfile, ChannelRealization, Numerology, OfdmEngine};
use crate::rate_match::RateMatchPlan;
use crate::receiver::{
    estimate_ideal, estimate_pilot_2d, mmse_equalize, DmrsPattern, EstimationMode,
};
use crate::resource_map::scrambling::{LTE_SCRAMBLING_INIT, NR_SCRAMBLING_INIT};
use crate::resource_map::{
    extract, gold_sequence, map_with_layout, qpsk_map, CoresetConfig, DmrsMode, GridLayout,
};
use crate::{Error, Result, Standard};

/// Link parameters shared by transmitter and receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub standard: Standard,
    pub aggregation_level: usize,
    pub bandwidth: Bandwidth,
    /// DCI payload length before the CRC.
    pub dci_bits: usize,
    /// RNTI masking the CRC; `None` picks the standard's default.
    pub rnti: Option<u16>,
    pub rnti_masking: bool,
    pub dmrs_mode: DmrsMode,
    pub estimation: EstimationMode,
    pub list_size: usize,
    pub wava_iterations: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            standard: Standard::Nr,
            aggregation_level: 1,
            bandwidth: Bandwidth::Mhz5,
            dci_bits: 12,
            rnti: None,
            rnti_masking: true,
            dmrs_mode: DmrsMode::Literal,
            estimation: EstimationMode::Ideal,
            list_size: DEFAULT_LIST_SIZE,
            wava_iterations: TbccConfig::default().wava_iterations,
        }
    }
}

impl ChainConfig {
    pub fn new(standard: Standard, aggregation_level: usize) -> Self {
        Self {
            standard,
            aggregation_level,
            ..Self::default()
        }
    }

    pub fn rnti(&self) -> u16 {
        self.rnti.unwrap_or(match self.standard {
            Standard::Lte => M_RNTI,
            Standard::Nr => NR_DEFAULT_RNTI,
        })
    }
}

#[derive(Clone, Debug)]
enum Code {
    Tbcc(TbccConfig),
    Polar(PolarConfig),
}

/// A chain with all tables precomputed; cheap to share between threads.
#[derive(Clone, Debug)]
pub struct Chain {
    pub cfg: ChainConfig,
    pub coreset: CoresetConfig,
    pub layout: GridLayout,
    pub numerology: Numerology,
    crc: CrcConfig,
    code: Code,
    plan: RateMatchPlan,
    engine: OfdmEngine,
    /// Scrambling sequence over the `E` rate-matched bits.
    scrambling: Vec<Bit>,
}

/// What the transmitter produced, kept as the reference for error counting.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    pub payload: Vec<Bit>,
    /// Rate-matched bits before scrambling.
    pub rate_matched: Vec<Bit>,
    pub samples: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reception {
    pub payload: Vec<Bit>,
    pub crc_pass: bool,
    /// Hard-decision errors on the rate-matched bits.
    pub pre_decoder_errors: usize,
    /// Errors on the decoded payload bits.
    pub bit_errors: usize,
}

impl Chain {
    pub fn new(cfg: ChainConfig) -> Result<Self> {
        let coreset = CoresetConfig::new(cfg.standard, cfg.aggregation_level, cfg.bandwidth)?
            .with_dmrs_mode(cfg.dmrs_mode);
        let layout = coreset.layout();
        let e = coreset.e_bits();
        let mask = cfg.rnti_masking.then(|| cfg.rnti());
        let (crc, code, plan) = match cfg.standard {
            Standard::Lte => {
                let expected =
                    payload_len(DciFormat::Lte1C, cfg.bandwidth, LTE_1C_NOTIFICATION_BITS);
                if cfg.dci_bits != expected {
                    return Err(Error::config(format!(
                        "format 1C at {} MHz carries {expected} bits, not {}",
                        cfg.bandwidth.mhz(),
                        cfg.dci_bits
                    )));
                }
                let crc = CrcConfig::lte(mask);
                let k = cfg.dci_bits + crc.len();
                let tbcc = TbccConfig {
                    wava_iterations: cfg.wava_iterations,
                    ..TbccConfig::default()
                };
                let plan = RateMatchPlan::lte(3 * k, e)?;
                (crc, Code::Tbcc(tbcc), plan)
            }
            Standard::Nr => {
                if cfg.dci_bits < crate::dci::NR_MIN_DCI_BITS {
                    return Err(Error::config(format!(
                        "NR DCI needs at least {} bits, got {}",
                        crate::dci::NR_MIN_DCI_BITS,
                        cfg.dci_bits
                    )));
                }
                let crc = CrcConfig::nr(mask);
                let polar =
                    polar_construct(cfg.dci_bits + crc.len(), e)?.with_list_size(cfg.list_size);
                let plan = RateMatchPlan::nr(&polar, e)?;
                (crc, Code::Polar(polar), plan)
            }
        };
        if cfg.estimation == EstimationMode::Pilot {
            DmrsPattern::from_layout(&layout)?;
        }
        let numerology = Numerology::new(cfg.standard, cfg.bandwidth);
        let scrambling_init = match cfg.standard {
            Standard::Lte => LTE_SCRAMBLING_INIT,
            Standard::Nr => NR_SCRAMBLING_INIT,
        };
        Ok(Self {
            scrambling: gold_sequence(scrambling_init, plan.e()),
            engine: OfdmEngine::new(numerology),
            cfg,
            coreset,
            layout,
            numerology,
            crc,
            code,
            plan,
        })
    }

    /// Samples occupied by the control region.
    pub fn num_samples(&self) -> usize {
        self.numerology.samples_for(self.coreset.coreset_symbols)
    }

    pub fn e_bits(&self) -> usize {
        self.plan.e()
    }

    /// Fails if the pilot grid cannot sample `profile` (pilot mode only).
    pub fn check_channel(&self, profile: &ChannelProfile) -> Result<()> {
        if self.cfg.estimation == EstimationMode::Pilot {
            DmrsPattern::from_layout(&self.layout)?.check_feasible(profile, &self.numerology)?;
        }
        Ok(())
    }

    /// A fresh payload for this chain's DCI format.
    pub fn random_payload<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Bit>> {
        let msg = match self.cfg.standard {
            Standard::Lte => build_dci(
                DciFormat::Lte1C,
                self.cfg.bandwidth,
                &random_bits(LTE_1C_NOTIFICATION_BITS, rng),
                self.cfg.rnti(),
            )?,
            Standard::Nr => build_dci(
                DciFormat::Nr1_0,
                self.cfg.bandwidth,
                &random_bits(self.cfg.dci_bits, rng),
                self.cfg.rnti(),
            )?,
        };
        Ok(msg.payload)
    }

    /// Mother codeword of a payload.
    pub fn encode(&self, payload: &[Bit]) -> Result<Vec<Bit>> {
        if payload.len() != self.cfg.dci_bits {
            return Err(Error::format(format!(
                "payload has {} bits, chain expects {}",
                payload.len(),
                self.cfg.dci_bits
            )));
        }
        let with_crc = crc_attach(payload, &self.crc);
        match &self.code {
            Code::Tbcc(c) => tbcc_encode(&with_crc, c),
            Code::Polar(c) => polar_encode(&with_crc, c),
        }
    }

    pub fn transmit(&self, payload: &[Bit]) -> Result<Transmission> {
        let rate_matched = self.plan.apply(&self.encode(payload)?)?;
        let symbols = qpsk_map(&xor(&rate_matched, &self.scrambling))?;
        let grid = map_with_layout(&symbols, self.cfg.standard, &self.layout)?;
        Ok(Transmission {
            payload: payload.to_vec(),
            rate_matched,
            samples: self.engine.modulate(&grid)?,
        })
    }

    /// Soft values of the rate-matched bits after equalisation and descrambling.
    pub fn demodulate(&self, samples: &[Complex64], rz: &ChannelRealization) -> Result<Vec<f64>> {
        let grid = self.engine.demodulate(
            samples,
            self.cfg.standard,
            self.layout.num_subcarriers,
            self.layout.num_symbols,
        )?;
        let est = match self.cfg.estimation {
            EstimationMode::Ideal => estimate_ideal(
                rz,
                &self.numerology,
                self.layout.num_subcarriers,
                &self.layout.control,
            ),
            EstimationMode::Pilot => {
                estimate_pilot_2d(&grid, &self.layout, &self.layout.control, rz.noise_var)?
            }
        };
        let y = extract(&grid, &self.layout.control);
        let llr = mmse_equalize(&y, &est, rz.noise_var)?.llr()?;
        Ok(llr
            .iter()
            .zip(&self.scrambling)
            .map(|(&l, &c)| if c == 1 { -l } else { l })
            .collect())
    }

    /// Decodes rate-matched soft values; returns the payload and CRC verdict.
    pub fn decode(&self, llr: &[f64]) -> Result<(Vec<Bit>, bool)> {
        let mother = self.plan.recover(llr)?;
        let (bits, crc_pass) = match &self.code {
            Code::Tbcc(c) => {
                let bits = tbcc_decode(&mother, c)?;
                let pass = crc_check(&bits, &self.crc)?.is_pass();
                (bits, pass)
            }
            Code::Polar(c) => {
                let d = polar_decode(&mother, c, Some(&self.crc))?;
                (d.bits, d.crc_pass)
            }
        };
        Ok((bits[..self.cfg.dci_bits].to_vec(), crc_pass))
    }

    /// Full receiver against the transmitted reference.
    pub fn receive_and_decode(
        &self,
        samples: &[Complex64],
        rz: &ChannelRealization,
        reference: &Transmission,
    ) -> Result<Reception> {
        let llr = self.demodulate(samples, rz)?;
        let pre_decoder_errors = count_errors(&hard_decision(&llr), &reference.rate_matched);
        let (payload, crc_pass) = self.decode(&llr)?;
        let bit_errors = count_errors(&payload, &reference.payload);
        Ok(Reception {
            payload,
            crc_pass,
            pre_decoder_errors,
            bit_errors,
        })
    }
}

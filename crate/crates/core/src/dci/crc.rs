use serde::{Deserialize, Serialize};

use crate::bits::Bit;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrcPolynomial {
    /// x^16 + x^12 + x^5 + 1
    Crc16Lte,
    /// x^24 + x^23 + x^21 + x^20 + x^17 + x^15 + x^13 + x^12 + x^8 + x^4 + x^2 + x + 1
    Crc24cNr,
}

impl CrcPolynomial {
    pub fn len(self) -> usize {
        match self {
            CrcPolynomial::Crc16Lte => 16,
            CrcPolynomial::Crc24cNr => 24,
        }
    }

    /// Generator without the leading x^L term.
    pub fn generator(self) -> u32 {
        match self {
            CrcPolynomial::Crc16Lte => 0x1021,
            CrcPolynomial::Crc24cNr => 0xB2_B117,
        }
    }
}

/// Width of the RNTI scrambling applied to the tail of the CRC.
pub const RNTI_MASK_BITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcConfig {
    pub polynomial: CrcPolynomial,
    /// XOR-ed MSB first onto the last 16 parity bits.
    pub rnti_mask: Option<u16>,
    /// Run the register over `L` leading ones before the payload (NR DCI).
    pub ones_prepend: bool,
}

impl CrcConfig {
    pub fn lte(rnti_mask: Option<u16>) -> Self {
        Self {
            polynomial: CrcPolynomial::Crc16Lte,
            rnti_mask,
            ones_prepend: false,
        }
    }

    pub fn nr(rnti_mask: Option<u16>) -> Self {
        Self {
            polynomial: CrcPolynomial::Crc24cNr,
            rnti_mask,
            ones_prepend: true,
        }
    }

    pub fn len(&self) -> usize {
        self.polynomial.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn parity(&self, msg: &[Bit]) -> u32 {
        let len = self.len();
        let top = 1u32 << (len - 1);
        let mask = if len == 32 {
            u32::MAX
        } else {
            (1u32 << len) - 1
        };
        let poly = self.polynomial.generator();
        let prefix = if self.ones_prepend { len } else { 0 };
        let mut reg = 0u32;
        for bit in std::iter::repeat_n(1u8, prefix).chain(msg.iter().copied()) {
            let feedback = ((reg & top) != 0) as u8 ^ bit;
            reg = (reg << 1) & mask;
            if feedback != 0 {
                reg ^= poly;
            }
        }
        if let Some(rnti) = self.rnti_mask {
            reg ^= rnti as u32;
        }
        reg
    }
}

/// Returns `msg` followed by its (optionally RNTI-masked) CRC, MSB first.
pub fn crc_attach(msg: &[Bit], cfg: &CrcConfig) -> Vec<Bit> {
    let parity = cfg.parity(msg);
    let mut out = Vec::with_capacity(msg.len() + cfg.len());
    out.extend_from_slice(msg);
    out.extend((0..cfg.len()).rev().map(|i| ((parity >> i) & 1) as Bit));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrcCheck {
    Pass,
    Fail,
}

impl CrcCheck {
    pub fn is_pass(self) -> bool {
        self == CrcCheck::Pass
    }
}

pub fn crc_check(codeword: &[Bit], cfg: &CrcConfig) -> Result<CrcCheck> {
    let len = cfg.len();
    if codeword.len() <= len {
        return Err(Error::format(format!(
            "codeword of {} bits cannot carry a {len}-bit CRC",
            codeword.len()
        )));
    }
    let (payload, received) = codeword.split_at(codeword.len() - len);
    let expected = cfg.parity(payload);
    let matches = received
        .iter()
        .enumerate()
        .all(|(i, &b)| ((expected >> (len - 1 - i)) & 1) as Bit == b);
    Ok(if matches {
        CrcCheck::Pass
    } else {
        CrcCheck::Fail
    })
}

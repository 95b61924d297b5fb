//! DCI payload construction and CRC attachment.

mod crc;

pub use crc::{crc_attach, crc_check, CrcCheck, CrcConfig, CrcPolynomial, RNTI_MASK_BITS};

use serde::{Deserialize, Serialize};

use crate::bits::Bit;
use crate::{Error, Result};

/// DCI formats carried by the simulated PDCCH.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DciFormat {
    /// LTE format 1C with M-RNTI: MCCH change notification bitmap.
    Lte1C,
    /// NR format 1_0, treated as an opaque payload.
    Nr1_0,
}

/// Channel bandwidths with an LTE format 1C reserved-field size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bandwidth {
    #[serde(rename = "1.4")]
    Mhz1_4,
    #[serde(rename = "3")]
    Mhz3,
    #[serde(rename = "5")]
    Mhz5,
    #[serde(rename = "10")]
    Mhz10,
    #[serde(rename = "15")]
    Mhz15,
    #[serde(rename = "20")]
    Mhz20,
}

impl Bandwidth {
    pub fn mhz(self) -> f64 {
        match self {
            Bandwidth::Mhz1_4 => 1.4,
            Bandwidth::Mhz3 => 3.0,
            Bandwidth::Mhz5 => 5.0,
            Bandwidth::Mhz10 => 10.0,
            Bandwidth::Mhz15 => 15.0,
            Bandwidth::Mhz20 => 20.0,
        }
    }

    /// Reserved bits appended to the 8-bit notification in format 1C.
    pub fn lte_1c_reserved_bits(self) -> usize {
        match self {
            Bandwidth::Mhz1_4 => 0,
            Bandwidth::Mhz3 => 2,
            Bandwidth::Mhz5 => 4,
            Bandwidth::Mhz10 => 5,
            Bandwidth::Mhz15 => 6,
            Bandwidth::Mhz20 => 7,
        }
    }

    /// Resource blocks available at 15 kHz subcarrier spacing.
    pub fn resource_blocks(self) -> usize {
        match self {
            Bandwidth::Mhz1_4 => 6,
            Bandwidth::Mhz3 => 15,
            Bandwidth::Mhz5 => 25,
            Bandwidth::Mhz10 => 50,
            Bandwidth::Mhz15 => 75,
            Bandwidth::Mhz20 => 100,
        }
    }

    /// Smallest power-of-two FFT that holds the occupied subcarriers.
    pub fn fft_size(self) -> usize {
        match self {
            Bandwidth::Mhz1_4 => 128,
            Bandwidth::Mhz3 => 256,
            Bandwidth::Mhz5 => 512,
            Bandwidth::Mhz10 => 1024,
            Bandwidth::Mhz15 | Bandwidth::Mhz20 => 2048,
        }
    }
}

/// Width of the MCCH change notification bitmap in format 1C.
pub const LTE_1C_NOTIFICATION_BITS: usize = 8;

/// M-RNTI used by LTE MCCH change notifications.
pub const M_RNTI: u16 = 0xFFFD;
/// RNTI masking the NR CRC by default.
pub const NR_DEFAULT_RNTI: u16 = 0x4601;

/// Smallest NR DCI size the simulator accepts.
pub const NR_MIN_DCI_BITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DciMessage {
    pub format: DciFormat,
    pub payload: Vec<Bit>,
    pub rnti: u16,
    pub bandwidth: Bandwidth,
}

impl DciMessage {
    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }
}

/// Payload length for a format/bandwidth pair given `content_bits` of content.
pub fn payload_len(format: DciFormat, bandwidth: Bandwidth, content_bits: usize) -> usize {
    match format {
        DciFormat::Lte1C => content_bits + bandwidth.lte_1c_reserved_bits(),
        DciFormat::Nr1_0 => content_bits,
    }
}

/// Assembles a DCI payload from its content fields.
///
/// For format 1C the content is the 8-bit notification bitmap and the
/// bandwidth-dependent reserved field is appended as zeros. For NR 1_0 the
/// content is taken as the whole payload and must be at least 12 bits.
pub fn build_dci(
    format: DciFormat,
    bandwidth: Bandwidth,
    content: &[Bit],
    rnti: u16,
) -> Result<DciMessage> {
    let payload = match format {
        DciFormat::Lte1C => {
            if content.len() != LTE_1C_NOTIFICATION_BITS {
                return Err(Error::format(format!(
                    "format 1C carries an {LTE_1C_NOTIFICATION_BITS}-bit notification, got {} bits",
                    content.len()
                )));
            }
            let mut p = content.to_vec();
            p.resize(p.len() + bandwidth.lte_1c_reserved_bits(), 0);
            p
        }
        DciFormat::Nr1_0 => {
            if content.len() < NR_MIN_DCI_BITS {
                return Err(Error::format(format!(
                    "NR format 1_0 needs at least {NR_MIN_DCI_BITS} bits, got {}",
                    content.len()
                )));
            }
            content.to_vec()
        }
    };
    if payload.iter().any(|&b| b > 1) {
        return Err(Error::format("payload contains non-binary values"));
    }
    Ok(DciMessage {
        format,
        payload,
        rnti,
        bandwidth,
    })
}

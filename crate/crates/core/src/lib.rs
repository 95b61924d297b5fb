//! Link-level simulator for the PDCCH processing chains of LTE-eMBMS and
//! 5G NR Release 15.
//!
//! The crate follows the transmit chain block by block:
//!
//! * [`dci`] builds DCI payloads and attaches RNTI-masked CRCs,
//! * [`fec`] holds the tail-biting convolutional code (LTE) and the polar
//!   code (NR) together with their soft decoders,
//! * [`rate_match`] fits mother codewords to the resource budget and undoes
//!   it at the receiver with additive repetition combining,
//! * [`resource_map`] scrambles, QPSK-modulates and places symbols on the
//!   CORESET / control-region resource grid,
//! * [`phy_channel`] runs CP-OFDM and the AWGN / TDL-A / TDL-C channels,
//! * [`receiver`] estimates and equalises the channel and decodes,
//! * [`sim`] drives reproducible Monte-Carlo BLER/BER sweeps.

pub mod bits;
pub mod chain;
pub mod dci;
pub mod error;
pub mod fec;
pub mod phy_channel;
pub mod rate_match;
pub mod receiver;
pub mod resource_map;
pub mod sim;

pub use error::{Error, Result};

/// Which of the two standards a configuration describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Standard {
    Lte,
    Nr,
}

impl std::fmt::Display for Standard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Standard::Lte => write!(f, "LTE"),
            Standard::Nr => write!(f, "NR"),
        }
    }
}

//! Power delay profiles and Doppler.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_CARRIER_HZ: f64 = 700e6;

/// Normalized delay and power (dB) of the NLOS TDL-A taps.
const TDL_A: [(f64, f64); 23] = [
    (0.0, -13.4),
    (0.3819, 0.0),
    (0.4025, -2.2),
    (0.5868, -4.0),
    (0.4610, -6.0),
    (0.5375, -8.2),
    (0.6708, -9.9),
    (0.5750, -10.5),
    (0.7618, -7.5),
    (1.5375, -15.9),
    (1.8978, -6.6),
    (2.2242, -16.7),
    (2.1718, -12.4),
    (2.4942, -15.2),
    (2.5119, -10.8),
    (3.0582, -11.3),
    (4.0810, -12.7),
    (4.4579, -16.2),
    (4.5695, -18.3),
    (4.7966, -18.9),
    (5.0066, -16.6),
    (5.3043, -19.9),
    (9.6586, -29.7),
];

/// Normalized delay and power (dB) of the NLOS TDL-C taps.
#[allow(clippy::approx_constant)]
const TDL_C: [(f64, f64); 24] = [
    (0.0, -4.4),
    (0.2099, -1.2),
    (0.2219, -3.5),
    (0.2329, -5.2),
    (0.2176, -2.5),
    (0.6366, 0.0),
    (0.6448, -2.2),
    (0.6560, -3.9),
    (0.6584, -7.4),
    (0.7935, -7.1),
    (0.8213, -10.7),
    (0.9336, -11.1),
    (1.2285, -5.1),
    (1.3083, -6.8),
    (2.1704, -8.7),
    (2.7105, -13.2),
    (4.2589, -13.9),
    (4.6003, -13.9),
    (5.4902, -15.8),
    (5.6077, -17.1),
    (6.3065, -16.0),
    (6.6374, -15.7),
    (7.0427, -21.6),
    (8.6523, -22.8),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelModel {
    #[serde(rename = "awgn")]
    Awgn,
    #[serde(rename = "tdl-a")]
    TdlA,
    #[serde(rename = "tdl-c")]
    TdlC,
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelModel::Awgn),
            "tdl-a" | "tdla" => Ok(ChannelModel::TdlA),
            "tdl-c" | "tdlc" => Ok(ChannelModel::TdlC),
            other => Err(Error::config(format!("unknown channel model {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelProfile {
    pub model: ChannelModel,
    /// RMS delay spread in seconds used to scale the normalized delays.
    pub delay_spread: f64,
    pub speed_kmh: f64,
    pub carrier_freq: f64,
    /// Normalized delay and power in dB per tap.
    pub pdp: Vec<(f64, f64)>,
}

impl ChannelProfile {
    pub fn awgn() -> Self {
        Self {
            model: ChannelModel::Awgn,
            delay_spread: 0.0,
            speed_kmh: 0.0,
            carrier_freq: DEFAULT_CARRIER_HZ,
            pdp: vec![(0.0, 0.0)],
        }
    }

    pub fn tdl_a(delay_spread: f64, speed_kmh: f64) -> Self {
        Self::tdl(ChannelModel::TdlA, delay_spread, speed_kmh)
    }

    pub fn tdl_c(delay_spread: f64, speed_kmh: f64) -> Self {
        Self::tdl(ChannelModel::TdlC, delay_spread, speed_kmh)
    }

    /// Profile with the tabulated PDP of `model`.
    pub fn tdl(model: ChannelModel, delay_spread: f64, speed_kmh: f64) -> Self {
        let pdp = match model {
            ChannelModel::Awgn => vec![(0.0, 0.0)],
            ChannelModel::TdlA => TDL_A.to_vec(),
            ChannelModel::TdlC => TDL_C.to_vec(),
        };
        Self {
            model,
            delay_spread,
            speed_kmh,
            carrier_freq: DEFAULT_CARRIER_HZ,
            pdp,
        }
    }

    /// Maximum Doppler shift `v f_c / c` in Hz.
    pub fn max_doppler(&self) -> f64 {
        doppler_hz(self.speed_kmh, self.carrier_freq)
    }

    /// Largest tap delay in seconds.
    pub fn max_delay(&self) -> f64 {
        self.pdp.iter().map(|p| p.0).fold(0.0, f64::max) * self.delay_spread
    }

    /// Replaces the PDP with `(delay_ns, power_db)` rows from a CSV file
    /// with a header line.
    pub fn load_pdp_csv(&mut self, path: &Path) -> Result<()> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let mut pdp = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::format(e.to_string()))?;
            if row.len() != 2 {
                return Err(Error::format(format!(
                    "PDP row has {} fields, expected 2",
                    row.len()
                )));
            }
            let field = |i: usize| -> Result<f64> {
                row[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(format!("invalid PDP value {:?}", &row[i])))
            };
            pdp.push((field(0)? * 1e-9, field(1)?));
        }
        if pdp.is_empty() {
            return Err(Error::format("PDP file has no taps"));
        }
        // Absolute delays are stored with a unit delay spread.
        self.delay_spread = 1.0;
        self.pdp = pdp;
        Ok(())
    }

    /// Taps rounded to whole samples at `sample_rate`; taps landing on the
    /// same sample are merged. Linear powers sum to one.
    pub fn discrete_taps(&self, sample_rate: f64) -> Vec<(usize, f64)> {
        let mut taps: Vec<(usize, f64)> = Vec::new();
        for &(d, p_db) in &self.pdp {
            let delay = (d * self.delay_spread * sample_rate).round() as usize;
            let p = 10f64.powf(p_db / 10.0);
            match taps.iter_mut().find(|t| t.0 == delay) {
                Some(t) => t.1 += p,
                None => taps.push((delay, p)),
            }
        }
        taps.sort_by_key(|t| t.0);
        let total: f64 = taps.iter().map(|t| t.1).sum();
        taps.iter_mut().for_each(|t| t.1 /= total);
        taps
    }
}

pub fn doppler_hz(speed_kmh: f64, carrier_freq: f64) -> f64 {
    speed_kmh / 3.6 * carrier_freq / SPEED_OF_LIGHT
}

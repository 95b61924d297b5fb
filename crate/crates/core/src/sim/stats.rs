//! Counters, confidence intervals and threshold interpolation.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::{Error, Result};

/// Two-sided 95 % normal quantile.
const Z_95: f64 = 1.959964;

pub const CSV_HEADER: [&str; 9] = [
    "cnr_db",
    "blocks",
    "block_errors",
    "bits",
    "bit_errors",
    "bler",
    "ber",
    "bler_ci_lo",
    "bler_ci_hi",
];

/// Counters for one CNR point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub cnr_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

impl PointResult {
    pub fn bler(&self) -> f64 {
        ratio(self.block_errors, self.blocks)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn bler_interval(&self) -> (f64, f64) {
        wilson(self.block_errors, self.blocks)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Wilson score interval at 95 % confidence.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    (
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    )
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimResult {
    pub points: Vec<PointResult>,
}

impl SimResult {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for p in &self.points {
            let (lo, hi) = p.bler_interval();
            w.write_record([
                p.cnr_db.to_string(),
                p.blocks.to_string(),
                p.block_errors.to_string(),
                p.bits.to_string(),
                p.bit_errors.to_string(),
                format!("{:e}", p.bler()),
                format!("{:e}", p.ber()),
                format!("{lo:e}"),
                format!("{hi:e}"),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the counters back from a CSV written by [`SimResult::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(|e| Error::format(e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::format(format!("unexpected CSV header {header:?}")));
        }
        let mut points = Vec::new();
        for row in r.records() {
            let row = row.map_err(|e| Error::format(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                row[i]
                    .parse()
                    .map_err(|_| Error::format(format!("invalid number {:?}", &row[i])))
            };
            let int = |i: usize| -> Result<u64> {
                row[i]
                    .parse()
                    .map_err(|_| Error::format(format!("invalid count {:?}", &row[i])))
            };
            points.push(PointResult {
                cnr_db: num(0)?,
                blocks: int(1)?,
                block_errors: int(2)?,
                bits: int(3)?,
                bit_errors: int(4)?,
            });
        }
        Ok(Self { points })
    }
}

/// CNR at which the BLER crosses `target`, interpolating `log(BLER)`
/// linearly between the bracketing points.
pub fn interpolate_threshold(result: &SimResult, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Range(format!("target BLER {target} outside (0, 1)")));
    }
    let pts = &result.points;
    if let Some(p) = pts.iter().find(|p| p.bler() == target) {
        return Ok(p.cnr_db);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ba, bb) = (a.bler(), b.bler());
        if ba > target && bb < target {
            if bb == 0.0 {
                return Err(Error::Range(format!(
                    "no errors at {} dB; cannot interpolate BLER {target}",
                    b.cnr_db
                )));
            }
            let t = (target.ln() - ba.ln()) / (bb.ln() - ba.ln());
            return Ok(a.cnr_db + t * (b.cnr_db - a.cnr_db));
        }
    }
    Err(Error::Range(format!(
        "BLER {target} is not bracketed by the measured points"
    )))
}

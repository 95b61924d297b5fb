//! CP-OFDM modulation with a unitary DFT.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::dci::Bandwidth;
use crate::resource_map::ResourceGrid;
use crate::{Error, Result, Standard};

pub const SUBCARRIER_SPACING_HZ: f64 = 15_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpMode {
    /// 12 symbols per slot, used by LTE MBSFN.
    Extended,
    /// 14 symbols per slot.
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numerology {
    pub subcarrier_spacing: f64,
    pub fft_size: usize,
    pub cp_mode: CpMode,
}

impl Numerology {
    pub fn new(standard: Standard, bandwidth: Bandwidth) -> Self {
        Self {
            subcarrier_spacing: SUBCARRIER_SPACING_HZ,
            fft_size: bandwidth.fft_size(),
            cp_mode: match standard {
                Standard::Lte => CpMode::Extended,
                Standard::Nr => CpMode::Normal,
            },
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.fft_size as f64 * self.subcarrier_spacing
    }

    /// Useful symbol duration `1 / spacing`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    pub fn symbols_per_slot(&self) -> usize {
        match self.cp_mode {
            CpMode::Extended => 12,
            CpMode::Normal => 14,
        }
    }

    /// Cyclic prefix length in samples of symbol `l` within the slot.
    pub fn cp_len(&self, l: usize) -> usize {
        match self.cp_mode {
            CpMode::Extended => self.fft_size / 4,
            CpMode::Normal => {
                let base = self.fft_size * 9 / 128;
                if l.is_multiple_of(7) {
                    base + self.fft_size / 128
                } else {
                    base
                }
            }
        }
    }

    /// First sample (CP included) of symbol `l`.
    pub fn symbol_start(&self, l: usize) -> usize {
        (0..l).map(|i| self.cp_len(i) + self.fft_size).sum()
    }

    pub fn samples_for(&self, num_symbols: usize) -> usize {
        self.symbol_start(num_symbols)
    }

    /// FFT bin of grid subcarrier `k` when `num_subcarriers` are centred.
    pub fn bin(&self, k: usize, num_subcarriers: usize) -> usize {
        (k + self.fft_size - num_subcarriers / 2) % self.fft_size
    }

    fn cp_mode_of(standard: Standard) -> CpMode {
        match standard {
            Standard::Lte => CpMode::Extended,
            Standard::Nr => CpMode::Normal,
        }
    }
}

/// Cached forward and inverse transforms for one FFT size.
#[derive(Clone)]
pub struct OfdmEngine {
    num: Numerology,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmEngine")
            .field("num", &self.num)
            .finish()
    }
}

impl OfdmEngine {
    pub fn new(num: Numerology) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            num,
            forward: planner.plan_fft_forward(num.fft_size),
            inverse: planner.plan_fft_inverse(num.fft_size),
        }
    }

    pub fn numerology(&self) -> &Numerology {
        &self.num
    }

    fn check(&self, standard: Standard, num_subcarriers: usize) -> Result<()> {
        if Numerology::cp_mode_of(standard) != self.num.cp_mode {
            return Err(Error::config(format!(
                "{standard} grid does not use {:?} cyclic prefix",
                self.num.cp_mode
            )));
        }
        if num_subcarriers > self.num.fft_size {
            return Err(Error::config(format!(
                "{num_subcarriers} subcarriers exceed FFT size {}",
                self.num.fft_size
            )));
        }
        Ok(())
    }

    pub fn modulate(&self, grid: &ResourceGrid) -> Result<Vec<Complex64>> {
        self.check(grid.standard, grid.num_subcarriers)?;
        let n = self.num.fft_size;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(self.num.samples_for(grid.num_symbols));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..grid.num_symbols {
            let cp = self.num.cp_len(l);
            let sym = grid.symbol(l);
            if sym.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                out.resize(out.len() + cp + n, Complex64::new(0.0, 0.0));
                continue;
            }
            buf.fill(Complex64::new(0.0, 0.0));
            for (k, &c) in sym.iter().enumerate() {
                buf[self.num.bin(k, grid.num_subcarriers)] = c * scale;
            }
            self.inverse.process(&mut buf);
            out.extend_from_slice(&buf[n - cp..]);
            out.extend_from_slice(&buf);
        }
        Ok(out)
    }

    /// Strips the CPs and transforms `num_symbols` symbols back onto a grid
    /// whose roles are all [`crate::resource_map::ReRole::Unused`].
    pub fn demodulate(
        &self,
        samples: &[Complex64],
        standard: Standard,
        num_subcarriers: usize,
        num_symbols: usize,
    ) -> Result<ResourceGrid> {
        self.check(standard, num_subcarriers)?;
        let expected = self.num.samples_for(num_symbols);
        if samples.len() != expected {
            return Err(Error::format(format!(
                "{num_symbols} OFDM symbols need {expected} samples, got {}",
                samples.len()
            )));
        }
        let n = self.num.fft_size;
        let scale = 1.0 / (n as f64).sqrt();
        let mut grid = ResourceGrid::empty(standard, num_subcarriers, num_symbols);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..num_symbols {
            let body = self.num.symbol_start(l) + self.num.cp_len(l);
            buf.copy_from_slice(&samples[body..body + n]);
            self.forward.process(&mut buf);
            for k in 0..num_subcarriers {
                let i = grid.index(k, l);
                grid.cells[i] = buf[self.num.bin(k, num_subcarriers)] * scale;
            }
        }
        Ok(grid)
    }
}

pub fn ofdm_modulate(grid: &ResourceGrid, num: &Numerology) -> Result<Vec<Complex64>> {
    OfdmEngine::new(*num).modulate(grid)
}

pub fn ofdm_demodulate(
    samples: &[Complex64],
    num: &Numerology,
    standard: Standard,
    num_subcarriers: usize,
    num_symbols: usize,
) -> Result<ResourceGrid> {
    OfdmEngine::new(*num).demodulate(samples, standard, num_subcarriers, num_symbols)
}

//! Scrambling, QPSK, CCE/REG/CORESET geometry and the resource grid.

pub mod modulation;
pub mod scrambling;

pub use modulation::{qpsk_demap, qpsk_demap_per_symbol, qpsk_map};
pub use scrambling::{descramble_llr, gold_sequence, scramble};

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::bits::Bit;
use crate::dci::Bandwidth;
use crate::{Error, Result, Standard};

pub const SUBCARRIERS_PER_RB: usize = 12;
/// Pilot subcarriers inside an NR REG.
pub const NR_DMRS_SUBCARRIERS: [usize; 3] = [1, 5, 9];
/// Control-region symbols: two for LTE, a three-symbol CORESET for NR.
pub const LTE_CONTROL_SYMBOLS: usize = 2;
pub const NR_CORESET_SYMBOLS: usize = 3;

/// How NR DMRS are spread over the CORESET.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DmrsMode {
    /// Nine pilots per CCE (every other REG carries three), giving
    /// `E = 126` bits per CCE.
    #[default]
    Literal,
    /// Three pilots in every REG, giving `E = 108` bits per CCE.
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoresetConfig {
    pub standard: Standard,
    pub aggregation_level: usize,
    pub regs_per_cce: usize,
    pub res_per_reg: usize,
    pub coreset_symbols: usize,
    pub rb_count: usize,
    /// Pilots per RB over the whole CORESET duration when every REG carries them.
    pub dmrs_per_rb: usize,
    pub dmrs_mode: DmrsMode,
    /// Resource blocks in the carrier; the grid spans all of them.
    pub carrier_rbs: usize,
}

impl CoresetConfig {
    pub fn new(standard: Standard, aggregation_level: usize, bandwidth: Bandwidth) -> Result<Self> {
        if ![1, 2, 4, 8, 16].contains(&aggregation_level) {
            return Err(Error::config(format!(
                "aggregation level {aggregation_level} is not one of 1, 2, 4, 8, 16"
            )));
        }
        let carrier_rbs = bandwidth.resource_blocks();
        let cfg = match standard {
            Standard::Lte => {
                let regs_per_rb = SUBCARRIERS_PER_RB / 4 * LTE_CONTROL_SYMBOLS;
                Self {
                    standard,
                    aggregation_level,
                    regs_per_cce: 9,
                    res_per_reg: 4,
                    coreset_symbols: LTE_CONTROL_SYMBOLS,
                    rb_count: (aggregation_level * 9).div_ceil(regs_per_rb),
                    dmrs_per_rb: 0,
                    dmrs_mode: DmrsMode::Literal,
                    carrier_rbs,
                }
            }
            Standard::Nr => Self {
                standard,
                aggregation_level,
                regs_per_cce: 6,
                res_per_reg: 12,
                coreset_symbols: NR_CORESET_SYMBOLS,
                rb_count: aggregation_level * 6 / NR_CORESET_SYMBOLS,
                dmrs_per_rb: NR_DMRS_SUBCARRIERS.len() * NR_CORESET_SYMBOLS,
                dmrs_mode: DmrsMode::Literal,
                carrier_rbs,
            },
        };
        if cfg.rb_count > carrier_rbs {
            return Err(Error::config(format!(
                "{standard} aggregation level {aggregation_level} needs {} RBs but the {} MHz carrier has {carrier_rbs}",
                cfg.rb_count,
                bandwidth.mhz()
            )));
        }
        Ok(cfg)
    }

    pub fn with_dmrs_mode(mut self, mode: DmrsMode) -> Self {
        self.dmrs_mode = mode;
        self
    }

    pub fn regs(&self) -> usize {
        self.aggregation_level * self.regs_per_cce
    }

    /// All REs of the allocated CCEs, pilots included.
    pub fn total_res(&self) -> usize {
        self.regs() * self.res_per_reg
    }

    pub fn dmrs_res(&self) -> usize {
        match (self.standard, self.dmrs_mode) {
            (Standard::Lte, _) => 0,
            (Standard::Nr, DmrsMode::Geometric) => self.regs() * NR_DMRS_SUBCARRIERS.len(),
            (Standard::Nr, DmrsMode::Literal) => self.regs() / 2 * NR_DMRS_SUBCARRIERS.len(),
        }
    }

    pub fn control_res(&self) -> usize {
        self.total_res() - self.dmrs_res()
    }

    /// Rate-matched length `E` in bits.
    pub fn e_bits(&self) -> usize {
        2 * self.control_res()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.carrier_rbs * SUBCARRIERS_PER_RB
    }

    /// Whether the REG at (`rb`, `symbol`) carries pilots.
    fn reg_has_dmrs(&self, rb: usize, symbol: usize) -> bool {
        match (self.standard, self.dmrs_mode) {
            (Standard::Lte, _) => false,
            (Standard::Nr, DmrsMode::Geometric) => true,
            (Standard::Nr, DmrsMode::Literal) => (rb + symbol).is_multiple_of(2),
        }
    }

    /// Cell positions of control symbols in placement order and of pilots.
    pub fn layout(&self) -> GridLayout {
        let nsc = self.num_subcarriers();
        let mut control = Vec::with_capacity(self.control_res());
        let mut dmrs = Vec::with_capacity(self.dmrs_res());
        match self.standard {
            Standard::Lte => {
                let regs_per_symbol = self.rb_count * SUBCARRIERS_PER_RB / self.res_per_reg;
                for r in 0..self.regs() {
                    let symbol = r / regs_per_symbol;
                    let first = (r % regs_per_symbol) * self.res_per_reg;
                    control.extend((first..first + self.res_per_reg).map(|k| symbol * nsc + k));
                }
            }
            Standard::Nr => {
                for r in 0..self.regs() {
                    let symbol = r / self.rb_count;
                    let rb = r % self.rb_count;
                    let pilots = self.reg_has_dmrs(rb, symbol);
                    for j in 0..SUBCARRIERS_PER_RB {
                        let cell = symbol * nsc + rb * SUBCARRIERS_PER_RB + j;
                        if pilots && NR_DMRS_SUBCARRIERS.contains(&j) {
                            dmrs.push(cell);
                        } else {
                            control.push(cell);
                        }
                    }
                }
            }
        }
        dmrs.sort_unstable();
        let dmrs_values = dmrs_values(&dmrs, nsc);
        GridLayout {
            num_subcarriers: nsc,
            num_symbols: self.coreset_symbols,
            control,
            dmrs,
            dmrs_values,
        }
    }
}

/// Unit-magnitude QPSK pilots, one Gold sequence per OFDM symbol.
fn dmrs_values(cells: &[usize], nsc: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cells.len());
    let mut i = 0;
    while i < cells.len() {
        let symbol = cells[i] / nsc;
        let count = cells[i..]
            .iter()
            .take_while(|&&c| c / nsc == symbol)
            .count();
        let c = gold_sequence(scrambling::NR_DMRS_INIT + symbol as u32, 2 * count);
        out.extend(qpsk_map(&c).expect("even length"));
        i += count;
    }
    out
}

/// Flat cell indices (`symbol * num_subcarriers + subcarrier`) of a CORESET.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLayout {
    pub num_subcarriers: usize,
    pub num_symbols: usize,
    pub control: Vec<usize>,
    /// Pilot cells in increasing index order.
    pub dmrs: Vec<usize>,
    pub dmrs_values: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReRole {
    Unused,
    Control,
    Dmrs,
}

impl ReRole {
    fn as_str(self) -> &'static str {
        match self {
            ReRole::Unused => "unused",
            ReRole::Control => "control",
            ReRole::Dmrs => "dmrs",
        }
    }
}

/// Frequency-domain content of the control region, one cell per RE.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceGrid {
    pub standard: Standard,
    pub num_subcarriers: usize,
    /// OFDM symbols covered, counted from the start of the slot.
    pub num_symbols: usize,
    pub cells: Vec<Complex64>,
    pub roles: Vec<ReRole>,
}

impl ResourceGrid {
    pub fn empty(standard: Standard, num_subcarriers: usize, num_symbols: usize) -> Self {
        let n = num_subcarriers * num_symbols;
        Self {
            standard,
            num_subcarriers,
            num_symbols,
            cells: vec![Complex64::new(0.0, 0.0); n],
            roles: vec![ReRole::Unused; n],
        }
    }

    /// OFDM symbols per slot: 12 with extended CP (LTE), 14 with normal CP.
    pub fn symbols_per_slot(&self) -> usize {
        match self.standard {
            Standard::Lte => 12,
            Standard::Nr => 14,
        }
    }

    pub fn index(&self, subcarrier: usize, symbol: usize) -> usize {
        symbol * self.num_subcarriers + subcarrier
    }

    pub fn get(&self, subcarrier: usize, symbol: usize) -> Complex64 {
        self.cells[self.index(subcarrier, symbol)]
    }

    pub fn symbol(&self, symbol: usize) -> &[Complex64] {
        &self.cells[symbol * self.num_subcarriers..(symbol + 1) * self.num_subcarriers]
    }

    pub fn total_power(&self) -> f64 {
        self.cells.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn count(&self, role: ReRole) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    /// Debug dump: `symbol_index,subcarrier,role,re_value_real,re_value_imag`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([
            "symbol_index",
            "subcarrier",
            "role",
            "re_value_real",
            "re_value_imag",
        ])
        .map_err(io)?;
        for symbol in 0..self.num_symbols {
            for k in 0..self.num_subcarriers {
                let i = self.index(k, symbol);
                w.write_record([
                    symbol.to_string(),
                    k.to_string(),
                    self.roles[i].as_str().to_string(),
                    self.cells[i].re.to_string(),
                    self.cells[i].im.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Single-UE multiplexing: the PDCCH bit streams are concatenated.
pub fn multiplex(pdcchs: &[Vec<Bit>]) -> Vec<Bit> {
    pdcchs.concat()
}

pub fn map_to_grid(symbols: &[Complex64], cfg: &CoresetConfig) -> Result<ResourceGrid> {
    map_with_layout(symbols, cfg.standard, &cfg.layout())
}

pub fn map_with_layout(
    symbols: &[Complex64],
    standard: Standard,
    layout: &GridLayout,
) -> Result<ResourceGrid> {
    if symbols.len() != layout.control.len() {
        return Err(Error::format(format!(
            "CORESET holds {} control REs, got {} symbols",
            layout.control.len(),
            symbols.len()
        )));
    }
    let mut grid = ResourceGrid::empty(standard, layout.num_subcarriers, layout.num_symbols);
    for (&cell, &s) in layout.control.iter().zip(symbols) {
        grid.cells[cell] = s;
        grid.roles[cell] = ReRole::Control;
    }
    for (&cell, &p) in layout.dmrs.iter().zip(&layout.dmrs_values) {
        grid.cells[cell] = p;
        grid.roles[cell] = ReRole::Dmrs;
    }
    Ok(grid)
}

pub fn demap_from_grid(grid: &ResourceGrid, cfg: &CoresetConfig) -> Result<Vec<Complex64>> {
    let layout = cfg.layout();
    if grid.num_subcarriers != layout.num_subcarriers || grid.num_symbols != layout.num_symbols {
        return Err(Error::format(format!(
            "grid is {}x{}, CORESET expects {}x{}",
            grid.num_subcarriers, grid.num_symbols, layout.num_subcarriers, layout.num_symbols
        )));
    }
    let control = grid.count(ReRole::Control);
    if control != layout.control.len()
        || layout
            .control
            .iter()
            .any(|&c| grid.roles[c] != ReRole::Control)
    {
        return Err(Error::format(
            "grid roles do not match the CORESET control positions",
        ));
    }
    Ok(extract(grid, &layout.control))
}

/// Cells at the given positions, in order.
pub fn extract(grid: &ResourceGrid, cells: &[usize]) -> Vec<Complex64> {
    cells.iter().map(|&c| grid.cells[c]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeRateReport {
    pub dci_bits: usize,
    pub crc_bits: usize,
    /// Rate-matched bits `E` available to the PDCCH.
    pub available_bits: usize,
    pub effective_cr: Ratio<usize>,
}

/// DCI bits over the QPSK bits left after pilots.
pub fn code_rate_report(dci_bits: usize, cfg: &CoresetConfig) -> CodeRateReport {
    let crc_bits = match cfg.standard {
        Standard::Lte => 16,
        Standard::Nr => 24,
    };
    let available_bits = cfg.e_bits();
    CodeRateReport {
        dci_bits,
        crc_bits,
        available_bits,
        effective_cr: Ratio::new(dci_bits, available_bits),
    }
}

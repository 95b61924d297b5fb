//! Ideal and pilot-based channel estimation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::phy_channel::{ChannelProfile, ChannelRealization, Numerology};
use crate::resource_map::{GridLayout, ResourceGrid, SUBCARRIERS_PER_RB};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    #[default]
    Ideal,
    /// LS at the pilots, linear interpolation in frequency and time per RB.
    Pilot,
}

/// Channel estimate at the requested cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: Vec<Complex64>,
    /// Variance of the estimation error at each cell.
    pub error_var: Vec<f64>,
    pub mode: EstimationMode,
}

/// Pilot grid: spacing in subcarriers and symbols carrying pilots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DmrsPattern {
    pub freq_spacing: usize,
    pub time_positions: Vec<usize>,
}

impl DmrsPattern {
    pub fn from_layout(layout: &GridLayout) -> Result<Self> {
        if layout.dmrs.is_empty() {
            return Err(Error::config("the control region carries no pilots"));
        }
        let nsc = layout.num_subcarriers;
        let mut time_positions: Vec<usize> = layout.dmrs.iter().map(|&c| c / nsc).collect();
        time_positions.dedup();
        let first_symbol = layout.dmrs[0] / nsc;
        let mut sc: Vec<usize> = layout
            .dmrs
            .iter()
            .filter(|&&c| c / nsc == first_symbol)
            .map(|&c| c % nsc)
            .collect();
        sc.sort_unstable();
        let freq_spacing = sc
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
            .unwrap_or(SUBCARRIERS_PER_RB);
        Ok(Self {
            freq_spacing,
            time_positions,
        })
    }

    /// Largest delay the frequency sampling resolves, `T_s / (2 m)`.
    pub fn max_delay(&self, num: &Numerology) -> f64 {
        num.symbol_duration() / (2.0 * self.freq_spacing as f64)
    }

    /// Largest pilot spacing in symbols, `1 / (2 T_s d_max)`, tolerated at
    /// a Doppler of `max_doppler` Hz.
    pub fn max_time_spacing(num: &Numerology, max_doppler: f64) -> f64 {
        if max_doppler == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * num.symbol_duration() * max_doppler)
        }
    }

    /// Sampling feasibility against the channel's delay and Doppler spread.
    /// Pilot symbols repeat every slot.
    pub fn check_feasible(&self, profile: &ChannelProfile, num: &Numerology) -> Result<()> {
        let tau = profile.max_delay();
        if tau > self.max_delay(num) {
            return Err(Error::config(format!(
                "pilot spacing of {} subcarriers resolves delays up to {:.3} us, channel reaches {:.3} us",
                self.freq_spacing,
                self.max_delay(num) * 1e6,
                tau * 1e6
            )));
        }
        let slot = num.symbols_per_slot();
        let mut gap = slot - self.time_positions.last().unwrap() + self.time_positions[0];
        for w in self.time_positions.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        let bound = Self::max_time_spacing(num, profile.max_doppler());
        if gap as f64 > bound {
            return Err(Error::config(format!(
                "pilots every {gap} symbols exceed the Doppler limit of {bound:.1}"
            )));
        }
        Ok(())
    }
}

/// True frequency response at the centre of each cell's OFDM symbol.
pub fn estimate_ideal(
    rz: &ChannelRealization,
    num: &Numerology,
    num_subcarriers: usize,
    cells: &[usize],
) -> ChannelEstimate {
    let mut per_symbol: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    let h_hat = cells
        .iter()
        .map(|&c| {
            let (l, k) = (c / num_subcarriers, c % num_subcarriers);
            let response = per_symbol.entry(l).or_insert_with(|| {
                let mid = num.symbol_start(l) + num.cp_len(l) + num.fft_size / 2;
                rz.response_on_bins(
                    mid,
                    num.bin(0, num_subcarriers),
                    num_subcarriers,
                    num.fft_size,
                )
            });
            response[k]
        })
        .collect();
    ChannelEstimate {
        h_hat,
        error_var: vec![0.0; cells.len()],
        mode: EstimationMode::Ideal,
    }
}

/// Linear interpolation weights of `x` on the two points `a < b`,
/// extrapolating beyond them.
fn weights(x: f64, a: f64, b: f64) -> (f64, f64) {
    let t = (x - a) / (b - a);
    (1.0 - t, t)
}

/// Interpolation bracket for `x` among sorted `points`: the two nearest
/// points around it, or the two at the nearer end.
fn bracket(x: usize, points: &[usize]) -> (usize, usize) {
    let upper = points.partition_point(|&p| p <= x);
    let hi = upper.clamp(1, points.len() - 1);
    (hi - 1, hi)
}

/// Least squares at the pilots, then per RB linear interpolation in
/// frequency (extrapolating at the RB edges from the two nearest pilots)
/// and linear interpolation in time between pilot symbols.
pub fn estimate_pilot_2d(
    grid: &ResourceGrid,
    layout: &GridLayout,
    cells: &[usize],
    noise_var: f64,
) -> Result<ChannelEstimate> {
    if layout.dmrs.is_empty() {
        return Err(Error::config(
            "pilot-based estimation needs pilots in the grid",
        ));
    }
    let nsc = grid.num_subcarriers;
    // (rb, symbol) -> [(subcarrier within RB, LS estimate)]
    let mut pilots: BTreeMap<(usize, usize), Vec<(usize, Complex64)>> = BTreeMap::new();
    for (&c, &p) in layout.dmrs.iter().zip(&layout.dmrs_values) {
        let (l, k) = (c / nsc, c % nsc);
        pilots
            .entry((k / SUBCARRIERS_PER_RB, l))
            .or_default()
            .push((k % SUBCARRIERS_PER_RB, grid.cells[c] / p));
    }

    // Frequency interpolation at one pilot symbol: value and noise gain.
    let in_frequency = |list: &[(usize, Complex64)], j: usize| -> (Complex64, f64) {
        if list.len() == 1 {
            return (list[0].1, 1.0);
        }
        let pos: Vec<usize> = list.iter().map(|p| p.0).collect();
        let (a, b) = bracket(j, &pos);
        let (wa, wb) = weights(j as f64, pos[a] as f64, pos[b] as f64);
        (list[a].1 * wa + list[b].1 * wb, wa * wa + wb * wb)
    };

    let mut h_hat = Vec::with_capacity(cells.len());
    let mut error_var = Vec::with_capacity(cells.len());
    for &c in cells {
        let (l, k) = (c / nsc, c % nsc);
        let rb = k / SUBCARRIERS_PER_RB;
        let j = k % SUBCARRIERS_PER_RB;
        let symbols: Vec<usize> = pilots
            .range((rb, 0)..(rb + 1, 0))
            .map(|(&(_, s), _)| s)
            .collect();
        if symbols.is_empty() {
            return Err(Error::config(format!(
                "resource block {rb} carries no pilots"
            )));
        }
        let (h, gain) = if symbols.len() == 1 {
            in_frequency(&pilots[&(rb, symbols[0])], j)
        } else {
            let (a, b) = bracket(l, &symbols);
            let (wa, wb) = weights(l as f64, symbols[a] as f64, symbols[b] as f64);
            let (ha, ga) = in_frequency(&pilots[&(rb, symbols[a])], j);
            let (hb, gb) = in_frequency(&pilots[&(rb, symbols[b])], j);
            (ha * wa + hb * wb, wa * wa * ga + wb * wb * gb)
        };
        h_hat.push(h);
        error_var.push(noise_var * gain);
    }
    Ok(ChannelEstimate {
        h_hat,
        error_var,
        mode: EstimationMode::Pilot,
    })
}

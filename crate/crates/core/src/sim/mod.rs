//! Reproducible Monte-Carlo BLER/BER sweeps.

pub mod search;
pub mod stats;

pub use search::{SearchSettings, ThresholdSearch};
pub use stats::{interpolate_threshold, wilson, PointResult, SimResult, CSV_HEADER};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::chain::{Chain, ChainConfig};
use crate::phy_channel::profile::DEFAULT_CARRIER_HZ;
use crate::phy_channel::{
    apply_channel, noise_variance, realize_tdl, ChannelModel, ChannelProfile, ChannelRealization,
};
use crate::{Error, Result};

/// Trials evaluated between two stop-rule checks.
const BATCH: u64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    /// Delay spread in ns; the model's customary value when absent.
    pub delay_spread_ns: Option<f64>,
    pub speed_kmh: f64,
    pub carrier_mhz: f64,
    /// Optional `(delay_ns, power_db)` CSV replacing the tabulated PDP.
    pub pdp_csv: Option<PathBuf>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            model: ChannelModel::Awgn,
            delay_spread_ns: None,
            speed_kmh: 0.0,
            carrier_mhz: DEFAULT_CARRIER_HZ / 1e6,
            pdp_csv: None,
        }
    }
}

impl ChannelConfig {
    pub fn profile(&self) -> Result<ChannelProfile> {
        let ds = self.delay_spread_ns.unwrap_or(match self.model {
            ChannelModel::Awgn => 0.0,
            ChannelModel::TdlA => 30.0,
            ChannelModel::TdlC => 300.0,
        });
        if ds < 0.0 || self.speed_kmh < 0.0 || self.carrier_mhz <= 0.0 {
            return Err(Error::config(
                "delay spread, speed and carrier must be non-negative",
            ));
        }
        let mut p = match self.model {
            ChannelModel::Awgn => ChannelProfile::awgn(),
            m => ChannelProfile::tdl(m, ds * 1e-9, self.speed_kmh),
        };
        p.carrier_freq = self.carrier_mhz * 1e6;
        if let Some(path) = &self.pdp_csv {
            if self.model == ChannelModel::Awgn {
                return Err(Error::config("a PDP override needs a TDL model"));
            }
            p.load_pdp_csv(path)?;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub cnr_db: Vec<f64>,
    pub min_block_errors: u64,
    pub max_blocks: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Skip the noise entirely, whatever the CNR grid says.
    pub noiseless: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cnr_db: Vec::new(),
            min_block_errors: 200,
            max_blocks: 200_000,
            master_seed: 1,
            workers: 0,
            noiseless: false,
        }
    }
}

/// Stop after `min_block_errors` block errors or `max_blocks` blocks,
/// whichever comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_block_errors: u64,
    pub max_blocks: u64,
}

/// One experiment: link, channel and sweep settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub link: ChainConfig,
    pub channel: ChannelConfig,
    pub sweep: SweepConfig,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let grid = &self.sweep.cnr_db;
        if grid.is_empty() {
            return Err(Error::config("the CNR grid is empty"));
        }
        if grid.iter().any(|x| x.is_nan()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("the CNR grid must be strictly increasing"));
        }
        self.check_stop_rule()
    }

    fn check_stop_rule(&self) -> Result<()> {
        if self.sweep.max_blocks == 0 || self.sweep.max_blocks < self.sweep.min_block_errors {
            return Err(Error::config(format!(
                "max_blocks ({}) must be positive and at least min_block_errors ({})",
                self.sweep.max_blocks, self.sweep.min_block_errors
            )));
        }
        Ok(())
    }
}

/// Counter-based seed: a SplitMix64 hash of the three indices.
pub fn trial_seed(master_seed: u64, cnr_index: u64, trial_index: u64) -> u64 {
    let mut z = splitmix(master_seed ^ splitmix(cnr_index ^ splitmix(trial_index)));
    z ^= z >> 31;
    z
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A configuration with its chain and channel prepared once.
#[derive(Debug)]
pub struct Simulator {
    pub cfg: SimConfig,
    pub chain: Chain,
    pub profile: ChannelProfile,
    pool: rayon::ThreadPool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct TrialOutcome {
    block_error: bool,
    bit_errors: u64,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.check_stop_rule()?;
        let chain = Chain::new(cfg.link.clone())?;
        let profile = cfg.channel.profile()?;
        chain.check_channel(&profile)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.sweep.workers)
            .build()
            .map_err(|e| Error::config(e.to_string()))?;
        Ok(Self {
            cfg,
            chain,
            profile,
            pool,
        })
    }

    fn trial(&self, cnr_index: u64, cnr_db: f64, trial: u64) -> Result<TrialOutcome> {
        let seed = trial_seed(self.cfg.sweep.master_seed, cnr_index, trial);
        let mut payload_rng = ChaCha8Rng::seed_from_u64(seed);
        let channel_seed = splitmix(seed ^ 0xC4A7);
        let noise_seed = splitmix(seed ^ 0x4015E);

        let payload = self.chain.random_payload(&mut payload_rng)?;
        let tx = self.chain.transmit(&payload)?;
        let len = tx.samples.len();
        let rz = match self.profile.model {
            ChannelModel::Awgn => ChannelRealization::identity(len),
            _ => realize_tdl(&self.profile, len, &self.chain.numerology, channel_seed)?,
        };
        let var = if self.cfg.sweep.noiseless {
            0.0
        } else {
            noise_variance(cnr_db, 1.0)
        };
        let rz = rz.with_noise(var, noise_seed);
        let rx = self
            .chain
            .receive_and_decode(&apply_channel(&tx.samples, &rz)?, &rz, &tx)?;
        Ok(TrialOutcome {
            block_error: !rx.crc_pass,
            bit_errors: rx.bit_errors as u64,
        })
    }

    /// Runs trials until the stop rule fires. Trials are evaluated in
    /// batches but accumulated strictly in index order, so the result does
    /// not depend on the number of workers.
    pub fn run_point(&self, cnr_index: usize, cnr_db: f64) -> Result<PointResult> {
        let rule = StopRule {
            min_block_errors: self.cfg.sweep.min_block_errors,
            max_blocks: self.cfg.sweep.max_blocks,
        };
        self.run_point_with(cnr_index, cnr_db, rule)
    }

    /// As [`Simulator::run_point`] with an explicit stop rule.
    pub fn run_point_with(
        &self,
        cnr_index: usize,
        cnr_db: f64,
        rule: StopRule,
    ) -> Result<PointResult> {
        let sweep = &rule;
        let bits_per_block = self.chain.cfg.dci_bits as u64;
        let mut point = PointResult {
            cnr_db,
            ..PointResult::default()
        };
        let mut next = 0u64;
        while point.blocks < sweep.max_blocks {
            let end = (next + BATCH).min(sweep.max_blocks);
            let outcomes: Vec<Result<TrialOutcome>> = self.pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map(|t| self.trial(cnr_index as u64, cnr_db, t))
                    .collect()
            });
            next = end;
            for o in outcomes {
                let o = o?;
                point.blocks += 1;
                point.bits += bits_per_block;
                point.bit_errors += o.bit_errors;
                point.block_errors += o.block_error as u64;
                if point.block_errors >= sweep.min_block_errors && sweep.min_block_errors > 0 {
                    return Ok(point);
                }
            }
        }
        Ok(point)
    }

    pub fn run_sweep(&self) -> Result<SimResult> {
        self.cfg.validate()?;
        let mut result = SimResult::default();
        for (i, &cnr) in self.cfg.sweep.cnr_db.iter().enumerate() {
            let p = self.run_point(i, cnr)?;
            info!(
                "{} AL{} {:?}: {cnr:.2} dB, {} blocks, BLER {:.3e}",
                self.chain.cfg.standard,
                self.chain.cfg.aggregation_level,
                self.profile.model,
                p.blocks,
                p.bler()
            );
            result.points.push(p);
        }
        Ok(result)
    }
}

/// One CNR point of `cfg`; `workers` overrides the configured pool size.
pub fn run_point(
    cfg: &SimConfig,
    cnr_index: usize,
    cnr_db: f64,
    workers: usize,
) -> Result<PointResult> {
    let mut cfg = cfg.clone();
    cfg.sweep.workers = workers;
    Simulator::new(cfg)?.run_point(cnr_index, cnr_db)
}

pub fn run_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    Simulator::new(cfg.clone())?.run_sweep()
}

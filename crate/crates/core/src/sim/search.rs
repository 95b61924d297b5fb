//! Adaptive search for the CNR at which a link reaches a target BLER.
//!
//! A coarse walk with a cheap stop rule brackets the target. Two points
//! straddling the log-linear estimate are then measured with a tighter
//! rule and shifted until they bracket the target, and the threshold is
//! interpolated between them. Every point draws from the same trial
//! stream, so curves compared point against point share their random
//! numbers.

use log::debug;

use super::{PointResult, SimResult, Simulator, StopRule};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSettings {
    pub target_bler: f64,
    pub start_db: f64,
    pub coarse_step_db: f64,
    pub coarse: StopRule,
    /// Half the spacing of the two refined points.
    pub fine_half_width_db: f64,
    pub fine: StopRule,
    /// Seed stream (CNR index) shared by every evaluated point.
    pub stream: usize,
    /// Evaluations allowed in each of the two phases.
    pub max_steps: usize,
}

impl SearchSettings {
    /// Steep curves: 1 dB coarse steps, refined points 0.8 dB apart.
    pub fn steep(start_db: f64) -> Self {
        Self {
            target_bler: 1e-3,
            start_db,
            coarse_step_db: 1.0,
            coarse: StopRule {
                min_block_errors: 20,
                max_blocks: 20_000,
            },
            fine_half_width_db: 0.4,
            fine: StopRule {
                min_block_errors: 100,
                max_blocks: 200_000,
            },
            stream: 0,
            max_steps: 40,
        }
    }

    /// Shallow fading curves: 3 dB coarse steps, refined points 3 dB apart.
    pub fn shallow(start_db: f64) -> Self {
        Self {
            coarse_step_db: 3.0,
            fine_half_width_db: 1.5,
            ..Self::steep(start_db)
        }
    }

    pub fn with_stop_rule(mut self, fine: StopRule) -> Self {
        self.fine = fine;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSearch {
    pub threshold_db: f64,
    /// Refined points with BLER above and at or below the target.
    pub lower: PointResult,
    pub upper: PointResult,
    /// Number of CNR points measured in total.
    pub evaluations: usize,
}

impl Simulator {
    pub fn search_threshold(&self, s: &SearchSettings) -> Result<ThresholdSearch> {
        if !(s.target_bler > 0.0 && s.target_bler < 1.0) {
            return Err(Error::Range(format!(
                "target BLER {} outside (0, 1)",
                s.target_bler
            )));
        }
        if s.coarse_step_db <= 0.0 || s.fine_half_width_db <= 0.0 {
            return Err(Error::config("search steps must be positive"));
        }
        let t = s.target_bler;
        let mut evaluations = 0;
        let mut eval = |cnr: f64, rule: StopRule| -> Result<PointResult> {
            evaluations += 1;
            let p = self.run_point_with(s.stream, cnr, rule)?;
            debug!("{cnr:.2} dB: {} / {} blocks", p.block_errors, p.blocks);
            Ok(p)
        };

        let mut lo = eval(s.start_db, s.coarse)?;
        let mut hi = lo;
        let mut steps = 0;
        while lo.bler() <= t {
            hi = lo;
            lo = eval(lo.cnr_db - s.coarse_step_db, s.coarse)?;
            steps += 1;
            if steps > s.max_steps {
                return Err(unbracketed(t));
            }
        }
        while hi.bler() > t {
            lo = hi;
            hi = eval(hi.cnr_db + s.coarse_step_db, s.coarse)?;
            steps += 1;
            if steps > s.max_steps {
                return Err(unbracketed(t));
            }
        }

        let floor = 0.5 / hi.blocks as f64;
        let (bl, bh) = (lo.bler().max(floor), hi.bler().max(floor));
        let centre = if bh < bl {
            lo.cnr_db + (t.ln() - bl.ln()) / (bh.ln() - bl.ln()) * (hi.cnr_db - lo.cnr_db)
        } else {
            hi.cnr_db
        };
        let h = s.fine_half_width_db;

        let mut a = eval(centre - h, s.fine)?;
        let mut b = eval(centre + h, s.fine)?;
        for _ in 0..s.max_steps {
            if a.bler() <= t {
                b = a;
                a = eval(a.cnr_db - 2.0 * h, s.fine)?;
            } else if b.bler() > t {
                a = b;
                b = eval(b.cnr_db + 2.0 * h, s.fine)?;
            } else if b.block_errors == 0 {
                b = eval(0.5 * (a.cnr_db + b.cnr_db), s.fine)?;
            } else {
                let curve = SimResult { points: vec![a, b] };
                let threshold_db = super::interpolate_threshold(&curve, t)?;
                return Ok(ThresholdSearch {
                    threshold_db,
                    lower: a,
                    upper: b,
                    evaluations,
                });
            }
        }
        Err(unbracketed(t))
    }
}

fn unbracketed(target: f64) -> Error {
    Error::Range(format!(
        "no CNR bracketing BLER {target} within the step budget"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainConfig;
    use crate::sim::SimConfig;
    use crate::Standard;

    fn sim() -> Simulator {
        let mut c = SimConfig::default();
        c.link = ChainConfig::new(Standard::Nr, 8);
        c.sweep.workers = 1;
        Simulator::new(c).unwrap()
    }

    #[test]
    fn finds_a_bracketed_threshold_from_either_side() {
        let s = sim();
        let mut settings = SearchSettings::steep(-10.0);
        settings.target_bler = 0.1;
        settings.coarse = StopRule {
            min_block_errors: 10,
            max_blocks: 500,
        };
        settings.fine = StopRule {
            min_block_errors: 30,
            max_blocks: 2_000,
        };
        let up = s.search_threshold(&settings).unwrap();
        settings.start_db = 5.0;
        let down = s.search_threshold(&settings).unwrap();
        for r in [&up, &down] {
            assert!(r.lower.bler() > 0.1 && r.upper.bler() <= 0.1);
            assert!(r.lower.cnr_db <= r.threshold_db && r.threshold_db <= r.upper.cnr_db);
        }
        assert!((up.threshold_db - down.threshold_db).abs() < 1.0);
    }

    #[test]
    fn rejects_bad_targets() {
        let mut settings = SearchSettings::steep(0.0);
        settings.target_bler = 1.0;
        assert!(matches!(
            sim().search_threshold(&settings),
            Err(Error::Range(_))
        ));
    }
}

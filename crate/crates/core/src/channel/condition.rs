use serde::{Deserialize, Serialize};

use super::{ChannelCondition, ChannelError, PropagationScenario};
use crate::engine::RngStream;

/// How a link's condition is chosen at the start of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConditionMode {
    Fixed(ChannelCondition),
    /// LOS with probability `min(1, exp(-d/d0))`, NLOSv otherwise.
    Probabilistic { d0_m: f64 },
}

pub fn los_probability(d_m: f64, d0_m: f64) -> f64 {
    (-d_m.max(0.0) / d0_m).exp().min(1.0)
}

/// Draws the link condition. Probabilistic mode only ever yields LOS or
/// NLOSv; NLOS has to be imposed.
pub fn channel_condition(
    mode: ConditionMode,
    _scenario: PropagationScenario,
    d_m: f64,
    rng: &mut RngStream,
) -> ChannelCondition {
    match mode {
        ConditionMode::Fixed(c) => c,
        ConditionMode::Probabilistic { d0_m } => {
            if rng.uniform() < los_probability(d_m, d0_m) {
                ChannelCondition::Los
            } else {
                ChannelCondition::NlosV
            }
        }
    }
}

/// Extra loss from vehicles blocking the LOS path, in dB:
/// `N(μ(d), σ²)` clamped at zero with `μ(d) = base + max(0, slope·log10(d) − offset)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NlosvBlockage {
    pub base_db: f64,
    pub slope_db: f64,
    pub offset_db: f64,
    pub sigma_db: f64,
}

impl Default for NlosvBlockage {
    fn default() -> Self {
        NlosvBlockage {
            base_db: 9.0,
            slope_db: 15.0,
            offset_db: 41.0,
            sigma_db: 4.5,
        }
    }
}

impl NlosvBlockage {
    pub fn mean_db(&self, d_m: f64) -> f64 {
        self.base_db + (self.slope_db * d_m.max(1.0).log10() - self.offset_db).max(0.0)
    }

    pub fn draw_db(&self, d_m: f64, rng: &mut RngStream) -> f64 {
        rng.normal(self.mean_db(d_m), self.sigma_db).max(0.0)
    }

    /// Extra loss for a link in `condition`; only NLOSv links may ask.
    pub fn extra_loss_db(
        &self,
        condition: ChannelCondition,
        d_m: f64,
        rng: &mut RngStream,
    ) -> Result<f64, ChannelError> {
        match condition {
            ChannelCondition::NlosV => Ok(self.draw_db(d_m, rng)),
            other => Err(ChannelError::NotNlosv(other)),
        }
    }
}

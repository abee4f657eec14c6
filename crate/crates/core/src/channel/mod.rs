//! Large-scale pathloss, vehicle blockage, channel condition, small-scale
//! fading, UPA beam patterns and SINR composition.

mod beam;
mod condition;
mod fading;
mod link;
mod pathloss;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use beam::{AntennaArray, ArraySize, Vec3, DEFAULT_BACKLOBE_FLOOR_DB};
pub use condition::{channel_condition, los_probability, ConditionMode, NlosvBlockage};
pub use fading::{coherence_time_s, FadingProcess, SPEED_OF_LIGHT};
pub use link::{
    dbm_to_mw, mw_to_dbm, sinr_db, thermal_noise_dbm, ChannelModel, LinkBudget, LinkEnd, LinkState,
};
pub use pathloss::{PathlossCoeffs, PathlossModel, MIN_DISTANCE_M};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive and finite, got {0}")]
    InvalidDistance(f64),
    #[error("carrier frequency {0} GHz outside [0.5, 100]")]
    InvalidFrequency(f64),
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("invalid antenna array `{0}`")]
    InvalidArray(String),
    #[error("vehicle blockage loss requested for a {0} link")]
    NotNlosv(ChannelCondition),
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagationScenario {
    Highway,
    Urban,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelCondition {
    #[serde(rename = "los")]
    Los,
    #[serde(rename = "nlosv")]
    NlosV,
    #[serde(rename = "nlos")]
    Nlos,
}

impl fmt::Display for ChannelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelCondition::Los => "LOS",
            ChannelCondition::NlosV => "NLOSv",
            ChannelCondition::Nlos => "NLOS",
        })
    }
}

impl FromStr for ChannelCondition {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "los" => Ok(ChannelCondition::Los),
            "nlosv" => Ok(ChannelCondition::NlosV),
            "nlos" => Ok(ChannelCondition::Nlos),
            _ => Err(ChannelError::Unknown {
                kind: "channel condition",
                value: s.to_owned(),
            }),
        }
    }
}

/// Link-budget constants and model coefficients, the `[channel]` section of
/// a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub pathloss: PathlossModel,
    pub shadowing_los_db: f64,
    pub shadowing_nlosv_db: f64,
    pub shadowing_nlos_db: f64,
    pub nlosv_blockage: NlosvBlockage,
    /// `d0` of the probabilistic LOS curve.
    pub los_d0_m: f64,
    pub fading: bool,
    pub rician_k_db: f64,
    /// Lower bound on the speed used for the Doppler spread, so co-moving
    /// vehicles still get a finite coherence time.
    pub min_doppler_speed_mps: f64,
    pub backlobe_floor_db: f64,
    pub element_spacing_wl: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            tx_power_dbm: 23.0,
            noise_figure_db: 5.0,
            pathloss: PathlossModel::default(),
            shadowing_los_db: 3.0,
            shadowing_nlosv_db: 4.0,
            shadowing_nlos_db: 4.0,
            nlosv_blockage: NlosvBlockage::default(),
            los_d0_m: 200.0,
            fading: true,
            rician_k_db: 9.0,
            min_doppler_speed_mps: 1.0,
            backlobe_floor_db: DEFAULT_BACKLOBE_FLOOR_DB,
            element_spacing_wl: 0.5,
        }
    }
}

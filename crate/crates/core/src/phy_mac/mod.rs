//! Frame timing, transport-block sizing, the SINR→BLER error model, AMC and
//! TDMA slot scheduling.

mod frame;
mod mcs;
mod schedule;
mod tb;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use frame::{slot_duration, FrameConfig, Numerology, SUBCARRIERS_PER_PRB, SUBFRAME, SYMBOLS_PER_SLOT};
pub use mcs::{shannon_threshold_db, tbs_bits, McsEntry, McsTable};
pub use schedule::{build_schedule, ScheduleMode, SchedulePattern};
pub use tb::{transmit_slot, TransportBlock, TxOutcome};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PhyError {
    #[error("numerology {0} not supported (expected 2 or 3)")]
    UnsupportedNumerology(u8),
    #[error("bandwidth must be positive, got {0} Hz")]
    InvalidBandwidth(f64),
    #[error("guard fraction must be in [0, 1), got {0}")]
    InvalidGuard(f64),
    #[error("MCS index {0} not in table")]
    UnknownMcs(u8),
    #[error("invalid MCS table: {0}")]
    InvalidTable(String),
    #[error("cannot read MCS table {path}: {message}")]
    TableIo { path: String, message: String },
    #[error("schedule needs at least one link")]
    NoLinks,
    #[error("{links} links cannot get dedicated slots in a {slots}-slot subframe")]
    TooManyLinks { links: usize, slots: u32 },
    #[error("unknown schedule mode `{0}` (expected shared or dedicated)")]
    UnknownScheduleMode(String),
    #[error("invalid MCS selection `{0}` (expected fixed:<index>, <index> or adaptive)")]
    InvalidMcsChoice(String),
}

/// Fixed MCS index or adaptive selection from the last measured SINR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum McsChoice {
    Fixed(u8),
    Adaptive,
}

impl fmt::Display for McsChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McsChoice::Fixed(i) => write!(f, "fixed:{i}"),
            McsChoice::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl FromStr for McsChoice {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, PhyError> {
        let bad = || PhyError::InvalidMcsChoice(s.to_owned());
        let s = s.trim();
        if s == "adaptive" {
            return Ok(McsChoice::Adaptive);
        }
        let idx = s.strip_prefix("fixed:").unwrap_or(s);
        idx.parse().map(McsChoice::Fixed).map_err(|_| bad())
    }
}

impl Serialize for McsChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for McsChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => u8::try_from(i)
                .map(McsChoice::Fixed)
                .map_err(|_| serde::de::Error::custom(PhyError::InvalidMcsChoice(i.to_string()))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The `[phy]` section of a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    pub numerology: Numerology,
    pub bandwidth_mhz: f64,
    pub carrier_ghz: f64,
    pub guard_fraction: f64,
    pub control_symbols: u32,
    pub mcs: McsChoice,
    pub schedule: ScheduleMode,
    pub target_bler: f64,
    /// Alternative MCS/BLER table file; the bundled table when absent.
    pub mcs_table: Option<PathBuf>,
    pub bler_slope_per_db: Option<f64>,
    pub implementation_gap_db: Option<f64>,
    /// Forces every transport block to this error probability.
    pub bler_override: Option<f64>,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            numerology: Numerology::N3,
            bandwidth_mhz: 100.0,
            carrier_ghz: 28.0,
            guard_fraction: 0.05,
            control_symbols: 2,
            mcs: McsChoice::Fixed(0),
            schedule: ScheduleMode::Shared,
            target_bler: 0.1,
            mcs_table: None,
            bler_slope_per_db: None,
            implementation_gap_db: None,
            bler_override: None,
        }
    }
}

impl PhyParams {
    pub fn frame(&self) -> Result<FrameConfig, PhyError> {
        FrameConfig::new(self.numerology, self.bandwidth_mhz * 1e6, self.guard_fraction)
    }

    pub fn data_symbols(&self) -> u32 {
        SYMBOLS_PER_SLOT - self.control_symbols
    }

    /// Loads the configured table and applies any curve overrides.
    pub fn load_table(&self) -> Result<McsTable, PhyError> {
        let table = match &self.mcs_table {
            Some(p) => McsTable::from_path(p)?,
            None => McsTable::nr_default(),
        };
        match (self.bler_slope_per_db, self.implementation_gap_db) {
            (None, None) => Ok(table),
            (slope, gap) => {
                let e0 = table.get(0)?;
                let slope = slope.unwrap_or(e0.bler_slope);
                let gap = gap.unwrap_or_else(|| e0.sinr_threshold_db - shannon_threshold_db(e0.spectral_efficiency, 0.0));
                table.with_curve(slope, gap)
            }
        }
    }
}

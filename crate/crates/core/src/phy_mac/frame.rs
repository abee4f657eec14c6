use std::fmt;

use serde::{Deserialize, Serialize};

use super::PhyError;
use crate::engine::SimTime;

pub const SUBFRAME: SimTime = SimTime::from_millis(1);
pub const SYMBOLS_PER_SLOT: u32 = 14;
pub const SUBCARRIERS_PER_PRB: u32 = 12;

/// NR numerology; only 2 and 3 are used on the sidelink here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Numerology(u8);

impl Numerology {
    pub const N2: Numerology = Numerology(2);
    pub const N3: Numerology = Numerology(3);

    pub fn new(n: u8) -> Result<Self, PhyError> {
        match n {
            2 | 3 => Ok(Numerology(n)),
            other => Err(PhyError::UnsupportedNumerology(other)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn scs_khz(self) -> u32 {
        15 << self.0
    }

    pub fn slots_per_subframe(self) -> u32 {
        1 << self.0
    }

    pub fn slot_duration(self) -> SimTime {
        SimTime::from_nanos(SUBFRAME.as_nanos() / u64::from(self.slots_per_subframe()))
    }
}

impl TryFrom<u8> for Numerology {
    type Error = PhyError;

    fn try_from(n: u8) -> Result<Self, PhyError> {
        Numerology::new(n)
    }
}

impl From<Numerology> for u8 {
    fn from(n: Numerology) -> u8 {
        n.0
    }
}

impl fmt::Display for Numerology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn slot_duration(numerology: u8) -> Result<SimTime, PhyError> {
    Ok(Numerology::new(numerology)?.slot_duration())
}

/// Numerology-derived frame timing and PRB count for a carrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameConfig {
    pub numerology: Numerology,
    pub bandwidth_hz: f64,
    pub guard_fraction: f64,
    pub n_prb: u32,
}

impl FrameConfig {
    pub fn new(numerology: Numerology, bandwidth_hz: f64, guard_fraction: f64) -> Result<Self, PhyError> {
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(PhyError::InvalidBandwidth(bandwidth_hz));
        }
        if !(0.0..1.0).contains(&guard_fraction) {
            return Err(PhyError::InvalidGuard(guard_fraction));
        }
        let prb_hz = f64::from(SUBCARRIERS_PER_PRB * numerology.scs_khz()) * 1e3;
        // nearest integer: 100 MHz with 5% guard gives 131.94 and 65.97
        let n_prb = (bandwidth_hz * (1.0 - guard_fraction) / prb_hz).round() as u32;
        Ok(FrameConfig {
            numerology,
            bandwidth_hz,
            guard_fraction,
            n_prb,
        })
    }

    pub fn scs_khz(&self) -> u32 {
        self.numerology.scs_khz()
    }

    pub fn slots_per_subframe(&self) -> u32 {
        self.numerology.slots_per_subframe()
    }

    pub fn slot_duration(&self) -> SimTime {
        self.numerology.slot_duration()
    }

    pub fn symbols_per_slot(&self) -> u32 {
        SYMBOLS_PER_SLOT
    }

    pub fn slots_per_second(&self) -> u32 {
        1000 * self.slots_per_subframe()
    }

    /// Resource elements available for data in one slot.
    pub fn data_resource_elements(&self, data_symbols: u32) -> u64 {
        u64::from(self.n_prb) * u64::from(SUBCARRIERS_PER_PRB) * u64::from(data_symbols)
    }
}

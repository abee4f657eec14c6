//! Scenario geometry (single link, two interfering platoons), the per-run
//! simulation loop, and metric collection with multi-run aggregation.

mod geometry;
mod metrics;
mod sim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use geometry::{segment_blocked, Vehicle};
pub use metrics::{aggregate, student_t_half_width, Aggregate, Estimate, RunMetrics};
pub use sim::{build_scenario, build_scenario_a, build_scenario_b, Delivery, RunOutcome, Simulation};

use crate::channel::{ArraySize, ChannelCondition, ChannelError, ChannelParams, PropagationScenario};
use crate::phy_mac::{McsChoice, PhyError, PhyParams, SYMBOLS_PER_SLOT};
use crate::stack::{Headers, StackError, TrafficSource};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Stack(#[from] StackError),
}

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key: key.to_owned(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// One transmitter, one receiver, same lane.
    #[serde(rename = "a")]
    A,
    /// Two groups of two vehicles on adjacent lanes sharing the channel.
    #[serde(rename = "b")]
    B,
}

/// Channel condition used for a path: fixed, or drawn once per run from
/// the distance-dependent LOS probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionSetting {
    Fixed(ChannelCondition),
    Probabilistic,
}

impl fmt::Display for ConditionSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionSetting::Fixed(ChannelCondition::Los) => f.write_str("los"),
            ConditionSetting::Fixed(ChannelCondition::NlosV) => f.write_str("nlosv"),
            ConditionSetting::Fixed(ChannelCondition::Nlos) => f.write_str("nlos"),
            ConditionSetting::Probabilistic => f.write_str("probabilistic"),
        }
    }
}

impl FromStr for ConditionSetting {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, ChannelError> {
        match s {
            "probabilistic" => Ok(ConditionSetting::Probabilistic),
            other => other.parse().map(ConditionSetting::Fixed),
        }
    }
}

impl Serialize for ConditionSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConditionSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The `[scenario]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub propagation: PropagationScenario,
    /// Condition of unobstructed paths.
    pub condition: ConditionSetting,
    /// Scenario A transmitter-receiver distance.
    pub distance_m: f64,
    pub inter_group_distance_m: f64,
    pub intra_group_distance_m: f64,
    pub lane_offset_m: f64,
    /// A vehicle closer than this to a path blocks it.
    pub blocker_clearance_m: f64,
    pub blocked_condition: ChannelCondition,
    pub speed_mps: f64,
    pub array: ArraySize,
    pub duration_s: f64,
    pub warmup_s: f64,
    /// Time after the sources stop during which in-flight data may still
    /// be delivered.
    pub drain_s: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            kind: ScenarioKind::A,
            propagation: PropagationScenario::Highway,
            condition: ConditionSetting::Fixed(ChannelCondition::Los),
            distance_m: 100.0,
            inter_group_distance_m: 40.0,
            intra_group_distance_m: 40.0,
            lane_offset_m: 4.0,
            blocker_clearance_m: 2.5,
            blocked_condition: ChannelCondition::Nlos,
            speed_mps: 20.0,
            array: ArraySize::new(4, 4),
            duration_s: 10.0,
            warmup_s: 0.5,
            drain_s: 0.25,
        }
    }
}

/// The `[rlc]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlcParams {
    pub t_reordering_ms: f64,
    pub buffer_bytes: u64,
}

impl Default for RlcParams {
    fn default() -> Self {
        RlcParams {
            t_reordering_ms: 10.0,
            buffer_bytes: 512 * 1024,
        }
    }
}

/// Everything needed to build one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioParams,
    pub phy: PhyParams,
    pub channel: ChannelParams,
    pub rlc: RlcParams,
    pub app: TrafficSource,
    pub headers: Headers,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scenario: ScenarioParams::default(),
            phy: PhyParams::default(),
            channel: ChannelParams::default(),
            rlc: RlcParams::default(),
            app: TrafficSource::cbr(800e3, 100),
            headers: Headers::default(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be non-negative and finite, got {v}")))
    }
}

impl SimConfig {
    /// Checks ranges and cross-field constraints, naming the offending key.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let s = &self.scenario;
        match s.kind {
            ScenarioKind::A => positive("scenario.distance_m", s.distance_m)?,
            ScenarioKind::B => {
                positive("scenario.inter_group_distance_m", s.inter_group_distance_m)?;
                positive("scenario.intra_group_distance_m", s.intra_group_distance_m)?;
                non_negative("scenario.lane_offset_m", s.lane_offset_m)?;
                if s.lane_offset_m == 0.0 && s.inter_group_distance_m < s.intra_group_distance_m {
                    return Err(invalid(
                        "scenario.inter_group_distance_m",
                        "groups overlap in the same lane",
                    ));
                }
            }
        }
        non_negative("scenario.blocker_clearance_m", s.blocker_clearance_m)?;
        non_negative("scenario.speed_mps", s.speed_mps)?;
        positive("scenario.duration_s", s.duration_s)?;
        non_negative("scenario.warmup_s", s.warmup_s)?;
        non_negative("scenario.drain_s", s.drain_s)?;

        let p = &self.phy;
        positive("phy.bandwidth_mhz", p.bandwidth_mhz)?;
        if !(0.5..=100.0).contains(&p.carrier_ghz) {
            return Err(invalid("phy.carrier_ghz", format!("{} outside [0.5, 100]", p.carrier_ghz)));
        }
        if !(0.0..1.0).contains(&p.guard_fraction) {
            return Err(invalid("phy.guard_fraction", format!("{} outside [0, 1)", p.guard_fraction)));
        }
        if p.control_symbols >= SYMBOLS_PER_SLOT {
            return Err(invalid(
                "phy.control_symbols",
                format!("{} leaves no data symbols", p.control_symbols),
            ));
        }
        if !(p.target_bler > 0.0 && p.target_bler < 1.0) {
            return Err(invalid("phy.target_bler", format!("{} outside (0, 1)", p.target_bler)));
        }
        if let Some(b) = p.bler_override {
            if !(0.0..=1.0).contains(&b) {
                return Err(invalid("phy.bler_override", format!("{b} outside [0, 1]")));
            }
        }
        if let Some(k) = p.bler_slope_per_db {
            positive("phy.bler_slope_per_db", k)?;
        }
        let table = p
            .load_table()
            .map_err(|e| invalid("phy.mcs_table", e.to_string()))?;
        if let McsChoice::Fixed(i) = p.mcs {
            if i > table.max_index() {
                return Err(invalid(
                    "phy.mcs",
                    format!("index {i} not in table (0..={})", table.max_index()),
                ));
            }
        }

        let c = &self.channel;
        non_negative("channel.shadowing_los_db", c.shadowing_los_db)?;
        non_negative("channel.shadowing_nlosv_db", c.shadowing_nlosv_db)?;
        non_negative("channel.shadowing_nlos_db", c.shadowing_nlos_db)?;
        positive("channel.los_d0_m", c.los_d0_m)?;
        positive("channel.element_spacing_wl", c.element_spacing_wl)?;
        non_negative("channel.min_doppler_speed_mps", c.min_doppler_speed_mps)?;

        positive("rlc.t_reordering_ms", self.rlc.t_reordering_ms)?;
        if self.rlc.buffer_bytes == 0 {
            return Err(invalid("rlc.buffer_bytes", "must be positive"));
        }
        self.app.validate().map_err(|e| {
            let key = match e {
                StackError::InvalidRate(_) => "app.rate_bps",
                StackError::InvalidPacketSize => "app.packet_bytes",
                _ => "app",
            };
            invalid(key, e.to_string())
        })?;
        Ok(())
    }

    pub fn channel_condition_fixed(&self) -> Option<ChannelCondition> {
        match self.scenario.condition {
            ConditionSetting::Fixed(c) => Some(c),
            ConditionSetting::Probabilistic => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_mcs_names_key() {
        let mut cfg = SimConfig::default();
        cfg.phy.mcs = McsChoice::Fixed(99);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.starts_with("phy.mcs:"), "{err}");
    }

    #[test]
    fn condition_setting_round_trip() {
        for s in ["los", "nlosv", "nlos", "probabilistic"] {
            assert_eq!(s.parse::<ConditionSetting>().unwrap().to_string(), s);
        }
        assert!("foggy".parse::<ConditionSetting>().is_err());
    }
}

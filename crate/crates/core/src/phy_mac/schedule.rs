use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PhyError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// Every link may transmit in every slot.
    Shared,
    /// Slots of a subframe are split round-robin between links.
    Dedicated,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::Shared => "shared",
            ScheduleMode::Dedicated => "dedicated",
        })
    }
}

impl FromStr for ScheduleMode {
    type Err = PhyError;

    fn from_str(s: &str) -> Result<Self, PhyError> {
        match s {
            "shared" => Ok(ScheduleMode::Shared),
            "dedicated" => Ok(ScheduleMode::Dedicated),
            other => Err(PhyError::UnknownScheduleMode(other.to_owned())),
        }
    }
}

/// Which links may transmit in each slot of a subframe. The pattern repeats
/// every subframe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulePattern {
    mode: ScheduleMode,
    assignment: Vec<Vec<usize>>,
}

/// Builds the TDMA pattern for `links` (ids, in priority order).
pub fn build_schedule(
    mode: ScheduleMode,
    links: &[usize],
    slots_per_subframe: u32,
) -> Result<SchedulePattern, PhyError> {
    if links.is_empty() {
        return Err(PhyError::NoLinks);
    }
    let slots = slots_per_subframe as usize;
    let assignment = match mode {
        ScheduleMode::Shared => vec![links.to_vec(); slots],
        ScheduleMode::Dedicated => {
            if links.len() > slots {
                return Err(PhyError::TooManyLinks {
                    links: links.len(),
                    slots: slots_per_subframe,
                });
            }
            (0..slots).map(|s| vec![links[s % links.len()]]).collect()
        }
    };
    Ok(SchedulePattern { mode, assignment })
}

impl SchedulePattern {
    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn slots_per_subframe(&self) -> usize {
        self.assignment.len()
    }

    /// Links permitted in absolute slot number `slot`.
    pub fn permitted(&self, slot: u64) -> &[usize] {
        &self.assignment[(slot % self.assignment.len() as u64) as usize]
    }

    pub fn is_permitted(&self, link: usize, slot: u64) -> bool {
        self.permitted(slot).contains(&link)
    }

    /// Slot indexes within the subframe owned by `link`.
    pub fn slots_of(&self, link: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, ls)| ls.contains(&link))
            .map(|(s, _)| s)
            .collect()
    }

    /// How many of the first `n_slots` absolute slots `link` owns.
    pub fn owned_in(&self, link: usize, n_slots: u64) -> u64 {
        let per = self.assignment.len() as u64;
        let full = n_slots / per * self.slots_of(link).len() as u64;
        let rest = (0..n_slots % per).filter(|&s| self.is_permitted(link, s)).count() as u64;
        full + rest
    }
}

use std::path::Path;

use serde::Deserialize;

use super::frame::FrameConfig;
use super::PhyError;

const DEFAULT_TABLE: &str = include_str!("../../data/mcs_table.toml");

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McsEntry {
    pub index: u8,
    pub modulation_order: u8,
    pub code_rate: f64,
    /// Bits per resource element.
    pub spectral_efficiency: f64,
    /// SINR at which BLER is 0.5.
    pub sinr_threshold_db: f64,
    pub bler_slope: f64,
}

impl McsEntry {
    /// Logistic BLER curve, `1 / (1 + exp(k·(γ − γ_th)))`.
    pub fn bler(&self, sinr_db: f64) -> f64 {
        let x = self.bler_slope * (sinr_db - self.sinr_threshold_db);
        1.0 / (1.0 + x.exp())
    }

    /// SINR where the BLER curve crosses `bler`.
    pub fn sinr_for_bler(&self, bler: f64) -> f64 {
        self.sinr_threshold_db + ((1.0 - bler) / bler).ln() / self.bler_slope
    }
}

/// Shannon-gap threshold: the SINR where capacity reaches `se`, plus a gap.
pub fn shannon_threshold_db(spectral_efficiency: f64, gap_db: f64) -> f64 {
    10.0 * (2f64.powf(spectral_efficiency) - 1.0).log10() + gap_db
}

/// `floor(SE · n_prb · 12 · data_symbols)`.
pub fn tbs_bits(mcs: &McsEntry, frame: &FrameConfig, data_symbols: u32) -> u64 {
    (mcs.spectral_efficiency * frame.data_resource_elements(data_symbols) as f64).floor() as u64
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    bler: BlerSection,
    entry: Vec<EntryRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlerSection {
    slope_per_db: f64,
    implementation_gap_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRow {
    index: u8,
    modulation_order: u8,
    code_rate_x1024: f64,
    spectral_efficiency: f64,
    sinr_threshold_db: Option<f64>,
}

/// MCS lookup table with a BLER curve per entry.
#[derive(Clone, Debug, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    /// The table shipped in `data/mcs_table.toml`.
    pub fn nr_default() -> Self {
        Self::from_toml_str(DEFAULT_TABLE).expect("bundled MCS table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, PhyError> {
        let text = std::fs::read_to_string(path).map_err(|e| PhyError::TableIo {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, PhyError> {
        let file: TableFile = toml::from_str(text).map_err(|e| PhyError::InvalidTable(e.to_string()))?;
        let slope = file.bler.slope_per_db;
        if !(slope.is_finite() && slope > 0.0) {
            return Err(PhyError::InvalidTable(format!("bler.slope_per_db = {slope}")));
        }
        let entries = file
            .entry
            .iter()
            .map(|row| McsEntry {
                index: row.index,
                modulation_order: row.modulation_order,
                code_rate: row.code_rate_x1024 / 1024.0,
                spectral_efficiency: row.spectral_efficiency,
                sinr_threshold_db: row.sinr_threshold_db.unwrap_or_else(|| {
                    shannon_threshold_db(row.spectral_efficiency, file.bler.implementation_gap_db)
                }),
                bler_slope: slope,
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<McsEntry>) -> Result<Self, PhyError> {
        if entries.is_empty() {
            return Err(PhyError::InvalidTable("table has no entries".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if usize::from(e.index) != i {
                return Err(PhyError::InvalidTable(format!("entry {i} has index {}", e.index)));
            }
            if !(e.spectral_efficiency >= 0.0 && e.bler_slope > 0.0) {
                return Err(PhyError::InvalidTable(format!("entry {i} has invalid parameters")));
            }
        }
        for w in entries.windows(2) {
            if w[1].spectral_efficiency <= w[0].spectral_efficiency {
                return Err(PhyError::InvalidTable(format!(
                    "spectral efficiency not increasing at index {}",
                    w[1].index
                )));
            }
            if w[1].sinr_threshold_db <= w[0].sinr_threshold_db {
                return Err(PhyError::InvalidTable(format!(
                    "SINR threshold not increasing at index {}",
                    w[1].index
                )));
            }
        }
        Ok(McsTable { entries })
    }

    /// Replaces the slope and recomputes Shannon-gap thresholds.
    pub fn with_curve(&self, slope_per_db: f64, gap_db: f64) -> Result<Self, PhyError> {
        let entries = self
            .entries
            .iter()
            .map(|e| McsEntry {
                sinr_threshold_db: shannon_threshold_db(e.spectral_efficiency, gap_db),
                bler_slope: slope_per_db,
                ..*e
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> u8 {
        (self.entries.len() - 1) as u8
    }

    pub fn get(&self, index: u8) -> Result<&McsEntry, PhyError> {
        self.entries
            .get(usize::from(index))
            .ok_or(PhyError::UnknownMcs(index))
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn bler(&self, index: u8, sinr_db: f64) -> Result<f64, PhyError> {
        Ok(self.get(index)?.bler(sinr_db))
    }

    /// Highest index whose BLER at `sinr_db` is at most `target_bler`;
    /// index 0 if none qualifies.
    pub fn amc_select(&self, sinr_db: f64, target_bler: f64) -> u8 {
        // tolerate the rounding of an SINR computed from the inverse curve
        let limit = target_bler * (1.0 + 1e-9);
        self.entries
            .iter()
            .rev()
            .find(|e| e.bler(sinr_db) <= limit)
            .map_or(0, |e| e.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy_mac::frame::Numerology;

    fn n3() -> FrameConfig {
        FrameConfig::new(Numerology::N3, 100e6, 0.05).unwrap()
    }

    #[test]
    fn required_entries_present() {
        let t = McsTable::nr_default();
        assert_eq!(t.len(), 29);
        let e0 = t.get(0).unwrap();
        assert_eq!((e0.modulation_order, e0.spectral_efficiency), (2, 0.2344));
        assert!((e0.code_rate - 120.0 / 1024.0).abs() < 1e-12);
        let e14 = t.get(14).unwrap();
        assert_eq!((e14.modulation_order, e14.spectral_efficiency), (4, 2.4063));
        let e28 = t.get(28).unwrap();
        assert_eq!((e28.modulation_order, e28.spectral_efficiency), (6, 5.5547));
        assert!(t.get(29).is_err());
    }

    #[test]
    fn se_matches_modulation_and_rate() {
        for e in McsTable::nr_default().entries() {
            let se = f64::from(e.modulation_order) * e.code_rate;
            assert!((se - e.spectral_efficiency).abs() < 6e-5, "index {}", e.index);
        }
    }

    #[test]
    fn tbs_examples() {
        let t = McsTable::nr_default();
        assert_eq!(tbs_bits(t.get(0).unwrap(), &n3(), 14), 2599);
        assert_eq!(tbs_bits(t.get(28).unwrap(), &n3(), 14), 61590);
        let zero = McsEntry {
            spectral_efficiency: 0.0,
            ..*t.get(0).unwrap()
        };
        assert_eq!(tbs_bits(&zero, &n3(), 14), 0);
    }

    #[test]
    fn thresholds_follow_shannon_gap() {
        let t = McsTable::nr_default();
        let e14 = t.get(14).unwrap();
        let expected = 10.0 * (2f64.powf(2.4063) - 1.0).log10() + 3.0;
        assert!((e14.sinr_threshold_db - expected).abs() < 1e-12);
    }

    #[test]
    fn bler_midpoint_and_tails() {
        let t = McsTable::nr_default();
        for e in t.entries() {
            assert!((e.bler(e.sinr_threshold_db) - 0.5).abs() < 1e-15);
            assert!(e.bler(e.sinr_threshold_db + 40.0) < 1e-6);
            assert!(e.bler(e.sinr_threshold_db - 40.0) > 1.0 - 1e-6);
            assert_eq!(e.bler(f64::INFINITY), 0.0);
            assert_eq!(e.bler(f64::NEG_INFINITY), 1.0);
        }
    }

    #[test]
    fn bler_ordered_by_index_on_grid() {
        let t = McsTable::nr_default();
        let grid: Vec<f64> = (-400..=600).map(|k| f64::from(k) * 0.1).collect();
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                for &s in &grid {
                    assert!(
                        t.bler(i as u8, s).unwrap() <= t.bler(j as u8, s).unwrap(),
                        "mcs {i} vs {j} at {s} dB"
                    );
                }
            }
        }
    }

    #[test]
    fn amc_floor_and_ceiling() {
        let t = McsTable::nr_default();
        assert_eq!(t.amc_select(-50.0, 0.1), 0);
        assert_eq!(t.amc_select(80.0, 0.1), 28);
    }

    #[test]
    fn amc_at_mcs14_target_point() {
        let t = McsTable::nr_default();
        let e = t.get(14).unwrap();
        // invert the logistic by hand: 0.1 = 1/(1+exp(k(γ-θ)))  →  γ = θ + ln(9)/k
        let sinr = e.sinr_threshold_db + 9f64.ln() / e.bler_slope;
        assert!((sinr - e.sinr_for_bler(0.1)).abs() < 1e-12);
        assert_eq!(t.amc_select(sinr, 0.1), 14);
        assert_eq!(t.amc_select(sinr - 0.01, 0.1), 13);
    }

    #[test]
    fn rejects_non_monotone_table() {
        let text = r#"
            [bler]
            slope_per_db = 2.0
            implementation_gap_db = 3.0
            [[entry]]
            index = 0
            modulation_order = 4
            code_rate_x1024 = 658
            spectral_efficiency = 2.5703
            [[entry]]
            index = 1
            modulation_order = 6
            code_rate_x1024 = 438
            spectral_efficiency = 2.5664
        "#;
        assert!(McsTable::from_toml_str(text).is_err());
    }

    #[test]
    fn threshold_override_and_unknown_keys() {
        let base = "[bler]\nslope_per_db = 1.5\nimplementation_gap_db = 0.0\n";
        let ok = format!(
            "{base}[[entry]]\nindex = 0\nmodulation_order = 2\ncode_rate_x1024 = 120\nspectral_efficiency = 0.2344\nsinr_threshold_db = -7.0\n"
        );
        let t = McsTable::from_toml_str(&ok).unwrap();
        assert_eq!(t.get(0).unwrap().sinr_threshold_db, -7.0);
        assert_eq!(t.get(0).unwrap().bler_slope, 1.5);
        let bad = format!("{ok}colour = 3\n");
        assert!(McsTable::from_toml_str(&bad).is_err());
    }

    proptest::proptest! {
        #[test]
        fn amc_is_monotone_in_sinr(a in -30.0f64..60.0, b in -30.0f64..60.0) {
            let t = McsTable::nr_default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(t.amc_select(lo, 0.1) <= t.amc_select(hi, 0.1));
        }

        #[test]
        fn bler_nonincreasing_in_sinr(idx in 0u8..29, a in -50.0f64..80.0, d in 0.0f64..20.0) {
            let e = *McsTable::nr_default().get(idx).unwrap();
            proptest::prop_assert!(e.bler(a + d) <= e.bler(a));
        }
    }
}

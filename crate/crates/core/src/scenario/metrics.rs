use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Per-run results. Counts cover packets created inside the measurement
/// window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub prr: f64,
    /// Mean creation-to-delivery delay; NaN if nothing was delivered.
    pub mean_delay_s: f64,
    pub min_delay_s: f64,
    pub max_delay_s: f64,
    /// Mean SINR over transport blocks sent in the window.
    pub mean_sinr_db: f64,
    /// Payload bits per second of delivered packets whose last segment was
    /// sent during the window.
    pub throughput_bps: f64,
    /// Payload bits generated during the window, per second.
    pub offered_bps: f64,
    pub generated: u64,
    pub delivered: u64,
    pub phy_lost: u64,
    pub buffer_dropped: u64,
    /// Not fully transmitted when the run ended.
    pub in_flight: u64,
    pub tbs_sent: u64,
    pub tbs_lost: u64,
    /// Transport blocks that overlapped another link's transmission.
    pub interfered_tbs: u64,
    /// Largest aggregate interference seen by any block, if any.
    pub max_interference_dbm: Option<f64>,
    /// Payload-bit ceiling: TBS times owned slots per second, summed over
    /// links, at the largest MCS used.
    pub phy_ceiling_bps: f64,
    pub events: u64,
}

/// Mean with an optional confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub confidence: f64,
    pub prr: Estimate,
    pub delay_s: Estimate,
    pub sinr_db: Estimate,
    pub throughput_bps: Estimate,
    pub offered_bps: Estimate,
    pub generated: u64,
    pub delivered: u64,
    pub phy_lost: u64,
    pub buffer_dropped: u64,
}

/// Student-t half-width for the mean of `values`; `None` below two samples.
pub fn student_t_half_width(values: &[f64], confidence: f64) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = sorted_sum(values) / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = sorted_sum(&dev) / (n - 1) as f64;
    if var == 0.0 {
        return Some(0.0);
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("df >= 1")
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    Some(t * (var / n as f64).sqrt())
}

/// Summation in sorted order so results do not depend on run order.
fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn estimate(values: impl Iterator<Item = f64>, confidence: f64) -> Estimate {
    let finite: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    let n = finite.len();
    let mean = if n == 0 { f64::NAN } else { sorted_sum(&finite) / n as f64 };
    Estimate {
        mean,
        half_width: student_t_half_width(&finite, confidence),
        n,
    }
}

/// Across-run mean and Student-t interval per metric. NaN values (e.g. the
/// delay of a run that delivered nothing) are left out of that metric.
pub fn aggregate(runs: &[RunMetrics], confidence: f64) -> Aggregate {
    Aggregate {
        runs: runs.len(),
        confidence,
        prr: estimate(runs.iter().map(|r| r.prr), confidence),
        delay_s: estimate(runs.iter().map(|r| r.mean_delay_s), confidence),
        sinr_db: estimate(runs.iter().map(|r| r.mean_sinr_db), confidence),
        throughput_bps: estimate(runs.iter().map(|r| r.throughput_bps), confidence),
        offered_bps: estimate(runs.iter().map(|r| r.offered_bps), confidence),
        generated: runs.iter().map(|r| r.generated).sum(),
        delivered: runs.iter().map(|r| r.delivered).sum(),
        phy_lost: runs.iter().map(|r| r.phy_lost).sum(),
        buffer_dropped: runs.iter().map(|r| r.buffer_dropped).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(prr: f64) -> RunMetrics {
        RunMetrics {
            prr,
            mean_delay_s: 1e-3,
            min_delay_s: 1e-3,
            max_delay_s: 1e-3,
            mean_sinr_db: 20.0,
            throughput_bps: 8e5,
            offered_bps: 8e5,
            generated: 10,
            delivered: 9,
            phy_lost: 1,
            buffer_dropped: 0,
            in_flight: 0,
            tbs_sent: 10,
            tbs_lost: 1,
            interfered_tbs: 0,
            max_interference_dbm: None,
            phy_ceiling_bps: 1e7,
            events: 0,
        }
    }

    #[test]
    fn two_sample_interval() {
        // s = 0.1414, t(0.975, 1) = 12.7062
        let a = aggregate(&[run(0.8), run(1.0)], 0.95);
        assert!((a.prr.mean - 0.9).abs() < 1e-12);
        let expected = 12.706_204_736 * 0.1;
        assert!((a.prr.half_width.unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn identical_runs_have_zero_width() {
        let a = aggregate(&[run(0.5), run(0.5), run(0.5)], 0.95);
        assert_eq!(a.prr.half_width, Some(0.0));
    }

    #[test]
    fn single_run_has_no_interval() {
        let a = aggregate(&[run(0.5)], 0.95);
        assert_eq!(a.prr.half_width, None);
        assert_eq!(a.prr.mean, 0.5);
    }

    #[test]
    fn nan_delays_skipped() {
        let mut r = run(0.0);
        r.mean_delay_s = f64::NAN;
        let a = aggregate(&[r, run(1.0)], 0.95);
        assert_eq!(a.delay_s.n, 1);
        assert_eq!(a.delay_s.mean, 1e-3);
    }

    proptest::proptest! {
        #[test]
        fn order_independent(mut v in proptest::collection::vec(0.0f64..1.0, 2..30), rot in 0usize..30) {
            let runs: Vec<RunMetrics> = v.iter().map(|&p| run(p)).collect();
            let a = aggregate(&runs, 0.95);
            let k = rot % v.len();
            v.rotate_left(k);
            v.reverse();
            let runs2: Vec<RunMetrics> = v.iter().map(|&p| run(p)).collect();
            let b = aggregate(&runs2, 0.95);
            proptest::prop_assert_eq!(a.prr.mean.to_bits(), b.prr.mean.to_bits());
            proptest::prop_assert_eq!(a.prr.half_width.unwrap().to_bits(), b.prr.half_width.unwrap().to_bits());
        }
    }
}

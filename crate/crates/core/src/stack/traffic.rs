use serde::{Deserialize, Serialize};

use super::StackError;
use crate::engine::{RngStream, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrafficSource {
    Cbr {
        rate_bps: f64,
        packet_bytes: u32,
    },
    OnOff {
        rate_bps: f64,
        packet_bytes: u32,
        #[serde(default = "default_on_s")]
        on_s: f64,
        #[serde(default = "default_off_mean_s")]
        off_mean_s: f64,
    },
}

fn default_on_s() -> f64 {
    0.1
}

fn default_off_mean_s() -> f64 {
    0.1
}

impl TrafficSource {
    pub fn cbr(rate_bps: f64, packet_bytes: u32) -> Self {
        TrafficSource::Cbr { rate_bps, packet_bytes }
    }

    pub fn on_off(rate_bps: f64, packet_bytes: u32) -> Self {
        TrafficSource::OnOff {
            rate_bps,
            packet_bytes,
            on_s: default_on_s(),
            off_mean_s: default_off_mean_s(),
        }
    }

    pub fn rate_bps(&self) -> f64 {
        match *self {
            TrafficSource::Cbr { rate_bps, .. } | TrafficSource::OnOff { rate_bps, .. } => rate_bps,
        }
    }

    pub fn packet_bytes(&self) -> u32 {
        match *self {
            TrafficSource::Cbr { packet_bytes, .. } | TrafficSource::OnOff { packet_bytes, .. } => packet_bytes,
        }
    }

    pub fn validate(&self) -> Result<(), StackError> {
        let rate = self.rate_bps();
        if !(rate.is_finite() && rate > 0.0) {
            return Err(StackError::InvalidRate(rate));
        }
        if self.packet_bytes() == 0 {
            return Err(StackError::InvalidPacketSize);
        }
        if let TrafficSource::OnOff { on_s, off_mean_s, .. } = *self {
            if !(on_s > 0.0 && off_mean_s > 0.0 && on_s.is_finite() && off_mean_s.is_finite()) {
                return Err(StackError::InvalidOnOff { on_s, off_mean_s });
            }
        }
        Ok(())
    }

    /// Gap between consecutive packets while the source is active, rounded
    /// to the nanosecond.
    pub fn interval(&self) -> SimTime {
        let bits = f64::from(self.packet_bytes()) * 8.0;
        SimTime::from_nanos((bits * 1e9 / self.rate_bps()).round().max(1.0) as u64)
    }
}

/// Produces packet creation instants for one source.
///
/// ON/OFF sources start in an OFF period so that independent sources are
/// not phase-locked at t = 0.
#[derive(Clone, Debug)]
pub struct TrafficGenerator {
    source: TrafficSource,
    interval: SimTime,
    next: SimTime,
    on_end: SimTime,
    rng: RngStream,
}

impl TrafficGenerator {
    pub fn new(source: TrafficSource, start: SimTime, mut rng: RngStream) -> Result<Self, StackError> {
        source.validate()?;
        let interval = source.interval();
        let (next, on_end) = match source {
            TrafficSource::Cbr { .. } => (start, SimTime::MAX),
            TrafficSource::OnOff { on_s, off_mean_s, .. } => {
                let on_start = start + secs(rng.exponential(off_mean_s));
                (on_start, on_start + secs(on_s))
            }
        };
        Ok(TrafficGenerator {
            source,
            interval,
            next,
            on_end,
            rng,
        })
    }

    pub fn source(&self) -> &TrafficSource {
        &self.source
    }

    /// Creation time of the next packet without consuming it.
    pub fn peek(&self) -> SimTime {
        self.next
    }

    /// Returns the next creation time and advances.
    pub fn next_packet(&mut self) -> SimTime {
        let t = self.next;
        let mut candidate = t + self.interval;
        if let TrafficSource::OnOff { on_s, off_mean_s, .. } = self.source {
            if candidate >= self.on_end {
                let on_start = self.on_end + secs(self.rng.exponential(off_mean_s));
                self.on_end = on_start + secs(on_s);
                candidate = on_start;
            }
        }
        self.next = candidate;
        t
    }
}

fn secs(s: f64) -> SimTime {
    SimTime::from_secs_f64(s).unwrap_or(SimTime::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbr_spacing_is_exact() {
        let mut g = TrafficGenerator::new(TrafficSource::cbr(800e3, 100), SimTime::ZERO, RngStream::new(1, "t")).unwrap();
        let times: Vec<u64> = (0..5).map(|_| g.next_packet().as_nanos()).collect();
        assert_eq!(times, vec![0, 1_000_000, 2_000_000, 3_000_000, 4_000_000]);
    }

    #[test]
    fn rejects_bad_sources() {
        let rng = || RngStream::new(1, "t");
        assert_eq!(
            TrafficGenerator::new(TrafficSource::cbr(0.0, 100), SimTime::ZERO, rng()).err(),
            Some(StackError::InvalidRate(0.0))
        );
        assert!(TrafficGenerator::new(TrafficSource::cbr(-5.0, 100), SimTime::ZERO, rng()).is_err());
        assert_eq!(
            TrafficGenerator::new(TrafficSource::cbr(1e6, 0), SimTime::ZERO, rng()).err(),
            Some(StackError::InvalidPacketSize)
        );
    }

    #[test]
    fn on_off_duty_cycle() {
        // renewal argument: E[on]/(E[on]+E[off]) = 0.5
        let src = TrafficSource::on_off(1e6, 125); // 1 ms spacing, 100 per ON period
        let mut g = TrafficGenerator::new(src, SimTime::ZERO, RngStream::new(42, "traffic")).unwrap();
        let horizon = SimTime::from_millis(10_000 * 200);
        let mut n = 0u64;
        while g.next_packet() < horizon {
            n += 1;
        }
        let offered = n as f64 * 125.0 * 8.0 / horizon.as_secs_f64();
        let ratio = offered / 1e6;
        assert!((ratio - 0.5).abs() < 0.5 * 0.02, "duty {ratio}");
    }

    #[test]
    fn on_periods_are_cbr_bursts() {
        let src = TrafficSource::on_off(8e6, 100); // 100 us
        let mut g = TrafficGenerator::new(src, SimTime::ZERO, RngStream::new(3, "traffic")).unwrap();
        let times: Vec<SimTime> = (0..3000).map(|_| g.next_packet()).collect();
        let mut bursts = vec![vec![times[0]]];
        for w in times.windows(2) {
            if (w[1] - w[0]) == SimTime::from_micros(100) {
                bursts.last_mut().unwrap().push(w[1]);
            } else {
                assert!(w[1] > w[0]);
                bursts.push(vec![w[1]]);
            }
        }
        // 100 ms at 100 us spacing: exactly 1000 packets per complete burst
        for b in &bursts[..bursts.len() - 1] {
            assert_eq!(b.len(), 1000);
        }
    }
}

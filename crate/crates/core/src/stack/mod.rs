//! Application sources, PDCP numbering, IP/UDP overhead and RLC
//! unacknowledged mode (segmentation on the way down, reordering and
//! reassembly on the way up).

mod pdcp;
mod rlc_rx;
mod rlc_tx;
mod traffic;

use serde::{Deserialize, Serialize};

pub use pdcp::PdcpEntity;
pub use rlc_rx::{RlcRxState, RxStats};
pub use rlc_tx::{rlc_tx_fill, RlcTxBuffer, SduRecord};
pub use traffic::{TrafficGenerator, TrafficSource};

use crate::engine::SimTime;

/// Sequence numbers are `SN_BITS` wide; the reordering window is half the
/// SN space.
pub const SN_BITS: u32 = 10;
pub const SN_MODULUS: u16 = 1 << SN_BITS;
pub const UM_WINDOW: u16 = SN_MODULUS / 2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StackError {
    #[error("traffic rate must be positive, got {0} bit/s")]
    InvalidRate(f64),
    #[error("packet size must be positive")]
    InvalidPacketSize,
    #[error("ON/OFF durations must be positive, got on {on_s} s, off mean {off_mean_s} s")]
    InvalidOnOff { on_s: f64, off_mean_s: f64 },
    #[error("reordering timer must be positive, got {0} ms")]
    InvalidReorderingTimer(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppPacket {
    pub packet_id: u64,
    pub payload_bytes: u32,
    pub created_at: SimTime,
    pub delivered_at: Option<SimTime>,
}

/// Per-layer header sizes in bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Headers {
    pub udp: u32,
    pub ip: u32,
    pub pdcp: u32,
    pub rlc_base: u32,
    pub rlc_per_extra_segment: u32,
}

impl Default for Headers {
    fn default() -> Self {
        Headers {
            udp: 8,
            ip: 20,
            pdcp: 3,
            rlc_base: 2,
            rlc_per_extra_segment: 1,
        }
    }
}

impl Headers {
    pub const NONE: Headers = Headers {
        udp: 0,
        ip: 0,
        pdcp: 0,
        rlc_base: 0,
        rlc_per_extra_segment: 0,
    };

    /// Size of the RLC SDU handed down by PDCP.
    pub fn sdu_bytes(&self, payload_bytes: u32) -> u32 {
        payload_bytes + self.udp + self.ip + self.pdcp
    }

    /// RLC header of a PDU carrying `segments` segments.
    pub fn rlc_header(&self, segments: usize) -> u32 {
        if segments == 0 {
            return 0;
        }
        self.rlc_base + self.rlc_per_extra_segment * (segments as u32 - 1)
    }
}

/// Bytes on air for a payload sent as a single-segment PDU.
pub fn add_headers(payload_bytes: u32, headers: &Headers) -> u32 {
    headers.sdu_bytes(payload_bytes) + headers.rlc_header(1)
}

/// A contiguous byte range of one SDU carried in a PDU.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub packet_id: u64,
    pub start: u32,
    pub end: u32,
    pub is_last: bool,
}

impl Segment {
    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlcPdu {
    pub sequence_number: u16,
    pub segments: Vec<Segment>,
    pub header_bytes: u32,
}

impl RlcPdu {
    pub fn size_bytes(&self) -> u32 {
        self.header_bytes + self.segments.iter().map(Segment::len).sum::<u32>()
    }
}

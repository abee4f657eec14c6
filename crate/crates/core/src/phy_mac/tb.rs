use crate::engine::{RngStream, SimTime};
use crate::stack::RlcPdu;

/// One PHY transmission of a link in one slot.
#[derive(Clone, Debug)]
pub struct TransportBlock {
    pub link: usize,
    pub slot_start: SimTime,
    pub mcs: u8,
    pub size_bits: u64,
    pub pdus: Vec<RlcPdu>,
    pub sinr_db: f64,
}

impl TransportBlock {
    pub fn payload_bits(&self) -> u64 {
        self.pdus.iter().map(|p| p.size_bytes() as u64 * 8).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxOutcome {
    Delivered,
    Lost,
}

/// Decides the fate of a whole transport block. There is no HARQ: a lost
/// block is never retransmitted and every PDU in it is gone.
pub fn transmit_slot(bler: f64, rng: &mut RngStream) -> TxOutcome {
    // one draw per block, even for degenerate probabilities, so the error
    // stream stays aligned across configurations
    let u = rng.uniform();
    if u < bler {
        TxOutcome::Lost
    } else {
        TxOutcome::Delivered
    }
}

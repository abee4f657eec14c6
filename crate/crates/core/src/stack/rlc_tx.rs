use std::collections::VecDeque;

use super::{Headers, RlcPdu, Segment, SN_MODULUS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SduRecord {
    pub packet_id: u64,
    pub size_bytes: u32,
    /// Bytes already sent in earlier PDUs.
    pub offset: u32,
}

/// RLC UM transmit side: a FIFO of SDUs with a byte budget and tail drop.
#[derive(Clone, Debug)]
pub struct RlcTxBuffer {
    queue: VecDeque<SduRecord>,
    capacity_bytes: u64,
    buffered_bytes: u64,
    next_sn: u16,
    headers: Headers,
}

impl RlcTxBuffer {
    pub fn new(capacity_bytes: u64, headers: Headers) -> Self {
        RlcTxBuffer {
            queue: VecDeque::new(),
            capacity_bytes,
            buffered_bytes: 0,
            next_sn: 0,
            headers,
        }
    }

    /// Queues an SDU; returns false (and drops it) if it does not fit.
    pub fn enqueue(&mut self, packet_id: u64, size_bytes: u32) -> bool {
        if self.buffered_bytes + u64::from(size_bytes) > self.capacity_bytes {
            return false;
        }
        self.buffered_bytes += u64::from(size_bytes);
        self.queue.push_back(SduRecord {
            packet_id,
            size_bytes,
            offset: 0,
        });
        true
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn buffered_bytes(&self) -> u64 {
        self.buffered_bytes
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    /// SDUs not yet fully transmitted, head first.
    pub fn iter(&self) -> impl Iterator<Item = &SduRecord> {
        self.queue.iter()
    }

    pub fn next_sn(&self) -> u16 {
        self.next_sn
    }

    pub fn headers(&self) -> &Headers {
        &self.headers
    }
}

/// Builds at most one PDU that fits `tb_capacity_bits`, segmenting the head
/// SDU and concatenating following ones. An empty buffer, or a TB too
/// small for a header plus one byte, yields nothing and consumes no SN.
pub fn rlc_tx_fill(tb_capacity_bits: u64, buf: &mut RlcTxBuffer) -> Option<RlcPdu> {
    let capacity = tb_capacity_bits / 8;
    let h = buf.headers;
    let mut segments: Vec<Segment> = Vec::new();
    let mut used = 0u64;
    while let Some(head) = buf.queue.front_mut() {
        let header = u64::from(h.rlc_header(segments.len() + 1));
        if used + header >= capacity {
            break;
        }
        let room = capacity - header - used;
        let remaining = u64::from(head.size_bytes - head.offset);
        let take = room.min(remaining) as u32;
        let start = head.offset;
        head.offset += take;
        used += u64::from(take);
        buf.buffered_bytes -= u64::from(take);
        let done = head.offset == head.size_bytes;
        segments.push(Segment {
            packet_id: head.packet_id,
            start,
            end: start + take,
            is_last: done,
        });
        if done {
            buf.queue.pop_front();
        } else {
            break;
        }
    }
    if segments.is_empty() {
        return None;
    }
    let sn = buf.next_sn;
    buf.next_sn = (buf.next_sn + 1) % SN_MODULUS;
    Some(RlcPdu {
        sequence_number: sn,
        header_bytes: h.rlc_header(segments.len()),
        segments,
    })
}

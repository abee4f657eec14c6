use crate::engine::SimTime;

use super::{RlcPdu, SN_MODULUS, UM_WINDOW};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RxStats {
    pub pdus_received: u64,
    pub duplicates: u64,
    /// PDUs that fell outside the feasible window.
    pub out_of_window: u64,
    /// SDUs abandoned because some segment never arrived.
    pub incomplete_sdus: u64,
}

#[derive(Clone, Debug)]
struct Partial {
    packet_id: u64,
    next_byte: u32,
}

/// RLC UM receiver: reordering window with UR/UX/UH state variables and a
/// single t-Reordering timer.
#[derive(Clone, Debug)]
pub struct RlcRxState {
    /// VR(UR): earliest SN still waited for.
    expected_sn: u16,
    /// VR(UX): SN following the one that started the timer.
    timer_trigger_sn: u16,
    /// VR(UH): one past the highest SN received.
    highest_sn: u16,
    buffer: Vec<Option<RlcPdu>>,
    t_reordering: SimTime,
    timer_deadline: Option<SimTime>,
    partial: Option<Partial>,
    last_abandoned: Option<u64>,
    stats: RxStats,
}

impl RlcRxState {
    pub fn new(t_reordering: SimTime) -> Self {
        RlcRxState {
            expected_sn: 0,
            timer_trigger_sn: 0,
            highest_sn: 0,
            buffer: vec![None; usize::from(SN_MODULUS)],
            t_reordering,
            timer_deadline: None,
            partial: None,
            last_abandoned: None,
            stats: RxStats::default(),
        }
    }

    pub fn expected_sn(&self) -> u16 {
        self.expected_sn
    }

    pub fn highest_sn(&self) -> u16 {
        self.highest_sn
    }

    pub fn timer_running(&self) -> bool {
        self.timer_deadline.is_some()
    }

    pub fn timer_deadline(&self) -> Option<SimTime> {
        self.timer_deadline
    }

    pub fn stats(&self) -> RxStats {
        self.stats
    }

    /// Offset of `sn` from the lower window edge VR(UH) − W.
    fn rel(&self, sn: u16) -> u16 {
        let base = (self.highest_sn + SN_MODULUS - UM_WINDOW) % SN_MODULUS;
        (sn + SN_MODULUS - base) % SN_MODULUS
    }

    fn in_window(&self, sn: u16) -> bool {
        self.rel(sn) < UM_WINDOW
    }

    fn slot(sn: u16) -> usize {
        usize::from(sn % SN_MODULUS)
    }

    /// Handles one received PDU at `now` and returns the packet ids of SDUs
    /// completed by it, in order. An expired timer is serviced first, so a
    /// deadline equal to `now` fires before the arrival is processed.
    pub fn receive(&mut self, pdu: RlcPdu, now: SimTime) -> Vec<u64> {
        let mut out = self.poll_timer(now);
        self.stats.pdus_received += 1;
        let x = pdu.sequence_number % SN_MODULUS;
        let rx = self.rel(x);
        let (ur, uh) = (self.rel(self.expected_sn), self.rel(self.highest_sn));

        if rx < ur {
            // below VR(UR) but inside the window: already passed over
            self.stats.out_of_window += 1;
            return out;
        }
        if rx < uh && self.buffer[Self::slot(x)].is_some() {
            self.stats.duplicates += 1;
            return out;
        }
        self.buffer[Self::slot(x)] = Some(pdu);

        if !self.in_window(x) {
            self.highest_sn = (x + 1) % SN_MODULUS;
            // release everything that slid below the new lower edge
            let edge = (self.highest_sn + SN_MODULUS - UM_WINDOW) % SN_MODULUS;
            if !self.in_window(self.expected_sn) {
                self.release_below(edge, &mut out);
                self.expected_sn = edge;
            }
        }
        if self.buffer[Self::slot(self.expected_sn)].is_some() {
            let mut ur = self.expected_sn;
            while self.buffer[Self::slot(ur)].is_some() && self.rel(ur) < self.rel(self.highest_sn) {
                ur = (ur + 1) % SN_MODULUS;
            }
            self.release_below(ur, &mut out);
            self.expected_sn = ur;
        }

        if self.timer_deadline.is_some() {
            let ux = self.rel(self.timer_trigger_sn);
            let stop = ux <= self.rel(self.expected_sn)
                || (!self.in_window(self.timer_trigger_sn) && self.timer_trigger_sn != self.highest_sn);
            if stop {
                self.timer_deadline = None;
            }
        }
        if self.timer_deadline.is_none() && self.rel(self.highest_sn) > self.rel(self.expected_sn) {
            self.timer_deadline = Some(now + self.t_reordering);
            self.timer_trigger_sn = self.highest_sn;
        }
        out
    }

    /// Fires t-Reordering if its deadline is at or before `now`. Returns the
    /// SDUs released; their delivery instant is the deadline itself.
    pub fn poll_timer(&mut self, now: SimTime) -> Vec<u64> {
        let mut out = Vec::new();
        while let Some(deadline) = self.timer_deadline.filter(|&d| d <= now) {
            self.timer_deadline = None;
            let mut ur = self.timer_trigger_sn;
            while self.buffer[Self::slot(ur)].is_some() && self.rel(ur) < self.rel(self.highest_sn) {
                ur = (ur + 1) % SN_MODULUS;
            }
            // UR only moves forward
            if self.rel(ur) > self.rel(self.expected_sn) {
                self.release_below(ur, &mut out);
                self.expected_sn = ur;
            }
            if self.rel(self.highest_sn) > self.rel(self.expected_sn) {
                self.timer_deadline = Some(deadline + self.t_reordering);
                self.timer_trigger_sn = self.highest_sn;
            }
        }
        out
    }

    /// Reassembles buffered PDUs from VR(UR) up to `edge` in SN order,
    /// dropping SDUs that miss a segment. The span is a plain modular
    /// distance because VR(UH) may already have moved past the old window.
    fn release_below(&mut self, edge: u16, out: &mut Vec<u64>) {
        let mut sn = self.expected_sn;
        let span = (edge + SN_MODULUS - self.expected_sn) % SN_MODULUS;
        for _ in 0..span {
            match self.buffer[Self::slot(sn)].take() {
                Some(pdu) => self.reassemble(&pdu, out),
                None => self.abandon_partial(),
            }
            sn = (sn + 1) % SN_MODULUS;
        }
    }

    fn abandon_partial(&mut self) {
        if let Some(p) = self.partial.take() {
            self.stats.incomplete_sdus += 1;
            self.last_abandoned = Some(p.packet_id);
        }
    }

    fn reassemble(&mut self, pdu: &RlcPdu, out: &mut Vec<u64>) {
        for seg in &pdu.segments {
            let continues = matches!(
                &self.partial,
                Some(p) if p.packet_id == seg.packet_id && p.next_byte == seg.start
            );
            if !continues {
                self.abandon_partial();
                if seg.start != 0 {
                    // tail of an SDU whose head was lost
                    if self.last_abandoned != Some(seg.packet_id) {
                        self.stats.incomplete_sdus += 1;
                        self.last_abandoned = Some(seg.packet_id);
                    }
                    continue;
                }
            }
            if seg.is_last {
                self.partial = None;
                out.push(seg.packet_id);
            } else {
                self.partial = Some(Partial {
                    packet_id: seg.packet_id,
                    next_byte: seg.end,
                });
            }
        }
    }
}

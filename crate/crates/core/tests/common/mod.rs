//! Shared fixtures for the integration tests: a random RLC trace generator
//! and a reference UM receiver working on unwrapped sequence numbers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2vsim::engine::SimTime;
use v2vsim::stack::{rlc_tx_fill, Headers, RlcPdu, RlcRxState, RlcTxBuffer, UM_WINDOW};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// PDU arrivals at the receiver, sorted by time (ties keep send order).
#[derive(Clone, Debug)]
pub struct RlcTrace {
    pub t_reordering: SimTime,
    /// (arrival time, unwrapped SN, PDU)
    pub arrivals: Vec<(SimTime, u64, RlcPdu)>,
    /// Unwrapped SNs carrying each SDU, by packet id.
    pub sdu_pdus: BTreeMap<u64, Vec<u64>>,
    pub sent_pdus: u64,
}

/// Random SDU sizes and TB capacities, bursty whole-PDU loss, occasional
/// late and duplicated PDUs. Loss bursts stay well below the window.
pub fn random_trace(seed: u64) -> RlcTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = SimTime::from_micros(125);
    let n_sdus: u64 = if rng.random_bool(0.2) { rng.random_range(600..1600) } else { rng.random_range(1..250) };
    let max_sdu = *[40u32, 200, 1500].get(rng.random_range(0..3)).unwrap();
    let mut tx = RlcTxBuffer::new(u64::MAX, Headers::default());
    for id in 0..n_sdus {
        tx.enqueue(id, rng.random_range(1..=max_sdu));
    }
    let t_reordering = match rng.random_range(0..4) {
        0 => SimTime::from_millis(*[1u64, 10, 50, 100].get(rng.random_range(0..4)).unwrap()),
        1 => SimTime::from_nanos(slot.as_nanos() * rng.random_range(1..8)),
        _ => SimTime::from_micros(rng.random_range(100..20_000)),
    };
    let p_enter_burst = rng.random_range(0.0..0.08);
    let p_leave_burst = rng.random_range(0.05..1.0);
    let p_late = if rng.random_bool(0.5) { rng.random_range(0.0..0.1) } else { 0.0 };
    let p_dup = if rng.random_bool(0.3) { rng.random_range(0.0..0.05) } else { 0.0 };

    let mut sdu_pdus: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut arrivals = Vec::new();
    let mut t = SimTime::ZERO;
    let mut sn: u64 = 0;
    let mut in_burst = false;
    let mut burst_len = 0;
    loop {
        let cap_bytes: u64 = rng.random_range(4..1200);
        let Some(pdu) = rlc_tx_fill(cap_bytes * 8, &mut tx) else {
            if tx.is_empty() {
                break;
            }
            continue;
        };
        for s in &pdu.segments {
            sdu_pdus.entry(s.packet_id).or_default().push(sn);
        }
        in_burst = if in_burst { !rng.random_bool(p_leave_burst) } else { rng.random_bool(p_enter_burst) };
        if in_burst && burst_len >= 400 {
            in_burst = false;
        }
        burst_len = if in_burst { burst_len + 1 } else { 0 };
        if !in_burst {
            let mut at = t + slot;
            if rng.random_bool(p_late) {
                at += SimTime::from_nanos(slot.as_nanos() * rng.random_range(1..4));
            }
            arrivals.push((at, sn, pdu.clone()));
            if rng.random_bool(p_dup) {
                let again = at + SimTime::from_nanos(slot.as_nanos() * rng.random_range(0..3));
                arrivals.push((again, sn, pdu));
            }
        }
        sn += 1;
        // idle slots now and then
        let gap = if rng.random_bool(0.1) { rng.random_range(1..40) } else { 1 };
        t += SimTime::from_nanos(slot.as_nanos() * gap);
    }
    arrivals.sort_by_key(|a| a.0);
    RlcTrace {
        t_reordering,
        arrivals,
        sdu_pdus,
        sent_pdus: sn,
    }
}

/// Drives the real receiver over a trace. A timer deadline fires before an
/// arrival at the same instant.
pub fn run_receiver(trace: &RlcTrace) -> Vec<(u64, SimTime)> {
    let mut rx = RlcRxState::new(trace.t_reordering);
    let mut out = Vec::new();
    let fire_until = |rx: &mut RlcRxState, t: Option<SimTime>, out: &mut Vec<(u64, SimTime)>| {
        while let Some(d) = rx.timer_deadline().filter(|&d| t.is_none_or(|t| d <= t)) {
            out.extend(rx.poll_timer(d).into_iter().map(|id| (id, d)));
        }
    };
    for (t, _, pdu) in &trace.arrivals {
        fire_until(&mut rx, Some(*t), &mut out);
        out.extend(rx.receive(pdu.clone(), *t).into_iter().map(|id| (id, *t)));
    }
    fire_until(&mut rx, None, &mut out);
    out
}

/// Reference UM receiver on unbounded SNs. It tracks when each SN is
/// released past the lower edge and whether it was held at that moment; an
/// SDU counts as delivered when every PDU carrying it was held, at the
/// release time of its last PDU.
pub fn reference_receiver(trace: &RlcTrace) -> Vec<(u64, SimTime)> {
    let w = u64::from(UM_WINDOW);
    let mut held: BTreeSet<u64> = BTreeSet::new();
    let mut released: BTreeMap<u64, SimTime> = BTreeMap::new();
    let (mut ur, mut ux, mut uh) = (0u64, 0u64, 0u64);
    let mut deadline: Option<SimTime> = None;

    let mut advance = |to: u64, at: SimTime, ur: &mut u64, held: &mut BTreeSet<u64>| {
        for s in *ur..to {
            if held.remove(&s) {
                released.insert(s, at);
            }
        }
        *ur = (*ur).max(to);
    };
    let first_missing = |from: u64, held: &BTreeSet<u64>, uh: u64| (from..uh).find(|s| !held.contains(s)).unwrap_or(uh);

    let mut idx = 0;
    let arrivals = &trace.arrivals;
    loop {
        let next_arrival = arrivals.get(idx).map(|a| a.0);
        let timer_first = match (deadline, next_arrival) {
            (Some(d), Some(a)) => d <= a,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if timer_first {
            let d = deadline.take().unwrap();
            let to = first_missing(ux, &held, uh);
            if to > ur {
                advance(to, d, &mut ur, &mut held);
            }
            if uh > ur {
                deadline = Some(d + trace.t_reordering);
                ux = uh;
            }
            continue;
        }
        let (t, x, _) = &arrivals[idx];
        let (t, x) = (*t, *x);
        idx += 1;
        if x < ur || held.contains(&x) {
            continue;
        }
        held.insert(x);
        if x >= uh {
            uh = x + 1;
            let lower = uh.saturating_sub(w);
            if ur < lower {
                advance(lower, t, &mut ur, &mut held);
            }
        }
        if held.contains(&ur) {
            let to = first_missing(ur, &held, uh);
            advance(to, t, &mut ur, &mut held);
        }
        if deadline.is_some() && (ux <= ur || (ux < uh.saturating_sub(w) && ux != uh)) {
            deadline = None;
        }
        if deadline.is_none() && uh > ur {
            deadline = Some(t + trace.t_reordering);
            ux = uh;
        }
    }

    let mut out: Vec<(u64, SimTime)> = trace
        .sdu_pdus
        .iter()
        .filter(|(_, sns)| sns.iter().all(|s| released.contains_key(s)))
        .map(|(&id, sns)| (id, released[sns.last().unwrap()]))
        .collect();
    out.sort_by_key(|&(id, t)| (t, id));
    out
}

/// Compares the receiver against the reference on one trace.
pub fn check_trace(seed: u64) -> Result<(), String> {
    let trace = random_trace(seed);
    let got = run_receiver(&trace);
    let want = reference_receiver(&trace);
    if got == want {
        Ok(())
    } else {
        let first = got.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(got.len().min(want.len()));
        Err(format!(
            "trace {seed}: {} vs {} deliveries, first difference at {first}: {:?} vs {:?}",
            got.len(),
            want.len(),
            got.get(first),
            want.get(first)
        ))
    }
}

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::time::SimTime;
use super::EngineError;

/// Handle returned by [`Scheduler::schedule`]; used to cancel the event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Entry<E> {
    time: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed: BinaryHeap is a max-heap, we pop the earliest (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Deterministic event queue with virtual time.
///
/// Events fire in nondecreasing time order; events at the same instant fire
/// in insertion order. Cancelled events are dropped lazily when they reach
/// the head of the queue.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
    cancelled: HashSet<u64>,
    fired: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            fired: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Total number of events executed so far.
    pub fn fired(&self) -> u64 {
        self.fired
    }

    /// Number of pending (possibly cancelled) entries.
    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    /// Schedules `event` after `delay_secs` seconds of virtual time.
    pub fn schedule(&mut self, delay_secs: f64, event: E) -> Result<EventHandle, EngineError> {
        let delay = SimTime::from_secs_f64(delay_secs).ok_or(EngineError::InvalidDelay(delay_secs))?;
        Ok(self.schedule_in(delay, event))
    }

    pub fn schedule_in(&mut self, delay: SimTime, event: E) -> EventHandle {
        let at = self.now + delay;
        self.push(at, event)
    }

    /// Schedules at an absolute time, which must not be in the past.
    pub fn schedule_at(&mut self, at: SimTime, event: E) -> Result<EventHandle, EngineError> {
        if at < self.now {
            return Err(EngineError::InPast { at, now: self.now });
        }
        Ok(self.push(at, event))
    }

    fn push(&mut self, time: SimTime, event: E) -> EventHandle {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time, seq, event });
        EventHandle(seq)
    }

    /// Cancels a pending event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq {
            return false;
        }
        if !self.heap.iter().any(|e| e.seq == handle.0) {
            return false;
        }
        self.cancelled.insert(handle.0)
    }

    /// Pops the next live event with `time <= t_end`, advancing the clock to
    /// its fire time.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        loop {
            let head = self.heap.peek()?;
            if head.time > t_end {
                return None;
            }
            let entry = self.heap.pop().expect("peeked entry");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.time >= self.now);
            self.now = entry.time;
            self.fired += 1;
            return Some((entry.time, entry.event));
        }
    }

    /// Executes every event with fire time `<= t_end`, then sets the clock to
    /// `t_end`. Returns the number of events fired by this call.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        let before = self.fired;
        while let Some((t, ev)) = self.pop_until(t_end) {
            handler(self, t, ev);
        }
        self.advance_to(t_end);
        self.fired - before
    }

    /// Moves the clock forward without firing anything. Never moves it back.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }
}

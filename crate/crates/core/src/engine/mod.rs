//! Discrete-event core: virtual time, an ordered event queue with
//! cancellation, and label-addressed random streams.

mod queue;
mod rng;
mod time;

pub use queue::{EventHandle, Scheduler};
pub use rng::{RngStream, Streams};
pub use time::SimTime;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EngineError {
    #[error("invalid delay {0}: must be finite and non-negative")]
    InvalidDelay(f64),
    #[error("cannot schedule at {at}, current time is {now}")]
    InPast { at: SimTime, now: SimTime },
}

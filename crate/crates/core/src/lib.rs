//! Detection of memory between events in point-process time series.
//!
//! The toolkit ages an inter-event sequence at many observation time-scales,
//! compares the aged originals against aged shuffles with two-sample tests,
//! and aggregates the resulting p-values into per-age geometric means and a
//! global renewal verdict. Synthetic generators for renewal and non-renewal
//! processes support validation of every step.

pub mod aging;
pub mod error;
pub mod events;
pub mod generators;
pub mod meta;
pub mod plot;
pub mod report;
pub mod rng;
pub mod single;
pub mod two_sample;
pub mod xa;

pub use error::{Error, Result};
pub use events::{EventSequence, InterArrivalSequence};
pub use rng::RngHandle;

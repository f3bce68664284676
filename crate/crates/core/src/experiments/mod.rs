//! Experiment runners built on the library: the redundancy sweep, the index
//! law fit, the straight-line mixture demo and the invariant checklist.

mod index_law;
mod straightline;
mod sweep;
mod verify;

pub use index_law::{geometric_gof, sample_indices, two_sample, ChiSquareTest};
pub use straightline::{
    slope_scan, straightline_demo, DemoMode, LinearSegment, SlopeScanOptions, StraightLineError,
    StraightLineReport, StraightLineRow, StraightLineScheme,
};
pub use sweep::{
    normalized_redundancy, redundancy_sweep, roundtrips, RoundtripStats, SweepError, SweepOptions,
    SweepReport, SweepRow,
};
pub use verify::{verify_all, verify_rows, Check, Checklist, Status};

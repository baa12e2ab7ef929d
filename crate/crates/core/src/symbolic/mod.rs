//! Symbols, patterns, pull-based streams and the recurrence-time scanners.
//!
//! All positions are 1-based: the first symbol pulled from a cursor is
//! position 1, so `hitting_time` returns `j >= 1`, `return_time` returns the
//! re-occurrence index `k >= 2`, and `non_overlapping_return_time` returns a
//! block index `k >= 1`.

mod pattern;
mod scan;
mod stream;

pub use pattern::{format_digits, min_period, parse_digits, Pattern, Symbol};
pub use scan::{
    hitting_time, nested_hitting_times, non_overlapping_return_time, return_scan, return_time, scan_all, scan_first, Automaton,
    ReturnScan, ScanOutcome,
};
pub use stream::{SliceSource, StreamCursor, SymbolSource};

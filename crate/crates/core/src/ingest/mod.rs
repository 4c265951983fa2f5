//! Reading event logs from XES and CSV, and checking them.

pub mod csv;
pub mod timestamp;
pub mod xes;

use std::collections::HashSet;

use serde::Serialize;

use crate::log::EventLog;

pub use self::csv::{
    csv_headers, parse_csv, write_csv, ColumnType, CsvError, CsvMapping, ExtraColumn,
};
pub use self::timestamp::{TimestampError, TimestampPattern};
pub use self::xes::{parse_xes, XesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub event_count: usize,
    pub case_count: usize,
    /// Events moved by timestamp sorting at ingestion.
    pub monotonicity_violations: usize,
    /// Events whose id was already used by an earlier event.
    pub duplicate_event_ids: usize,
    pub missing_activity: usize,
    /// Always zero for a constructed log; parsers reject such events.
    pub missing_timestamp: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.monotonicity_violations == 0
            && self.duplicate_event_ids == 0
            && self.missing_activity == 0
            && self.missing_timestamp == 0
    }
}

pub fn validate(log: &EventLog) -> ValidationReport {
    let mut seen = HashSet::new();
    let mut duplicates = 0;
    let mut missing_activity = 0;
    for e in log.events() {
        if !seen.insert(e.event_id()) {
            duplicates += 1;
        }
        if e.activity().is_none() {
            missing_activity += 1;
        }
    }
    let mut unsorted = 0;
    for case in log.cases() {
        unsorted += case
            .events()
            .windows(2)
            .filter(|w| w[1].timestamp() < w[0].timestamp())
            .count();
    }
    ValidationReport {
        event_count: log.event_count(),
        case_count: log.case_count(),
        monotonicity_violations: log.reordered_events() + unsorted,
        duplicate_event_ids: duplicates,
        missing_activity,
        missing_timestamp: 0,
    }
}

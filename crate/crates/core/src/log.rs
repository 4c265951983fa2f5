//! Event-log data model.
//!
//! An [`EventLog`] can be looked at in three ways: as a set of cases (the
//! primary storage), as a flat set of events ([`EventLog::events`]), and as a
//! multiset of traces ([`extract_variants`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

/// Reserved attribute names.
pub const ACTIVITY: &str = "activity";
pub const TIMESTAMP: &str = "timestamp";
pub const RESOURCE: &str = "resource";
pub const COST: &str = "cost";

/// A single attribute value. `Absent` stands for a missing attribute and is
/// distinct from empty text and from zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum AttributeValue {
    Text(String),
    Integer(i64),
    Real(f64),
    /// Milliseconds since the Unix epoch, UTC.
    Timestamp(i64),
    Absent,
}

impl AttributeValue {
    pub fn is_absent(&self) -> bool {
        matches!(self, AttributeValue::Absent)
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Numeric view of integers, reals and timestamps.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Integer(i) => Some(*i as f64),
            AttributeValue::Real(r) => Some(*r),
            AttributeValue::Timestamp(t) => Some(*t as f64),
            _ => None,
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            AttributeValue::Text(_) => ValueKind::Text,
            AttributeValue::Integer(_) => ValueKind::Integer,
            AttributeValue::Real(_) => ValueKind::Real,
            AttributeValue::Timestamp(_) => ValueKind::Timestamp,
            AttributeValue::Absent => ValueKind::Absent,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Text(s) => f.write_str(s),
            AttributeValue::Integer(i) => write!(f, "{i}"),
            AttributeValue::Real(r) => write!(f, "{r:?}"),
            AttributeValue::Timestamp(t) => {
                f.write_str(&crate::ingest::timestamp::format_millis(*t))
            }
            AttributeValue::Absent => f.write_str("⊥"),
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(s: &str) -> Self {
        AttributeValue::Text(s.to_string())
    }
}

impl From<String> for AttributeValue {
    fn from(s: String) -> Self {
        AttributeValue::Text(s)
    }
}

impl From<i64> for AttributeValue {
    fn from(v: i64) -> Self {
        AttributeValue::Integer(v)
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Real(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Integer,
    Real,
    Timestamp,
    Absent,
}

impl ValueKind {
    pub fn is_ordered(self) -> bool {
        matches!(
            self,
            ValueKind::Integer | ValueKind::Real | ValueKind::Timestamp
        )
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Text => "text",
            ValueKind::Integer => "integer",
            ValueKind::Real => "real",
            ValueKind::Timestamp => "timestamp",
            ValueKind::Absent => "absent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("timestamp {0} is negative")]
    NegativeTimestamp(i64),
    #[error("attribute `timestamp` must hold a timestamp value")]
    TimestampOverwrite,
    #[error("sub-sequence [{i}, {j}] is out of range for a case of length {len}")]
    Range { i: usize, j: usize, len: usize },
    #[error("event {event_id} belongs to case {found}, not {expected}")]
    ForeignEvent {
        event_id: String,
        expected: String,
        found: String,
    },
}

/// An event. The timestamp attribute is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    event_id: String,
    case_id: String,
    attributes: BTreeMap<String, AttributeValue>,
}

impl Event {
    pub fn new(
        event_id: impl Into<String>,
        case_id: impl Into<String>,
        activity: Option<&str>,
        timestamp_ms: i64,
    ) -> Result<Self, LogError> {
        if timestamp_ms < 0 {
            return Err(LogError::NegativeTimestamp(timestamp_ms));
        }
        let mut attributes = BTreeMap::new();
        attributes.insert(
            TIMESTAMP.to_string(),
            AttributeValue::Timestamp(timestamp_ms),
        );
        if let Some(a) = activity {
            attributes.insert(ACTIVITY.to_string(), AttributeValue::from(a));
        }
        Ok(Event {
            event_id: event_id.into(),
            case_id: case_id.into(),
            attributes,
        })
    }

    /// Sets an attribute. Setting `Absent` removes it; `timestamp` may only be
    /// replaced by another non-negative timestamp.
    pub fn set_attribute(
        &mut self,
        name: impl Into<String>,
        value: AttributeValue,
    ) -> Result<(), LogError> {
        let name = name.into();
        if name == TIMESTAMP {
            match value {
                AttributeValue::Timestamp(t) if t >= 0 => {}
                AttributeValue::Timestamp(t) => return Err(LogError::NegativeTimestamp(t)),
                _ => return Err(LogError::TimestampOverwrite),
            }
        }
        if value.is_absent() {
            self.attributes.remove(&name);
        } else {
            self.attributes.insert(name, value);
        }
        Ok(())
    }

    pub fn with_attribute(
        mut self,
        name: impl Into<String>,
        value: impl Into<AttributeValue>,
    ) -> Result<Self, LogError> {
        self.set_attribute(name, value.into())?;
        Ok(self)
    }

    pub fn event_id(&self) -> &str {
        &self.event_id
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    /// Value of the named attribute, `Absent` when the key is missing.
    pub fn attribute(&self, name: &str) -> &AttributeValue {
        static ABSENT: AttributeValue = AttributeValue::Absent;
        self.attributes.get(name).unwrap_or(&ABSENT)
    }

    pub fn activity(&self) -> Option<&str> {
        self.attribute(ACTIVITY).as_text()
    }

    pub fn timestamp(&self) -> i64 {
        match self.attributes.get(TIMESTAMP) {
            Some(AttributeValue::Timestamp(t)) => *t,
            _ => unreachable!("event constructed without timestamp"),
        }
    }

    /// Present attributes in key order.
    pub fn attributes(&self) -> impl Iterator<Item = (&str, &AttributeValue)> {
        self.attributes
            .iter()
            .filter(|(_, v)| !v.is_absent())
            .map(|(k, v)| (k.as_str(), v))
    }

    pub(crate) fn with_ids(&self, event_id: String, case_id: String) -> Event {
        Event {
            event_id,
            case_id,
            attributes: self.attributes.clone(),
        }
    }
}

/// Free-function form of [`Event::attribute`].
pub fn attribute_value<'e>(event: &'e Event, name: &str) -> &'e AttributeValue {
    event.attribute(name)
}

/// A case: events of one process execution ordered by time, ties in
/// ingestion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    case_id: String,
    events: Vec<Event>,
}

impl Case {
    /// Builds a case, stable-sorting the events by timestamp.
    pub fn new(case_id: impl Into<String>, events: Vec<Event>) -> Result<Self, LogError> {
        Ok(Self::new_counting_reorders(case_id.into(), events)?.0)
    }

    /// Returns the case together with the number of events whose position
    /// changed while sorting.
    pub(crate) fn new_counting_reorders(
        case_id: String,
        events: Vec<Event>,
    ) -> Result<(Self, usize), LogError> {
        if let Some(e) = events.iter().find(|e| e.case_id != case_id) {
            return Err(LogError::ForeignEvent {
                event_id: e.event_id.clone(),
                expected: case_id,
                found: e.case_id.clone(),
            });
        }
        let mut indexed: Vec<(usize, Event)> = events.into_iter().enumerate().collect();
        indexed.sort_by_key(|(_, e)| e.timestamp());
        let moved = indexed
            .iter()
            .enumerate()
            .filter(|(pos, (orig, _))| pos != orig)
            .count();
        let events = indexed.into_iter().map(|(_, e)| e).collect();
        Ok((Case { case_id, events }, moved))
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Activity labels in event order; events without an activity are skipped.
    pub fn trace(&self) -> Vec<&str> {
        self.events.iter().filter_map(Event::activity).collect()
    }

    /// Events at 1-based positions `i..=j`.
    pub fn subsequence(&self, i: usize, j: usize) -> Result<&[Event], LogError> {
        if i == 0 || i > j || j > self.events.len() {
            return Err(LogError::Range {
                i,
                j,
                len: self.events.len(),
            });
        }
        Ok(&self.events[i - 1..j])
    }
}

/// Free-function form of [`Case::subsequence`].
pub fn subsequence(case: &Case, i: usize, j: usize) -> Result<&[Event], LogError> {
    case.subsequence(i, j)
}

/// An immutable event log. Cases keep their ingestion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    cases: IndexMap<String, Case>,
    activity_alphabet: BTreeSet<String>,
    reordered_events: usize,
}

impl EventLog {
    /// Groups `events` by case id (cases ordered by first appearance) and
    /// stable-sorts each case by timestamp.
    pub fn from_events(events: impl IntoIterator<Item = Event>) -> Self {
        let mut grouped: IndexMap<String, Vec<Event>> = IndexMap::new();
        for e in events {
            grouped.entry(e.case_id.clone()).or_default().push(e);
        }
        let mut reordered = 0;
        let cases = grouped.into_iter().map(|(id, evs)| {
            let (case, moved) =
                Case::new_counting_reorders(id, evs).expect("events grouped by their own case id");
            reordered += moved;
            case
        });
        let mut log = Self::from_cases(cases.collect::<Vec<_>>());
        log.reordered_events = reordered;
        log
    }

    /// Assembles a log from already-built cases. Cases with a repeated id are
    /// merged into the first occurrence.
    pub fn from_cases(cases: impl IntoIterator<Item = Case>) -> Self {
        let mut map: IndexMap<String, Case> = IndexMap::new();
        let mut reordered = 0;
        for case in cases {
            match map.get_mut(&case.case_id) {
                Some(existing) => {
                    let mut evs = std::mem::take(&mut existing.events);
                    evs.extend(case.events);
                    let (merged, moved) =
                        Case::new_counting_reorders(case.case_id, evs).expect("same case id");
                    reordered += moved;
                    *existing = merged;
                }
                None => {
                    map.insert(case.case_id.clone(), case);
                }
            }
        }
        let activity_alphabet = map
            .values()
            .flat_map(|c| c.events.iter().filter_map(Event::activity))
            .map(str::to_string)
            .collect();
        EventLog {
            cases: map,
            activity_alphabet,
            reordered_events: reordered,
        }
    }

    pub fn cases(&self) -> impl ExactSizeIterator<Item = &Case> {
        self.cases.values()
    }

    pub fn case(&self, case_id: &str) -> Option<&Case> {
        self.cases.get(case_id)
    }

    pub fn case_count(&self) -> usize {
        self.cases.len()
    }

    /// The flat event-set view.
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.cases.values().flat_map(|c| c.events.iter())
    }

    pub fn event_count(&self) -> usize {
        self.cases.values().map(Case::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Observed activity labels, sorted.
    pub fn activity_alphabet(&self) -> &BTreeSet<String> {
        &self.activity_alphabet
    }

    /// Events moved by timestamp sorting during construction.
    pub fn reordered_events(&self) -> usize {
        self.reordered_events
    }

    /// Kinds observed for each attribute name.
    pub fn attribute_kinds(&self) -> BTreeMap<&str, BTreeSet<ValueKind>> {
        let mut kinds: BTreeMap<&str, BTreeSet<ValueKind>> = BTreeMap::new();
        for e in self.events() {
            for (k, v) in e.attributes() {
                kinds.entry(k).or_default().insert(v.kind());
            }
        }
        kinds
    }

    /// Keeps events accepted by `keep`; cases left empty are dropped.
    pub fn retain_events(&self, mut keep: impl FnMut(&Event) -> bool) -> EventLog {
        let cases = self.cases.values().filter_map(|c| {
            let events: Vec<Event> = c.events.iter().filter(|e| keep(e)).cloned().collect();
            (!events.is_empty()).then(|| Case {
                case_id: c.case_id.clone(),
                events,
            })
        });
        EventLog::from_cases(cases.collect::<Vec<_>>())
    }
}

/// A trace together with the cases that follow it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variant {
    pub trace: Vec<String>,
    pub count: usize,
    pub case_ids: Vec<String>,
}

/// The trace multiset of a log, most frequent variant first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VariantTable {
    pub variants: Vec<Variant>,
    pub total_cases: usize,
    /// Events ignored because they carry no activity.
    pub skipped_events: usize,
}

impl VariantTable {
    /// Builds a table straight from counts, with synthetic traces `v1`, `v2`, ….
    pub fn from_counts(counts: &[usize]) -> Self {
        let variants: Vec<Variant> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &count)| Variant {
                trace: vec![format!("v{}", i + 1)],
                count,
                case_ids: (0..count)
                    .map(|k| format!("v{}-{}", i + 1, k + 1))
                    .collect(),
            })
            .collect();
        Self::from_variants(variants, 0)
    }

    fn from_variants(mut variants: Vec<Variant>, skipped_events: usize) -> Self {
        variants.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.trace.cmp(&b.trace)));
        let total_cases = variants.iter().map(|v| v.count).sum();
        VariantTable {
            variants,
            total_cases,
            skipped_events,
        }
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.variants.iter().map(|v| v.count).collect()
    }
}

/// Groups cases by identical activity sequence.
///
/// Events without an activity are left out of the trace; a case with no
/// labeled event is not counted.
pub fn extract_variants(log: &EventLog) -> VariantTable {
    let mut by_trace: HashMap<Vec<&str>, Vec<String>> = HashMap::new();
    let mut skipped = 0;
    for case in log.cases() {
        let trace = case.trace();
        skipped += case.len() - trace.len();
        if trace.is_empty() {
            continue;
        }
        by_trace
            .entry(trace)
            .or_default()
            .push(case.case_id.clone());
    }
    if skipped > 0 {
        log::warn!("{skipped} event(s) without activity skipped during variant extraction");
    }
    let variants = by_trace
        .into_iter()
        .map(|(trace, case_ids)| Variant {
            trace: trace.into_iter().map(str::to_string).collect(),
            count: case_ids.len(),
            case_ids,
        })
        .collect();
    VariantTable::from_variants(variants, skipped)
}

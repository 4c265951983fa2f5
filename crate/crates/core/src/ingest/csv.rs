//! CSV event logs: one event per row, header row mandatory.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::timestamp::{format_millis, parse_iso8601, TimestampError, TimestampPattern};
use crate::log::{AttributeValue, Event, EventLog, ACTIVITY, TIMESTAMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Integer,
    Real,
    Timestamp,
}

impl std::str::FromStr for ColumnType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" | "string" => Ok(ColumnType::Text),
            "int" | "integer" => Ok(ColumnType::Integer),
            "real" | "float" => Ok(ColumnType::Real),
            "timestamp" | "date" => Ok(ColumnType::Timestamp),
            other => Err(format!("unknown column type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraColumn {
    pub column: String,
    pub attribute: String,
    pub kind: ColumnType,
}

/// How CSV columns map onto event attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvMapping {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: String,
    /// `None` accepts ISO-8601.
    pub timestamp_format: Option<String>,
    /// Column holding event ids; ids are generated when absent.
    pub event_id_column: Option<String>,
    pub extra_columns: Vec<ExtraColumn>,
    /// Import every unmapped column, inferring integer, real or text.
    pub infer_other_columns: bool,
}

impl Default for CsvMapping {
    fn default() -> Self {
        CsvMapping {
            case_column: "case_id".into(),
            activity_column: ACTIVITY.into(),
            timestamp_column: TIMESTAMP.into(),
            timestamp_format: None,
            event_id_column: None,
            extra_columns: Vec::new(),
            infer_other_columns: false,
        }
    }
}

impl CsvMapping {
    /// The mapping matching the layout produced by [`write_csv`].
    pub fn canonical() -> Self {
        CsvMapping {
            event_id_column: Some("event_id".into()),
            infer_other_columns: true,
            ..CsvMapping::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("mapping error: {0}")]
    Config(String),
    #[error("unknown column `{0}` in mapping")]
    UnknownColumn(String),
    #[error("invalid timestamp pattern: {0}")]
    Pattern(#[from] TimestampError),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("CSV syntax error: {0}")]
    Syntax(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CsvError {
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            CsvError::Config(_) | CsvError::UnknownColumn(_) | CsvError::Pattern(_)
        )
    }
}

fn infer(raw: &str) -> AttributeValue {
    if let Ok(i) = raw.parse::<i64>() {
        AttributeValue::Integer(i)
    } else if let Ok(r) = raw.parse::<f64>() {
        AttributeValue::Real(r)
    } else {
        AttributeValue::Text(raw.to_string())
    }
}

/// Column names from the header row.
pub fn csv_headers(input: &[u8]) -> Result<Vec<String>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    Ok(reader.headers()?.iter().map(str::to_string).collect())
}

/// Parses a CSV event log. Row numbers in errors count the header as row 1.
pub fn parse_csv(input: &[u8], mapping: &CsvMapping) -> Result<EventLog, CsvError> {
    let mandatory = [
        &mapping.case_column,
        &mapping.activity_column,
        &mapping.timestamp_column,
    ];
    if mandatory.iter().collect::<HashSet<_>>().len() != 3 {
        return Err(CsvError::Config(
            "case, activity and timestamp columns must be distinct".into(),
        ));
    }
    let pattern = mapping
        .timestamp_format
        .as_deref()
        .map(TimestampPattern::compile)
        .transpose()?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CsvError::UnknownColumn(name.to_string()))
    };
    let case_ix = index(&mapping.case_column)?;
    let act_ix = index(&mapping.activity_column)?;
    let ts_ix = index(&mapping.timestamp_column)?;
    let id_ix = mapping.event_id_column.as_deref().map(index).transpose()?;
    let mut extras: Vec<(usize, String, Option<ColumnType>)> = mapping
        .extra_columns
        .iter()
        .map(|x| Ok((index(&x.column)?, x.attribute.clone(), Some(x.kind))))
        .collect::<Result<_, CsvError>>()?;
    if mapping.infer_other_columns {
        let taken: HashSet<usize> = [case_ix, act_ix, ts_ix]
            .into_iter()
            .chain(id_ix)
            .chain(extras.iter().map(|x| x.0))
            .collect();
        for (i, h) in headers.iter().enumerate() {
            if !taken.contains(&i) {
                extras.push((i, h.to_string(), None));
            }
        }
    }
    for (_, name, _) in &extras {
        if name == TIMESTAMP || name == ACTIVITY {
            return Err(CsvError::Config(format!(
                "extra column cannot target reserved attribute `{name}`"
            )));
        }
    }

    let mut events = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 2;
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let row_err = |message: String| CsvError::Row { row, message };

        let raw_ts = field(ts_ix);
        let ts = match &pattern {
            Some(p) => p.parse(raw_ts),
            None => parse_iso8601(raw_ts),
        }
        .map_err(|e| row_err(e.to_string()))?;
        let case_id = field(case_ix);
        if case_id.is_empty() {
            return Err(row_err("empty case id".into()));
        }
        let activity = Some(field(act_ix)).filter(|a| !a.is_empty());
        let event_id = match id_ix {
            Some(i) if !field(i).is_empty() => field(i).to_string(),
            _ => format!("row-{row}"),
        };
        let mut event =
            Event::new(event_id, case_id, activity, ts).map_err(|e| row_err(e.to_string()))?;
        for (i, name, kind) in &extras {
            let raw = field(*i);
            if raw.is_empty() {
                continue;
            }
            let value = match kind {
                None => infer(raw),
                Some(ColumnType::Text) => AttributeValue::Text(raw.to_string()),
                Some(ColumnType::Integer) => raw
                    .trim()
                    .parse()
                    .map(AttributeValue::Integer)
                    .map_err(|_| row_err(format!("`{raw}` is not an integer ({name})")))?,
                Some(ColumnType::Real) => raw
                    .trim()
                    .parse()
                    .map(AttributeValue::Real)
                    .map_err(|_| row_err(format!("`{raw}` is not a number ({name})")))?,
                Some(ColumnType::Timestamp) => parse_iso8601(raw)
                    .map(AttributeValue::Timestamp)
                    .map_err(|e| row_err(e.to_string()))?,
            };
            event
                .set_attribute(name.clone(), value)
                .map_err(|e| row_err(e.to_string()))?;
        }
        events.push(event);
    }
    Ok(EventLog::from_events(events))
}

/// Writes a log in the layout read back by [`CsvMapping::canonical`]:
/// `case_id,event_id,activity,timestamp` followed by every other attribute
/// in name order. Timestamps are written as ISO-8601 UTC with milliseconds.
pub fn write_csv<W: Write>(log: &EventLog, out: W) -> Result<(), CsvError> {
    let mut extra_names: Vec<&str> = log
        .events()
        .flat_map(|e| e.attributes().map(|(k, _)| k))
        .filter(|k| *k != ACTIVITY && *k != TIMESTAMP)
        .collect();
    extra_names.sort_unstable();
    extra_names.dedup();

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["case_id", "event_id", ACTIVITY, TIMESTAMP];
    header.extend(&extra_names);
    w.write_record(&header)?;
    for case in log.cases() {
        for e in case.events() {
            let mut rec = vec![
                case.case_id().to_string(),
                e.event_id().to_string(),
                e.activity().unwrap_or("").to_string(),
                format_millis(e.timestamp()),
            ];
            for name in &extra_names {
                rec.push(match e.attribute(name) {
                    AttributeValue::Absent => String::new(),
                    v => v.to_string(),
                });
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

//! The four-stage encoding function: filter events, derive dimensions,
//! group by case, valuate cells into reals.
//!
//! [`apply_encoding`] runs the stages in a single pass per case. The
//! individual stages ([`apply_filter`], [`build_dimensions`],
//! [`group_by_case`], [`valuate`]) are public so a pipeline can be inspected
//! or reused piecewise; composing them gives the same matrix.

pub mod dimension;
pub mod matrix;
pub mod predicate;
pub mod spec;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::log::{AttributeValue, Event, EventLog, ACTIVITY};

pub use self::dimension::{
    DimensionIndex, DimensionLabel, Dimensioning, FlowMeasure, GramSymbol, MergeGroup, Stat,
    GRAM_SCOPE,
};
pub use self::matrix::FeatureMatrix;
pub use self::predicate::{
    parse_predicate, Condition, FilterPredicate, Literal, Operator, PredicateError, Term,
};
pub use self::spec::{
    activity_profile, builtin_specs, kgram, numstats, one_hot, one_hot_over, parse_encoder,
    positional, EncodingSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("case `{case_id}`, dimension `{dimension}`: {message}")]
    Valuation {
        case_id: String,
        dimension: String,
        message: String,
    },
}

impl EncodeError {
    pub fn is_config(&self) -> bool {
        matches!(self, EncodeError::Config(_) | EncodeError::Predicate(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuationKind {
    /// 1 when the cell holds at least one value.
    Presence,
    /// Number of values in the cell.
    Count,
    Avg,
    Max,
    Min,
    Sum,
    /// 1 when the position is occupied by the dimension's activity.
    PositionalIndicator,
    /// Uses the statistic named by each [`DimensionLabel::Statistic`] column.
    Statistic,
}

/// Turns a cell (a multiset of values) into a real. Empty cells take
/// `empty_cell_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valuation {
    pub kind: ValuationKind,
    pub empty_cell_value: f64,
}

impl Valuation {
    pub fn new(kind: ValuationKind) -> Self {
        Valuation {
            kind,
            empty_cell_value: 0.0,
        }
    }

    pub fn with_empty_value(mut self, v: f64) -> Self {
        self.empty_cell_value = v;
        self
    }

    fn stat_for(&self, label: &DimensionLabel) -> Result<Option<Stat>, String> {
        Ok(match self.kind {
            ValuationKind::Presence | ValuationKind::PositionalIndicator => None,
            ValuationKind::Count => Some(Stat::Count),
            ValuationKind::Avg => Some(Stat::Avg),
            ValuationKind::Max => Some(Stat::Max),
            ValuationKind::Min => Some(Stat::Min),
            ValuationKind::Sum => Some(Stat::Sum),
            ValuationKind::Statistic => match label {
                DimensionLabel::Statistic { stat, .. } => Some(*stat),
                _ => return Err("statistic valuation needs statistic dimensions".into()),
            },
        })
    }
}

/// Running summary of a cell; lets the single-pass encoder skip
/// materializing cells.
#[derive(Debug, Clone, Copy, Default)]
struct CellSummary {
    n: usize,
    sum: f64,
    min: f64,
    max: f64,
    non_numeric: bool,
}

impl CellSummary {
    fn push(&mut self, v: &AttributeValue) {
        match v.as_f64() {
            Some(x) => {
                if self.n == 0 || x < self.min {
                    self.min = x;
                }
                if self.n == 0 || x > self.max {
                    self.max = x;
                }
                self.sum += x;
            }
            None => self.non_numeric = true,
        }
        self.n += 1;
    }

    fn of(cell: &[AttributeValue]) -> Self {
        let mut s = CellSummary::default();
        cell.iter().for_each(|v| s.push(v));
        s
    }

    fn value(&self, v: &Valuation, label: &DimensionLabel) -> Result<f64, String> {
        let stat = v.stat_for(label)?;
        if self.n == 0 {
            return Ok(v.empty_cell_value);
        }
        let Some(stat) = stat else {
            return Ok(1.0);
        };
        if stat != Stat::Count && self.non_numeric {
            return Err(format!("`{}` needs numeric values", stat.name()));
        }
        Ok(match stat {
            Stat::Count => self.n as f64,
            Stat::Sum => self.sum,
            Stat::Avg => self.sum / self.n as f64,
            Stat::Min => self.min,
            Stat::Max => self.max,
        })
    }
}

/// Keeps the events satisfying `p`; cases left without events are dropped.
pub fn apply_filter(log: &EventLog, p: &FilterPredicate) -> Result<EventLog, EncodeError> {
    p.check(&log.attribute_kinds())?;
    if p.is_trivial() {
        return Ok(log.clone());
    }
    Ok(log.retain_events(|e| p.matches(e)))
}

fn gram_windows(trace: &[&str], k: usize) -> Vec<Vec<GramSymbol>> {
    let padded: Vec<GramSymbol> = std::iter::repeat_n(GramSymbol::Start, k - 1)
        .chain(trace.iter().map(|a| GramSymbol::Activity(a.to_string())))
        .collect();
    padded.windows(k).map(<[GramSymbol]>::to_vec).collect()
}

fn gram_text(g: &[GramSymbol]) -> String {
    DimensionLabel::KGram(g.to_vec()).to_string()
}

/// Nearest-rank 95th percentile, at least 1.
fn p95(mut lengths: Vec<usize>) -> usize {
    if lengths.is_empty() {
        return 1;
    }
    lengths.sort_unstable();
    let rank = (0.95 * lengths.len() as f64).ceil() as usize;
    lengths[rank.clamp(1, lengths.len()) - 1].max(1)
}

fn vocabulary<'a>(
    rule: &Dimensioning,
    cases: impl Iterator<Item = Vec<&'a Event>>,
) -> DimensionIndex {
    let mut labels = BTreeSet::new();
    let resolved = match rule {
        Dimensioning::Categorical { attributes, .. } => {
            for events in cases {
                for e in events {
                    for attr in attributes {
                        let v = e.attribute(attr);
                        if !v.is_absent() {
                            labels.insert(DimensionLabel::Categorical {
                                attribute: attr.clone(),
                                value: rule.merged_value(attr, v.to_string()),
                            });
                        }
                    }
                }
            }
            rule.clone()
        }
        Dimensioning::KGram { k } => {
            for events in cases {
                let trace: Vec<&str> = events.iter().filter_map(|e| e.activity()).collect();
                labels.extend(
                    gram_windows(&trace, *k)
                        .into_iter()
                        .map(DimensionLabel::KGram),
                );
            }
            rule.clone()
        }
        Dimensioning::Positional { max_positions } => {
            let mut alphabet = BTreeSet::new();
            let mut lengths = Vec::new();
            for events in cases {
                let trace: Vec<&str> = events.iter().filter_map(|e| e.activity()).collect();
                lengths.push(trace.len());
                alphabet.extend(trace.into_iter().map(str::to_string));
            }
            let max = max_positions.unwrap_or_else(|| p95(lengths));
            for a in &alphabet {
                for position in 1..=max {
                    labels.insert(DimensionLabel::Positional {
                        activity: a.clone(),
                        position,
                    });
                }
            }
            Dimensioning::Positional {
                max_positions: Some(max),
            }
        }
        Dimensioning::Statistics { attributes, stats } => {
            for attribute in attributes {
                for stat in stats {
                    labels.insert(DimensionLabel::Statistic {
                        attribute: attribute.clone(),
                        stat: *stat,
                    });
                }
            }
            rule.clone()
        }
    };
    DimensionIndex::new(labels).with_rule(resolved)
}

/// Sends every (column, value) contribution of one case's events to `sink`.
/// Values matching no column go to an `Other` bucket when the index has one
/// and are dropped otherwise.
fn assign(dims: &DimensionIndex, events: &[&Event], mut sink: impl FnMut(usize, AttributeValue)) {
    let Some(rule) = dims.rule() else {
        return;
    };
    match rule {
        Dimensioning::Categorical { attributes, .. } => {
            for e in events {
                for attr in attributes {
                    let v = e.attribute(attr);
                    if v.is_absent() {
                        continue;
                    }
                    let label = DimensionLabel::Categorical {
                        attribute: attr.clone(),
                        value: rule.merged_value(attr, v.to_string()),
                    };
                    if let Some(col) = dims.position(&label).or_else(|| dims.has_other(attr)) {
                        sink(col, v.clone());
                    }
                }
            }
        }
        Dimensioning::KGram { k } => {
            let trace: Vec<&str> = events.iter().filter_map(|e| e.activity()).collect();
            for g in gram_windows(&trace, *k) {
                let text = gram_text(&g);
                let col = dims
                    .position(&DimensionLabel::KGram(g))
                    .or_else(|| dims.has_other(GRAM_SCOPE));
                if let Some(col) = col {
                    sink(col, AttributeValue::Text(text));
                }
            }
        }
        Dimensioning::Positional { .. } => {
            let trace = events.iter().filter_map(|e| e.activity());
            for (i, a) in trace.enumerate() {
                let label = DimensionLabel::Positional {
                    activity: a.to_string(),
                    position: i + 1,
                };
                if let Some(col) = dims.position(&label) {
                    sink(col, AttributeValue::from(a));
                }
            }
        }
        Dimensioning::Statistics { attributes, stats } => {
            for e in events {
                for attr in attributes {
                    let v = e.attribute(attr);
                    if v.is_absent() {
                        continue;
                    }
                    for stat in stats {
                        let label = DimensionLabel::Statistic {
                            attribute: attr.clone(),
                            stat: *stat,
                        };
                        if let Some(col) = dims.position(&label) {
                            sink(col, v.clone());
                        }
                    }
                }
            }
        }
    }
}

/// Derives the dimensions of the vector space from an (already filtered) log.
pub fn build_dimensions(log: &EventLog, spec: &EncodingSpec) -> DimensionIndex {
    vocabulary(
        &spec.dimensioning,
        log.cases().map(|c| c.events().iter().collect()),
    )
}

/// One row of a grouped table: a multiset of values per dimension, plus the
/// events that make up the row.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRow {
    pub cells: Vec<Vec<AttributeValue>>,
    pub event_ids: Vec<String>,
}

/// Events grouped by case, cells still holding raw attribute values.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedTable {
    dims: DimensionIndex,
    rows: BTreeMap<String, GroupedRow>,
}

impl GroupedTable {
    pub fn dims(&self) -> &DimensionIndex {
        &self.dims
    }

    pub fn rows(&self) -> &BTreeMap<String, GroupedRow> {
        &self.rows
    }

    pub fn row(&self, case_id: &str) -> Option<&GroupedRow> {
        self.rows.get(case_id)
    }

    pub fn cell(&self, case_id: &str, label: &DimensionLabel) -> Option<&[AttributeValue]> {
        let j = self.dims.position(label)?;
        self.rows.get(case_id).map(|r| r.cells[j].as_slice())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Assembles a table by hand, e.g. for valuating externally grouped data.
    pub fn from_rows(dims: DimensionIndex, rows: BTreeMap<String, GroupedRow>) -> Self {
        GroupedTable { dims, rows }
    }
}

/// Groups the log's events by case into the cells of `dims`.
pub fn group_by_case(log: &EventLog, dims: &DimensionIndex) -> GroupedTable {
    let mut rows = BTreeMap::new();
    for case in log.cases() {
        let events: Vec<&Event> = case.events().iter().collect();
        let mut cells = vec![Vec::new(); dims.len()];
        assign(dims, &events, |col, v| cells[col].push(v));
        rows.insert(
            case.case_id().to_string(),
            GroupedRow {
                cells,
                event_ids: events.iter().map(|e| e.event_id().to_string()).collect(),
            },
        );
    }
    GroupedTable {
        dims: dims.clone(),
        rows,
    }
}

/// Turns every cell into a real. Rows without contributing events are
/// dropped rather than zero-filled.
pub fn valuate(table: &GroupedTable, v: &Valuation) -> Result<FeatureMatrix, EncodeError> {
    let d = table.dims.len();
    let mut row_labels = Vec::new();
    let mut values = Vec::with_capacity(table.rows.len() * d);
    for (case_id, row) in &table.rows {
        if row.event_ids.is_empty() {
            continue;
        }
        for (label, cell) in table.dims.iter().zip(&row.cells) {
            let x = CellSummary::of(cell).value(v, label).map_err(|message| {
                EncodeError::Valuation {
                    case_id: case_id.clone(),
                    dimension: label.to_string(),
                    message,
                }
            })?;
            values.push(x);
        }
        row_labels.push(case_id.clone());
    }
    Ok(FeatureMatrix::new(row_labels, table.dims.clone(), values))
}

fn encode_rows(
    log: &EventLog,
    spec: &EncodingSpec,
    dims: Option<&DimensionIndex>,
) -> Result<FeatureMatrix, EncodeError> {
    spec.filter.check(&log.attribute_kinds())?;
    let mut kept: Vec<(&str, Vec<&Event>)> = log
        .cases()
        .map(|c| {
            let evs: Vec<&Event> = c
                .events()
                .iter()
                .filter(|e| spec.filter.matches(e))
                .collect();
            (c.case_id(), evs)
        })
        .filter(|(_, evs)| !evs.is_empty())
        .collect();
    kept.sort_by(|a, b| a.0.cmp(b.0));

    let owned;
    let dims = match dims {
        Some(d) => d,
        None => {
            owned = vocabulary(&spec.dimensioning, kept.iter().map(|(_, e)| e.clone()));
            &owned
        }
    };

    let d = dims.len();
    let mut values = Vec::with_capacity(kept.len() * d);
    let mut summaries = vec![CellSummary::default(); d];
    for (case_id, events) in &kept {
        summaries
            .iter_mut()
            .for_each(|s| *s = CellSummary::default());
        assign(dims, events, |col, v| summaries[col].push(&v));
        for (label, s) in dims.iter().zip(&summaries) {
            values.push(s.value(&spec.valuation, label).map_err(|message| {
                EncodeError::Valuation {
                    case_id: case_id.to_string(),
                    dimension: label.to_string(),
                    message,
                }
            })?);
        }
    }
    let rows = kept.into_iter().map(|(c, _)| c.to_string()).collect();
    Ok(FeatureMatrix::new(rows, dims.clone(), values))
}

/// Encodes a log into a feature matrix, one row per surviving case, rows
/// sorted by case id.
pub fn apply_encoding(log: &EventLog, spec: &EncodingSpec) -> Result<FeatureMatrix, EncodeError> {
    encode_rows(log, spec, None)
}

/// Encodes a log against a dimension index built earlier, typically from a
/// training log. Use [`DimensionIndex::with_other`] to keep unseen values.
pub fn apply_encoding_with_index(
    log: &EventLog,
    spec: &EncodingSpec,
    dims: &DimensionIndex,
) -> Result<FeatureMatrix, EncodeError> {
    if dims.rule().is_none() {
        return Err(EncodeError::Config(
            "dimension index carries no dimensioning rule".into(),
        ));
    }
    encode_rows(log, spec, Some(dims))
}

/// The filter every activity-based encoder applies first.
pub fn activity_present() -> FilterPredicate {
    FilterPredicate::all().with(Term::new(ACTIVITY, Condition::Present))
}

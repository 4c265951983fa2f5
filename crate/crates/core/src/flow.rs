//! Control-flow relations: directly-follows counts, the dependency measure
//! of the Heuristic Miner family, concurrency detection, and trace
//! canonicalization so that concurrent-equivalent traces encode identically.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::encode::{DimensionLabel, FeatureMatrix, FlowMeasure};
use crate::log::{AttributeValue, Case, EventLog, TIMESTAMP};

pub const DEFAULT_CONCURRENCY_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("threshold {0} outside [0, 1)")]
    Threshold(f64),
    #[error("parallelism is undefined for an alphabet of {0} activit(y/ies)")]
    SingleActivity(usize),
}

/// `counts[a][b]`: how often `a` is immediately followed by `b` within a case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectlyFollows {
    alphabet: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
}

impl DirectlyFollows {
    fn empty(alphabet: Vec<String>) -> Self {
        let n = alphabet.len();
        let index = alphabet
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        DirectlyFollows {
            alphabet,
            index,
            counts: vec![0; n * n],
        }
    }

    /// Builds a relation from explicit counts over `alphabet` (row-major).
    pub fn from_counts(alphabet: Vec<String>, counts: Vec<u64>) -> Self {
        assert_eq!(
            counts.len(),
            alphabet.len() * alphabet.len(),
            "square matrix"
        );
        let mut df = DirectlyFollows::empty(alphabet);
        df.counts = counts;
        df
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn index_of(&self, activity: &str) -> Option<usize> {
        self.index.get(activity).copied()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.size() + j]
    }

    /// `|a>b|`; zero for unknown activities.
    pub fn count(&self, a: &str, b: &str) -> u64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.get(i, j),
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero entries in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        let n = self.size();
        (0..n * n).filter(|&k| self.counts[k] > 0).map(move |k| {
            (
                self.alphabet[k / n].as_str(),
                self.alphabet[k % n].as_str(),
                self.counts[k],
            )
        })
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.alphabet, |i, j| self.get(i, j).to_string())
    }

    /// Graphviz text with one edge per nonzero count.
    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph dfg {\n");
        for a in &self.alphabet {
            let _ = writeln!(out, "  {};", q(a));
        }
        for (a, b, c) in self.nonzero() {
            let _ = writeln!(out, "  {} -> {} [label=\"{c}\"];", q(a), q(b));
        }
        out.push_str("}\n");
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn matrix_csv(alphabet: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("activity");
    for a in alphabet {
        out.push(',');
        out.push_str(&csv_field(a));
    }
    out.push('\n');
    for (i, a) in alphabet.iter().enumerate() {
        out.push_str(&csv_field(a));
        for j in 0..alphabet.len() {
            out.push(',');
            out.push_str(&cell(i, j));
        }
        out.push('\n');
    }
    out
}

/// Counts directly-follows pairs over the activity traces of all cases.
pub fn directly_follows(log: &EventLog) -> DirectlyFollows {
    let mut df = DirectlyFollows::empty(log.activity_alphabet().iter().cloned().collect());
    let n = df.size();
    for case in log.cases() {
        let trace = case.trace();
        for w in trace.windows(2) {
            let i = df.index[w[0]];
            let j = df.index[w[1]];
            df.counts[i * n + j] += 1;
        }
    }
    df
}

/// `(|a>b| - |b>a|) / (|a>b| + |b>a| + 1)`.
pub fn dependency(ab: u64, ba: u64) -> f64 {
    (ab as f64 - ba as f64) / (ab as f64 + ba as f64 + 1.0)
}

/// `|a>a| / (|a>a| + 1)`.
pub fn self_dependency(aa: u64) -> f64 {
    aa as f64 / (aa as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyMatrix {
    alphabet: Vec<String>,
    values: Vec<f64>,
}

impl DependencyMatrix {
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.alphabet.len() + j]
    }

    pub fn value(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.alphabet.iter().position(|x| x == a)?;
        let j = self.alphabet.iter().position(|x| x == b)?;
        Some(self.get(i, j))
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.alphabet, |i, j| self.get(i, j).to_string())
    }
}

pub fn dependency_matrix(df: &DirectlyFollows) -> DependencyMatrix {
    let n = df.size();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = if i == j {
                self_dependency(df.get(i, i))
            } else {
                dependency(df.get(i, j), df.get(j, i))
            };
        }
    }
    DependencyMatrix {
        alphabet: df.alphabet.clone(),
        values,
    }
}

/// Unordered pairs of activities treated as concurrent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConcurrencyRelation {
    pairs: BTreeSet<(String, String)>,
}

impl ConcurrencyRelation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares pairs by hand; self-pairs are ignored.
    pub fn from_pairs<S: AsRef<str>>(pairs: impl IntoIterator<Item = (S, S)>) -> Self {
        let mut rel = ConcurrencyRelation::new();
        for (a, b) in pairs {
            rel.insert(a.as_ref(), b.as_ref());
        }
        rel
    }

    pub fn insert(&mut self, a: &str, b: &str) {
        if a != b {
            let (x, y) = if a < b { (a, b) } else { (b, a) };
            self.pairs.insert((x.to_string(), y.to_string()));
        }
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        if a == b {
            return false;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.pairs.contains(&(x.to_string(), y.to_string()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Number of activities concurrent with `a`.
    pub fn degree(&self, a: &str) -> usize {
        self.pairs.iter().filter(|(x, y)| x == a || y == a).count()
    }

    /// One `a,b` line per pair.
    pub fn to_text(&self) -> String {
        self.iter()
            .map(|(a, b)| format!("{},{}\n", csv_field(a), csv_field(b)))
            .collect()
    }
}

/// Pairs seen in both orders whose dependency magnitude stays below
/// `threshold`.
pub fn concurrency_pairs(
    df: &DirectlyFollows,
    threshold: f64,
) -> Result<ConcurrencyRelation, FlowError> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(FlowError::Threshold(threshold));
    }
    let mut rel = ConcurrencyRelation::new();
    let n = df.size();
    for i in 0..n {
        for j in i + 1..n {
            let (ab, ba) = (df.get(i, j), df.get(j, i));
            if ab > 0 && ba > 0 && dependency(ab, ba).abs() < threshold {
                rel.insert(&df.alphabet[i], &df.alphabet[j]);
            }
        }
    }
    Ok(rel)
}

/// Order of `items` in canonical form. Items whose key is `None` commute
/// with nothing.
///
/// Repeatedly emits the smallest item that commutes with everything before
/// it, which yields the lexicographically least ordering reachable by
/// swapping adjacent concurrent items.
fn canonical_order<T>(
    items: &[T],
    key: impl Fn(&T) -> Option<&str>,
    rel: &ConcurrencyRelation,
) -> Vec<usize> {
    let mut rest: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::with_capacity(items.len());
    let commute = |x: usize, y: usize| match (key(&items[x]), key(&items[y])) {
        (Some(a), Some(b)) => rel.contains(a, b),
        _ => false,
    };
    while !rest.is_empty() {
        let mut best = 0;
        for pos in 1..rest.len() {
            let cand = rest[pos];
            if !rest[..pos].iter().all(|&prev| commute(prev, cand)) {
                continue;
            }
            if key(&items[cand]) < key(&items[rest[best]]) {
                best = pos;
            }
        }
        out.push(rest.remove(best));
    }
    out
}

/// Canonical representative of a trace: concurrent-equivalent traces map to
/// the same sequence.
pub fn canonicalize<S: AsRef<str>>(trace: &[S], rel: &ConcurrencyRelation) -> Vec<String> {
    canonical_order(trace, |s| Some(s.as_ref()), rel)
        .into_iter()
        .map(|i| trace[i].as_ref().to_string())
        .collect()
}

/// Reorders each case into canonical form. The case's timestamps are handed
/// out in ascending order to the reordered events, so time stays
/// non-decreasing and the case keeps its time span.
pub fn canonicalize_log(log: &EventLog, rel: &ConcurrencyRelation) -> EventLog {
    let cases = log.cases().map(|case| {
        let events = case.events();
        let order = canonical_order(events, |e| e.activity(), rel);
        let stamps: Vec<i64> = events.iter().map(|e| e.timestamp()).collect();
        let reordered = order
            .into_iter()
            .zip(stamps)
            .map(|(i, ts)| {
                let mut e = events[i].clone();
                e.set_attribute(TIMESTAMP, AttributeValue::Timestamp(ts))
                    .expect("timestamps come from valid events");
                e
            })
            .collect();
        Case::new(case.case_id(), reordered).expect("events keep their case id")
    });
    EventLog::from_cases(cases.collect::<Vec<_>>())
}

/// Log-level parallelism and optionality per activity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFeatures {
    pub alphabet: Vec<String>,
    /// Share of the other activities that are concurrent with this one.
    pub parallelism: Vec<f64>,
    /// Share of cases in which the activity does not occur.
    pub optionality: Vec<f64>,
}

impl FlowFeatures {
    pub fn parallelism_of(&self, a: &str) -> Option<f64> {
        let i = self.alphabet.iter().position(|x| x == a)?;
        Some(self.parallelism[i])
    }

    pub fn optionality_of(&self, a: &str) -> Option<f64> {
        let i = self.alphabet.iter().position(|x| x == a)?;
        Some(self.optionality[i])
    }

    /// Labels and values in dimension order.
    pub fn dimensions(&self) -> Vec<(DimensionLabel, f64)> {
        let mut dims = Vec::with_capacity(2 * self.alphabet.len());
        for (i, a) in self.alphabet.iter().enumerate() {
            dims.push((
                DimensionLabel::Flow {
                    activity: a.clone(),
                    measure: FlowMeasure::Optionality,
                },
                self.optionality[i],
            ));
            dims.push((
                DimensionLabel::Flow {
                    activity: a.clone(),
                    measure: FlowMeasure::Parallelism,
                },
                self.parallelism[i],
            ));
        }
        dims.sort_by(|x, y| x.0.cmp(&y.0));
        dims
    }

    /// Appends the features to every row of `m`.
    pub fn join_onto(&self, m: &FeatureMatrix) -> FeatureMatrix {
        m.with_constant_columns(&self.dimensions())
    }
}

pub fn parallelism_features(
    log: &EventLog,
    rel: &ConcurrencyRelation,
) -> Result<FlowFeatures, FlowError> {
    let alphabet: Vec<String> = log.activity_alphabet().iter().cloned().collect();
    if alphabet.len() < 2 {
        return Err(FlowError::SingleActivity(alphabet.len()));
    }
    let total = log.case_count() as f64;
    let mut containing: HashMap<&str, usize> = HashMap::new();
    for case in log.cases() {
        let seen: BTreeSet<&str> = case.trace().into_iter().collect();
        for a in seen {
            *containing.entry(a).or_default() += 1;
        }
    }
    let others = (alphabet.len() - 1) as f64;
    let parallelism = alphabet
        .iter()
        .map(|a| rel.degree(a) as f64 / others)
        .collect();
    let optionality = alphabet
        .iter()
        .map(|a| 1.0 - containing.get(a.as_str()).copied().unwrap_or(0) as f64 / total)
        .collect();
    Ok(FlowFeatures {
        alphabet,
        parallelism,
        optionality,
    })
}

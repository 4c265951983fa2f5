use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StatsError;
use crate::log::{extract_variants, Case, EventLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceKind {
    /// Duplicate cases until every variant matches the most frequent one.
    OversampleToMax,
    /// Drop cases until every variant matches the least frequent one.
    UndersampleToMin,
    /// Bring every variant to exactly this many cases.
    TargetCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalanceStrategy {
    pub kind: BalanceKind,
    pub seed: u64,
}

impl BalanceStrategy {
    pub fn new(kind: BalanceKind, seed: u64) -> Self {
        BalanceStrategy { kind, seed }
    }
}

/// Rebalances the case distribution over variants.
///
/// Surviving original cases keep their order and come first; duplicates
/// follow in generation order. A duplicate of case `c` is named `c#dupN` and
/// its events get the same suffix.
pub fn balance(log: &EventLog, s: &BalanceStrategy) -> Result<EventLog, StatsError> {
    if log.is_empty() {
        return Err(StatsError::EmptyInput("event log"));
    }
    let vt = extract_variants(log);
    if vt.total_cases != log.case_count() {
        return Err(StatsError::Precondition(format!(
            "{} case(s) have no activity-labeled event",
            log.case_count() - vt.total_cases
        )));
    }
    let counts = vt.counts();
    let target = match s.kind {
        BalanceKind::OversampleToMax => *counts.iter().max().expect("non-empty"),
        BalanceKind::UndersampleToMin => *counts.iter().min().expect("non-empty"),
        BalanceKind::TargetCount(0) => {
            return Err(StatsError::Config("target count must be ≥ 1".into()))
        }
        BalanceKind::TargetCount(t) => t,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut dropped: HashSet<&str> = HashSet::new();
    let mut sources: Vec<&str> = Vec::new();
    for v in &vt.variants {
        if v.count > target {
            let keep: HashSet<usize> = index::sample(&mut rng, v.count, target)
                .into_iter()
                .collect();
            for (i, id) in v.case_ids.iter().enumerate() {
                if !keep.contains(&i) {
                    dropped.insert(id);
                }
            }
        } else {
            for _ in v.count..target {
                let pick = rng.random_range(0..v.case_ids.len());
                sources.push(&v.case_ids[pick]);
            }
        }
    }

    let mut taken: HashSet<String> = log.cases().map(|c| c.case_id().to_string()).collect();
    let mut next_suffix: HashMap<&str, usize> = HashMap::new();
    let mut out: Vec<Case> = log
        .cases()
        .filter(|c| !dropped.contains(c.case_id()))
        .cloned()
        .collect();
    for src in sources {
        let original = log.case(src).expect("variant case ids come from the log");
        let n = next_suffix.entry(src).or_insert(0);
        let new_id = loop {
            *n += 1;
            let candidate = format!("{src}#dup{n}");
            if taken.insert(candidate.clone()) {
                break candidate;
            }
        };
        let suffix = &new_id[src.len()..];
        let events = original
            .events()
            .iter()
            .map(|e| e.with_ids(format!("{}{suffix}", e.event_id()), new_id.clone()))
            .collect();
        out.push(Case::new(new_id.clone(), events).expect("events relabeled to the new case"));
    }
    Ok(EventLog::from_cases(out))
}

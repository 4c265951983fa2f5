use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Per-cell numeric summary used by statistic dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    Avg,
    Count,
    Max,
    Min,
    Sum,
}

impl Stat {
    pub const ALL: [Stat; 5] = [Stat::Avg, Stat::Count, Stat::Max, Stat::Min, Stat::Sum];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Avg => "avg",
            Stat::Count => "count",
            Stat::Max => "max",
            Stat::Min => "min",
            Stat::Sum => "sum",
        }
    }
}

impl std::str::FromStr for Stat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stat::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!("unknown statistic `{s}` (expected avg, count, max, min or sum)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowMeasure {
    Optionality,
    Parallelism,
}

impl FlowMeasure {
    pub fn name(self) -> &'static str {
        match self {
            FlowMeasure::Optionality => "optionality",
            FlowMeasure::Parallelism => "parallelism",
        }
    }
}

/// One symbol of a k-gram; `Start` pads the beginning of a trace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GramSymbol {
    Start,
    Activity(String),
}

/// A column of a feature matrix. The derived ordering puts kinds in
/// declaration order and sorts lexicographically within a kind (positions
/// compare numerically).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DimensionLabel {
    Categorical {
        attribute: String,
        value: String,
    },
    KGram(Vec<GramSymbol>),
    Positional {
        activity: String,
        position: usize,
    },
    Statistic {
        attribute: String,
        stat: Stat,
    },
    Flow {
        activity: String,
        measure: FlowMeasure,
    },
    /// Bucket for values unseen when a frozen index was built.
    Other {
        scope: String,
    },
}

pub const GRAM_SCOPE: &str = "gram";

impl fmt::Display for DimensionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionLabel::Categorical { attribute, value } => write!(f, "{attribute}={value}"),
            DimensionLabel::KGram(gram) => {
                for (i, s) in gram.iter().enumerate() {
                    if i > 0 {
                        f.write_str(">")?;
                    }
                    match s {
                        GramSymbol::Start => f.write_str("^")?,
                        GramSymbol::Activity(a) => f.write_str(a)?,
                    }
                }
                Ok(())
            }
            DimensionLabel::Positional { activity, position } => write!(f, "{activity}@{position}"),
            DimensionLabel::Statistic { attribute, stat } => {
                write!(f, "{attribute}.{}", stat.name())
            }
            DimensionLabel::Flow { activity, measure } => {
                write!(f, "{activity}.{}", measure.name())
            }
            DimensionLabel::Other { scope } => write!(f, "{scope}=<other>"),
        }
    }
}

/// Several values of one attribute folded into a single dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeGroup {
    pub attribute: String,
    pub name: String,
    pub values: Vec<String>,
}

/// How the dimensions of the vector space are derived from a log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dimensioning {
    /// One dimension per observed value of each listed attribute.
    Categorical {
        attributes: Vec<String>,
        merges: Vec<MergeGroup>,
    },
    /// One dimension per observed k-gram of activities, with `k - 1` start
    /// pads.
    KGram { k: usize },
    /// One dimension per (activity, position). `None` resolves to the 95th
    /// percentile trace length of the log.
    Positional { max_positions: Option<usize> },
    /// One dimension per (attribute, statistic).
    Statistics {
        attributes: Vec<String>,
        stats: Vec<Stat>,
    },
}

impl Dimensioning {
    pub(crate) fn merged_value(&self, attribute: &str, value: String) -> String {
        if let Dimensioning::Categorical { merges, .. } = self {
            for m in merges {
                if m.attribute == attribute && m.values.contains(&value) {
                    return m.name.clone();
                }
            }
        }
        value
    }
}

/// Ordered, duplicate-free dimension labels plus the rule that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionIndex {
    dims: Vec<DimensionLabel>,
    positions: HashMap<DimensionLabel, usize>,
    rule: Option<Dimensioning>,
}

impl DimensionIndex {
    pub fn new(labels: impl IntoIterator<Item = DimensionLabel>) -> Self {
        let mut dims: Vec<DimensionLabel> = labels.into_iter().collect();
        dims.sort();
        dims.dedup();
        let positions = dims
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        DimensionIndex {
            dims,
            positions,
            rule: None,
        }
    }

    pub(crate) fn with_rule(mut self, rule: Dimensioning) -> Self {
        self.rule = Some(rule);
        self
    }

    pub fn rule(&self) -> Option<&Dimensioning> {
        self.rule.as_ref()
    }

    /// Adds `Other` buckets so values unseen at build time are kept when the
    /// index is reused on a new log.
    pub fn with_other(self) -> Self {
        let scopes: Vec<String> = match &self.rule {
            Some(Dimensioning::Categorical { attributes, .. }) => attributes.clone(),
            Some(Dimensioning::KGram { .. }) => vec![GRAM_SCOPE.to_string()],
            _ => Vec::new(),
        };
        let rule = self.rule.clone();
        let mut index = DimensionIndex::new(
            self.dims.into_iter().chain(
                scopes
                    .into_iter()
                    .map(|scope| DimensionLabel::Other { scope }),
            ),
        );
        index.rule = rule;
        index
    }

    pub fn has_other(&self, scope: &str) -> Option<usize> {
        self.position(&DimensionLabel::Other {
            scope: scope.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn labels(&self) -> &[DimensionLabel] {
        &self.dims
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DimensionLabel> {
        self.dims.iter()
    }

    pub fn position(&self, label: &DimensionLabel) -> Option<usize> {
        self.positions.get(label).copied()
    }

    /// Appends labels after the existing ones, keeping their given order.
    pub(crate) fn extended(&self, extra: impl IntoIterator<Item = DimensionLabel>) -> Self {
        let mut dims = self.dims.clone();
        for l in extra {
            if !self.positions.contains_key(&l) && !dims.contains(&l) {
                dims.push(l);
            }
        }
        let positions = dims
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        DimensionIndex {
            dims,
            positions,
            rule: self.rule.clone(),
        }
    }
}

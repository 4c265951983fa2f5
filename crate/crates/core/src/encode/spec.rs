//! Encoding specifications and the built-in encoder catalog.

use super::dimension::{Dimensioning, Stat};
use super::predicate::FilterPredicate;
use super::{activity_present, EncodeError, Valuation, ValuationKind};
use crate::log::ACTIVITY;

/// A declarative encoding: filter, dimensioning rule and valuation. Grouping
/// is always by case.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    pub name: String,
    pub filter: FilterPredicate,
    pub dimensioning: Dimensioning,
    pub valuation: Valuation,
}

impl EncodingSpec {
    /// Adds `extra` to the spec's own filter.
    pub fn and_filter(mut self, extra: &FilterPredicate) -> Self {
        self.filter = self.filter.and(extra);
        self
    }
}

/// Presence of each activity.
pub fn one_hot() -> EncodingSpec {
    one_hot_over(&[ACTIVITY])
}

/// Presence of each observed value of the given attributes.
pub fn one_hot_over(attributes: &[&str]) -> EncodingSpec {
    EncodingSpec {
        name: "one-hot".into(),
        filter: FilterPredicate::all(),
        dimensioning: Dimensioning::Categorical {
            attributes: attributes.iter().map(|a| a.to_string()).collect(),
            merges: Vec::new(),
        },
        valuation: Valuation::new(ValuationKind::Presence),
    }
}

/// Count of each activity per case.
pub fn activity_profile() -> EncodingSpec {
    EncodingSpec {
        name: "activity-profile".into(),
        filter: activity_present(),
        dimensioning: Dimensioning::Categorical {
            attributes: vec![ACTIVITY.into()],
            merges: Vec::new(),
        },
        valuation: Valuation::new(ValuationKind::Count),
    }
}

/// Counts of each run of `k` consecutive activities, the trace padded with
/// `k - 1` start symbols.
pub fn kgram(k: usize) -> Result<EncodingSpec, EncodeError> {
    if k < 1 {
        return Err(EncodeError::Config("k must be ≥ 1".into()));
    }
    Ok(EncodingSpec {
        name: format!("kgram:k={k}"),
        filter: activity_present(),
        dimensioning: Dimensioning::KGram { k },
        valuation: Valuation::new(ValuationKind::Count),
    })
}

/// Indicator of which activity occupies each of the first positions.
/// `None` uses the 95th-percentile trace length.
pub fn positional(max_positions: Option<usize>) -> Result<EncodingSpec, EncodeError> {
    if max_positions == Some(0) {
        return Err(EncodeError::Config("max positions must be ≥ 1".into()));
    }
    Ok(EncodingSpec {
        name: match max_positions {
            Some(m) => format!("positional:max={m}"),
            None => "positional".into(),
        },
        filter: activity_present(),
        dimensioning: Dimensioning::Positional { max_positions },
        valuation: Valuation::new(ValuationKind::PositionalIndicator),
    })
}

/// Per-case statistics of numeric attributes.
pub fn numstats(attributes: &[&str], stats: &[Stat]) -> Result<EncodingSpec, EncodeError> {
    if attributes.is_empty() {
        return Err(EncodeError::Config(
            "numstats needs at least one attribute".into(),
        ));
    }
    if stats.is_empty() {
        return Err(EncodeError::Config(
            "numstats needs at least one statistic".into(),
        ));
    }
    let stat_names: Vec<&str> = stats.iter().map(|s| s.name()).collect();
    Ok(EncodingSpec {
        name: format!(
            "numstats:attrs={};stats={}",
            attributes.join(";"),
            stat_names.join(",")
        ),
        filter: FilterPredicate::all(),
        dimensioning: Dimensioning::Statistics {
            attributes: attributes.iter().map(|a| a.to_string()).collect(),
            stats: stats.to_vec(),
        },
        valuation: Valuation::new(ValuationKind::Statistic),
    })
}

/// Every built-in encoder with default parameters.
pub fn builtin_specs() -> Vec<EncodingSpec> {
    vec![
        one_hot(),
        activity_profile(),
        kgram(2).expect("valid k"),
        positional(None).expect("valid max"),
        numstats(
            &[crate::log::COST],
            &[Stat::Avg, Stat::Max, Stat::Min, Stat::Sum],
        )
        .expect("valid numstats"),
    ]
}

/// Parses `one-hot`, `activity-profile`, `kgram:k=<n>`, `positional[:max=<n>]`
/// or `numstats:attrs=<a;b>;stats=<avg,sum,...>`. `one-hot` also accepts
/// `:attrs=<a;b>`.
pub fn parse_encoder(text: &str) -> Result<EncodingSpec, EncodeError> {
    let cfg = |m: String| EncodeError::Config(m);
    let (name, params) = match text.split_once(':') {
        Some((n, p)) => (n.trim(), p),
        None => (text.trim(), ""),
    };

    // `a=1;b=x;y` → [(a, [1]), (b, [x, y])]
    let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
    for seg in params.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        match seg.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), vec![v.trim().to_string()])),
            None => match pairs.last_mut() {
                Some((_, vals)) => vals.push(seg.to_string()),
                None => return Err(cfg(format!("malformed encoder parameter `{seg}`"))),
            },
        }
    }
    let take = |key: &str| -> Option<Vec<String>> {
        pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    };
    let allow = |keys: &[&str]| -> Result<(), EncodeError> {
        match pairs.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
            Some((k, _)) => Err(cfg(format!("unknown parameter `{k}` for encoder `{name}`"))),
            None => Ok(()),
        }
    };
    let number = |key: &str| -> Result<Option<usize>, EncodeError> {
        match take(key) {
            None => Ok(None),
            Some(v) => v
                .join(";")
                .parse::<usize>()
                .map(Some)
                .map_err(|_| cfg(format!("`{key}` must be a non-negative integer"))),
        }
    };

    match name {
        "one-hot" => {
            allow(&["attrs"])?;
            Ok(match take("attrs") {
                Some(attrs) => {
                    let refs: Vec<&str> = attrs.iter().map(String::as_str).collect();
                    let mut s = one_hot_over(&refs);
                    s.name = text.trim().to_string();
                    s
                }
                None => one_hot(),
            })
        }
        "activity-profile" => {
            allow(&[])?;
            Ok(activity_profile())
        }
        "kgram" => {
            allow(&["k"])?;
            let k = number("k")?.ok_or_else(|| cfg("kgram needs `k=<n>`".into()))?;
            kgram(k)
        }
        "positional" => {
            allow(&["max"])?;
            positional(number("max")?)
        }
        "numstats" => {
            allow(&["attrs", "stats"])?;
            let attrs = take("attrs").ok_or_else(|| cfg("numstats needs `attrs=`".into()))?;
            let stats = take("stats").ok_or_else(|| cfg("numstats needs `stats=`".into()))?;
            let stats = stats
                .join(",")
                .split(',')
                .map(|s| s.trim().parse::<Stat>().map_err(cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&str> = attrs.iter().map(String::as_str).collect();
            numstats(&refs, &stats)
        }
        other => Err(cfg(format!(
            "unknown encoder `{other}` (expected one-hot, activity-profile, kgram, positional or numstats)"
        ))),
    }
}

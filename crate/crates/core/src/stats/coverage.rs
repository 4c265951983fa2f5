use serde::Serialize;

use super::StatsError;
use crate::log::VariantTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRow {
    pub cases_covered: usize,
    pub variant_count: usize,
    /// Percent of all cases, one decimal, rounded half-up.
    pub coverage_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageTable {
    pub rows: Vec<CoverageRow>,
    pub total_cases: usize,
    pub total_variants: usize,
}

/// Which cumulative points to report.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CoveragePoints {
    /// After the last variant of every run of equal counts.
    #[default]
    Plateaus,
    /// The first point whose rounded coverage reaches each percentage.
    Thresholds(Vec<f64>),
    /// After the top-k variants, for each k.
    TopK(Vec<usize>),
}

/// `part / total` as a percentage with one decimal, rounded half-up, using
/// integer arithmetic so the result is exact.
pub fn rounded_pct(part: usize, total: usize) -> f64 {
    let (p, t) = (part as u128, total as u128);
    let tenths = (p * 2000 + t) / (2 * t);
    tenths as f64 / 10.0
}

pub fn coverage_table(
    vt: &VariantTable,
    points: &CoveragePoints,
) -> Result<CoverageTable, StatsError> {
    if vt.is_empty() || vt.total_cases == 0 {
        return Err(StatsError::EmptyInput("variant table"));
    }
    let total = vt.total_cases;
    let m = vt.len();
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0;
    for v in &vt.variants {
        acc += v.count;
        cumulative.push(acc);
    }
    let row = |k: usize| CoverageRow {
        cases_covered: cumulative[k - 1],
        variant_count: k,
        coverage_pct: rounded_pct(cumulative[k - 1], total),
    };

    let mut ks: Vec<usize> = match points {
        CoveragePoints::Plateaus => (1..=m)
            .filter(|&k| k == m || vt.variants[k].count != vt.variants[k - 1].count)
            .collect(),
        CoveragePoints::TopK(ks) => {
            if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > m) {
                return Err(StatsError::Config(format!(
                    "top-k value {bad} outside 1..={m}"
                )));
            }
            ks.clone()
        }
        CoveragePoints::Thresholds(ts) => {
            let mut ks = Vec::with_capacity(ts.len());
            for &t in ts {
                if !(0.0..=100.0).contains(&t) {
                    return Err(StatsError::Config(format!(
                        "threshold {t}% outside [0, 100]"
                    )));
                }
                let k = (1..=m)
                    .find(|&k| rounded_pct(cumulative[k - 1], total) >= t)
                    .unwrap_or(m);
                ks.push(k);
            }
            ks
        }
    };
    ks.push(m);
    ks.sort_unstable();
    ks.dedup();
    Ok(CoverageTable {
        rows: ks.into_iter().map(row).collect(),
        total_cases: total,
        total_variants: m,
    })
}

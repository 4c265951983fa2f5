//! Discrete power-law fit of variant frequencies.
//!
//! For each candidate lower bound `xmin` the exponent is estimated with the
//! discrete maximum-likelihood approximation
//! `alpha = 1 + n / sum(ln(x / (xmin - 0.5)))` over the `n` counts `>= xmin`;
//! the reported fit is the candidate whose Kolmogorov–Smirnov distance to the
//! data is smallest.

use serde::Serialize;

use super::StatsError;
use crate::log::VariantTable;

/// Minimum number of distinct counts for a fit.
pub const MIN_DISTINCT_COUNTS: usize = 10;
/// Candidate tails must keep at least this many observations.
pub const MIN_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoFit {
    pub exponent: f64,
    pub xmin: u64,
    pub ks_distance: f64,
    /// Observations at or above `xmin`.
    pub tail_size: usize,
}

/// Hurwitz zeta `sum_{k>=0} (k + q)^-s` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    // (2k)! / B_2k
    #[allow(clippy::excessive_precision)]
    const A: [f64; 12] = [
        12.0,
        -720.0,
        30240.0,
        -1209600.0,
        47900160.0,
        -1.8924375803183791606e9,
        7.47242496e10,
        -2.950130727918164224e12,
        1.1646782814350067249e14,
        -4.5979787224074726105e15,
        1.8152105401943546773e17,
        -7.1661652561756670113e18,
    ];
    debug_assert!(s > 1.0 && q > 0.0);
    let mut sum = q.powf(-s);
    let mut a = q;
    let mut b = 0.0;
    let mut i = 0;
    while i < 9 || a <= 9.0 {
        i += 1;
        a += 1.0;
        b = a.powf(-s);
        sum += b;
        if (b / sum).abs() < f64::EPSILON {
            return sum;
        }
    }
    let w = a;
    sum += b * w / (s - 1.0);
    sum -= 0.5 * b;
    let mut fac = 1.0;
    let mut k = 0.0;
    for coef in A {
        fac *= s + k;
        b /= w;
        let t = fac * b / coef;
        sum += t;
        if (t / sum).abs() < f64::EPSILON {
            break;
        }
        k += 1.0;
        fac *= s + k;
        b /= w;
        k += 1.0;
    }
    sum
}

/// `P(X >= x)` for a discrete power law with exponent `alpha` above `xmin`.
pub fn power_law_ccdf(alpha: f64, xmin: u64, x: u64) -> f64 {
    if x <= xmin {
        return 1.0;
    }
    hurwitz_zeta(alpha, x as f64) / hurwitz_zeta(alpha, xmin as f64)
}

fn exponent(tail_log_sum: f64, tail_len: usize, xmin: u64) -> f64 {
    let shift = (xmin as f64 - 0.5).ln();
    1.0 + tail_len as f64 / (tail_log_sum - tail_len as f64 * shift)
}

/// KS distance between the sorted tail and the fitted law. Both CDFs are
/// step functions on the integers, so it is enough to compare at each
/// observed value and just before the next one.
fn ks_distance(tail: &[u64], alpha: f64, xmin: u64) -> f64 {
    let n = tail.len() as f64;
    let z0 = hurwitz_zeta(alpha, xmin as f64);
    let fitted_cdf = |x: u64| 1.0 - hurwitz_zeta(alpha, (x + 1) as f64) / z0;
    let mut d: f64 = 0.0;
    let mut i = 0;
    let mut below = 0.0; // empirical CDF just below the current value
    while i < tail.len() {
        let x = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == x {
            j += 1;
        }
        if x > xmin {
            d = d.max((below - fitted_cdf(x - 1)).abs());
        }
        let emp = j as f64 / n;
        d = d.max((emp - fitted_cdf(x)).abs());
        below = emp;
        i = j;
    }
    d.min(1.0)
}

pub fn pareto_fit(vt: &VariantTable) -> Result<ParetoFit, StatsError> {
    let counts: Vec<u64> = vt.variants.iter().map(|v| v.count as u64).collect();
    pareto_fit_counts(&counts)
}

/// Fits a discrete power law to positive integer observations.
pub fn pareto_fit_counts(counts: &[u64]) -> Result<ParetoFit, StatsError> {
    let mut xs: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    xs.sort_unstable();
    if xs.is_empty() {
        return Err(StatsError::EmptyInput("counts"));
    }
    if xs.first() == xs.last() {
        return Err(StatsError::Degenerate(format!(
            "all {} counts equal {}",
            xs.len(),
            xs[0]
        )));
    }
    let mut distinct: Vec<u64> = xs.clone();
    distinct.dedup();
    if distinct.len() < MIN_DISTINCT_COUNTS {
        return Err(StatsError::InsufficientData {
            what: "distinct counts",
            needed: MIN_DISTINCT_COUNTS,
            found: distinct.len(),
        });
    }

    // suffix sums of ln(x) so each candidate's exponent is O(1)
    let mut suffix_ln = vec![0.0; xs.len() + 1];
    for i in (0..xs.len()).rev() {
        suffix_ln[i] = suffix_ln[i + 1] + (xs[i] as f64).ln();
    }

    let mut best: Option<ParetoFit> = None;
    for &xmin in &distinct {
        let start = xs.partition_point(|&x| x < xmin);
        let tail = &xs[start..];
        if tail.len() < MIN_TAIL || tail.first() == tail.last() {
            break;
        }
        let alpha = exponent(suffix_ln[start], tail.len(), xmin);
        let d = ks_distance(tail, alpha, xmin);
        if best.is_none_or(|b| d < b.ks_distance) {
            best = Some(ParetoFit {
                exponent: alpha,
                xmin,
                ks_distance: d,
                tail_size: tail.len(),
            });
        }
    }
    best.ok_or(StatsError::InsufficientData {
        what: "observations in the tail",
        needed: MIN_TAIL,
        found: xs.len(),
    })
}

use serde::Serialize;

use super::StatsError;
use crate::flow::directly_follows;
use crate::log::EventLog;

/// Upper 5% point of the chi-square distribution with two degrees of freedom.
pub const CHI2_2DF_CRITICAL_5PCT: f64 = 5.991;
pub const MIN_NORMALITY_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub sample_size: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `n/6 * (g1^2 + g2^2/4)`, chi-square with 2 degrees of freedom under
    /// normality.
    pub statistic: f64,
    pub normal_at_5pct: bool,
}

/// Moment-based (Jarque–Bera) normality check.
pub fn normality_diagnostic(samples: &[f64]) -> Result<NormalityReport, StatsError> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(StatsError::InsufficientData {
            what: "samples",
            needed: MIN_NORMALITY_SAMPLES,
            found: n,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::Degenerate("non-finite sample".into()));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= f64::EPSILON * f64::EPSILON * mean * mean || m2 == 0.0 {
        return Err(StatsError::Degenerate("zero variance".into()));
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    Ok(NormalityReport {
        sample_size: n,
        skewness,
        excess_kurtosis,
        statistic,
        normal_at_5pct: statistic < CHI2_2DF_CRITICAL_5PCT,
    })
}

/// Nonzero directly-follows counts, the sample whose normality is checked
/// for structured processes.
pub fn dependency_frequency_samples(log: &EventLog) -> Result<Vec<f64>, StatsError> {
    let alphabet = log.activity_alphabet().len();
    if alphabet < 2 {
        return Err(StatsError::Precondition(format!(
            "need at least 2 activities, log has {alphabet}"
        )));
    }
    let samples: Vec<f64> = directly_follows(log)
        .nonzero()
        .map(|(_, _, c)| c as f64)
        .collect();
    if samples.len() < MIN_NORMALITY_SAMPLES {
        return Err(StatsError::InsufficientData {
            what: "nonzero directly-follows pairs",
            needed: MIN_NORMALITY_SAMPLES,
            found: samples.len(),
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::Event;

    #[test]
    fn rejects_small_and_constant() {
        assert!(matches!(
            normality_diagnostic(&[1.0; 5]),
            Err(StatsError::InsufficientData { .. })
        ));
        assert!(matches!(
            normality_diagnostic(&[3.0; 50]),
            Err(StatsError::Degenerate(_))
        ));
    }

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let xs: Vec<f64> = (-50..=50).map(f64::from).collect();
        let r = normality_diagnostic(&xs).unwrap();
        assert!(r.skewness.abs() < 1e-12);
        // uniform: excess kurtosis close to -1.2
        assert!((r.excess_kurtosis + 1.2).abs() < 0.01);
    }

    #[test]
    fn dependency_samples_need_enough_pairs() {
        let single = EventLog::from_events([
            Event::new("1", "c", Some("a"), 0).unwrap(),
            Event::new("2", "c", Some("a"), 1).unwrap(),
        ]);
        assert!(matches!(
            dependency_frequency_samples(&single),
            Err(StatsError::Precondition(_))
        ));
        let ab = EventLog::from_events([
            Event::new("1", "c", Some("a"), 0).unwrap(),
            Event::new("2", "c", Some("b"), 1).unwrap(),
        ]);
        assert!(matches!(
            dependency_frequency_samples(&ab),
            Err(StatsError::InsufficientData { found: 1, .. })
        ));
    }
}

//! Timestamp parsing and formatting. Everything is normalized to
//! milliseconds since the Unix epoch, UTC.

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimestampError {
    #[error("cannot parse `{input}` as a timestamp")]
    Unparseable { input: String },
    #[error("timestamp `{input}` lies before 1970-01-01")]
    BeforeEpoch { input: String },
    #[error("empty timestamp pattern")]
    EmptyPattern,
}

/// Parses ISO-8601 text: `YYYY-MM-DD`, `YYYY-MM-DDThh:mm:ss[.fff]` (a space
/// also separates date and time), with an optional `Z` or `±hh:mm` offset.
/// Without an offset the value is read as UTC.
pub fn parse_iso8601(input: &str) -> Result<i64, TimestampError> {
    let s = input.trim();
    let ms = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.timestamp_millis()
    } else if let Ok(dt) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f%:z") {
        dt.timestamp_millis()
    } else if let Ok(dt) = DateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f%:z") {
        dt.timestamp_millis()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f") {
        dt.and_utc().timestamp_millis()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f") {
        dt.and_utc().timestamp_millis()
    } else if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        d.and_hms_opt(0, 0, 0)
            .expect("midnight")
            .and_utc()
            .timestamp_millis()
    } else {
        return Err(TimestampError::Unparseable {
            input: input.to_string(),
        });
    };
    non_negative(ms, input)
}

fn non_negative(ms: i64, input: &str) -> Result<i64, TimestampError> {
    if ms < 0 {
        Err(TimestampError::BeforeEpoch {
            input: input.to_string(),
        })
    } else {
        Ok(ms)
    }
}

/// Renders epoch milliseconds as `YYYY-MM-DDThh:mm:ss.SSSZ`.
pub fn format_millis(ms: i64) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ms.to_string())
}

/// A user-supplied timestamp layout.
///
/// Tokens: `YYYY` year, `MM` month, `DD` day, `hh` hour (24h), `mm` minute,
/// `ss` second, `.SSS` fractional seconds, `±zz:zz` (or `+zz:zz`) UTC offset.
/// Every other character must appear literally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestampPattern {
    source: String,
    chrono_format: String,
    has_time: bool,
    has_offset: bool,
}

impl TimestampPattern {
    pub fn compile(pattern: &str) -> Result<Self, TimestampError> {
        if pattern.is_empty() {
            return Err(TimestampError::EmptyPattern);
        }
        const TOKENS: [(&str, &str); 9] = [
            ("YYYY", "%Y"),
            ("±zz:zz", "%:z"),
            ("+zz:zz", "%:z"),
            (".SSS", "%.3f"),
            ("MM", "%m"),
            ("DD", "%d"),
            ("hh", "%H"),
            ("mm", "%M"),
            ("ss", "%S"),
        ];
        let mut out = String::new();
        let mut has_time = false;
        let mut has_offset = false;
        let mut rest = pattern;
        'outer: while !rest.is_empty() {
            for (tok, fmt) in TOKENS {
                if let Some(tail) = rest.strip_prefix(tok) {
                    out.push_str(fmt);
                    has_time |= matches!(tok, "hh" | "mm" | "ss" | ".SSS");
                    has_offset |= fmt == "%:z";
                    rest = tail;
                    continue 'outer;
                }
            }
            let c = rest.chars().next().expect("non-empty");
            if c == '%' {
                out.push_str("%%");
            } else {
                out.push(c);
            }
            rest = &rest[c.len_utf8()..];
        }
        Ok(TimestampPattern {
            source: pattern.to_string(),
            chrono_format: out,
            has_time,
            has_offset,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn parse(&self, input: &str) -> Result<i64, TimestampError> {
        let s = input.trim();
        let err = || TimestampError::Unparseable {
            input: input.to_string(),
        };
        let ms = if self.has_offset {
            DateTime::parse_from_str(s, &self.chrono_format)
                .map_err(|_| err())?
                .timestamp_millis()
        } else if self.has_time {
            NaiveDateTime::parse_from_str(s, &self.chrono_format)
                .map_err(|_| err())?
                .and_utc()
                .timestamp_millis()
        } else {
            NaiveDate::parse_from_str(s, &self.chrono_format)
                .map_err(|_| err())?
                .and_hms_opt(0, 0, 0)
                .expect("midnight")
                .and_utc()
                .timestamp_millis()
        };
        non_negative(ms, input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_variants() {
        assert_eq!(parse_iso8601("1970-01-01").unwrap(), 0);
        assert_eq!(parse_iso8601("1970-01-01T00:00:01Z").unwrap(), 1000);
        assert_eq!(parse_iso8601("1970-01-01T00:00:01.250Z").unwrap(), 1250);
        assert_eq!(parse_iso8601("1970-01-01T01:00:00+01:00").unwrap(), 0);
        assert_eq!(parse_iso8601("1970-01-01 00:00:02").unwrap(), 2000);
        assert_eq!(parse_iso8601("1970-01-01T00:00:02.5").unwrap(), 2500);
        assert!(parse_iso8601("yesterday").is_err());
        assert!(matches!(
            parse_iso8601("1969-12-31"),
            Err(TimestampError::BeforeEpoch { .. })
        ));
    }

    #[test]
    fn format_roundtrip() {
        let t = parse_iso8601("2020-03-04T05:06:07.089Z").unwrap();
        assert_eq!(format_millis(t), "2020-03-04T05:06:07.089Z");
        assert_eq!(parse_iso8601(&format_millis(t)).unwrap(), t);
    }

    #[test]
    fn patterns() {
        let p = TimestampPattern::compile("DD/MM/YYYY hh:mm:ss").unwrap();
        assert_eq!(p.parse("02/01/1970 00:00:00").unwrap(), 86_400_000);
        let p = TimestampPattern::compile("YYYY-MM-DD").unwrap();
        assert_eq!(p.parse("1970-01-02").unwrap(), 86_400_000);
        let p = TimestampPattern::compile("YYYY-MM-DDThh:mm:ss.SSS±zz:zz").unwrap();
        assert_eq!(p.parse("1970-01-01T02:00:00.500+02:00").unwrap(), 500);
        assert_eq!(p.parse("1970-01-01T00:00:00.500-00:00").unwrap(), 500);
        let p = TimestampPattern::compile("YYYYMMDDhhmm").unwrap();
        assert_eq!(p.parse("197001010001").unwrap(), 60_000);
        assert!(p.parse("1970-01-01").is_err());
        assert!(TimestampPattern::compile("").is_err());
    }
}

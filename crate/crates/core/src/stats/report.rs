//! Serialization of statistics reports as JSON lines (one record per row) or
//! aligned-column text.

use std::io::{self, Write};

use serde::Serialize;

use super::{rounded_pct, CoverageTable, NormalityReport, ParetoFit};
use crate::log::VariantTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    JsonLines,
    Text,
}

#[derive(Serialize)]
struct VariantRecord<'a> {
    rank: usize,
    count: usize,
    pct: f64,
    trace: &'a [String],
}

fn json_line<T: Serialize, W: Write>(w: &mut W, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, record)?;
    writeln!(w)
}

fn text_table<W: Write>(w: &mut W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let last = cells.len() - 1;
        let mut s = String::new();
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == last {
                s.push_str(c);
            } else {
                let pad = widths[i] - c.chars().count();
                s.push_str(c);
                s.extend(std::iter::repeat_n(' ', pad));
            }
        }
        s
    };
    writeln!(w, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(w, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

pub fn write_coverage<W: Write>(t: &CoverageTable, fmt: ReportFormat, mut w: W) -> io::Result<()> {
    match fmt {
        ReportFormat::JsonLines => t.rows.iter().try_for_each(|r| json_line(&mut w, r)),
        ReportFormat::Text => {
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.cases_covered.to_string(),
                        r.variant_count.to_string(),
                        format!("{:.1}%", r.coverage_pct),
                    ]
                })
                .collect();
            text_table(&mut w, &["cases", "variants", "coverage"], &rows)
        }
    }
}

pub fn write_variants<W: Write>(vt: &VariantTable, fmt: ReportFormat, mut w: W) -> io::Result<()> {
    let records = vt.variants.iter().enumerate().map(|(i, v)| VariantRecord {
        rank: i + 1,
        count: v.count,
        pct: rounded_pct(v.count, vt.total_cases),
        trace: &v.trace,
    });
    match fmt {
        ReportFormat::JsonLines => records.into_iter().try_for_each(|r| json_line(&mut w, &r)),
        ReportFormat::Text => {
            let rows: Vec<Vec<String>> = records
                .map(|r| {
                    vec![
                        r.rank.to_string(),
                        r.count.to_string(),
                        format!("{:.1}%", r.pct),
                        format!("<{}>", r.trace.join(",")),
                    ]
                })
                .collect();
            text_table(&mut w, &["rank", "count", "share", "trace"], &rows)
        }
    }
}

pub fn write_pareto<W: Write>(fit: &ParetoFit, fmt: ReportFormat, mut w: W) -> io::Result<()> {
    match fmt {
        ReportFormat::JsonLines => json_line(&mut w, fit),
        ReportFormat::Text => text_table(
            &mut w,
            &["exponent", "xmin", "ks_distance", "tail_size"],
            &[vec![
                format!("{:.4}", fit.exponent),
                fit.xmin.to_string(),
                format!("{:.4}", fit.ks_distance),
                fit.tail_size.to_string(),
            ]],
        ),
    }
}

pub fn write_normality<W: Write>(
    r: &NormalityReport,
    fmt: ReportFormat,
    mut w: W,
) -> io::Result<()> {
    match fmt {
        ReportFormat::JsonLines => json_line(&mut w, r),
        ReportFormat::Text => text_table(
            &mut w,
            &[
                "n",
                "skewness",
                "excess_kurtosis",
                "statistic",
                "normal_at_5pct",
            ],
            &[vec![
                r.sample_size.to_string(),
                format!("{:.4}", r.skewness),
                format!("{:.4}", r.excess_kurtosis),
                format!("{:.4}", r.statistic),
                r.normal_at_5pct.to_string(),
            ]],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{coverage_table, CoveragePoints};

    #[test]
    fn coverage_jsonl_one_record_per_row() {
        let vt = VariantTable::from_counts(&[20, 11, 3]);
        let t = coverage_table(&vt, &CoveragePoints::Plateaus).unwrap();
        let mut buf = Vec::new();
        write_coverage(&t, ReportFormat::JsonLines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[2],
            r#"{"cases_covered":34,"variant_count":3,"coverage_pct":100.0}"#
        );
    }

    #[test]
    fn variants_text_is_aligned() {
        let vt = VariantTable::from_counts(&[20, 11, 3]);
        let mut buf = Vec::new();
        write_variants(&vt, ReportFormat::Text, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rank  count  share  trace");
        assert_eq!(lines[1], "1     20     58.8%  <v1>");
        assert_eq!(lines[3], "3     3      8.8%   <v3>");
    }
}

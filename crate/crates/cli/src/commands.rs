use std::fs;
use std::io::{self, Write};
use std::path::Path;

use pmenc::encode::{apply_encoding, apply_filter, parse_encoder, parse_predicate, EncodeError};
use pmenc::flow::{
    concurrency_pairs, dependency_matrix, directly_follows, FlowError,
    DEFAULT_CONCURRENCY_THRESHOLD,
};
use pmenc::ingest::{
    csv_headers, parse_csv, parse_xes, validate as validate_log, write_csv, CsvMapping,
};
use pmenc::stats::{
    self, coverage_table, dependency_frequency_samples, normality_diagnostic, pareto_fit, report,
    BalanceKind, BalanceStrategy, CoveragePoints, ReportFormat, StatsError,
};
use pmenc::{extract_variants, EventLog, FilterPredicate};

use crate::args::{
    load_config, resolve, BalanceArgs, EncodeArgs, FlowArgs, FlowReport, Format, Resolved,
    StatsArgs, StatsReport, TextFormat, ValidateArgs,
};
use crate::CliError;

fn encode_error(e: EncodeError) -> CliError {
    if e.is_config() {
        CliError::Config(e.to_string())
    } else {
        CliError::Data(e.to_string())
    }
}

fn stats_error(e: StatsError) -> CliError {
    if e.is_config() {
        CliError::Config(e.to_string())
    } else {
        CliError::Data(e.to_string())
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn parse_filter(r: &Resolved) -> Result<Option<FilterPredicate>, CliError> {
    r.filter
        .as_deref()
        .map(|text| parse_predicate(text).map_err(|e| CliError::Config(format!("--filter: {e}"))))
        .transpose()
}

fn input_format(r: &Resolved) -> Result<Format, CliError> {
    if let Some(f) = r.format {
        return Ok(f);
    }
    match r
        .input
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("xes") => Ok(Format::Xes),
        Some("csv") => Ok(Format::Csv),
        _ => Err(CliError::Config(format!(
            "{}: cannot infer the input format, use --format xes|csv",
            r.input.display()
        ))),
    }
}

fn read_log(r: &Resolved) -> Result<EventLog, CliError> {
    let format = input_format(r)?;
    let bytes = fs::read(&r.input).map_err(|e| io_error(&r.input, e))?;
    let path = r.input.display();
    match format {
        Format::Xes => {
            if r.case_col.is_some() || r.activity_col.is_some() || r.time_col.is_some() {
                log::warn!("column flags are ignored for XES input");
            }
            parse_xes(&bytes).map_err(|e| CliError::Data(format!("{path}: {e}")))
        }
        Format::Csv => {
            let mut mapping = CsvMapping {
                infer_other_columns: true,
                timestamp_format: r.time_format.clone(),
                ..CsvMapping::default()
            };
            if let Some(c) = &r.case_col {
                mapping.case_column = c.clone();
            }
            if let Some(c) = &r.activity_col {
                mapping.activity_column = c.clone();
            }
            if let Some(c) = &r.time_col {
                mapping.timestamp_column = c.clone();
            }
            let headers =
                csv_headers(&bytes).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
            if headers.iter().any(|h| h == "event_id") {
                mapping.event_id_column = Some("event_id".into());
            }
            parse_csv(&bytes, &mapping).map_err(|e| {
                let msg = format!("{path}: {e}");
                if e.is_config() {
                    CliError::Config(msg)
                } else {
                    CliError::Data(msg)
                }
            })
        }
    }
}

fn filtered(log: EventLog, filter: Option<&FilterPredicate>) -> Result<EventLog, CliError> {
    match filter {
        Some(p) => apply_filter(&log, p).map_err(encode_error),
        None => Ok(log),
    }
}

/// Writes `data` to `out`, or to stdout when no file is given.
fn emit(out: Option<&Path>, data: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, data).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .lock()
            .write_all(data)
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

pub fn encode(a: &EncodeArgs) -> Result<(), CliError> {
    let file = load_config(&a.common)?;
    let r = resolve(&a.common, &file)?;
    let encoder = a
        .encoder
        .clone()
        .or_else(|| file.encoder())
        .ok_or_else(|| CliError::Config("no encoder given (use --encoder)".into()))?;
    let spec = parse_encoder(&encoder).map_err(encode_error)?;
    let filter = parse_filter(&r)?;

    let log = read_log(&r)?;
    let input_cases = log.case_count();
    let log = filtered(log, filter.as_ref())?;
    let m = apply_encoding(&log, &spec).map_err(encode_error)?;
    eprintln!(
        "encoder={} n={} d={} dropped={}",
        spec.name,
        m.nrows(),
        m.ncols(),
        input_cases - m.nrows()
    );
    emit(r.out.as_deref(), m.to_csv_string().as_bytes())
}

pub fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let file = load_config(&a.common)?;
    let r = resolve(&a.common, &file)?;
    let kind = match a.report {
        Some(k) => k,
        None => file.stats_report()?.unwrap_or(StatsReport::Coverage),
    };
    let fmt = match a.report_format.or(file.report_format()) {
        Some(TextFormat::Text) => ReportFormat::Text,
        Some(TextFormat::Jsonl) | None => ReportFormat::JsonLines,
    };
    let thresholds = a.thresholds.clone().or_else(|| file.thresholds());
    if let Some(ts) = &thresholds {
        if kind != StatsReport::Coverage {
            return Err(CliError::Config(
                "--thresholds only applies to --report coverage".into(),
            ));
        }
        if let Some(bad) = ts.iter().find(|t| !(0.0..=100.0).contains(*t)) {
            return Err(CliError::Config(format!(
                "threshold {bad}% outside [0, 100]"
            )));
        }
    }
    let filter = parse_filter(&r)?;
    let log = filtered(read_log(&r)?, filter.as_ref())?;

    let mut buf = Vec::new();
    let written = match kind {
        StatsReport::Coverage => {
            let points = match thresholds {
                Some(ts) => CoveragePoints::Thresholds(ts),
                None => CoveragePoints::Plateaus,
            };
            let t = coverage_table(&extract_variants(&log), &points).map_err(stats_error)?;
            report::write_coverage(&t, fmt, &mut buf)
        }
        StatsReport::Variants => report::write_variants(&extract_variants(&log), fmt, &mut buf),
        StatsReport::Pareto => {
            let fit = pareto_fit(&extract_variants(&log)).map_err(stats_error)?;
            report::write_pareto(&fit, fmt, &mut buf)
        }
        StatsReport::Normality => {
            let samples = dependency_frequency_samples(&log).map_err(stats_error)?;
            let rep = normality_diagnostic(&samples).map_err(stats_error)?;
            report::write_normality(&rep, fmt, &mut buf)
        }
    };
    written.map_err(|e| CliError::Data(e.to_string()))?;
    emit(r.out.as_deref(), &buf)
}

fn parse_strategy(text: &str) -> Result<BalanceKind, CliError> {
    match text.trim() {
        "oversample-to-max" => Ok(BalanceKind::OversampleToMax),
        "undersample-to-min" => Ok(BalanceKind::UndersampleToMin),
        other => {
            let n = other
                .strip_prefix("target-count:")
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown strategy `{other}` (expected oversample-to-max, \
                         undersample-to-min or target-count:<n>)"
                    ))
                })?
                .trim()
                .parse::<usize>()
                .map_err(|e| CliError::Config(format!("target-count: {e}")))?;
            if n == 0 {
                return Err(CliError::Config("target count must be ≥ 1".into()));
            }
            Ok(BalanceKind::TargetCount(n))
        }
    }
}

pub fn balance(a: &BalanceArgs) -> Result<(), CliError> {
    let file = load_config(&a.common)?;
    let r = resolve(&a.common, &file)?;
    let strategy = a
        .strategy
        .clone()
        .or_else(|| file.strategy())
        .ok_or_else(|| CliError::Config("no strategy given (use --strategy)".into()))?;
    let kind = parse_strategy(&strategy)?;
    let seed = a
        .seed
        .or(file.seed())
        .ok_or_else(|| CliError::Config("balance needs an explicit --seed".into()))?;
    let filter = parse_filter(&r)?;
    let log = filtered(read_log(&r)?, filter.as_ref())?;

    let out = stats::balance(&log, &BalanceStrategy::new(kind, seed)).map_err(stats_error)?;
    eprintln!(
        "cases {} -> {}, variants {}",
        log.case_count(),
        out.case_count(),
        extract_variants(&out).len()
    );
    let mut buf = Vec::new();
    write_csv(&out, &mut buf).map_err(|e| CliError::Data(e.to_string()))?;
    emit(r.out.as_deref(), &buf)
}

pub fn flow(a: &FlowArgs) -> Result<(), CliError> {
    let file = load_config(&a.common)?;
    let r = resolve(&a.common, &file)?;
    let kind = match a.report {
        Some(k) => k,
        None => file.flow_report()?.unwrap_or(FlowReport::Csv),
    };
    let threshold = a
        .threshold
        .or(file.threshold())
        .unwrap_or(DEFAULT_CONCURRENCY_THRESHOLD);
    if !(0.0..1.0).contains(&threshold) {
        return Err(CliError::Config(
            FlowError::Threshold(threshold).to_string(),
        ));
    }
    let dir = r.out.clone().ok_or_else(|| {
        CliError::Config("flow writes several files; give a directory with --out".into())
    })?;
    let filter = parse_filter(&r)?;
    let log = filtered(read_log(&r)?, filter.as_ref())?;

    let df = directly_follows(&log);
    let rel = concurrency_pairs(&df, threshold).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))
    };
    write("dfg.csv", df.to_csv())?;
    write("dependency.csv", dependency_matrix(&df).to_csv())?;
    write("concurrency.txt", rel.to_text())?;
    if kind == FlowReport::Dot {
        write("dfg.dot", df.to_dot())?;
    }
    eprintln!(
        "activities={} edges={} concurrent_pairs={}",
        df.size(),
        df.nonzero().count(),
        rel.len()
    );
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let file = load_config(&a.common)?;
    let r = resolve(&a.common, &file)?;
    let filter = parse_filter(&r)?;
    let log = filtered(read_log(&r)?, filter.as_ref())?;
    let rep = validate_log(&log);
    eprintln!(
        "{} events in {} cases: {}",
        rep.event_count,
        rep.case_count,
        if rep.is_clean() {
            "clean"
        } else {
            "issues found"
        }
    );
    let mut text = serde_json::to_string(&rep).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    emit(r.out.as_deref(), text.as_bytes())
}

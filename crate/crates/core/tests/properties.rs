mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use pmenc::encode::{
    activity_profile, apply_encoding, apply_filter, build_dimensions, builtin_specs, group_by_case,
    kgram, one_hot, positional, valuate,
};
use pmenc::flow::{
    canonicalize, dependency, dependency_matrix, directly_follows, ConcurrencyRelation,
    DirectlyFollows,
};
use pmenc::ingest::{parse_csv, parse_xes, write_csv, CsvMapping};
use pmenc::log::COST;
use pmenc::stats::{
    balance, coverage_table, normality_diagnostic, pareto_fit_counts, BalanceKind, BalanceStrategy,
    CoveragePoints,
};
use pmenc::{extract_variants, AttributeValue, Event, EventLog, VariantTable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use common::{log_from_traces, PowerLawOracle};

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// (activity index or unlabeled, cost, time step) per event.
type RawEvent = (Option<usize>, Option<u16>, u8);

fn raw_log() -> impl Strategy<Value = Vec<Vec<RawEvent>>> {
    let event = (
        prop::option::weighted(0.95, 0..NAMES.len()),
        prop::option::weighted(0.7, 0..1000u16),
        0..3u8,
    );
    prop::collection::vec(prop::collection::vec(event, 1..10), 0..20)
}

fn build(raw: &[Vec<RawEvent>]) -> EventLog {
    let mut events = Vec::new();
    for (c, case) in raw.iter().enumerate() {
        let mut ts = 1_000_000 + c as i64;
        for (i, (act, cost, step)) in case.iter().enumerate() {
            ts += i64::from(*step) * 1000;
            let mut e = Event::new(
                format!("e{c}.{i}"),
                format!("case{c:02}"),
                act.map(|a| NAMES[a]),
                ts,
            )
            .unwrap();
            if let Some(cost) = cost {
                e.set_attribute(COST, AttributeValue::Real(f64::from(*cost) / 8.0))
                    .unwrap();
            }
            events.push(e);
        }
    }
    EventLog::from_events(events)
}

fn arb_log() -> impl Strategy<Value = EventLog> {
    raw_log().prop_map(|raw| build(&raw))
}

fn arb_relation() -> impl Strategy<Value = ConcurrencyRelation> {
    prop::collection::vec((0..NAMES.len(), 0..NAMES.len()), 0..10).prop_map(|pairs| {
        let mut rel = ConcurrencyRelation::new();
        for (a, b) in pairs {
            if a != b {
                rel.insert(NAMES[a], NAMES[b]);
            }
        }
        rel
    })
}

fn arb_trace() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(&NAMES[..]), 0..12)
}

/// Minimal XES serialization, enough to feed the parser.
fn to_xes(log: &EventLog) -> String {
    let mut s = String::from("<?xml version=\"1.0\"?>\n<log xes.version=\"1.0\">\n");
    for case in log.cases() {
        s += &format!(
            "<trace><string key=\"concept:name\" value=\"{}\"/>\n",
            case.case_id()
        );
        for e in case.events() {
            s += "<event>";
            s += &format!("<string key=\"identity:id\" value=\"{}\"/>", e.event_id());
            if let Some(a) = e.activity() {
                s += &format!("<string key=\"concept:name\" value=\"{a}\"/>");
            }
            s += &format!(
                "<date key=\"time:timestamp\" value=\"{}\"/>",
                e.attribute("timestamp")
            );
            if let AttributeValue::Real(c) = e.attribute(COST) {
                s += &format!("<float key=\"cost\" value=\"{c:?}\"/>");
            }
            s += "</event>\n";
        }
        s += "</trace>\n";
    }
    s + "</log>\n"
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(256)
    })]

    #[test]
    fn event_view_matches_case_view(log in arb_log()) {
        let by_case: usize = log.cases().map(|c| c.len()).sum();
        prop_assert_eq!(log.event_count(), by_case);
        prop_assert_eq!(log.events().count(), by_case);
    }

    #[test]
    fn variants_partition_the_cases(log in arb_log()) {
        let vt = extract_variants(&log);
        let labeled: Vec<&str> = log
            .cases()
            .filter(|c| !c.trace().is_empty())
            .map(|c| c.case_id())
            .collect();
        prop_assert_eq!(vt.total_cases, labeled.len());
        prop_assert_eq!(vt.counts().iter().sum::<usize>(), vt.total_cases);
        let mut seen = HashSet::new();
        for v in &vt.variants {
            prop_assert_eq!(v.count, v.case_ids.len());
            for id in &v.case_ids {
                prop_assert!(seen.insert(id.clone()), "case {} in two variants", id);
                let trace: Vec<String> =
                    log.case(id).unwrap().trace().iter().map(|s| s.to_string()).collect();
                prop_assert_eq!(&trace, &v.trace);
            }
        }
        prop_assert_eq!(seen.len(), labeled.len());
        // count descending, then trace ascending
        let sorted = vt
            .variants
            .windows(2)
            .all(|w| (w[0].count, &w[1].trace) > (w[1].count, &w[0].trace));
        prop_assert!(sorted);
        prop_assert_eq!(extract_variants(&log), vt);
    }

    #[test]
    fn fused_equals_staged(log in arb_log()) {
        for spec in builtin_specs() {
            let fused = apply_encoding(&log, &spec).unwrap();
            let filtered = apply_filter(&log, &spec.filter).unwrap();
            let dims = build_dimensions(&filtered, &spec);
            let staged = valuate(&group_by_case(&filtered, &dims), &spec.valuation).unwrap();
            prop_assert_eq!(fused, staged, "{}", spec.name);
        }
    }

    #[test]
    fn every_row_is_one_case(log in arb_log()) {
        for spec in builtin_specs() {
            let filtered = apply_filter(&log, &spec.filter).unwrap();
            let grouped = group_by_case(&filtered, &build_dimensions(&filtered, &spec));
            for (case_id, row) in grouped.rows() {
                for eid in &row.event_ids {
                    let owner = log.events().find(|e| e.event_id() == eid).unwrap().case_id();
                    prop_assert_eq!(owner, case_id.as_str());
                }
            }
            let m = apply_encoding(&log, &spec).unwrap();
            prop_assert!(m.nrows() <= log.case_count());
            let emptied = log
                .cases()
                .any(|c| c.events().iter().all(|e| !spec.filter.matches(e)));
            prop_assert_eq!(m.nrows() < log.case_count(), emptied, "{}", spec.name);
        }
    }

    #[test]
    fn presence_and_count_ranges(log in arb_log()) {
        let m = apply_encoding(&log, &one_hot()).unwrap();
        prop_assert!(m.values().iter().all(|&v| v == 0.0 || v == 1.0));
        let m = apply_encoding(&log, &activity_profile()).unwrap();
        for (i, id) in m.row_labels().iter().enumerate() {
            let labeled = log.case(id).unwrap().trace().len() as f64;
            prop_assert_eq!(m.row(i).iter().sum::<f64>(), labeled);
        }
    }

    #[test]
    fn profile_ignores_event_order(raw in raw_log()) {
        // Reverse the time order within every case.
        let reversed: Vec<Vec<RawEvent>> = raw
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.reverse();
                c.iter_mut().for_each(|e| e.2 = 1);
                c
            })
            .collect();
        let (x, y) = (build(&raw), build(&reversed));
        for spec in [one_hot(), activity_profile()] {
            let (mx, my) = (apply_encoding(&x, &spec).unwrap(), apply_encoding(&y, &spec).unwrap());
            prop_assert_eq!(mx.values(), my.values());
        }
    }

    #[test]
    fn encoding_is_deterministic(log in arb_log()) {
        for spec in builtin_specs() {
            let a = apply_encoding(&log, &spec).unwrap().to_csv_string();
            let b = apply_encoding(&log.clone(), &spec).unwrap().to_csv_string();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_round_trip(log in arb_log()) {
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let once = parse_csv(&buf, &CsvMapping::canonical()).unwrap();
        let twice = parse_csv(&buf, &CsvMapping::canonical()).unwrap();
        prop_assert_eq!(&once, &twice);
        let events = |l: &EventLog| -> BTreeMap<String, Vec<(String, String)>> {
            l.events()
                .map(|e| {
                    let attrs = e.attributes().map(|(k, v)| (k.to_string(), v.to_string())).collect();
                    (e.event_id().to_string(), attrs)
                })
                .collect()
        };
        prop_assert_eq!(events(&once), events(&log));
    }

    #[test]
    fn xes_parse_is_deterministic(log in arb_log()) {
        let text = to_xes(&log);
        let a = parse_xes(text.as_bytes()).unwrap();
        let b = parse_xes(text.as_bytes()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.event_count(), log.event_count());
        prop_assert_eq!(extract_variants(&a), extract_variants(&log));
    }

    #[test]
    fn dependency_is_antisymmetric(ab in 0u64..1_000_000, ba in 0u64..1_000_000) {
        prop_assert_eq!(dependency(ab, ba) + dependency(ba, ab), 0.0);
        let d = dependency(ab, ba);
        prop_assert!(d > -1.0 && d < 1.0);
    }

    #[test]
    fn dependency_matrix_is_antisymmetric(
        k in 1usize..7,
        counts in prop::collection::vec(0u64..500, 49),
    ) {
        let alphabet = NAMES[..k].iter().map(|s| s.to_string()).collect();
        let df = DirectlyFollows::from_counts(alphabet, counts[..k * k].to_vec());
        let dep = dependency_matrix(&df);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    prop_assert_eq!(dep.get(i, j), -dep.get(j, i));
                } else {
                    prop_assert!((0.0..1.0).contains(&dep.get(i, i)));
                }
            }
        }
    }

    #[test]
    fn follows_total_matches_trace_lengths(log in arb_log()) {
        let df = directly_follows(&log);
        let expect: usize = log.cases().map(|c| c.trace().len().saturating_sub(1)).sum();
        prop_assert_eq!(df.total(), expect as u64);
    }

    #[test]
    fn canonicalize_is_idempotent(t in arb_trace(), rel in arb_relation()) {
        let once = canonicalize(&t, &rel);
        prop_assert_eq!(canonicalize(&once, &rel), once.clone());
        let mut sorted_in: Vec<&str> = t.clone();
        let mut sorted_out: Vec<&str> = once.iter().map(String::as_str).collect();
        sorted_in.sort_unstable();
        sorted_out.sort_unstable();
        prop_assert_eq!(sorted_in, sorted_out);
    }

    #[test]
    fn concurrent_swaps_collapse(
        t in prop::collection::vec(prop::sample::select(&NAMES[..]), 2..12),
        rel in arb_relation(),
        at in any::<prop::sample::Index>(),
    ) {
        // Make sure at least one adjacent pair is concurrent, then try every
        // concurrent adjacent swap.
        let mut rel = rel;
        let k = at.index(t.len() - 1);
        if t[k] != t[k + 1] {
            rel.insert(t[k], t[k + 1]);
        }
        let canonical = canonicalize(&t, &rel);
        for i in 0..t.len() - 1 {
            if rel.contains(t[i], t[i + 1]) {
                let mut swapped = t.clone();
                swapped.swap(i, i + 1);
                prop_assert_eq!(&canonicalize(&swapped, &rel), &canonical, "swap at {}", i);
            }
        }
    }

    #[test]
    fn normality_is_affine_invariant(
        xs in prop::collection::vec(-1000.0f64..1000.0, 8..200),
        a in 0.01f64..100.0,
        b in -1000.0f64..1000.0,
    ) {
        let Ok(r) = normality_diagnostic(&xs) else { return Ok(()) };
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let s = normality_diagnostic(&ys).unwrap();
        prop_assert!((r.statistic - s.statistic).abs() <= 1e-9, "{} vs {}", r.statistic, s.statistic);
        prop_assert_eq!(r.normal_at_5pct, s.normal_at_5pct);
    }

    #[test]
    fn coverage_is_monotone_and_complete(counts in prop::collection::vec(1usize..5000, 1..60)) {
        let mut counts = counts;
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let vt = VariantTable::from_counts(&counts);
        for points in [
            CoveragePoints::Plateaus,
            CoveragePoints::TopK((1..=counts.len()).collect()),
            CoveragePoints::Thresholds(vec![10.0, 50.0, 80.0, 95.0]),
        ] {
            let t = coverage_table(&vt, &points).unwrap();
            prop_assert!(t.rows.windows(2).all(|w| w[0].coverage_pct <= w[1].coverage_pct
                && w[0].cases_covered < w[1].cases_covered));
            let last = t.rows.last().unwrap();
            prop_assert_eq!(last.coverage_pct, 100.0);
            prop_assert_eq!(last.variant_count, counts.len());
            prop_assert_eq!(last.cases_covered, counts.iter().sum::<usize>());
        }
    }

    #[test]
    fn oversampling_keeps_originals(log in arb_log(), seed in any::<u64>()) {
        prop_assume!(log.cases().all(|c| !c.trace().is_empty()) && !log.is_empty());
        let before = extract_variants(&log);
        let max = *before.counts().iter().max().unwrap();
        let out = balance(&log, &BalanceStrategy::new(BalanceKind::OversampleToMax, seed)).unwrap();
        for c in log.cases() {
            prop_assert_eq!(out.case(c.case_id()), Some(c));
        }
        let after = extract_variants(&out);
        prop_assert_eq!(after.len(), before.len());
        prop_assert!(after.counts().iter().all(|&c| c == max));
        let ids: HashSet<&str> = out.events().map(|e| e.event_id()).collect();
        prop_assert_eq!(ids.len(), out.event_count());
    }

    #[test]
    fn undersampling_keeps_a_subset(log in arb_log(), seed in any::<u64>()) {
        prop_assume!(log.cases().all(|c| !c.trace().is_empty()) && !log.is_empty());
        let min = *extract_variants(&log).counts().iter().min().unwrap();
        let out = balance(&log, &BalanceStrategy::new(BalanceKind::UndersampleToMin, seed)).unwrap();
        prop_assert!(extract_variants(&out).counts().iter().all(|&c| c == min));
        let order: Vec<usize> = out
            .cases()
            .map(|c| log.cases().position(|o| o == c).unwrap())
            .collect();
        prop_assert!(order.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn order_sensitive_encoders_see_permutations() {
    let log = log_from_traces(&[vec!["a", "b", "c"], vec!["c", "a", "b"]]);
    for spec in [one_hot(), activity_profile()] {
        let m = apply_encoding(&log, &spec).unwrap();
        assert_eq!(m.row(0), m.row(1), "{}", spec.name);
    }
    for spec in [kgram(2).unwrap(), positional(None).unwrap()] {
        let m = apply_encoding(&log, &spec).unwrap();
        assert_ne!(m.row(0), m.row(1), "{}", spec.name);
    }
}

#[test]
fn pareto_error_shrinks_with_sample_size() {
    let oracle = PowerLawOracle::new(2.5, 1);
    let seeds = 0..5u64;
    let mean_error = |n: usize| {
        let total: f64 = seeds
            .clone()
            .map(|s| {
                let fit = pareto_fit_counts(&oracle.samples(n, 100 + s)).unwrap();
                (fit.exponent - 2.5).abs()
            })
            .sum();
        total / seeds.clone().count() as f64
    };
    let errors: Vec<f64> = [1_000, 10_000, 100_000]
        .into_iter()
        .map(mean_error)
        .collect();
    assert!(
        errors.windows(2).all(|w| w[1] < w[0]),
        "mean |alpha - 2.5| by n: {errors:?}"
    );
}

#[test]
fn geometric_counts_fit_worse_than_power_law() {
    let power = pareto_fit_counts(&PowerLawOracle::new(2.5, 1).samples(10_000, 7)).unwrap();
    let geo = Geometric::new(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let counts: Vec<u64> = (0..10_000).map(|_| geo.sample(&mut rng) + 1).collect();
    let fit = pareto_fit_counts(&counts).unwrap();
    assert!(
        fit.ks_distance > power.ks_distance,
        "geometric ks {} vs power-law ks {}",
        fit.ks_distance,
        power.ks_distance
    );
}

#[test]
fn power_law_oracle_is_consistent() {
    // sanity checks on the test oracle itself
    let o = PowerLawOracle::new(2.5, 1);
    let z = 1.341_487_257_250_917; // zeta(2.5)
    assert!((o.ccdf(2) - (1.0 - 1.0 / z)).abs() < 1e-12);
    let xs = o.samples(50_000, 1);
    let ones = xs.iter().filter(|&&x| x == 1).count() as f64 / xs.len() as f64;
    assert!((ones - 1.0 / z).abs() < 0.01, "{ones}");
    let distinct: BTreeSet<u64> = xs.into_iter().collect();
    assert!(distinct.len() > 100);
}

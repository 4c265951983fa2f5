//! Synthetic event logs for benchmarking.

use pmenc::log::COST;
use pmenc::{AttributeValue, Event, EventLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A log of `cases` cases over `activities` activities. Traces follow a
/// skewed variant distribution so a few variants dominate.
pub fn synthetic_log(cases: usize, activities: usize, seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..activities).map(|i| format!("act{i:02}")).collect();
    let variants: Vec<Vec<usize>> = (0..64)
        .map(|_| {
            let len = rng.random_range(3..=15);
            (0..len).map(|_| rng.random_range(0..activities)).collect()
        })
        .collect();
    let mut events = Vec::new();
    for c in 0..cases {
        // roughly Zipf-shaped pick of the variant
        let u: f64 = rng.random();
        let v = ((variants.len() as f64).powf(u) - 1.0) as usize;
        let case = format!("case{c:07}");
        let mut ts = 1_600_000_000_000 + c as i64 * 3_600_000;
        for (i, &a) in variants[v].iter().enumerate() {
            ts += rng.random_range(1..600) * 1000;
            let cost = AttributeValue::Real(f64::from(rng.random_range(1..500u32)));
            let e = Event::new(format!("{case}.{i}"), &case, Some(&names[a]), ts)
                .and_then(|e| e.with_attribute(COST, cost))
                .expect("valid synthetic event");
            events.push(e);
        }
    }
    EventLog::from_events(events)
}

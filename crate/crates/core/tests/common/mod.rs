//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use pmenc::log::COST;
use pmenc::{AttributeValue, Event, EventLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOY: [(&[&str], usize); 3] = [
    (&["a", "b", "c"], 3),
    (&["a", "b", "a"], 11),
    (&["a", "c", "b", "a"], 20),
];

/// The 34-case toy log: cases c01..c03 follow <a,b,c>, c04..c14 <a,b,a>,
/// c15..c34 <a,c,b,a>.
pub fn toy_log() -> EventLog {
    let mut events = Vec::new();
    let mut n = 0;
    for (trace, mult) in TOY {
        for _ in 0..mult {
            n += 1;
            let case = format!("c{n:02}");
            for (i, a) in trace.iter().enumerate() {
                let ts = 1_600_000_000_000 + (n * 100 + i) as i64 * 60_000;
                events.push(Event::new(format!("{case}-e{i}"), &case, Some(a), ts).unwrap());
            }
        }
    }
    EventLog::from_events(events)
}

pub fn log_from_traces(traces: &[Vec<&str>]) -> EventLog {
    let events = traces.iter().enumerate().flat_map(|(c, t)| {
        t.iter().enumerate().map(move |(i, a)| {
            Event::new(format!("{c}-{i}"), format!("case{c:03}"), Some(a), i as i64).unwrap()
        })
    });
    EventLog::from_events(events)
}

/// Brute-force directly-follows count straight from traces.
pub fn brute_force_follows(traces: &[(Vec<String>, usize)], a: &str, b: &str) -> u64 {
    traces
        .iter()
        .map(|(t, mult)| {
            let hits = t.windows(2).filter(|w| w[0] == a && w[1] == b).count();
            (hits * mult) as u64
        })
        .sum()
}

pub struct RandomLogShape {
    pub max_cases: usize,
    pub max_activities: usize,
    pub max_events: usize,
}

pub const ACCEPTANCE_SHAPE: RandomLogShape = RandomLogShape {
    max_cases: 50,
    max_activities: 8,
    max_events: 12,
};

/// A random log with some unlabeled events, some costless events and
/// timestamp ties.
pub fn random_log(rng: &mut ChaCha8Rng, shape: &RandomLogShape) -> EventLog {
    const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let n_cases = rng.random_range(0..=shape.max_cases);
    let n_acts = rng.random_range(1..=shape.max_activities);
    let mut events = Vec::new();
    for c in 0..n_cases {
        let n_events = rng.random_range(1..=shape.max_events);
        let mut ts = rng.random_range(0..1_000_000i64);
        for e in 0..n_events {
            ts += rng.random_range(0..3) * 1000;
            let activity = if rng.random_bool(0.05) {
                None
            } else {
                Some(NAMES[rng.random_range(0..n_acts)])
            };
            let mut ev = Event::new(format!("e{c}.{e}"), format!("c{c:02}"), activity, ts).unwrap();
            if rng.random_bool(0.7) {
                ev.set_attribute(
                    COST,
                    AttributeValue::Real(f64::from(rng.random_range(0..1000u32)) / 4.0),
                )
                .unwrap();
            }
            events.push(ev);
        }
    }
    EventLog::from_events(events)
}

pub fn random_logs(seed: u64, count: usize, shape: &RandomLogShape) -> Vec<EventLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_log(&mut rng, shape)).collect()
}

/// Discrete power law on `x >= xmin`, sampled by inverting a tabulated CCDF.
/// The table is built by direct summation; mass beyond the table uses the
/// continuous approximation.
pub struct PowerLawOracle {
    alpha: f64,
    xmin: u64,
    ccdf: Vec<f64>,
}

impl PowerLawOracle {
    const TABLE: u64 = 1_000_000;

    pub fn new(alpha: f64, xmin: u64) -> Self {
        let top = xmin + Self::TABLE;
        // Euler–Maclaurin remainder for the sum beyond the table
        let n = top as f64;
        let beyond = n.powf(1.0 - alpha) / (alpha - 1.0)
            + 0.5 * n.powf(-alpha)
            + alpha / 12.0 * n.powf(-alpha - 1.0);
        let mut suffix = vec![0.0; Self::TABLE as usize + 1];
        suffix[Self::TABLE as usize] = beyond;
        for i in (0..Self::TABLE as usize).rev() {
            suffix[i] = suffix[i + 1] + ((xmin + i as u64) as f64).powf(-alpha);
        }
        let z = suffix[0];
        let ccdf = suffix.into_iter().map(|s| s / z).collect();
        PowerLawOracle { alpha, xmin, ccdf }
    }

    /// P(X >= x).
    pub fn ccdf(&self, x: u64) -> f64 {
        if x <= self.xmin {
            1.0
        } else {
            self.ccdf[((x - self.xmin) as usize).min(self.ccdf.len() - 1)]
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                                                // last index whose ccdf is still >= u
        let k = self.ccdf.partition_point(|&c| c >= u);
        if k < self.ccdf.len() {
            self.xmin + k as u64 - 1
        } else {
            let x = (self.xmin as f64 - 0.5) * u.powf(-1.0 / (self.alpha - 1.0)) + 0.5;
            x.floor() as u64
        }
    }

    pub fn samples(&self, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

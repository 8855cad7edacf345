#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsdecomp::regions::{check_ects, minimal_regions, minimal_regions_oracle};
use tsdecomp::ts::{accessible, parse_ts, sync_product, TransitionSystem};

pub const EVENTS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> TransitionSystem {
    let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    parse_ts(&text).unwrap()
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

pub fn all_fixtures() -> Vec<(String, TransitionSystem)> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ts"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| (n.clone(), fixture(&n)))
        .collect()
}

/// Accessible, strict part of a random deterministic graph.
pub fn random_ts(
    rng: &mut impl Rng,
    max_states: usize,
    max_events: usize,
) -> Option<TransitionSystem> {
    let n = rng.gen_range(2..=max_states);
    let k = rng.gen_range(1..=max_events.min(EVENTS.len()));
    let density = rng.gen_range(0.2..0.6);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut trans = Vec::new();
    for s in 0..n {
        for e in EVENTS.iter().take(k) {
            if rng.gen_bool(density) {
                let mut d = rng.gen_range(0..n - 1);
                if d >= s {
                    d += 1;
                }
                trans.push((states[s].clone(), e.to_string(), states[d].clone()));
            }
        }
    }
    let events: Vec<String> = EVENTS.iter().take(k).map(|e| e.to_string()).collect();
    let ts = accessible(&states, &events, &trans, "s0")
        .ok()?
        .strictified();
    (ts.num_states() >= 2).then_some(ts)
}

fn component(rng: &mut impl Rng, tag: usize) -> TransitionSystem {
    let mut pool = EVENTS.to_vec();
    pool.shuffle(rng);
    let name = |i: usize| format!("q{tag}_{i}");
    let mut lines = Vec::new();
    if rng.gen_bool(0.25) {
        // Two events in either order, then a closing event.
        let (x, y, z) = (pool[0], pool[1], pool[2]);
        lines.extend([(0, x, 1), (0, y, 2), (1, y, 3), (2, x, 3), (3, z, 0)]);
    } else {
        let len = rng.gen_range(2..=4);
        for i in 0..len {
            let e = if rng.gen_bool(0.15) {
                pool[0]
            } else {
                pool[i % pool.len()]
            };
            lines.push((i, e, (i + 1) % len));
        }
    }
    let n = lines.iter().map(|l| l.0.max(l.2)).max().unwrap() + 1;
    let states: Vec<String> = (0..n).map(name).collect();
    let mut evs: Vec<String> = Vec::new();
    for l in &lines {
        if !evs.iter().any(|e| e == l.1) {
            evs.push(l.1.to_string());
        }
    }
    let trans: Vec<(String, String, String)> = lines
        .iter()
        .map(|&(s, e, d)| (states[s].clone(), e.to_string(), states[d].clone()))
        .collect();
    accessible(&states, &evs, &trans, &states[0]).unwrap()
}

/// Strict product of up to three small cycles or diamonds over a shared alphabet.
pub fn random_product(rng: &mut impl Rng) -> Option<TransitionSystem> {
    let m = rng.gen_range(1..=3);
    let comps: Vec<TransitionSystem> = (0..m).map(|i| component(rng, i)).collect();
    let refs: Vec<&TransitionSystem> = comps.iter().collect();
    let ts = sync_product(&refs).ok()?.strictified();
    (ts.num_states() >= 2 && ts.validate_strict().is_ok()).then_some(ts)
}

pub fn is_ects(ts: &TransitionSystem) -> bool {
    minimal_regions(ts)
        .map(|r| check_ects(ts, &r).is_ects())
        .unwrap_or(false)
}

/// Deterministic corpus of excitation-closed systems within the size bounds.
pub fn ects_corpus(
    seed: u64,
    count: usize,
    max_states: usize,
    max_events: usize,
) -> Vec<TransitionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count {
        attempts += 1;
        let candidate = if attempts % 2 == 0 {
            random_product(&mut rng)
        } else {
            random_ts(&mut rng, max_states.min(8), max_events)
        };
        let Some(ts) = candidate else { continue };
        if ts.num_states() > max_states || ts.num_events() > max_events {
            continue;
        }
        if is_ects(&ts) && !out.contains(&ts) {
            out.push(ts);
        }
    }
    out
}

/// Random systems with no closure filter, for oracle comparisons.
pub fn random_corpus(seed: u64, count: usize, max_states: usize) -> Vec<TransitionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let c = if out.len() % 3 == 0 {
            random_product(&mut rng)
        } else {
            random_ts(&mut rng, max_states.min(10), 4)
        };
        if let Some(ts) = c.filter(|t| t.num_states() <= max_states) {
            out.push(ts);
        }
    }
    out
}

pub fn oracle_agrees(ts: &TransitionSystem) -> bool {
    minimal_regions(ts).unwrap() == minimal_regions_oracle(ts).unwrap()
}

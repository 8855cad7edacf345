//! Regions of a transition system, minimal-region enumeration and excitation closure.
//!
//! A set of states `r` is a region when every event either enters `r` on all of its
//! transitions, exits `r` on all of them, or never crosses the boundary. Minimal
//! regions are generated by expanding excitation and switching sets; an exhaustive
//! subset scan ([`minimal_regions_oracle`]) serves as the reference on small inputs.

use std::collections::HashSet;
use std::ops::Deref;

use thiserror::Error;

use crate::par::map_maybe_parallel;
use crate::stateset::StateSet;
use crate::ts::TransitionSystem;

/// Default number of candidate sets the expansion search may visit.
pub const DEFAULT_REGION_BUDGET: usize = 1 << 22;

/// Largest state count accepted by the exhaustive oracle.
pub const ORACLE_MAX_STATES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("region search exceeded its budget of {budget} candidate sets")]
    BudgetExceeded { budget: usize },
    #[error("exhaustive region scan supports at most {cap} states, got {states}")]
    TooManyStates { states: usize, cap: usize },
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
}

/// A non-empty proper subset of states satisfying the enter/exit/no-cross discipline.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Region(StateSet);

impl Region {
    /// Wraps `set` if it is a region of `ts`.
    pub fn new(ts: &TransitionSystem, set: StateSet) -> Option<Region> {
        is_region(ts, &set).then_some(Region(set))
    }

    pub(crate) fn new_unchecked(set: StateSet) -> Region {
        Region(set)
    }

    pub fn states(&self) -> &StateSet {
        &self.0
    }

    pub fn into_states(self) -> StateSet {
        self.0
    }

    pub fn names<'a>(&self, ts: &'a TransitionSystem) -> Vec<&'a str> {
        self.0.iter().map(|s| ts.state_name(s)).collect()
    }
}

impl Deref for Region {
    type Target = StateSet;

    fn deref(&self) -> &StateSet {
        &self.0
    }
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// How one event's transitions relate to a candidate set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CrossingProfile {
    pub enters: bool,
    pub exits: bool,
    pub inside: bool,
    pub outside: bool,
}

impl CrossingProfile {
    /// Entering or exiting transitions must be the only kind present.
    pub fn is_legal(&self) -> bool {
        let no_cross = self.inside || self.outside;
        !(self.enters && (no_cross || self.exits)) && !(self.exits && (no_cross || self.enters))
    }

    pub fn crosses(&self) -> bool {
        self.enters || self.exits
    }
}

pub fn crossing_profile(ts: &TransitionSystem, e: usize, r: &StateSet) -> CrossingProfile {
    let mut p = CrossingProfile::default();
    for t in ts.transitions_of(e) {
        match (r.contains(t.src), r.contains(t.dst)) {
            (true, true) => p.inside = true,
            (false, false) => p.outside = true,
            (false, true) => p.enters = true,
            (true, false) => p.exits = true,
        }
    }
    p
}

pub fn is_region(ts: &TransitionSystem, r: &StateSet) -> bool {
    !r.is_empty()
        && !r.is_full()
        && (0..ts.num_events()).all(|e| crossing_profile(ts, e, r).is_legal())
}

fn event_id(ts: &TransitionSystem, event: &str) -> Result<usize, RegionError> {
    ts.event_id(event)
        .ok_or_else(|| RegionError::UnknownEvent(event.to_string()))
}

/// Excitation set of a named event.
pub fn excitation_set(ts: &TransitionSystem, event: &str) -> Result<StateSet, RegionError> {
    Ok(ts.excitation_set(event_id(ts, event)?))
}

/// Switching set of a named event.
pub fn switching_set(ts: &TransitionSystem, event: &str) -> Result<StateSet, RegionError> {
    Ok(ts.switching_set(event_id(ts, event)?))
}

#[derive(Clone, Copy, Debug)]
pub struct RegionOptions {
    pub budget: usize,
    pub parallel: bool,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions {
            budget: DEFAULT_REGION_BUDGET,
            parallel: true,
        }
    }
}

/// Per-event transition lists, in transition order.
struct EventTable {
    by_event: Vec<Vec<(usize, usize)>>,
}

impl EventTable {
    fn new(ts: &TransitionSystem) -> Self {
        let mut by_event = vec![Vec::new(); ts.num_events()];
        for t in ts.transitions() {
            by_event[t.event].push((t.src, t.dst));
        }
        EventTable { by_event }
    }
}

enum Step {
    Region,
    Grow(Vec<StateSet>),
}

/// One expansion step: either `r` is already legal for every event, or the first
/// violating event yields the candidate supersets every enclosing region must contain.
fn expand(table: &EventTable, r: &StateSet) -> Step {
    for trans in &table.by_event {
        let (mut inside, mut outside, mut enters, mut exits) = (false, false, false, false);
        for &(s, d) in trans {
            match (r.contains(s), r.contains(d)) {
                (true, true) => inside = true,
                (false, false) => outside = true,
                (false, true) => enters = true,
                (true, false) => exits = true,
            }
        }
        let profile = CrossingProfile {
            enters,
            exits,
            inside,
            outside,
        };
        if profile.is_legal() {
            continue;
        }
        let grow = |pick: &dyn Fn(usize, usize) -> Option<usize>| {
            let mut next = r.clone();
            for &(s, d) in trans {
                if let Some(x) = pick(s, d) {
                    next.insert(x);
                }
            }
            next
        };
        let to_no_cross = || {
            grow(&|s, d| match (r.contains(s), r.contains(d)) {
                (false, true) => Some(s),
                (true, false) => Some(d),
                _ => None,
            })
        };
        let branches = if inside || (enters && exits) {
            // Only "no crossing" can still be reached by growing the set.
            vec![to_no_cross()]
        } else if enters {
            let to_enter = grow(&|s, d| (!r.contains(s) && !r.contains(d)).then_some(d));
            vec![to_enter, to_no_cross()]
        } else {
            let to_exit = grow(&|s, d| (!r.contains(s) && !r.contains(d)).then_some(s));
            vec![to_exit, to_no_cross()]
        };
        return Step::Grow(branches);
    }
    Step::Region
}

pub fn minimal_regions(ts: &TransitionSystem) -> Result<Vec<Region>, RegionError> {
    minimal_regions_with(ts, RegionOptions::default())
}

/// Complete set of minimal regions, in canonical order.
///
/// Every excitation and switching set seeds a search that grows candidates toward
/// legality; each enclosing region contains one of the branches taken, so every
/// minimal region is reached. The search runs level by level, which keeps the visited
/// set (and thus the budget accounting) independent of scheduling.
pub fn minimal_regions_with(
    ts: &TransitionSystem,
    opts: RegionOptions,
) -> Result<Vec<Region>, RegionError> {
    let n = ts.num_states();
    let table = EventTable::new(ts);
    let mut visited: HashSet<StateSet> = HashSet::new();
    let mut frontier = Vec::new();
    for e in 0..ts.num_events() {
        for seed in [ts.excitation_set(e), ts.switching_set(e)] {
            if !seed.is_empty() && !seed.is_full() && visited.insert(seed.clone()) {
                frontier.push(seed);
            }
        }
    }
    if visited.len() > opts.budget {
        return Err(RegionError::BudgetExceeded {
            budget: opts.budget,
        });
    }

    let mut found: Vec<StateSet> = Vec::new();
    while !frontier.is_empty() {
        let steps: Vec<Step> = map_maybe_parallel(&frontier, opts.parallel, |r| expand(&table, r));
        let mut children = Vec::new();
        for (r, step) in frontier.into_iter().zip(steps) {
            match step {
                Step::Region => found.push(r),
                Step::Grow(next) => children.extend(next),
            }
        }
        let mut next_frontier = Vec::new();
        for c in children {
            if c.is_full() || visited.contains(&c) {
                continue;
            }
            // A superset of a known region cannot lead to a new minimal one.
            if found.iter().any(|f| f.is_subset(&c)) {
                continue;
            }
            visited.insert(c.clone());
            if visited.len() > opts.budget {
                return Err(RegionError::BudgetExceeded {
                    budget: opts.budget,
                });
            }
            next_frontier.push(c);
        }
        frontier = next_frontier;
    }
    debug_assert!(found.iter().all(|r| r.universe() == n));
    Ok(minimal_of(found))
}

/// Keeps inclusion-minimal sets, sorted canonically.
fn minimal_of(mut sets: Vec<StateSet>) -> Vec<Region> {
    sets.sort_by(|a, b| a.canonical_cmp(b));
    sets.dedup();
    let mut kept: Vec<StateSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept.into_iter().map(Region).collect()
}

pub fn minimal_regions_oracle(ts: &TransitionSystem) -> Result<Vec<Region>, RegionError> {
    minimal_regions_oracle_with(ts, true)
}

/// Exhaustive scan of all non-empty proper subsets; reference for [`minimal_regions`].
pub fn minimal_regions_oracle_with(
    ts: &TransitionSystem,
    parallel: bool,
) -> Result<Vec<Region>, RegionError> {
    let n = ts.num_states();
    if n > ORACLE_MAX_STATES {
        return Err(RegionError::TooManyStates {
            states: n,
            cap: ORACLE_MAX_STATES,
        });
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let by_event: Vec<Vec<(u32, u32)>> = EventTable::new(ts)
        .by_event
        .into_iter()
        .map(|v| v.into_iter().map(|(s, d)| (1u32 << s, 1u32 << d)).collect())
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let legal = |mask: u32| {
        by_event.iter().all(|trans| {
            let mut p = CrossingProfile::default();
            for &(s, d) in trans {
                match (mask & s != 0, mask & d != 0) {
                    (true, true) => p.inside = true,
                    (false, false) => p.outside = true,
                    (false, true) => p.enters = true,
                    (true, false) => p.exits = true,
                }
            }
            p.is_legal()
        })
    };

    const CHUNK: u32 = 1 << 12;
    let chunks: Vec<u32> = (0..=full / CHUNK).collect();
    let scan = |&c: &u32| -> Vec<u32> {
        let lo = (c * CHUNK).max(1);
        let hi = ((c + 1) * CHUNK).min(full);
        (lo..hi).filter(|&m| legal(m)).collect()
    };
    let masks: Vec<u32> = map_maybe_parallel(&chunks, parallel, scan)
        .into_iter()
        .flatten()
        .collect();

    // Inclusion-minimal filter over masks, smallest first.
    let mut masks = masks;
    masks.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u32> = Vec::new();
    for m in masks {
        if !minimal.iter().any(|&k| k & !m == 0) {
            minimal.push(m);
        }
    }
    let mut out: Vec<StateSet> = minimal
        .into_iter()
        .map(|m| StateSet::from_mask(n, m as u64))
        .collect();
    out.sort_by(|a, b| a.canonical_cmp(b));
    Ok(out.into_iter().map(Region).collect())
}

/// Indices of the regions in `regions` that `event` exits.
pub fn preregions(
    ts: &TransitionSystem,
    regions: &[Region],
    event: &str,
) -> Result<Vec<usize>, RegionError> {
    let e = event_id(ts, event)?;
    Ok(preregions_of(ts, regions, e))
}

/// Indices of the regions in `regions` that `event` enters.
pub fn postregions(
    ts: &TransitionSystem,
    regions: &[Region],
    event: &str,
) -> Result<Vec<usize>, RegionError> {
    let e = event_id(ts, event)?;
    Ok(postregions_of(ts, regions, e))
}

pub(crate) fn preregions_of(ts: &TransitionSystem, regions: &[Region], e: usize) -> Vec<usize> {
    (0..regions.len())
        .filter(|&i| crossing_profile(ts, e, &regions[i]).exits)
        .collect()
}

pub(crate) fn postregions_of(ts: &TransitionSystem, regions: &[Region], e: usize) -> Vec<usize> {
    (0..regions.len())
        .filter(|&i| crossing_profile(ts, e, &regions[i]).enters)
        .collect()
}

/// Outcome of an excitation-closure check over a list of regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionSetReport {
    pub regions: Vec<Region>,
    /// Per event (TS order), indices into `regions`.
    pub preregions: Vec<Vec<usize>>,
    pub postregions: Vec<Vec<usize>>,
    pub ec_ok: bool,
    pub effectiveness_ok: bool,
    /// Events whose pre-region intersection differs from their excitation set.
    pub failing_events: Vec<String>,
}

impl RegionSetReport {
    pub fn is_ects(&self) -> bool {
        self.ec_ok && self.effectiveness_ok
    }
}

/// Excitation closure and event effectiveness of `regions`.
///
/// An event without any pre-region fails both properties: the empty intersection is
/// never taken to equal the (non-empty) excitation set.
pub fn check_ects(ts: &TransitionSystem, regions: &[Region]) -> RegionSetReport {
    let mut pre = Vec::with_capacity(ts.num_events());
    let mut post = Vec::with_capacity(ts.num_events());
    let mut ec_ok = true;
    let mut effectiveness_ok = true;
    let mut failing = Vec::new();
    for e in 0..ts.num_events() {
        let p = preregions_of(ts, regions, e);
        let es = ts.excitation_set(e);
        debug_assert!(p.iter().all(|&i| es.is_subset(&regions[i])));
        let closed = match p.split_first() {
            None => {
                effectiveness_ok = false;
                false
            }
            Some((&first, rest)) => {
                let mut meet = regions[first].states().clone();
                for &i in rest {
                    meet.intersect_with(&regions[i]);
                }
                meet == es
            }
        };
        if !closed {
            ec_ok = false;
            failing.push(ts.event_name(e).to_string());
        }
        pre.push(p);
        post.push(postregions_of(ts, regions, e));
    }
    RegionSetReport {
        regions: regions.to_vec(),
        preregions: pre,
        postregions: post,
        ec_ok,
        effectiveness_ok,
        failing_events: failing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts::parse_ts;

    fn set(ts: &TransitionSystem, names: &[&str]) -> StateSet {
        StateSet::from_indices(
            ts.num_states(),
            names.iter().map(|n| ts.state_id(n).unwrap()),
        )
    }

    #[test]
    fn empty_and_full_are_not_regions() {
        let ts = parse_ts(".initial p0\np0 a p1\np1 b p0\n").unwrap();
        assert!(!is_region(&ts, &StateSet::empty(2)));
        assert!(!is_region(&ts, &StateSet::full(2)));
    }

    #[test]
    fn two_cycle_has_singleton_regions() {
        let ts = parse_ts(".initial p0\np0 a p1\np1 b p0\n").unwrap();
        let expected = vec![set(&ts, &["p0"]), set(&ts, &["p1"])];
        let got: Vec<StateSet> = minimal_regions(&ts)
            .unwrap()
            .into_iter()
            .map(Region::into_states)
            .collect();
        assert_eq!(got, expected);
        let oracle: Vec<StateSet> = minimal_regions_oracle(&ts)
            .unwrap()
            .into_iter()
            .map(Region::into_states)
            .collect();
        assert_eq!(oracle, expected);
    }

    #[test]
    fn three_chain_cycle_singletons() {
        let ts = parse_ts(".initial s0\ns0 a s1\ns1 b s2\ns2 c s0\n").unwrap();
        let got = minimal_regions_oracle(&ts).unwrap();
        assert_eq!(got.len(), 3);
        assert!(got.iter().all(|r| r.len() == 1));
        // pairs are complements of singletons: regions, but not minimal
        for pair in [["s0", "s1"], ["s1", "s2"], ["s0", "s2"]] {
            assert!(is_region(&ts, &set(&ts, &pair)));
        }
    }

    #[test]
    fn acyclic_chain_needs_switching_seeds() {
        let ts = parse_ts(".initial s0\ns0 a s1\n").unwrap();
        let got = minimal_regions(&ts).unwrap();
        assert_eq!(got, minimal_regions_oracle(&ts).unwrap());
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn label_splitting_counterexample_fails_closure() {
        let ts = parse_ts(".initial s0\ns0 a s1\ns1 a s2\ns2 b s3\ns3 c s0\n").unwrap();
        let regions = minimal_regions(&ts).unwrap();
        assert_eq!(
            regions
                .iter()
                .map(|r| r.states().clone())
                .collect::<Vec<_>>(),
            vec![set(&ts, &["s3"]), set(&ts, &["s0", "s1", "s2"])]
        );
        let report = check_ects(&ts, &regions);
        assert!(!report.ec_ok);
        assert!(!report.effectiveness_ok);
        assert_eq!(report.failing_events, ["a", "b"]);
    }

    #[test]
    fn no_crossing_event_has_empty_lists() {
        let ts = parse_ts(".initial p0\np0 a p1\np1 b p0\n").unwrap();
        let regions = minimal_regions(&ts).unwrap();
        assert_eq!(
            preregions(&ts, &regions[..0], "a").unwrap(),
            Vec::<usize>::new()
        );
        assert!(matches!(
            preregions(&ts, &regions, "zz"),
            Err(RegionError::UnknownEvent(_))
        ));
    }

    #[test]
    fn budget_is_reported_not_truncated() {
        let ts = parse_ts(".initial s0\ns0 a s1\ns1 a s2\ns2 b s3\ns3 c s0\n").unwrap();
        let err = minimal_regions_with(
            &ts,
            RegionOptions {
                budget: 1,
                parallel: false,
            },
        )
        .unwrap_err();
        assert_eq!(err, RegionError::BudgetExceeded { budget: 1 });
    }

    #[test]
    fn oracle_cap() {
        let mut text = String::from(".initial s0\n");
        for i in 0..21 {
            text.push_str(&format!("s{i} e{i} s{}\n", i + 1));
        }
        let ts = parse_ts(&text).unwrap();
        assert!(matches!(
            minimal_regions_oracle(&ts),
            Err(RegionError::TooManyStates { .. })
        ));
    }
}

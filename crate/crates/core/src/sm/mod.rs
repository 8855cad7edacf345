//! State machines built from disjoint, covering sets of regions.

mod format;

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::regions::{check_ects, crossing_profile, is_region, Region, RegionSetReport};
use crate::stateset::StateSet;
use crate::ts::{TransitionSystem, TsBuilder, TsError};

pub use format::{parse_sm, serialize_sm, SmFile, SmFormatError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmError {
    #[error("place `{0}` is not a region")]
    NotARegion(String),
    #[error("places `{0}` and `{1}` overlap")]
    Overlap(String, String),
    #[error("state `{0}` is not covered by any place")]
    NotCovering(String),
    #[error("event `{0}` crosses more than one pair of places")]
    Conflict(String),
    #[error("state machine has no places")]
    Empty,
    #[error(transparent)]
    Ts(#[from] TsError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub name: String,
    pub region: Region,
}

/// An arc pair `pre --event--> post`; `event` indexes the owning TS's events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmEdge {
    pub pre: usize,
    pub event: usize,
    pub post: usize,
}

/// A safe state machine whose places are regions of one transition system.
///
/// Events of the TS that cross none of the places are absent from the machine and
/// behave as private events of the other components in a product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateMachine {
    places: Vec<Place>,
    edges: Vec<SmEdge>,
    initial_marking: Vec<usize>,
    event_names: Vec<String>,
}

impl StateMachine {
    /// Assembles a machine without any check; see [`validate_sm`].
    pub fn from_parts_unchecked(
        ts: &TransitionSystem,
        places: Vec<Place>,
        edges: Vec<SmEdge>,
        initial_marking: Vec<usize>,
    ) -> StateMachine {
        StateMachine {
            places,
            edges,
            initial_marking,
            event_names: ts.events().to_vec(),
        }
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn edges(&self) -> &[SmEdge] {
        &self.edges
    }

    pub fn initial_marking(&self) -> &[usize] {
        &self.initial_marking
    }

    pub fn initial(&self) -> usize {
        self.initial_marking[0]
    }

    pub fn event_name(&self, e: usize) -> &str {
        &self.event_names[e]
    }

    /// TS event indices labeling an edge, in TS order.
    pub fn alphabet(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.edges.iter().map(|e| e.event).collect();
        a.sort_unstable();
        a.dedup();
        a
    }

    /// TS events that do not occur in this machine.
    pub fn absent_events(&self) -> Vec<usize> {
        let present = self.alphabet();
        (0..self.event_names.len())
            .filter(|e| present.binary_search(e).is_err())
            .collect()
    }

    pub fn edge_of(&self, event: usize) -> Option<&SmEdge> {
        self.edges.iter().find(|e| e.event == event)
    }

    /// Events labeling edges incident to `place`.
    pub fn incident_events(&self, place: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.pre == place || e.post == place)
            .map(|e| e.event)
            .collect()
    }

    /// Place sets and edge relation, independent of place names.
    pub fn structure(
        &self,
    ) -> (
        BTreeSet<Vec<usize>>,
        BTreeSet<(Vec<usize>, usize, Vec<usize>)>,
    ) {
        let places = self.places.iter().map(|p| p.region.to_vec()).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                (
                    self.places[e.pre].region.to_vec(),
                    e.event,
                    self.places[e.post].region.to_vec(),
                )
            })
            .collect();
        (places, edges)
    }
}

/// Builds the state machine whose places are `places`.
///
/// Succeeds exactly when the places are regions that are pairwise disjoint and cover
/// every state; each crossing event then exits one place and enters one other.
pub fn sm_from_places(ts: &TransitionSystem, places: Vec<Place>) -> Result<StateMachine, SmError> {
    if places.is_empty() {
        return Err(SmError::Empty);
    }
    for p in &places {
        if !is_region(ts, p.region.states()) {
            return Err(SmError::NotARegion(p.name.clone()));
        }
    }
    for (i, a) in places.iter().enumerate() {
        for b in &places[i + 1..] {
            if a.region.intersects(&b.region) {
                return Err(SmError::Overlap(a.name.clone(), b.name.clone()));
            }
        }
    }
    let mut covered = StateSet::empty(ts.num_states());
    for p in &places {
        covered.union_with(&p.region);
    }
    if let Some(s) = covered.complement().iter().next() {
        return Err(SmError::NotCovering(ts.state_name(s).to_string()));
    }

    let mut edges = Vec::new();
    for e in 0..ts.num_events() {
        let mut pre = Vec::new();
        let mut post = Vec::new();
        for (i, p) in places.iter().enumerate() {
            let prof = crossing_profile(ts, e, &p.region);
            if prof.exits {
                pre.push(i);
            }
            if prof.enters {
                post.push(i);
            }
        }
        match (pre.as_slice(), post.as_slice()) {
            ([], []) => {}
            ([a], [b]) => edges.push(SmEdge {
                pre: *a,
                event: e,
                post: *b,
            }),
            _ => return Err(SmError::Conflict(ts.event_name(e).to_string())),
        }
    }
    let initial = places
        .iter()
        .position(|p| p.region.contains(ts.initial()))
        .expect("places cover all states");
    Ok(StateMachine {
        places,
        edges,
        initial_marking: vec![initial],
        event_names: ts.events().to_vec(),
    })
}

/// Place name for region `k` of the canonical minimal-region list.
pub fn region_place_name(k: usize) -> String {
    format!("r{k}")
}

/// Builds a machine from the catalog entries `indices`, naming each place `r<k>`.
pub fn sm_from_regions(
    ts: &TransitionSystem,
    catalog: &[Region],
    indices: &[usize],
) -> Result<StateMachine, SmError> {
    let places = indices
        .iter()
        .map(|&k| Place {
            name: region_place_name(k),
            region: catalog[k].clone(),
        })
        .collect();
    sm_from_places(ts, places)
}

/// Re-checks every state machine invariant; an empty result means valid.
pub fn validate_sm(ts: &TransitionSystem, sm: &StateMachine) -> Vec<String> {
    let mut diags = Vec::new();
    let places = sm.places();
    if places.is_empty() {
        diags.push("no places".to_string());
        return diags;
    }
    for p in places {
        if p.region.universe() != ts.num_states() {
            diags.push(format!(
                "place {} belongs to another transition system",
                p.name
            ));
            return diags;
        }
        if !is_region(ts, &p.region) {
            diags.push(format!("place {} is not a region", p.name));
        }
    }
    for (i, a) in places.iter().enumerate() {
        for b in &places[i + 1..] {
            if a.region.intersects(&b.region) {
                diags.push(format!("places {} and {} overlap", a.name, b.name));
            }
        }
    }
    let mut covered = StateSet::empty(ts.num_states());
    for p in places {
        covered.union_with(&p.region);
    }
    for s in covered.complement().iter() {
        diags.push(format!("state {} is not covered", ts.state_name(s)));
    }

    match sm.initial_marking() {
        [p] if *p < places.len() => {
            if !places[*p].region.contains(ts.initial()) {
                diags.push(format!(
                    "initial place {} does not contain the initial state",
                    places[*p].name
                ));
            }
        }
        [_] => diags.push("initial place out of range".to_string()),
        m => diags.push(format!(
            "initial marking has {} places, expected exactly one",
            m.len()
        )),
    }

    let mut per_event: HashMap<usize, usize> = HashMap::new();
    for edge in sm.edges() {
        if edge.pre >= places.len() || edge.post >= places.len() || edge.event >= ts.num_events() {
            diags.push("edge refers to an unknown place or event".to_string());
            continue;
        }
        let name = ts.event_name(edge.event);
        *per_event.entry(edge.event).or_default() += 1;
        if edge.pre == edge.post {
            diags.push(format!(
                "edge {name} is a self-loop on {}",
                places[edge.pre].name
            ));
        }
        if !crossing_profile(ts, edge.event, &places[edge.pre].region).exits {
            diags.push(format!(
                "{} is not a pre-region of {name}",
                places[edge.pre].name
            ));
        }
        if !crossing_profile(ts, edge.event, &places[edge.post].region).enters {
            diags.push(format!(
                "{} is not a post-region of {name}",
                places[edge.post].name
            ));
        }
    }
    for e in 0..ts.num_events() {
        let count = per_event.get(&e).copied().unwrap_or(0);
        let crosses = places
            .iter()
            .any(|p| crossing_profile(ts, e, &p.region).crosses());
        if count > 1 {
            diags.push(format!("event {} labels {count} edges", ts.event_name(e)));
        } else if count == 0 && crosses {
            diags.push(format!(
                "event {} crosses a place but labels no edge",
                ts.event_name(e)
            ));
        }
    }
    diags
}

/// Reachability graph of the one-token marking game, markings named by their place.
///
/// Markings are explored breadth-first from the initial one, so the result is in
/// first-appearance order.
pub fn reachability_graph(sm: &StateMachine) -> TransitionSystem {
    let marking_name = |m: &BTreeSet<usize>| {
        m.iter()
            .map(|&p| sm.places[p].name.as_str())
            .collect::<Vec<_>>()
            .join("+")
    };
    let start: BTreeSet<usize> = sm.initial_marking.iter().copied().collect();
    let mut seen: HashMap<BTreeSet<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut markings = vec![start];
    let mut arcs = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for edge in &sm.edges {
            // Safe firing rule with single-place presets and postsets.
            if !markings[i].contains(&edge.pre) {
                continue;
            }
            let mut next = markings[i].clone();
            next.remove(&edge.pre);
            next.insert(edge.post);
            let j = *seen.entry(next.clone()).or_insert_with(|| {
                markings.push(next);
                queue.push_back(markings.len() - 1);
                markings.len() - 1
            });
            arcs.push((i, edge.event, j));
        }
    }
    let names: Vec<String> = markings.iter().map(marking_name).collect();
    let mut b = TsBuilder::new();
    for n in &names {
        b.state(n);
    }
    b.initial(&names[0]);
    for e in sm.alphabet() {
        b.event(sm.event_name(e));
    }
    for (i, e, j) in arcs {
        b.transition(&names[i], sm.event_name(e), &names[j]);
    }
    b.build_relaxed()
        .expect("state machines have deterministic, self-loop free graphs")
}

/// Direct reading of a machine as a transition system: places become states.
pub fn interpret_as_ts(sm: &StateMachine) -> Result<TransitionSystem, TsError> {
    let mut b = TsBuilder::new();
    for p in &sm.places {
        b.state(&p.name);
    }
    b.initial(&sm.places[sm.initial()].name);
    for e in sm.alphabet() {
        b.event(sm.event_name(e));
    }
    for edge in &sm.edges {
        b.transition(
            &sm.places[edge.pre].name,
            sm.event_name(edge.event),
            &sm.places[edge.post].name,
        );
    }
    b.build_relaxed()
}

/// One distinct region of an [`SmSet`] and where it occurs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionEntry {
    pub region: Region,
    /// `(machine, place)` pairs holding this region.
    pub instances: Vec<(usize, usize)>,
}

/// An ordered collection of machines together with the union of their regions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SmSet {
    machines: Vec<StateMachine>,
    union: Vec<UnionEntry>,
}

impl SmSet {
    pub fn new(machines: Vec<StateMachine>) -> SmSet {
        let mut union: Vec<UnionEntry> = Vec::new();
        let mut index: HashMap<StateSet, usize> = HashMap::new();
        for (mi, m) in machines.iter().enumerate() {
            for (pi, p) in m.places.iter().enumerate() {
                match index.get(p.region.states()) {
                    Some(&u) => union[u].instances.push((mi, pi)),
                    None => {
                        index.insert(p.region.states().clone(), union.len());
                        union.push(UnionEntry {
                            region: p.region.clone(),
                            instances: vec![(mi, pi)],
                        });
                    }
                }
            }
        }
        SmSet { machines, union }
    }

    pub fn machines(&self) -> &[StateMachine] {
        &self.machines
    }

    pub fn into_machines(self) -> Vec<StateMachine> {
        self.machines
    }

    pub fn region_union(&self) -> &[UnionEntry] {
        &self.union
    }

    pub fn regions(&self) -> Vec<Region> {
        self.union.iter().map(|u| u.region.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    pub fn total_places(&self) -> usize {
        self.machines.iter().map(|m| m.places.len()).sum()
    }

    pub fn total_transitions(&self) -> usize {
        self.machines.iter().map(|m| m.edges.len()).sum()
    }

    /// The same set without machine `i`.
    pub fn without(&self, i: usize) -> SmSet {
        let mut ms = self.machines.clone();
        ms.remove(i);
        SmSet::new(ms)
    }
}

/// Excitation closure and event effectiveness over the union of all places.
pub fn ec_set_check(ts: &TransitionSystem, sms: &SmSet) -> RegionSetReport {
    check_ects(ts, &sms.regions())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts::{is_isomorphic, parse_ts};

    fn two_cycle() -> TransitionSystem {
        parse_ts(".initial p0\np0 a p1\np1 b p0\n").unwrap()
    }

    fn place(ts: &TransitionSystem, name: &str, states: &[&str]) -> Place {
        let set = StateSet::from_indices(
            ts.num_states(),
            states.iter().map(|s| ts.state_id(s).unwrap()),
        );
        Place {
            name: name.into(),
            region: Region::new_unchecked(set),
        }
    }

    #[test]
    fn complementary_pair_has_both_events() {
        let ts = two_cycle();
        let sm = sm_from_places(
            &ts,
            vec![place(&ts, "x", &["p0"]), place(&ts, "y", &["p1"])],
        )
        .unwrap();
        assert_eq!(
            sm.edges(),
            [
                SmEdge {
                    pre: 0,
                    event: 0,
                    post: 1
                },
                SmEdge {
                    pre: 1,
                    event: 1,
                    post: 0
                }
            ]
        );
        assert_eq!(sm.initial(), 0);
        assert!(validate_sm(&ts, &sm).is_empty());
    }

    #[test]
    fn overlap_and_coverage_errors() {
        let ts = parse_ts(".initial s0\ns0 a s1\ns1 b s2\ns2 a s3\ns3 b s0\n").unwrap();
        let even = place(&ts, "e", &["s0", "s2"]);
        let odd = place(&ts, "o", &["s1", "s3"]);
        assert!(sm_from_places(&ts, vec![even.clone(), odd.clone()]).is_ok());
        assert_eq!(
            sm_from_places(&ts, vec![even.clone()]).unwrap_err(),
            SmError::NotCovering("s1".into())
        );
        assert_eq!(
            sm_from_places(&ts, vec![even.clone(), even.clone(), odd]).unwrap_err(),
            SmError::Overlap("e".into(), "e".into())
        );
        let bad = place(&ts, "b", &["s0"]);
        assert_eq!(
            sm_from_places(&ts, vec![bad]).unwrap_err(),
            SmError::NotARegion("b".into())
        );
    }

    #[test]
    fn two_initial_places_are_invalid() {
        let ts = two_cycle();
        let good = sm_from_places(
            &ts,
            vec![place(&ts, "x", &["p0"]), place(&ts, "y", &["p1"])],
        )
        .unwrap();
        let bad = StateMachine::from_parts_unchecked(
            &ts,
            good.places().to_vec(),
            good.edges().to_vec(),
            vec![0, 1],
        );
        let diags = validate_sm(&ts, &bad);
        assert_eq!(diags.len(), 1, "{diags:?}");
    }

    #[test]
    fn single_place_machine_has_single_state_graph() {
        let ts = two_cycle();
        let all = Place {
            name: "all".into(),
            region: Region::new_unchecked(StateSet::full(2)),
        };
        let sm = StateMachine::from_parts_unchecked(&ts, vec![all], vec![], vec![0]);
        let rg = reachability_graph(&sm);
        assert_eq!(rg.num_states(), 1);
        assert!(rg.transitions().is_empty());
    }

    #[test]
    fn token_game_matches_interpretation() {
        let ts = two_cycle();
        let sm = sm_from_places(
            &ts,
            vec![place(&ts, "y", &["p1"]), place(&ts, "x", &["p0"])],
        )
        .unwrap();
        let rg = reachability_graph(&sm);
        assert_eq!(rg.states(), ["x", "y"]);
        assert!(is_isomorphic(&rg, &interpret_as_ts(&sm).unwrap())
            .unwrap()
            .is_some());
    }

    #[test]
    fn empty_set_fails_effectiveness() {
        let ts = two_cycle();
        let report = ec_set_check(&ts, &SmSet::new(vec![]));
        assert!(!report.effectiveness_ok);
        assert!(!report.ec_ok);
    }
}

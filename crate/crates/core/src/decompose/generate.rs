//! Generation of excitation-closed machine sets and removal of redundant machines.

use crate::par::map_maybe_parallel;
use crate::regions::{check_ects, crossing_profile, Region};
use crate::sm::{ec_set_check, sm_from_regions, SmSet, StateMachine};
use crate::stateset::StateSet;
use crate::ts::TransitionSystem;

use super::graph::{mis_exact_all, mis_greedy, mis_greedy_within, IntersectionGraph};
use super::DecomposeError;

/// Largest region count accepted by [`exact_decompose`].
pub const EXACT_REGION_CAP: usize = 20;

/// The independent sets of both generation phases, before machines are built.
///
/// Phase one covers every vertex exactly once; phase two extends each of those sets
/// to a maximal independent set of the whole graph.
pub fn generation_sets(
    g: &IntersectionGraph,
    parallel: bool,
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut residual: Vec<usize> = (0..g.num_vertices()).collect();
    let mut phase1 = Vec::new();
    while !residual.is_empty() {
        let m = mis_greedy_within(g, &residual, &[]).expect("empty forced set is independent");
        residual.retain(|v| m.binary_search(v).is_err());
        phase1.push(m);
    }
    let phase2 = map_maybe_parallel(&phase1, parallel, |m| {
        mis_greedy(g, m).expect("phase-one sets are independent")
    });
    (phase1, phase2)
}

/// One machine per maximal independent set of the intersection graph, such that
/// every region appears in some machine.
pub fn generate_sm_set(
    ts: &TransitionSystem,
    regions: &[Region],
    parallel: bool,
) -> Result<SmSet, DecomposeError> {
    let g = IntersectionGraph::from_regions(regions);
    let (_, sets) = generation_sets(&g, parallel);
    let machines = sets
        .iter()
        .map(|set| sm_from_regions(ts, regions, set))
        .collect::<Result<Vec<StateMachine>, _>>()?;
    Ok(SmSet::new(machines))
}

/// Greedily drops machines, largest first, while the rest stays excitation closed.
pub fn remove_redundant(ts: &TransitionSystem, sms: &SmSet) -> SmSet {
    if !ec_set_check(ts, sms).is_ects() {
        return sms.clone();
    }
    let mut order: Vec<usize> = (0..sms.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(sms.machines()[i].places().len()), i));
    let mut kept = vec![true; sms.len()];
    for i in order {
        kept[i] = false;
        let trial = SmSet::new(selected(sms, &kept));
        if !ec_set_check(ts, &trial).is_ects() {
            kept[i] = true;
        }
    }
    SmSet::new(selected(sms, &kept))
}

fn selected(sms: &SmSet, kept: &[bool]) -> Vec<StateMachine> {
    sms.machines()
        .iter()
        .zip(kept)
        .filter(|(_, &k)| k)
        .map(|(m, _)| m.clone())
        .collect()
}

/// Whether removing any single machine breaks excitation closure or effectiveness.
pub fn is_irredundant(ts: &TransitionSystem, sms: &SmSet) -> bool {
    (0..sms.len()).all(|i| !ec_set_check(ts, &sms.without(i)).is_ects())
}

/// Bit layout of the excitation-closure requirements for one transition system.
///
/// Requirement `(e, s)` for `s` outside `ES(e)` is met by a pre-region of `e` that
/// excludes `s`; requirement `(e, *)` by any pre-region of `e`.
struct Requirements {
    count: usize,
    offsets: Vec<usize>,
    outside: Vec<Vec<usize>>,
}

impl Requirements {
    fn new(ts: &TransitionSystem) -> Requirements {
        let mut offsets = Vec::new();
        let mut outside = Vec::new();
        let mut count = 0;
        for e in 0..ts.num_events() {
            let out: Vec<usize> = ts.excitation_set(e).complement().to_vec();
            offsets.push(count);
            count += 1 + out.len();
            outside.push(out);
        }
        Requirements {
            count,
            offsets,
            outside,
        }
    }

    fn met_by(&self, ts: &TransitionSystem, region: &Region) -> StateSet {
        let mut met = StateSet::empty(self.count);
        for e in 0..ts.num_events() {
            if crossing_profile(ts, e, region).exits {
                met.insert(self.offsets[e]);
                for (k, &s) in self.outside[e].iter().enumerate() {
                    if !region.contains(s) {
                        met.insert(self.offsets[e] + 1 + k);
                    }
                }
            }
        }
        met
    }
}

/// A minimum-cardinality set of machines, then minimum total places, among all
/// machines derivable from `regions`.
pub fn exact_decompose(ts: &TransitionSystem, regions: &[Region]) -> Result<SmSet, DecomposeError> {
    if regions.len() > EXACT_REGION_CAP {
        return Err(DecomposeError::TooManyRegions {
            regions: regions.len(),
            cap: EXACT_REGION_CAP,
        });
    }
    let report = check_ects(ts, regions);
    if !report.is_ects() {
        return Err(DecomposeError::NotEcts {
            failing_events: report.failing_events,
        });
    }
    let g = IntersectionGraph::from_regions(regions);
    // A maximal independent set that leaves states uncovered is not a machine.
    let candidates: Vec<StateMachine> = mis_exact_all(&g)?
        .iter()
        .filter_map(|set| sm_from_regions(ts, regions, set).ok())
        .collect();

    let req = Requirements::new(ts);
    let covers: Vec<StateSet> = candidates
        .iter()
        .map(|m| {
            let mut met = StateSet::empty(req.count);
            for p in m.places() {
                met.union_with(&req.met_by(ts, &p.region));
            }
            met
        })
        .collect();
    let sizes: Vec<usize> = candidates.iter().map(|m| m.places().len()).collect();

    let mut search = CoverSearch {
        covers: &covers,
        sizes: &sizes,
        best: None,
        chosen: Vec::new(),
    };
    search.run(StateSet::empty(req.count), 0);
    let mut best = search.best.ok_or(DecomposeError::NoCover)?.2;
    best.sort_unstable();
    Ok(SmSet::new(
        best.into_iter().map(|i| candidates[i].clone()).collect(),
    ))
}

struct CoverSearch<'a> {
    covers: &'a [StateSet],
    sizes: &'a [usize],
    best: Option<(usize, usize, Vec<usize>)>,
    chosen: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, covered: StateSet, places: usize) {
        let count = self.chosen.len();
        let Some(missing) = covered.complement().iter().next() else {
            if self
                .best
                .as_ref()
                .is_none_or(|(c, p, _)| (count, places) < (*c, *p))
            {
                self.best = Some((count, places, self.chosen.clone()));
            }
            return;
        };
        if let Some((c, _, _)) = &self.best {
            // Any completion needs at least one more machine.
            if count + 1 > *c {
                return;
            }
        }
        for i in 0..self.covers.len() {
            if !self.covers[i].contains(missing) {
                continue;
            }
            if let Some((c, p, _)) = &self.best {
                if (count + 1, places + self.sizes[i]) >= (*c, *p) && count + 1 == *c {
                    continue;
                }
            }
            let mut next = covered.clone();
            next.union_with(&self.covers[i]);
            self.chosen.push(i);
            self.run(next, places + self.sizes[i]);
            self.chosen.pop();
        }
    }
}

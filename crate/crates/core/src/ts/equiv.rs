//! Isomorphism and strong bisimilarity between transition systems.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{Result, Trace, TransitionSystem, TsError};

/// Largest state count, per side, accepted by [`is_isomorphic`].
pub const ISOMORPHISM_CAP: usize = 64;

/// A state bijection `a -> b`, indexed by the states of `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub map: Vec<usize>,
}

/// Pairs `(p, q)` with `p` a state of the left system and `q` of the right one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimRelation {
    pub pairs: Vec<(usize, usize)>,
}

impl BisimRelation {
    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.pairs.binary_search(&(p, q)).is_ok()
    }

    pub fn named<'a>(
        &self,
        a: &'a TransitionSystem,
        b: &'a TransitionSystem,
    ) -> Vec<(&'a str, &'a str)> {
        self.pairs
            .iter()
            .map(|&(p, q)| (a.state_name(p), b.state_name(q)))
            .collect()
    }
}

pub fn is_isomorphic(a: &TransitionSystem, b: &TransitionSystem) -> Result<Option<Isomorphism>> {
    is_isomorphic_capped(a, b, ISOMORPHISM_CAP)
}

/// Searches for a bijection satisfying the three isomorphism clauses.
///
/// Both systems are deterministic and fully reachable, so once the initial states are
/// paired every other pair is forced by matching event labels; the search never
/// backtracks.
pub fn is_isomorphic_capped(
    a: &TransitionSystem,
    b: &TransitionSystem,
    cap: usize,
) -> Result<Option<Isomorphism>> {
    let largest = a.num_states().max(b.num_states());
    if largest > cap {
        return Err(TsError::IsomorphismCap {
            cap,
            states: largest,
        });
    }
    if a.num_states() != b.num_states() || a.transitions().len() != b.transitions().len() {
        return Ok(None);
    }
    let mut ea: Vec<&String> = a.events().iter().collect();
    let mut eb: Vec<&String> = b.events().iter().collect();
    ea.sort();
    eb.sort();
    if ea != eb {
        return Ok(None);
    }
    let to_b: Vec<usize> = (0..a.num_events())
        .map(|e| b.event_id(a.event_name(e)).unwrap())
        .collect();

    let mut map = vec![usize::MAX; a.num_states()];
    let mut used = vec![false; b.num_states()];
    map[a.initial()] = b.initial();
    used[b.initial()] = true;
    let mut queue = VecDeque::from([a.initial()]);
    while let Some(p) = queue.pop_front() {
        let q = map[p];
        if a.outgoing(p).len() != b.outgoing(q).len() {
            return Ok(None);
        }
        for &(e, pd) in a.outgoing(p) {
            let Some(qd) = b.successor(q, to_b[e]) else {
                return Ok(None);
            };
            if map[pd] == usize::MAX {
                if used[qd] {
                    return Ok(None);
                }
                map[pd] = qd;
                used[qd] = true;
                queue.push_back(pd);
            } else if map[pd] != qd {
                return Ok(None);
            }
        }
    }
    // Injective on a complete, equally sized transition set: the inverse clause follows.
    Ok(Some(Isomorphism { map }))
}

/// Coarsest strong bisimulation between `a` and `b`, if it relates the initial states.
///
/// Signature-based partition refinement over the disjoint union: each round splits
/// blocks by the set of `(event, target block)` pairs until the block count is stable.
pub fn bisimilar(a: &TransitionSystem, b: &TransitionSystem) -> Option<BisimRelation> {
    let na = a.num_states();
    let n = na + b.num_states();

    let mut names: HashMap<&str, usize> = HashMap::new();
    for e in a.events().iter().chain(b.events()) {
        let next = names.len();
        names.entry(e.as_str()).or_insert(next);
    }
    let mut succ: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    for s in 0..na {
        succ.push(
            a.outgoing(s)
                .iter()
                .map(|&(e, d)| (names[a.event_name(e)], d))
                .collect(),
        );
    }
    for s in 0..b.num_states() {
        succ.push(
            b.outgoing(s)
                .iter()
                .map(|&(e, d)| (names[b.event_name(e)], d + na))
                .collect(),
        );
    }

    let mut block = vec![0usize; n];
    let mut count = 1;
    loop {
        let signature = |s: usize| {
            let mut sig: Vec<(usize, usize)> =
                succ[s].iter().map(|&(e, d)| (e, block[d])).collect();
            sig.sort_unstable();
            (block[s], sig)
        };
        #[cfg(feature = "parallel")]
        let sigs: Vec<(usize, Vec<(usize, usize)>)> =
            (0..n).into_par_iter().map(signature).collect();
        #[cfg(not(feature = "parallel"))]
        let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..n).map(signature).collect();

        let mut ids: HashMap<&(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for (s, sig) in sigs.iter().enumerate() {
            let fresh = ids.len();
            next[s] = *ids.entry(sig).or_insert(fresh);
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    if block[a.initial()] != block[na + b.initial()] {
        return None;
    }
    let mut pairs = Vec::new();
    for p in 0..na {
        for q in 0..b.num_states() {
            if block[p] == block[na + q] {
                pairs.push((p, q));
            }
        }
    }
    Some(BisimRelation { pairs })
}

/// A trace one system can execute and the other cannot, with the states reached
/// just before the mismatch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinction {
    pub trace: Trace,
    pub left_state: usize,
    pub right_state: usize,
}

/// Shortest trace separating two deterministic systems, or `None` when they are
/// trace equivalent (for deterministic systems, exactly when they are bisimilar).
pub fn distinguishing_trace(a: &TransitionSystem, b: &TransitionSystem) -> Option<Distinction> {
    let start = (a.initial(), b.initial());
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), String)>> =
        HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    let path = |parent: &HashMap<(usize, usize), Option<((usize, usize), String)>>,
                mut cur: (usize, usize)| {
        let mut evs = Vec::new();
        while let Some(Some((prev, e))) = parent.get(&cur) {
            evs.push(e.clone());
            cur = *prev;
        }
        evs.reverse();
        evs
    };
    while let Some((p, q)) = queue.pop_front() {
        let mismatch = a
            .outgoing(p)
            .iter()
            .map(|&(e, _)| a.event_name(e))
            .find(|name| b.event_id(name).and_then(|be| b.successor(q, be)).is_none())
            .or_else(|| {
                b.outgoing(q)
                    .iter()
                    .map(|&(e, _)| b.event_name(e))
                    .find(|name| a.event_id(name).and_then(|ae| a.successor(p, ae)).is_none())
            });
        if let Some(name) = mismatch {
            let mut trace = path(&parent, (p, q));
            trace.push(name.to_string());
            return Some(Distinction {
                trace: Trace(trace),
                left_state: p,
                right_state: q,
            });
        }
        for &(e, pd) in a.outgoing(p) {
            let name = a.event_name(e);
            let qd = b.successor(q, b.event_id(name).unwrap()).unwrap();
            if let Entry::Vacant(slot) = parent.entry((pd, qd)) {
                slot.insert(Some(((p, q), name.to_string())));
                queue.push_back((pd, qd));
            }
        }
    }
    None
}

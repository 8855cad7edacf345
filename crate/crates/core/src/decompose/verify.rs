//! Checking a machine set against its source by bisimulation.

use crate::sm::{reachability_graph, SmSet};
use crate::ts::{
    bisimilar, distinguishing_trace, sync_product_with_tuples, BisimRelation, Distinction,
    TransitionSystem,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Bisimilar {
        /// Coarsest bisimulation between the source and the product of the machines.
        relation: BisimRelation,
        /// Whether the place-intersection relation is itself a bisimulation.
        intersection_relation_ok: bool,
    },
    Failed {
        /// `None` only for an empty machine set.
        witness: Option<Distinction>,
    },
}

impl VerifyOutcome {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, VerifyOutcome::Bisimilar { .. })
    }

    pub fn witness(&self) -> Option<&Distinction> {
        match self {
            VerifyOutcome::Failed { witness } => witness.as_ref(),
            VerifyOutcome::Bisimilar { .. } => None,
        }
    }
}

/// The synchronous product of all machine reachability graphs, with the place tuple
/// behind each product state.
pub fn machine_product(sms: &SmSet) -> Option<(TransitionSystem, Vec<Vec<usize>>)> {
    let graphs: Vec<TransitionSystem> = sms.machines().iter().map(reachability_graph).collect();
    let refs: Vec<&TransitionSystem> = graphs.iter().collect();
    let (product, tuples) = sync_product_with_tuples(&refs).ok()?;
    // Map reachability-graph states back to place indices.
    let places: Vec<Vec<usize>> = tuples
        .iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(mi, &s)| {
                    let m = &sms.machines()[mi];
                    m.places()
                        .iter()
                        .position(|p| p.name == graphs[mi].state_name(s))
                        .expect("graph state is a place")
                })
                .collect()
        })
        .collect();
    Some((product, places))
}

pub fn verify_decomposition(ts: &TransitionSystem, sms: &SmSet) -> VerifyOutcome {
    let Some((product, tuples)) = machine_product(sms) else {
        return VerifyOutcome::Failed { witness: None };
    };
    match bisimilar(ts, &product) {
        Some(relation) => {
            let intersection_relation_ok =
                intersection_relation_is_bisimulation(ts, sms, &product, &tuples);
            VerifyOutcome::Bisimilar {
                relation,
                intersection_relation_ok,
            }
        }
        None => VerifyOutcome::Failed {
            witness: distinguishing_trace(ts, &product),
        },
    }
}

/// Relates `s` to every product state whose places all contain `s`, and checks the
/// transfer conditions in both directions plus the initial pair.
pub fn intersection_relation_is_bisimulation(
    ts: &TransitionSystem,
    sms: &SmSet,
    product: &TransitionSystem,
    tuples: &[Vec<usize>],
) -> bool {
    let related = |s: usize, q: usize| {
        tuples[q]
            .iter()
            .enumerate()
            .all(|(mi, &p)| sms.machines()[mi].places()[p].region.contains(s))
    };
    if !related(ts.initial(), product.initial()) {
        return false;
    }
    for s in 0..ts.num_states() {
        for q in 0..product.num_states() {
            if !related(s, q) {
                continue;
            }
            for &(e, sd) in ts.outgoing(s) {
                let ok = product
                    .event_id(ts.event_name(e))
                    .and_then(|pe| product.successor(q, pe))
                    .is_some_and(|qd| related(sd, qd));
                if !ok {
                    return false;
                }
            }
            for &(pe, qd) in product.outgoing(q) {
                let ok = ts
                    .event_id(product.event_name(pe))
                    .and_then(|e| ts.successor(s, e))
                    .is_some_and(|sd| related(sd, qd));
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

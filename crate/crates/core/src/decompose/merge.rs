//! Merging repeated regions by dropping edge labels, optimized with SAT.

use std::collections::HashMap;

use crate::regions::{is_region, Region};
use crate::sm::{ec_set_check, sm_from_places, Place, SmSet, StateMachine};
use crate::solver::{minimize_true_count, Formula, Lit, Optimum, SolverError};
use crate::stateset::StateSet;
use crate::ts::TransitionSystem;

use super::DecomposeError;

/// Which edge labels survive, per machine and edge, and the resulting place partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergePlan {
    /// `keep[i][j]`: edge `j` of machine `i` is kept.
    pub keep: Vec<Vec<bool>>,
    /// Per machine, groups of original place indices merged together, each sorted,
    /// ordered by their smallest member.
    pub contractions: Vec<Vec<Vec<usize>>>,
    /// Number of kept labels.
    pub objective: usize,
    /// Solver optimum backing the plan; absent for identity fallbacks.
    pub optimum: Option<Optimum>,
    pub warning: Option<String>,
}

impl MergePlan {
    pub fn identity(sms: &SmSet) -> MergePlan {
        let keep: Vec<Vec<bool>> = sms
            .machines()
            .iter()
            .map(|m| vec![true; m.edges().len()])
            .collect();
        let mut plan = MergePlan {
            keep,
            contractions: Vec::new(),
            objective: 0,
            optimum: None,
            warning: None,
        };
        plan.finish(sms);
        plan
    }

    pub fn is_identity(&self) -> bool {
        self.keep.iter().all(|k| k.iter().all(|&b| b))
    }

    pub fn dropped(&self) -> usize {
        self.keep
            .iter()
            .map(|k| k.iter().filter(|&&b| !b).count())
            .sum()
    }

    fn finish(&mut self, sms: &SmSet) {
        self.objective = self
            .keep
            .iter()
            .map(|k| k.iter().filter(|&&b| b).count())
            .sum();
        self.contractions = sms
            .machines()
            .iter()
            .zip(&self.keep)
            .map(|(m, keep)| contract(m, keep))
            .collect();
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Place groups after contracting every dropped edge.
fn contract(m: &StateMachine, keep: &[bool]) -> Vec<Vec<usize>> {
    let n = m.places().len();
    let mut parent: Vec<usize> = (0..n).collect();
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for (e, &k) in m.edges().iter().zip(keep) {
        if !k {
            union(&mut parent, e.pre, e.post);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for p in 0..n {
        let r = find(&mut parent, p);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(p);
    }
    groups
}

/// Optimal label-dropping plan: every distinct region keeps one instance whose
/// incident labels all survive, and every event keeps at least one label.
pub fn plan_merge(
    ts: &TransitionSystem,
    sms: &SmSet,
    budget: u64,
) -> Result<MergePlan, DecomposeError> {
    let mut f = Formula::new();
    let kvars: Vec<Vec<Lit>> = sms
        .machines()
        .iter()
        .map(|m| m.edges().iter().map(|_| Lit::pos(f.new_var())).collect())
        .collect();

    for entry in sms.region_union() {
        let mut intact = Vec::new();
        for &(mi, pi) in &entry.instances {
            let m = &sms.machines()[mi];
            let y = Lit::pos(f.new_var());
            for (j, e) in m.edges().iter().enumerate() {
                if e.pre == pi || e.post == pi {
                    f.add_clause([!y, kvars[mi][j]]);
                }
            }
            intact.push(y);
        }
        f.add_clause(intact);
    }
    for e in 0..ts.num_events() {
        let mut labels = Vec::new();
        for (mi, m) in sms.machines().iter().enumerate() {
            for (j, edge) in m.edges().iter().enumerate() {
                if edge.event == e {
                    labels.push(kvars[mi][j]);
                }
            }
        }
        f.add_clause(labels);
    }

    let objective: Vec<Lit> = kvars.iter().flatten().copied().collect();
    match minimize_true_count(&f, &objective, budget) {
        Ok(opt) => {
            let keep = kvars
                .iter()
                .map(|ks| ks.iter().map(|&k| opt.model.lit(k)).collect())
                .collect();
            let mut plan = MergePlan {
                keep,
                contractions: Vec::new(),
                objective: 0,
                optimum: Some(opt),
                warning: None,
            };
            plan.finish(sms);
            Ok(plan)
        }
        Err(SolverError::BudgetExceeded(b)) => {
            let mut plan = MergePlan::identity(sms);
            plan.warning = Some(format!(
                "merge solver exhausted its budget of {b} conflicts; keeping all labels"
            ));
            Ok(plan)
        }
        Err(SolverError::Infeasible) => Err(DecomposeError::Internal(
            "merge constraints are unsatisfiable".into(),
        )),
    }
}

/// Merged place name: `r3` and `r4` give `r3_4`; other names are joined with `_`.
fn merged_name(names: &[&str]) -> String {
    if names.len() == 1 {
        return names[0].to_string();
    }
    let numbered: Option<Vec<&str>> = names
        .iter()
        .map(|n| {
            n.strip_prefix('r')
                .filter(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
        })
        .collect();
    match numbered {
        Some(ks) => format!("r{}", ks.join("_")),
        None => names.join("_"),
    }
}

/// Contracts every machine along its dropped edges.
///
/// A machine reduced to the single place covering every state carries no behavior
/// and is removed.
pub fn apply_merge(
    ts: &TransitionSystem,
    sms: &SmSet,
    plan: &MergePlan,
) -> Result<SmSet, DecomposeError> {
    let mut machines = Vec::new();
    for (mi, m) in sms.machines().iter().enumerate() {
        let groups = &plan.contractions[mi];
        if groups.len() == m.places().len() {
            machines.push(m.clone());
            continue;
        }
        if groups.len() == 1 {
            continue;
        }
        let places: Vec<Place> = groups
            .iter()
            .map(|g| {
                let mut set = StateSet::empty(ts.num_states());
                for &p in g {
                    set.union_with(&m.places()[p].region);
                }
                let names: Vec<&str> = g.iter().map(|&p| m.places()[p].name.as_str()).collect();
                (merged_name(&names), set)
            })
            .map(|(name, set)| {
                if !is_region(ts, &set) {
                    return Err(DecomposeError::Internal(format!(
                        "merged place {name} is not a region"
                    )));
                }
                Ok(Place {
                    name,
                    region: Region::new_unchecked(set),
                })
            })
            .collect::<Result<_, _>>()?;
        let merged = sm_from_places(ts, places)?;
        let kept: Vec<usize> = m
            .edges()
            .iter()
            .zip(&plan.keep[mi])
            .filter(|(_, &k)| k)
            .map(|(e, _)| e.event)
            .collect();
        if merged.alphabet().iter().any(|e| !kept.contains(e)) {
            return Err(DecomposeError::Internal(
                "merged machine gained an event".into(),
            ));
        }
        machines.push(merged);
    }
    let out = SmSet::new(machines);
    if !ec_set_check(ts, &out).is_ects() {
        return Err(DecomposeError::Internal(
            "merge broke excitation closure".into(),
        ));
    }
    Ok(out)
}

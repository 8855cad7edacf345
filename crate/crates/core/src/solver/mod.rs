//! A small CDCL SAT solver with cardinality encodings and count minimization.

mod cdcl;
mod dimacs;

use std::ops::Not;

use thiserror::Error;

pub use cdcl::solve;
pub use dimacs::{from_dimacs, to_dimacs, DimacsError};

/// Conflict budget used when callers do not pick one.
pub const DEFAULT_CONFLICT_BUDGET: u64 = 1_000_000;

/// A literal in DIMACS convention: `v` or `-v` for variable `v >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        assert!(var >= 1 && var <= i32::MAX as u32);
        Lit(var as i32)
    }

    pub fn neg(var: u32) -> Lit {
        !Lit::pos(var)
    }

    pub fn from_dimacs(x: i32) -> Lit {
        assert!(x != 0);
        Lit(x)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_neg(self) -> bool {
        self.0 < 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Formula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Formula {
    pub fn new() -> Formula {
        Formula::default()
    }

    pub fn new_var(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Grows the variable range so that `var` is valid.
    pub fn reserve_vars(&mut self, var: u32) {
        self.num_vars = self.num_vars.max(var);
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Adds a clause, dropping repeated literals.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        let mut clause: Vec<Lit> = Vec::new();
        for l in lits {
            self.reserve_vars(l.var());
            if !clause.contains(&l) {
                clause.push(l);
            }
        }
        self.clauses.push(clause);
    }

    /// Whether an empty clause was added, making the formula unsatisfiable outright.
    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }

    /// Whether `model` satisfies every clause.
    pub fn eval(&self, model: &Model) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| model.lit(l)))
    }
}

/// A total assignment, indexed by variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn from_values(values: Vec<bool>) -> Model {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(false);
        v.extend(values);
        Model(v)
    }

    pub fn value(&self, var: u32) -> bool {
        self.0.get(var as usize).copied().unwrap_or(false)
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) != l.is_neg()
    }

    pub fn count_true(&self, lits: &[Lit]) -> usize {
        lits.iter().filter(|&&l| self.lit(l)).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
    /// The conflict budget ran out.
    Unknown,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("formula is unsatisfiable")]
    Infeasible,
    #[error("conflict budget of {0} exhausted")]
    BudgetExceeded(u64),
}

/// Sequential-counter encoding of `at most k of lits are true`.
pub fn add_at_most_k(f: &mut Formula, lits: &[Lit], k: usize) {
    let n = lits.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &x in lits {
            f.add_clause([!x]);
        }
        return;
    }
    // s[i][j]: at least j+1 of lits[0..=i] are true.
    let s: Vec<Vec<Lit>> = (0..n - 1)
        .map(|_| (0..k).map(|_| Lit::pos(f.new_var())).collect())
        .collect();
    f.add_clause([!lits[0], s[0][0]]);
    for j in 1..k {
        f.add_clause([!s[0][j]]);
    }
    for i in 1..n - 1 {
        f.add_clause([!lits[i], s[i][0]]);
        f.add_clause([!s[i - 1][0], s[i][0]]);
        for j in 1..k {
            f.add_clause([!lits[i], !s[i - 1][j - 1], s[i][j]]);
            f.add_clause([!s[i - 1][j], s[i][j]]);
        }
        f.add_clause([!lits[i], !s[i - 1][k - 1]]);
    }
    f.add_clause([!lits[n - 1], !s[n - 2][k - 1]]);
}

/// Optimum of a count minimization with its two witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    /// The formula that was minimized and its objective literals.
    pub formula: Formula,
    pub objective: Vec<Lit>,
    pub cost: usize,
    /// Satisfies the formula with exactly `cost` objective literals true.
    pub model: Model,
    /// The formula with `at most cost - 1` added, shown unsatisfiable; `None` when `cost == 0`.
    pub unsat_below: Option<Formula>,
}

impl Optimum {
    /// Re-checks both witnesses: the model satisfies the formula at `cost`, and the
    /// bound one below is refuted again from scratch.
    pub fn recheck(&self, budget: u64) -> bool {
        if !self.formula.eval(&self.model) || self.model.count_true(&self.objective) != self.cost {
            return false;
        }
        match &self.unsat_below {
            None => self.cost == 0,
            Some(g) => matches!(solve(g, budget), SolveResult::Unsat),
        }
    }
}

/// Minimizes the number of true literals in `objective` by binary search over
/// cardinality bounds. Each solver call gets `budget` conflicts.
pub fn minimize_true_count(
    f: &Formula,
    objective: &[Lit],
    budget: u64,
) -> Result<Optimum, SolverError> {
    let mut best = match solve(f, budget) {
        SolveResult::Sat(m) => m,
        SolveResult::Unsat => return Err(SolverError::Infeasible),
        SolveResult::Unknown => return Err(SolverError::BudgetExceeded(budget)),
    };
    let mut hi = best.count_true(objective);
    let mut lo = 0;
    let mut unsat_below = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let mut bounded = f.clone();
        add_at_most_k(&mut bounded, objective, mid);
        match solve(&bounded, budget) {
            SolveResult::Sat(m) => {
                hi = m.count_true(objective);
                best = m;
            }
            SolveResult::Unsat => {
                lo = mid + 1;
                unsat_below = Some(bounded);
            }
            SolveResult::Unknown => return Err(SolverError::BudgetExceeded(budget)),
        }
    }
    if hi == 0 {
        unsat_below = None;
    }
    Ok(Optimum {
        formula: f.clone(),
        objective: objective.to_vec(),
        cost: hi,
        model: best,
        unsat_below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_most_k_counts() {
        for n in 1..=5usize {
            for k in 0..=n {
                let mut f = Formula::new();
                let xs: Vec<Lit> = (0..n).map(|_| Lit::pos(f.new_var())).collect();
                add_at_most_k(&mut f, &xs, k);
                for mask in 0u32..(1 << n) {
                    let mut g = f.clone();
                    for (i, &x) in xs.iter().enumerate() {
                        g.add_clause([if mask >> i & 1 == 1 { x } else { !x }]);
                    }
                    let sat = matches!(solve(&g, 10_000), SolveResult::Sat(_));
                    assert_eq!(
                        sat,
                        mask.count_ones() as usize <= k,
                        "n={n} k={k} mask={mask:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn minimize_exact_cover() {
        // x1 or x2, x2 or x3, x3 or x4: two literals suffice
        let mut f = Formula::new();
        let xs: Vec<Lit> = (1..=4).map(Lit::pos).collect();
        f.add_clause([xs[0], xs[1]]);
        f.add_clause([xs[1], xs[2]]);
        f.add_clause([xs[2], xs[3]]);
        let opt = minimize_true_count(&f, &xs, DEFAULT_CONFLICT_BUDGET).unwrap();
        assert_eq!(opt.cost, 2);
        assert!(f.eval(&opt.model));
        assert_eq!(
            solve(opt.unsat_below.as_ref().unwrap(), 1000),
            SolveResult::Unsat
        );
    }

    #[test]
    fn infeasible_is_reported() {
        let mut f = Formula::new();
        f.add_clause([Lit::pos(1)]);
        f.add_clause([Lit::neg(1)]);
        assert_eq!(
            minimize_true_count(&f, &[Lit::pos(1)], 100),
            Err(SolverError::Infeasible)
        );
    }
}

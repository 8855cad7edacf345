//! Conflict-driven clause learning with two watched literals.

use super::{Formula, Model, SolveResult};

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;
const RESTART_UNIT: u64 = 100;
const DECAY: f64 = 0.95;

// Internal literal: 2 * var + negated, with var 0-based.
type ILit = usize;

fn ilit(l: super::Lit) -> ILit {
    2 * (l.var() as usize - 1) + l.is_neg() as usize
}

/// Luby sequence value for restart `x` (0-based).
fn luby(mut x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

struct Solver {
    clauses: Vec<Vec<ILit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
}

fn lit_value(assigns: &[i8], l: ILit) -> i8 {
    let v = assigns[l >> 1];
    if l & 1 == 1 {
        -v
    } else {
        v
    }
}

impl Solver {
    fn new(num_vars: usize) -> Solver {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
        }
    }

    fn value(&self, l: ILit) -> i8 {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: ILit, reason: Option<usize>) {
        let v = l >> 1;
        self.assigns[v] = if l & 1 == 1 { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds an input clause at level 0; returns false on a trivial conflict.
    fn add_input(&mut self, mut c: Vec<ILit>) -> bool {
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return true;
        }
        c.retain(|&l| self.value(l) != FALSE);
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        match c.len() {
            0 => false,
            1 => {
                self.enqueue(c[0], None);
                self.propagate().is_none()
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<ILit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0]].push(ci);
        self.watches[c[1]].push(ci);
        self.clauses.push(c);
        ci
    }

    /// Unit propagation; returns a conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if lit_value(&self.assigns, c[0]) == TRUE {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if lit_value(&self.assigns, c[k]) != FALSE {
                        c.swap(1, k);
                        self.watches[c[1]].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if lit_value(&self.assigns, first) == FALSE {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP learning; returns the learnt clause (asserting literal first) and
    /// the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<ILit>, u32) {
        let mut learnt = vec![0];
        let mut counter = 0;
        let mut p: Option<ILit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = q >> 1;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx] >> 1] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[pl >> 1] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            confl = self.reason[pl >> 1].expect("implied literal has a reason");
        }
        learnt[0] = p.unwrap() ^ 1;
        for &l in &learnt[1..] {
            self.seen[l >> 1] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k] >> 1] > self.level[learnt[max_i] >> 1] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1] >> 1];
        }
        (learnt, back)
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for &l in &self.trail[lim..] {
            let v = l >> 1;
            self.phase[v] = self.assigns[v] == TRUE;
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&self) -> Option<ILit> {
        let mut best: Option<usize> = None;
        for v in 0..self.assigns.len() {
            if self.assigns[v] == UNDEF && best.is_none_or(|b| self.activity[v] > self.activity[b])
            {
                best = Some(v);
            }
        }
        best.map(|v| 2 * v + usize::from(!self.phase[v]))
    }

    fn run(&mut self, budget: u64) -> SolveResult {
        if self.propagate().is_some() {
            return SolveResult::Unsat;
        }
        let mut conflicts = 0u64;
        let mut restarts = 0u64;
        let mut until_restart = luby(0) * RESTART_UNIT;
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                if self.decision_level() == 0 {
                    return SolveResult::Unsat;
                }
                if conflicts > budget {
                    return SolveResult::Unknown;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                self.var_inc /= DECAY;
                until_restart -= 1;
                if until_restart == 0 {
                    restarts += 1;
                    until_restart = luby(restarts) * RESTART_UNIT;
                    self.backtrack(0);
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    let values = self.assigns.iter().map(|&a| a == TRUE).collect();
                    return SolveResult::Sat(Model::from_values(values));
                }
                Some(l) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, None);
                }
            }
        }
    }
}

/// Decides `f` within `budget` conflicts.
pub fn solve(f: &Formula, budget: u64) -> SolveResult {
    let mut s = Solver::new(f.num_vars() as usize);
    for c in f.clauses() {
        if !s.add_input(c.iter().map(|&l| ilit(l)).collect()) {
            return SolveResult::Unsat;
        }
    }
    s.run(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Lit;

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        let mut f = Formula::new();
        let x = |p: u32, h: u32| Lit::pos(p * 2 + h + 1);
        for p in 0..3 {
            f.add_clause([x(p, 0), x(p, 1)]);
        }
        for h in 0..2 {
            for p in 0..3 {
                for q in p + 1..3 {
                    f.add_clause([!x(p, h), !x(q, h)]);
                }
            }
        }
        assert_eq!(solve(&f, 1000), SolveResult::Unsat);
    }

    #[test]
    fn empty_formula_and_empty_clause() {
        let mut f = Formula::new();
        f.reserve_vars(2);
        assert!(matches!(solve(&f, 10), SolveResult::Sat(_)));
        f.add_clause([]);
        assert_eq!(solve(&f, 10), SolveResult::Unsat);
    }
}

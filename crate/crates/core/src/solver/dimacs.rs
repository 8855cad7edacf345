//! DIMACS CNF import and export.

use std::fmt::Write;

use thiserror::Error;

use super::{Formula, Lit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: malformed problem line")]
    Header(usize),
    #[error("line {0}: bad literal `{1}`")]
    Literal(usize, String),
    #[error("literal {lit} exceeds the declared {vars} variables")]
    VarRange { lit: i32, vars: u32 },
    #[error("missing problem line")]
    MissingHeader,
}

pub fn to_dimacs(f: &Formula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.clauses().len());
    for c in f.clauses() {
        for l in c {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn from_dimacs(text: &str) -> Result<Formula, DimacsError> {
    let mut f = Formula::new();
    let mut declared = None;
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let vars = match parts.as_slice() {
                ["p", "cnf", v, c] if c.parse::<usize>().is_ok() => v.parse::<u32>().ok(),
                _ => None,
            };
            let vars = vars.ok_or(DimacsError::Header(i + 1))?;
            f.reserve_vars(vars);
            declared = Some(vars);
            continue;
        }
        let vars = declared.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| DimacsError::Literal(i + 1, tok.to_string()))?;
            if x == 0 {
                f.add_clause(std::mem::take(&mut current));
            } else {
                if x.unsigned_abs() > vars {
                    return Err(DimacsError::VarRange { lit: x, vars });
                }
                current.push(Lit::from_dimacs(x));
            }
        }
    }
    if !current.is_empty() {
        f.add_clause(current);
    }
    if declared.is_none() {
        return Err(DimacsError::MissingHeader);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_split_clauses() {
        let f = from_dimacs("c hi\np cnf 3 2\n1 -2\n 0 2 3 0\n").unwrap();
        assert_eq!(f.clauses().len(), 2);
        assert_eq!(to_dimacs(&f), "p cnf 3 2\n1 -2 0\n2 3 0\n");
        assert_eq!(from_dimacs(&to_dimacs(&f)).unwrap(), f);
        assert!(from_dimacs("p cnf 1 1\n2 0\n").is_err());
    }
}

//! The `.sm` text format for a single state machine.
//!
//! ```text
//! .initial r1
//! .place r1 = {s0, s8}
//! .place r14 = {s7, s1, s4, s3}
//! r1 a r14
//! ```

use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use super::{sm_from_places, Place, SmError, StateMachine};
use crate::regions::Region;
use crate::stateset::StateSet;
use crate::ts::{accessible, is_event_char, is_input_state_char, TransitionSystem, TsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `.initial` place")]
    MissingInitial,
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("place `{0}` is not a region")]
    NotARegion(String),
    #[error("listed edges or initial place do not match the places")]
    Mismatch,
    #[error(transparent)]
    Sm(#[from] SmError),
    #[error(transparent)]
    Ts(#[from] TsError),
}

fn is_place_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// A parsed `.sm` document, not yet bound to a transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmFile {
    pub initial: String,
    pub places: Vec<(String, Vec<String>)>,
    pub edges: Vec<(String, String, String)>,
}

pub fn parse_sm(text: &str) -> Result<SmFile, SmFormatError> {
    let mut initial = None;
    let mut places: Vec<(String, Vec<String>)> = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| SmFormatError::Syntax {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line == ".end" {
            continue;
        }
        if let Some(rest) = line.strip_prefix(".place") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| err("expected `.place <name> = {...}`".into()))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(is_place_char) {
                return Err(err(format!("bad place name `{name}`")));
            }
            let body = body.trim();
            let inner = body
                .strip_prefix('{')
                .and_then(|b| b.strip_suffix('}'))
                .ok_or_else(|| err("place states must be enclosed in braces".into()))?;
            let states: Vec<String> = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if let Some(bad) = states.iter().find(|s| !s.chars().all(is_input_state_char)) {
                return Err(err(format!("bad state name `{bad}`")));
            }
            if places.iter().any(|(n, _)| n == name) {
                return Err(err(format!("duplicate place `{name}`")));
            }
            places.push((name.to_string(), states));
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [".initial", p] => {
                if initial.is_some() {
                    return Err(err("duplicate `.initial`".into()));
                }
                initial = Some(p.to_string());
            }
            [pre, ev, post] if !pre.starts_with('.') => {
                if !ev.chars().all(is_event_char) {
                    return Err(err(format!("bad event name `{ev}`")));
                }
                edges.push((pre.to_string(), ev.to_string(), post.to_string()));
            }
            _ => return Err(err(format!("unrecognized line `{line}`"))),
        }
    }
    let initial = initial.ok_or(SmFormatError::MissingInitial)?;
    let names: HashSet<&str> = places.iter().map(|(n, _)| n.as_str()).collect();
    for p in std::iter::once(&initial).chain(edges.iter().flat_map(|(a, _, b)| [a, b])) {
        if !names.contains(p.as_str()) {
            return Err(SmFormatError::UnknownPlace(p.clone()));
        }
    }
    Ok(SmFile {
        initial,
        places,
        edges,
    })
}

impl SmFile {
    /// Reads places as states and edges as transitions, keeping the reachable part.
    pub fn to_transition_system(&self) -> Result<TransitionSystem, SmFormatError> {
        let states: Vec<&str> = self.places.iter().map(|(n, _)| n.as_str()).collect();
        let mut events: Vec<&str> = Vec::new();
        for (_, e, _) in &self.edges {
            if !events.contains(&e.as_str()) {
                events.push(e);
            }
        }
        let transitions: Vec<(&str, &str, &str)> = self
            .edges
            .iter()
            .map(|(a, e, b)| (a.as_str(), e.as_str(), b.as_str()))
            .collect();
        Ok(accessible(&states, &events, &transitions, &self.initial)?)
    }

    /// Resolves place contents against `ts` and checks the listed edges.
    pub fn bind(&self, ts: &TransitionSystem) -> Result<StateMachine, SmFormatError> {
        let mut places = Vec::with_capacity(self.places.len());
        for (name, states) in &self.places {
            let mut set = StateSet::empty(ts.num_states());
            for s in states {
                set.insert(
                    ts.state_id(s)
                        .ok_or_else(|| SmFormatError::UnknownState(s.clone()))?,
                );
            }
            let region =
                Region::new(ts, set).ok_or_else(|| SmFormatError::NotARegion(name.clone()))?;
            places.push(Place {
                name: name.clone(),
                region,
            });
        }
        let sm = sm_from_places(ts, places)?;
        let mut derived: Vec<(String, String, String)> = sm
            .edges()
            .iter()
            .map(|e| {
                (
                    sm.places()[e.pre].name.clone(),
                    ts.event_name(e.event).to_string(),
                    sm.places()[e.post].name.clone(),
                )
            })
            .collect();
        let mut listed = self.edges.clone();
        derived.sort();
        listed.sort();
        if derived != listed || sm.places()[sm.initial()].name != self.initial {
            return Err(SmFormatError::Mismatch);
        }
        Ok(sm)
    }
}

/// Writes `sm` with place contents in canonical state order.
pub fn serialize_sm(ts: &TransitionSystem, sm: &StateMachine) -> String {
    let mut out = String::new();
    writeln!(out, ".initial {}", sm.places()[sm.initial()].name).unwrap();
    for p in sm.places() {
        writeln!(
            out,
            ".place {} = {{{}}}",
            p.name,
            p.region.names(ts).join(", ")
        )
        .unwrap();
    }
    for e in sm.edges() {
        writeln!(
            out,
            "{} {} {}",
            sm.places()[e.pre].name,
            ts.event_name(e.event),
            sm.places()[e.post].name
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts::parse_ts;

    const TS: &str = ".initial s0\ns0 a s1\ns1 b s2\ns2 a s3\ns3 b s0\n";
    const SM: &str = ".initial e\n.place e = {s0, s2}\n.place o = {s1, s3}\ne a o\no b e\n";

    #[test]
    fn round_trip() {
        let ts = parse_ts(TS).unwrap();
        let sm = parse_sm(SM).unwrap().bind(&ts).unwrap();
        assert_eq!(serialize_sm(&ts, &sm), SM);
        let standalone = parse_sm(SM).unwrap().to_transition_system().unwrap();
        assert_eq!(standalone.states(), ["e", "o"]);
    }

    #[test]
    fn mismatched_edges_rejected() {
        let ts = parse_ts(TS).unwrap();
        let text = SM.replace("o b e", "o a e");
        assert_eq!(
            parse_sm(&text).unwrap().bind(&ts).unwrap_err(),
            SmFormatError::Mismatch
        );
        assert!(matches!(
            parse_sm(".initial q\n.place e = {s0}\n"),
            Err(SmFormatError::UnknownPlace(_))
        ));
    }
}

//! Labeled transition systems: construction, validation and basic queries.

mod equiv;
mod format;
mod product;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::stateset::StateSet;

pub use equiv::{
    bisimilar, distinguishing_trace, is_isomorphic, is_isomorphic_capped, BisimRelation,
    Distinction, Isomorphism, ISOMORPHISM_CAP,
};
pub use format::{parse_ts, serialize_ts};
pub use product::{sync_product, sync_product_with_tuples, PRODUCT_SEPARATOR};

/// Source location attached to a diagnostic, if the TS came from a file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Loc(pub Option<usize>);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, "line {line}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TsError {
    #[error("{loc}syntax error: {message}")]
    Syntax { loc: Loc, message: String },
    #[error("{loc}invalid {kind} name `{token}`")]
    InvalidToken {
        loc: Loc,
        kind: &'static str,
        token: String,
    },
    #[error("{loc}nondeterminism at ({state}, {event})")]
    Nondeterministic {
        loc: Loc,
        state: String,
        event: String,
    },
    #[error("{loc}self-loop on state `{state}` with event `{event}`")]
    SelfLoop {
        loc: Loc,
        state: String,
        event: String,
    },
    #[error("missing `.initial` declaration")]
    MissingInitial,
    #[error("{loc}duplicate `.initial` declaration")]
    DuplicateInitial { loc: Loc },
    #[error("unknown initial state `{0}`")]
    UnknownInitial(String),
    #[error("state `{0}` is not reachable from the initial state")]
    Unreachable(String),
    #[error("event `{0}` has no occurrence")]
    UnusedEvent(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("synchronous product of an empty component list")]
    EmptyProduct,
    #[error("isomorphism search capped at {cap} states, got {states}")]
    IsomorphismCap { cap: usize, states: usize },
}

pub type Result<T, E = TsError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: usize,
    pub event: usize,
    pub dst: usize,
}

/// Characters allowed in event names. Covers STG-style `b-`, `s+` and split labels `a'`.
pub fn is_event_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '-' | '\'')
}

/// Characters allowed in state names read from `.ts` files.
pub fn is_input_state_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.')
}

/// Characters allowed in any state name, including composite product names.
pub fn is_state_char(c: char) -> bool {
    is_input_state_char(c) || c == PRODUCT_SEPARATOR
}

pub fn is_valid_event_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_event_char)
}

pub fn is_valid_state_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_state_char)
}

/// A deterministic, self-loop free labeled transition system whose states are all
/// reachable from the initial one.
///
/// States and events are kept in first-appearance order and every query iterates in
/// that order. A TS is either *strict* (every event labels at least one transition)
/// or *relaxed* (events may be idle, as happens for synchronous products).
#[derive(Clone, Debug)]
pub struct TransitionSystem {
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    events: Vec<String>,
    event_index: HashMap<String, usize>,
    transitions: Vec<Transition>,
    initial: usize,
    succ: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for TransitionSystem {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.events == other.events
            && self.transitions == other.transitions
            && self.initial == other.initial
    }
}

impl Eq for TransitionSystem {}

impl TransitionSystem {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn event_name(&self, e: usize) -> &str {
        &self.events[e]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn event_id(&self, name: &str) -> Option<usize> {
        self.event_index.get(name).copied()
    }

    /// Outgoing `(event, dst)` pairs of `s`, in transition order.
    pub fn outgoing(&self, s: usize) -> &[(usize, usize)] {
        &self.succ[s]
    }

    pub fn successor(&self, s: usize, e: usize) -> Option<usize> {
        self.succ[s]
            .iter()
            .find(|(ev, _)| *ev == e)
            .map(|&(_, d)| d)
    }

    /// Transitions labeled with `e`.
    pub fn transitions_of(&self, e: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.transitions.iter().filter(move |t| t.event == e)
    }

    /// True when every event labels at least one transition.
    pub fn is_strict(&self) -> bool {
        let mut used = vec![false; self.events.len()];
        for t in &self.transitions {
            used[t.event] = true;
        }
        used.into_iter().all(|u| u)
    }

    /// Checks the "every event occurs" property that relaxed systems may skip.
    pub fn validate_strict(&self) -> Result<()> {
        let mut used = vec![false; self.events.len()];
        for t in &self.transitions {
            used[t.event] = true;
        }
        match used.iter().position(|u| !u) {
            Some(e) => Err(TsError::UnusedEvent(self.events[e].clone())),
            None => Ok(()),
        }
    }

    /// Drops events with no occurrence, yielding a strict system.
    pub fn strictified(&self) -> TransitionSystem {
        let mut b = TsBuilder::new();
        for s in &self.states {
            b.state(s);
        }
        b.initial(&self.states[self.initial]);
        let mut used = vec![false; self.events.len()];
        for t in &self.transitions {
            used[t.event] = true;
        }
        for (e, name) in self.events.iter().enumerate() {
            if used[e] {
                b.event(name);
            }
        }
        for t in &self.transitions {
            b.transition(
                &self.states[t.src],
                &self.events[t.event],
                &self.states[t.dst],
            );
        }
        b.build().expect("restriction of a valid TS stays valid")
    }

    /// The accessible part of this system when started from `state`.
    pub fn rerooted(&self, state: usize) -> TransitionSystem {
        let mut b = TsBuilder::new();
        for s in &self.states {
            b.state(s);
        }
        b.initial(&self.states[state]);
        for e in &self.events {
            b.event(e);
        }
        for t in &self.transitions {
            b.transition(
                &self.states[t.src],
                &self.events[t.event],
                &self.states[t.dst],
            );
        }
        b.build_accessible()
            .expect("restriction of a valid TS stays valid")
    }

    /// Excitation set: sources of `e`-labeled transitions.
    pub fn excitation_set(&self, e: usize) -> StateSet {
        StateSet::from_indices(self.num_states(), self.transitions_of(e).map(|t| t.src))
    }

    /// Switching set: targets of `e`-labeled transitions.
    pub fn switching_set(&self, e: usize) -> StateSet {
        StateSet::from_indices(self.num_states(), self.transitions_of(e).map(|t| t.dst))
    }

    /// Runs `trace` from the initial state; unknown events reject.
    pub fn accepts<S: AsRef<str>>(&self, trace: &[S]) -> bool {
        self.run(trace).is_some()
    }

    /// The state reached by `trace`, if it is executable.
    pub fn run<S: AsRef<str>>(&self, trace: &[S]) -> Option<usize> {
        let mut cur = self.initial;
        for ev in trace {
            let e = self.event_id(ev.as_ref())?;
            cur = self.successor(cur, e)?;
        }
        Some(cur)
    }

    /// Renames states through `f`, keeping every index unchanged.
    pub fn map_state_names(&self, mut f: impl FnMut(&str) -> String) -> Result<TransitionSystem> {
        let states: Vec<String> = self.states.iter().map(|s| f(s)).collect();
        let mut b = TsBuilder::new();
        for s in &states {
            b.state(s);
        }
        b.initial(&states[self.initial]);
        for e in &self.events {
            b.event(e);
        }
        for t in &self.transitions {
            b.transition(&states[t.src], &self.events[t.event], &states[t.dst]);
        }
        let ts = b.build_relaxed()?;
        if ts.num_states() != self.num_states() {
            return Err(TsError::Syntax {
                loc: Loc(None),
                message: "state renaming is not injective".into(),
            });
        }
        Ok(ts)
    }
}

/// Restriction of a raw relation to the states reachable from `initial`.
///
/// All listed events are kept, so the result is relaxed when some event only
/// occurred on removed transitions.
pub fn accessible<S: AsRef<str>>(
    states: &[S],
    events: &[S],
    transitions: &[(S, S, S)],
    initial: &str,
) -> Result<TransitionSystem> {
    let mut b = TsBuilder::new();
    for s in states {
        b.state(s.as_ref());
    }
    for e in events {
        b.event(e.as_ref());
    }
    if b.state_id(initial).is_none() {
        return Err(TsError::UnknownInitial(initial.to_string()));
    }
    for (src, ev, dst) in transitions {
        let (src, ev, dst) = (src.as_ref(), ev.as_ref(), dst.as_ref());
        for s in [src, dst] {
            if b.state_id(s).is_none() {
                return Err(TsError::UnknownState(s.to_string()));
            }
        }
        if b.event_id(ev).is_none() {
            return Err(TsError::UnknownEvent(ev.to_string()));
        }
        b.transition(src, ev, dst);
    }
    b.initial(initial);
    b.build_accessible()
}

#[derive(Clone, Debug)]
struct RawTransition {
    src: usize,
    event: usize,
    dst: usize,
    loc: Loc,
}

/// Incremental constructor; names are interned in first-appearance order.
#[derive(Clone, Debug, Default)]
pub struct TsBuilder {
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    events: Vec<String>,
    event_index: HashMap<String, usize>,
    raw: Vec<RawTransition>,
    initial: Option<String>,
    initial_loc: Loc,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Relaxed,
    Accessible,
}

impl TsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn event_id(&self, name: &str) -> Option<usize> {
        self.event_index.get(name).copied()
    }

    pub fn state(&mut self, name: &str) -> usize {
        if let Some(&i) = self.state_index.get(name) {
            return i;
        }
        let i = self.states.len();
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), i);
        i
    }

    pub fn event(&mut self, name: &str) -> usize {
        if let Some(&i) = self.event_index.get(name) {
            return i;
        }
        let i = self.events.len();
        self.events.push(name.to_string());
        self.event_index.insert(name.to_string(), i);
        i
    }

    pub fn initial(&mut self, name: &str) {
        self.initial_at(name, Loc(None));
    }

    pub(crate) fn initial_at(&mut self, name: &str, loc: Loc) {
        self.state(name);
        self.initial = Some(name.to_string());
        self.initial_loc = loc;
    }

    pub fn transition(&mut self, src: &str, event: &str, dst: &str) {
        self.transition_at(src, event, dst, Loc(None));
    }

    pub(crate) fn transition_at(&mut self, src: &str, event: &str, dst: &str, loc: Loc) {
        let src = self.state(src);
        let event = self.event(event);
        let dst = self.state(dst);
        self.raw.push(RawTransition {
            src,
            event,
            dst,
            loc,
        });
    }

    /// Validates every transition-system property.
    pub fn build(self) -> Result<TransitionSystem> {
        self.finish(Mode::Strict)
    }

    /// Validates everything except "every event occurs".
    pub fn build_relaxed(self) -> Result<TransitionSystem> {
        self.finish(Mode::Relaxed)
    }

    /// Drops unreachable states instead of rejecting them; relaxed otherwise.
    pub fn build_accessible(self) -> Result<TransitionSystem> {
        self.finish(Mode::Accessible)
    }

    fn check_names(&self) -> Result<()> {
        for s in &self.states {
            if !is_valid_state_name(s) {
                let loc = self
                    .raw
                    .iter()
                    .find(|t| self.states[t.src] == *s || self.states[t.dst] == *s)
                    .map(|t| t.loc)
                    .unwrap_or(self.initial_loc);
                return Err(TsError::InvalidToken {
                    loc,
                    kind: "state",
                    token: s.clone(),
                });
            }
        }
        for e in &self.events {
            if !is_valid_event_name(e) {
                let loc = self
                    .raw
                    .iter()
                    .find(|t| self.events[t.event] == *e)
                    .map(|t| t.loc)
                    .unwrap_or_default();
                return Err(TsError::InvalidToken {
                    loc,
                    kind: "event",
                    token: e.clone(),
                });
            }
        }
        Ok(())
    }

    fn finish(self, mode: Mode) -> Result<TransitionSystem> {
        self.check_names()?;
        let initial_name = self.initial.clone().ok_or(TsError::MissingInitial)?;
        let initial = self
            .state_id(&initial_name)
            .ok_or_else(|| TsError::UnknownInitial(initial_name.clone()))?;

        let n = self.states.len();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.raw {
            if t.src == t.dst {
                return Err(TsError::SelfLoop {
                    loc: t.loc,
                    state: self.states[t.src].clone(),
                    event: self.events[t.event].clone(),
                });
            }
            if seen.insert((t.src, t.event), t.dst).is_some() {
                return Err(TsError::Nondeterministic {
                    loc: t.loc,
                    state: self.states[t.src].clone(),
                    event: self.events[t.event].clone(),
                });
            }
        }

        let mut adj = vec![Vec::new(); n];
        for t in &self.raw {
            adj[t.src].push(t.dst);
        }
        let mut reached = vec![false; n];
        reached[initial] = true;
        let mut queue = VecDeque::from([initial]);
        while let Some(s) = queue.pop_front() {
            for &d in &adj[s] {
                if !reached[d] {
                    reached[d] = true;
                    queue.push_back(d);
                }
            }
        }

        let (states, raw) = if mode == Mode::Accessible {
            // Reindex surviving states, keeping their relative order.
            let mut remap = vec![usize::MAX; n];
            let mut states = Vec::new();
            for (i, s) in self.states.iter().enumerate() {
                if reached[i] {
                    remap[i] = states.len();
                    states.push(s.clone());
                }
            }
            let raw: Vec<RawTransition> = self
                .raw
                .iter()
                .filter(|t| reached[t.src])
                .map(|t| RawTransition {
                    src: remap[t.src],
                    event: t.event,
                    dst: remap[t.dst],
                    loc: t.loc,
                })
                .collect();
            (states, raw)
        } else {
            if let Some(i) = reached.iter().position(|r| !r) {
                return Err(TsError::Unreachable(self.states[i].clone()));
            }
            (self.states, self.raw)
        };

        if mode == Mode::Strict {
            let mut used = vec![false; self.events.len()];
            for t in &raw {
                used[t.event] = true;
            }
            if let Some(e) = used.iter().position(|u| !u) {
                return Err(TsError::UnusedEvent(self.events[e].clone()));
            }
        }

        let state_index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let initial = if mode == Mode::Accessible {
            states
                .iter()
                .position(|s| *s == initial_name)
                .expect("initial is reachable")
        } else {
            initial
        };
        let transitions: Vec<Transition> = raw
            .iter()
            .map(|t| Transition {
                src: t.src,
                event: t.event,
                dst: t.dst,
            })
            .collect();
        let mut succ = vec![Vec::new(); states.len()];
        for t in &transitions {
            succ[t.src].push((t.event, t.dst));
        }
        Ok(TransitionSystem {
            states,
            state_index,
            events: self.events,
            event_index: self.event_index,
            transitions,
            initial,
            succ,
        })
    }
}

/// A sequence of event names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace(pub Vec<String>);

impl Trace {
    /// Splits on whitespace.
    pub fn from_words(s: &str) -> Trace {
        Trace(s.split_whitespace().map(str::to_string).collect())
    }

    pub fn events(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

//! Graphviz output for transition systems and state machines.

use std::fmt::Write;

use crate::sm::StateMachine;
use crate::ts::TransitionSystem;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph of `ts`: nodes in state order, initial double-circled.
pub fn to_dot(ts: &TransitionSystem) -> String {
    let mut out = String::from("digraph ts {\n  node [shape=circle];\n");
    for (i, s) in ts.states().iter().enumerate() {
        if i == ts.initial() {
            writeln!(out, "  {} [shape=doublecircle];", quote(s)).unwrap();
        } else {
            writeln!(out, "  {};", quote(s)).unwrap();
        }
    }
    for t in ts.transitions() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(ts.state_name(t.src)),
            quote(ts.state_name(t.dst)),
            quote(ts.event_name(t.event))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// DOT digraph of one state machine; each place carries its states as a tooltip.
pub fn sm_to_dot(ts: &TransitionSystem, sm: &StateMachine) -> String {
    let mut out = String::from("digraph sm {\n  node [shape=circle];\n");
    for (i, p) in sm.places().iter().enumerate() {
        let tooltip = format!("{{{}}}", p.region.names(ts).join(", "));
        let shape = if sm.initial_marking().contains(&i) {
            "shape=doublecircle, "
        } else {
            ""
        };
        writeln!(
            out,
            "  {} [{}tooltip={}];",
            quote(&p.name),
            shape,
            quote(&tooltip)
        )
        .unwrap();
    }
    for e in sm.edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&sm.places()[e.pre].name),
            quote(&sm.places()[e.post].name),
            quote(ts.event_name(e.event))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

//! Synchronous product restricted to its accessible part.

use std::collections::{HashMap, VecDeque};

use super::{Result, TransitionSystem, TsBuilder, TsError};

/// Joins component state names inside composite product states.
pub const PRODUCT_SEPARATOR: char = '\u{b7}';

/// Synchronous product of `components`: shared events synchronize, private events
/// interleave, and only states reachable from the composite initial state are kept.
///
/// The alphabet is the union of the component alphabets in component order, so the
/// result is relaxed when a shared event can never fire.
pub fn sync_product(components: &[&TransitionSystem]) -> Result<TransitionSystem> {
    sync_product_with_tuples(components).map(|(ts, _)| ts)
}

/// Like [`sync_product`], also returning the component state tuple of every product state.
pub fn sync_product_with_tuples(
    components: &[&TransitionSystem],
) -> Result<(TransitionSystem, Vec<Vec<usize>>)> {
    if components.is_empty() {
        return Err(TsError::EmptyProduct);
    }

    let mut alphabet: Vec<&str> = Vec::new();
    let mut alphabet_index: HashMap<&str, usize> = HashMap::new();
    for c in components {
        for e in c.events() {
            if !alphabet_index.contains_key(e.as_str()) {
                alphabet_index.insert(e, alphabet.len());
                alphabet.push(e);
            }
        }
    }
    // For each product event, the (component, local event) pairs that take part.
    let participants: Vec<Vec<(usize, usize)>> = alphabet
        .iter()
        .map(|e| {
            components
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.event_id(e).map(|le| (i, le)))
                .collect()
        })
        .collect();

    let start: Vec<usize> = components.iter().map(|c| c.initial()).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut tuples = vec![start];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(cur) = queue.pop_front() {
        for (pe, parts) in participants.iter().enumerate() {
            let mut next = tuples[cur].clone();
            let enabled =
                parts.iter().all(
                    |&(ci, le)| match components[ci].successor(tuples[cur][ci], le) {
                        Some(d) => {
                            next[ci] = d;
                            true
                        }
                        None => false,
                    },
                );
            if !enabled {
                continue;
            }
            let dst = match index.get(&next) {
                Some(&d) => d,
                None => {
                    let d = tuples.len();
                    index.insert(next.clone(), d);
                    tuples.push(next);
                    queue.push_back(d);
                    d
                }
            };
            edges.push((cur, pe, dst));
        }
    }

    let sep = PRODUCT_SEPARATOR.to_string();
    let names: Vec<String> = tuples
        .iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(ci, &s)| components[ci].state_name(s))
                .collect::<Vec<_>>()
                .join(&sep)
        })
        .collect();

    let mut b = TsBuilder::new();
    for n in &names {
        b.state(n);
    }
    b.initial(&names[0]);
    for e in &alphabet {
        b.event(e);
    }
    for (s, e, d) in edges {
        b.transition(&names[s], alphabet[e], &names[d]);
    }
    Ok((b.build_relaxed()?, tuples))
}

//! The line-oriented `.ts` text format.
//!
//! ```text
//! # comment
//! .initial s0
//! s0 a s1
//! s1 b s0
//! .end
//! ```

use std::fmt::Write;

use super::{
    is_event_char, is_input_state_char, Loc, Result, TransitionSystem, TsBuilder, TsError,
};

fn check_state(token: &str, loc: Loc) -> Result<()> {
    if token.chars().all(is_input_state_char) {
        Ok(())
    } else {
        Err(TsError::InvalidToken {
            loc,
            kind: "state",
            token: token.to_string(),
        })
    }
}

fn check_event(token: &str, loc: Loc) -> Result<()> {
    if token.chars().all(is_event_char) {
        Ok(())
    } else {
        Err(TsError::InvalidToken {
            loc,
            kind: "event",
            token: token.to_string(),
        })
    }
}

/// Parses and fully validates a `.ts` document.
pub fn parse_ts(text: &str) -> Result<TransitionSystem> {
    let mut b = TsBuilder::new();
    let mut saw_initial = None;
    let mut ended = false;
    let mut endpoints = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let loc = Loc(Some(i + 1));
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if ended {
            return Err(TsError::Syntax {
                loc,
                message: "content after `.end`".into(),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [".initial", state] => {
                if saw_initial.is_some() {
                    return Err(TsError::DuplicateInitial { loc });
                }
                check_state(state, loc)?;
                saw_initial = Some(state.to_string());
                b.initial_at(state, loc);
            }
            [".initial", ..] => {
                return Err(TsError::Syntax {
                    loc,
                    message: "`.initial` takes exactly one state".into(),
                });
            }
            [".end"] => ended = true,
            [src, event, dst] => {
                check_state(src, loc)?;
                check_event(event, loc)?;
                check_state(dst, loc)?;
                b.transition_at(src, event, dst, loc);
                endpoints.insert(src.to_string());
                endpoints.insert(dst.to_string());
            }
            _ => {
                return Err(TsError::Syntax {
                    loc,
                    message: format!("expected `<src> <event> <dst>`, found `{line}`"),
                });
            }
        }
    }
    if let Some(init) = saw_initial {
        if !endpoints.is_empty() && !endpoints.contains(&init) {
            return Err(TsError::UnknownInitial(init));
        }
    }
    b.build()
}

/// Writes `ts` so that [`parse_ts`] reproduces it, including state order.
///
/// The `.initial` header is placed at the point of the transition stream where the
/// initial state first appears in the canonical order.
pub fn serialize_ts(ts: &TransitionSystem) -> String {
    let mut out = String::new();
    let n = ts.num_states();
    let init = ts.initial();
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut header = false;
    let write_header = |out: &mut String, seen: &mut [bool], count: &mut usize| {
        writeln!(out, ".initial {}", ts.state_name(init)).unwrap();
        if !seen[init] {
            seen[init] = true;
            *count += 1;
        }
    };
    for t in ts.transitions() {
        if !header && count == init && !seen[init] {
            write_header(&mut out, &mut seen, &mut count);
            header = true;
        }
        for s in [t.src, t.dst] {
            if !seen[s] {
                seen[s] = true;
                count += 1;
            }
        }
        writeln!(
            out,
            "{} {} {}",
            ts.state_name(t.src),
            ts.event_name(t.event),
            ts.state_name(t.dst)
        )
        .unwrap();
    }
    if !header {
        if out.is_empty() {
            write_header(&mut out, &mut seen, &mut count);
        } else {
            out.push_str(&format!(".initial {}\n", ts.state_name(init)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_ts(".initial s0\ns0 a s1\n\ns1 a\n").unwrap_err();
        assert!(
            matches!(
                err,
                TsError::Syntax {
                    loc: Loc(Some(4)),
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_ts(".initial s0\ns0 a s0\n").unwrap_err();
        assert!(matches!(
            err,
            TsError::SelfLoop {
                loc: Loc(Some(2)),
                ..
            }
        ));
        assert!(err.to_string().contains("s0"));
    }

    #[test]
    fn missing_and_unknown_initial() {
        assert_eq!(parse_ts("s0 a s1\n").unwrap_err(), TsError::MissingInitial);
        assert_eq!(
            parse_ts(".initial q\ns0 a s1\n").unwrap_err(),
            TsError::UnknownInitial("q".into())
        );
        assert!(matches!(
            parse_ts(".initial s0\n.initial s1\ns0 a s1").unwrap_err(),
            TsError::DuplicateInitial { .. }
        ));
    }

    #[test]
    fn rejects_separator_in_input() {
        let err = parse_ts(".initial s0\ns0 a s\u{b7}1\n").unwrap_err();
        assert!(matches!(err, TsError::InvalidToken { kind: "state", .. }));
        let err = parse_ts(".initial s0\ns0 a! s1\n").unwrap_err();
        assert!(matches!(err, TsError::InvalidToken { kind: "event", .. }));
    }

    #[test]
    fn comments_and_end() {
        let ts = parse_ts("# hdr\n.initial s0 # start\ns0 b- s1\n.end\n").unwrap();
        assert_eq!(ts.events(), ["b-"]);
        assert!(parse_ts(".initial s0\ns0 a s1\n.end\ns1 b s0\n").is_err());
    }

    #[test]
    fn single_transition_serialization() {
        let ts = parse_ts(".initial s0\ns0 a s1\n").unwrap();
        assert_eq!(serialize_ts(&ts), ".initial s0\ns0 a s1\n");
    }

    #[test]
    fn late_header_round_trips_order() {
        let ts = parse_ts("s0 a s1\n.initial s1\ns1 b s0\n").unwrap();
        let text = serialize_ts(&ts);
        assert_eq!(parse_ts(&text).unwrap(), ts);
        let ts = parse_ts("s0 a s1\ns1 b s2\ns2 c s0\n.initial s2\n").unwrap();
        assert_eq!(parse_ts(&serialize_ts(&ts)).unwrap(), ts);
    }
}

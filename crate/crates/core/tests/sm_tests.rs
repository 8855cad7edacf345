mod common;

use common::{ects_corpus, fixture, fixture_text};
use tsdecomp::decompose::{generate_sm_set, verify_decomposition};
use tsdecomp::regions::minimal_regions;
use tsdecomp::sm::{
    interpret_as_ts, parse_sm, reachability_graph, serialize_sm, sm_from_regions, validate_sm,
    SmEdge, SmSet, StateMachine,
};
use tsdecomp::ts::{is_isomorphic, sync_product, Trace, TransitionSystem};

fn load(ts: &TransitionSystem, name: &str) -> StateMachine {
    parse_sm(&fixture_text(&format!("sm/{name}")))
        .unwrap()
        .bind(ts)
        .unwrap()
}

#[test]
fn disjoint_covering_region_sets_are_exactly_the_machines() {
    let ts = fixture("fig2.ts");
    let regions = minimal_regions(&ts).unwrap();
    let n = regions.len();
    let mut machines = 0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let disjoint = idx.iter().enumerate().all(|(a, &i)| {
            idx[a + 1..]
                .iter()
                .all(|&j| !regions[i].intersects(&regions[j]))
        });
        let covered: usize = idx.iter().map(|&i| regions[i].len()).sum();
        let expected = disjoint && covered == ts.num_states();
        let got = sm_from_regions(&ts, &regions, &idx);
        assert_eq!(got.is_ok(), expected, "{idx:?}");
        if let Ok(sm) = got {
            machines += 1;
            assert!(validate_sm(&ts, &sm).is_empty());
        }
    }
    assert_eq!(machines, 8);
}

#[test]
fn sm4_and_sm5_reproduce_the_six_state_product() {
    let ts = fixture("fig2.ts");
    let sm4 = load(&ts, "sm4.sm");
    let sm5 = load(&ts, "sm5.sm");
    for sm in [&sm4, &sm5] {
        assert!(validate_sm(&ts, sm).is_empty());
    }
    assert_eq!(sm4.places().len(), 3);
    assert_eq!(sm5.places().len(), 2);
    let (g4, g5) = (reachability_graph(&sm4), reachability_graph(&sm5));
    let product = sync_product(&[&g4, &g5]).unwrap();
    assert_eq!(product.num_states(), 6);
    let long = Trace::from_words("a c b d a e f d");
    let short = Trace::from_words("b a c f d");
    assert!(ts.accepts(long.events()));
    assert!(product.accepts(long.events()));
    assert!(product.accepts(short.events()));
    assert!(!ts.accepts(short.events()));
}

#[test]
fn sm4_sm5_alone_fail_with_a_witness_starting_with_b() {
    let ts = fixture("fig2.ts");
    let pair = SmSet::new(vec![load(&ts, "sm4.sm"), load(&ts, "sm5.sm")]);
    let outcome = verify_decomposition(&ts, &pair);
    let w = outcome.witness().expect("not bisimilar");
    assert_eq!(w.trace.events()[0], "b");
    assert!(!ts.accepts(w.trace.events()));
}

#[test]
fn sm_text_round_trips() {
    let ts = fixture("fig2.ts");
    for name in ["sm4.sm", "sm5.sm"] {
        let sm = load(&ts, name);
        assert_eq!(serialize_sm(&ts, &sm), fixture_text(&format!("sm/{name}")));
    }
}

#[test]
fn validation_catches_structural_damage() {
    let ts = fixture("fig2.ts");
    let sm4 = load(&ts, "sm4.sm");
    let mut edges = sm4.edges().to_vec();
    // send d back into the middle place instead of the initial one
    let d = edges
        .iter_mut()
        .find(|e| ts.event_name(e.event) == "d")
        .unwrap();
    d.post = 1;
    let bad = StateMachine::from_parts_unchecked(&ts, sm4.places().to_vec(), edges, vec![0]);
    assert!(!validate_sm(&ts, &bad).is_empty());

    let twice = StateMachine::from_parts_unchecked(
        &ts,
        sm4.places().to_vec(),
        sm4.edges().to_vec(),
        vec![0, 1],
    );
    assert!(!validate_sm(&ts, &twice).is_empty());

    let mut extra = sm4.edges().to_vec();
    extra.push(SmEdge {
        pre: 0,
        event: ts.event_id("a").unwrap(),
        post: 2,
    });
    let dup = StateMachine::from_parts_unchecked(&ts, sm4.places().to_vec(), extra, vec![0]);
    assert!(validate_sm(&ts, &dup)
        .iter()
        .any(|d| d.contains("labels 2 edges")));
}

#[test]
fn token_game_is_isomorphic_to_direct_interpretation() {
    let mut corpus = ects_corpus(3, 40, 12, 6);
    corpus.push(fixture("fig1.ts"));
    corpus.push(fixture("fig2.ts"));
    for ts in corpus {
        let regions = minimal_regions(&ts).unwrap();
        let sms = generate_sm_set(&ts, &regions, false).unwrap();
        for m in sms.machines() {
            let rg = reachability_graph(m);
            let direct = interpret_as_ts(m).unwrap();
            assert!(is_isomorphic(&rg, &direct).unwrap().is_some());
            assert_eq!(rg.num_states(), m.places().len());
        }
    }
}

mod common;

use common::{ects_corpus, fixture};
use tsdecomp::decompose::{
    apply_merge, decompose_pipeline, exact_decompose, generate_sm_set, generation_sets,
    is_irredundant, plan_merge, remove_redundant, verify_decomposition, DecomposeError,
    DecomposeOptions, IntersectionGraph, MergeMode, MergePlan,
};
use tsdecomp::regions::minimal_regions;
use tsdecomp::sm::{ec_set_check, validate_sm, SmSet};
use tsdecomp::solver::{solve, SolveResult, DEFAULT_CONFLICT_BUDGET};
use tsdecomp::StateSet;

#[test]
fn fig2_pipeline() {
    let ts = fixture("fig2.ts");
    let opts = DecomposeOptions {
        verify_stages: true,
        ..Default::default()
    };
    let rep = decompose_pipeline(&ts, &opts).unwrap();
    assert!(rep.verified());
    assert!(rep.stages.iter().all(|s| s.verified == Some(true)));
    let generated = rep.stage("generate").unwrap();
    assert!(generated.sms.len() >= 2);
    let irr = rep.stage("irredundant").unwrap();
    assert!(irr.sms.len() <= 4);
    assert!(is_irredundant(&ts, &irr.sms));
    let merged = rep.stage("merge").unwrap();
    assert_eq!(
        (merged.places, merged.transitions),
        (irr.places, irr.transitions)
    );
    assert!(rep.merge_plan.as_ref().unwrap().is_identity());
}

#[test]
fn fig1_pipeline_hits_the_three_machine_target() {
    let ts = fixture("fig1.ts");
    let rep = decompose_pipeline(&ts, &DecomposeOptions::default()).unwrap();
    assert!(rep.verified());
    let fin = rep.final_sms();
    let mut sizes: Vec<usize> = fin.machines().iter().map(|m| m.places().len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [4, 4, 5]);
    assert_eq!(fin.total_places(), 13);
}

#[test]
fn generated_sets_cover_every_region_with_maximal_sets() {
    let mut corpus = ects_corpus(21, 40, 12, 6);
    corpus.push(fixture("fig1.ts"));
    corpus.push(fixture("fig2.ts"));
    for ts in corpus {
        let regions = minimal_regions(&ts).unwrap();
        let g = IntersectionGraph::from_regions(&regions);
        let (phase1, phase2) = generation_sets(&g, false);
        let mut seen = vec![0; regions.len()];
        for m in &phase1 {
            for &v in m {
                seen[v] += 1;
            }
        }
        assert!(
            seen.iter().all(|&c| c == 1),
            "phase one covers each vertex once"
        );
        assert!(phase2.iter().all(|m| g.is_maximal_independent(m)));
        let sms = generate_sm_set(&ts, &regions, false).unwrap();
        assert!(ec_set_check(&ts, &sms).is_ects());
        assert_eq!(sms.region_union().len(), regions.len());
    }
}

#[test]
fn duplicated_machine_is_removed() {
    let ts = fixture("two_cycle.ts");
    let regions = minimal_regions(&ts).unwrap();
    let one = generate_sm_set(&ts, &regions, false).unwrap();
    assert_eq!(one.len(), 1);
    let twice = SmSet::new(vec![one.machines()[0].clone(), one.machines()[0].clone()]);
    let kept = remove_redundant(&ts, &twice);
    assert_eq!(kept.len(), 1);
}

#[test]
fn exact_mode_dominates_greedy() {
    let mut corpus = ects_corpus(33, 60, 12, 6);
    corpus.push(fixture("fig1.ts"));
    corpus.push(fixture("fig2.ts"));
    corpus.push(fixture("two_cycle.ts"));
    for ts in corpus {
        let regions = minimal_regions(&ts).unwrap();
        let greedy = remove_redundant(&ts, &generate_sm_set(&ts, &regions, false).unwrap());
        let exact = exact_decompose(&ts, &regions).unwrap();
        assert!(exact.len() <= greedy.len());
        assert!(ec_set_check(&ts, &exact).is_ects());
        assert!(verify_decomposition(&ts, &exact).is_bisimilar());
    }
    let ts = fixture("two_cycle.ts");
    assert_eq!(
        exact_decompose(&ts, &minimal_regions(&ts).unwrap())
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn merge_example_drops_one_e() {
    let ts = fixture("merge_example.ts");
    let regions = minimal_regions(&ts).unwrap();
    let sms = remove_redundant(&ts, &generate_sm_set(&ts, &regions, false).unwrap());
    assert_eq!(sms.len(), 2);
    assert_eq!(sms.total_transitions(), 8);

    let plan = plan_merge(&ts, &sms, DEFAULT_CONFLICT_BUDGET).unwrap();
    assert_eq!(plan.objective, 7);
    assert_eq!(plan.dropped(), 1);
    let e = ts.event_id("e").unwrap();
    let (mi, j) = plan
        .keep
        .iter()
        .enumerate()
        .find_map(|(mi, k)| k.iter().position(|&b| !b).map(|j| (mi, j)))
        .unwrap();
    assert_eq!(sms.machines()[mi].edges()[j].event, e);

    // certificate: satisfiable at the optimum, unsatisfiable one below
    let opt = plan.optimum.as_ref().unwrap();
    assert_eq!(opt.cost, 7);
    assert!(matches!(
        solve(opt.unsat_below.as_ref().unwrap(), DEFAULT_CONFLICT_BUDGET),
        SolveResult::Unsat
    ));

    let merged = apply_merge(&ts, &sms, &plan).unwrap();
    let p01 = StateSet::from_indices(
        ts.num_states(),
        ["p0", "p1"].map(|s| ts.state_id(s).unwrap()),
    );
    let m = &merged.machines()[mi];
    assert!(m.places().iter().any(|p| p.region.states() == &p01));
    assert_eq!(m.places().len(), 3);
    for m in merged.machines() {
        assert!(validate_sm(&ts, m).is_empty());
    }
    assert!(verify_decomposition(&ts, &merged).is_bisimilar());
}

#[test]
fn identity_plans() {
    let ts = fixture("two_cycle.ts");
    let sms = generate_sm_set(&ts, &minimal_regions(&ts).unwrap(), false).unwrap();
    let plan = plan_merge(&ts, &sms, DEFAULT_CONFLICT_BUDGET).unwrap();
    assert!(plan.is_identity());
    let ts = fixture("fig2.ts");
    let sms = remove_redundant(
        &ts,
        &generate_sm_set(&ts, &minimal_regions(&ts).unwrap(), false).unwrap(),
    );
    let id = MergePlan::identity(&sms);
    assert_eq!(apply_merge(&ts, &sms, &id).unwrap(), sms);
}

#[test]
fn not_closed_input_is_rejected() {
    let ts = fixture("needs_splitting.ts");
    match decompose_pipeline(&ts, &DecomposeOptions::default()) {
        Err(DecomposeError::NotEcts { failing_events }) => {
            assert!(failing_events.contains(&"a".to_string()))
        }
        other => panic!("{other:?}"),
    }
}

/// Every stage of every run verifies bisimilar, and merged places are regions.
#[test]
fn every_stage_verifies_on_generated_corpus() {
    let corpus = ects_corpus(42, 120, 12, 6);
    assert!(corpus.len() >= 100, "corpus has {}", corpus.len());
    for ts in corpus {
        for (exact, merge) in [
            (false, MergeMode::Sat),
            (true, MergeMode::Sat),
            (false, MergeMode::None),
        ] {
            let opts = DecomposeOptions {
                exact,
                merge,
                verify_stages: true,
                ..Default::default()
            };
            let rep = decompose_pipeline(&ts, &opts).unwrap();
            for s in &rep.stages {
                assert_eq!(
                    s.verified,
                    Some(true),
                    "{} {}",
                    s.name,
                    tsdecomp::ts::serialize_ts(&ts)
                );
                assert!(ec_set_check(&ts, &s.sms).is_ects());
                for m in s.sms.machines() {
                    assert!(validate_sm(&ts, m).is_empty());
                }
            }
            assert!(is_irredundant(&ts, &rep.stage("irredundant").unwrap().sms));
            if let tsdecomp::decompose::VerifyOutcome::Bisimilar {
                intersection_relation_ok,
                ..
            } = rep.verification
            {
                assert!(intersection_relation_ok);
            }
        }
    }
}

//! The decomposition pipeline: generation, redundancy removal, merging, verification.

mod generate;
mod graph;
mod merge;
mod verify;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::regions::{
    check_ects, minimal_regions_with, Region, RegionError, RegionOptions, RegionSetReport,
    DEFAULT_REGION_BUDGET,
};
use crate::sm::{SmError, SmSet};
use crate::solver::DEFAULT_CONFLICT_BUDGET;
use crate::ts::TransitionSystem;

pub use generate::{
    exact_decompose, generate_sm_set, generation_sets, is_irredundant, remove_redundant,
    EXACT_REGION_CAP,
};
pub use graph::{
    mis_exact_all, mis_greedy, mis_greedy_within, GraphError, IntersectionGraph, EXACT_MIS_CAP,
};
pub use merge::{apply_merge, plan_merge, MergePlan};
pub use verify::{
    intersection_relation_is_bisimulation, machine_product, verify_decomposition, VerifyOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("not excitation closed; failing events: {}", failing_events.join(", "))]
    NotEcts { failing_events: Vec<String> },
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Sm(#[from] SmError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{regions} minimal regions exceed the exact-mode cap of {cap}")]
    TooManyRegions { regions: usize, cap: usize },
    #[error("no set of machines is excitation closed")]
    NoCover,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MergeMode {
    #[default]
    Sat,
    None,
}

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub merge: MergeMode,
    pub exact: bool,
    pub region_budget: usize,
    pub solver_budget: u64,
    pub parallel: bool,
    /// Verify every stage, not just the last one.
    pub verify_stages: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            merge: MergeMode::Sat,
            exact: false,
            region_budget: DEFAULT_REGION_BUDGET,
            solver_budget: DEFAULT_CONFLICT_BUDGET,
            parallel: true,
            verify_stages: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageReport {
    /// `generate` or `exact`, then `irredundant`, then `merge`.
    pub name: &'static str,
    pub sms: SmSet,
    pub places: usize,
    pub transitions: usize,
    pub wall: Duration,
    /// Present when the stage output was verified.
    pub verified: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub regions: Vec<Region>,
    pub ects: RegionSetReport,
    pub regions_wall: Duration,
    pub stages: Vec<StageReport>,
    pub merge_plan: Option<MergePlan>,
    pub verification: VerifyOutcome,
    pub verify_wall: Duration,
    pub warnings: Vec<String>,
}

impl DecompositionReport {
    pub fn final_sms(&self) -> &SmSet {
        &self.stages.last().expect("pipeline records stages").sms
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn verified(&self) -> bool {
        self.verification.is_bisimilar()
    }
}

/// Runs the whole pipeline on `ts`. Inputs that are not excitation closed are
/// rejected, since label splitting is not attempted.
pub fn decompose_pipeline(
    ts: &TransitionSystem,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport, DecomposeError> {
    let t = Instant::now();
    let regions = minimal_regions_with(
        ts,
        RegionOptions {
            budget: opts.region_budget,
            parallel: opts.parallel,
        },
    )?;
    let ects = check_ects(ts, &regions);
    let regions_wall = t.elapsed();
    if !ects.is_ects() {
        return Err(DecomposeError::NotEcts {
            failing_events: ects.failing_events,
        });
    }

    let mut stages = Vec::new();
    let stage = |name, sms: SmSet, wall| {
        let verified = opts
            .verify_stages
            .then(|| verify_decomposition(ts, &sms).is_bisimilar());
        StageReport {
            name,
            places: sms.total_places(),
            transitions: sms.total_transitions(),
            sms,
            wall,
            verified,
        }
    };

    let t = Instant::now();
    let first = if opts.exact {
        exact_decompose(ts, &regions)?
    } else {
        generate_sm_set(ts, &regions, opts.parallel)?
    };
    stages.push(stage(
        if opts.exact { "exact" } else { "generate" },
        first,
        t.elapsed(),
    ));

    let t = Instant::now();
    let irredundant = remove_redundant(ts, &stages[0].sms);
    stages.push(stage("irredundant", irredundant, t.elapsed()));

    let mut warnings = Vec::new();
    let t = Instant::now();
    let (merged, merge_plan) = match opts.merge {
        MergeMode::Sat => {
            let plan = plan_merge(ts, &stages[1].sms, opts.solver_budget)?;
            warnings.extend(plan.warning.clone());
            (apply_merge(ts, &stages[1].sms, &plan)?, Some(plan))
        }
        MergeMode::None => (stages[1].sms.clone(), None),
    };
    stages.push(stage("merge", merged, t.elapsed()));

    let t = Instant::now();
    let verification = verify_decomposition(ts, &stages[2].sms);
    let verify_wall = t.elapsed();
    Ok(DecompositionReport {
        regions,
        ects,
        regions_wall,
        stages,
        merge_plan,
        verification,
        verify_wall,
        warnings,
    })
}

//! Decomposition of transition systems into sets of synchronizing state machines.
//!
//! The pipeline computes the minimal regions of an excitation-closed transition
//! system, groups disjoint regions into state machines through maximal independent
//! sets, drops redundant machines, merges repeated regions with a SAT-based
//! optimization, and checks the result by bisimulation against the input.

pub mod decompose;
pub mod dot;
mod par;
pub mod regions;
pub mod sm;
pub mod solver;
pub mod stateset;
pub mod ts;

pub use regions::{Region, RegionSetReport};
pub use sm::{SmSet, StateMachine};
pub use stateset::StateSet;
pub use ts::{Trace, TransitionSystem};

//! Powerset algebras generated by independent partitions, monotone patterns
//! over them, and the refinement and realizability checks built on top.

pub mod algebra;
pub mod f2a;
pub mod los;
pub mod pattern;
pub mod possibility;
pub mod solver;
pub mod support;

pub use algebra::{decides, BElement, Generator, PartitionAlgebra, DEFAULT_ATOM_CAP};
pub use f2a::{f2a_pattern, refinement_support_profile, F2aInputs, F2aPattern, SupportReport};
pub use los::{los_pattern, LosPattern};
pub use pattern::{MonotonePattern, PatternDoc, MAX_LAMBDA};
pub use possibility::{check_possibility, Possibility, PossibilityReport};
pub use solver::{
    find_mult_refinement, refinement_violation, Mode, Outcome, Refinement, SolveReport, Transcript,
};
pub use support::{build_support, SupportProfile, SupportSet};

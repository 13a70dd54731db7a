//! Finite combinatorics of m-free hypergraphs, set mappings, covering
//! colorings and multiplicative refinements over partition algebras.

pub mod boolalg;
pub mod covering;
pub mod error;
pub mod hypergraph;
pub mod setmaps;
pub mod subset;

pub use error::{Error, Result};
pub use hypergraph::{
    check_extension, modular_model, random_m_free, type_consistent, Collapse, Consistency,
    ConsistencyProfile, Hypergraph, Inconsistency, PartialRType, SignedTuple,
};
pub use setmaps::{
    c10_normalize, f2ax_witness, shrink_arity, F2axWitness, Flavor, SeparationRule, SetMapping,
    SetTable,
};
pub use covering::{
    compress_config, config_violates, lift_coloring, min_colors, otp_equiv, verify_pr, z4_construct,
    Coloring, EnvelopeConfig, PrInstance, PrVerdict, Variant, Z4Report,
};
pub use boolalg::{
    build_support, check_possibility, decides, f2a_pattern, find_mult_refinement, los_pattern,
    refinement_support_profile, BElement, Generator, Mode, MonotonePattern, PartitionAlgebra,
    Refinement,
};

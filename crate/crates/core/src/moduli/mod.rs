//! Error-bound moduli and stability verdicts.

pub mod boundary;
pub mod distance;
pub mod eta;
pub mod stability;

pub use boundary::{boundary_sample, BoundarySample, BoundarySegment};
pub use distance::{
    distance_from_anchor, distance_to_solution_set, find_slater_point, locate_anchor, Anchor, DistanceEstimate,
};
pub use eta::{eta_global, eta_global_with_anchor, eta_local, eta_local_with_anchor, Modulus, ModulusReport, ModulusScope, ShrinkLevel};
pub use stability::{
    check_boundary_beta_condition, classify_global_stability, classify_local_stability, destabilizing_perturbation,
    qc_witness_search, BoundaryBetaCheck, QcSearch, StabilityScope, StabilityVerdict, Verdict, Witness,
};

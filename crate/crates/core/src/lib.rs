//! Error-bound moduli and perturbation stability for convex inequalities
//! `f(x) ≤ 0`, built on directional derivatives and subdifferentials.

pub mod error;
pub mod expr;
pub mod family;
pub mod geometry;
pub mod moduli;
pub mod sampling;
pub mod sphere;
pub mod testing;
pub mod vecops;

pub use error::{Error, Result};
pub use expr::{ConvexExpr, Node};
pub use geometry::{BoundaryDistance, MinNormPoint, OriginLocation, OriginTag, SubdiffSet};
pub use sampling::BoxDomain;
pub use sphere::{beta, beta_of_linear_perturbation, beta_sampled, BetaCertificate};
pub use family::{ActiveSet, HypothesisCheck, HypothesisStatus, Inclusion, Index, IndexSet, IndexedFamily};
pub use moduli::{Anchor, Modulus, ModulusReport, StabilityVerdict, Verdict, Witness};

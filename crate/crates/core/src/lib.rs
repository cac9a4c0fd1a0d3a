//! Probabilistic frames on `R^n` represented as finitely supported measures.
//!
//! Frame operators and bounds, canonical duals and Parseval frames, exact
//! discrete optimal transport, transport-dual membership and perturbation
//! certificates.

#![allow(clippy::needless_range_loop)]

pub mod battery;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod measure;
pub mod perturb;
pub mod transport;

pub use error::{Error, Result};
pub use frame::{
    canonical_dual, canonical_parseval, frame_bounds, frame_bounds_with_tol, frame_operator,
    reconstruction_residual, Classification, Frame, FrameCertificate, PairedMeasure,
    ReconstructionMode,
};
pub use linalg::{eigh, EigenDecomposition, Matrix, SymMatrix};
pub use measure::{make_measure, pushforward, second_moment, DiscreteMeasure, LinearMap};
pub use perturb::{
    certify_canonical_dual, certify_coupling_dual, certify_dual_stability, certify_paley,
    certify_parseval_tau, certify_quadclose, certify_sweetie, certify_sweetie_coupling, certify_w2,
    falsify_paley, validate, Certifier, Delta, PerturbationCertificate, Theorem, ValidationReport,
};
pub use transport::{dual_membership, glue, w2, Coupling, DualMembership, TriplePlan};

//! Exact étale cohomology of curves via finite group cohomology.
//!
//! Curves are modeled combinatorially: smooth components with genus and
//! punctures, glued at multicross singular points. The library constructs
//! explicit Galois covering towers of such curves, reduces sheaf cohomology
//! in degrees 0–3 to the cohomology of the finite automorphism groups of the
//! towers, and computes cup products `H¹×H¹→H²` (separably closed base) and
//! `H¹×H²→H³` (finite base field) exactly over Λ = ℤ/nℤ.
//!
//! Every reduction step is verified at runtime against independent checks:
//! coset tables are re-traced through all relators, coverings are re-checked
//! for the combinatorial étale and Galois conditions, cocycles are re-checked
//! to be closed, and cohomology backends are cross-validated against each
//! other. A mathematical verification failure is reported as a hard error,
//! never silently repaired.

pub mod arithmetic;
pub mod cache;
pub mod coverings;
pub mod curves;
pub mod document;
pub mod error;
pub mod fpgroups;
pub mod groupcohom;
pub mod limits;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod sheafcohom;

pub use error::{Error, Result};

//! Explicit Galois coverings of multicross curves.
//!
//! A covering is stored fiberwise: every component of the base carries
//! `degree` sheets (the fiber over its base point, trivialized along chosen
//! paths to each marked point), the monodromy of each component generator
//! permutes the sheets, and each singular point carries an attachment table
//! saying which point copy every branch-sheet pair is glued into. The
//! combinatorial étale condition is that every point copy receives exactly
//! one sheet per branch: for multicross singularities the tangent cone is
//! determined by the branch set, so branch-set bijectivity stands in for
//! the tangent-cone isomorphisms.
//!
//! Constructions: lifting a connected Galois cover of the normalization of
//! an integral curve through its singular points, extending a cover of one
//! component of a reducible curve by gluing translated copies of the other
//! components, the cyclic singular-point coverings, and the full covering
//! with deck group H¹(X,Λ)^∨ built either as a fiber product of those
//! pieces or from the mod-n derived quotient of the fundamental group. The
//! two routes are cross-checked against each other.

mod build;
mod model;
mod monodromy;

pub use build::{
    build_x_n, build_yi, component_curve, covering_from_quotient, extend_reducible,
    fiber_product, lift_irreducible, lift_irreducible_with_choices, normalization_xn_datum,
};
pub use model::{CheckResult, CoveringModel, CoveringReport, SmoothCoverDatum, SourceModel};
pub use monodromy::{marked_quotients_isomorphic, monodromy_action};

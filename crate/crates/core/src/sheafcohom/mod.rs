//! Sheaf cohomology pipelines over separably closed bases.
//!
//! A lisse sheaf is a finite Λ-module with one monodromy automorphism per
//! fundamental-group generator. The trivializing quotient is the monodromy
//! image; covering towers are built on top of it by iterated mod-n derived
//! quotients, and H⁰ through H² together with the H¹×H¹→H² cup product are
//! read off the finite tower groups. Every identification is certified at
//! finite level: H¹ classes must die on the next kernel down, the stable H²
//! image must be reached, and dimension bookkeeping (Euler characteristics)
//! is checked where it applies.

mod pipeline;
mod sheaf;
mod tower;

pub use pipeline::{
    cup11, effaceability_check, euler_characteristic_check, h0, h1, h2, rgamma,
    CupPairing, EffaceabilityReport, RGammaReport,
};
pub use sheaf::LisseSheaf;
pub use tower::{predicted_level_orders, Tower, TowerLevel};

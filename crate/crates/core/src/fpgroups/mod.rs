//! Finitely presented groups and their finite quotients.
//!
//! Coset enumeration (Todd-Coxeter, HLT with lookahead), subgroup
//! presentations (Reidemeister-Schreier), and the mod-n derived quotient
//! step π ↦ π/Uⁿ[U,U] that drives the covering towers. Finite groups carry
//! one of several structured representations (multiplication table, abelian
//! tuples, permutation images, or an extension of a smaller group by a
//! finite Λ-module) so that tower levels stay cheap even at five-digit
//! orders.
//!
//! All orderings are fixed: elements of quotients are labeled by shortlex
//! least coset representatives, and breadth-first numbering is used
//! everywhere, so identical inputs give identical tables across runs.

mod coset;
mod group;
mod presentation;
mod quotient;
mod word;

pub use coset::{todd_coxeter, CosetTable};
pub use group::{Elt, FiniteGroup, GroupHom};
pub use presentation::Presentation;
pub use quotient::{
    extend_quotient, finite_quotient_from_action, galois_closure, mod_n_derived_quotient,
    FiniteQuotient,
};
pub use word::{abelianized as word_abelianization, commutator, concat, inverse, power, reduce_word, Word};

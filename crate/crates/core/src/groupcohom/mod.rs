//! Finite group cohomology in degrees 0 through 3 (plus degree-4 cochains
//! for checks), with two cross-validated backends, inflation/restriction,
//! cup products, and the spectral-sequence operations the tower pipelines
//! are built from.
//!
//! The generic backend parametrizes normalized cocycles by their values on
//! (generator, …) slices: the cocycle identity determines every other value
//! along a breadth-first decomposition of the first argument, and imposing
//! the identity on generator-led tuples alone is complete. Coboundary
//! membership in degree 2 needs no linear algebra: solutions of db = z
//! differ by crossed homomorphisms, so propagating values with zeroed free
//! choices and re-checking the generator-led equations decides membership
//! exactly.
//!
//! The abelian backend covers abelian groups with trivial action and
//! prime-order coefficient factors: explicit character and carry cocycles
//! multiply out to a monomial basis, and dual functionals (carry sums,
//! antisymmetrizations, shuffle sums) extract class coordinates from a
//! handful of evaluations. The two backends must agree wherever both apply;
//! the test suite enforces that.

mod abelian;
mod cochain;
mod generic;
mod gmodule;
mod hs;

pub use abelian::{abelian_backend_applicable, AbelianTheory};
pub use cochain::{cup, tensor_pairing, Cochain, Pairing};
pub use generic::{
    affine_solution as affine_solution_public, coboundary_relations, cocycle_space,
    reduce_into_basis, solve_degree2_coboundary, solve_degree3_coboundary,
};
pub use gmodule::GModule;
pub use hs::{
    cyclic_h1, h1_iso_certificate, h2_image, h3_edge_delta, h3_inflation_triviality_check,
    rgamma_representative, CyclicH1, DeltaClass, H2Image, H3TrivialityReport, RGammaComplex,
    Subgroup,
};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::linalg::{LambdaMatrix, LambdaModule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Generic,
    Abelian,
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Backend::Generic),
            "abelian" => Ok(Backend::Abelian),
            "auto" => Ok(Backend::Auto),
            other => Err(Error::invalid(format!("unknown backend '{other}'"))),
        }
    }
}

pub(crate) enum TheoryKind {
    GenericH0 { basis: LambdaMatrix },
    Generic { z_basis: Vec<Cochain> },
    Abelian(AbelianTheory),
}

/// A computed cohomology group together with enough data to express any
/// further cocycle in its basis.
pub struct CohomologyTheory {
    pub gm: Arc<GModule>,
    pub degree: usize,
    pub cohomology: LambdaModule,
    /// cocycle representative per canonical generator of `cohomology`
    pub reps: Vec<Cochain>,
    pub(crate) kind: TheoryKind,
}

impl std::fmt::Debug for CohomologyTheory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "H^{}(G of order {}; M {:?}) = {:?}",
            self.degree,
            self.gm.group.order(),
            self.gm.module.orders(),
            self.cohomology.orders()
        )
    }
}

impl CohomologyTheory {
    pub fn backend(&self) -> Backend {
        match self.kind {
            TheoryKind::Abelian(_) => Backend::Abelian,
            _ => Backend::Generic,
        }
    }

    /// Canonical coordinates of the class of a cocycle. Errors when z is
    /// not a cocycle of the right degree over the same module.
    pub fn coords(&self, z: &Cochain, limits: &Limits) -> Result<Vec<u64>> {
        if z.degree != self.degree {
            return Err(Error::invalid("coords: degree mismatch"));
        }
        match &self.kind {
            TheoryKind::Abelian(th) => th.coords(z),
            TheoryKind::GenericH0 { basis } => {
                let v = z.eval(&[]);
                // express v in the invariant basis rows
                let n = self.gm.modulus();
                let scaled_rows: Vec<Vec<u64>> = (0..basis.rows())
                    .map(|r| generic::scale_in(&self.gm.module, &basis.row(r)))
                    .collect();
                let a = LambdaMatrix::from_rows(n, self.gm.rank().max(1), &scaled_rows)
                    .transpose();
                let sv = generic::scale_in(&self.gm.module, &v);
                match crate::linalg::solve(&a, &sv)?.particular {
                    Some(c) => self.cohomology.project(&c),
                    None => Err(Error::verification(
                        "h0-coords",
                        "value is not an invariant",
                    )),
                }
            }
            TheoryKind::Generic { z_basis } => {
                let _ = limits;
                match generic::raw_coords(&self.gm, z_basis, z)? {
                    Some(nu) => self.cohomology.project(&nu),
                    None => Err(Error::verification(
                        "class-coords",
                        "cocycle is not in the span of the computed cocycle space",
                    )),
                }
            }
        }
    }

    pub fn class_is_trivial(&self, z: &Cochain, limits: &Limits) -> Result<bool> {
        Ok(self.coords(z, limits)?.iter().all(|&v| v == 0))
    }
}

/// H^i(G, M) for i ≤ 3. The generic path predicts its cost first and
/// refuses above the configured cap; the abelian path refuses when its
/// hypotheses (abelian group, trivial action, prime coefficient orders)
/// fail.
pub fn cohomology(
    gm: &GModule,
    degree: usize,
    backend: Backend,
    limits: &Limits,
) -> Result<CohomologyTheory> {
    if degree > 3 {
        return Err(Error::invalid("cohomology implemented for degrees 0..=3"));
    }
    match backend {
        Backend::Abelian => abelian::cohomology_abelian(gm, degree),
        Backend::Generic => generic::cohomology_generic(gm, degree, limits),
        Backend::Auto => {
            if abelian_backend_applicable(gm) {
                abelian::cohomology_abelian(gm, degree)
            } else {
                generic::cohomology_generic(gm, degree, limits)
            }
        }
    }
}

/// Exact coboundary decision with a certificate.
#[derive(Debug)]
pub enum CoboundaryAnswer {
    /// an explicit primitive c with dc = z
    Primitive(Cochain),
    /// every dual functional of the abelian theory vanished; the
    /// functionals form a complete dual basis, so the class is zero
    FunctionalCertificate { functionals_checked: usize },
    /// not a coboundary
    No { obstruction: String },
}

impl CoboundaryAnswer {
    pub fn is_coboundary(&self) -> bool {
        !matches!(self, CoboundaryAnswer::No { .. })
    }
}

/// Decide whether a normalized k-cocycle is a coboundary (k ≤ 3), with a
/// primitive when feasible.
pub fn is_coboundary(gm: &GModule, z: &Cochain, limits: &Limits) -> Result<CoboundaryAnswer> {
    match z.degree {
        1 => generic::solve_degree1_coboundary(gm, z),
        2 => solve_degree2_coboundary(gm, z),
        3 => {
            let u = gm.group.generators().len().max(1) as u128
                * gm.group.order() as u128
                * gm.rank().max(1) as u128;
            let cost = (gm.group.order() as u128).pow(2) * gm.rank().max(1) as u128 * (u + 1);
            if cost <= 300_000_000 {
                solve_degree3_coboundary(gm, z, limits)
            } else if abelian_backend_applicable(gm) {
                abelian::functional_coboundary_check(gm, z)
            } else {
                Err(Error::resource(format!(
                    "degree-3 coboundary solve of predicted cost {cost} exceeds the cap and \
                     the abelian certificate route does not apply"
                )))
            }
        }
        _ => Err(Error::invalid("is_coboundary supports degrees 1..=3")),
    }
}

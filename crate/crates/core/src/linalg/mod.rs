//! Exact linear algebra over Λ = ℤ/nℤ.
//!
//! The canonical form here is the Howell form rather than a Smith-type
//! diagonal form: ℤ/n is not a domain, and the row-module membership tests
//! that back every coboundary decision need a basis that is complete for
//! membership, which is exactly what the Howell property provides. Cyclic
//! order decompositions of finitely generated modules are layered on top via
//! an integer Smith normal form of lifted relation matrices.
//!
//! All pivoting and ordering rules are fixed (lowest row index, lowest
//! column index), so every output is bit-reproducible.

mod howell;
mod matrix;
mod module;
mod residue;
mod snf;

pub use howell::{howell_form, AugmentedHowell, HowellAccumulator};
pub use matrix::{LambdaMatrix, Repr};
pub use module::{
    dual_hom, dual_module, quotient, tensor, KernelResult, LambdaModule, ModuleHom, SolveResult,
};
pub use residue::{egcd, gcd_u64 as gcd, inv_mod, unit_for};
pub use snf::{smith_normal_form, Snf};

use crate::error::{Error, Result};

/// Kernel of a matrix acting on column vectors, with a Howell-canonical
/// basis of the solution space.
pub fn kernel(a: &LambdaMatrix) -> KernelResult {
    module::kernel(a)
}

/// Image (column space) of a matrix, as a Howell basis and module structure.
pub fn image(a: &LambdaMatrix) -> KernelResult {
    module::image(a)
}

/// Exact solver for A·x = b. Returns a particular solution iff b lies in the
/// column span, together with a kernel basis.
pub fn solve(a: &LambdaMatrix, b: &[u64]) -> Result<SolveResult> {
    if b.len() != a.rows() {
        return Err(Error::invalid(format!(
            "solve: rhs length {} does not match {} rows",
            b.len(),
            a.rows()
        )));
    }
    Ok(module::solve(a, b))
}

//! Curves over finite fields: Frobenius descent data, arithmetic covering
//! towers, H¹–H³ through the degenerate weight filtration of the cd-1 base,
//! and the H¹ × H² → H³ cup product.
//!
//! The base is modeled as a finite field: the absolute Galois group is
//! topologically generated by Frobenius and H¹(k, Λ) = Λ, so fields are
//! tracked as degrees of cyclic extensions and the arithmetic fundamental
//! group is handled through finite truncations π̄-quotient ⋊ ℤ/m. Each
//! tower level stores its geometric quotient Ḡ⁽ⁱ⁾, the cyclic part
//! 𝔖⁽ⁱ⁾ = ℤ/mᵢ, and the field-degree bookkeeping of the construction (the
//! stabilizer degree, the splitting field of H¹ of the next cover, and its
//! degree-n extension). The Galois closure over the arithmetic group is
//! computed algebraically: the core of Ū′ ⋊ mℤ is Ū′ ⋊ m̃ℤ where m̃ is the
//! least multiple of m for which Frobenius^m̃ acts trivially on the next
//! geometric quotient.

mod cohom;
mod tower;

pub use cohom::{
    cup12, h1_h2_arithmetic, h3_arithmetic, triviality_ladder_check, ArithmeticH12,
    ArithmeticH3,
};
pub use tower::{ArithLevel, ArithmeticTower, FrobeniusDatum};

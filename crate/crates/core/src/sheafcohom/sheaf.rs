//! Lisse sheaves as monodromy data.

use crate::curves::{CurveModel, Pi1Presentation};
use crate::error::{Error, Result};
use crate::fpgroups::{finite_quotient_from_action, FiniteQuotient};
use crate::limits::Limits;
use crate::linalg::{LambdaMatrix, LambdaModule};

#[derive(Debug, Clone)]
pub struct LisseSheaf {
    pub curve: CurveModel,
    pub n: u64,
    pub stalk: LambdaModule,
    /// one automorphism of the stalk per fundamental-group generator
    pub monodromy: Vec<LambdaMatrix>,
}

impl LisseSheaf {
    /// The constant sheaf with the given stalk orders.
    pub fn trivial(curve: &CurveModel, n: u64, stalk_orders: &[u64]) -> Result<Self> {
        let pi1 = curve.pi1_presentation()?;
        let stalk = LambdaModule::from_orders(n, stalk_orders);
        let rank = stalk.rank();
        let id = LambdaMatrix::identity(n, rank);
        Ok(LisseSheaf {
            curve: curve.clone(),
            n,
            stalk,
            monodromy: vec![id; pi1.pres.ngens()],
        })
    }

    pub fn new(
        curve: &CurveModel,
        n: u64,
        stalk: LambdaModule,
        monodromy: Vec<LambdaMatrix>,
    ) -> Result<Self> {
        let pi1 = curve.pi1_presentation()?;
        if monodromy.len() != pi1.pres.ngens() {
            return Err(Error::invalid(format!(
                "sheaf needs {} monodromy matrices, got {}",
                pi1.pres.ngens(),
                monodromy.len()
            )));
        }
        let s = LisseSheaf {
            curve: curve.clone(),
            n,
            stalk,
            monodromy,
        };
        // relator validation happens inside the quotient construction
        s.monodromy_image(&pi1, &Limits::default())?;
        Ok(s)
    }

    /// The trivializing quotient: the image of the fundamental group in the
    /// automorphisms of the stalk. Relator violations are rejected here
    /// with the offending relator named.
    pub fn monodromy_image(
        &self,
        pi1: &Pi1Presentation,
        limits: &Limits,
    ) -> Result<FiniteQuotient> {
        finite_quotient_from_action(&pi1.pres, &self.stalk, &self.monodromy, limits)
    }

    /// Action matrices in presentation-generator order, for building the
    /// tower-level modules.
    pub fn action_matrices(&self) -> Vec<Vec<Vec<u64>>> {
        self.monodromy
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveModel;

    #[test]
    fn trivial_sheaf_has_trivial_image() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let pi1 = c.pi1_presentation().unwrap();
        let q = s.monodromy_image(&pi1, &Limits::default()).unwrap();
        assert_eq!(q.group().order(), 1);
    }

    #[test]
    fn swap_sheaf_image_is_z2() {
        let c = CurveModel::smooth_proper(1);
        let stalk = LambdaModule::from_orders(2, &[2, 2]);
        let swap = LambdaMatrix::from_rows(2, 2, &[vec![0, 1], vec![1, 0]]);
        let id = LambdaMatrix::identity(2, 2);
        let s = LisseSheaf::new(&c, 2, stalk, vec![swap, id]).unwrap();
        let pi1 = c.pi1_presentation().unwrap();
        let q = s.monodromy_image(&pi1, &Limits::default()).unwrap();
        assert_eq!(q.group().order(), 2);
    }
}

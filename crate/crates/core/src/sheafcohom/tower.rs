//! Covering towers: the trivializing quotient followed by iterated mod-n
//! derived quotients, with curve-aware order prediction before any level is
//! built.

use std::sync::Arc;

use super::sheaf::LisseSheaf;
use crate::coverings::covering_from_quotient;
use crate::curves::Pi1Presentation;
use crate::error::{Error, Result};
use crate::fpgroups::{extend_quotient, Elt, FiniteQuotient, GroupHom};
use crate::groupcohom::GModule;
use crate::limits::Limits;
use crate::linalg::LambdaModule;

#[derive(Debug)]
pub struct TowerLevel {
    pub quotient: FiniteQuotient,
    /// projection onto the previous level (level 1 projects onto Q)
    pub proj: GroupHom,
    /// H₁ of the previous kernel: the module this level extends by
    pub module: LambdaModule,
}

#[derive(Debug)]
pub struct Tower {
    pub sheaf: LisseSheaf,
    pub pi1: Pi1Presentation,
    /// level 0: the trivializing quotient (monodromy image)
    pub q0: FiniteQuotient,
    pub levels: Vec<TowerLevel>,
}

/// Rank of H¹ of the covering curve attached to a finite quotient, computed
/// from the covering combinatorics without building the next level.
fn cover_h1_rank(sheaf: &LisseSheaf, q: &FiniteQuotient, limits: &Limits) -> Result<u128> {
    let cov = covering_from_quotient(&sheaf.curve, q)?;
    let src = cov.source_model()?;
    let _ = limits;
    let g = src.curve.dual_graph();
    let rank: u128 = src
        .curve
        .components
        .iter()
        .map(|c| 2 * c.genus as u128 + (c.punctures as u128).saturating_sub(1))
        .sum::<u128>()
        + g.betti as u128;
    Ok(rank)
}

/// Predict the level orders |G⁽⁰⁾|, …, |G⁽ᵈ⁾| without building anything
/// beyond level-by-level covering combinatorics. Errors name the first
/// level that would overflow, with its predicted order.
pub fn predicted_level_orders(sheaf: &LisseSheaf, depth: usize, limits: &Limits) -> Result<Vec<u128>> {
    let pi1 = sheaf.curve.pi1_presentation()?;
    let q0 = sheaf.monodromy_image(&pi1, limits)?;
    let mut orders = vec![q0.group().order() as u128];
    let mut q = q0;
    for level in 1..=depth {
        let rank = cover_h1_rank(sheaf, &q, limits)?;
        let next = orders
            .last()
            .unwrap()
            .checked_mul((sheaf.n as u128).checked_pow(rank.min(1 << 20) as u32).unwrap_or(u128::MAX))
            .unwrap_or(u128::MAX);
        if next > limits.max_group_order as u128 {
            return Err(Error::resource(format!(
                "tower level {level} overflows: predicted order {next} (= previous · n^{rank}) \
                 exceeds max_group_order = {}",
                limits.max_group_order
            )));
        }
        orders.push(next);
        if level < depth {
            // must actually build to continue predicting
            q = extend_quotient(&q, sheaf.n, limits)?.quotient;
        }
    }
    Ok(orders)
}

impl Tower {
    /// G⁽⁰⁾ = monodromy image, then each level by the derived quotient.
    /// Orders are predicted before each extension is constructed.
    pub fn build(sheaf: &LisseSheaf, depth: usize, limits: &Limits) -> Result<Tower> {
        let pi1 = sheaf.curve.pi1_presentation()?;
        let q0 = sheaf.monodromy_image(&pi1, limits)?;
        let mut levels = Vec::new();
        let mut q = q0.clone();
        for level in 1..=depth {
            let rank = cover_h1_rank(sheaf, &q, limits)?;
            let predicted = (q.group().order() as u128)
                .checked_mul((sheaf.n as u128).checked_pow(rank.min(1 << 20) as u32).unwrap_or(u128::MAX))
                .unwrap_or(u128::MAX);
            if predicted > limits.max_group_order as u128 {
                return Err(Error::resource(format!(
                    "tower level {level} overflows: predicted order {predicted} exceeds \
                     max_group_order = {}",
                    limits.max_group_order
                )));
            }
            let ext = extend_quotient(&q, sheaf.n, limits)?;
            if ext.quotient.group().order() as u128 != predicted {
                return Err(Error::verification(
                    "tower-order-prediction",
                    format!(
                        "level {level}: predicted {predicted}, built {}",
                        ext.quotient.group().order()
                    ),
                ));
            }
            q = ext.quotient.clone();
            levels.push(TowerLevel {
                quotient: ext.quotient,
                proj: ext.proj,
                module: ext.module,
            });
        }
        let t = Tower {
            sheaf: sheaf.clone(),
            pi1,
            q0,
            levels,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn orders(&self) -> Vec<u64> {
        let mut v = vec![self.q0.group().order()];
        v.extend(self.levels.iter().map(|l| l.quotient.group().order()));
        v
    }

    pub fn level(&self, i: usize) -> &FiniteQuotient {
        if i == 0 {
            &self.q0
        } else {
            &self.levels[i - 1].quotient
        }
    }

    /// Elementwise projection G⁽ᵢ⁾ → G⁽ʲ⁾ for i ≥ j.
    pub fn projection(&self, from: usize, to: usize) -> Vec<Elt> {
        debug_assert!(from >= to);
        let mut map: Vec<Elt> = (0..self.level(from).group().order()).collect();
        for lvl in (to..from).rev() {
            let proj = &self.levels[lvl].proj;
            map = map.iter().map(|&x| proj.apply(x)).collect();
        }
        map
    }

    /// M as a G⁽ⁱ⁾-module: the action of each distinguished generator is
    /// the sheaf monodromy of that presentation generator.
    pub fn gmodule(&self, i: usize) -> Result<Arc<GModule>> {
        let g = self.level(i).group().clone();
        let gm = GModule::with_action(g, self.sheaf.stalk.clone(), &self.sheaf.action_matrices())?;
        Ok(Arc::new(gm))
    }

    /// Invariants: surjective level maps, kernels contained downward, and
    /// generator images compatible with the projections.
    pub fn validate(&self) -> Result<()> {
        for (li, lvl) in self.levels.iter().enumerate() {
            let down: &FiniteQuotient = if li == 0 { &self.q0 } else { &self.levels[li - 1].quotient };
            let mut hit = vec![false; down.group().order() as usize];
            for x in 0..lvl.quotient.group().order() {
                hit[lvl.proj.apply(x) as usize] = true;
            }
            if hit.iter().any(|&h| !h) {
                return Err(Error::verification(
                    "tower-projection-surjective",
                    format!("level {} projection is not onto", li + 1),
                ));
            }
            for (gi, &img) in lvl.quotient.images().iter().enumerate() {
                if lvl.proj.apply(img) != down.images()[gi] {
                    return Err(Error::verification(
                        "tower-generator-compatibility",
                        format!("level {} generator {gi} breaks the projection", li + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The kernel of G⁽ⁱ⁾ → G⁽ⁱ⁻¹⁾ as a subgroup bundle.
    pub fn level_kernel(&self, i: usize) -> Result<crate::groupcohom::Subgroup> {
        debug_assert!(i >= 1);
        let lvl = &self.levels[i - 1];
        let elems = lvl.proj.kernel_elements();
        let (sub, embed) = lvl.quotient.group().subgroup(&elems)?;
        Ok(crate::groupcohom::Subgroup::new_preferring_abelian(sub, embed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveModel;

    #[test]
    fn torus_tower_orders() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let t = Tower::build(&s, 3, &Limits::default()).unwrap();
        assert_eq!(t.orders(), vec![1, 4, 16, 64]);
        let pred = predicted_level_orders(&s, 3, &Limits::default()).unwrap();
        assert_eq!(pred, vec![1, 4, 16, 64]);
    }

    #[test]
    fn depth_zero_tower_is_just_the_image() {
        let c = CurveModel::genus_one_with_nodes(1);
        let s = LisseSheaf::trivial(&c, 3, &[3]).unwrap();
        let t = Tower::build(&s, 0, &Limits::default()).unwrap();
        assert_eq!(t.orders(), vec![1]);
    }

    #[test]
    fn swap_sheaf_tower_first_level() {
        use crate::linalg::{LambdaMatrix, LambdaModule};
        let c = CurveModel::smooth_proper(1);
        let stalk = LambdaModule::from_orders(2, &[2, 2]);
        let swap = LambdaMatrix::from_rows(2, 2, &[vec![0, 1], vec![1, 0]]);
        let id = LambdaMatrix::identity(2, 2);
        let s = LisseSheaf::new(&c, 2, stalk, vec![swap, id]).unwrap();
        let t = Tower::build(&s, 1, &Limits::default()).unwrap();
        // |G⁰| = 2, |G¹| = 2·|H₁(index-2 subgroup of ℤ²; ℤ/2)| = 2·4 = 8
        assert_eq!(t.orders(), vec![2, 8]);
    }

    #[test]
    fn genus_two_level_two_refuses_with_prediction() {
        let c = CurveModel::smooth_proper(2);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let err = Tower::build(&s, 2, &Limits::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("level 2"), "{msg}");
        // kernel of π ↠ (ℤ/2)⁴ has H₁ of rank 2 + 16·2 = 34: 16·2^34
        assert!(msg.contains("274877906944"), "{msg}");
    }

    #[test]
    fn nodal_torus_tower_level_one() {
        let c = CurveModel::genus_one_with_nodes(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let t = Tower::build(&s, 1, &Limits::default()).unwrap();
        assert_eq!(t.orders(), vec![1, 8]);
        // the level-1 cover has two genus-1 components, eight nodes, and
        // first Betti number 7, so H₁ has rank 11: predicted 8·2^11
        let pred = predicted_level_orders(&s, 2, &Limits::default()).unwrap();
        assert_eq!(pred, vec![1, 8, 16384]);
    }
}

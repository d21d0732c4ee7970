//! A finite group acting on a finite Λ-module.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fpgroups::{Elt, FiniteGroup};
use crate::linalg::LambdaModule;

/// Hard cap on |G|·rank² when materializing per-element action matrices.
const ACTION_TABLE_CAP: u64 = 8_000_000;

#[derive(Debug, Clone)]
pub struct GModule {
    pub group: FiniteGroup,
    pub module: LambdaModule,
    /// action matrix per group element (empty when the action is trivial)
    matrices: Arc<Vec<Vec<Vec<u64>>>>,
    pub trivial: bool,
}

impl GModule {
    /// Trivial action.
    pub fn trivial_action(group: FiniteGroup, module: LambdaModule) -> Self {
        GModule {
            group,
            module,
            matrices: Arc::new(Vec::new()),
            trivial: true,
        }
    }

    /// Action given on the group's distinguished generators. The matrices
    /// act on canonical module coordinates; the action is extended to all
    /// elements along breadth-first words and checked against the
    /// multiplication on generator pairs.
    pub fn with_action(
        group: FiniteGroup,
        module: LambdaModule,
        gen_matrices: &[Vec<Vec<u64>>],
    ) -> Result<Self> {
        let rank = module.rank();
        if gen_matrices.len() != group.generators().len() {
            return Err(Error::invalid(
                "one action matrix per group generator required",
            ));
        }
        let ident = identity_matrix(rank);
        if gen_matrices.iter().all(|m| *m == ident) {
            return Ok(Self::trivial_action(group, module));
        }
        let cost = group.order() * (rank as u64).pow(2);
        if cost > ACTION_TABLE_CAP {
            return Err(Error::resource(format!(
                "action table of size |G|·rank² = {cost} exceeds {ACTION_TABLE_CAP}"
            )));
        }
        let words = group.bfs_words()?;
        let inv_matrices: Vec<Vec<Vec<u64>>> = gen_matrices
            .iter()
            .map(|m| invert_matrix(&module, m))
            .collect::<Result<_>>()?;
        let mut matrices: Vec<Vec<Vec<u64>>> = Vec::with_capacity(group.order() as usize);
        for x in 0..group.order() {
            let mut acc = ident.clone();
            for &l in &words[x as usize] {
                let g = (l.unsigned_abs() as usize) - 1;
                let m = if l > 0 {
                    &gen_matrices[g]
                } else {
                    &inv_matrices[g]
                };
                acc = mat_mul(&module, m, &acc);
            }
            matrices.push(acc);
        }
        // action respects multiplication, checked on generator pairs against
        // every element
        for &a in group.generators() {
            for x in 0..group.order() {
                let prod = group.mul(x, a);
                let lhs = &matrices[prod as usize];
                let rhs = mat_mul(&module, &matrices[x as usize], &matrices[a as usize]);
                if *lhs != rhs {
                    return Err(Error::verification(
                        "gmodule-action-multiplicative",
                        format!("action of {x}·{a} is not the composite"),
                    ));
                }
            }
        }
        Ok(GModule {
            group,
            module,
            matrices: Arc::new(matrices),
            trivial: false,
        })
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn modulus(&self) -> u64 {
        self.module.modulus()
    }

    /// m ↦ g·m on canonical coordinates.
    pub fn act(&self, g: Elt, m: &[u64]) -> Vec<u64> {
        if self.trivial {
            return self.module.normalize(m);
        }
        apply_matrix(&self.module, &self.matrices[g as usize], m)
    }

    pub fn action_matrix(&self, g: Elt) -> Vec<Vec<u64>> {
        if self.trivial {
            identity_matrix(self.module.rank())
        } else {
            self.matrices[g as usize].clone()
        }
    }

    /// The same module over a subgroup (given by its own group object and
    /// the embedding of its elements).
    pub fn restrict_to(&self, sub: &FiniteGroup, embed: &[Elt]) -> Result<GModule> {
        if self.trivial {
            return Ok(GModule::trivial_action(sub.clone(), self.module.clone()));
        }
        let gen_matrices: Vec<Vec<Vec<u64>>> = sub
            .generators()
            .iter()
            .map(|&g| self.matrices[embed[g as usize] as usize].clone())
            .collect();
        GModule::with_action(sub.clone(), self.module.clone(), &gen_matrices)
    }

    /// The module seen through a surjection p: H ↠ G (the action of h ∈ H
    /// is the action of p(h)). Used for inflation along tower levels.
    pub fn inflate_through(&self, source: &FiniteGroup, proj: &[Elt]) -> Result<GModule> {
        if self.trivial {
            return Ok(GModule::trivial_action(source.clone(), self.module.clone()));
        }
        let gen_matrices: Vec<Vec<Vec<u64>>> = source
            .generators()
            .iter()
            .map(|&g| self.matrices[proj[g as usize] as usize].clone())
            .collect();
        GModule::with_action(source.clone(), self.module.clone(), &gen_matrices)
    }

    /// Invariants M^G: the simultaneous fixed space of the generator
    /// actions. The congruence per row is lifted into Λ by the multiplier
    /// n/dᵢ, so one exact kernel computation over Λ decides everything;
    /// dⱼ·eⱼ lies in that kernel because the action respects coordinate
    /// orders, so reducing solutions mod dⱼ is lossless.
    pub fn invariants(&self) -> crate::linalg::KernelResult {
        let n = self.modulus();
        let rank = self.rank();
        if self.trivial || rank == 0 {
            let basis = crate::linalg::LambdaMatrix::identity(n, rank);
            let module = self.module.clone();
            return crate::linalg::KernelResult { basis, module };
        }
        let d = self.module.orders();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for &g in self.group.generators() {
            let m = self.action_matrix(g);
            for i in 0..rank {
                let mut row = vec![0u64; rank];
                for (j, r) in row.iter_mut().enumerate() {
                    let mut c = m[i][j] % d[i];
                    if i == j {
                        c = (c + d[i] - 1) % d[i];
                    }
                    *r = (c as u128 * (n / d[i]) as u128 % n as u128) as u64;
                }
                rows.push(row);
            }
        }
        // kernel over Λ with the additional constraint xⱼ ∈ ℤ/dⱼ: impose by
        // adding dⱼ·eⱼ relations to the solution lattice afterwards; the
        // kernel of the stacked matrix over Λ already contains them since
        // dⱼ·(column j) ≡ 0 mod n... that requires (n/dᵢ)·c·dⱼ ≡ 0 mod n,
        // i.e. dᵢ | c·dⱼ, which holds because the action respects orders.
        let a = crate::linalg::LambdaMatrix::from_rows(n, rank, &rows);
        let sol = crate::linalg::kernel(&a);
        // canonicalize solutions into mixed-moduli tuples and rebuild
        let mut gens: Vec<Vec<u64>> = Vec::new();
        for r in 0..sol.basis.rows() {
            let row = sol.basis.row(r);
            let t: Vec<u64> = row.iter().zip(d.iter()).map(|(&v, &dj)| v % dj).collect();
            if t.iter().any(|&v| v != 0) {
                gens.push(t);
            }
        }
        // span structure inside ⊕ ℤ/dⱼ: relations are syzygies over the
        // mixed moduli; present via scaling into Λ again
        let scaled: Vec<Vec<u64>> = gens
            .iter()
            .map(|t| {
                t.iter()
                    .zip(d.iter())
                    .map(|(&v, &dj)| v * (n / dj))
                    .collect()
            })
            .collect();
        let basis_mixed = crate::linalg::LambdaMatrix::from_rows(n, rank, &gens);
        let scaled_m = crate::linalg::LambdaMatrix::from_rows(n, rank, &scaled);
        let syz = crate::linalg::howell_form(&scaled_m).left_kernel;
        let module = LambdaModule::from_relations(n, gens.len(), &syz.to_row_vecs());
        crate::linalg::KernelResult {
            basis: basis_mixed,
            module,
        }
    }
}

pub(crate) fn identity_matrix(rank: usize) -> Vec<Vec<u64>> {
    (0..rank)
        .map(|i| (0..rank).map(|j| u64::from(i == j)).collect())
        .collect()
}

pub(crate) fn mat_mul(module: &LambdaModule, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let rank = module.rank();
    let mut out = vec![vec![0u64; rank]; rank];
    for i in 0..rank {
        let d = module.orders()[i];
        for j in 0..rank {
            let mut acc = 0u64;
            for k in 0..rank {
                acc = (acc + a[i][k] % d * (b[k][j] % d)) % d;
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn apply_matrix(module: &LambdaModule, m: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
    let rank = module.rank();
    let mut out = vec![0u64; rank];
    for i in 0..rank {
        let d = module.orders()[i];
        let mut acc = 0u64;
        for j in 0..rank {
            acc = (acc + m[i][j] % d * (x[j] % d)) % d;
        }
        out[i] = acc;
    }
    out
}

fn invert_matrix(module: &LambdaModule, m: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    // invert by exhausting powers: the matrix has finite order on a finite
    // module; deterministic and exact
    let rank = module.rank();
    let ident = identity_matrix(rank);
    let mut acc = m.to_vec();
    let mut prev = ident.clone();
    let mut steps = 0u64;
    let bound: u128 = module.size().max(2).pow((rank as u32).min(8));
    while acc != ident {
        prev = acc.clone();
        acc = mat_mul(module, &acc, m);
        steps += 1;
        if steps as u128 > bound {
            return Err(Error::invalid(
                "action matrix is not invertible on the module",
            ));
        }
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_action_invariants() {
        // swap on (ℤ/2)²: invariants are the diagonal ℤ/2
        let g = FiniteGroup::cyclic(2);
        let m = LambdaModule::from_orders(2, &[2, 2]);
        let swap = vec![vec![0, 1], vec![1, 0]];
        let gm = GModule::with_action(g, m, &[swap]).unwrap();
        let inv = gm.invariants();
        assert_eq!(inv.module.orders(), &[2]);
        assert_eq!(inv.basis.to_row_vecs(), vec![vec![1, 1]]);
    }

    #[test]
    fn trivial_action_invariants_are_everything() {
        let g = FiniteGroup::abelian(&[2, 2]);
        let m = LambdaModule::from_orders(4, &[2, 4]);
        let gm = GModule::trivial_action(g, m.clone());
        let inv = gm.invariants();
        assert_eq!(inv.module.orders(), m.orders());
    }

    #[test]
    fn fixed_point_free_action() {
        // multiplication by 2 on ℤ/3 has no nonzero fixed vector
        let g = FiniteGroup::cyclic(2);
        let m = LambdaModule::from_orders(3, &[3]);
        let gm = GModule::with_action(g, m, &[vec![vec![2]]]).unwrap();
        let inv = gm.invariants();
        assert!(inv.module.is_zero());
    }

    #[test]
    fn action_extension_is_multiplicative() {
        let g = FiniteGroup::cyclic(4);
        let m = LambdaModule::from_orders(5, &[5]);
        // x2 has order 4 in (ℤ/5)^×
        let gm = GModule::with_action(g, m, &[vec![vec![2]]]).unwrap();
        assert_eq!(gm.act(1, &[1]), vec![2]);
        assert_eq!(gm.act(2, &[1]), vec![4]);
        assert_eq!(gm.act(3, &[1]), vec![3]);
    }
}

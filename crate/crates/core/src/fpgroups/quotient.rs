//! Quotient maps onto finite groups with kernel handles, and the derived
//! quotient step that drives covering towers.
//!
//! The kernel of π ↠ G is handled through the coset table whose cosets are
//! the elements of G (the action is right multiplication by images), so the
//! handle costs |G| rows and is built lazily. The next tower level
//! π/(Uⁿ[U,U]) is realized as an extension of G by the Λ-module
//! U/Uⁿ[U,U]: coset representatives give a normalized section, Schreier
//! rewriting evaluates the factor set and the conjugation action, and the
//! whole multiplication law lives over the small base group.

use std::sync::{Arc, OnceLock};

use super::coset::{CosetTable, SchreierData};
use super::group::{Elt, FiniteGroup, GroupHom};
use super::presentation::Presentation;
use super::word::{abelianized, concat, inverse, Word};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::linalg::{LambdaMatrix, LambdaModule};

#[derive(Debug, Clone)]
pub struct KernelHandle {
    pub table: CosetTable,
    pub schreier: SchreierData,
}

#[derive(Debug, Clone)]
pub struct FiniteQuotient {
    pres: Presentation,
    group: FiniteGroup,
    images: Vec<Elt>,
    kernel: Arc<OnceLock<KernelHandle>>,
}

impl FiniteQuotient {
    pub fn new(pres: Presentation, group: FiniteGroup, images: Vec<Elt>) -> Result<Self> {
        if images.len() != pres.ngens() {
            return Err(Error::invalid(
                "quotient: one image per presentation generator required",
            ));
        }
        for (i, r) in pres.relators().iter().enumerate() {
            if group.eval_word(&images, r) != group.id() {
                return Err(Error::invalid(format!(
                    "quotient: relator #{i} does not map to the identity"
                )));
            }
        }
        Ok(FiniteQuotient {
            pres,
            group,
            images,
            kernel: Arc::new(OnceLock::new()),
        })
    }

    pub fn trivial(pres: Presentation) -> Self {
        let images = vec![0; pres.ngens()];
        FiniteQuotient {
            pres,
            group: FiniteGroup::trivial(),
            images,
            kernel: Arc::new(OnceLock::new()),
        }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn images(&self) -> &[Elt] {
        &self.images
    }

    pub fn apply_word(&self, w: &[i32]) -> Elt {
        self.group.eval_word(&self.images, w)
    }

    /// Coset table of the kernel (cosets = group elements) plus Schreier
    /// generators, built on first use and cached.
    pub fn kernel_handle(&self) -> Result<&KernelHandle> {
        if self.kernel.get().is_none() {
            let g = &self.group;
            let ngens = self.pres.ngens();
            let order = g.order() as usize;
            let mut rows = vec![vec![0u32; 2 * ngens.max(1)]; order];
            for (c, row) in rows.iter_mut().enumerate() {
                for (gi, &img) in self.images.iter().enumerate() {
                    row[2 * gi] = g.mul(c as Elt, img) as u32;
                    row[2 * gi + 1] = g.mul(c as Elt, g.inv(img)) as u32;
                }
            }
            let table = CosetTable::from_action(&self.pres, vec![], rows)?;
            let schreier = table.schreier();
            let handle = KernelHandle { table, schreier };
            let _ = self.kernel.set(handle);
        }
        Ok(self.kernel.get().expect("just set"))
    }

    /// Full consistency check: relators die, kernel handle has index |G|.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.pres.relators().iter().enumerate() {
            if self.apply_word(r) != self.group.id() {
                return Err(Error::verification(
                    "quotient-relator",
                    format!("relator #{i} survives"),
                ));
            }
        }
        let kh = self.kernel_handle()?;
        if kh.table.index() as u64 != self.group.order() {
            return Err(Error::verification(
                "quotient-kernel-index",
                "kernel index differs from group order",
            ));
        }
        Ok(())
    }
}

/// Abelianization of the presentation reduced mod n, together with the
/// quotient map π ↠ H₁(π) ⊗ Λ.
pub fn mod_n_derived_quotient(
    pres: &Presentation,
    n: u64,
) -> Result<(LambdaModule, FiniteQuotient)> {
    let rows: Vec<Vec<u64>> = pres
        .abelianized_relators()
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(n as i64) as u64).collect())
        .collect();
    let module = LambdaModule::from_relations(n, pres.ngens(), &rows);
    let group = if module.rank() == 0 {
        FiniteGroup::trivial()
    } else {
        FiniteGroup::abelian(module.orders())
    };
    let mut images = Vec::with_capacity(pres.ngens());
    for i in 0..pres.ngens() {
        let mut e = vec![0u64; pres.ngens()];
        e[i] = 1;
        let coords = module.project(&e)?;
        images.push(abelian_elt(&group, &coords));
    }
    let q = FiniteQuotient::new(pres.clone(), group, images)?;
    Ok((module, q))
}

fn abelian_elt(g: &FiniteGroup, tuple: &[u64]) -> Elt {
    match g.abelian_orders() {
        Some(orders) => {
            debug_assert_eq!(orders.len(), tuple.len());
            let mut idx = 0u64;
            for (i, &d) in orders.iter().enumerate().rev() {
                idx = idx * d + (tuple[i] % d);
            }
            idx
        }
        None => {
            debug_assert!(tuple.is_empty());
            0
        }
    }
}

/// One covering-tower step and its bookkeeping.
#[derive(Debug)]
pub struct ExtendedLevel {
    pub quotient: FiniteQuotient,
    /// projection from the new level onto the old one
    pub proj: GroupHom,
    /// H₁(kernel; Λ), the module the new level is an extension by
    pub module: LambdaModule,
}

/// π/(Uⁿ[U,U]) for U = ker(q): an extension 1 → H₁(U;Λ) → G′ → G → 1 with
/// |G′| = |G| · |H₁(U;Λ)|, checked exactly. Order prediction happens before
/// any table is built.
pub fn extend_quotient(q: &FiniteQuotient, n: u64, limits: &Limits) -> Result<ExtendedLevel> {
    let g = q.group();
    limits.check_cosets(g.order(), "extend_quotient kernel table")?;
    let kh = q.kernel_handle()?;
    let sd = &kh.schreier;
    let sgens = sd.gen_count();
    let nrel = q.presentation().relators().len().max(1);
    limits.check_system(
        sgens as u128,
        (kh.table.index() * nrel) as u128,
        "extend_quotient subgroup rewriting",
    )?;

    // subgroup presentation on Schreier generators, abelianized mod n
    let mut rel_rows: Vec<Vec<u64>> = Vec::new();
    for c in 0..kh.table.index() as u32 {
        for r in q.presentation().relators() {
            let w = sd.rewrite_from(&kh.table, c, r);
            if !w.is_empty() {
                rel_rows.push(
                    abelianized(&w, sgens)
                        .iter()
                        .map(|&v| v.rem_euclid(n as i64) as u64)
                        .collect(),
                );
            }
        }
    }
    let module = LambdaModule::from_relations(n, sgens, &rel_rows);
    let predicted = g.order() as u128 * module.size();
    limits.check_group_order(predicted, "extend_quotient")?;

    // evaluate a kernel word into canonical module coordinates
    let rho = |w: &[i32]| -> Result<Vec<u64>> {
        let sw = sd.rewrite(&kh.table, w)?;
        let expo: Vec<u64> = abelianized(&sw, sgens)
            .iter()
            .map(|&v| v.rem_euclid(n as i64) as u64)
            .collect();
        module.project(&expo)
    };

    let order = g.order();
    let reps = &sd.reps;
    let rep = |x: Elt| -> &Word { &reps[x as usize] };

    // factor set over the base group
    let mut factor = Vec::with_capacity((order * order) as usize);
    for g1 in 0..order {
        for g2 in 0..order {
            let prod = g.mul(g1, g2);
            let w = concat(&concat(&inverse(rep(prod)), rep(g1)), rep(g2));
            factor.push(rho(&w)?);
        }
    }

    // conjugation action of each base element on the module
    let rank = module.rank();
    let mut lifts: Vec<Word> = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut e = vec![0u64; rank];
        e[i] = 1;
        let expo = module.lift(&e)?;
        let mut w = Word::new();
        for (s, &k) in expo.iter().enumerate() {
            for _ in 0..(k % n) {
                w = concat(&w, &sd.schreier_words[s]);
            }
        }
        lifts.push(w);
    }
    let mut action = Vec::with_capacity(order as usize);
    for h in 0..order {
        let mut mat = vec![vec![0u64; rank]; rank];
        for (j, lift) in lifts.iter().enumerate() {
            let w = concat(&concat(&inverse(rep(h)), lift), rep(h));
            let col = rho(&w)?;
            for (i, row) in mat.iter_mut().enumerate() {
                row[j] = col[i];
            }
        }
        action.push(mat);
    }

    // generator images: x ↦ (q(x), ρ(rep(q(x))⁻¹ x))
    let asize = module.size() as u64;
    let mut images = Vec::with_capacity(q.images().len());
    for (gi, &img) in q.images().iter().enumerate() {
        let x: Word = vec![(gi + 1) as i32];
        let w = concat(&inverse(rep(img)), &x);
        let a = rho(&w)?;
        let a_idx = tuple_index(&a, module.orders());
        images.push(img * asize + a_idx);
    }

    let orders_vec = module.orders().to_vec();
    let big = FiniteGroup::extension(g.clone(), orders_vec, action, factor, images.clone())?;
    if big.order() != predicted as u64 {
        return Err(Error::verification(
            "extend-quotient-order-law",
            format!("|G'| = {} but |G|·|H₁| = {predicted}", big.order()),
        ));
    }

    // recognize abelian levels and switch to tuple representation
    let (group, images, proj_map) = match big.abelianized_form() {
        Some((ab, fwd, bwd)) => {
            let images: Vec<Elt> = images.iter().map(|&x| fwd[x as usize]).collect();
            let proj_map: Vec<Elt> = (0..ab.order())
                .map(|x| bwd[x as usize] / asize)
                .collect();
            (ab.with_generators(images.clone()), images, proj_map)
        }
        None => {
            let proj_map: Vec<Elt> = (0..big.order()).map(|x| x / asize).collect();
            (big, images, proj_map)
        }
    };
    let proj = GroupHom::new(&group, g.clone(), proj_map)?;
    let quotient = FiniteQuotient::new(q.presentation().clone(), group, images)?;
    quotient.validate()?;
    Ok(ExtendedLevel {
        quotient,
        proj,
        module,
    })
}

fn tuple_index(t: &[u64], orders: &[u64]) -> u64 {
    let mut idx = 0u64;
    for (i, &d) in orders.iter().enumerate().rev() {
        idx = idx * d + (t[i] % d);
    }
    idx
}

/// Quotient of π by the core of the subgroup with the given coset table:
/// the image of π acting on the cosets.
pub fn galois_closure(table: &CosetTable, limits: &Limits) -> Result<FiniteQuotient> {
    let pres = table.presentation().clone();
    let degree = table.index();
    let perms: Vec<Vec<u32>> = (0..pres.ngens())
        .map(|g| {
            (0..degree as u32)
                .map(|c| table.act(c, (g + 1) as i32))
                .collect()
        })
        .collect();
    let group = FiniteGroup::from_perms(degree, &perms, limits.max_group_order)?;
    let images = group.generators().to_vec();
    FiniteQuotient::new(pres, group, images)
}

/// Monodromy image: the subgroup of Aut(M) generated by the given matrices,
/// as a quotient of π. Matrices are checked against every relator; a
/// violation is reported with the failing relator.
pub fn finite_quotient_from_action(
    pres: &Presentation,
    module: &LambdaModule,
    mats: &[LambdaMatrix],
    limits: &Limits,
) -> Result<FiniteQuotient> {
    if mats.len() != pres.ngens() {
        return Err(Error::invalid(
            "monodromy: one matrix per presentation generator required",
        ));
    }
    let elems = module.elements();
    let mut index_of = std::collections::BTreeMap::new();
    for (i, e) in elems.iter().enumerate() {
        index_of.insert(e.clone(), i as u32);
    }
    let rank = module.rank();
    let perm_of = |m: &LambdaMatrix| -> Result<Vec<u32>> {
        if m.rows() != rank || m.cols() != rank {
            return Err(Error::invalid(format!(
                "monodromy matrix must be {rank}x{rank}"
            )));
        }
        let mut p = Vec::with_capacity(elems.len());
        for e in &elems {
            let img = module.normalize(&m.apply(e)?);
            let Some(&i) = index_of.get(&img) else {
                return Err(Error::invalid("monodromy matrix leaves the module"));
            };
            p.push(i);
        }
        let mut seen = vec![false; p.len()];
        for &i in &p {
            if seen[i as usize] {
                return Err(Error::invalid(
                    "monodromy matrix is not invertible on the module",
                ));
            }
            seen[i as usize] = true;
        }
        Ok(p)
    };
    let perms: Vec<Vec<u32>> = mats.iter().map(perm_of).collect::<Result<_>>()?;
    // relators must act trivially
    for (ri, r) in pres.relators().iter().enumerate() {
        let mut acc: Vec<u32> = (0..elems.len() as u32).collect();
        for &l in r {
            let g = (l.unsigned_abs() as usize) - 1;
            let p = &perms[g];
            if l > 0 {
                acc = acc.iter().map(|&x| p[x as usize]).collect();
            } else {
                let mut pinv = vec![0u32; p.len()];
                for (i, &v) in p.iter().enumerate() {
                    pinv[v as usize] = i as u32;
                }
                acc = acc.iter().map(|&x| pinv[x as usize]).collect();
            }
        }
        if acc.iter().enumerate().any(|(i, &v)| v != i as u32) {
            return Err(Error::invalid(format!(
                "monodromy matrices violate relator #{ri} ({:?})",
                pres.relators()[ri]
            )));
        }
    }
    let group = FiniteGroup::from_perms(elems.len(), &perms, limits.max_group_order)?;
    let images = group.generators().to_vec();
    FiniteQuotient::new(pres.clone(), group, images)
}

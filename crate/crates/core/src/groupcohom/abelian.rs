//! The abelian (Künneth) backend.
//!
//! For G = ⊕ᵢ ℤ/mᵢ acting trivially on M = ⊕ⱼ ℤ/dⱼ with every dⱼ prime,
//! H*(G, 𝔽_ℓ) is the tensor product of the cyclic factors' cohomologies.
//! Degree ≤ 3 bases are monomials in the characters χᵢ(x) = xᵢ mod ℓ and
//! the carries cᵢ(x, y) = ⌊(x̄ᵢ + ȳᵢ)/mᵢ⌋ mod ℓ (only factors with ℓ | mᵢ
//! contribute). Class coordinates come from dual functionals evaluated on a
//! handful of points:
//!
//!   degree 1:  z ↦ z(gᵢ)
//!   degree 2:  cᵢ ↦ Σ_a z(gᵢ^a, gᵢ);   χᵢχⱼ ↦ z(gᵢ,gⱼ) - z(gⱼ,gᵢ)
//!   degree 3:  χᵢχⱼχₗ ↦ alternating sum over the 6 orderings;
//!              χᵢcⱼ   ↦ Σ_a [z(gᵢ,gⱼ^a,gⱼ) - z(gⱼ^a,gᵢ,gⱼ) + z(gⱼ^a,gⱼ,gᵢ)]
//!              χⱼcⱼ   ↦ Σ_a z(gⱼ,gⱼ^a,gⱼ)
//!
//! Each functional kills coboundaries exactly (telescoping over the cyclic
//! orders plus commutativity; no division by the group order is involved)
//! and pairs to the identity matrix against the monomial basis, so the
//! coordinate map is well-defined on classes and inverse to the basis
//! inclusion. The backend-agreement suite checks all of this against the
//! generic backend on small groups.

use std::sync::Arc;

use super::cochain::Cochain;
use super::gmodule::GModule;
use super::{CoboundaryAnswer, CohomologyTheory, TheoryKind};
use crate::error::{Error, Result};
use crate::fpgroups::Elt;
use crate::linalg::LambdaModule;

fn is_prime(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Abelian group, trivial action, prime coefficient orders.
pub fn abelian_backend_applicable(gm: &GModule) -> bool {
    gm.trivial
        && gm.group.abelian_orders().is_some()
        && gm.module.orders().iter().all(|&d| is_prime(d))
}

/// One basis monomial of H^k(G, component j of M).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    /// coefficient component of M this monomial lives in
    pub comp: usize,
    /// indices of the χ factors, strictly increasing
    pub chis: Vec<usize>,
    /// indices of the c factors, weakly increasing
    pub carries: Vec<usize>,
}

pub struct AbelianTheory {
    pub gm: Arc<GModule>,
    pub degree: usize,
    /// group factor orders and their tuple decoding
    orders: Vec<u64>,
    pub monomials: Vec<Monomial>,
    /// H^degree presented over the monomials
    pub h_over_monomials: LambdaModule,
}

fn tuple_of(orders: &[u64], x: Elt) -> Vec<u64> {
    let mut t = Vec::with_capacity(orders.len());
    let mut rest = x;
    for &d in orders {
        t.push(rest % d);
        rest /= d;
    }
    t
}

impl AbelianTheory {
    /// The monomial as an explicit cochain in component `comp` of M.
    fn monomial_cochain(&self, m: &Monomial) -> Cochain {
        let gm = Arc::clone(&self.gm);
        let rank = gm.rank();
        let ell = gm.module.orders()[m.comp];
        let th_orders = self.orders.clone();
        let chis = m.chis.clone();
        let carries = m.carries.clone();
        let comp = m.comp;
        let degree = self.degree;
        Cochain::from_fn(gm, degree, true, move |args| {
            // cup product χ_{i1} ∪ … ∪ c_{j1} ∪ …: for the trivial action
            // the cup of pointwise factors is the product of each factor
            // evaluated on its own block of arguments
            let mut val = 1u64;
            let mut pos = 0;
            for &i in &chis {
                let t = tuple_of(&th_orders, args[pos]);
                val = val * (t[i] % ell) % ell;
                pos += 1;
            }
            for &j in &carries {
                let tx = tuple_of(&th_orders, args[pos]);
                let ty = tuple_of(&th_orders, args[pos + 1]);
                val = val * (((tx[j] + ty[j]) / th_orders[j]) % ell) % ell;
                pos += 2;
            }
            let mut out = vec![0u64; rank];
            out[comp] = val % ell;
            out
        })
    }

    /// Element index of the i-th unit tuple (the χ-dual basis element).
    /// The group's distinguished generators can be arbitrary words in
    /// these, so the functionals must not use them.
    fn basis_elt(&self, i: usize) -> Elt {
        let mut stride = 1u64;
        for &d in &self.orders[..i] {
            stride *= d;
        }
        stride
    }

    /// Dual functional of a monomial evaluated on a cocycle.
    fn functional(&self, m: &Monomial, z: &Cochain) -> u64 {
        let ell = self.gm.module.orders()[m.comp];
        let g = &self.gm.group;
        let gen = |i: usize| self.basis_elt(i);
        let comp = m.comp;
        let val = |args: &[Elt]| -> u64 { z.eval(args)[comp] % ell };
        match self.degree {
            0 => val(&[]),
            1 => {
                let i = m.chis[0];
                val(&[gen(i)])
            }
            2 => {
                if m.carries.len() == 1 {
                    let i = m.carries[0];
                    let mut acc = 0u64;
                    let mut p = g.id();
                    for _ in 0..self.orders[i] {
                        acc = (acc + val(&[p, gen(i)])) % ell;
                        p = g.mul(p, gen(i));
                    }
                    acc
                } else {
                    let (i, j) = (m.chis[0], m.chis[1]);
                    (val(&[gen(i), gen(j)]) + ell - val(&[gen(j), gen(i)]) % ell) % ell
                }
            }
            3 => {
                if m.chis.len() == 3 {
                    let (i, j, l) = (m.chis[0], m.chis[1], m.chis[2]);
                    let perms: [([usize; 3], bool); 6] = [
                        ([i, j, l], false),
                        ([i, l, j], true),
                        ([j, i, l], true),
                        ([j, l, i], false),
                        ([l, i, j], false),
                        ([l, j, i], true),
                    ];
                    let mut acc = 0u64;
                    for (p, neg) in perms {
                        let v = val(&[gen(p[0]), gen(p[1]), gen(p[2])]);
                        acc = if neg {
                            (acc + ell - v % ell) % ell
                        } else {
                            (acc + v) % ell
                        };
                    }
                    acc
                } else {
                    let i = m.chis[0];
                    let j = m.carries[0];
                    if i == j {
                        let mut acc = 0u64;
                        let mut p = g.id();
                        for _ in 0..self.orders[j] {
                            acc = (acc + val(&[gen(j), p, gen(j)])) % ell;
                            p = g.mul(p, gen(j));
                        }
                        acc
                    } else {
                        let mut acc = 0u64;
                        let mut p = g.id();
                        for _ in 0..self.orders[j] {
                            let t1 = val(&[gen(i), p, gen(j)]);
                            let t2 = val(&[p, gen(i), gen(j)]);
                            let t3 = val(&[p, gen(j), gen(i)]);
                            acc = (acc + t1 + ell - t2 % ell + t3) % ell;
                            p = g.mul(p, gen(j));
                        }
                        acc
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Raw coordinates (one per monomial) of the class of z.
    pub fn raw_coords(&self, z: &Cochain) -> Vec<u64> {
        self.monomials
            .iter()
            .map(|m| self.functional(m, z))
            .collect()
    }

    pub fn coords(&self, z: &Cochain) -> Result<Vec<u64>> {
        self.h_over_monomials.project(&self.raw_coords(z))
    }
}

/// Monomial basis of H^degree(G, M) under the backend hypotheses.
fn monomial_basis(gm: &GModule, degree: usize) -> Result<Vec<Monomial>> {
    let orders = gm
        .group
        .abelian_orders()
        .ok_or_else(|| Error::invalid("abelian backend requires an abelian tuple group"))?;
    let mut out = Vec::new();
    for (comp, &ell) in gm.module.orders().iter().enumerate() {
        if !is_prime(ell) {
            return Err(Error::invalid(
                "abelian backend requires prime coefficient orders",
            ));
        }
        let rel: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] % ell == 0).collect();
        match degree {
            0 => out.push(Monomial {
                comp,
                chis: vec![],
                carries: vec![],
            }),
            1 => {
                for &i in &rel {
                    out.push(Monomial {
                        comp,
                        chis: vec![i],
                        carries: vec![],
                    });
                }
            }
            2 => {
                for &i in &rel {
                    out.push(Monomial {
                        comp,
                        chis: vec![],
                        carries: vec![i],
                    });
                }
                for a in 0..rel.len() {
                    for b in (a + 1)..rel.len() {
                        out.push(Monomial {
                            comp,
                            chis: vec![rel[a], rel[b]],
                            carries: vec![],
                        });
                    }
                }
            }
            3 => {
                for &i in &rel {
                    for &j in &rel {
                        out.push(Monomial {
                            comp,
                            chis: vec![i],
                            carries: vec![j],
                        });
                    }
                }
                for a in 0..rel.len() {
                    for b in (a + 1)..rel.len() {
                        for c in (b + 1)..rel.len() {
                            out.push(Monomial {
                                comp,
                                chis: vec![rel[a], rel[b], rel[c]],
                                carries: vec![],
                            });
                        }
                    }
                }
            }
            _ => return Err(Error::invalid("abelian backend supports degrees 0..=3")),
        }
    }
    Ok(out)
}

pub(crate) fn cohomology_abelian(gm: &GModule, degree: usize) -> Result<CohomologyTheory> {
    if !abelian_backend_applicable(gm) {
        return Err(Error::invalid(
            "abelian backend refused: needs an abelian group, trivial action, and prime \
             coefficient orders",
        ));
    }
    let gm_arc = Arc::new(gm.clone());
    let monomials = monomial_basis(gm, degree)?;
    let orders = gm.group.abelian_orders().unwrap().to_vec();
    // all monomial classes are independent of prime order ℓ(comp)
    let n = gm.modulus();
    let rels: Vec<Vec<u64>> = monomials
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut row = vec![0u64; monomials.len()];
            row[k] = gm.module.orders()[m.comp] % n;
            row
        })
        .collect();
    let h = LambdaModule::from_relations(n, monomials.len(), &rels);
    let theory = AbelianTheory {
        gm: Arc::clone(&gm_arc),
        degree,
        orders,
        monomials,
        h_over_monomials: h.clone(),
    };
    let mut reps = Vec::new();
    for c in 0..h.rank() {
        let mut e = vec![0u64; h.rank()];
        e[c] = 1;
        let raw = h.lift(&e)?;
        let mut rep = Cochain::zero(Arc::clone(&gm_arc), degree);
        for (i, &ri) in raw.iter().enumerate() {
            if ri != 0 {
                rep = rep.add(&theory.monomial_cochain(&theory.monomials[i]).scale(ri));
            }
        }
        reps.push(rep);
    }
    Ok(CohomologyTheory {
        gm: gm_arc,
        degree,
        cohomology: h,
        reps,
        kind: TheoryKind::Abelian(theory),
    })
}

/// Degree-3 coboundary decision by exhausting the dual functionals.
pub(crate) fn functional_coboundary_check(gm: &GModule, z: &Cochain) -> Result<CoboundaryAnswer> {
    let th = match cohomology_abelian(gm, z.degree)? {
        CohomologyTheory {
            kind: TheoryKind::Abelian(th),
            ..
        } => th,
        _ => unreachable!(),
    };
    let raw = th.raw_coords(z);
    if raw.iter().all(|&v| v == 0) {
        Ok(CoboundaryAnswer::FunctionalCertificate {
            functionals_checked: raw.len(),
        })
    } else {
        Ok(CoboundaryAnswer::No {
            obstruction: format!("nonzero functional coordinates {raw:?}"),
        })
    }
}

//! Concrete finite groups.
//!
//! Four representations share one interface: full multiplication tables
//! (small groups), abelian tuple groups, permutation groups generated by
//! explicit images, and extensions of a smaller base group by a finite
//! abelian module with a stored action and factor set. Tower levels are
//! extensions of the previous level, so the big factor-set tables always
//! live over the small base group. Identity is element 0 in every
//! representation, and element numbering is breadth-first from the identity,
//! which makes labels shortlex-least and reproducible.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::word::Word;
use crate::error::{Error, Result};
use crate::linalg::smith_normal_form;
use crate::rng::Rng;

pub type Elt = u64;

#[derive(Debug)]
pub(crate) enum GroupRepr {
    Table {
        mul: Vec<u32>,
        inv: Vec<u32>,
    },
    Abelian {
        orders: Vec<u64>,
    },
    Perm {
        elems: Vec<Vec<u32>>,
        lookup: BTreeMap<Vec<u32>, u32>,
    },
    Extension(ExtensionRepr),
}

#[derive(Debug)]
pub(crate) struct ExtensionRepr {
    pub base: FiniteGroup,
    pub module_orders: Vec<u64>,
    pub asize: u64,
    /// action[h][i][j]: conjugation of the module by the section lift of
    /// base element h, as a matrix on tuple coordinates
    pub action: Vec<Vec<Vec<u64>>>,
    /// factor[g * |base| + h] ∈ module tuples, normalized (zero when either
    /// argument is the identity)
    pub factor: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: u64,
    gens: Vec<Elt>,
    repr: Arc<GroupRepr>,
}

fn tuple_of_index(idx: u64, orders: &[u64]) -> Vec<u64> {
    let mut t = Vec::with_capacity(orders.len());
    let mut rest = idx;
    for &d in orders {
        t.push(rest % d);
        rest /= d;
    }
    debug_assert_eq!(rest, 0);
    t
}

fn index_of_tuple(t: &[u64], orders: &[u64]) -> u64 {
    let mut idx = 0u64;
    for (i, &d) in orders.iter().enumerate().rev() {
        idx = idx * d + (t[i] % d);
    }
    idx
}

impl FiniteGroup {
    pub fn trivial() -> Self {
        FiniteGroup {
            order: 1,
            gens: vec![],
            repr: Arc::new(GroupRepr::Abelian { orders: vec![] }),
        }
    }

    pub fn cyclic(m: u64) -> Self {
        assert!(m >= 1);
        if m == 1 {
            return Self::trivial();
        }
        FiniteGroup {
            order: m,
            gens: vec![1],
            repr: Arc::new(GroupRepr::Abelian { orders: vec![m] }),
        }
    }

    /// ⊕ ℤ/orders[i], generated by the unit tuples.
    pub fn abelian(orders: &[u64]) -> Self {
        let orders: Vec<u64> = orders.to_vec();
        assert!(orders.iter().all(|&d| d >= 2));
        let order = orders.iter().product();
        let gens = (0..orders.len())
            .map(|i| {
                let mut t = vec![0u64; orders.len()];
                t[i] = 1;
                index_of_tuple(&t, &orders)
            })
            .collect();
        FiniteGroup {
            order,
            gens,
            repr: Arc::new(GroupRepr::Abelian { orders }),
        }
    }

    /// Group generated by permutations (breadth-first closure). The
    /// permutations act on 0..degree; element 0 is the identity.
    pub fn from_perms(degree: usize, gen_perms: &[Vec<u32>], max_order: u64) -> Result<Self> {
        for p in gen_perms {
            if p.len() != degree {
                return Err(Error::invalid("permutation degree mismatch"));
            }
        }
        let id: Vec<u32> = (0..degree as u32).collect();
        let mut elems = vec![id.clone()];
        let mut lookup = BTreeMap::new();
        lookup.insert(id, 0u32);
        let mut head = 0;
        while head < elems.len() {
            let cur = elems[head].clone();
            head += 1;
            for g in gen_perms {
                let composed: Vec<u32> = cur.iter().map(|&x| g[x as usize]).collect();
                if !lookup.contains_key(&composed) {
                    if elems.len() as u64 >= max_order {
                        return Err(Error::resource(format!(
                            "permutation group closure exceeded max order {max_order}"
                        )));
                    }
                    lookup.insert(composed.clone(), elems.len() as u32);
                    elems.push(composed);
                }
            }
        }
        let gens = gen_perms
            .iter()
            .map(|p| lookup[p] as Elt)
            .collect();
        Ok(FiniteGroup {
            order: elems.len() as u64,
            gens,
            repr: Arc::new(GroupRepr::Perm { elems, lookup }),
        })
    }

    /// Group from an explicit multiplication table (identity must be 0).
    pub fn from_table(mul: Vec<u32>, gens: Vec<Elt>) -> Result<Self> {
        let order = (mul.len() as f64).sqrt() as usize;
        if order * order != mul.len() {
            return Err(Error::invalid("multiplication table is not square"));
        }
        for x in 0..order {
            if mul[x] != x as u32 || mul[x * order] != x as u32 {
                return Err(Error::invalid("element 0 is not the identity"));
            }
        }
        let mut inv = vec![u32::MAX; order];
        for x in 0..order {
            for y in 0..order {
                if mul[x * order + y] == 0 {
                    inv[x] = y as u32;
                }
            }
        }
        if inv.iter().any(|&v| v == u32::MAX) {
            return Err(Error::invalid("an element has no inverse"));
        }
        let g = FiniteGroup {
            order: order as u64,
            gens,
            repr: Arc::new(GroupRepr::Table { mul, inv }),
        };
        g.spot_check_associativity()?;
        Ok(g)
    }

    pub(crate) fn extension(
        base: FiniteGroup,
        module_orders: Vec<u64>,
        action: Vec<Vec<Vec<u64>>>,
        factor: Vec<Vec<u64>>,
        gens: Vec<Elt>,
    ) -> Result<Self> {
        let asize: u64 = module_orders.iter().product();
        let order = base.order() * asize;
        if action.len() != base.order() as usize {
            return Err(Error::invalid("extension: one action matrix per base element"));
        }
        if factor.len() != (base.order() * base.order()) as usize {
            return Err(Error::invalid("extension: factor set must be dense over base"));
        }
        let g = FiniteGroup {
            order,
            gens,
            repr: Arc::new(GroupRepr::Extension(ExtensionRepr {
                base,
                module_orders,
                asize,
                action,
                factor,
            })),
        };
        g.spot_check_associativity()?;
        Ok(g)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn id(&self) -> Elt {
        0
    }

    pub fn generators(&self) -> &[Elt] {
        &self.gens
    }

    pub fn with_generators(&self, gens: Vec<Elt>) -> Self {
        FiniteGroup {
            order: self.order,
            gens,
            repr: Arc::clone(&self.repr),
        }
    }

    pub fn mul(&self, x: Elt, y: Elt) -> Elt {
        match &*self.repr {
            GroupRepr::Table { mul, .. } => mul[(x * self.order + y) as usize] as Elt,
            GroupRepr::Abelian { orders } => {
                let a = tuple_of_index(x, orders);
                let b = tuple_of_index(y, orders);
                let s: Vec<u64> = a
                    .iter()
                    .zip(b.iter())
                    .zip(orders.iter())
                    .map(|((&u, &v), &d)| (u + v) % d)
                    .collect();
                index_of_tuple(&s, orders)
            }
            GroupRepr::Perm { elems, lookup } => {
                let p = &elems[x as usize];
                let q = &elems[y as usize];
                // x then y, acting on the left of points: (xy)(pt) = x(y(pt))
                let composed: Vec<u32> = q.iter().map(|&pt| p[pt as usize]).collect();
                lookup[&composed] as Elt
            }
            GroupRepr::Extension(e) => {
                let (g1, a1) = (x / e.asize, tuple_of_index(x % e.asize, &e.module_orders));
                let (g2, a2) = (y / e.asize, tuple_of_index(y % e.asize, &e.module_orders));
                let g = e.base.mul(g1, g2);
                let f = &e.factor[(g1 * e.base.order() + g2) as usize];
                let act = &e.action[g2 as usize];
                let mut a = vec![0u64; e.module_orders.len()];
                for (i, ai) in a.iter_mut().enumerate() {
                    let d = e.module_orders[i];
                    let mut acc = (f[i] + a2[i]) % d;
                    for (j, &a1j) in a1.iter().enumerate() {
                        acc = (acc + act[i][j] % d * (a1j % d)) % d;
                    }
                    *ai = acc;
                }
                g * e.asize + index_of_tuple(&a, &e.module_orders)
            }
        }
    }

    pub fn inv(&self, x: Elt) -> Elt {
        match &*self.repr {
            GroupRepr::Table { inv, .. } => inv[x as usize] as Elt,
            GroupRepr::Abelian { orders } => {
                let a = tuple_of_index(x, orders);
                let s: Vec<u64> = a
                    .iter()
                    .zip(orders.iter())
                    .map(|(&u, &d)| if u == 0 { 0 } else { d - u })
                    .collect();
                index_of_tuple(&s, orders)
            }
            GroupRepr::Perm { elems, lookup } => {
                let p = &elems[x as usize];
                let mut q = vec![0u32; p.len()];
                for (i, &v) in p.iter().enumerate() {
                    q[v as usize] = i as u32;
                }
                lookup[&q] as Elt
            }
            GroupRepr::Extension(e) => {
                let (g, a) = (x / e.asize, tuple_of_index(x % e.asize, &e.module_orders));
                let gi = e.base.inv(g);
                let f = &e.factor[(g * e.base.order() + gi) as usize];
                let act = &e.action[gi as usize];
                let mut b = vec![0u64; e.module_orders.len()];
                for (i, bi) in b.iter_mut().enumerate() {
                    let d = e.module_orders[i];
                    let mut acc = 0u64;
                    for (j, &aj) in a.iter().enumerate() {
                        acc = (acc + act[i][j] % d * (aj % d)) % d;
                    }
                    acc = (acc + f[i]) % d;
                    *bi = (d - acc) % d;
                }
                gi * e.asize + index_of_tuple(&b, &e.module_orders)
            }
        }
    }

    pub fn conj(&self, x: Elt, by: Elt) -> Elt {
        self.mul(self.mul(self.inv(by), x), by)
    }

    pub fn eval_word(&self, images: &[Elt], w: &[i32]) -> Elt {
        let mut acc = self.id();
        for &l in w {
            let g = images[(l.unsigned_abs() as usize) - 1];
            let g = if l > 0 { g } else { self.inv(g) };
            acc = self.mul(acc, g);
        }
        acc
    }

    pub fn elt_order(&self, x: Elt) -> u64 {
        let mut k = 1;
        let mut acc = x;
        while acc != self.id() {
            acc = self.mul(acc, x);
            k += 1;
            debug_assert!(k <= self.order);
        }
        k
    }

    pub fn pow(&self, x: Elt, k: u64) -> Elt {
        let mut acc = self.id();
        let mut base = x;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn is_abelian(&self) -> bool {
        match &*self.repr {
            GroupRepr::Abelian { .. } => true,
            _ => {
                // generators generate, so pairwise commuting generators decide it
                self.gens.iter().all(|&a| {
                    self.gens
                        .iter()
                        .all(|&b| self.mul(a, b) == self.mul(b, a))
                })
            }
        }
    }

    /// Tuple orders when this group has the abelian representation.
    pub fn abelian_orders(&self) -> Option<&[u64]> {
        match &*self.repr {
            GroupRepr::Abelian { orders } => Some(orders),
            _ => None,
        }
    }

    #[allow(dead_code)]
    pub(crate) fn repr(&self) -> &GroupRepr {
        &self.repr
    }

    /// Extension structure access (base group, module, projection data).
    pub fn extension_parts(&self) -> Option<(&FiniteGroup, &[u64], u64)> {
        match &*self.repr {
            GroupRepr::Extension(e) => Some((&e.base, &e.module_orders, e.asize)),
            _ => None,
        }
    }

    /// Associativity on a fixed pseudorandom sample (full check in tests).
    pub fn spot_check_associativity(&self) -> Result<()> {
        let mut rng = Rng::new(0x5eed ^ self.order);
        let samples = if self.order <= 8 {
            0 // covered by the full check below
        } else {
            1000
        };
        if self.order <= 8 {
            return self.full_check_associativity();
        }
        for _ in 0..samples {
            let x = rng.below(self.order);
            let y = rng.below(self.order);
            let z = rng.below(self.order);
            if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)) {
                return Err(Error::verification(
                    "group-associativity",
                    format!("({x}·{y})·{z} != {x}·({y}·{z})"),
                ));
            }
        }
        Ok(())
    }

    pub fn full_check_associativity(&self) -> Result<()> {
        for x in 0..self.order {
            for y in 0..self.order {
                for z in 0..self.order {
                    if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)) {
                        return Err(Error::verification(
                            "group-associativity",
                            format!("({x}·{y})·{z} != {x}·({y}·{z})"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Shortlex word (over the generators) per element, by breadth-first
    /// search. Errors if the generators do not generate.
    pub fn bfs_words(&self) -> Result<Vec<Word>> {
        let mut words: Vec<Option<Word>> = vec![None; self.order as usize];
        words[0] = Some(Word::new());
        let mut queue = vec![0 as Elt];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for (gi, &g) in self.gens.iter().enumerate() {
                for (target, letter) in [
                    (self.mul(x, g), (gi + 1) as i32),
                    (self.mul(x, self.inv(g)), -((gi + 1) as i32)),
                ] {
                    if words[target as usize].is_none() {
                        let mut w = words[x as usize].clone().unwrap();
                        w.push(letter);
                        words[target as usize] = Some(w);
                        queue.push(target);
                    }
                }
            }
        }
        words
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::verification("group-generated", "generators do not generate"))
    }

    /// Recognize an abelian group: returns an isomorphic tuple group along
    /// with the element translation in both directions.
    pub fn abelianized_form(&self) -> Option<(FiniteGroup, Vec<Elt>, Vec<Elt>)> {
        if !self.is_abelian() {
            return None;
        }
        if matches!(&*self.repr, GroupRepr::Abelian { .. }) {
            let ids: Vec<Elt> = (0..self.order).collect();
            return Some((self.clone(), ids.clone(), ids));
        }
        let k = self.gens.len();
        // BFS with exponent vectors; non-tree edges give the relation lattice
        let mut expo: Vec<Option<Vec<i64>>> = vec![None; self.order as usize];
        expo[0] = Some(vec![0i64; k]);
        let mut queue = vec![0 as Elt];
        let mut head = 0;
        let mut relations: Vec<Vec<i128>> = Vec::new();
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for (gi, &g) in self.gens.iter().enumerate() {
                let y = self.mul(x, g);
                let mut e = expo[x as usize].clone().unwrap();
                e[gi] += 1;
                match &expo[y as usize] {
                    None => {
                        expo[y as usize] = Some(e);
                        queue.push(y);
                    }
                    Some(old) => {
                        let rel: Vec<i128> = e
                            .iter()
                            .zip(old.iter())
                            .map(|(&a, &b)| (a - b) as i128)
                            .collect();
                        if rel.iter().any(|&v| v != 0) {
                            relations.push(rel);
                        }
                    }
                }
            }
        }
        if expo.iter().any(|e| e.is_none()) {
            return None; // not generated
        }
        let snf = smith_normal_form(relations);
        let mut orders = Vec::new();
        let mut kept = Vec::new();
        for i in 0..k {
            let d = snf.d.get(i).copied().unwrap_or(0);
            if d == 0 {
                return None; // infinite quotient: relations incomplete (impossible for finite)
            }
            if d > 1 {
                orders.push(d as u64);
                kept.push(i);
            }
        }
        let target = if orders.is_empty() {
            FiniteGroup::trivial()
        } else {
            FiniteGroup::abelian(&orders)
        };
        if target.order() != self.order {
            return None;
        }
        let to_tuple = |e: &[i64]| -> Elt {
            let t: Vec<u64> = kept
                .iter()
                .zip(orders.iter())
                .map(|(&i, &d)| {
                    let mut acc: i128 = 0;
                    for (g, &eg) in e.iter().enumerate() {
                        acc += eg as i128 * snf.col_t[g][i];
                    }
                    acc.rem_euclid(d as i128) as u64
                })
                .collect();
            index_of_tuple(&t, &orders)
        };
        let mut fwd = vec![0 as Elt; self.order as usize];
        let mut bwd = vec![0 as Elt; self.order as usize];
        for x in 0..self.order {
            let t = to_tuple(expo[x as usize].as_ref().unwrap());
            fwd[x as usize] = t;
            bwd[t as usize] = x;
        }
        // bijectivity check
        let mut seen = vec![false; self.order as usize];
        for &t in &fwd {
            if seen[t as usize] {
                return None;
            }
            seen[t as usize] = true;
        }
        let gen_images: Vec<Elt> = self.gens.iter().map(|&g| fwd[g as usize]).collect();
        Some((target.with_generators(gen_images), fwd, bwd))
    }

    /// The subgroup on an explicit element list (must be closed). Elements
    /// are renumbered with the identity first, then ascending; generators
    /// are chosen greedily.
    pub fn subgroup(&self, elements: &[Elt]) -> Result<(FiniteGroup, Vec<Elt>)> {
        let mut elems: Vec<Elt> = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if elems.first() != Some(&0) {
            return Err(Error::invalid("subgroup must contain the identity"));
        }
        let lookup: BTreeMap<Elt, u32> = elems
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as u32))
            .collect();
        let m = elems.len();
        let mut mul = vec![0u32; m * m];
        for i in 0..m {
            for j in 0..m {
                let p = self.mul(elems[i], elems[j]);
                let Some(&pi) = lookup.get(&p) else {
                    return Err(Error::invalid(
                        "subgroup element list is not closed under multiplication",
                    ));
                };
                mul[i * m + j] = pi;
            }
        }
        // greedy generator choice
        let mut generated = vec![false; m];
        generated[0] = true;
        let mut count = 1;
        let mut gens: Vec<Elt> = Vec::new();
        while count < m {
            let next = (0..m).find(|&i| !generated[i]).unwrap();
            gens.push(next as Elt);
            // closure
            let mut changed = true;
            while changed {
                changed = false;
                for i in 0..m {
                    if !generated[i] {
                        continue;
                    }
                    for &g in &gens {
                        let t = mul[i * m + g as usize] as usize;
                        if !generated[t] {
                            generated[t] = true;
                            count += 1;
                            changed = true;
                        }
                    }
                }
            }
        }
        let sub = FiniteGroup::from_table(mul, gens)?;
        Ok((sub, elems))
    }
}

/// Homomorphism given by its full value table.
#[derive(Debug, Clone)]
pub struct GroupHom {
    pub target: FiniteGroup,
    pub map: Vec<Elt>,
}

impl GroupHom {
    pub fn new(source: &FiniteGroup, target: FiniteGroup, map: Vec<Elt>) -> Result<Self> {
        if map.len() != source.order() as usize {
            return Err(Error::invalid("hom: map length must equal source order"));
        }
        if map[0] != 0 {
            return Err(Error::invalid("hom: identity must map to identity"));
        }
        let h = GroupHom { target, map };
        // multiplicativity on generator columns suffices for a sanity pass
        for &g in source.generators() {
            for x in (0..source.order()).step_by((source.order() as usize / 64).max(1)) {
                let lhs = h.map[source.mul(x, g) as usize];
                let rhs = h.target.mul(h.map[x as usize], h.map[g as usize]);
                if lhs != rhs {
                    return Err(Error::verification(
                        "group-hom-multiplicative",
                        format!("hom fails at ({x}, generator {g})"),
                    ));
                }
            }
        }
        Ok(h)
    }

    pub fn apply(&self, x: Elt) -> Elt {
        self.map[x as usize]
    }

    pub fn kernel_elements(&self) -> Vec<Elt> {
        self.map
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 0)
            .map(|(i, _)| i as Elt)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_tuple_arithmetic() {
        let g = FiniteGroup::abelian(&[2, 4]);
        assert_eq!(g.order(), 8);
        let a = g.generators()[0];
        let b = g.generators()[1];
        assert_eq!(g.pow(a, 2), 0);
        assert_eq!(g.elt_order(b), 4);
        assert_eq!(g.mul(a, b), g.mul(b, a));
        g.full_check_associativity().unwrap();
    }

    #[test]
    fn perm_group_s3() {
        let g = FiniteGroup::from_perms(3, &[vec![1, 0, 2], vec![0, 2, 1]], 100).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        g.full_check_associativity().unwrap();
        let words = g.bfs_words().unwrap();
        assert_eq!(words[0], Word::new());
    }

    #[test]
    fn abelian_recognition_of_perm_group() {
        // cyclic group of order 6 as permutations
        let g = FiniteGroup::from_perms(6, &[vec![1, 2, 3, 4, 5, 0]], 100).unwrap();
        let (ab, fwd, bwd) = g.abelianized_form().unwrap();
        assert_eq!(ab.abelian_orders().unwrap(), &[6]);
        for x in 0..6u64 {
            for y in 0..6u64 {
                assert_eq!(fwd[g.mul(x, y) as usize], ab.mul(fwd[x as usize], fwd[y as usize]));
            }
        }
        for t in 0..6u64 {
            assert_eq!(fwd[bwd[t as usize] as usize], t);
        }
    }

    #[test]
    fn subgroup_of_abelian() {
        let g = FiniteGroup::abelian(&[4, 2]);
        // subgroup {0, 2} x {0,1} of order 4
        let elems: Vec<Elt> = (0..8)
            .filter(|&x| {
                let t = tuple_of_index(x, &[4, 2]);
                t[0] % 2 == 0
            })
            .collect();
        let (sub, embed) = g.subgroup(&elems).unwrap();
        assert_eq!(sub.order(), 4);
        assert!(sub.is_abelian());
        assert_eq!(embed.len(), 4);
    }
}

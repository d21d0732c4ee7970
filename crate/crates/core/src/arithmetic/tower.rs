//! Frobenius data and the arithmetic covering tower.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fpgroups::{extend_quotient, Elt, FiniteGroup, FiniteQuotient, GroupHom, Word};
use crate::groupcohom::{GModule, Subgroup};
use crate::limits::Limits;
use crate::linalg::{LambdaMatrix, LambdaModule};
use crate::sheafcohom::LisseSheaf;

/// Frobenius action: an automorphism of the geometric fundamental group
/// (generator → word) plus its action on the sheaf stalk (identity unless
/// given).
#[derive(Debug, Clone)]
pub struct FrobeniusDatum {
    pub gen_words: Vec<Word>,
    pub stalk_matrix: Option<LambdaMatrix>,
}

impl FrobeniusDatum {
    pub fn identity(ngens: usize) -> Self {
        FrobeniusDatum {
            gen_words: (0..ngens).map(|i| vec![(i + 1) as i32]).collect(),
            stalk_matrix: None,
        }
    }

    pub fn apply(&self, w: &[i32]) -> Word {
        let mut out = Word::new();
        for &l in w {
            let img = &self.gen_words[(l.unsigned_abs() as usize) - 1];
            if l > 0 {
                out = crate::fpgroups::concat(&out, img);
            } else {
                out = crate::fpgroups::concat(&out, &crate::fpgroups::inverse(img));
            }
        }
        out
    }

    /// Induced integer matrix on the abelianization, reduced mod n.
    pub fn h1_matrix(&self, ngens: usize, n: u64) -> LambdaMatrix {
        let mut cols = Vec::new();
        for j in 0..ngens {
            let ab = crate::fpgroups::word_abelianization(&self.gen_words[j], ngens);
            cols.push(ab);
        }
        let rows: Vec<Vec<u64>> = (0..ngens)
            .map(|i| {
                (0..ngens)
                    .map(|j| cols[j][i].rem_euclid(n as i64) as u64)
                    .collect()
            })
            .collect();
        LambdaMatrix::from_rows(n, ngens, &rows)
    }
}

/// One level of the arithmetic tower.
#[derive(Debug)]
pub struct ArithLevel {
    /// geometric quotient π̄ ↠ Ḡ⁽ⁱ⁾
    pub geo: FiniteQuotient,
    /// projection Ḡ⁽ⁱ⁾ → Ḡ⁽ⁱ⁻¹⁾
    pub geo_proj: GroupHom,
    /// the module H₁(previous kernel; Λ)
    pub module: LambdaModule,
    /// Frobenius on Ḡ⁽ⁱ⁾, elementwise
    pub phi_geo: Vec<Elt>,
    /// |𝔖⁽ⁱ⁾|: the cyclic arithmetic part after Galois closure
    pub s_order: u64,
    /// field-degree bookkeeping: the стабilizer field of the next kernel,
    /// the splitting field of H¹ of the next cover, and its n-extension
    pub deg_k: u64,
    pub deg_kprime: u64,
    pub deg_l: u64,
}

#[derive(Debug)]
pub struct ArithmeticTower {
    pub sheaf: LisseSheaf,
    pub frobenius: FrobeniusDatum,
    pub pi1: crate::curves::Pi1Presentation,
    pub q0: FiniteQuotient,
    pub phi_q0: Vec<Elt>,
    pub levels: Vec<ArithLevel>,
}

/// Elementwise Frobenius on a finite quotient: g ↦ image of φ(word for g).
fn phi_on_quotient(
    q: &FiniteQuotient,
    frob: &FrobeniusDatum,
) -> Result<Vec<Elt>> {
    let g = q.group();
    let words = g.bfs_words()?;
    let phi_imgs: Vec<Elt> = frob
        .gen_words
        .iter()
        .map(|w| q.apply_word(w))
        .collect();
    let mut map = Vec::with_capacity(g.order() as usize);
    for x in 0..g.order() {
        map.push(g.eval_word(&phi_imgs, &words[x as usize]));
    }
    // must be an automorphism
    let mut seen = vec![false; g.order() as usize];
    for &v in &map {
        if seen[v as usize] {
            return Err(Error::verification(
                "frobenius-automorphism",
                "Frobenius does not act bijectively on a tower quotient",
            ));
        }
        seen[v as usize] = true;
    }
    Ok(map)
}

fn perm_order(map: &[Elt]) -> u64 {
    // lcm of cycle lengths
    let mut seen = vec![false; map.len()];
    let mut ord = 1u64;
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = map[x] as usize;
            len += 1;
        }
        ord = num_lcm(ord, len);
    }
    ord
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / crate::linalg::gcd(a, b) * b
}

impl ArithmeticTower {
    /// Build `depth` levels. Per level: the next geometric quotient is the
    /// mod-n derived quotient of the current one (the ⟨n⟩ covering of the
    /// chosen component), the stabilizer and splitting degrees are computed
    /// from the Frobenius action, L is the degree-n extension on top, and
    /// the Galois closure fixes the final cyclic order m̃.
    pub fn build(
        sheaf: &LisseSheaf,
        frobenius: &FrobeniusDatum,
        depth: usize,
        limits: &Limits,
    ) -> Result<ArithmeticTower> {
        let pi1 = sheaf.curve.pi1_presentation()?;
        let ngens = pi1.pres.ngens();
        if frobenius.gen_words.len() != ngens {
            return Err(Error::invalid(format!(
                "frobenius needs one word per generator ({ngens})"
            )));
        }
        // relators must map to consequences; exact on the abelianization
        for (ri, r) in pi1.pres.relators().iter().enumerate() {
            let img = frobenius.apply(r);
            let ab = crate::fpgroups::word_abelianization(&img, ngens);
            // all our relators abelianize to zero, so images must too
            if ab.iter().any(|&v| v != 0) {
                return Err(Error::invalid(format!(
                    "frobenius image of relator #{ri} does not abelianize to zero"
                )));
            }
        }
        let q0 = sheaf.monodromy_image(&pi1, limits)?;
        // kernel of the monodromy must be Frobenius-stable for the sheaf to
        // live on the arithmetic curve
        let phi_q0 = phi_on_quotient(&q0, frobenius)?;
        // stalk equivariance: ρ(φ(x)) = F ρ(x) F⁻¹
        if let Some(f) = &frobenius.stalk_matrix {
            for (gi, w) in frobenius.gen_words.iter().enumerate() {
                let lhs = eval_monodromy(sheaf, w)?;
                let rho = &sheaf.monodromy[gi];
                let rhs = f.mul(rho)?;
                let lhs_f = lhs.mul(f)?;
                if rhs != lhs_f {
                    return Err(Error::invalid(format!(
                        "frobenius stalk matrix is not equivariant at generator {gi}"
                    )));
                }
            }
        }

        let mut levels: Vec<ArithLevel> = Vec::new();
        let mut q = q0.clone();
        let mut prev_m = 1u64;
        for level in 1..=depth {
            let ext = extend_quotient(&q, sheaf.n, limits)?;
            let geo = ext.quotient.clone();
            // Frobenius must stabilize the new kernel: the elementwise map
            // exists iff it does
            let phi_geo = phi_on_quotient(&geo, frobenius).map_err(|e| {
                Error::verification(
                    "frobenius-kernel-stability",
                    format!("level {level}: {e}"),
                )
            })?;
            // K: the kernel is characteristic under any automorphism that
            // stabilized the previous one, so the stabilizer degree is 1
            // and K is the previous L
            let deg_k = prev_m.max(1);
            // K′: Frobenius^deg_k acting on H₁ of the new kernel's module
            let p_mat = frobenius_on_module(&q, frobenius, &ext.module, sheaf.n)?;
            let e = matrix_order(&ext.module, &p_mat, deg_k, limits)?;
            let deg_kprime = deg_k * e;
            let deg_l = deg_kprime * sheaf.n;
            // Galois closure: m̃ = least multiple of deg_l with φ^m̃ = id
            // on the new geometric quotient
            let mut pow: Vec<Elt> = {
                // φ^deg_l elementwise
                let mut acc: Vec<Elt> = (0..geo.group().order()).collect();
                for _ in 0..deg_l {
                    acc = acc.iter().map(|&x| phi_geo[x as usize]).collect();
                }
                acc
            };
            let mut s_order = deg_l;
            let max_iter = perm_order(&phi_geo);
            let mut guard = 0;
            while pow.iter().enumerate().any(|(i, &v)| v != i as Elt) {
                for v in pow.iter_mut() {
                    let mut x = *v;
                    for _ in 0..deg_l {
                        x = phi_geo[x as usize];
                    }
                    *v = x;
                }
                s_order += deg_l;
                guard += 1;
                if guard > max_iter {
                    return Err(Error::verification(
                        "galois-closure-order",
                        "Frobenius order on the quotient did not stabilize",
                    ));
                }
            }
            limits.check_group_order(
                geo.group().order() as u128 * s_order as u128,
                &format!("arithmetic tower level {level}"),
            )?;
            if deg_l % (deg_k * sheaf.n) != 0 {
                return Err(Error::verification(
                    "tower-degree-bookkeeping",
                    "L does not contain the n-extension of K",
                ));
            }
            levels.push(ArithLevel {
                geo: geo.clone(),
                geo_proj: ext.proj,
                module: ext.module,
                phi_geo,
                s_order,
                deg_k,
                deg_kprime,
                deg_l,
            });
            prev_m = s_order;
            q = geo;
        }
        Ok(ArithmeticTower {
            sheaf: sheaf.clone(),
            frobenius: frobenius.clone(),
            pi1,
            q0,
            phi_q0,
            levels,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn geo_orders(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.geo.group().order()).collect()
    }

    pub fn s_orders(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.s_order).collect()
    }

    pub fn full_orders(&self) -> Vec<u64> {
        self.levels
            .iter()
            .map(|l| l.geo.group().order() * l.s_order)
            .collect()
    }

    /// The arithmetic group G⁽ⁱ⁾ = Ḡ⁽ⁱ⁾ ⋊ ℤ/m̃ᵢ: pairs (t, ā) with
    /// multiplication twisted by Frobenius powers. Requires the geometric
    /// level to carry the abelian tuple representation.
    pub fn arith_group(&self, i: usize) -> Result<ArithGroup> {
        let lvl = &self.levels[i - 1];
        let geo_g = lvl.geo.group();
        let Some(orders) = geo_g.abelian_orders() else {
            return Err(Error::resource(
                "non-abelian geometric level: arithmetic towers beyond abelian geometric \
                 parts are not desk-scale",
            ));
        };
        let rank = orders.len();
        let m = lvl.s_order;
        // φ as a matrix on tuple coordinates
        let phi_mat = {
            let mut mat = vec![vec![0u64; rank]; rank];
            for j in 0..rank {
                let mut t = vec![0u64; rank];
                t[j] = 1;
                let elt = tuple_to_elt(orders, &t);
                let img = lvl.phi_geo[elt as usize];
                let img_t = elt_to_tuple(orders, img);
                for (ii, row) in mat.iter_mut().enumerate() {
                    row[j] = img_t[ii];
                }
            }
            mat
        };
        // α_t = φ^{-t}; build all powers of the tuple matrix
        let mut powers: Vec<Vec<Vec<u64>>> = Vec::with_capacity(m as usize);
        powers.push(identity_mat(rank));
        for _ in 1..m {
            let prev = powers.last().unwrap();
            powers.push(mat_mul_orders(orders, prev, &phi_mat));
        }
        // φ^m must be the identity (guaranteed by the closure step)
        let last = mat_mul_orders(orders, powers.last().unwrap(), &phi_mat);
        if last != identity_mat(rank) {
            return Err(Error::verification(
                "arith-group-twist",
                "Frobenius power m̃ is not trivial on the geometric part",
            ));
        }
        let asize: u64 = orders.iter().product();
        // α_t = φ^{-t} = φ^{m - t} (indices mod m)
        let action: Vec<Vec<Vec<u64>>> = (0..m as usize)
            .map(|t| {
                if t == 0 {
                    identity_mat(rank)
                } else {
                    powers[(m as usize - t) % m as usize].clone()
                }
            })
            .collect();
        let factor = vec![vec![0u64; rank]; (m * m) as usize];
        // generators: geometric generators in the t = 0 block, then the
        // Frobenius generator (1, 0)
        let mut gens: Vec<Elt> = lvl.geo.images().to_vec();
        gens.push(asize);
        let base = FiniteGroup::cyclic(m);
        let group = FiniteGroup::extension(
            base,
            orders.to_vec(),
            action,
            factor,
            gens.clone(),
        )?;
        Ok(ArithGroup {
            group,
            geo_orders: orders.to_vec(),
            asize,
            s_order: m,
            geo_gens: lvl.geo.images().to_vec(),
        })
    }

    /// Projection G⁽ⁱ⁾ → G⁽ʲ⁾ (i > j ≥ 1), elementwise on pair indices.
    pub fn arith_projection(&self, gi: &ArithGroup, gj: &ArithGroup, i: usize, j: usize) -> Vec<Elt> {
        debug_assert!(i > j && j >= 1);
        // geometric projection chain
        let mut geo_map: Vec<Elt> = (0..self.levels[i - 1].geo.group().order()).collect();
        for lvl in (j..i).rev() {
            let proj = &self.levels[lvl].geo_proj;
            geo_map = geo_map.iter().map(|&x| proj.apply(x)).collect();
        }
        let mut out = Vec::with_capacity(gi.group.order() as usize);
        for x in 0..gi.group.order() {
            let (t, a) = (x / gi.asize, x % gi.asize);
            let t2 = t % gj.s_order;
            let a2 = geo_map[a as usize];
            out.push(t2 * gj.asize + a2);
        }
        out
    }

    /// M as a module over the arithmetic level group: geometric generators
    /// act by the sheaf monodromy, Frobenius by the stalk matrix.
    pub fn gmodule(&self, ag: &ArithGroup) -> Result<Arc<GModule>> {
        let mut mats = self.sheaf.action_matrices();
        let rank = self.sheaf.stalk.rank();
        let f = match &self.frobenius.stalk_matrix {
            Some(m) => (0..rank)
                .map(|i| (0..rank).map(|j| m.get(i, j)).collect())
                .collect(),
            None => identity_mat(rank),
        };
        mats.push(f);
        Ok(Arc::new(GModule::with_action(
            ag.group.clone(),
            self.sheaf.stalk.clone(),
            &mats,
        )?))
    }

    /// The geometric part Ḡ⁽ⁱ⁾ as a subgroup of G⁽ⁱ⁾ (the t = 0 block).
    pub fn geo_subgroup(&self, i: usize, ag: &ArithGroup) -> Subgroup {
        let _ = i;
        let geo_group = self.levels[i - 1].geo.group().clone();
        let embed: Vec<Elt> = (0..ag.asize).collect();
        Subgroup::new(geo_group, embed)
    }
}

/// An arithmetic level group with its pair layout.
pub struct ArithGroup {
    pub group: FiniteGroup,
    pub geo_orders: Vec<u64>,
    pub asize: u64,
    pub s_order: u64,
    pub geo_gens: Vec<Elt>,
}

impl ArithGroup {
    /// Section of G → 𝔖: s(t) = (t, 0), normalized.
    pub fn section(&self) -> Vec<Elt> {
        (0..self.s_order).map(|t| t * self.asize).collect()
    }

    pub fn proj_to_s(&self) -> Vec<Elt> {
        (0..self.group.order()).map(|x| x / self.asize).collect()
    }
}

fn eval_monodromy(sheaf: &LisseSheaf, w: &[i32]) -> Result<LambdaMatrix> {
    let rank = sheaf.stalk.rank();
    let mut acc = LambdaMatrix::identity(sheaf.n, rank);
    for &l in w {
        let m = &sheaf.monodromy[(l.unsigned_abs() as usize) - 1];
        let m = if l > 0 {
            m.clone()
        } else {
            invert_lambda_matrix(sheaf, m)?
        };
        acc = m.mul(&acc)?;
    }
    Ok(acc)
}

fn invert_lambda_matrix(sheaf: &LisseSheaf, m: &LambdaMatrix) -> Result<LambdaMatrix> {
    let rank = sheaf.stalk.rank();
    let id = LambdaMatrix::identity(sheaf.n, rank);
    let mut acc = m.clone();
    let mut prev = id.clone();
    let mut steps = 0u64;
    while acc != id {
        prev = acc.clone();
        acc = acc.mul(m)?;
        steps += 1;
        if steps > 1 << 24 {
            return Err(Error::invalid("monodromy matrix not invertible"));
        }
    }
    Ok(prev)
}

/// Frobenius action on H₁(kernel; Λ): restrict φ to the kernel via Schreier
/// rewriting on the previous level and project into the module.
fn frobenius_on_module(
    q_prev: &FiniteQuotient,
    frob: &FrobeniusDatum,
    module: &LambdaModule,
    n: u64,
) -> Result<Vec<Vec<u64>>> {
    let kh = q_prev.kernel_handle()?;
    let sd = &kh.schreier;
    let rank = module.rank();
    let mut mat = vec![vec![0u64; rank]; rank];
    for j in 0..rank {
        let mut e = vec![0u64; rank];
        e[j] = 1;
        let expo = module.lift(&e)?;
        let mut w = Word::new();
        for (s, &k) in expo.iter().enumerate() {
            for _ in 0..(k % n) {
                w = crate::fpgroups::concat(&w, &sd.schreier_words[s]);
            }
        }
        let img = frob.apply(&w);
        let sw = sd.rewrite(&kh.table, &img).map_err(|_| {
            Error::verification(
                "frobenius-kernel-stability",
                "Frobenius image of a kernel element leaves the kernel",
            )
        })?;
        let expo_img: Vec<u64> = crate::fpgroups::word_abelianization(&sw, sd.gen_count())
            .iter()
            .map(|&v| v.rem_euclid(n as i64) as u64)
            .collect();
        let col = module.project(&expo_img)?;
        for (i, row) in mat.iter_mut().enumerate() {
            row[j] = col[i];
        }
    }
    Ok(mat)
}

/// Multiplicative order of Frobenius^deg_k on the module.
fn matrix_order(
    module: &LambdaModule,
    p: &[Vec<u64>],
    deg_k: u64,
    limits: &Limits,
) -> Result<u64> {
    let rank = module.rank();
    let orders = module.orders();
    let id = identity_mat(rank);
    // p^deg_k first
    let mut base = id.clone();
    for _ in 0..deg_k {
        base = mat_mul_orders(orders, &base, p);
    }
    let mut acc = base.clone();
    let mut e = 1u64;
    while acc != id {
        acc = mat_mul_orders(orders, &acc, &base);
        e += 1;
        if e > limits.max_group_order {
            return Err(Error::verification(
                "frobenius-module-order",
                "Frobenius action on the module has unreasonable order",
            ));
        }
    }
    Ok(e)
}

fn identity_mat(rank: usize) -> Vec<Vec<u64>> {
    (0..rank)
        .map(|i| (0..rank).map(|j| u64::from(i == j)).collect())
        .collect()
}

fn mat_mul_orders(orders: &[u64], a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let rank = orders.len();
    let mut out = vec![vec![0u64; rank]; rank];
    for i in 0..rank {
        for j in 0..rank {
            let mut acc = 0u128;
            for k in 0..rank {
                acc += a[i][k] as u128 * b[k][j] as u128;
            }
            out[i][j] = (acc % orders[i] as u128) as u64;
        }
    }
    out
}

fn tuple_to_elt(orders: &[u64], t: &[u64]) -> Elt {
    let mut idx = 0u64;
    for (i, &d) in orders.iter().enumerate().rev() {
        idx = idx * d + (t[i] % d);
    }
    idx
}

fn elt_to_tuple(orders: &[u64], x: Elt) -> Vec<u64> {
    let mut t = Vec::with_capacity(orders.len());
    let mut rest = x;
    for &d in orders {
        t.push(rest % d);
        rest /= d;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveModel;

    #[test]
    fn split_elliptic_tower_orders() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let frob = FrobeniusDatum::identity(2);
        let t = ArithmeticTower::build(&s, &frob, 3, &Limits::default()).unwrap();
        assert_eq!(t.geo_orders(), vec![4, 16, 64]);
        assert_eq!(t.s_orders(), vec![2, 4, 8]);
        assert_eq!(t.full_orders(), vec![8, 64, 512]);
        let l1 = &t.levels[0];
        assert_eq!((l1.deg_k, l1.deg_kprime, l1.deg_l), (1, 1, 2));
        let l3 = &t.levels[2];
        assert_eq!((l3.deg_k, l3.deg_kprime, l3.deg_l), (4, 4, 8));
    }

    #[test]
    fn split_elliptic_depth_five_orders() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let frob = FrobeniusDatum::identity(2);
        let t = ArithmeticTower::build(&s, &frob, 5, &Limits::default()).unwrap();
        assert_eq!(t.full_orders(), vec![8, 64, 512, 4096, 32768]);
        // Ḡ⁽⁴⁾ = (ℤ/16)², Ḡ⁽⁵⁾ = (ℤ/32)²
        assert_eq!(
            t.levels[3].geo.group().abelian_orders().unwrap(),
            &[16, 16]
        );
        assert_eq!(
            t.levels[4].geo.group().abelian_orders().unwrap(),
            &[32, 32]
        );
    }

    #[test]
    fn nonsplit_phi_tower() {
        // φ = [[1,1],[0,1]]: a ↦ a, b ↦ ab
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let frob = FrobeniusDatum {
            gen_words: vec![vec![1], vec![1, 2]],
            stalk_matrix: None,
        };
        let t = ArithmeticTower::build(&s, &frob, 2, &Limits::default()).unwrap();
        // level 1: K = k, K′ quadratic (φ acts with order 2 on H¹), L of
        // degree 4; φ̄ has order 2 on (ℤ/2)², so m̃ = 4
        let l1 = &t.levels[0];
        assert_eq!((l1.deg_k, l1.deg_kprime, l1.deg_l, l1.s_order), (1, 2, 4, 4));
        assert_eq!(t.geo_orders(), vec![4, 16]);
    }

    #[test]
    fn arith_group_multiplication_twists() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        let frob = FrobeniusDatum {
            gen_words: vec![vec![1], vec![1, 2]],
            stalk_matrix: None,
        };
        let t = ArithmeticTower::build(&s, &frob, 1, &Limits::default()).unwrap();
        let ag = t.arith_group(1).unwrap();
        assert_eq!(ag.group.order(), 16);
        assert!(!ag.group.is_abelian());
        ag.group.full_check_associativity().unwrap();
        // conjugation of a geometric element by Frobenius applies φ
        let fr = ag.section()[1];
        let a = t.levels[0].geo.images()[0];
        let b = t.levels[0].geo.images()[1];
        let conj = ag.group.conj(b, ag.group.inv(fr));
        // φ(b) = ab
        let ab = t.levels[0].geo.group().mul(a, b);
        assert_eq!(conj % ag.asize, ab);
    }

    #[test]
    fn frobenius_must_respect_relators() {
        let c = CurveModel::smooth_proper(1);
        let s = LisseSheaf::trivial(&c, 2, &[2]).unwrap();
        // a ↦ a², b ↦ b is not an automorphism mod the commutator relator’s
        // abelianization? it is linear; use something that breaks the
        // abelianized relator instead: impossible for the commutator, so
        // break bijectivity: a ↦ 1 (trivial word is out of range spec), use
        // a ↦ aa, which is injectivity-breaking mod 2 at level 1
        let frob = FrobeniusDatum {
            gen_words: vec![vec![1, 1], vec![2]],
            stalk_matrix: None,
        };
        let err = ArithmeticTower::build(&s, &frob, 1, &Limits::default()).unwrap_err();
        assert!(err.to_string().contains("bijectively"));
    }
}

//! Finitely generated Λ-modules in canonical cyclic form, and homomorphisms
//! between them.
//!
//! A module is stored as its invariant factors d₁ | d₂ | … | d_k (each
//! dividing n), optionally together with the presentation it came from and
//! the change of basis between presenting generators and canonical
//! coordinates. Canonical coordinates are tuples with coordinate i taken
//! modulo dᵢ.

use serde::{Deserialize, Serialize};

use super::howell::{howell_form, reduce_against};
use super::matrix::LambdaMatrix;
use super::residue::{add_mod, mul_mod};
use super::snf::smith_normal_form;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulePresentation {
    /// Number of presenting generators.
    pub gens: usize,
    /// gens × k: presenting coordinates (row vector) times this matrix give
    /// canonical coordinates.
    pub to_canonical: Vec<Vec<u64>>,
    /// k × gens: canonical coordinates back to a presenting representative.
    pub from_canonical: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaModule {
    n: u64,
    orders: Vec<u64>,
    #[serde(skip)]
    presentation: Option<ModulePresentation>,
}

impl PartialEq for LambdaModule {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.orders == other.orders
    }
}
impl Eq for LambdaModule {}

impl LambdaModule {
    pub fn zero(n: u64) -> Self {
        LambdaModule {
            n,
            orders: vec![],
            presentation: None,
        }
    }

    pub fn free(n: u64, rank: usize) -> Self {
        LambdaModule {
            n,
            orders: vec![n; rank],
            presentation: None,
        }
    }

    pub fn from_orders(n: u64, orders: &[u64]) -> Self {
        // normalize: drop trivial factors, recombine into a divisor chain
        let rels: Vec<Vec<u64>> = orders
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut row = vec![0u64; orders.len()];
                row[i] = d % n;
                row
            })
            .collect();
        Self::from_relations(n, orders.len(), &rels)
    }

    /// Quotient of Λ^gens by the row span of `relations`, with the change of
    /// basis to canonical cyclic coordinates.
    pub fn from_relations(n: u64, gens: usize, relations: &[Vec<u64>]) -> Self {
        let mut lifted: Vec<Vec<i128>> = relations
            .iter()
            .map(|r| r.iter().map(|&v| (v % n) as i128).collect())
            .collect();
        for i in 0..gens {
            let mut row = vec![0i128; gens];
            row[i] = n as i128;
            lifted.push(row);
        }
        if gens == 0 {
            return LambdaModule {
                n,
                orders: vec![],
                presentation: Some(ModulePresentation {
                    gens: 0,
                    to_canonical: vec![],
                    from_canonical: vec![],
                }),
            };
        }
        let snf = smith_normal_form(lifted);
        let mut orders = Vec::new();
        let mut kept = Vec::new();
        for (i, &d) in snf.d.iter().enumerate() {
            debug_assert!(d > 0, "n·I rows force positive invariant factors");
            debug_assert_eq!(n as i128 % d, 0);
            if d > 1 {
                orders.push(d as u64);
                kept.push(i);
            }
        }
        let to_canonical: Vec<Vec<u64>> = (0..gens)
            .map(|g| {
                kept.iter()
                    .map(|&i| snf.col_t[g][i].rem_euclid(n as i128) as u64)
                    .collect()
            })
            .collect();
        let from_canonical: Vec<Vec<u64>> = kept
            .iter()
            .map(|&i| {
                (0..gens)
                    .map(|g| snf.col_t_inv[i][g].rem_euclid(n as i128) as u64)
                    .collect()
            })
            .collect();
        LambdaModule {
            n,
            orders,
            presentation: Some(ModulePresentation {
                gens,
                to_canonical,
                from_canonical,
            }),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// Invariant factors, ascending divisibility.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn size(&self) -> u128 {
        self.orders.iter().map(|&d| d as u128).product()
    }

    pub fn is_zero(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn presentation(&self) -> Option<&ModulePresentation> {
        self.presentation.as_ref()
    }

    /// Reduce canonical coordinates into range (coordinate i mod dᵢ).
    pub fn normalize(&self, coords: &[u64]) -> Vec<u64> {
        coords
            .iter()
            .zip(self.orders.iter())
            .map(|(&c, &d)| c % d)
            .collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b.iter())
            .zip(self.orders.iter())
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect()
    }

    pub fn scale(&self, c: u64, a: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(self.orders.iter())
            .map(|(&x, &d)| mul_mod(x % d, c % d, d))
            .collect()
    }

    /// Map presenting-generator coordinates to canonical coordinates.
    pub fn project(&self, gen_coords: &[u64]) -> Result<Vec<u64>> {
        let p = self
            .presentation
            .as_ref()
            .ok_or_else(|| Error::invalid("module has no presentation attached"))?;
        if gen_coords.len() != p.gens {
            return Err(Error::invalid(format!(
                "project: expected {} generator coordinates, got {}",
                p.gens,
                gen_coords.len()
            )));
        }
        let mut out = vec![0u64; self.orders.len()];
        for (g, &x) in gen_coords.iter().enumerate() {
            if x % self.n == 0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o = add_mod(*o, mul_mod(x % self.n, p.to_canonical[g][i], self.n), self.n);
            }
        }
        Ok(out
            .iter()
            .zip(self.orders.iter())
            .map(|(&v, &d)| v % d)
            .collect())
    }

    /// Lift canonical coordinates to a presenting representative.
    pub fn lift(&self, coords: &[u64]) -> Result<Vec<u64>> {
        let p = self
            .presentation
            .as_ref()
            .ok_or_else(|| Error::invalid("module has no presentation attached"))?;
        let mut out = vec![0u64; p.gens];
        for (i, &c) in coords.iter().enumerate() {
            for (g, o) in out.iter_mut().enumerate() {
                *o = add_mod(*o, mul_mod(c % self.n, p.from_canonical[i][g], self.n), self.n);
            }
        }
        Ok(out)
    }

    /// All canonical elements, in lexicographic order. Only for small sizes.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &d in &self.orders {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for e in &out {
                for v in 0..d {
                    let mut e2 = e.clone();
                    e2.push(v);
                    next.push(e2);
                }
            }
            out = next;
        }
        out
    }
}

/// Homomorphism between canonical modules, as a matrix acting on column
/// vectors of canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleHom {
    pub source: LambdaModule,
    pub target: LambdaModule,
    /// target.rank() × source.rank()
    pub matrix: Vec<Vec<u64>>,
}

impl ModuleHom {
    pub fn new(source: LambdaModule, target: LambdaModule, matrix: Vec<Vec<u64>>) -> Result<Self> {
        if source.modulus() != target.modulus() {
            return Err(Error::invalid("hom: modulus mismatch"));
        }
        if matrix.len() != target.rank() || matrix.iter().any(|r| r.len() != source.rank()) {
            return Err(Error::invalid("hom: matrix shape mismatch"));
        }
        // entry (i, j) must kill the order of source generator j
        for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let need = (source.orders()[j] as u128 * v as u128) % target.orders()[i] as u128;
                if need != 0 {
                    return Err(Error::invalid(format!(
                        "hom: entry ({i},{j}) = {v} does not respect orders {} -> {}",
                        source.orders()[j],
                        target.orders()[i]
                    )));
                }
            }
        }
        Ok(ModuleHom {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(m: &LambdaModule) -> Self {
        let k = m.rank();
        let matrix = (0..k)
            .map(|i| (0..k).map(|j| u64::from(i == j)).collect())
            .collect();
        ModuleHom {
            source: m.clone(),
            target: m.clone(),
            matrix,
        }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.target.rank()];
        for (i, o) in out.iter_mut().enumerate() {
            let d = self.target.orders()[i];
            let mut acc = 0u64;
            for (j, &xj) in x.iter().enumerate() {
                acc = add_mod(acc, mul_mod(self.matrix[i][j] % d, xj % d, d), d);
            }
            *o = acc;
        }
        out
    }

    pub fn compose(&self, inner: &ModuleHom) -> Result<ModuleHom> {
        if inner.target != self.source {
            return Err(Error::invalid("hom composition: middle modules differ"));
        }
        let n = self.source.modulus();
        let rows = self.target.rank();
        let mid = self.source.rank();
        let cols = inner.source.rank();
        let mut matrix = vec![vec![0u64; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                let mut acc = 0u64;
                for k in 0..mid {
                    acc = add_mod(acc, mul_mod(self.matrix[i][k], inner.matrix[k][j], n), n);
                }
                matrix[i][j] = acc % self.target.orders()[i];
            }
        }
        ModuleHom::new(inner.source.clone(), self.target.clone(), matrix)
    }
}

/// Λ-dual Hom(M, Λ). For ⊕ ℤ/dᵢ the dual has the same orders.
pub fn dual_module(m: &LambdaModule) -> LambdaModule {
    LambdaModule {
        n: m.modulus(),
        orders: m.orders().to_vec(),
        presentation: None,
    }
}

/// Dual of a homomorphism: reverses arrows. Generator i of M^∨ is the
/// functional sending the i-th canonical generator to n/dᵢ ∈ Λ.
pub fn dual_hom(f: &ModuleHom) -> Result<ModuleHom> {
    let n = f.source.modulus();
    let d = f.source.orders();
    let e = f.target.orders();
    let mut matrix = vec![vec![0u64; e.len()]; d.len()];
    for (i, row) in matrix.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            // pairing bookkeeping: (f^∨)_{ij} = dᵢ · F_{ji} / eⱼ  (mod dᵢ)
            let num = d[i] as u128 * f.matrix[j][i] as u128;
            debug_assert_eq!(num % e[j] as u128, 0, "hom validity makes this exact");
            *out = ((num / e[j] as u128) % d[i] as u128) as u64;
        }
    }
    let _ = n;
    ModuleHom::new(dual_module(&f.target), dual_module(&f.source), matrix)
}

/// Tensor product over Λ: cyclic factors pair by gcd.
pub fn tensor(m1: &LambdaModule, m2: &LambdaModule) -> Result<LambdaModule> {
    if m1.modulus() != m2.modulus() {
        return Err(Error::invalid("tensor: modulus mismatch"));
    }
    let n = m1.modulus();
    let mut orders = Vec::new();
    for &d in m1.orders() {
        for &e in m2.orders() {
            orders.push(super::residue::gcd_u64(d, e));
        }
    }
    Ok(LambdaModule::from_orders(n, &orders))
}

/// Submodule of Λ^cols spanned by the given rows: Howell basis plus the
/// abstract structure presented on those basis rows.
pub struct KernelResult {
    pub basis: LambdaMatrix,
    pub module: LambdaModule,
}

pub(crate) fn span_structure(n: u64, basis: LambdaMatrix) -> KernelResult {
    let syz = howell_form(&basis).left_kernel;
    let module = LambdaModule::from_relations(n, basis.rows(), &syz.to_row_vecs());
    KernelResult { basis, module }
}

pub(crate) fn kernel(a: &LambdaMatrix) -> KernelResult {
    let basis = howell_form(&a.transpose()).left_kernel;
    span_structure(a.modulus(), basis)
}

pub(crate) fn image(a: &LambdaMatrix) -> KernelResult {
    let basis = howell_form(&a.transpose()).h;
    span_structure(a.modulus(), basis)
}

pub struct SolveResult {
    pub particular: Option<Vec<u64>>,
    pub kernel: KernelResult,
}

pub(crate) fn solve(a: &LambdaMatrix, b: &[u64]) -> SolveResult {
    let at = a.transpose();
    let hw = howell_form(&at);
    let (res, coeffs) = reduce_against(&hw.h, b);
    let particular = if res.iter().all(|&v| v == 0) {
        // coefficients refer to rows of H = U·Aᵀ, so x = coeffs·U
        let n = a.modulus();
        let mut x = vec![0u64; a.cols()];
        for (r, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = add_mod(*xj, mul_mod(c, hw.u.get(r, j), n), n);
            }
        }
        debug_assert_eq!(a.apply(&x).unwrap(), b.iter().map(|&v| v % n).collect::<Vec<_>>());
        Some(x)
    } else {
        None
    };
    SolveResult {
        particular,
        kernel: kernel(a),
    }
}

/// Quotient of a module by the submodule spanned by rows of canonical
/// coordinates; returns the quotient and the projection.
pub fn quotient(m: &LambdaModule, sub: &[Vec<u64>]) -> Result<(LambdaModule, ModuleHom)> {
    let n = m.modulus();
    let k = m.rank();
    for row in sub {
        if row.len() != k {
            return Err(Error::invalid("quotient: submodule row length mismatch"));
        }
    }
    let mut rels: Vec<Vec<u64>> = sub.to_vec();
    for (i, &d) in m.orders().iter().enumerate() {
        let mut row = vec![0u64; k];
        row[i] = d % n;
        rels.push(row);
    }
    let q = LambdaModule::from_relations(n, k, &rels);
    let p = q.presentation().expect("from_relations attaches one");
    let matrix: Vec<Vec<u64>> = (0..q.rank())
        .map(|i| {
            (0..k)
                .map(|g| p.to_canonical[g][i] % q.orders()[i])
                .collect()
        })
        .collect();
    let proj = ModuleHom::new(m.clone(), q.clone(), matrix)?;
    Ok((q, proj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_give_expected_orders() {
        // Λ²/span{(1,0)} over ℤ/4 is Λ¹
        let m = LambdaModule::from_relations(4, 2, &[vec![1, 0]]);
        assert_eq!(m.orders(), &[4]);
        // kernel of multiplication by 2 on ℤ/4 is cyclic of order 2
        let k = kernel(&LambdaMatrix::from_rows(4, 1, &[vec![2]]));
        assert_eq!(k.module.orders(), &[2]);
        assert_eq!(k.basis.to_row_vecs(), vec![vec![2]]);
    }

    #[test]
    fn project_and_lift_roundtrip() {
        let m = LambdaModule::from_relations(8, 3, &[vec![2, 4, 0], vec![0, 2, 6]]);
        for g in 0..3usize {
            let mut gen = vec![0u64; 3];
            gen[g] = 1;
            let c = m.project(&gen).unwrap();
            let back = m.lift(&c).unwrap();
            let again = m.project(&back).unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn solve_mod4_refuses_odd_target() {
        // 2x = 1 mod 4 has no solution; 2x = 2 does
        let a = LambdaMatrix::from_rows(4, 1, &[vec![2]]);
        let s = solve(&a, &[1]);
        assert!(s.particular.is_none());
        let s = solve(&a, &[2]);
        let x = s.particular.unwrap();
        assert_eq!((2 * x[0]) % 4, 2);
    }

    #[test]
    fn dual_orders_are_self_dual() {
        let m = LambdaModule::from_orders(4, &[2, 4]);
        assert_eq!(dual_module(&m).orders(), &[2, 4]);
        assert_eq!(dual_module(&LambdaModule::zero(6)).orders(), &[] as &[u64]);
        assert_eq!(dual_module(&LambdaModule::free(6, 3)).orders(), &[6, 6, 6]);
    }

    #[test]
    fn dual_hom_double_dual_is_identity() {
        let src = LambdaModule::from_orders(8, &[2, 8]);
        let tgt = LambdaModule::from_orders(8, &[4, 8]);
        // entry (i,j) valid iff src.orders[j]*m[i][j] ≡ 0 mod tgt.orders[i]
        let f = ModuleHom::new(src.clone(), tgt.clone(), vec![vec![2, 1], vec![4, 1]]).unwrap();
        let ff = dual_hom(&dual_hom(&f).unwrap()).unwrap();
        assert_eq!(ff.matrix, f.matrix);
    }

    #[test]
    fn tensor_gcd_pairing() {
        // ℤ/2 ⊗ ℤ/4 over ℤ/4 → ℤ/2
        let a = LambdaModule::from_orders(4, &[2]);
        let b = LambdaModule::from_orders(4, &[4]);
        assert_eq!(tensor(&a, &b).unwrap().orders(), &[2]);
        // Λ ⊗ M → M, Λ² ⊗ Λ² → Λ⁴
        let m = LambdaModule::from_orders(4, &[2, 4]);
        assert_eq!(tensor(&LambdaModule::free(4, 1), &m).unwrap().orders(), m.orders());
        assert_eq!(
            tensor(&LambdaModule::free(4, 2), &LambdaModule::free(4, 2))
                .unwrap()
                .orders(),
            &[4, 4, 4, 4]
        );
        // recombination into a divisor chain: ℤ/2 ⊕ ℤ/3 over ℤ/6 is ℤ/6
        let c = LambdaModule::from_orders(6, &[2]);
        let d = LambdaModule::from_orders(6, &[3]);
        let s = LambdaModule::from_orders(6, &[6]);
        assert_eq!(tensor(&s, &c).unwrap().orders(), &[2]);
        assert_eq!(tensor(&s, &d).unwrap().orders(), &[3]);
        assert_eq!(LambdaModule::from_orders(6, &[2, 3]).orders(), &[6]);
    }

    #[test]
    fn quotient_by_direct_summand() {
        let m = LambdaModule::free(4, 2);
        let (q, proj) = quotient(&m, &[vec![1, 0]]).unwrap();
        assert_eq!(q.orders(), &[4]);
        assert_eq!(proj.apply(&[1, 0]), vec![0]);
        // projection is surjective: image of the generators spans
        let img: Vec<Vec<u64>> = (0..2)
            .map(|j| {
                let mut e = vec![0u64; 2];
                e[j] = 1;
                proj.apply(&e)
            })
            .collect();
        assert!(img.iter().any(|v| v[0] % 2 != 0 || v[0] == 1 || v[0] == 3));
    }

    #[test]
    fn dual_of_mixed_module_by_enumeration() {
        // (ℤ/2 ⊕ ℤ/4)^∨ over Λ = ℤ/4: enumerate all homomorphisms into ℤ/4
        let orders = [2u64, 4];
        let mut count = 0u32;
        for a in 0..4u64 {
            for b in 0..4u64 {
                // a = image of the order-2 generator must be 2-torsion
                if (2 * a) % 4 == 0 {
                    let _ = b;
                    count += 1;
                }
            }
        }
        assert_eq!(count, 8); // |ℤ/2 ⊕ ℤ/4|
        let m = LambdaModule::from_orders(4, &orders);
        let d = dual_module(&m);
        assert_eq!(d.size(), 8);
        assert_eq!(d.orders(), &[2, 4]);
    }
}

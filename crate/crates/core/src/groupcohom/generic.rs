//! The generic cohomology backend.
//!
//! Normalized cochains of degree k are parametrized by their values on
//! (generator, nonidentity tail) tuples: the defining identities
//! d c(s, g′, tail) = rhs(s, g′, tail) express every other value along a
//! breadth-first decomposition of the first argument. The right-hand side
//! may be zero (cocycle spaces), a fixed cocycle (coboundary solves), or a
//! symbolic combination Σ λⱼ zⱼ (relation lattices and basis reductions); λ
//! columns ride along in the same linear system. Imposing the remaining
//! identities on generator-led tuples only is complete: the defect is a
//! closed normalized cochain vanishing on generator-led tuples, hence zero
//! by induction on the word length of its first argument (right-hand sides
//! are cocycles, so the defect is closed).
//!
//! Coefficients are handled in Λ-scaled coordinates (coordinate j of M
//! embeds into Λ by n/dⱼ) so all linear algebra happens over one modulus;
//! torsion rows dⱼ·u ≡ 0 pin the valid value set.

use std::sync::Arc;

use super::cochain::Cochain;
use super::gmodule::GModule;
use super::{CoboundaryAnswer, CohomologyTheory, TheoryKind};
use crate::error::{Error, Result};
use crate::fpgroups::Elt;
use crate::limits::Limits;
use crate::linalg::{HowellAccumulator, LambdaMatrix, LambdaModule};

/// Scale mixed canonical coordinates into Λ (coordinate j times n/dⱼ).
pub(crate) fn scale_in(module: &LambdaModule, v: &[u64]) -> Vec<u64> {
    let n = module.modulus();
    v.iter()
        .zip(module.orders())
        .map(|(&x, &d)| (x % d) * (n / d) % n)
        .collect()
}

/// Back from Λ-scaled coordinates to mixed canonical ones.
pub(crate) fn scale_out(module: &LambdaModule, v: &[u64]) -> Vec<u64> {
    let n = module.modulus();
    v.iter()
        .zip(module.orders())
        .map(|(&x, &d)| {
            let step = n / d;
            debug_assert_eq!(x % step, 0, "scaled coordinate escaped the torsion set");
            (x / step) % d
        })
        .collect()
}

/// Action matrix conjugated into scaled coordinates.
fn scaled_action(gm: &GModule, g: Elt) -> Vec<Vec<u64>> {
    let n = gm.modulus();
    let d = gm.module.orders();
    let m = gm.action_matrix(g);
    let rank = gm.rank();
    let mut out = vec![vec![0u64; rank]; rank];
    for i in 0..rank {
        for j in 0..rank {
            // (n/dᵢ)·m[i][j]·(dⱼ/n), integral because the action respects
            // coordinate orders
            let num = m[i][j] as u128 * d[j] as u128;
            debug_assert_eq!(num % d[i] as u128, 0);
            out[i][j] = ((num / d[i] as u128) % n as u128) as u64;
        }
    }
    out
}

/// Breadth-first order and positive-letter decomposition g = s·g′.
fn left_bfs(gm: &GModule) -> Result<(Vec<Elt>, Vec<Option<(usize, Elt)>>)> {
    let g = &gm.group;
    let mut parent: Vec<Option<(usize, Elt)>> = vec![None; g.order() as usize];
    let mut seen = vec![false; g.order() as usize];
    seen[0] = true;
    let mut queue = vec![0 as Elt];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for (gi, &s) in g.generators().iter().enumerate() {
            let y = g.mul(s, x);
            if !seen[y as usize] {
                seen[y as usize] = true;
                parent[y as usize] = Some((gi, x));
                queue.push(y);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::verification(
            "generic-backend-generated",
            "generators do not generate the group",
        ));
    }
    Ok((queue, parent))
}

/// Index space for nonidentity tuples of a fixed length.
struct TupleIndex {
    order: u64,
    len: usize,
    count: usize,
}

impl TupleIndex {
    fn new(order: u64, len: usize) -> Self {
        TupleIndex {
            order,
            len,
            count: ((order - 1) as usize).pow(len as u32),
        }
    }

    fn code(&self, tuple: &[Elt]) -> Option<usize> {
        debug_assert_eq!(tuple.len(), self.len);
        let mut idx = 0usize;
        for &a in tuple {
            if a == 0 {
                return None;
            }
            idx = idx * (self.order - 1) as usize + (a - 1) as usize;
        }
        Some(idx)
    }

    fn decode(&self, mut idx: usize) -> Vec<Elt> {
        let mut t = vec![0 as Elt; self.len];
        for i in (0..self.len).rev() {
            t[i] = (idx % (self.order - 1) as usize) as Elt + 1;
            idx /= (self.order - 1) as usize;
        }
        t
    }

    fn iter(&self) -> impl Iterator<Item = usize> {
        0..self.count
    }
}

/// Forms over [slice unknowns | family coefficients] plus a constant, one
/// row per (nonidentity tuple, coefficient component), entries mod n < 256.
struct FormMatrix {
    width: usize,
    data: Vec<u8>,
    consts: Vec<u64>,
}

impl FormMatrix {
    fn new(rows: usize, width: usize) -> Self {
        FormMatrix {
            width,
            data: vec![0u8; rows * width],
            consts: vec![0u64; rows],
        }
    }
    fn row(&self, i: usize) -> (&[u8], u64) {
        (
            &self.data[i * self.width..(i + 1) * self.width],
            self.consts[i],
        )
    }
}

/// Slice parametrization of degree-k normalized cochains c subject to
/// d c = Σ λⱼ familyⱼ + affine on the defining tuples.
pub(crate) struct SliceSystem {
    gm: Arc<GModule>,
    degree: usize,
    pub slice_unknowns: usize,
    pub family_len: usize,
    full: TupleIndex,
    forms: FormMatrix,
    family: Vec<Cochain>,
    affine: Option<Cochain>,
}

impl SliceSystem {
    fn width(&self) -> usize {
        self.slice_unknowns + self.family_len
    }

    pub(crate) fn build(
        gm: Arc<GModule>,
        degree: usize,
        family: &[Cochain],
        affine: Option<&Cochain>,
        limits: &Limits,
    ) -> Result<SliceSystem> {
        debug_assert!(degree >= 1);
        let n = gm.modulus();
        if n > 255 {
            return Err(Error::resource(
                "generic backend supports moduli up to 255",
            ));
        }
        let order = gm.group.order();
        let rank = gm.rank();
        let ngens = gm.group.generators().len().max(1);
        let tails = TupleIndex::new(order, degree - 1);
        let full = TupleIndex::new(order, degree);
        let slice_unknowns = ngens * tails.count * rank;
        let k = family.len();
        let width = slice_unknowns + k;
        let form_rows = full.count * rank;
        limits.check_system((width + 1) as u128, form_rows as u128, "slice forms")?;
        let mut forms = FormMatrix::new(form_rows, width);

        let (bfs_order, parent) = left_bfs(&gm)?;
        let sact: Vec<Vec<Vec<u64>>> = gm
            .group
            .generators()
            .iter()
            .map(|&s| scaled_action(&gm, s))
            .collect();

        let mut row_acc: Vec<Vec<i64>> = vec![vec![0i64; width]; rank];
        let mut const_acc: Vec<i64> = vec![0i64; rank];
        for &g in &bfs_order {
            if g == 0 {
                continue;
            }
            let (gi, gprime) = parent[g as usize].expect("nonidentity has a parent");
            let s_elt = gm.group.generators()[gi];
            for tcode in tails.iter() {
                let tail = tails.decode(tcode);
                let mut args = Vec::with_capacity(degree);
                args.push(g);
                args.extend_from_slice(&tail);
                let Some(row_base) = full.code(&args) else {
                    continue;
                };
                if gprime == 0 {
                    for comp in 0..rank {
                        let u = (gi * tails.count + tcode) * rank + comp;
                        forms.data[(row_base * rank + comp) * width + u] = 1;
                    }
                    continue;
                }
                for r in row_acc.iter_mut() {
                    r.iter_mut().for_each(|v| *v = 0);
                }
                const_acc.iter_mut().for_each(|v| *v = 0);
                // term s·f(g′, tail)
                let mut prev_args = Vec::with_capacity(degree);
                prev_args.push(gprime);
                prev_args.extend_from_slice(&tail);
                if let Some(src) = full.code(&prev_args) {
                    for i in 0..rank {
                        for j in 0..rank {
                            let c = sact[gi][i][j];
                            if c == 0 {
                                continue;
                            }
                            let (srow, scst) = forms.row(src * rank + j);
                            for (u, &v) in srow.iter().enumerate() {
                                if v != 0 {
                                    row_acc[i][u] += c as i64 * v as i64;
                                }
                            }
                            const_acc[i] += c as i64 * scst as i64;
                        }
                    }
                }
                // slice terms: with β = (g′, tail) of length `degree`,
                //   + Σ_m (-1)^m f(s, β with β_m β_{m+1} fused)
                //   + (-1)^(degree-1) f(s, β[..degree-1])
                let beta: Vec<Elt> = std::iter::once(gprime)
                    .chain(tail.iter().copied())
                    .collect();
                let mut sign = 1i64;
                for m in 0..degree.saturating_sub(1) {
                    let mut w = Vec::with_capacity(degree - 1);
                    w.extend_from_slice(&beta[..m]);
                    w.push(gm.group.mul(beta[m], beta[m + 1]));
                    w.extend_from_slice(&beta[m + 2..]);
                    if let Some(tc) = tails.code(&w) {
                        for comp in 0..rank {
                            let u = (gi * tails.count + tc) * rank + comp;
                            row_acc[comp][u] += sign;
                        }
                    }
                    sign = -sign;
                }
                if let Some(tc) = tails.code(&beta[..degree - 1]) {
                    for comp in 0..rank {
                        let u = (gi * tails.count + tc) * rank + comp;
                        row_acc[comp][u] += sign;
                    }
                }
                // right-hand side of the defining identity at (s, g′, tail)
                let mut zargs = Vec::with_capacity(degree + 1);
                zargs.push(s_elt);
                zargs.push(gprime);
                zargs.extend_from_slice(&tail);
                for (j, zj) in family.iter().enumerate() {
                    let zv = scale_in(&gm.module, &zj.eval(&zargs));
                    for comp in 0..rank {
                        if zv[comp] != 0 {
                            row_acc[comp][slice_unknowns + j] -= zv[comp] as i64;
                        }
                    }
                }
                if let Some(z) = affine {
                    let zv = scale_in(&gm.module, &z.eval(&zargs));
                    for comp in 0..rank {
                        const_acc[comp] -= zv[comp] as i64;
                    }
                }
                for comp in 0..rank {
                    let base = (row_base * rank + comp) * width;
                    for (u, &acc) in row_acc[comp].iter().enumerate() {
                        forms.data[base + u] = acc.rem_euclid(n as i64) as u8;
                    }
                    forms.consts[row_base * rank + comp] =
                        const_acc[comp].rem_euclid(n as i64) as u64;
                }
            }
        }
        Ok(SliceSystem {
            gm,
            degree,
            slice_unknowns,
            family_len: k,
            full,
            forms,
            family: family.to_vec(),
            affine: affine.cloned(),
        })
    }

    /// Form and constant of c(args)[comp]; zero when any argument is the
    /// identity (normalization).
    fn form_at(&self, args: &[Elt], comp: usize) -> (Option<&[u8]>, u64) {
        match self.full.code(args) {
            None => (None, 0),
            Some(idx) => {
                let (row, c) = self.forms.row(idx * self.gm.rank() + comp);
                (Some(row), c)
            }
        }
    }

    /// Constraint rows at all generator-led tuples, in one accumulator with
    /// an affine column:
    ///   d c(s, tuple) - Σ λⱼ zⱼ(s, tuple) - affine(s, tuple) = 0.
    fn assemble(&self, limits: &Limits) -> Result<LambdaMatrix> {
        let gm = &self.gm;
        let n = gm.modulus();
        let rank = gm.rank();
        let width = self.width();
        let cols = width + 1;
        let ngens = gm.group.generators().len();
        // one constraint tuple is (generator, degree-length nonidentity tuple)
        let rows = ngens as u128
            * ((gm.group.order() - 1) as u128).pow(self.degree as u32)
            * rank as u128;
        limits.check_system(cols as u128, rows, "generator-led constraints")?;
        let mut acc = HowellAccumulator::new(n, cols);
        {
            let d = gm.module.orders();
            let mut row = vec![0u64; cols];
            for u in 0..self.slice_unknowns {
                let comp = u % rank;
                if d[comp] != n {
                    row.iter_mut().for_each(|v| *v = 0);
                    row[u] = d[comp] % n;
                    acc.insert(&row);
                }
            }
        }
        let sact: Vec<Vec<Vec<u64>>> = gm
            .group
            .generators()
            .iter()
            .map(|&s| scaled_action(gm, s))
            .collect();
        let k = self.degree;
        let tuples = TupleIndex::new(gm.group.order(), k);
        let mut scratch = vec![0i64; cols];
        let mut row = vec![0u64; cols];
        for (gi, &s) in gm.group.generators().iter().enumerate() {
            for fc in tuples.iter() {
                let tuple = tuples.decode(fc);
                for comp in 0..rank {
                    scratch.iter_mut().for_each(|v| *v = 0);
                    {
                        let mut add_form = |args: &[Elt], weight: i64, comp: usize| {
                            let (f, c) = self.form_at(args, comp);
                            if let Some(f) = f {
                                for (u, &fu) in f.iter().enumerate() {
                                    if fu != 0 {
                                        scratch[u] += weight * fu as i64;
                                    }
                                }
                            }
                            if c != 0 {
                                scratch[width] += weight * c as i64;
                            }
                        };
                        for j in 0..rank {
                            let cf = sact[gi][comp][j] as i64;
                            if cf != 0 {
                                add_form(&tuple, cf, j);
                            }
                        }
                        let mut t = tuple.clone();
                        t[0] = gm.group.mul(s, t[0]);
                        add_form(&t, -1, comp);
                        let mut sign = 1i64;
                        for m in 0..k - 1 {
                            let mut t = Vec::with_capacity(k);
                            t.push(s);
                            t.extend_from_slice(&tuple[..m]);
                            t.push(gm.group.mul(tuple[m], tuple[m + 1]));
                            t.extend_from_slice(&tuple[m + 2..]);
                            add_form(&t, sign, comp);
                            sign = -sign;
                        }
                        let mut t = Vec::with_capacity(k);
                        t.push(s);
                        t.extend_from_slice(&tuple[..k - 1]);
                        add_form(&t, sign, comp);
                    }
                    let mut zargs = Vec::with_capacity(k + 1);
                    zargs.push(s);
                    zargs.extend_from_slice(&tuple);
                    for (j, zj) in self.family.iter().enumerate() {
                        let zv = scale_in(&gm.module, &zj.eval(&zargs));
                        if zv[comp] != 0 {
                            scratch[self.slice_unknowns + j] -= zv[comp] as i64;
                        }
                    }
                    if let Some(z) = &self.affine {
                        let zv = scale_in(&gm.module, &z.eval(&zargs));
                        if zv[comp] != 0 {
                            scratch[width] -= zv[comp] as i64;
                        }
                    }
                    let mut nonzero = false;
                    for (u, &v) in scratch.iter().enumerate() {
                        let vv = v.rem_euclid(n as i64) as u64;
                        row[u] = vv;
                        nonzero |= vv != 0;
                    }
                    if nonzero {
                        acc.insert(&row);
                    }
                }
            }
        }
        Ok(acc.into_matrix())
    }

    /// The homogeneous constraint rows (over slices and family columns,
    /// plus the affine column at the end) at one generator-led tuple.
    fn constraint_rows_at(&self, gi: usize, tuple_code: usize) -> Vec<Vec<u64>> {
        let gm = &self.gm;
        let n = gm.modulus();
        let rank = gm.rank();
        let width = self.width();
        let k = self.degree;
        let tuples = TupleIndex::new(gm.group.order(), k);
        let tuple = tuples.decode(tuple_code);
        let s = gm.group.generators()[gi];
        let sact = scaled_action(gm, s);
        let mut out = Vec::with_capacity(rank);
        let mut scratch = vec![0i64; width + 1];
        for comp in 0..rank {
            scratch.iter_mut().for_each(|v| *v = 0);
            {
                let mut add_form = |args: &[Elt], weight: i64, comp: usize| {
                    let (f, c) = self.form_at(args, comp);
                    if let Some(f) = f {
                        for (u, &fu) in f.iter().enumerate() {
                            if fu != 0 {
                                scratch[u] += weight * fu as i64;
                            }
                        }
                    }
                    if c != 0 {
                        scratch[width] += weight * c as i64;
                    }
                };
                for j in 0..rank {
                    let cf = sact[comp][j] as i64;
                    if cf != 0 {
                        add_form(&tuple, cf, j);
                    }
                }
                let mut t = tuple.clone();
                t[0] = gm.group.mul(s, t[0]);
                add_form(&t, -1, comp);
                let mut sign = 1i64;
                for m in 0..k - 1 {
                    let mut t = Vec::with_capacity(k);
                    t.push(s);
                    t.extend_from_slice(&tuple[..m]);
                    t.push(gm.group.mul(tuple[m], tuple[m + 1]));
                    t.extend_from_slice(&tuple[m + 2..]);
                    add_form(&t, sign, comp);
                    sign = -sign;
                }
                let mut t = Vec::with_capacity(k);
                t.push(s);
                t.extend_from_slice(&tuple[..k - 1]);
                add_form(&t, sign, comp);
            }
            let mut zargs = Vec::with_capacity(k + 1);
            zargs.push(s);
            zargs.extend_from_slice(&tuple);
            for (j, zj) in self.family.iter().enumerate() {
                let zv = scale_in(&gm.module, &zj.eval(&zargs));
                if zv[comp] != 0 {
                    scratch[self.slice_unknowns + j] -= zv[comp] as i64;
                }
            }
            if let Some(z) = &self.affine {
                let zv = scale_in(&gm.module, &z.eval(&zargs));
                if zv[comp] != 0 {
                    scratch[width] -= zv[comp] as i64;
                }
            }
            out.push(
                scratch
                    .iter()
                    .map(|&v| v.rem_euclid(n as i64) as u64)
                    .collect(),
            );
        }
        out
    }

    /// Materialize a dense cochain from a joint solution vector.
    fn materialize(&self, solution: &[u64]) -> Cochain {
        debug_assert_eq!(solution.len(), self.width());
        let gm = Arc::clone(&self.gm);
        let order = gm.group.order() as usize;
        let rank = gm.rank();
        let n = gm.modulus();
        let total = order.pow(self.degree as u32);
        let mut data = vec![0u64; total * rank];
        for flat in 0..total {
            let mut args = vec![0 as Elt; self.degree];
            let mut rest = flat;
            for i in (0..self.degree).rev() {
                args[i] = (rest % order) as Elt;
                rest /= order;
            }
            if args.iter().any(|&a| a == 0) {
                continue;
            }
            let mut v = vec![0u64; rank];
            for (comp, vi) in v.iter_mut().enumerate() {
                let (form, c) = self.form_at(&args, comp);
                let mut acc: u128 = c as u128;
                if let Some(form) = form {
                    for (u, &fu) in form.iter().enumerate() {
                        if fu != 0 {
                            acc += fu as u128 * solution[u] as u128;
                        }
                    }
                }
                *vi = (acc % n as u128) as u64;
            }
            let out = scale_out(&gm.module, &v);
            data[flat * rank..(flat + 1) * rank].copy_from_slice(&out);
        }
        Cochain::from_dense(gm, self.degree, data)
    }
}

/// Basis of the normalized cocycle space Z̃^k as dense cochains.
///
/// For wide systems the full generator-led constraint family is highly
/// redundant, so a strided subsample is eliminated first and every
/// candidate basis cochain is then verified against d f = 0 on all
/// generator-led tuples by direct evaluation; violated tuples feed their
/// constraint rows back in and the loop repeats. The result is exact.
pub fn cocycle_space(gm: Arc<GModule>, degree: usize, limits: &Limits) -> Result<Vec<Cochain>> {
    debug_assert!((1..=3).contains(&degree));
    if gm.group.order() == 1 || gm.rank() == 0 {
        return Ok(vec![]);
    }
    let sys = SliceSystem::build(Arc::clone(&gm), degree, &[], None, limits)?;
    let width = sys.slice_unknowns;
    let rank = gm.rank();
    let ngens = gm.group.generators().len();
    let total_rows =
        ngens as u128 * ((gm.group.order() - 1) as u128).pow(degree as u32) * rank as u128;
    let cheap = total_rows.saturating_mul((width as u128).pow(2)) <= 2_000_000_000;
    if cheap {
        let constraints = strip_affine_column(sys.assemble(limits)?);
        let kernel = crate::linalg::kernel(&constraints);
        let mut basis = Vec::new();
        for r in 0..kernel.basis.rows() {
            basis.push(sys.materialize(&kernel.basis.row(r)));
        }
        return Ok(basis);
    }
    // sampled elimination with a verified repair loop
    let n = gm.modulus();
    let tuples = TupleIndex::new(gm.group.order(), degree);
    let target_rows = (4 * width).max(64);
    let stride = ((tuples.count * ngens) / target_rows).max(1);
    let mut acc = HowellAccumulator::new(n, width);
    {
        let d = gm.module.orders();
        let mut row = vec![0u64; width];
        for u in 0..sys.slice_unknowns {
            let comp = u % rank;
            if d[comp] != n {
                row.iter_mut().for_each(|v| *v = 0);
                row[u] = d[comp] % n;
                acc.insert(&row);
            }
        }
    }
    let mut inserted: Vec<(usize, usize)> = Vec::new();
    for flat in (0..tuples.count * ngens).step_by(stride) {
        inserted.push((flat / tuples.count, flat % tuples.count));
    }
    for &(gi, tc) in &inserted {
        for row in sys.constraint_rows_at(gi, tc) {
            acc.insert(&row[..width]);
        }
    }
    loop {
        let constraints = acc.into_matrix();
        let kernel = crate::linalg::kernel(&constraints);
        let mut basis = Vec::new();
        for r in 0..kernel.basis.rows() {
            basis.push(sys.materialize(&kernel.basis.row(r)));
        }
        // verify df = 0 on every generator-led tuple by evaluation
        let mut violations: Vec<(usize, usize)> = Vec::new();
        'verify: for (gi, &s) in gm.group.generators().iter().enumerate() {
            for tc in tuples.iter() {
                let tuple = tuples.decode(tc);
                let mut args = Vec::with_capacity(degree + 1);
                args.push(s);
                args.extend_from_slice(&tuple);
                for f in &basis {
                    let v = f.coboundary().eval(&args);
                    if v.iter().any(|&x| x != 0) {
                        violations.push((gi, tc));
                        if violations.len() > 4 * width {
                            break 'verify;
                        }
                        break;
                    }
                }
            }
        }
        if violations.is_empty() {
            return Ok(basis);
        }
        let mut acc2 = HowellAccumulator::new(n, width);
        for r in 0..constraints.rows() {
            acc2.insert(&constraints.row(r));
        }
        for &(gi, tc) in &violations {
            for row in sys.constraint_rows_at(gi, tc) {
                acc2.insert(&row[..width]);
            }
        }
        acc = acc2;
    }
}

/// Drop the (identically zero) affine column of a homogeneous assembly.
fn strip_affine_column(m: LambdaMatrix) -> LambdaMatrix {
    let cols = m.cols() - 1;
    let rows: Vec<Vec<u64>> = (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            debug_assert_eq!(row[cols], 0, "homogeneous system grew a constant");
            row[..cols].to_vec()
        })
        .collect();
    LambdaMatrix::from_rows(m.modulus(), cols, &rows)
}

/// Extract a solution of the affine system from the kernel of the
/// accumulated [A | c] rows: each row encodes A·x + c = 0, so a solution is
/// a kernel element whose homogenizing coordinate is +1.
pub fn affine_solution(constraints: LambdaMatrix, k: usize) -> Result<Option<Vec<u64>>> {
    let n = constraints.modulus();
    let kernel = crate::linalg::kernel(&constraints).basis;
    if kernel.rows() == 0 {
        return Ok(None);
    }
    let a = LambdaMatrix::from_rows(n, kernel.rows(), &[(0..kernel.rows())
        .map(|r| kernel.get(r, k))
        .collect::<Vec<u64>>()]);
    let want = vec![1 % n];
    match crate::linalg::solve(&a, &want)?.particular {
        Some(y) => {
            let mut x = vec![0u64; k];
            for (r, &yr) in y.iter().enumerate() {
                if yr == 0 {
                    continue;
                }
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = (*xj as u128 + yr as u128 * kernel.get(r, j) as u128)
                        .rem_euclid(n as u128) as u64;
                }
            }
            Ok(Some(x))
        }
        None => Ok(None),
    }
}

pub(crate) fn solve_degree1_coboundary(gm: &GModule, z: &Cochain) -> Result<CoboundaryAnswer> {
    // z(g) = g·m - m, checked on generators (both sides are 1-cocycles)
    let n = gm.modulus();
    let rank = gm.rank();
    if rank == 0 {
        return Ok(CoboundaryAnswer::Primitive(Cochain::constant(
            Arc::new(gm.clone()),
            vec![],
        )));
    }
    let mut acc = HowellAccumulator::new(n, rank + 1);
    let mut row = vec![0u64; rank + 1];
    for &s in gm.group.generators() {
        let m = scaled_action(gm, s);
        for i in 0..rank {
            row.iter_mut().for_each(|v| *v = 0);
            for j in 0..rank {
                let mut c = m[i][j] % n;
                if i == j {
                    c = (c + n - 1) % n;
                }
                row[j] = c;
            }
            row[rank] = scale_in(&gm.module, &z.eval(&[s]))[i];
            acc.insert(&row);
        }
    }
    {
        let d = gm.module.orders();
        for (j, &dj) in d.iter().enumerate() {
            if dj != n {
                row.iter_mut().for_each(|v| *v = 0);
                row[j] = dj % n;
                acc.insert(&row);
            }
        }
    }
    match affine_solution(acc.into_matrix(), rank)? {
        Some(x) => {
            let m = scale_out(&gm.module, &x);
            Ok(CoboundaryAnswer::Primitive(Cochain::constant(
                Arc::new(gm.clone()),
                m,
            )))
        }
        None => Ok(CoboundaryAnswer::No {
            obstruction: "no invariant primitive exists".into(),
        }),
    }
}

fn require_normalized(z: &Cochain, what: &str) -> Result<()> {
    if !z.normalized {
        return Err(Error::invalid(format!(
            "{what} requires a normalized cocycle"
        )));
    }
    Ok(())
}

/// Exact degree-2 coboundary decision with primitive: solve db = z for a
/// normalized 1-cochain through its generator slices.
pub fn solve_degree2_coboundary(gm: &GModule, z: &Cochain) -> Result<CoboundaryAnswer> {
    require_normalized(z, "degree-2 coboundary solve")?;
    let limits = Limits::default();
    let gm_arc = Arc::new(gm.clone());
    let sys = SliceSystem::build(Arc::clone(&gm_arc), 1, &[], Some(z), &limits)?;
    let constraints = sys.assemble(&limits)?;
    match affine_solution(constraints, sys.width())? {
        Some(sol) => Ok(CoboundaryAnswer::Primitive(sys.materialize(&sol))),
        None => Ok(CoboundaryAnswer::No {
            obstruction: "the slice system for db = z is inconsistent".into(),
        }),
    }
}

/// Relations {λ : Σ λᵢ zᵢ ∈ B^deg}: kernel of the joint (slices, λ) system
/// projected onto the λ block.
pub fn coboundary_relations(gm: &GModule, zs: &[Cochain]) -> Result<LambdaMatrix> {
    let n = gm.modulus();
    let k = zs.len();
    if k == 0 {
        return Ok(LambdaMatrix::zeros(n, 0, 0));
    }
    let degree = zs[0].degree;
    debug_assert!(zs.iter().all(|z| z.degree == degree));
    let limits = Limits::default();
    let gm_arc = Arc::new(gm.clone());
    let sys = SliceSystem::build(Arc::clone(&gm_arc), degree - 1, zs, None, &limits)?;
    let constraints = strip_affine_column(sys.assemble(&limits)?);
    let kernel = crate::linalg::kernel(&constraints).basis;
    let u = sys.slice_unknowns;
    let rows: Vec<Vec<u64>> = (0..kernel.rows())
        .map(|r| (0..k).map(|j| kernel.get(r, u + j)).collect())
        .collect();
    Ok(LambdaMatrix::from_rows(n, k, &rows))
}

/// Solve Σ μⱼ wⱼ + db = z: returns μ when the class of z lies in the span.
pub fn reduce_into_basis(gm: &GModule, ws: &[Cochain], z: &Cochain) -> Result<Option<Vec<u64>>> {
    require_normalized(z, "basis reduction")?;
    let n = gm.modulus();
    let degree = z.degree;
    let limits = Limits::default();
    let gm_arc = Arc::new(gm.clone());
    // system: db = Σ λⱼ wⱼ + z, so μ = -λ
    let sys = SliceSystem::build(Arc::clone(&gm_arc), degree - 1, ws, Some(z), &limits)?;
    let constraints = sys.assemble(&limits)?;
    match affine_solution(constraints, sys.width())? {
        Some(sol) => {
            let u = sys.slice_unknowns;
            Ok(Some(
                (0..ws.len()).map(|j| (n - sol[u + j] % n) % n).collect(),
            ))
        }
        None => Ok(None),
    }
}

/// Solve dc = z for a normalized 2-cochain c (z a degree-3 cocycle).
pub fn solve_degree3_coboundary(
    gm: &GModule,
    z: &Cochain,
    limits: &Limits,
) -> Result<CoboundaryAnswer> {
    require_normalized(z, "degree-3 coboundary solve")?;
    let gm_arc = Arc::new(gm.clone());
    let sys = SliceSystem::build(Arc::clone(&gm_arc), 2, &[], Some(z), limits)?;
    let constraints = sys.assemble(limits)?;
    match affine_solution(constraints, sys.width())? {
        Some(sol) => Ok(CoboundaryAnswer::Primitive(sys.materialize(&sol))),
        None => Ok(CoboundaryAnswer::No {
            obstruction: "the affine slice system for dc = z is inconsistent".into(),
        }),
    }
}

/// Raw coordinates of z over a cocycle basis: μ with z ≡ Σ μ zᵢ mod B.
pub(crate) fn raw_coords(
    gm: &GModule,
    z_basis: &[Cochain],
    z: &Cochain,
) -> Result<Option<Vec<u64>>> {
    if z.degree == 1 {
        // degree-1 primitives are constants; small dedicated system over
        // (ν, m): Σ ν zᵢ(s) + (s-1)m - z(s) = 0 on generators
        let n = gm.modulus();
        let rank = gm.rank();
        let k = z_basis.len();
        let mut acc = HowellAccumulator::new(n, k + rank + 1);
        let mut row = vec![0u64; k + rank + 1];
        for &s in gm.group.generators() {
            let act = scaled_action(gm, s);
            for i in 0..rank {
                row.iter_mut().for_each(|v| *v = 0);
                for (zi, zb) in z_basis.iter().enumerate() {
                    row[zi] = scale_in(&gm.module, &zb.eval(&[s]))[i];
                }
                for j in 0..rank {
                    let mut c = act[i][j] % n;
                    if i == j {
                        c = (c + n - 1) % n;
                    }
                    row[k + j] = c;
                }
                // const column -z(s): the row encodes Σ ν zᵢ + dm - z = 0
                let zv = scale_in(&gm.module, &z.eval(&[s]))[i];
                row[k + rank] = (n - zv % n) % n;
                acc.insert(&row);
            }
        }
        {
            let d = gm.module.orders();
            for (j, &dj) in d.iter().enumerate() {
                if dj != n {
                    row.iter_mut().for_each(|v| *v = 0);
                    row[k + j] = dj % n;
                    acc.insert(&row);
                }
            }
        }
        return Ok(affine_solution(acc.into_matrix(), k + rank)?.map(|x| x[..k].to_vec()));
    }
    reduce_into_basis(gm, z_basis, z)
}

/// Generic cohomology: cocycle space by slices, coboundary relations by the
/// joint solver, quotient via the relation lattice.
pub(crate) fn cohomology_generic(
    gm: &GModule,
    degree: usize,
    limits: &Limits,
) -> Result<CohomologyTheory> {
    let gm_arc = Arc::new(gm.clone());
    let n = gm.modulus();
    // resource prediction in bar-complex currency: |G|^(i+1)·dim M
    let cost = (gm.group.order() as u128).pow(degree as u32 + 1) * gm.rank().max(1) as u128;
    if degree >= 1 {
        limits.check_system(1, cost, "generic cohomology bar cost")?;
    }
    if degree == 0 {
        let inv = gm.invariants();
        let reps: Vec<Cochain> = (0..inv.basis.rows())
            .map(|r| Cochain::constant(Arc::clone(&gm_arc), inv.basis.row(r)))
            .collect();
        return Ok(CohomologyTheory {
            gm: gm_arc,
            degree,
            cohomology: inv.module.clone(),
            reps,
            kind: TheoryKind::GenericH0 { basis: inv.basis },
        });
    }
    let z_basis = cocycle_space(Arc::clone(&gm_arc), degree, limits)?;
    let k = z_basis.len();
    let relations: Vec<Vec<u64>> = if degree == 1 {
        // B¹ = {dm}: Σ λ zᵢ(s) = (s-1)m on generators
        let rank = gm.rank();
        let mut rows = Vec::new();
        for &s in gm.group.generators() {
            let act = scaled_action(gm, s);
            for i in 0..rank {
                let mut row = vec![0u64; k + rank];
                for (zi, zb) in z_basis.iter().enumerate() {
                    row[zi] = scale_in(&gm.module, &zb.eval(&[s]))[i];
                }
                for j in 0..rank {
                    let mut c = act[i][j] % n;
                    if i == j {
                        c = (c + n - 1) % n;
                    }
                    row[k + j] = (n - c) % n;
                }
                rows.push(row);
            }
        }
        for (j, &d) in gm.module.orders().iter().enumerate() {
            if d != n {
                let mut row = vec![0u64; k + rank];
                row[k + j] = d % n;
                rows.push(row);
            }
        }
        let a = LambdaMatrix::from_rows(n, k + rank, &rows);
        let ker = crate::linalg::kernel(&a).basis;
        (0..ker.rows())
            .map(|r| (0..k).map(|j| ker.get(r, j)).collect())
            .collect()
    } else {
        coboundary_relations(gm, &z_basis)?.to_row_vecs()
    };
    let h = LambdaModule::from_relations(n, k, &relations);
    let mut reps = Vec::new();
    for c in 0..h.rank() {
        let mut e = vec![0u64; h.rank()];
        e[c] = 1;
        let lam = h.lift(&e)?;
        let mut rep = Cochain::zero(Arc::clone(&gm_arc), degree);
        for (i, &li) in lam.iter().enumerate() {
            if li != 0 {
                rep = rep.add(&z_basis[i].scale(li));
            }
        }
        reps.push(rep.densify()?);
    }
    Ok(CohomologyTheory {
        gm: gm_arc,
        degree,
        cohomology: h,
        reps,
        kind: TheoryKind::Generic { z_basis },
    })
}

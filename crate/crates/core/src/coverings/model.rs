//! The covering data structure, its verification report, and the
//! reconstruction of the source curve.

use serde::{Deserialize, Serialize};

use crate::curves::{BranchRef, Component, CurveModel, SingularPoint};
use crate::error::{Error, Result};
use crate::fpgroups::{Elt, FiniteGroup};

/// Connected Galois cover of a single smooth component, recorded abstractly
/// by its deck group and the monodromy images of the component generators
/// (2g surface generators, then p-1 puncture loops). Fibers over marked
/// points are labeled by deck elements relative to the base sheet.
#[derive(Debug, Clone)]
pub struct SmoothCoverDatum {
    pub deck: FiniteGroup,
    pub monodromy: Vec<Elt>,
    pub connected: bool,
}

impl SmoothCoverDatum {
    pub fn new(deck: FiniteGroup, monodromy: Vec<Elt>) -> Self {
        // connected iff the images generate the deck group
        let gens_group = deck.with_generators(monodromy.clone());
        let connected = gens_group.bfs_words().is_ok();
        SmoothCoverDatum {
            deck,
            monodromy,
            connected,
        }
    }

    pub fn trivial_cover() -> Self {
        SmoothCoverDatum {
            deck: FiniteGroup::trivial(),
            monodromy: vec![],
            connected: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub degree: usize,
    pub aut_order: u64,
    pub connected: bool,
    pub checks: Vec<CheckResult>,
}

impl CoveringReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Source curve of a covering together with the structure maps.
#[derive(Debug, Clone)]
pub struct SourceModel {
    pub curve: CurveModel,
    /// source component -> target component
    pub comp_map: Vec<usize>,
    /// sheet count of each source component over its target component
    pub comp_degree: Vec<usize>,
    /// source singular point -> target singular point
    pub sing_map: Vec<usize>,
    /// source component -> its sheet set (sorted)
    pub comp_sheets: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct CoveringModel {
    pub target: CurveModel,
    pub degree: usize,
    /// monodromy[j][k]: sheet permutation of the k-th local generator of
    /// component j (surface pairs a₁,b₁,…,a_g,b_g, then p-1 puncture loops)
    pub monodromy: Vec<Vec<Vec<u32>>>,
    /// attach[i][b][s]: point-copy id receiving branch position b, sheet s
    pub attach: Vec<Vec<Vec<u32>>>,
    pub aut: FiniteGroup,
    /// aut_sheets[σ][j]: action of automorphism σ on the sheets of comp j
    pub aut_sheets: Vec<Vec<Vec<u32>>>,
}

fn local_gen_count(c: &Component) -> usize {
    2 * c.genus as usize + (c.punctures as usize).saturating_sub(1)
}

impl CoveringModel {
    pub fn identity(target: &CurveModel) -> Self {
        let monodromy = target
            .components
            .iter()
            .map(|c| vec![vec![0u32]; local_gen_count(c)])
            .collect();
        let attach = target
            .singular
            .iter()
            .map(|s| vec![vec![0u32]; s.branches.len()])
            .collect();
        CoveringModel {
            target: target.clone(),
            degree: 1,
            monodromy,
            attach,
            aut: FiniteGroup::trivial(),
            aut_sheets: vec![target.components.iter().map(|_| vec![0u32]).collect()],
        }
    }

    /// Swap which copies two sheets of one branch attach to. The column
    /// stays a bijection, so this corrupts the gluing pattern (typically
    /// disconnecting the source or shearing the deck action) rather than
    /// the branch counts. Used by the falsifiability tests.
    pub fn corrupt_swap(&mut self, sing: usize, branch: usize, s1: usize, s2: usize) {
        self.attach[sing][branch].swap(s1, s2);
    }

    /// Redirect one branch sheet into a chosen copy. This double-books the
    /// copy and breaks the étale branch-bijectivity check.
    pub fn corrupt_redirect(&mut self, sing: usize, branch: usize, sheet: usize, copy: u32) {
        self.attach[sing][branch][sheet] = copy;
    }

    /// All combinatorial covering checks, reported rather than raised.
    pub fn verify(&self) -> CoveringReport {
        let mut checks = Vec::new();
        let d = self.degree;
        let mut ok;

        // shape and bijectivity of all permutations
        ok = true;
        let mut detail = String::new();
        for (j, comp) in self.target.components.iter().enumerate() {
            if self.monodromy[j].len() != local_gen_count(comp) {
                ok = false;
                detail = format!("component '{}': generator count mismatch", comp.id);
                break;
            }
            for p in &self.monodromy[j] {
                if !is_permutation(p, d) {
                    ok = false;
                    detail = format!("component '{}': monodromy is not a permutation", comp.id);
                    break;
                }
            }
        }
        checks.push(CheckResult {
            name: "constant-degree".into(),
            pass: ok,
            detail: if ok {
                format!("every component carries {d} sheets")
            } else {
                detail
            },
        });

        // étale condition: each point copy gets exactly one sheet per branch
        let mut etale_ok = true;
        let mut etale_detail = String::new();
        for (i, s) in self.target.singular.iter().enumerate() {
            let nb = s.branches.len();
            if self.attach[i].len() != nb || self.attach[i].iter().any(|a| a.len() != d) {
                etale_ok = false;
                etale_detail = format!("singular point #{i}: attachment table shape mismatch");
                break;
            }
            let mut per_copy: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
            for (b, col) in self.attach[i].iter().enumerate() {
                for &copy in col {
                    per_copy.entry(copy).or_default().push(b);
                }
            }
            if per_copy.len() != d {
                etale_ok = false;
                etale_detail = format!(
                    "singular point #{i}: {} copies instead of {d}",
                    per_copy.len()
                );
                break;
            }
            for (copy, branches) in &per_copy {
                let mut sorted = branches.clone();
                sorted.sort_unstable();
                if sorted != (0..nb).collect::<Vec<_>>() {
                    etale_ok = false;
                    etale_detail = format!(
                        "singular point #{i}, copy {copy}: branch multiset {sorted:?} is not \
                         a bijection onto the {nb} branches"
                    );
                    break;
                }
            }
            if !etale_ok {
                break;
            }
        }
        checks.push(CheckResult {
            name: "etale-branch-bijectivity".into(),
            pass: etale_ok,
            detail: if etale_ok {
                "every point copy meets each branch exactly once".into()
            } else {
                etale_detail
            },
        });

        // connectivity of the source
        let connected = etale_ok && self.source_connected();
        checks.push(CheckResult {
            name: "source-connected".into(),
            pass: connected,
            detail: if connected {
                "source is connected".into()
            } else {
                "source is disconnected".into()
            },
        });

        // Galois: |Aut| = degree, free transitive on the root fiber,
        // commuting with monodromy, preserving attachments
        let mut galois_ok = self.aut.order() as usize == d
            && self.aut_sheets.len() == d
            && self
                .aut_sheets
                .iter()
                .all(|per| per.len() == self.target.components.len());
        let mut galois_detail = String::new();
        if !galois_ok {
            galois_detail = format!("|Aut| = {} but degree = {d}", self.aut.order());
        }
        if galois_ok {
            // free transitivity on the root fiber
            let mut hit = vec![false; d];
            for sigma in 0..d {
                let img = self.aut_sheets[sigma][0][0] as usize;
                if hit[img] {
                    galois_ok = false;
                    galois_detail = "automorphism orbit of the base sheet is not free".into();
                    break;
                }
                hit[img] = true;
            }
            if galois_ok && hit.iter().any(|&h| !h) {
                galois_ok = false;
                galois_detail = "automorphisms are not transitive on the root fiber".into();
            }
        }
        if galois_ok {
            'outer: for sigma in 0..d {
                for (j, perms) in self.monodromy.iter().enumerate() {
                    let a = &self.aut_sheets[sigma][j];
                    if !is_permutation(a, d) {
                        galois_ok = false;
                        galois_detail = "automorphism action is not a permutation".into();
                        break 'outer;
                    }
                    for p in perms {
                        for s in 0..d {
                            if a[p[s] as usize] != p[a[s] as usize] as u32 {
                                galois_ok = false;
                                galois_detail = format!(
                                    "automorphism {sigma} does not commute with monodromy on \
                                     component {j}"
                                );
                                break 'outer;
                            }
                        }
                    }
                }
                // attachments must be permuted consistently
                for (i, s) in self.target.singular.iter().enumerate() {
                    // copy -> copy map induced on branch 0 must work for all
                    let mut copy_map: std::collections::BTreeMap<u32, u32> = Default::default();
                    for (b, br) in s.branches.iter().enumerate() {
                        let a = &self.aut_sheets[sigma][br.component];
                        for sh in 0..d {
                            let from = self.attach[i][b][sh];
                            let to = self.attach[i][b][a[sh] as usize];
                            match copy_map.entry(from) {
                                std::collections::btree_map::Entry::Vacant(v) => {
                                    v.insert(to);
                                }
                                std::collections::btree_map::Entry::Occupied(o) => {
                                    if *o.get() != to {
                                        galois_ok = false;
                                        galois_detail = format!(
                                            "automorphism {sigma} shears singular point #{i}"
                                        );
                                        break 'outer;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        checks.push(CheckResult {
            name: "galois-free-transitive".into(),
            pass: galois_ok,
            detail: if galois_ok {
                format!("Aut of order {d} acts freely and transitively")
            } else {
                galois_detail
            },
        });

        // Euler characteristic multiplicativity
        let chi_ok = if etale_ok && connected {
            match self.source_model() {
                Ok(src) => {
                    let chi_src = src.curve.euler_characteristic();
                    let chi_tgt = self.target.euler_characteristic();
                    let pass = chi_src == d as i64 * chi_tgt;
                    checks.push(CheckResult {
                        name: "euler-multiplicativity".into(),
                        pass,
                        detail: format!("χ(source) = {chi_src}, degree·χ(target) = {}", d as i64 * chi_tgt),
                    });
                    pass
                }
                Err(e) => {
                    checks.push(CheckResult {
                        name: "euler-multiplicativity".into(),
                        pass: false,
                        detail: format!("source reconstruction failed: {e}"),
                    });
                    false
                }
            }
        } else {
            checks.push(CheckResult {
                name: "euler-multiplicativity".into(),
                pass: false,
                detail: "skipped: earlier checks failed".into(),
            });
            false
        };
        let _ = chi_ok;

        CoveringReport {
            degree: d,
            aut_order: self.aut.order(),
            connected,
            checks,
        }
    }

    fn source_nodes(&self) -> (Vec<usize>, Vec<usize>, usize) {
        // union-find node layout: component sheets first, then point copies
        let nc = self.target.components.len();
        let mut comp_off = vec![0usize; nc];
        let mut off = 0;
        for (j, o) in comp_off.iter_mut().enumerate() {
            let _ = j;
            *o = off;
            off += self.degree;
        }
        let mut sing_off = vec![0usize; self.target.singular.len()];
        for (i, o) in sing_off.iter_mut().enumerate() {
            let _ = i;
            *o = off;
            off += self.degree;
        }
        (comp_off, sing_off, off)
    }

    fn union_structure(&self) -> Vec<usize> {
        let (comp_off, sing_off, total) = self.source_nodes();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        fn union(p: &mut Vec<usize>, a: usize, b: usize) {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                let (keep, kill) = if ra < rb { (ra, rb) } else { (rb, ra) };
                p[kill] = keep;
            }
        }
        for (j, perms) in self.monodromy.iter().enumerate() {
            for p in perms {
                for s in 0..self.degree {
                    union(&mut parent, comp_off[j] + s, comp_off[j] + p[s] as usize);
                }
            }
        }
        for (i, sp) in self.target.singular.iter().enumerate() {
            for (b, br) in sp.branches.iter().enumerate() {
                for s in 0..self.degree {
                    let copy = self.attach[i][b][s] as usize;
                    union(&mut parent, sing_off[i] + copy, comp_off[br.component] + s);
                }
            }
        }
        let mut roots = Vec::with_capacity(total);
        for x in 0..total {
            let r = find(&mut parent, x);
            roots.push(r);
        }
        roots
    }

    pub fn source_connected(&self) -> bool {
        let roots = self.union_structure();
        let mut uniq: Vec<usize> = roots.clone();
        uniq.sort_unstable();
        uniq.dedup();
        uniq.len() == 1
    }

    /// Permutation of the puncture loop number t (0-based) of component j,
    /// including the implicit last loop (inverse of the boundary word).
    fn puncture_perm(&self, j: usize, t: usize) -> Vec<u32> {
        let c = &self.target.components[j];
        let p = c.punctures as usize;
        debug_assert!(p > 0 && t < p);
        let g = c.genus as usize;
        if t + 1 < p {
            return self.monodromy[j][2 * g + t].clone();
        }
        // last loop: inverse of Π[aᵢ,bᵢ]·c₁⋯c_{p-1}
        let d = self.degree;
        let mut acc: Vec<u32> = (0..d as u32).collect();
        let compose = |acc: &[u32], p: &[u32]| -> Vec<u32> {
            acc.iter().map(|&x| p[x as usize]).collect()
        };
        let invert = |p: &[u32]| -> Vec<u32> {
            let mut q = vec![0u32; p.len()];
            for (i, &v) in p.iter().enumerate() {
                q[v as usize] = i as u32;
            }
            q
        };
        for h in 0..g {
            let a = &self.monodromy[j][2 * h];
            let b = &self.monodromy[j][2 * h + 1];
            acc = compose(&acc, a);
            acc = compose(&acc, b);
            acc = compose(&acc, &invert(a));
            acc = compose(&acc, &invert(b));
        }
        for s in 0..(p - 1) {
            acc = compose(&acc, &self.monodromy[j][2 * g + s]);
        }
        invert(&acc)
    }

    /// Rebuild the source curve and the structure maps.
    pub fn source_model(&self) -> Result<SourceModel> {
        let roots = self.union_structure();
        let (comp_off, sing_off, _) = self.source_nodes();
        let d = self.degree;
        // source components: orbits of the component monodromy subgroups
        let mut src_comps: Vec<Component> = Vec::new();
        let mut comp_map = Vec::new();
        let mut comp_degree = Vec::new();
        let mut comp_sheets: Vec<Vec<u32>> = Vec::new();
        // (target comp, sheet) -> source comp index
        let mut comp_of_sheet = vec![vec![usize::MAX; d]; self.target.components.len()];
        for (j, c) in self.target.components.iter().enumerate() {
            // orbits under the subgroup generated by this component's perms
            let inverses: Vec<Vec<u32>> = self.monodromy[j]
                .iter()
                .map(|p| {
                    let mut inv = vec![0u32; d];
                    for (i, &v) in p.iter().enumerate() {
                        inv[v as usize] = i as u32;
                    }
                    inv
                })
                .collect();
            let mut orbit_id = vec![usize::MAX; d];
            for s in 0..d {
                if orbit_id[s] != usize::MAX {
                    continue;
                }
                let this = src_comps.len();
                let mut stack = vec![s];
                let mut members = vec![];
                orbit_id[s] = this;
                while let Some(x) = stack.pop() {
                    members.push(x as u32);
                    for (p, pinv) in self.monodromy[j].iter().zip(inverses.iter()) {
                        for y in [p[x] as usize, pinv[x] as usize] {
                            if orbit_id[y] == usize::MAX {
                                orbit_id[y] = this;
                                stack.push(y);
                            }
                        }
                    }
                }
                members.sort_unstable();
                let e = members.len();
                // punctures upstairs: cycles of each puncture loop
                let p_count = c.punctures as usize;
                let mut punctures_up = 0u64;
                for t in 0..p_count {
                    let perm = self.puncture_perm(j, t);
                    let mut seen: std::collections::BTreeSet<u32> = Default::default();
                    for &m in &members {
                        if seen.contains(&m) {
                            continue;
                        }
                        let mut x = m;
                        loop {
                            seen.insert(x);
                            x = perm[x as usize];
                            if x == m {
                                break;
                            }
                        }
                        punctures_up += 1;
                    }
                }
                // genus from the Euler characteristic of the open surface
                let chi_piece = e as i64 * (2 - 2 * c.genus as i64 - c.punctures as i64)
                    + punctures_up as i64;
                // chi_piece = 2 - 2g'  (as a closed surface with punctures_up
                // points put back)
                if (2 - chi_piece) % 2 != 0 {
                    return Err(Error::verification(
                        "covering-genus-integrality",
                        format!("component '{}' lift has non-integer genus", c.id),
                    ));
                }
                let g_up = (2 - chi_piece) / 2;
                if g_up < 0 {
                    return Err(Error::verification(
                        "covering-genus-nonnegative",
                        format!("component '{}' lift has negative genus", c.id),
                    ));
                }
                src_comps.push(Component {
                    id: format!("{}#{}", c.id, this),
                    genus: g_up as u64,
                    punctures: punctures_up,
                    marked: Vec::new(),
                });
                comp_map.push(j);
                comp_degree.push(e);
                comp_sheets.push(members);
            }
            for s in 0..d {
                comp_of_sheet[j][s] = orbit_id[s];
            }
        }
        // source singular points: copies, with synthesized marked points
        let mut src_sing = Vec::new();
        let mut sing_map = Vec::new();
        for (i, sp) in self.target.singular.iter().enumerate() {
            let _ = sing_off;
            let _ = comp_off;
            let _ = &roots;
            for copy in 0..d as u32 {
                let mut branches = Vec::new();
                for (b, br) in sp.branches.iter().enumerate() {
                    for s in 0..d {
                        if self.attach[i][b][s] == copy {
                            let sc = comp_of_sheet[br.component][s];
                            let label = format!(
                                "{}#{}s{}",
                                self.target.components[br.component].marked[br.point], b, s
                            );
                            let point = src_comps[sc].marked.len();
                            src_comps[sc].marked.push(label);
                            branches.push(BranchRef {
                                component: sc,
                                point,
                            });
                        }
                    }
                }
                if branches.len() != sp.branches.len() {
                    return Err(Error::verification(
                        "covering-etale",
                        format!("singular point #{i}, copy {copy}: branch set not bijective"),
                    ));
                }
                src_sing.push(SingularPoint { branches });
                sing_map.push(i);
            }
        }
        let curve = CurveModel::new(src_comps, src_sing, self.target.base);
        curve.validate()?;
        Ok(SourceModel {
            curve,
            comp_map,
            comp_degree,
            sing_map,
            comp_sheets,
        })
    }
}

fn is_permutation(p: &[u32], d: usize) -> bool {
    if p.len() != d {
        return false;
    }
    let mut seen = vec![false; d];
    for &v in p {
        if v as usize >= d || seen[v as usize] {
            return false;
        }
        seen[v as usize] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_covering_verifies() {
        for curve in [
            CurveModel::nodal_cubic(),
            CurveModel::smooth_proper(2),
            CurveModel::two_tori_glued(2),
        ] {
            let cov = CoveringModel::identity(&curve);
            let rep = cov.verify();
            assert!(rep.all_pass(), "{:?}", rep.first_failure());
            let src = cov.source_model().unwrap();
            assert_eq!(src.curve.components.len(), curve.components.len());
            assert_eq!(
                src.curve.euler_characteristic(),
                curve.euler_characteristic()
            );
        }
    }
}

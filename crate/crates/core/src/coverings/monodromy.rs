//! Monodromy of a covering: the action of the fundamental group of the
//! target on the fiber over the base component, read off along the spanning
//! tree trivialization.

use super::model::CoveringModel;
use crate::error::{Error, Result};
use crate::fpgroups::{FiniteGroup, FiniteQuotient};
use crate::limits::Limits;

fn invert_col(col: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; col.len()];
    for (i, &v) in col.iter().enumerate() {
        inv[v as usize] = i as u32;
    }
    inv
}

/// The action of every generator of pi1(target) on the root fiber. Surface
/// generators act through the stored sheet permutations conjugated by tree
/// transport; a non-tree edge acts by running through its singular point.
pub fn monodromy_action(cov: &CoveringModel, limits: &Limits) -> Result<FiniteQuotient> {
    let report = cov.verify();
    if !report.all_pass() {
        return Err(Error::invalid(format!(
            "monodromy_action requires a verified covering: {}",
            report
                .first_failure()
                .map(|f| format!("{}: {}", f.name, f.detail))
                .unwrap_or_default()
        )));
    }
    let x = &cov.target;
    let pi1 = x.pi1_presentation()?;
    let d = cov.degree;
    let nc = x.components.len();

    // transport along the spanning tree: T[j] maps root sheets to sheets of
    // component j; C[si] maps root sheets to copies of singular point si
    let mut t: Vec<Option<Vec<u32>>> = vec![None; nc];
    let mut c_label: Vec<Option<Vec<u32>>> = vec![None; x.singular.len()];
    t[0] = Some((0..d as u32).collect());
    let mut progress = true;
    while progress {
        progress = false;
        for &(si, bi) in &pi1.layout.tree_edges {
            let comp = x.singular[si].branches[bi].component;
            match (&t[comp], &c_label[si]) {
                (Some(tc), None) => {
                    let col = &cov.attach[si][bi];
                    c_label[si] = Some(tc.iter().map(|&s| col[s as usize]).collect());
                    progress = true;
                }
                (None, Some(cl)) => {
                    let inv = invert_col(&cov.attach[si][bi]);
                    t[comp] = Some(cl.iter().map(|&k| inv[k as usize]).collect());
                    progress = true;
                }
                _ => {}
            }
        }
    }
    if t.iter().any(|x| x.is_none()) || c_label.iter().any(|x| x.is_none()) {
        return Err(Error::verification(
            "monodromy-tree-transport",
            "spanning tree transport did not reach every vertex",
        ));
    }
    let t: Vec<Vec<u32>> = t.into_iter().map(Option::unwrap).collect();
    let c_label: Vec<Vec<u32>> = c_label.into_iter().map(Option::unwrap).collect();

    // generator permutations on the root fiber, in presentation order
    let mut perms: Vec<Vec<u32>> = vec![Vec::new(); pi1.pres.ngens()];
    for (j, _) in x.components.iter().enumerate() {
        let tj = &t[j];
        let tj_inv = invert_col(tj);
        let mut local = Vec::new();
        for &(ai, bi) in &pi1.layout.handles[j] {
            local.push(ai);
            local.push(bi);
        }
        local.extend(pi1.layout.punctures[j].iter().copied());
        for (k, &gen_idx) in local.iter().enumerate() {
            let p = &cov.monodromy[j][k];
            perms[gen_idx] = (0..d)
                .map(|s| tj_inv[p[tj[s] as usize] as usize])
                .collect();
        }
    }
    for &(si, bi, gen_idx) in &pi1.layout.edge_gens {
        let comp = x.singular[si].branches[bi].component;
        let tc = &t[comp];
        let c_inv = invert_col(&c_label[si]);
        let col = &cov.attach[si][bi];
        perms[gen_idx] = (0..d)
            .map(|s| c_inv[col[tc[s] as usize] as usize])
            .collect();
    }

    let group = FiniteGroup::from_perms(d, &perms, limits.max_group_order)?;
    let images = group.generators().to_vec();
    let q = FiniteQuotient::new(pi1.pres.clone(), group.clone(), images)?;

    // transitivity must agree with connectivity, and for a Galois covering
    // the image is regular of order equal to the degree
    let transitive = {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(s) = stack.pop() {
            for p in &perms {
                let y = p[s] as usize;
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == d
    };
    if transitive != report.connected {
        return Err(Error::verification(
            "monodromy-transitivity",
            "transitivity of the action disagrees with source connectivity",
        ));
    }
    if report.connected && group.order() as usize != d {
        return Err(Error::verification(
            "monodromy-regular",
            format!(
                "Galois covering of degree {d} has monodromy image of order {}",
                group.order()
            ),
        ));
    }
    Ok(q)
}

/// Two quotients of the same presentation are isomorphic as marked
/// quotients when generator images correspond under a group isomorphism.
/// Decided by breadth-first construction of the correspondence.
pub fn marked_quotients_isomorphic(q1: &FiniteQuotient, q2: &FiniteQuotient) -> bool {
    if q1.presentation() != q2.presentation() {
        return false;
    }
    let (g1, g2) = (q1.group(), q2.group());
    if g1.order() != g2.order() {
        return false;
    }
    let mut map = vec![u64::MAX; g1.order() as usize];
    map[0] = 0;
    let mut queue = vec![0u64];
    let mut head = 0;
    let mut seen2 = vec![false; g2.order() as usize];
    seen2[0] = true;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for (i1, (&a, &b)) in q1.images().iter().zip(q2.images().iter()).enumerate() {
            let _ = i1;
            for (y1, y2) in [
                (g1.mul(x, a), g2.mul(map[x as usize], b)),
                (g1.mul(x, g1.inv(a)), g2.mul(map[x as usize], g2.inv(b))),
            ] {
                if map[y1 as usize] == u64::MAX {
                    if seen2[y2 as usize] {
                        return false; // not injective
                    }
                    map[y1 as usize] = y2;
                    seen2[y2 as usize] = true;
                    queue.push(y1);
                } else if map[y1 as usize] != y2 {
                    return false;
                }
            }
        }
    }
    // both generated by images, so full coverage means isomorphism
    map.iter().all(|&v| v != u64::MAX)
}

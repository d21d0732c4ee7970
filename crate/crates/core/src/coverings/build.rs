//! Construction of the covering families.

use super::model::{CoveringModel, SmoothCoverDatum};
use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::fpgroups::{mod_n_derived_quotient, Elt, FiniteGroup, FiniteQuotient, Presentation};
use crate::limits::Limits;

fn right_mult_perm(g: &FiniteGroup, by: Elt) -> Vec<u32> {
    (0..g.order()).map(|x| g.mul(x, by) as u32).collect()
}

fn left_mult_perm(g: &FiniteGroup, by: Elt) -> Vec<u32> {
    (0..g.order()).map(|x| g.mul(by, x) as u32).collect()
}

/// Lift a connected Galois cover of the normalization of an integral curve
/// through the singular points: base preimages are picked per branch
/// (element 0 unless overridden), their deck orbits are glued diagonally.
pub fn lift_irreducible(x: &CurveModel, datum: &SmoothCoverDatum) -> Result<CoveringModel> {
    let choices: Vec<Vec<Elt>> = x
        .singular
        .iter()
        .map(|s| vec![0; s.branches.len()])
        .collect();
    lift_irreducible_with_choices(x, datum, &choices)
}

/// Same construction with explicit base-preimage choices per branch. Any
/// choice yields the same verification report and the same monodromy image;
/// the invariant suite exercises this.
pub fn lift_irreducible_with_choices(
    x: &CurveModel,
    datum: &SmoothCoverDatum,
    choices: &[Vec<Elt>],
) -> Result<CoveringModel> {
    x.validate()?;
    if !x.is_integral() {
        return Err(Error::invalid(
            "lift_irreducible requires an integral curve (one component)",
        ));
    }
    if !datum.connected {
        return Err(Error::invalid(
            "lift_irreducible requires a connected cover of the normalization",
        ));
    }
    let c = &x.components[0];
    let need = 2 * c.genus as usize + (c.punctures as usize).saturating_sub(1);
    if datum.monodromy.len() != need {
        return Err(Error::invalid(format!(
            "smooth cover datum has {} monodromy images, component needs {need}",
            datum.monodromy.len()
        )));
    }
    let deck = &datum.deck;
    let d = deck.order() as usize;
    let monodromy = vec![datum
        .monodromy
        .iter()
        .map(|&m| right_mult_perm(deck, m))
        .collect::<Vec<_>>()];
    let mut attach = Vec::new();
    for (i, s) in x.singular.iter().enumerate() {
        let mut tables = Vec::new();
        for (b, _) in s.branches.iter().enumerate() {
            let t = choices
                .get(i)
                .and_then(|row| row.get(b))
                .copied()
                .unwrap_or(0);
            let tinv = deck.inv(t);
            // the copy labeled σ contains sheet σ·t_b of branch b
            let col: Vec<u32> = (0..d as u64)
                .map(|sheet| deck.mul(sheet, tinv) as u32)
                .collect();
            tables.push(col);
        }
        attach.push(tables);
    }
    let aut_sheets: Vec<Vec<Vec<u32>>> = (0..d as u64)
        .map(|sigma| vec![left_mult_perm(deck, sigma)])
        .collect();
    Ok(CoveringModel {
        target: x.clone(),
        degree: d,
        monodromy,
        attach,
        aut: deck.clone(),
        aut_sheets,
    })
}

/// The standalone curve of one component (its marked points kept, no
/// singular points).
pub fn component_curve(x: &CurveModel, c: usize) -> CurveModel {
    CurveModel::new(vec![x.components[c].clone()], vec![], x.base)
}

/// Extend a connected Galois cover of the component `c` to all of a
/// connected reducible curve: the other components are replaced by deg
/// translated copies, glued along the translated singular-point moduli.
pub fn extend_reducible(
    x: &CurveModel,
    c: usize,
    cover_c: &CoveringModel,
) -> Result<CoveringModel> {
    x.validate()?;
    if x.is_integral() {
        return Err(Error::invalid("extend_reducible requires a reducible curve"));
    }
    if c >= x.components.len() {
        return Err(Error::invalid("component index out of range"));
    }
    if cover_c.target.components.len() != 1
        || cover_c.target.components[0] != x.components[c]
    {
        return Err(Error::invalid(
            "cover_c must be a covering of the standalone component curve",
        ));
    }
    let rep = cover_c.verify();
    if !rep.all_pass() || !rep.connected {
        return Err(Error::invalid(format!(
            "cover_c must be connected étale Galois: {}",
            rep.first_failure().map(|f| f.detail.clone()).unwrap_or_default()
        )));
    }
    let deck = &cover_c.aut;
    let d = cover_c.degree;
    // orbit labeling of the fiber over each marked point of component c:
    // sigma corresponds to sheet sigma(base sheet); the base sheet per
    // branch is the least index, 0
    let orbit_of_sheet: Vec<u32> = {
        let mut inv = vec![0u32; d];
        for sigma in 0..d {
            let img = cover_c.aut_sheets[sigma][0][0] as usize;
            inv[img] = sigma as u32;
        }
        inv
    };
    let mut monodromy = Vec::new();
    for (j, comp) in x.components.iter().enumerate() {
        if j == c {
            monodromy.push(cover_c.monodromy[0].clone());
        } else {
            let k = 2 * comp.genus as usize + (comp.punctures as usize).saturating_sub(1);
            monodromy.push(vec![(0..d as u32).collect::<Vec<u32>>(); k]);
        }
    }
    let mut attach = Vec::new();
    for s in x.singular.iter() {
        let mut tables = Vec::new();
        for br in &s.branches {
            let col: Vec<u32> = if br.component == c {
                // sheet σ(0) of a c-branch lies in copy σ
                (0..d).map(|sheet| orbit_of_sheet[sheet]).collect()
            } else {
                (0..d as u32).collect()
            };
            tables.push(col);
        }
        attach.push(tables);
    }
    // automorphisms: the deck group of cover_c, acting on copies of the
    // other components by left translation of labels
    let mut aut_sheets = Vec::new();
    for sigma in 0..d as u64 {
        let mut per_comp = Vec::new();
        for j in 0..x.components.len() {
            if j == c {
                per_comp.push(cover_c.aut_sheets[sigma as usize][0].clone());
            } else {
                per_comp.push(left_mult_perm(deck, sigma));
            }
        }
        aut_sheets.push(per_comp);
    }
    Ok(CoveringModel {
        target: x.clone(),
        degree: d,
        monodromy,
        attach,
        aut: deck.clone(),
        aut_sheets,
    })
}

/// The singular-point covering at point i: n^(mᵢ-1) translated copies of
/// the normalization, glued cyclically at point i and diagonally elsewhere.
pub fn build_yi(x: &CurveModel, i: usize, n: u64) -> Result<CoveringModel> {
    x.validate()?;
    if !x.is_integral() || !x.is_proper() {
        return Err(Error::invalid("build_yi requires a proper integral curve"));
    }
    if i >= x.singular.len() {
        return Err(Error::invalid(format!(
            "singular point index {i} out of range ({} points)",
            x.singular.len()
        )));
    }
    let m = x.singular[i].branches.len();
    if n == 1 {
        return Ok(CoveringModel::identity(x));
    }
    let orders = vec![n; m - 1];
    let deck = if m == 1 {
        FiniteGroup::trivial()
    } else {
        FiniteGroup::abelian(&orders)
    };
    let d = deck.order() as usize;
    let c = &x.components[0];
    let k = 2 * c.genus as usize + (c.punctures as usize).saturating_sub(1);
    let monodromy = vec![vec![(0..d as u32).collect::<Vec<u32>>(); k]];
    let mut attach = Vec::new();
    for (t, s) in x.singular.iter().enumerate() {
        let mut tables = Vec::new();
        if t == i {
            // branch 0 of copy s is sheet s; branch j is sheet s + e_j
            for b in 0..s.branches.len() {
                let col: Vec<u32> = (0..d as u64)
                    .map(|sheet| {
                        if b == 0 {
                            sheet as u32
                        } else {
                            let e = deck.generators()[b - 1];
                            deck.mul(sheet, deck.inv(e)) as u32
                        }
                    })
                    .collect();
                tables.push(col);
            }
        } else {
            for _ in 0..s.branches.len() {
                tables.push((0..d as u32).collect());
            }
        }
        attach.push(tables);
    }
    let aut_sheets: Vec<Vec<Vec<u32>>> = (0..d as u64)
        .map(|sigma| vec![left_mult_perm(&deck, sigma)])
        .collect();
    Ok(CoveringModel {
        target: x.clone(),
        degree: d,
        monodromy,
        attach,
        aut: deck,
        aut_sheets,
    })
}

/// Fiber product of two coverings of the same curve, on sheet labels.
pub fn fiber_product(a: &CoveringModel, b: &CoveringModel) -> Result<CoveringModel> {
    if a.target != b.target {
        return Err(Error::invalid("fiber product requires a common target"));
    }
    let (da, db) = (a.degree, b.degree);
    let d = da * db;
    let pair = |sa: usize, sb: usize| sa * db + sb;
    let prod_perm = |pa: &[u32], pb: &[u32]| -> Vec<u32> {
        let mut p = Vec::with_capacity(d);
        for sa in 0..da {
            for sb in 0..db {
                p.push(pair(pa[sa] as usize, pb[sb] as usize) as u32);
            }
        }
        p
    };
    let monodromy: Vec<Vec<Vec<u32>>> = a
        .monodromy
        .iter()
        .zip(b.monodromy.iter())
        .map(|(pa, pb)| {
            pa.iter()
                .zip(pb.iter())
                .map(|(x, y)| prod_perm(x, y))
                .collect()
        })
        .collect();
    let mut attach = Vec::new();
    for (i, s) in a.target.singular.iter().enumerate() {
        let mut tables = Vec::new();
        for bpos in 0..s.branches.len() {
            let mut col = Vec::with_capacity(d);
            for sa in 0..da {
                for sb in 0..db {
                    let ka = a.attach[i][bpos][sa] as usize;
                    let kb = b.attach[i][bpos][sb] as usize;
                    col.push(pair(ka, kb) as u32);
                }
            }
            tables.push(col);
        }
        attach.push(tables);
    }
    // product automorphisms (σ,τ) indexed σ·|Aut(b)|+τ, acting componentwise
    let aut_order = a.aut.order() * b.aut.order();
    let ncomp = a.target.components.len();
    let mut aut_sheets = Vec::with_capacity(aut_order as usize);
    for sigma in 0..a.aut.order() {
        for tau in 0..b.aut.order() {
            let mut per_comp = Vec::with_capacity(ncomp);
            for j in 0..ncomp {
                let pa = &a.aut_sheets[sigma as usize][j];
                let pb = &b.aut_sheets[tau as usize][j];
                per_comp.push(prod_perm(pa, pb));
            }
            aut_sheets.push(per_comp);
        }
    }
    let aut = product_group(&a.aut, &b.aut)?;
    Ok(CoveringModel {
        target: a.target.clone(),
        degree: d,
        monodromy,
        attach,
        aut,
        aut_sheets,
    })
}

fn product_group(a: &FiniteGroup, b: &FiniteGroup) -> Result<FiniteGroup> {
    let (oa, ob) = (a.order(), b.order());
    let order = (oa * ob) as usize;
    let mut mul = vec![0u32; order * order];
    for x in 0..order as u64 {
        for y in 0..order as u64 {
            let (xa, xb) = (x / ob, x % ob);
            let (ya, yb) = (y / ob, y % ob);
            let p = a.mul(xa, ya) * ob + b.mul(xb, yb);
            mul[(x * order as u64 + y) as usize] = p as u32;
        }
    }
    let mut gens = Vec::new();
    for &g in a.generators() {
        gens.push(g * ob);
    }
    for &g in b.generators() {
        gens.push(g);
    }
    FiniteGroup::from_table(mul, gens)
}

/// Smooth-part covering datum of the normalization with deck group
/// H¹(X̃,Λ)^∨ = (ℤ/n)^2g: the mod-n quotient of the surface group.
pub fn normalization_xn_datum(genus: u64, n: u64) -> Result<SmoothCoverDatum> {
    let pres = Presentation::surface(genus as usize);
    let (_, q) = mod_n_derived_quotient(&pres, n)?;
    Ok(SmoothCoverDatum::new(
        q.group().clone(),
        q.images().to_vec(),
    ))
}

/// Covering of X attached to a finite quotient of its fundamental group:
/// sheets are group elements, surface monodromy is right multiplication,
/// and non-tree incidence edges attach through the edge generator images.
pub fn covering_from_quotient(x: &CurveModel, q: &FiniteQuotient) -> Result<CoveringModel> {
    let pi1 = x.pi1_presentation()?;
    if q.presentation() != &pi1.pres {
        return Err(Error::invalid(
            "quotient is not over the curve's fundamental group presentation",
        ));
    }
    let g = q.group();
    let d = g.order() as usize;
    let mut monodromy = Vec::new();
    for (j, comp) in x.components.iter().enumerate() {
        let mut perms = Vec::new();
        for &(ai, bi) in &pi1.layout.handles[j] {
            perms.push(right_mult_perm(g, q.images()[ai]));
            perms.push(right_mult_perm(g, q.images()[bi]));
        }
        for &ci in &pi1.layout.punctures[j] {
            perms.push(right_mult_perm(g, q.images()[ci]));
        }
        debug_assert_eq!(
            perms.len(),
            2 * comp.genus as usize + (comp.punctures as usize).saturating_sub(1)
        );
        monodromy.push(perms);
    }
    // attachments: identity on tree edges, right multiplication by the edge
    // generator image on non-tree edges
    let mut edge_image: std::collections::BTreeMap<(usize, usize), Elt> = Default::default();
    for &(si, bi, idx) in &pi1.layout.edge_gens {
        edge_image.insert((si, bi), q.images()[idx]);
    }
    let mut attach = Vec::new();
    for (i, s) in x.singular.iter().enumerate() {
        let mut tables = Vec::new();
        for b in 0..s.branches.len() {
            let col: Vec<u32> = match edge_image.get(&(i, b)) {
                None => (0..d as u32).collect(),
                Some(&e) => (0..d as u64).map(|sheet| g.mul(sheet, e) as u32).collect(),
            };
            tables.push(col);
        }
        attach.push(tables);
    }
    let aut_sheets: Vec<Vec<Vec<u32>>> = (0..d as u64)
        .map(|sigma| {
            (0..x.components.len())
                .map(|_| left_mult_perm(g, sigma))
                .collect()
        })
        .collect();
    Ok(CoveringModel {
        target: x.clone(),
        degree: d,
        monodromy,
        attach,
        aut: g.clone(),
        aut_sheets,
    })
}

/// The covering with deck group H¹(X,Λ)^∨. For proper integral curves the
/// explicit route (fiber product of the singular-point coverings with the
/// lifted normalization covering) is built and cross-checked against the
/// quotient route; otherwise the quotient route alone is used.
pub fn build_x_n(x: &CurveModel, n: u64, limits: &Limits) -> Result<CoveringModel> {
    x.validate()?;
    let h1 = x.h1_module(n)?;
    limits.check_group_order(h1.size(), "build_x_n deck group")?;
    if n == 1 {
        return Ok(CoveringModel::identity(x));
    }
    let pi1 = x.pi1_presentation()?;
    let (_, q) = mod_n_derived_quotient(&pi1.pres, n)?;
    let quotient_route = covering_from_quotient(x, &q)?;
    let rep = quotient_route.verify();
    if !rep.all_pass() {
        return Err(Error::verification(
            "build-xn-quotient-route",
            rep.first_failure().map(|f| f.detail.clone()).unwrap_or_default(),
        ));
    }
    if quotient_route.degree as u128 != h1.size() {
        return Err(Error::verification(
            "build-xn-degree-law",
            format!(
                "degree {} differs from |H¹| = {}",
                quotient_route.degree,
                h1.size()
            ),
        ));
    }
    if x.is_integral() && x.is_proper() {
        // explicit route: W × Y₁ × … × Y_r
        let genus = x.components[0].genus;
        let w_datum = normalization_xn_datum(genus, n)?;
        let mut result = lift_irreducible(x, &w_datum)?;
        for i in 0..x.singular.len() {
            let yi = build_yi(x, i, n)?;
            result = fiber_product(&result, &yi)?;
        }
        let rep = result.verify();
        if !rep.all_pass() {
            return Err(Error::verification(
                "build-xn-explicit-route",
                rep.first_failure().map(|f| f.detail.clone()).unwrap_or_default(),
            ));
        }
        if result.degree != quotient_route.degree {
            return Err(Error::verification(
                "build-xn-route-degrees",
                format!(
                    "explicit degree {} vs quotient degree {}",
                    result.degree, quotient_route.degree
                ),
            ));
        }
        // both routes must induce the same marked quotient of π₁
        let m1 = super::monodromy::monodromy_action(&result, limits)?;
        let m2 = super::monodromy::monodromy_action(&quotient_route, limits)?;
        if !super::monodromy::marked_quotients_isomorphic(&m1, &m2) {
            return Err(Error::verification(
                "build-xn-route-monodromy",
                "explicit and quotient routes give different monodromy actions",
            ));
        }
        return Ok(result);
    }
    Ok(quotient_route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::monodromy::{marked_quotients_isomorphic, monodromy_action};
    use crate::fpgroups::mod_n_derived_quotient;

    #[test]
    fn yi_on_nodal_cubic_is_cyclic_gluing() {
        // 3 copies of the rational component glued cyclically, group ℤ/3
        let x = CurveModel::nodal_cubic();
        let cov = build_yi(&x, 0, 3).unwrap();
        assert_eq!(cov.degree, 3);
        assert_eq!(cov.aut.order(), 3);
        let rep = cov.verify();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        assert!(rep.connected);
        // the edge generator acts as a 3-cycle
        let q = monodromy_action(&cov, &Limits::default()).unwrap();
        assert_eq!(q.group().order(), 3);
        let img = q.images()[0];
        assert_eq!(q.group().elt_order(img), 3);
    }

    #[test]
    fn yi_identity_at_n_one() {
        let x = CurveModel::nodal_cubic();
        let cov = build_yi(&x, 0, 1).unwrap();
        assert_eq!(cov.degree, 1);
        assert!(cov.verify().all_pass());
    }

    #[test]
    fn yi_on_torus_with_two_nodes() {
        // m = 2 point on a genus-1 curve with two nodes, n = 2: degree 2,
        // group ℤ/2; the source is two copies of the normalization glued
        // cyclically at node 0 and diagonally at node 1
        let x = CurveModel::genus_one_with_nodes(2);
        let cov = build_yi(&x, 0, 2).unwrap();
        assert_eq!(cov.degree, 2);
        assert_eq!(cov.aut.order(), 2);
        let rep = cov.verify();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        let src = cov.source_model().unwrap();
        assert_eq!(src.curve.components.len(), 2);
        assert_eq!(src.curve.singular.len(), 4);
        for s in &src.curve.singular {
            assert_eq!(s.branches.len(), 2);
        }
    }

    #[test]
    fn lift_irreducible_on_nodal_torus() {
        // genus-1 with one node, deck (ℤ/2)² from the normalization:
        // degree-4 connected étale Galois cover with 4 singular fibers
        let x = CurveModel::genus_one_with_nodes(1);
        let datum = normalization_xn_datum(1, 2).unwrap();
        assert_eq!(datum.deck.order(), 4);
        let cov = lift_irreducible(&x, &datum).unwrap();
        assert_eq!(cov.degree, 4);
        let rep = cov.verify();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        let src = cov.source_model().unwrap();
        assert_eq!(src.curve.singular.len(), 4);
        assert_eq!(src.curve.components.len(), 1);
        // reading off the smooth part returns the input: genus matches
        // Riemann-Hurwitz (χ' = 4·0 → genus 1) and the deck group order
        assert_eq!(src.curve.components[0].genus, 1);

        // one character only: degree-2 cover, 2 singular points upstairs
        let half = SmoothCoverDatum::new(
            crate::fpgroups::FiniteGroup::cyclic(2),
            vec![1, 0],
        );
        let cov2 = lift_irreducible(&x, &half).unwrap();
        assert_eq!(cov2.degree, 2);
        assert!(cov2.verify().all_pass());
        let src2 = cov2.source_model().unwrap();
        assert_eq!(src2.curve.singular.len(), 2);
        for s in &src2.curve.singular {
            assert_eq!(s.branches.len(), 2);
        }
    }

    #[test]
    fn lift_choice_independence() {
        let x = CurveModel::genus_one_with_nodes(1);
        let datum = normalization_xn_datum(1, 2).unwrap();
        let limits = Limits::default();
        let base = lift_irreducible(&x, &datum).unwrap();
        let base_rep = base.verify();
        let q_base = monodromy_action(&base, &limits).unwrap();
        let base_orders = q_base.group().abelianized_form().unwrap().0;
        for choice in 0..4u64 {
            let cov = lift_irreducible_with_choices(&x, &datum, &[vec![0, choice]]).unwrap();
            let rep = cov.verify();
            assert!(rep.all_pass(), "choice {choice}: {:?}", rep.first_failure());
            // identical verify reports
            assert_eq!(rep.degree, base_rep.degree);
            assert_eq!(rep.aut_order, base_rep.aut_order);
            assert_eq!(rep.connected, base_rep.connected);
            // identical monodromy image up to relabeling of the fiber
            let q = monodromy_action(&cov, &limits).unwrap();
            assert_eq!(q.group().order(), q_base.group().order(), "choice {choice}");
            let orders = q.group().abelianized_form().unwrap().0;
            assert_eq!(
                orders.abelian_orders(),
                base_orders.abelian_orders(),
                "choice {choice}"
            );
        }
    }

    #[test]
    fn extend_reducible_two_tori_one_point() {
        // ℤ/2-cover of component 0 extends to a connected degree-2 cover
        // with two copies of component 1
        let x = CurveModel::two_tori_glued(1);
        let comp = component_curve(&x, 0);
        let datum = SmoothCoverDatum::new(crate::fpgroups::FiniteGroup::cyclic(2), vec![1, 0]);
        let cover_c = lift_irreducible(&comp, &datum).unwrap();
        let cov = extend_reducible(&x, 0, &cover_c).unwrap();
        assert_eq!(cov.degree, 2);
        let rep = cov.verify();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        let src = cov.source_model().unwrap();
        // one connected cover of comp 0, two copies of comp 1
        let copies_of_1 = src.comp_map.iter().filter(|&&j| j == 1).count();
        assert_eq!(copies_of_1, 2);
        assert!(rep.connected);
    }

    #[test]
    fn extend_reducible_figure_one_configuration() {
        // two components glued at two points (r = 2, m₁ = m₂ = 2), d = 2
        let x = CurveModel::two_tori_glued(2);
        let comp = component_curve(&x, 0);
        let datum = SmoothCoverDatum::new(crate::fpgroups::FiniteGroup::cyclic(2), vec![1, 0]);
        let cover_c = lift_irreducible(&comp, &datum).unwrap();
        let cov = extend_reducible(&x, 0, &cover_c).unwrap();
        assert_eq!(cov.degree, 2);
        assert_eq!(cov.aut.order(), 2);
        let rep = cov.verify();
        assert!(rep.all_pass(), "{:?}", rep.first_failure());
        // 2 copies of each singular point upstairs
        let src = cov.source_model().unwrap();
        assert_eq!(src.curve.singular.len(), 4);
    }

    #[test]
    fn extend_identity_degree_one() {
        let x = CurveModel::two_tori_glued(1);
        let comp = component_curve(&x, 0);
        let cover_c = CoveringModel::identity(&comp);
        let cov = extend_reducible(&x, 0, &cover_c).unwrap();
        assert_eq!(cov.degree, 1);
        assert!(cov.verify().all_pass());
    }

    #[test]
    fn xn_of_nodal_cubic() {
        let limits = Limits::default();
        let x = CurveModel::nodal_cubic();
        let cov = build_x_n(&x, 3, &limits).unwrap();
        assert_eq!(cov.degree, 3);
        assert_eq!(cov.aut.order(), 3);
        assert!(cov.verify().all_pass());
    }

    #[test]
    fn xn_of_torus() {
        let limits = Limits::default();
        let x = CurveModel::smooth_proper(1);
        let cov = build_x_n(&x, 2, &limits).unwrap();
        assert_eq!(cov.degree, 4);
        assert!(cov.verify().all_pass());
        // regular action of (ℤ/2)² on the 4 sheets
        let q = monodromy_action(&cov, &limits).unwrap();
        assert_eq!(q.group().order(), 4);
        assert!(q.group().is_abelian());
        assert_eq!(q.group().elt_order(q.images()[0]), 2);
    }

    #[test]
    fn xn_of_nodal_torus() {
        let limits = Limits::default();
        let x = CurveModel::genus_one_with_nodes(1);
        let cov = build_x_n(&x, 2, &limits).unwrap();
        assert_eq!(cov.degree, 8);
        assert!(cov.verify().all_pass());
    }

    #[test]
    fn xn_monodromy_round_trip() {
        // monodromy of the covering equals the derived quotient, as marked
        // quotients, on several curves
        let limits = Limits::default();
        for (x, n) in [
            (CurveModel::nodal_cubic(), 3),
            (CurveModel::smooth_proper(1), 2),
            (CurveModel::genus_one_with_nodes(1), 2),
            (CurveModel::two_tori_glued(2), 2),
        ] {
            let cov = build_x_n(&x, n, &limits).unwrap();
            let q1 = monodromy_action(&cov, &limits).unwrap();
            let (_, q2) = mod_n_derived_quotient(&x.pi1_presentation().unwrap().pres, n).unwrap();
            assert!(
                marked_quotients_isomorphic(&q1, &q2),
                "round trip failed for {:?} n={n}",
                x.components.len()
            );
            // degree law
            assert_eq!(cov.degree as u128, x.h1_module(n).unwrap().size());
        }
    }

    #[test]
    fn corrupted_gluing_fails_etale_check() {
        let x = CurveModel::nodal_cubic();
        // double-booking a copy breaks branch bijectivity at the named point
        let mut cov = build_yi(&x, 0, 3).unwrap();
        let hijack = cov.attach[0][1][1];
        cov.corrupt_redirect(0, 1, 0, hijack);
        let rep = cov.verify();
        assert!(!rep.all_pass());
        let fail = rep.first_failure().unwrap();
        assert_eq!(fail.name, "etale-branch-bijectivity");
        assert!(fail.detail.contains("singular point #0"));
        // a branch swap keeps the counts but disconnects this cyclic gluing
        let mut cov = build_yi(&x, 0, 3).unwrap();
        cov.corrupt_swap(0, 1, 0, 1);
        let rep = cov.verify();
        assert!(!rep.all_pass());
        assert_eq!(rep.first_failure().unwrap().name, "source-connected");
    }

    #[test]
    fn fiber_product_multiplies_degree() {
        let x = CurveModel::genus_one_with_nodes(1);
        let a = build_yi(&x, 0, 2).unwrap();
        let datum = normalization_xn_datum(1, 2).unwrap();
        let b = lift_irreducible(&x, &datum).unwrap();
        let p = fiber_product(&a, &b).unwrap();
        assert_eq!(p.degree, 8);
        assert!(p.verify().all_pass());
    }
}

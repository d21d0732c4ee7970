//! Cohomology backend tests: frozen small cases, backend agreement, cup
//! structure, and the spectral-sequence operations on synthetic towers.

use std::sync::Arc;

use curvecoh::fpgroups::FiniteGroup;
use curvecoh::groupcohom::{
    cohomology, cup, cyclic_h1, h1_iso_certificate, h2_image, h3_edge_delta,
    h3_inflation_triviality_check, is_coboundary, tensor_pairing, Backend, Cochain,
    CohomologyTheory, GModule, Subgroup,
};
use curvecoh::limits::Limits;
use curvecoh::linalg::LambdaModule;
use curvecoh::rng::Rng;

fn trivial_gm(orders: &[u64], n: u64, coeff: &[u64]) -> Arc<GModule> {
    let g = if orders.is_empty() {
        FiniteGroup::trivial()
    } else {
        FiniteGroup::abelian(orders)
    };
    Arc::new(GModule::trivial_action(
        g,
        LambdaModule::from_orders(n, coeff),
    ))
}

fn limits() -> Limits {
    Limits::default()
}

#[test]
fn h_star_of_z2_is_one_dimensional() {
    let gm = trivial_gm(&[2], 2, &[2]);
    for deg in 0..=3usize {
        for backend in [Backend::Generic, Backend::Abelian] {
            let th = cohomology(&gm, deg, backend, &limits()).unwrap();
            assert_eq!(th.cohomology.orders(), &[2], "deg {deg} {backend:?}");
        }
    }
}

#[test]
fn h_of_trivial_group_vanishes_positively() {
    let gm = trivial_gm(&[], 4, &[4, 2]);
    for deg in 1..=3usize {
        let th = cohomology(&gm, deg, Backend::Generic, &limits()).unwrap();
        assert!(th.cohomology.is_zero(), "deg {deg}");
    }
    let th = cohomology(&gm, 0, Backend::Generic, &limits()).unwrap();
    assert_eq!(th.cohomology.orders(), &[2, 4]);
}

#[test]
fn h3_of_z4_squared_has_dimension_four() {
    let gm = trivial_gm(&[4, 4], 2, &[2]);
    let th = cohomology(&gm, 3, Backend::Abelian, &limits()).unwrap();
    assert_eq!(th.cohomology.orders(), &[2, 2, 2, 2]);
}

#[test]
fn h1_of_z4_with_z2_coefficients() {
    let gm = trivial_gm(&[4], 2, &[2]);
    for backend in [Backend::Generic, Backend::Abelian] {
        let th = cohomology(&gm, 1, backend, &limits()).unwrap();
        assert_eq!(th.cohomology.orders(), &[2]);
    }
}

/// Both backends on one group: isomorphic modules with mutually inverse
/// marked coordinate maps, and identical degree-(1,1) cup tables through
/// the change of basis.
fn backend_agreement(orders: &[u64], ell: u64, max_degree: usize) {
    let lim = limits();
    let gm = trivial_gm(orders, ell, &[ell]);
    for deg in 0..=max_degree {
        let ga = cohomology(&gm, deg, Backend::Abelian, &lim).unwrap();
        let gg = cohomology(&gm, deg, Backend::Generic, &lim).unwrap();
        assert_eq!(
            ga.cohomology.orders(),
            gg.cohomology.orders(),
            "orders {orders:?} ell {ell} deg {deg}"
        );
        let k = ga.cohomology.rank();
        // change-of-basis matrices in both directions
        let a_to_g: Vec<Vec<u64>> = ga
            .reps
            .iter()
            .map(|r| gg.coords(r, &lim).unwrap())
            .collect();
        let g_to_a: Vec<Vec<u64>> = gg
            .reps
            .iter()
            .map(|r| ga.coords(r, &lim).unwrap())
            .collect();
        // composing must give the identity on canonical coordinates
        for c in 0..k {
            let mut e = vec![0u64; k];
            e[c] = 1;
            // e -> abelian rep -> generic coords -> linear combo of g_to_a
            let mid = &a_to_g[c];
            let mut back = vec![0u64; k];
            for (j, &mj) in mid.iter().enumerate() {
                for (i, b) in back.iter_mut().enumerate() {
                    let d = ga.cohomology.orders()[i];
                    *b = (*b + mj % d * (g_to_a[j][i] % d)) % d;
                }
            }
            assert_eq!(back, e, "round trip {orders:?} deg {deg} gen {c}");
        }
    }
    // cup tables in degree (1,1) agree through the change of basis
    let h1a = cohomology(&gm, 1, Backend::Abelian, &lim).unwrap();
    let h1g = cohomology(&gm, 1, Backend::Generic, &lim).unwrap();
    let h2g = cohomology(&gm, 2, Backend::Generic, &lim).unwrap();
    let h2a = cohomology(&gm, 2, Backend::Abelian, &lim).unwrap();
    let pr = tensor_pairing(&gm.module, &gm.module).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(gm.group.clone(), pr.target.clone()));
    // coefficients are F_ell and M⊗M ≅ M here, so compare via coords of the
    // cup cochains viewed over M again
    let as_m = |c: &Cochain| -> Cochain {
        let cc = c.clone();
        let gm2 = Arc::clone(&gm);
        Cochain::from_fn(gm2, 2, true, move |args| cc.eval(args))
    };
    for i in 0..h1a.reps.len() {
        for j in 0..h1a.reps.len() {
            let ca = cup(&h1a.reps[i], &h1a.reps[j], &pr, Arc::clone(&gm_t)).unwrap();
            let via_a = h2a.coords(&as_m(&ca), &lim).unwrap();
            // translate the abelian H1 reps into generic coordinates and cup
            // there: [x_i ∪ x_j] must translate consistently
            let via_g = h2g.coords(&as_m(&ca), &lim).unwrap();
            // translate via_a through a_to_g on H²
            let a_to_g2: Vec<Vec<u64>> = h2a
                .reps
                .iter()
                .map(|r| h2g.coords(r, &lim).unwrap())
                .collect();
            let mut translated = vec![0u64; h2g.cohomology.rank()];
            for (c, &vc) in via_a.iter().enumerate() {
                for (t, tr) in translated.iter_mut().enumerate() {
                    let d = h2g.cohomology.orders()[t];
                    *tr = (*tr + vc % d * (a_to_g2[c][t] % d)) % d;
                }
            }
            assert_eq!(translated, via_g, "cup table {orders:?} at ({i},{j})");
        }
    }
    let _ = h1g;
}

#[test]
fn backend_agreement_mod2_small() {
    backend_agreement(&[2], 2, 3);
    backend_agreement(&[4], 2, 3);
    backend_agreement(&[2, 2], 2, 3);
    backend_agreement(&[8], 2, 3);
    backend_agreement(&[4, 2], 2, 3);
    backend_agreement(&[2, 2, 2], 2, 2);
    backend_agreement(&[4, 4], 2, 2);
    backend_agreement(&[8, 2], 2, 2);
}

#[test]
fn backend_agreement_mod3_small() {
    backend_agreement(&[3], 3, 3);
    backend_agreement(&[9], 3, 3);
    backend_agreement(&[3, 3], 3, 2);
    backend_agreement(&[9, 3], 3, 2);
    backend_agreement(&[27], 3, 2);
}

#[test]
fn backend_agreement_order_64_degree_2() {
    for orders in [
        vec![64u64],
        vec![32, 2],
        vec![16, 4],
        vec![16, 2, 2],
        vec![8, 8],
        vec![8, 4, 2],
        vec![4, 4, 4],
        vec![8, 2, 2, 2],
    ] {
        backend_agreement(&orders, 2, 2);
    }
    for orders in [vec![27u64, 3], vec![9, 9], vec![9, 3, 3]] {
        backend_agreement(&orders, 3, 2);
    }
}

#[test]
fn cup_square_of_z2_character_is_nonzero() {
    let lim = limits();
    let gm = trivial_gm(&[2], 2, &[2]);
    let h1 = cohomology(&gm, 1, Backend::Generic, &lim).unwrap();
    let pr = tensor_pairing(&gm.module, &gm.module).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(gm.group.clone(), pr.target.clone()));
    let xx = cup(&h1.reps[0], &h1.reps[0], &pr, gm_t).unwrap();
    let back = as_coeff(&gm, &xx);
    let ans = is_coboundary(&gm, &back, &lim).unwrap();
    assert!(!ans.is_coboundary(), "x∪x generates H²(ℤ/2)");
}

#[test]
fn cup_square_of_z4_character_is_zero() {
    let lim = limits();
    let gm = trivial_gm(&[4], 2, &[2]);
    let h1 = cohomology(&gm, 1, Backend::Generic, &lim).unwrap();
    let pr = tensor_pairing(&gm.module, &gm.module).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(gm.group.clone(), pr.target.clone()));
    let xx = cup(&h1.reps[0], &h1.reps[0], &pr, gm_t).unwrap();
    let back = as_coeff(&gm, &xx);
    let ans = is_coboundary(&gm, &back, &lim).unwrap();
    assert!(ans.is_coboundary(), "x∪x dies on ℤ/4");
}

/// Reinterpret a cup-product cochain (valued in M⊗M ≅ F_ell) back over M.
fn as_coeff(gm: &Arc<GModule>, c: &Cochain) -> Cochain {
    let cc = c.clone();
    Cochain::from_fn(Arc::clone(gm), c.degree, true, move |args| cc.eval(args))
}

#[test]
fn inflation_of_z4_carry_to_z8_is_coboundary() {
    let lim = limits();
    let gm4 = trivial_gm(&[4], 2, &[2]);
    let gm8 = trivial_gm(&[8], 2, &[2]);
    let h2 = cohomology(&gm4, 2, Backend::Generic, &lim).unwrap();
    assert_eq!(h2.cohomology.orders(), &[2]);
    // projection ℤ/8 → ℤ/4
    let proj: Vec<u64> = (0..8).map(|x| x % 4).collect();
    let up = h2.reps[0].inflate(Arc::clone(&gm8), Arc::new(proj));
    let ans = is_coboundary(&gm8, &up, &lim).unwrap();
    assert!(ans.is_coboundary());
}

#[test]
fn restriction_of_z4_character_to_index_two_subgroup_dies() {
    let lim = limits();
    let gm4 = trivial_gm(&[4], 2, &[2]);
    let h1 = cohomology(&gm4, 1, Backend::Generic, &lim).unwrap();
    // subgroup {0, 2} ≅ ℤ/2
    let (sub, embed) = gm4.group.subgroup(&[0, 2]).unwrap();
    let gm_sub = Arc::new(gm4.restrict_to(&sub, &embed).unwrap());
    let res = h1.reps[0].restrict(Arc::clone(&gm_sub), Arc::new(embed));
    let ans = is_coboundary(&gm_sub, &res, &lim).unwrap();
    assert!(ans.is_coboundary(), "character kills the square subgroup");
}

#[test]
fn restriction_to_trivial_subgroup_dies() {
    let lim = limits();
    let gm = trivial_gm(&[4, 2], 2, &[2]);
    let h2 = cohomology(&gm, 2, Backend::Abelian, &lim).unwrap();
    let (sub, embed) = gm.group.subgroup(&[0]).unwrap();
    let gm_sub = Arc::new(gm.restrict_to(&sub, &embed).unwrap());
    for rep in &h2.reps {
        let res = rep.restrict(Arc::clone(&gm_sub), Arc::new(embed.clone()));
        assert!(is_coboundary(&gm_sub, &res, &lim).unwrap().is_coboundary());
    }
}

#[test]
fn graded_commutativity_in_cohomology() {
    let lim = limits();
    for (orders, ell) in [(vec![2u64, 2], 2u64), (vec![3], 3), (vec![4], 2)] {
        let gm = trivial_gm(&orders, ell, &[ell]);
        let h1 = cohomology(&gm, 1, Backend::Generic, &lim).unwrap();
        let pr = tensor_pairing(&gm.module, &gm.module).unwrap();
        let gm_t = Arc::new(GModule::trivial_action(gm.group.clone(), pr.target.clone()));
        for f in &h1.reps {
            for g in &h1.reps {
                let fg = as_coeff(&gm, &cup(f, g, &pr, Arc::clone(&gm_t)).unwrap());
                let gf = as_coeff(&gm, &cup(g, f, &pr, Arc::clone(&gm_t)).unwrap());
                // degree (1,1): [f∪g] = -[g∪f]
                let sum = fg.add(&gf);
                assert!(
                    is_coboundary(&gm, &sum, &lim).unwrap().is_coboundary(),
                    "{orders:?}"
                );
            }
        }
    }
}

#[test]
fn h1_iso_certificate_on_torus_tower() {
    // G″ = (ℤ/4)², kernel of the projection onto (ℤ/2)² is 2(ℤ/4)²:
    // H¹(G″, ℤ/2) = (ℤ/2)² and every class dies on the kernel
    let lim = limits();
    let gm = trivial_gm(&[4, 4], 2, &[2]);
    let elems: Vec<u64> = (0..16)
        .filter(|x| (x % 4) % 2 == 0 && (x / 4) % 2 == 0)
        .collect();
    let (sub, embed) = gm.group.subgroup(&elems).unwrap();
    let th = h1_iso_certificate(&gm, &Subgroup::new(sub, embed), Backend::Auto, &lim).unwrap();
    assert_eq!(th.cohomology.orders(), &[2, 2]);
    // trivial coefficients: H¹ of the trivial module is 0
    let gm0 = Arc::new(GModule::trivial_action(
        FiniteGroup::abelian(&[4, 4]),
        LambdaModule::zero(2),
    ));
    let th0 = cohomology(&gm0, 1, Backend::Generic, &lim).unwrap();
    assert!(th0.cohomology.is_zero());
}

#[test]
fn h2_image_of_torus_tower_is_one_dimensional() {
    // G′ = (ℤ/4)², G″ = (ℤ/8)², M = ℤ/2: only the χ₁χ₂ class survives
    let lim = limits();
    let gm1 = trivial_gm(&[4, 4], 2, &[2]);
    let gm2 = trivial_gm(&[8, 8], 2, &[2]);
    let proj: Vec<u64> = (0..64)
        .map(|x| {
            let (a, b) = (x % 8, x / 8);
            (a % 4) + 4 * (b % 4)
        })
        .collect();
    for backend in [Backend::Generic, Backend::Abelian] {
        let img = h2_image(&gm1, Arc::clone(&gm2), &proj, backend, &lim).unwrap();
        assert_eq!(img.module.orders(), &[2], "{backend:?}");
    }
}

#[test]
fn h2_image_of_cyclic_tower_vanishes() {
    // π = ℤ surrogate: ℤ/4 ← ℤ/8, image of H² is 0
    let lim = limits();
    let gm1 = trivial_gm(&[4], 2, &[2]);
    let gm2 = trivial_gm(&[8], 2, &[2]);
    let proj: Vec<u64> = (0..8).map(|x| x % 4).collect();
    let img = h2_image(&gm1, Arc::clone(&gm2), &proj, Backend::Generic, &lim).unwrap();
    assert!(img.module.is_zero());
}

#[test]
fn h2_image_coords_locate_cup_products() {
    let lim = limits();
    let gm1 = trivial_gm(&[4, 4], 2, &[2]);
    let gm2 = trivial_gm(&[8, 8], 2, &[2]);
    let proj: Vec<u64> = (0..64)
        .map(|x| {
            let (a, b) = (x % 8, x / 8);
            (a % 4) + 4 * (b % 4)
        })
        .collect();
    let img = h2_image(&gm1, Arc::clone(&gm2), &proj, Backend::Auto, &lim).unwrap();
    // cup of the two characters of G″ = (ℤ/8)², inflated from G′ in fact:
    // land in the image and read off the nonzero coordinate
    let h1 = cohomology(&gm2, 1, Backend::Abelian, &lim).unwrap();
    let pr = tensor_pairing(&gm2.module, &gm2.module).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(gm2.group.clone(), pr.target.clone()));
    let x12 = as_coeff(&gm2, &cup(&h1.reps[0], &h1.reps[1], &pr, gm_t).unwrap());
    let coords = img.coords(&x12).unwrap();
    assert_eq!(coords, vec![1]);
}

#[test]
fn rgamma_on_torus_tower() {
    let lim = limits();
    let gm1 = trivial_gm(&[4, 4], 2, &[2]);
    let gm2 = trivial_gm(&[8, 8], 2, &[2]);
    let proj: Vec<u64> = (0..64)
        .map(|x| {
            let (a, b) = (x % 8, x / 8);
            (a % 4) + 4 * (b % 4)
        })
        .collect();
    let c = curvecoh::groupcohom::rgamma_representative(
        &gm1,
        Arc::clone(&gm2),
        &proj,
        Backend::Auto,
        &lim,
    )
    .unwrap();
    assert_eq!(c.h0.orders(), &[2]);
    assert_eq!(c.h1.orders(), &[2, 2]);
    assert_eq!(c.h2.orders(), &[2]);
}

#[test]
fn rgamma_on_trivial_tower() {
    let lim = limits();
    let gm = trivial_gm(&[], 2, &[2]);
    let c = curvecoh::groupcohom::rgamma_representative(
        &gm,
        Arc::clone(&gm),
        &[0],
        Backend::Generic,
        &lim,
    )
    .unwrap();
    assert_eq!(c.h0.orders(), &[2]);
    assert!(c.h1.is_zero());
    assert!(c.h2.is_zero());
}

// --- the degree-3 edge map -------------------------------------------------

fn split_setup(
    n_orders: &[u64],
    s_order: u64,
    ell: u64,
) -> (Arc<GModule>, Subgroup, FiniteGroup, Vec<u64>, Vec<u64>) {
    // G = N × S as one abelian tuple group, N the first factors
    let mut orders = n_orders.to_vec();
    orders.push(s_order);
    let g = FiniteGroup::abelian(&orders);
    let gm = Arc::new(GModule::trivial_action(
        g.clone(),
        LambdaModule::from_orders(ell, &[ell]),
    ));
    // N = tuples with last coordinate 0
    let nsize: u64 = n_orders.iter().product();
    let elems: Vec<u64> = (0..g.order()).filter(|&x| x / nsize == 0).collect();
    let (sub, embed) = g.subgroup(&elems).unwrap();
    let nsub = Subgroup::new(sub, embed);
    let q = FiniteGroup::cyclic(s_order);
    let proj: Vec<u64> = (0..g.order()).map(|x| x / nsize).collect();
    let section: Vec<u64> = (0..s_order).map(|t| t * nsize).collect();
    (gm, nsub, q, proj, section)
}

#[test]
fn delta_of_triple_cup_on_z2_cubed() {
    // G = (ℤ/2)³, N = (ℤ/2)², z = χ₁∪χ₂∪χ₃: δ(z)(σ) = [χ₁∪χ₂] ≠ 0
    let lim = limits();
    let (gm, nsub, q, proj, section) = split_setup(&[2, 2], 2, 2);
    let h1 = cohomology(&gm, 1, Backend::Abelian, &lim).unwrap();
    assert_eq!(h1.reps.len(), 3);
    let pr = tensor_pairing(&gm.module, &gm.module).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(gm.group.clone(), pr.target.clone()));
    let x12 = cup(&h1.reps[0], &h1.reps[1], &pr, Arc::clone(&gm_t)).unwrap();
    let z = as_coeff(&gm, &cup(&as_coeff(&gm, &x12), &h1.reps[2], &pr, gm_t).unwrap());
    let d = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, &lim).unwrap();
    // H²(N) = ⟨c₁, χ₁χ₂, c₂⟩; the value at the S-generator is [χ₁χ₂]
    assert_eq!(d.h2n.orders(), &[2, 2, 2]);
    assert!(d.cocycle[1].iter().any(|&v| v != 0), "δ(z) nontrivial");
    assert!(d.class.iter().any(|&v| v != 0));
    // and the value is exactly the χ₁χ₂ class: pair against the theory
    // rebuild the exact theory h3_edge_delta used internally: same group
    // object, same backend choice
    let gm_n = Arc::new(
        GModule::trivial_action(nsub.group.clone(), gm.module.clone()),
    );
    let h2n = cohomology(&gm_n, 2, Backend::Auto, &lim).unwrap();
    let h1n = cohomology(&gm_n, 1, Backend::Auto, &lim).unwrap();
    let prn = tensor_pairing(&gm_n.module, &gm_n.module).unwrap();
    let gm_tn = Arc::new(GModule::trivial_action(gm_n.group.clone(), prn.target.clone()));
    let chi12 = as_coeff(&gm_n, &cup(&h1n.reps[0], &h1n.reps[1], &prn, gm_tn).unwrap());
    let expect = h2n.coords(&chi12, &lim).unwrap();
    assert_eq!(d.cocycle[1], expect);
}

#[test]
fn delta_of_coboundary_is_zero() {
    let lim = limits();
    let (gm, nsub, q, proj, section) = split_setup(&[2, 2], 2, 2);
    let mut rng = Rng::new(5);
    let order = gm.group.order() as usize;
    // z = d(random normalized 2-cochain)
    let mut data = vec![0u64; order * order];
    for v in &mut data {
        *v = rng.below(2);
    }
    for i in 0..order {
        data[i] = 0;
        data[i * order] = 0;
    }
    let c2 = Cochain::from_dense(Arc::clone(&gm), 2, data);
    let z = c2.coboundary().densify().unwrap();
    let d = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, &lim).unwrap();
    assert!(d.class.iter().all(|&v| v == 0));
    assert!(d.cocycle.iter().all(|u| u.iter().all(|&v| v == 0)));
}

#[test]
fn delta_of_inflated_cocycle_is_zero() {
    // z inflated from Q = G/N sits in higher filtration; checked on
    // G = ℤ/4 × ℤ/2 with N = ℤ/4
    let lim = limits();
    let (gm, nsub, q, proj, section) = split_setup(&[4], 2, 2);
    // H³(Q, ℤ/2) for Q = ℤ/2: generator χ³; inflate to G
    let gm_q = Arc::new(GModule::trivial_action(
        q.clone(),
        gm.module.clone(),
    ));
    let h3q = cohomology(&gm_q, 3, Backend::Abelian, &lim).unwrap();
    assert_eq!(h3q.reps.len(), 1);
    let z = h3q.reps[0].inflate(Arc::clone(&gm), Arc::new(proj.clone()));
    let d = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, &lim).unwrap();
    assert!(d.class.iter().all(|&v| v == 0), "{:?}", d);
}

#[test]
fn delta_choice_independence() {
    // three group shapes; vary the section, the correction, and the
    // representative; the class must not move
    let lim = limits();
    let mut rng = Rng::new(42);
    for (n_orders, s_order) in [
        (vec![2u64, 2], 2u64),
        (vec![4, 2], 2),
        (vec![4, 4], 4),
    ] {
        let (gm, nsub, q, proj, section) = split_setup(&n_orders, s_order, 2);
        let order = gm.group.order() as usize;
        let nsize: u64 = n_orders.iter().product();
        let h3 = cohomology(&gm, 3, Backend::Abelian, &lim).unwrap();
        // sample from classes vanishing identically on N so the edge-map
        // precondition always holds
        let eligible: Vec<_> = h3
            .reps
            .iter()
            .filter(|rep| {
                let m = nsub.group.order();
                (0..m).all(|a| {
                    (0..m).all(|b| {
                        (0..m).all(|c| {
                            let args = [
                                nsub.embed[a as usize],
                                nsub.embed[b as usize],
                                nsub.embed[c as usize],
                            ];
                            rep.eval(&args).iter().all(|&v| v == 0)
                        })
                    })
                })
            })
            .collect();
        assert!(!eligible.is_empty());
        for _ in 0..7 {
            let mut z = Cochain::zero(Arc::clone(&gm), 3);
            for rep in &eligible {
                z = z.add(&rep.scale(rng.below(2)));
            }
            let mut data = vec![0u64; order * order];
            for v in &mut data {
                *v = rng.below(2);
            }
            for i in 0..order {
                data[i] = 0;
                data[i * order] = 0;
            }
            let z = z.add(&Cochain::from_dense(Arc::clone(&gm), 2, data).coboundary());
            let z = z.densify().unwrap();
            let base = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, &lim).unwrap();
            // vary the section: multiply nonidentity section points by a
            // random element of N
            let mut section2 = section.clone();
            for s in section2.iter_mut().skip(1) {
                let nrand = rng.below(nsize);
                *s = gm.group.mul(nrand, *s);
            }
            let d2 = h3_edge_delta(&gm, &nsub, &q, &proj, &section2, &z, &lim).unwrap();
            assert_eq!(base.class, d2.class, "section independence {n_orders:?}");
            // vary the representative: z + d(random 2-cochain)
            let mut data = vec![0u64; order * order];
            for v in &mut data {
                *v = rng.below(2);
            }
            for i in 0..order {
                data[i] = 0;
                data[i * order] = 0;
            }
            let z3 = z
                .add(&Cochain::from_dense(Arc::clone(&gm), 2, data).coboundary())
                .densify()
                .unwrap();
            let d3 = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z3, &lim).unwrap();
            assert_eq!(base.class, d3.class, "representative independence");
        }
    }
}

#[test]
fn lemma_45_triviality_on_synthetic_towers() {
    let lim = limits();
    // (ℤ/2)² → (ℤ/8)²: all of H³ dies
    let gm_low = trivial_gm(&[2, 2], 2, &[2]);
    let gm_up = trivial_gm(&[8, 8], 2, &[2]);
    let proj: Vec<u64> = (0..64)
        .map(|x| {
            let (a, b) = (x % 8, x / 8);
            (a % 2) + 2 * (b % 2)
        })
        .collect();
    let rep = h3_inflation_triviality_check(&gm_low, Arc::clone(&gm_up), &proj, Backend::Auto, &lim)
        .unwrap();
    assert_eq!(rep.h3_orders, vec![2, 2, 2, 2]);
    assert!(rep.all_trivial(), "{:?}", rep.lines);

    // (ℤ/3)² → (ℤ/27)² via functional certificates
    let gm_low = trivial_gm(&[3, 3], 3, &[3]);
    let gm_up = trivial_gm(&[27, 27], 3, &[3]);
    let proj: Vec<u64> = (0..729)
        .map(|x| {
            let (a, b) = (x % 27, x / 27);
            (a % 3) + 3 * (b % 3)
        })
        .collect();
    let rep = h3_inflation_triviality_check(&gm_low, Arc::clone(&gm_up), &proj, Backend::Auto, &lim)
        .unwrap();
    assert!(rep.all_trivial());

    // trivial group: vacuous
    let gm0 = trivial_gm(&[], 2, &[2]);
    let rep =
        h3_inflation_triviality_check(&gm0, Arc::clone(&gm0), &[0], Backend::Generic, &lim)
            .unwrap();
    assert!(rep.lines.is_empty() && rep.all_trivial());
}

#[test]
fn cyclic_h1_classics() {
    // trivial action: H¹(ℤ/m, ℤ/d) = ℤ/gcd
    let m4 = LambdaModule::from_orders(4, &[4]);
    let id = vec![vec![1u64]];
    let h = cyclic_h1(&m4, &id, 6).unwrap();
    assert_eq!(h.module.orders(), &[2]); // gcd(6,4)
    // sign action of ℤ/2 on ℤ/4: H¹ = ℤ/2
    let neg = vec![vec![3u64]];
    let h = cyclic_h1(&m4, &neg, 2).unwrap();
    assert_eq!(h.module.orders(), &[2]);
    // matches the generic backend on the same data
    let lim = limits();
    let gm = GModule::with_action(FiniteGroup::cyclic(2), m4, &[vec![vec![3]]]).unwrap();
    let th = cohomology(&gm, 1, Backend::Generic, &lim).unwrap();
    assert_eq!(th.cohomology.orders(), h.module.orders());
}

#[test]
fn nontrivial_action_cohomology() {
    // swap action of ℤ/2 on (ℤ/2)²: induced module, Shapiro says
    // H^i(ℤ/2, ind) = H^i(1, ℤ/2): ℤ/2 in degree 0, zero above
    let lim = limits();
    let g = FiniteGroup::cyclic(2);
    let m = LambdaModule::from_orders(2, &[2, 2]);
    let gm = GModule::with_action(g, m, &[vec![vec![0, 1], vec![1, 0]]]).unwrap();
    let h0 = cohomology(&gm, 0, Backend::Generic, &lim).unwrap();
    assert_eq!(h0.cohomology.orders(), &[2]);
    for deg in 1..=2usize {
        let th = cohomology(&gm, deg, Backend::Generic, &lim).unwrap();
        assert!(th.cohomology.is_zero(), "degree {deg}: {:?}", th);
    }
}

#[test]
fn dd_zero_spot_checks_up_to_order_64() {
    let lim = limits();
    let _ = &lim;
    let mut rng = Rng::new(2024);
    for orders in [vec![2u64, 2, 2], vec![8, 4], vec![64], vec![3, 3], vec![27]] {
        let n = if orders[0] % 2 == 0 { 4 } else { 9 };
        let gm = trivial_gm(&orders, n, &[n]);
        let order = gm.group.order() as usize;
        for deg in 1..=3usize {
            for _ in 0..40 {
                let cells = order.pow(deg as u32).min(1 << 14);
                let mut data = vec![0u64; order.pow(deg as u32)];
                for v in data.iter_mut().take(cells) {
                    *v = rng.below(n);
                }
                let f = Cochain::from_dense(Arc::clone(&gm), deg, data);
                let ddf = f.coboundary().coboundary();
                for _ in 0..6 {
                    let args: Vec<u64> =
                        (0..deg + 2).map(|_| rng.below(order as u64)).collect();
                    assert_eq!(ddf.eval(&args), vec![0], "{orders:?} deg {deg}");
                }
            }
        }
    }
}

#[allow(dead_code)]
fn debug_theory(th: &CohomologyTheory) {
    eprintln!("{th:?}");
}

#[test]
fn cup_is_bilinear_and_natural_at_cochain_level() {
    // exact pointwise identities: cup(f+g, h) = cup(f,h) + cup(g,h) and
    // A∘cup(f, h) = cup(A∘f, h) for an automorphism A of the left module
    let lim = limits();
    let _ = &lim;
    let mut rng = Rng::new(0xb111);
    let g = FiniteGroup::abelian(&[4, 2]);
    let m1 = LambdaModule::from_orders(2, &[2, 2]);
    let m2 = LambdaModule::from_orders(2, &[2]);
    let gm1 = Arc::new(GModule::trivial_action(g.clone(), m1.clone()));
    let gm2 = Arc::new(GModule::trivial_action(g.clone(), m2.clone()));
    let pr = tensor_pairing(&m1, &m2).unwrap();
    let gm_t = Arc::new(GModule::trivial_action(g.clone(), pr.target.clone()));
    let order = g.order() as usize;
    let swap = |v: &[u64]| vec![v[1], v[0]];
    for _ in 0..10 {
        let f1 = Cochain::from_dense(
            Arc::clone(&gm1),
            1,
            (0..order * 2).map(|_| rng.below(2)).collect(),
        );
        let f2 = Cochain::from_dense(
            Arc::clone(&gm1),
            1,
            (0..order * 2).map(|_| rng.below(2)).collect(),
        );
        let h = Cochain::from_dense(
            Arc::clone(&gm2),
            2,
            (0..order * order).map(|_| rng.below(2)).collect(),
        );
        let lhs = cup(&f1.add(&f2), &h, &pr, Arc::clone(&gm_t)).unwrap();
        let rhs = cup(&f1, &h, &pr, Arc::clone(&gm_t))
            .unwrap()
            .add(&cup(&f2, &h, &pr, Arc::clone(&gm_t)).unwrap());
        // naturality: swapping the two coordinates of M₁ transports the
        // product through swap ⊗ id on the tensor target
        let f1s = {
            let f = f1.clone();
            Cochain::from_fn(Arc::clone(&gm1), 1, false, move |args| swap(&f.eval(args)))
        };
        let swapped_cup = cup(&f1s, &h, &pr, Arc::clone(&gm_t)).unwrap();
        let transported = {
            let c = cup(&f1, &h, &pr, Arc::clone(&gm_t)).unwrap();
            let values = pr.values.clone();
            let target = pr.target.clone();
            let _ = values;
            // swap ⊗ id permutes the tensor generators (i,j) -> (1-i, j)
            let c2 = c.clone();
            let tgt = target.clone();
            Cochain::from_fn(Arc::clone(&gm_t), 3, false, move |args| {
                let v = c2.eval(args);
                // target of rank 2 with generators e0⊗e0... the tensor of
                // (2,2)x(2) has generators (0,0) and (1,0): swap exchanges
                swap(&tgt.normalize(&v))
            })
        };
        for _ in 0..40 {
            let a3: Vec<u64> = (0..3).map(|_| rng.below(order as u64)).collect();
            assert_eq!(lhs.eval(&a3), rhs.eval(&a3));
            assert_eq!(swapped_cup.eval(&a3), transported.eval(&a3));
        }
    }
}

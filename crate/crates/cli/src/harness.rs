//! Synthetic-tower harnesses: the spectral-sequence toolkit exercised on
//! towers built from π = ℤ² with kernels 2ⁱℤ² (or nⁱ for --n), plus the
//! degree-3 edge-map oracle and its choice-independence properties.

use std::sync::Arc;

use curvecoh::error::{Error, Result};
use curvecoh::fpgroups::FiniteGroup;
use curvecoh::groupcohom::{
    cohomology, cup, h1_iso_certificate, h2_image, h3_edge_delta, h3_inflation_triviality_check,
    rgamma_representative, tensor_pairing, Backend, Cochain, GModule, Subgroup,
};
use curvecoh::limits::Limits;
use curvecoh::linalg::LambdaModule;
use curvecoh::report::{Payload, Report};
use curvecoh::rng::Rng;

use crate::commands::Options;

fn gm_square(nk: u64, ell: u64) -> Arc<GModule> {
    Arc::new(GModule::trivial_action(
        FiniteGroup::abelian(&[nk, nk]),
        LambdaModule::from_orders(ell, &[ell]),
    ))
}

fn square_proj(from: u64, to: u64) -> Vec<u64> {
    (0..from * from)
        .map(|x| {
            let (a, b) = (x % from, x / from);
            (a % to) + to * (b % to)
        })
        .collect()
}

fn finish(payload: Payload, emit_json: bool, started: std::time::Instant) -> Result<()> {
    let ok = payload.all_checks_pass();
    let failed: Vec<String> = payload
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    let report = Report {
        payload,
        timing_ms: started.elapsed().as_millis(),
        cache_hits: 0,
        cache_misses: 0,
    };
    if emit_json {
        println!("{}", report.render_json());
    } else {
        print!("{}", report.render_text());
    }
    if ok {
        Ok(())
    } else {
        Err(Error::verification(
            failed.join(", "),
            "harness check failed",
        ))
    }
}

pub fn lemma(which: &str, opts: &Options) -> Result<()> {
    let started = std::time::Instant::now();
    let n = opts.n.unwrap_or(2);
    let lim = Limits::default();
    let mut payload = Payload::new(&format!("check lemma {which}"), opts.seed);
    payload.inputs.insert("n".into(), n.to_string());
    match which {
        "4.1" => {
            // inflation H¹(G″, M) ≅ H¹(π, M) on the square tower: the
            // certified dimension equals Hom(ℤ², Λ) = Λ²
            let gm2 = gm_square(n * n, n);
            let kernel = {
                let elems: Vec<u64> = (0..(n * n) * (n * n))
                    .filter(|&x| {
                        let (a, b) = (x % (n * n), x / (n * n));
                        a % n == 0 && b % n == 0
                    })
                    .collect();
                let (sub, embed) = gm2.group.subgroup(&elems)?;
                Subgroup::new_preferring_abelian(sub, embed)
            };
            let th = h1_iso_certificate(&gm2, &kernel, Backend::Auto, &lim)?;
            payload.module("H1(G'', M)", th.cohomology.orders());
            payload.check(
                "h1-inflation-iso",
                th.cohomology.orders() == [n, n],
                format!("expected Λ², got {:?}", th.cohomology.orders()),
            );
        }
        "4.2" => {
            // im(H²(G′) → H²(G″)) has dimension 1 for π = ℤ² (the cup
            // class), dimension 0 for π = ℤ
            let gm1 = gm_square(n * n, n);
            let gm2 = gm_square(n * n * n, n);
            let img = h2_image(
                &gm1,
                Arc::clone(&gm2),
                &square_proj(n * n * n, n * n),
                Backend::Auto,
                &lim,
            )?;
            payload.module("im(H2(G') -> H2(G''))", img.module.orders());
            payload.check(
                "h2-image-rank",
                img.module.orders() == [n],
                format!("expected Λ¹ (the exterior square of ℤ²), got {:?}", img.module.orders()),
            );
            let gmc1 = Arc::new(GModule::trivial_action(
                FiniteGroup::cyclic(n * n),
                LambdaModule::from_orders(n, &[n]),
            ));
            let gmc2 = Arc::new(GModule::trivial_action(
                FiniteGroup::cyclic(n * n * n),
                LambdaModule::from_orders(n, &[n]),
            ));
            let proj: Vec<u64> = (0..n * n * n).map(|x| x % (n * n)).collect();
            let img0 = h2_image(&gmc1, gmc2, &proj, Backend::Auto, &lim)?;
            payload.check(
                "h2-image-cyclic-vanishes",
                img0.module.is_zero(),
                format!("π = ℤ surrogate gives {:?}", img0.module.orders()),
            );
        }
        "4.3" => {
            let gm1 = gm_square(n * n, n);
            let gm2 = gm_square(n * n * n, n);
            let c = rgamma_representative(
                &gm1,
                Arc::clone(&gm2),
                &square_proj(n * n * n, n * n),
                Backend::Auto,
                &lim,
            )?;
            payload.module("complex H0", c.h0.orders());
            payload.module("complex H1", c.h1.orders());
            payload.module("complex H2", c.h2.orders());
            payload.check(
                "rgamma-cohomology",
                c.h0.orders() == [n] && c.h1.orders() == [n, n] && c.h2.orders() == [n],
                "expected (Λ, Λ², Λ)",
            );
        }
        "4.4" => {
            lemma_44(&mut payload, opts.seed, &lim)?;
        }
        "4.5" => {
            // inflation H³(G, M) → H³(G″, M) is trivial along the square
            // tower at distance two
            let gm_low = gm_square(n, n);
            let gm_up = gm_square(n * n * n, n);
            let rep = h3_inflation_triviality_check(
                &gm_low,
                Arc::clone(&gm_up),
                &square_proj(n * n * n, n),
                Backend::Auto,
                &lim,
            )?;
            payload.module("H3(G, M)", &rep.h3_orders);
            for line in &rep.lines {
                payload.check(
                    &format!("h3-inflation-dies-{}", line.class_index),
                    line.trivial,
                    line.certificate.clone(),
                );
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown lemma '{other}'; available: 4.1 4.2 4.3 4.4 4.5"
            )))
        }
    }
    finish(payload, opts.emit_json, started)
}

/// The degree-3 edge map oracle and the three choice independences over
/// three group shapes.
fn lemma_44(payload: &mut Payload, seed: u64, lim: &Limits) -> Result<()> {
    // oracle: G = (ℤ/2)³, N = (ℤ/2)², z = χ₁∪χ₂∪χ₃: δ(z)(σ) = [χ₁∪χ₂]
    let g = FiniteGroup::abelian(&[2, 2, 2]);
    let gm = Arc::new(GModule::trivial_action(
        g.clone(),
        LambdaModule::from_orders(2, &[2]),
    ));
    let elems: Vec<u64> = (0..8).filter(|&x| x / 4 == 0).collect();
    let (sub, embed) = g.subgroup(&elems)?;
    let nsub = Subgroup::new_preferring_abelian(sub, embed);
    let q = FiniteGroup::cyclic(2);
    let proj: Vec<u64> = (0..8).map(|x| x / 4).collect();
    let section = vec![0u64, 4];
    let h1 = cohomology(&gm, 1, Backend::Abelian, lim)?;
    let pr = tensor_pairing(&gm.module, &gm.module)?;
    let gm_t = Arc::new(GModule::trivial_action(g.clone(), pr.target.clone()));
    let x12 = cup(&h1.reps[0], &h1.reps[1], &pr, Arc::clone(&gm_t))?;
    let x12m = reinterpret(&gm, &x12);
    let z = reinterpret(&gm, &cup(&x12m, &h1.reps[2], &pr, Arc::clone(&gm_t))?);
    let d = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, lim)?;
    payload.module("H1(Q, H2(N))", d.h1_module.orders());
    payload.check(
        "delta-triple-cup-nontrivial",
        d.class.iter().any(|&v| v != 0) && d.cocycle[1].iter().any(|&v| v != 0),
        format!("δ(χ₁χ₂χ₃)(σ) has coordinates {:?}", d.cocycle[1]),
    );

    // choice independence over three shapes, randomized
    let mut rng = Rng::new(seed ^ 0x44);
    let mut instances = 0;
    for (n_orders, s_order) in [(vec![2u64, 2], 2u64), (vec![4, 2], 2), (vec![4, 4], 4)] {
        let mut orders = n_orders.clone();
        orders.push(s_order);
        let g = FiniteGroup::abelian(&orders);
        let gm = Arc::new(GModule::trivial_action(
            g.clone(),
            LambdaModule::from_orders(2, &[2]),
        ));
        let nsize: u64 = n_orders.iter().product();
        let elems: Vec<u64> = (0..g.order()).filter(|&x| x / nsize == 0).collect();
        let (sub, embed) = g.subgroup(&elems)?;
        let nsub = Subgroup::new_preferring_abelian(sub, embed);
        let q = FiniteGroup::cyclic(s_order);
        let proj: Vec<u64> = (0..g.order()).map(|x| x / nsize).collect();
        let section: Vec<u64> = (0..s_order).map(|t| t * nsize).collect();
        let h3 = cohomology(&gm, 3, Backend::Abelian, lim)?;
        // restrict the sample space to classes that vanish identically on N
        // (monomials involving the quotient direction), so the edge-map
        // precondition holds for every draw
        let eligible: Vec<&Cochain> = h3
            .reps
            .iter()
            .filter(|rep| {
                let m = nsub.group.order();
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..m {
                            let args = [nsub.embed[a as usize], nsub.embed[b as usize], nsub.embed[c as usize]];
                            if rep.eval(&args).iter().any(|&v| v != 0) {
                                return false;
                            }
                        }
                    }
                }
                true
            })
            .collect();
        let order = g.order() as usize;
        let mut shape_instances = 0;
        let mut draws = 0;
        while shape_instances < 7 && draws < 40 {
            draws += 1;
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
            let z = z
                .add(&Cochain::from_dense(Arc::clone(&gm), 2, data).coboundary())
                .densify()?;
            let base = match h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z, lim) {
                Ok(b) => b,
                Err(e) => {
                    payload.notes.push(format!("draw rejected on {n_orders:?}: {e}"));
                    continue;
                }
            };
            // vary the section
            let mut section2 = section.clone();
            for s in section2.iter_mut().skip(1) {
                *s = g.mul(rng.below(nsize), *s);
            }
            let d2 = h3_edge_delta(&gm, &nsub, &q, &proj, &section2, &z, lim)?;
            // vary the representative
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
                .densify()?;
            let d3 = h3_edge_delta(&gm, &nsub, &q, &proj, &section, &z3, lim)?;
            if base.class != d2.class || base.class != d3.class {
                payload.check(
                    "delta-choice-independence",
                    false,
                    format!("classes moved on shape {n_orders:?}"),
                );
                return Ok(());
            }
            shape_instances += 1;
            instances += 1;
        }
    }
    payload.check(
        "delta-choice-independence",
        instances >= 20,
        format!("{instances} randomized instances over three shapes (section, correction, representative)"),
    );
    Ok(())
}

/// View a cochain valued in Λ ⊗ Λ ≅ Λ back over the base module.
fn reinterpret(gm: &Arc<GModule>, c: &Cochain) -> Cochain {
    let cc = c.clone();
    Cochain::from_fn(Arc::clone(gm), c.degree, true, move |args| cc.eval(args))
}

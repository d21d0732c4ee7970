//! Command implementations: parse the document, run the pipeline, emit a
//! report. Expensive commands consult the payload cache when a cache
//! directory is configured; tower levels additionally persist their group
//! tables in the binary format.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use curvecoh::arithmetic::{cup12, h1_h2_arithmetic, h3_arithmetic, ArithmeticTower};
use curvecoh::cache::{encode_coset_table, encode_finite_group, Cache};
use curvecoh::coverings::{
    build_x_n, build_yi, component_curve, extend_reducible, lift_irreducible, monodromy_action,
    normalization_xn_datum, CoveringModel,
};
use curvecoh::curves::BaseKind;
use curvecoh::document::CurveDocument;
use curvecoh::error::{Error, Result};
use curvecoh::groupcohom::Backend;
use curvecoh::limits::Limits;
use curvecoh::report::{Payload, Report, TableLine};
use curvecoh::sheafcohom::{
    cup11, effaceability_check, euler_characteristic_check, h0, h1, h2, rgamma as rgamma_pipeline,
    LisseSheaf, Tower,
};

pub struct Options {
    pub n: Option<u64>,
    pub depth: Option<usize>,
    pub backend: String,
    pub max_order: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub emit_json: bool,
    pub seed: u64,
}

impl Options {
    fn backend(&self) -> Result<Backend> {
        self.backend.parse()
    }

    fn cache(&self) -> Result<Option<Cache>> {
        match &self.cache_dir {
            Some(d) => Ok(Some(Cache::open(d)?)),
            None => Ok(None),
        }
    }
}

pub struct Ctx {
    pub doc: CurveDocument,
    pub sheaf: LisseSheaf,
    pub limits: Limits,
    pub backend: Backend,
    pub payload: Payload,
    pub cache: Option<Cache>,
    started: Instant,
    emit_json: bool,
}

pub fn load(path: &Path, command: &str, opts: &Options) -> Result<Ctx> {
    let started = Instant::now();
    let mut doc = CurveDocument::parse_file(path)?;
    if let Some(n) = opts.n {
        if n < 2 {
            return Err(Error::invalid("--n must be at least 2"));
        }
        doc.modulus = n;
        // stalk orders must divide the new modulus; a plain constant sheaf
        // rescales, anything else must be edited in the document
        if doc.stalk_orders.iter().all(|&d| n % d == 0) {
            // keep
        } else if doc.monodromy.is_empty() {
            doc.stalk_orders = vec![n];
        } else {
            return Err(Error::invalid(
                "--n incompatible with the document's stalk orders",
            ));
        }
        doc.canonical = doc.canonical_form();
    }
    let mut limits = doc.limits.clone();
    if let Some(m) = opts.max_order {
        limits.max_group_order = m;
    }
    let sheaf = doc.sheaf()?;
    let mut payload = Payload::new(command, opts.seed);
    payload
        .inputs
        .insert("doc".into(), path.display().to_string());
    payload.inputs.insert("n".into(), doc.modulus.to_string());
    Ok(Ctx {
        doc,
        sheaf,
        limits,
        backend: opts.backend()?,
        payload,
        cache: opts.cache()?,
        started,
        emit_json: opts.emit_json,
    })
}

impl Ctx {
    /// Try the payload cache; on a hit the cached payload is emitted as-is.
    fn cached_payload(&self, op_key: &str) -> Option<Payload> {
        let cache = self.cache.as_ref()?;
        let key = format!(
            "payload\u{0}{}\u{0}{}\u{0}{}\u{0}{}",
            curvecoh::report::PAYLOAD_VERSION,
            op_key,
            self.payload.seed,
            self.doc.canonical
        );
        let bytes = cache.get(key.as_bytes())?;
        serde_json::from_slice(&bytes).ok()
    }

    fn store_payload(&self, op_key: &str) {
        if let Some(cache) = self.cache.as_ref() {
            let key = format!(
                "payload\u{0}{}\u{0}{}\u{0}{}\u{0}{}",
                curvecoh::report::PAYLOAD_VERSION,
                op_key,
                self.payload.seed,
                self.doc.canonical
            );
            let _ = cache.put(key.as_bytes(), self.payload.canonical_json().as_bytes());
        }
    }

    /// Persist a tower's kernel coset tables and level group tables.
    fn store_tower(&self, tower: &Tower) {
        let Some(cache) = self.cache.as_ref() else {
            return;
        };
        for (i, lvl) in tower.levels.iter().enumerate() {
            let q = &lvl.quotient;
            if let Ok(kh) = q.kernel_handle() {
                let key = format!(
                    "coset-table\u{0}{}\u{0}level{}\u{0}n{}\u{0}{}",
                    curvecoh::report::PAYLOAD_VERSION,
                    i + 1,
                    self.doc.modulus,
                    self.doc.canonical
                );
                let _ = cache.put(key.as_bytes(), &encode_coset_table(&kh.table));
            }
            if let Some(bytes) = encode_finite_group(q.group()) {
                let key = format!(
                    "group\u{0}{}\u{0}level{}\u{0}n{}\u{0}{}",
                    curvecoh::report::PAYLOAD_VERSION,
                    i + 1,
                    self.doc.modulus,
                    self.doc.canonical
                );
                let _ = cache.put(key.as_bytes(), &bytes);
            }
        }
    }

    pub fn finish(mut self, math_ok: bool) -> Result<()> {
        self.payload.notes.sort();
        let report = Report {
            payload: self.payload,
            timing_ms: self.started.elapsed().as_millis(),
            cache_hits: self.cache.as_ref().map(|c| c.hits.get()).unwrap_or(0),
            cache_misses: self.cache.as_ref().map(|c| c.misses.get()).unwrap_or(0),
        };
        if self.emit_json {
            println!("{}", report.render_json());
        } else {
            print!("{}", report.render_text());
        }
        if !math_ok {
            let failed: Vec<&str> = report
                .payload
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            return Err(Error::verification(
                failed.join(", "),
                "one or more verification checks failed",
            ));
        }
        Ok(())
    }
}

fn depth_or(opts: &Options, default: usize) -> usize {
    opts.depth.unwrap_or(default)
}

pub fn curve_validate(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "curve validate", opts)?;
    let report = ctx.doc.curve.validate()?;
    ctx.payload.check(
        "curve-valid",
        true,
        format!(
            "{} component(s), {} singular point(s), branch counts {:?}, χ = {}",
            report.components,
            report.singular_points,
            report.branch_counts,
            report.euler_characteristic
        ),
    );
    let pi1 = ctx.doc.curve.pi1_presentation()?;
    ctx.payload.notes.push(format!(
        "fundamental group generators: {}",
        pi1.pres.gen_names().join(" ")
    ));
    let (eligible, why) = ctx.doc.curve.kpi1_eligibility();
    ctx.payload.notes.push(format!(
        "degree-2 genus hypothesis: {} ({why})",
        if eligible { "holds" } else { "fails" }
    ));
    ctx.finish(true)
}

pub fn curve_h1(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "curve h1", opts)?;
    let m = ctx.doc.curve.h1_module(ctx.doc.modulus)?;
    ctx.payload.module("H1(X, Lambda)", m.orders());
    ctx.payload.check(
        "h1-cross-check",
        true,
        "incidence rank equals abelianization rank",
    );
    ctx.finish(true)
}

fn report_covering(ctx: &mut Ctx, name: &str, cov: &CoveringModel) -> Result<bool> {
    let rep = cov.verify();
    ctx.payload.notes.push(format!(
        "{name}: degree {}, automorphism group of order {}",
        rep.degree, rep.aut_order
    ));
    for c in &rep.checks {
        ctx.payload
            .check(&format!("{name}/{}", c.name), c.pass, c.detail.clone());
    }
    if rep.all_pass() {
        let q = monodromy_action(cov, &ctx.limits)?;
        let orders = q
            .group()
            .abelianized_form()
            .map(|(g, _, _)| g.abelian_orders().unwrap_or(&[]).to_vec());
        match orders {
            Some(o) => ctx.payload.module(&format!("{name} deck group"), &o),
            None => ctx.payload.notes.push(format!(
                "{name}: nonabelian deck group of order {}",
                q.group().order()
            )),
        }
    }
    Ok(rep.all_pass())
}

pub fn cover_build_xn(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cover build-xn", opts)?;
    let cov = build_x_n(&ctx.doc.curve, ctx.doc.modulus, &ctx.limits)?;
    let ok = report_covering(&mut ctx, "xn", &cov)?;
    ctx.finish(ok)
}

pub fn cover_build_yi(path: &Path, point: usize, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cover build-yi", opts)?;
    let cov = build_yi(&ctx.doc.curve, point, ctx.doc.modulus)?;
    let ok = report_covering(&mut ctx, &format!("y{point}"), &cov)?;
    ctx.finish(ok)
}

pub fn cover_lift(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cover lift", opts)?;
    if !ctx.doc.curve.is_integral() {
        return Err(Error::invalid("cover lift requires an integral curve"));
    }
    let genus = ctx.doc.curve.components[0].genus;
    let datum = normalization_xn_datum(genus, ctx.doc.modulus)?;
    let cov = lift_irreducible(&ctx.doc.curve, &datum)?;
    let ok = report_covering(&mut ctx, "lift", &cov)?;
    ctx.finish(ok)
}

pub fn cover_extend(path: &Path, component: usize, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cover extend", opts)?;
    if component >= ctx.doc.curve.components.len() {
        return Err(Error::invalid("component index out of range"));
    }
    let comp = component_curve(&ctx.doc.curve, component);
    let comp_cover = build_x_n(&comp, ctx.doc.modulus, &ctx.limits)?;
    let cov = extend_reducible(&ctx.doc.curve, component, &comp_cover)?;
    let ok = report_covering(&mut ctx, "extend", &cov)?;
    ctx.finish(ok)
}

pub fn cover_verify(path: &Path, corrupt: Option<&str>, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cover verify", opts)?;
    let mut cov = build_x_n(&ctx.doc.curve, ctx.doc.modulus, &ctx.limits)?;
    if let Some(spec) = corrupt {
        let parts: Vec<usize> = spec
            .split(':')
            .map(|s| s.parse().map_err(|_| Error::invalid("corrupt-gluing wants point:branch:s1:s2")))
            .collect::<Result<_>>()?;
        if parts.len() != 4 {
            return Err(Error::invalid("corrupt-gluing wants point:branch:s1:s2"));
        }
        cov.corrupt_swap(parts[0], parts[1], parts[2], parts[3]);
        ctx.payload
            .notes
            .push(format!("gluing corrupted at {spec}"));
    }
    let rep = cov.verify();
    for c in &rep.checks {
        ctx.payload
            .check(&format!("xn/{}", c.name), c.pass, c.detail.clone());
    }
    ctx.finish(rep.all_pass())
}

fn build_tower_ctx(ctx: &Ctx, depth: usize) -> Result<Tower> {
    let t = Tower::build(&ctx.sheaf, depth, &ctx.limits)?;
    ctx.store_tower(&t);
    Ok(t)
}

pub fn cohomology(path: &Path, degree: usize, corrupt: bool, opts: &Options) -> Result<()> {
    let command = format!("cohomology h{degree}");
    let mut ctx = load(path, &command, opts)?;
    let op_key = format!("{command} depth={:?} backend={}", opts.depth, opts.backend);
    if !corrupt {
        if let Some(p) = ctx.cached_payload(&op_key) {
            ctx.payload = p;
            return ctx.finish(true);
        }
    }
    let arithmetic = ctx.doc.curve.base == BaseKind::FiniteField;
    match (degree, arithmetic) {
        (0, _) => {
            let m = h0(&ctx.sheaf, &ctx.limits)?;
            ctx.payload.module("H0", m.orders());
        }
        (1, false) => {
            let tower = build_tower_ctx(&ctx, depth_or(opts, 3))?;
            ctx.payload.tower_orders = tower.orders();
            let th = h1(&tower, ctx.backend, &ctx.limits)?;
            if corrupt {
                let rep = th.reps[0].clone();
                return corrupt_and_verify(ctx, &rep);
            }
            ctx.payload.module("H1", th.cohomology.orders());
            ctx.payload
                .check("h1-certified", true, "classes die on the level-2 kernel");
        }
        (2, false) => {
            let tower = build_tower_ctx(&ctx, depth_or(opts, 3))?;
            ctx.payload.tower_orders = tower.orders();
            let img = h2(&tower, ctx.backend, &ctx.limits)?;
            if corrupt {
                let rep = img.reps[0].clone();
                return corrupt_and_verify(ctx, &rep);
            }
            ctx.payload.module("H2", img.module.orders());
            let (lhs, rhs) = euler_characteristic_check(&ctx.sheaf, &tower, ctx.backend, &ctx.limits)?;
            let prime = {
                let n = ctx.doc.modulus;
                (2..n).all(|k| n % k != 0)
            };
            if prime && ctx.doc.curve.is_proper() {
                ctx.payload.check(
                    "euler-characteristic",
                    lhs == rhs,
                    format!("h0 - h1 + h2 = {lhs}, rank·χ = {rhs}"),
                );
            }
        }
        (3, false) => {
            // separably closed base: the curve has cohomological dimension
            // at most 2, so H³ vanishes
            ctx.payload.module("H3", &[]);
            ctx.payload
                .notes
                .push("separably closed base: H3 vanishes (cohomological dimension 2)".into());
        }
        (1, true) | (2, true) => {
            let frob = ctx.doc.frobenius()?;
            let tower = ArithmeticTower::build(&ctx.sheaf, &frob, depth_or(opts, 3), &ctx.limits)?;
            ctx.payload.tower_orders = tower.full_orders();
            let r = h1_h2_arithmetic(&tower, ctx.backend, &ctx.limits)?;
            if degree == 1 {
                ctx.payload.module("H1", r.h1.cohomology.orders());
            } else {
                ctx.payload.module("H2", r.h2.module.orders());
            }
            ctx.payload.check(
                "degenerate-decomposition",
                true,
                format!(
                    "H1 = {}+{}, H2 = {}+{} across the two columns",
                    r.decomposition[0].0,
                    r.decomposition[0].1,
                    r.decomposition[1].0,
                    r.decomposition[1].1
                ),
            );
        }
        (3, true) => {
            let frob = ctx.doc.frobenius()?;
            let tower = ArithmeticTower::build(&ctx.sheaf, &frob, depth_or(opts, 3), &ctx.limits)?;
            ctx.payload.tower_orders = tower.full_orders();
            let h3 = h3_arithmetic(&tower, 2, 3, ctx.backend, &ctx.limits)?;
            ctx.payload.module("H3", h3.module.orders());
            ctx.payload.check(
                "h3-route-agreement",
                true,
                "periodic and bar computations of H1(S, H2) agree",
            );
        }
        _ => return Err(Error::invalid("unsupported degree")),
    }
    let ok = ctx.payload.all_checks_pass();
    if ok && !corrupt {
        ctx.store_payload(&op_key);
    }
    ctx.finish(ok)
}

/// Damage a certified cocycle representative and re-run the closedness
/// verification; this must fail with the named invariant.
fn corrupt_and_verify(mut ctx: Ctx, rep: &curvecoh::groupcohom::Cochain) -> Result<()> {
    let gm = Arc::clone(&rep.gm);
    let degree = rep.degree;
    let rep = rep.clone();
    let bad = curvecoh::groupcohom::Cochain::from_fn(
        Arc::clone(&gm),
        degree,
        false,
        move |args| {
            let mut v = rep.eval(args);
            // flip one value off the identity row
            if args.iter().all(|&a| a == 1) {
                let d = gm.module.orders()[0];
                v[0] = (v[0] + 1) % d;
            }
            v
        },
    );
    let gm2 = Arc::clone(&bad.gm);
    let d = bad.coboundary();
    let order = gm2.group.order();
    let mut witness = None;
    'outer: for a in 0..order {
        for b in 0..order {
            let mut args = vec![a, b];
            args.resize(degree + 1, 1);
            if d.eval(&args).iter().any(|&v| v != 0) {
                witness = Some(args);
                break 'outer;
            }
        }
    }
    ctx.payload.notes.push("cocycle deliberately corrupted".into());
    ctx.payload.check(
        "cocycle-closedness",
        witness.is_none(),
        match &witness {
            Some(w) => format!("corrupted representative has dz != 0 at {w:?}"),
            None => "representative is closed".into(),
        },
    );
    let ok = ctx.payload.all_checks_pass();
    ctx.finish(ok)
}

pub fn rgamma(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cohomology rgamma", opts)?;
    let tower = build_tower_ctx(&ctx, depth_or(opts, 3))?;
    ctx.payload.tower_orders = tower.orders();
    let r = rgamma_pipeline(&tower, ctx.backend, &ctx.limits)?;
    ctx.payload.module("complex H0", &r.h0);
    ctx.payload.module("complex H1", &r.h1);
    ctx.payload.module("complex H2", &r.h2);
    ctx.payload.module("variant H0", &r.variant_h0);
    ctx.payload.module("variant H1", &r.variant_h1);
    ctx.payload.module("variant H2", &r.variant_h2);
    ctx.payload.notes.push(format!(
        "literal middle-term-at-level-2 variant agrees: {}",
        r.variants_agree
    ));
    ctx.finish(true)
}

pub fn cup11_cmd(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cup 11", opts)?;
    let op_key = format!("cup11 backend={}", opts.backend);
    if let Some(p) = ctx.cached_payload(&op_key) {
        ctx.payload = p;
        return ctx.finish(true);
    }
    let p = cup11(&ctx.sheaf, &ctx.sheaf, ctx.backend, &ctx.limits)?;
    ctx.payload.tables.push(TableLine {
        name: "cup H1 x H1 -> H2".into(),
        left_orders: p.left_orders.clone(),
        right_orders: p.right_orders.clone(),
        target_orders: p.target_orders.clone(),
        entries: p.table.clone(),
    });
    ctx.store_payload(&op_key);
    ctx.finish(true)
}

pub fn cup12_cmd(path: &Path, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "cup 12", opts)?;
    if ctx.doc.curve.base != BaseKind::FiniteField {
        return Err(Error::invalid("cup 12 requires a finite-field base"));
    }
    let op_key = format!("cup12 backend={}", opts.backend);
    if let Some(p) = ctx.cached_payload(&op_key) {
        ctx.payload = p;
        return ctx.finish(true);
    }
    let frob = ctx.doc.frobenius()?;
    let p = cup12(&ctx.sheaf, &ctx.sheaf, &frob, ctx.backend, &ctx.limits)?;
    ctx.payload.tables.push(TableLine {
        name: "cup H1 x H2 -> H3".into(),
        left_orders: p.left_orders.clone(),
        right_orders: p.right_orders.clone(),
        target_orders: p.target_orders.clone(),
        entries: p.table.clone(),
    });
    ctx.store_payload(&op_key);
    ctx.finish(true)
}

pub fn effaceability(path: &Path, degree: usize, ell: bool, opts: &Options) -> Result<()> {
    let mut ctx = load(path, "check effaceability", opts)?;
    let tower = build_tower_ctx(&ctx, depth_or(opts, 3))?;
    ctx.payload.tower_orders = tower.orders();
    let rep = effaceability_check(&tower, degree, ell, ctx.backend, &ctx.limits)?;
    for line in &rep.lines {
        ctx.payload.check(
            &format!("effaceability-h{degree}-class{}", line.class_index),
            line.dies,
            line.detail.clone(),
        );
    }
    if let Some(ok) = rep.ell_restricted {
        ctx.payload
            .check("ell-restricted-tower", ok, "all tower groups are ℓ-groups");
    }
    let ok = rep.all_die();
    ctx.finish(ok)
}

pub fn cache_gc(opts: &Options) -> Result<()> {
    let Some(dir) = &opts.cache_dir else {
        return Err(Error::invalid("cache gc needs --cache-dir"));
    };
    let cache = Cache::open(dir)?;
    let removed = cache.gc()?;
    println!("removed {removed} cache entrie(s)");
    Ok(())
}

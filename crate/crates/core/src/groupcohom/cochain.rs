//! Inhomogeneous bar cochains with dense or functional value storage.
//!
//! Dense tables hold |G|^degree · rank coordinates; anything bigger stays a
//! functional cochain evaluated on demand (inflations to deep tower levels
//! and high-degree cup products are never materialized).

use std::sync::Arc;

use super::gmodule::GModule;
use crate::error::{Error, Result};
use crate::fpgroups::Elt;
use crate::linalg::LambdaModule;

/// Dense materialization threshold in stored coordinates.
const DENSE_CAP: usize = 8_000_000;

type EvalFn = Arc<dyn Fn(&[Elt]) -> Vec<u64> + Send + Sync>;

#[derive(Clone)]
enum Values {
    Dense(Arc<Vec<u64>>),
    Lazy(EvalFn),
}

#[derive(Clone)]
pub struct Cochain {
    pub degree: usize,
    pub gm: Arc<GModule>,
    values: Values,
    /// vanishes whenever an argument is the identity
    pub normalized: bool,
}

impl std::fmt::Debug for Cochain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Cochain(degree {}, |G| = {}, {})",
            self.degree,
            self.gm.group.order(),
            match &self.values {
                Values::Dense(_) => "dense",
                Values::Lazy(_) => "lazy",
            }
        )
    }
}

impl Cochain {
    pub fn zero(gm: Arc<GModule>, degree: usize) -> Self {
        let rank = gm.rank();
        Cochain {
            degree,
            gm,
            values: Values::Lazy(Arc::new(move |_| vec![0u64; rank])),
            normalized: true,
        }
    }

    pub fn from_fn(
        gm: Arc<GModule>,
        degree: usize,
        normalized: bool,
        f: impl Fn(&[Elt]) -> Vec<u64> + Send + Sync + 'static,
    ) -> Self {
        Cochain {
            degree,
            gm,
            values: Values::Lazy(Arc::new(f)),
            normalized,
        }
    }

    pub fn from_dense(gm: Arc<GModule>, degree: usize, data: Vec<u64>) -> Self {
        let rank = gm.rank();
        let order = gm.group.order() as usize;
        debug_assert_eq!(data.len(), order.pow(degree as u32) * rank);
        let mut c = Cochain {
            degree,
            gm,
            values: Values::Dense(Arc::new(data)),
            normalized: false,
        };
        c.normalized = c.check_normalized();
        c
    }

    /// 0-cochain with a constant value.
    pub fn constant(gm: Arc<GModule>, value: Vec<u64>) -> Self {
        let v = gm.module.normalize(&value);
        Cochain {
            degree: 0,
            gm,
            values: Values::Lazy(Arc::new(move |_| v.clone())),
            normalized: true,
        }
    }

    fn check_normalized(&self) -> bool {
        if self.degree == 0 {
            return true;
        }
        // spot check identity-argument vanishing on a full sweep only for
        // small dense tables; callers constructing lazy cochains declare it
        let order = self.gm.group.order() as usize;
        if order.pow(self.degree as u32) > 4096 {
            return false;
        }
        let mut args = vec![0 as Elt; self.degree];
        loop {
            if args.iter().any(|&a| a == 0) && self.eval(&args).iter().any(|&v| v != 0) {
                return false;
            }
            // advance odometer
            let mut i = 0;
            loop {
                if i == self.degree {
                    return true;
                }
                args[i] += 1;
                if (args[i] as usize) < order {
                    break;
                }
                args[i] = 0;
                i += 1;
            }
        }
    }

    pub fn eval(&self, args: &[Elt]) -> Vec<u64> {
        debug_assert_eq!(args.len(), self.degree);
        match &self.values {
            Values::Dense(d) => {
                let order = self.gm.group.order() as usize;
                let rank = self.gm.rank();
                let mut idx = 0usize;
                for &a in args {
                    idx = idx * order + a as usize;
                }
                d[idx * rank..(idx + 1) * rank].to_vec()
            }
            Values::Lazy(f) => f(args),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.values, Values::Dense(_))
    }

    /// Materialize into a dense table when within the cap.
    pub fn densify(&self) -> Result<Cochain> {
        if self.is_dense() {
            return Ok(self.clone());
        }
        let order = self.gm.group.order() as usize;
        let rank = self.gm.rank();
        let total = order
            .checked_pow(self.degree as u32)
            .and_then(|t| t.checked_mul(rank))
            .ok_or_else(|| Error::resource("cochain table size overflow"))?;
        if total > DENSE_CAP {
            return Err(Error::resource(format!(
                "cochain table of {total} coordinates exceeds the dense cap"
            )));
        }
        let mut data = Vec::with_capacity(total);
        let mut args = vec![0 as Elt; self.degree];
        if self.degree == 0 {
            data.extend(self.eval(&[]));
        } else {
            'outer: loop {
                data.extend(self.eval(&args));
                let mut i = self.degree;
                loop {
                    if i == 0 {
                        break 'outer;
                    }
                    i -= 1;
                    args[i] += 1;
                    if (args[i] as usize) < order {
                        break;
                    }
                    args[i] = 0;
                    if i == 0 {
                        break 'outer;
                    }
                }
            }
        }
        let mut out = Cochain {
            degree: self.degree,
            gm: Arc::clone(&self.gm),
            values: Values::Dense(Arc::new(data)),
            normalized: self.normalized,
        };
        if !out.normalized {
            out.normalized = out.check_normalized();
        }
        Ok(out)
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        debug_assert_eq!(self.degree, other.degree);
        let a = self.clone();
        let b = other.clone();
        let gm = Arc::clone(&self.gm);
        let module = gm.module.clone();
        Cochain {
            degree: self.degree,
            gm: Arc::clone(&self.gm),
            values: Values::Lazy(Arc::new(move |args| {
                module.add(&a.eval(args), &b.eval(args))
            })),
            normalized: self.normalized && other.normalized,
        }
    }

    pub fn scale(&self, c: u64) -> Cochain {
        let a = self.clone();
        let gm = Arc::clone(&self.gm);
        let module = gm.module.clone();
        Cochain {
            degree: self.degree,
            gm: Arc::clone(&self.gm),
            values: Values::Lazy(Arc::new(move |args| module.scale(c, &a.eval(args)))),
            normalized: self.normalized,
        }
    }

    pub fn neg(&self) -> Cochain {
        let a = self.clone();
        let gm = Arc::clone(&self.gm);
        let module = gm.module.clone();
        Cochain {
            degree: self.degree,
            gm: Arc::clone(&self.gm),
            values: Values::Lazy(Arc::new(move |args| {
                let v = a.eval(args);
                v.iter()
                    .zip(module.orders())
                    .map(|(&x, &d)| (d - x % d) % d)
                    .collect()
            })),
            normalized: self.normalized,
        }
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        self.add(&other.neg())
    }

    /// Standard inhomogeneous coboundary.
    pub fn coboundary(&self) -> Cochain {
        let f = self.clone();
        let gm = Arc::clone(&self.gm);
        let module = gm.module.clone();
        let deg = self.degree;
        Cochain {
            degree: deg + 1,
            gm: Arc::clone(&self.gm),
            values: Values::Lazy(Arc::new(move |args| {
                debug_assert_eq!(args.len(), deg + 1);
                let mut acc = gm.act(args[0], &f.eval(&args[1..]));
                let mut sign_neg = true; // next term has sign (-1)^1
                for i in 0..deg {
                    let mut merged = Vec::with_capacity(deg);
                    merged.extend_from_slice(&args[..i]);
                    merged.push(gm.group.mul(args[i], args[i + 1]));
                    merged.extend_from_slice(&args[i + 2..]);
                    let term = f.eval(&merged);
                    acc = add_signed(&module, &acc, &term, sign_neg);
                    sign_neg = !sign_neg;
                }
                let last = f.eval(&args[..deg]);
                acc = add_signed(&module, &acc, &last, sign_neg);
                acc
            })),
            normalized: self.normalized,
        }
    }

    /// Pull back along a group surjection p: H ↠ G given elementwise.
    pub fn inflate(&self, gm_up: Arc<GModule>, proj: Arc<Vec<Elt>>) -> Cochain {
        let f = self.clone();
        Cochain {
            degree: self.degree,
            gm: gm_up,
            values: Values::Lazy(Arc::new(move |args| {
                let mapped: Vec<Elt> = args.iter().map(|&a| proj[a as usize]).collect();
                f.eval(&mapped)
            })),
            normalized: self.normalized,
        }
    }

    /// Restrict along a subgroup embedding given elementwise.
    pub fn restrict(&self, gm_sub: Arc<GModule>, embed: Arc<Vec<Elt>>) -> Cochain {
        let f = self.clone();
        Cochain {
            degree: self.degree,
            gm: gm_sub,
            values: Values::Lazy(Arc::new(move |args| {
                let mapped: Vec<Elt> = args.iter().map(|&a| embed[a as usize]).collect();
                f.eval(&mapped)
            })),
            normalized: self.normalized,
        }
    }

    /// Exhaustive zero test; only for tables within the dense cap.
    pub fn is_zero_checked(&self) -> Result<bool> {
        let d = self.densify()?;
        match &d.values {
            Values::Dense(data) => Ok(data.iter().all(|&v| v == 0)),
            Values::Lazy(_) => unreachable!(),
        }
    }
}

fn add_signed(module: &LambdaModule, a: &[u64], b: &[u64], negate: bool) -> Vec<u64> {
    a.iter()
        .zip(b.iter())
        .zip(module.orders())
        .map(|((&x, &y), &d)| {
            let y = y % d;
            let y = if negate { (d - y) % d } else { y };
            (x % d + y) % d
        })
        .collect()
}

/// Bilinear pairing M₁ ⊗ M₂ → T on canonical coordinates: the value of
/// (eᵢ, eⱼ) is stored per generator pair.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub m1: LambdaModule,
    pub m2: LambdaModule,
    pub target: LambdaModule,
    /// values[i][j] ∈ target coordinates
    pub values: Vec<Vec<Vec<u64>>>,
}

impl Pairing {
    pub fn apply(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.target.rank()];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let coef = (ai as u128 * bj as u128 % self.target.modulus() as u128) as u64;
                let term = self.target.scale(coef, &self.values[i][j]);
                out = self.target.add(&out, &term);
            }
        }
        out
    }
}

/// The canonical pairing into the tensor product M₁ ⊗ M₂.
pub fn tensor_pairing(m1: &LambdaModule, m2: &LambdaModule) -> Result<Pairing> {
    let n = m1.modulus();
    if n != m2.modulus() {
        return Err(Error::invalid("tensor pairing: modulus mismatch"));
    }
    let k1 = m1.rank();
    let k2 = m2.rank();
    // present the tensor product on the k1·k2 generators e_i ⊗ e_j with
    // relations gcd(dᵢ, eⱼ)·(i,j)
    let mut rels = Vec::new();
    for i in 0..k1 {
        for j in 0..k2 {
            let mut row = vec![0u64; k1 * k2];
            row[i * k2 + j] = crate::linalg::gcd(m1.orders()[i], m2.orders()[j]) % n;
            rels.push(row);
        }
    }
    let target = LambdaModule::from_relations(n, k1 * k2, &rels);
    let mut values = vec![vec![vec![]; k2]; k1];
    for i in 0..k1 {
        for j in 0..k2 {
            let mut e = vec![0u64; k1 * k2];
            e[i * k2 + j] = 1;
            values[i][j] = target.project(&e)?;
        }
    }
    Ok(Pairing {
        m1: m1.clone(),
        m2: m2.clone(),
        target,
        values,
    })
}

/// Cochain cup product: (f ∪ g)(σ₁…σ_p, τ₁…τ_q) =
/// pairing(f(σ₁…σ_p), (σ₁⋯σ_p)·g(τ₁…τ_q)).
pub fn cup(f: &Cochain, g: &Cochain, pairing: &Pairing, gm_target: Arc<GModule>) -> Result<Cochain> {
    if f.degree + g.degree > 4 {
        return Err(Error::invalid("cup products supported up to total degree 4"));
    }
    let p = f.degree;
    let q = g.degree;
    let fc = f.clone();
    let gc = g.clone();
    let pr = pairing.clone();
    let gm_g = Arc::clone(&g.gm);
    let normalized = f.normalized && g.normalized;
    Ok(Cochain {
        degree: p + q,
        gm: Arc::clone(&gm_target),
        values: Values::Lazy(Arc::new(move |args| {
            let left = fc.eval(&args[..p]);
            let mut prefix = 0;
            let grp = &gm_g.group;
            for &a in &args[..p] {
                prefix = grp.mul(prefix, a);
            }
            let right = gm_g.act(prefix, &gc.eval(&args[p..]));
            pr.apply(&left, &right)
        })),
        normalized,
    })
}

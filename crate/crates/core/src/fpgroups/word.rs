//! Words in a free group: sequences of signed 1-based generator indices.
//! Letter +k is generator k-1, letter -k its inverse.

pub type Word = Vec<i32>;

/// Free reduction: cancel adjacent inverse pairs.
pub fn reduce_word(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        debug_assert!(l != 0);
        if out.last().is_some_and(|&t| t == -l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn inverse(w: &[i32]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

pub fn concat(a: &[i32], b: &[i32]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    reduce_word(&w)
}

pub fn power(w: &[i32], k: i64) -> Word {
    let base: Word = if k < 0 { inverse(w) } else { w.to_vec() };
    let mut out = Word::new();
    for _ in 0..k.unsigned_abs() {
        out = concat(&out, &base);
    }
    out
}

/// [a, b] = a b a⁻¹ b⁻¹
pub fn commutator(a: &[i32], b: &[i32]) -> Word {
    concat(&concat(a, b), &concat(&inverse(a), &inverse(b)))
}

/// Signed exponent sums per generator.
pub fn abelianized(w: &[i32], ngens: usize) -> Vec<i64> {
    let mut v = vec![0i64; ngens];
    for &l in w {
        let g = (l.unsigned_abs() as usize) - 1;
        v[g] += if l > 0 { 1 } else { -1 };
    }
    v
}

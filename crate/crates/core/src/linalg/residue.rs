//! Residue arithmetic mod n with the unit-scaling lemma used by the Howell
//! reduction: every residue a has a unit u with u·a ≡ gcd(a, n).

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd over ℤ: returns (g, x, y) with a·x + b·y = g, g ≥ 0.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

pub fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % n as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + (n - b % n) as u128;
    (s % n as u128) as u64
}

pub fn neg_mod(a: u64, n: u64) -> u64 {
    if a == 0 {
        0
    } else {
        n - a
    }
}

pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Inverse of a mod n when gcd(a, n) = 1.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, n as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(n as i128) as u64)
}

/// A unit u mod n with u·a ≡ gcd(a, n) (mod n). For a = 0 returns 1.
///
/// Writing g = gcd(a, n) and a = g·a', the residue a' is invertible mod n/g;
/// any lift of its inverse that is coprime to n works, and such a lift exists
/// in the arithmetic progression u₀ + k·(n/g).
pub fn unit_for(a: u64, n: u64) -> u64 {
    debug_assert!(n >= 2 && a < n);
    if a == 0 {
        return 1;
    }
    let g = gcd_u64(a, n);
    let m = n / g;
    if m == 1 {
        return 1;
    }
    let a_prime = (a / g) % m;
    let mut u = inv_mod(a_prime, m).expect("a/g is invertible mod n/g");
    if u == 0 {
        u = m;
    }
    while gcd_u64(u, n) != 1 {
        u += m;
        debug_assert!(u <= n, "unit lift search must terminate within n");
    }
    u % n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_for_exhaustive_small_moduli() {
        for n in 2..=64u64 {
            for a in 0..n {
                let u = unit_for(a, n);
                assert_eq!(gcd_u64(u, n), 1, "u={u} not a unit mod {n}");
                if a != 0 {
                    assert_eq!(mul_mod(u, a, n), gcd_u64(a, n), "a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn egcd_identity() {
        for a in -20i128..=20 {
            for b in -20i128..=20 {
                let (g, x, y) = egcd(a, b);
                assert_eq!(a * x + b * y, g);
                assert!(g >= 0);
                if a != 0 || b != 0 {
                    assert_eq!(g, gcd_u64(a.unsigned_abs() as u64, b.unsigned_abs() as u64) as i128);
                }
            }
        }
    }
}

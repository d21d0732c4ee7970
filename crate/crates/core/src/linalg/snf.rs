//! Smith normal form over ℤ, used to extract cyclic order decompositions of
//! finite Λ-modules from lifted relation matrices. Inputs stay small (at
//! most a few dozen generators), so i128 arithmetic with overflow checks is
//! enough.

/// U · M · V = D with U, V unimodular and D diagonal, d₁ | d₂ | …
pub struct Snf {
    pub d: Vec<i128>,
    pub row_t: Vec<Vec<i128>>,
    pub col_t: Vec<Vec<i128>>,
    pub col_t_inv: Vec<Vec<i128>>,
}

fn identity(k: usize) -> Vec<Vec<i128>> {
    (0..k)
        .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn checked_add_mul(acc: i128, a: i128, b: i128) -> i128 {
    acc.checked_add(a.checked_mul(b).expect("snf: coefficient overflow"))
        .expect("snf: coefficient overflow")
}

pub fn smith_normal_form(mut m: Vec<Vec<i128>>) -> Snf {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut vinv = identity(cols);

    // elementary operations, mirrored into the transforms
    let row_addmul = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, c: i128| {
        for j in 0..m[dst].len() {
            m[dst][j] = checked_add_mul(m[dst][j], c, m[src][j]);
        }
        for j in 0..u[dst].len() {
            u[dst][j] = checked_add_mul(u[dst][j], c, u[src][j]);
        }
    };
    let col_addmul = |m: &mut Vec<Vec<i128>>,
                      v: &mut Vec<Vec<i128>>,
                      vinv: &mut Vec<Vec<i128>>,
                      dst: usize,
                      src: usize,
                      c: i128| {
        for row in m.iter_mut() {
            row[dst] = checked_add_mul(row[dst], c, row[src]);
        }
        for row in v.iter_mut() {
            row[dst] = checked_add_mul(row[dst], c, row[src]);
        }
        // inverse of "col dst += c * col src" is "row src -= c * row dst"
        for j in 0..vinv[src].len() {
            vinv[src][j] = checked_add_mul(vinv[src][j], -c, vinv[dst][j]);
        }
    };

    let mut t = 0;
    while t < rows.min(cols) {
        // find the nonzero entry of least magnitude in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0
                    && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        u.swap(t, bi);
        if bj != t {
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            for row in v.iter_mut() {
                row.swap(t, bj);
            }
            vinv.swap(t, bj);
        }

        // clear row and column t; restart when a division is inexact
        let mut clean = true;
        for i in (t + 1)..rows {
            if m[i][t] != 0 {
                let q = m[i][t].div_euclid(m[t][t]);
                row_addmul(&mut m, &mut u, i, t, -q);
                if m[i][t] != 0 {
                    clean = false;
                }
            }
        }
        for j in (t + 1)..cols {
            if m[t][j] != 0 {
                let q = m[t][j].div_euclid(m[t][t]);
                col_addmul(&mut m, &mut v, &mut vinv, j, t, -q);
                if m[t][j] != 0 {
                    clean = false;
                }
            }
        }
        if !clean {
            continue; // a smaller remainder appeared, pick a new pivot
        }
        // enforce divisibility of the rest of the block by the pivot
        let mut fixed = true;
        'outer: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if m[i][j] % m[t][t] != 0 {
                    row_addmul(&mut m, &mut u, t, i, 1);
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            if m[t][t] < 0 {
                for j in 0..cols {
                    m[t][j] = -m[t][j];
                }
                for j in 0..rows {
                    u[t][j] = -u[t][j];
                }
            }
            t += 1;
        }
    }

    let d = (0..rows.min(cols)).map(|i| m[i][i]).collect();
    Snf {
        d,
        row_t: u,
        col_t: v,
        col_t_inv: vinv,
    }
}

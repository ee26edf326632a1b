//! Exact integer linear algebra on small dense matrices.
//!
//! Everything runs on `BigInt` internally; inputs and outputs are `i64`
//! matrices in row-major `Vec<Vec<i64>>` form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

type Mat = Vec<Vec<BigInt>>;

fn to_big(a: &[Vec<i64>]) -> Mat {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn to_small(v: &[BigInt]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("integer entry exceeds i64")).collect()
}

fn ncols(a: &[Vec<i64>]) -> usize {
    a.first().map_or(0, Vec::len)
}

/// Rank over ℚ.
pub fn rank(a: &[Vec<i64>]) -> usize {
    let mut m = to_big(a);
    let cols = ncols(a);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let (f, g) = (m[r][c].clone(), m[i][c].clone());
            for j in c..cols {
                let v = &m[i][j] * &f - &m[r][j] * &g;
                m[i][j] = v;
            }
        }
        r += 1;
    }
    r
}

/// Determinant by Bareiss fraction-free elimination.
pub fn det(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n), "det of a non-square matrix");
    if n == 0 {
        return BigInt::one();
    }
    let mut m = to_big(a);
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Row Hermite normal form of the lattice spanned by the rows of `a`:
/// echelon form, positive pivots, entries above each pivot reduced into
/// `[0, pivot)`. Zero rows are dropped, so the result is a basis.
pub fn hnf_rows(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    hnf_big(to_big(a), ncols(a)).iter().map(|r| to_small(r)).collect()
}

fn hnf_big(mut m: Mat, cols: usize) -> Mat {
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r >= m.len() {
            break;
        }
        loop {
            // Bring the smallest nonzero entry of column c (rows ≥ r) to row r.
            let Some(p) = (r..m.len())
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&i, &j| m[i][c].abs().cmp(&m[j][c].abs()))
            else {
                break;
            };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                for j in c..cols {
                    let v = &m[i][j] - &q * &m[r][j];
                    m[i][j] = v;
                }
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for j in c..cols {
                    m[r][j] = -&m[r][j];
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    m.truncate(r);
    for &(pr, pc) in &pivots {
        for i in 0..pr {
            let q = m[i][pc].div_floor(&m[pr][pc]);
            if q.is_zero() {
                continue;
            }
            for j in pc..cols {
                let v = &m[i][j] - &q * &m[pr][j];
                m[i][j] = v;
            }
        }
    }
    m
}

/// Basis of the integer kernel `{x ∈ ℤ^k : a·x = 0}` for an `r × k` matrix,
/// returned in row Hermite normal form (so the basis is canonical).
pub fn integer_kernel(a: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let mut m = to_big(a);
    let mut u: Mat = (0..k)
        .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    // Unimodular column operations reduce m to column echelon form; the
    // columns of u past the pivots then span the kernel.
    let mut pc = 0;
    for row in 0..m.len() {
        if pc >= k {
            break;
        }
        loop {
            let Some(p) = (pc..k)
                .filter(|&j| !m[row][j].is_zero())
                .min_by(|&i, &j| m[row][i].abs().cmp(&m[row][j].abs()))
            else {
                break;
            };
            swap_cols(&mut m, p, pc);
            swap_cols(&mut u, p, pc);
            let mut done = true;
            for j in pc + 1..k {
                if m[row][j].is_zero() {
                    continue;
                }
                let q = m[row][j].div_floor(&m[row][pc]);
                col_axpy(&mut m, j, pc, &q);
                col_axpy(&mut u, j, pc, &q);
                if !m[row][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !m[row][pc].is_zero() {
            pc += 1;
        }
    }
    let basis: Mat = (pc..k).map(|j| u.iter().map(|r| r[j].clone()).collect()).collect();
    hnf_big(basis, k).iter().map(|r| to_small(r)).collect()
}

fn swap_cols(m: &mut Mat, a: usize, b: usize) {
    if a != b {
        for r in m.iter_mut() {
            r.swap(a, b);
        }
    }
}

/// Column `dst -= q * column src`.
fn col_axpy(m: &mut Mat, dst: usize, src: usize, q: &BigInt) {
    for r in m.iter_mut() {
        let v = &r[dst] - q * &r[src];
        r[dst] = v;
    }
}

/// Nonzero invariant factors `d_1 | d_2 | …` of the Smith normal form.
pub fn smith_diagonal(a: &[Vec<i64>]) -> Vec<BigInt> {
    let mut m = to_big(a);
    let rows = m.len();
    let cols = ncols(a);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_entry(&m, t) else {
            break;
        };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                for j in t..cols {
                    let v = &m[i][j] - &q * &m[t][j];
                    m[i][j] = v;
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                for row in m.iter_mut().skip(t) {
                    let v = &row[j] - &q * &row[t];
                    row[j] = v;
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // Divisibility: fold any non-multiple back into row t.
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&m[i][j] % &m[t][t]).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            let v = &m[t][j] + &m[i][j];
                            m[t][j] = v;
                        }
                    }
                }
            }
            if let Some((pi, pj)) = min_entry_in_cross(&m, t) {
                m.swap(t, pi);
                swap_cols(&mut m, t, pj);
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

fn min_entry(m: &Mat, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..m.len() {
        for j in t..m[i].len() {
            if m[i][j].is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row t or column t (from position t on).
fn min_entry_in_cross(m: &Mat, t: usize) -> Option<(usize, usize)> {
    let cand = (t..m.len()).map(|i| (i, t)).chain((t..m[t].len()).map(|j| (t, j)));
    cand.filter(|&(i, j)| !m[i][j].is_zero())
        .min_by(|&(a, b), &(c, d)| m[a][b].abs().cmp(&m[c][d].abs()))
}

/// Exact inverse over ℚ, or `None` when singular.
pub fn rational_inverse(a: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> =
                r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..2 * n {
                let v = &m[i][j] - &f * &m[c][j];
                m[i][j] = v;
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Divides by the gcd of the entries (zero vectors are returned unchanged).
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_slice(v);
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

pub fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let c = ncols(a);
    (0..c).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

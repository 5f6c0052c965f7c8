//! Exact integer and rational linear algebra helpers.
//!
//! Everything here works over `i64` (with overflow checks enabled in every
//! build profile) or over `Ratio<i64>`. Matrices are row-major `Vec<Vec<i64>>`
//! and vectors are `Vec<i64>`; sizes are tiny (rank <= 6, a few dozen rows)
//! so asymptotics are irrelevant and exactness is everything.

use num_rational::Ratio;

/// Exact rational scalar used throughout the workbench.
pub type Rat = Ratio<i64>;

/// Integer matrix, row-major.
pub type Mat = Vec<Vec<i64>>;

pub fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// gcd of a slice; 0 for an empty or all-zero slice.
pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

/// Divide a lattice vector by the gcd of its entries. Panics on the zero vector.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_slice(v);
    assert!(g > 0, "primitive part of the zero vector is undefined");
    v.iter().map(|&x| x / g).collect()
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn add_scaled(dst: &mut [i64], src: &[i64], c: i64) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += c * s;
    }
}

/// `a * b` for row-major integer matrices. A matrix with no rows has an
/// unknowable column count in this representation, so an empty left factor
/// yields the empty product without checking the inner dimension.
pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    if a.is_empty() {
        return Vec::new();
    }
    let (ra, ca) = (a.len(), a[0].len());
    let cb = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(ca, b.len());
    (0..ra)
        .map(|i| {
            (0..cb)
                .map(|j| (0..ca).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Row vector times matrix: `v * m`.
pub fn vec_mat(v: &[i64], m: &Mat) -> Vec<i64> {
    assert_eq!(v.len(), m.len());
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| (0..v.len()).map(|i| v[i] * m[i][j]).sum())
        .collect()
}

/// Matrix times column vector: `m * v`.
pub fn mat_vec(m: &Mat, v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn transpose(m: &Mat) -> Mat {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| m.iter().map(|row| row[j]).collect())
        .collect()
}

/// Determinant by cofactor expansion; fine for the ranks we see (<= 6).
pub fn det(m: &Mat) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    assert_eq!(m[0].len(), n);
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Mat = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        acc += sign * m[0][j] * det(&minor);
    }
    acc
}

/// Inverse of a unimodular integer matrix (det = +-1); exact integer output.
pub fn inverse_unimodular(m: &Mat) -> Mat {
    let n = m.len();
    let d = det(m);
    assert!(d == 1 || d == -1, "matrix is not unimodular (det = {d})");
    if n == 0 {
        return vec![];
    }
    let mut adj = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Mat = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = sign * det(&minor);
        }
    }
    if d == -1 {
        for row in &mut adj {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
    }
    adj
}

/// Column-style Hermite reduction: returns a unimodular `U` (n x n) with
/// `T * U` lower-left triangular (zeroes to the right of column `rank`).
///
/// Used to complete the rays of a smooth cone to a lattice basis: for a
/// d x n matrix `T` of primitive-sublattice rows, the last n-d columns of
/// `U` give quotient coordinates on `Z^n / rowspan(T)`.
pub fn column_hermite(t: &Mat, n: usize) -> Mat {
    let d = t.len();
    let mut a: Mat = t.to_vec();
    let mut u = identity(n);
    let mut col = 0usize;
    for row in 0..d {
        // find a column >= col with nonzero entry, reduce gcd-style
        loop {
            let mut piv = None;
            for j in col..n {
                if a[row][j] != 0 {
                    piv = match piv {
                        None => Some(j),
                        Some(p) if a[row][j].abs() < a[row][p].abs() => Some(j),
                        keep => keep,
                    };
                }
            }
            let Some(p) = piv else { break };
            // move pivot into position `col`
            if p != col {
                for r in &mut a {
                    r.swap(p, col);
                }
                for r in &mut u {
                    r.swap(p, col);
                }
            }
            let mut done = true;
            for j in col + 1..n {
                let q = a[row][j].div_euclid(a[row][col]);
                if q != 0 {
                    for r in &mut a {
                        r[j] -= q * r[col];
                    }
                    for r in &mut u {
                        r[j] -= q * r[col];
                    }
                }
                if a[row][j] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[row][col..].iter().any(|&x| x != 0) {
            col += 1;
        }
    }
    u
}

/// Row-style Hermite form of an integer matrix; returns (hnf, rank).
/// Pivots are positive and entries above a pivot are reduced.
pub fn row_hermite(rows: &[Vec<i64>]) -> (Mat, usize) {
    if rows.is_empty() {
        return (vec![], 0);
    }
    let cols = rows[0].len();
    let mut m: Mat = rows.to_vec();
    let mut r = 0usize;
    for c in 0..cols {
        // find the row with the smallest nonzero entry in column c
        loop {
            let mut piv = None;
            for i in r..m.len() {
                if m[i][c] != 0 {
                    piv = match piv {
                        None => Some(i),
                        Some(p) if m[i][c].abs() < m[p][c].abs() => Some(i),
                        keep => keep,
                    };
                }
            }
            let Some(p) = piv else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                let q = m[i][c].div_euclid(m[r][c]);
                if q != 0 {
                    let top = m[r].clone();
                    add_scaled(&mut m[i], &top, -q);
                }
                if m[i][c] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && m[r][c] != 0 {
            if m[r][c] < 0 {
                for x in &mut m[r] {
                    *x = -*x;
                }
            }
            for i in 0..r {
                let q = m[i][c].div_euclid(m[r][c]);
                if q != 0 {
                    let pivrow = m[r].clone();
                    add_scaled(&mut m[i], &pivrow, -q);
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    (m, r)
}

/// True iff the given integer vectors span all of `Z^k` (k = vector length).
pub fn spans_lattice(rows: &[Vec<i64>]) -> bool {
    if rows.is_empty() {
        return false;
    }
    let k = rows[0].len();
    if k == 0 {
        return true;
    }
    let (h, rank) = row_hermite(rows);
    rank == k && (0..k).all(|i| h[i][i] == 1)
}

/// Solve `m * x = b` over the rationals for a square invertible `m`.
/// Returns None when `m` is singular.
pub fn solve_rational(m: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = m.len();
    assert_eq!(b.len(), n);
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| a[i][c] != Rat::from_integer(0))?;
        a.swap(c, p);
        let piv = a[c][c];
        for j in c..=n {
            a[c][j] /= piv;
        }
        for i in 0..n {
            if i != c && a[i][c] != Rat::from_integer(0) {
                let f = a[i][c];
                for j in c..=n {
                    let sub = f * a[c][j];
                    a[i][j] -= sub;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[n]).collect())
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::from_integer(x)).collect()
}

/// Feasibility of a homogeneous system of linear inequalities
/// `coeffs . x > 0` (strict = true) or `coeffs . x >= 0` over the rationals,
/// by Fourier-Motzkin elimination. Exact; intended for <= 5 variables and a
/// dozen constraints (separating-functional checks on tiny fans).
pub fn homogeneous_feasible(constraints: &[(Vec<Rat>, bool)], nvars: usize) -> bool {
    let zero = Rat::from_integer(0);
    let mut cons: Vec<(Vec<Rat>, bool)> = constraints.to_vec();
    for var in (0..nvars).rev() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = Vec::new();
        for c in cons {
            if c.0[var] > zero {
                pos.push(c);
            } else if c.0[var] < zero {
                neg.push(c);
            } else {
                rest.push(c);
            }
        }
        for p in &pos {
            for n in &neg {
                // combine so the coefficient of `var` cancels
                let (a, b) = (p.0[var], -n.0[var]);
                let coeffs: Vec<Rat> = (0..var).map(|j| b * p.0[j] + a * n.0[j]).collect();
                rest.push((coeffs, p.1 || n.1));
            }
        }
        for c in &mut rest {
            c.0.truncate(var);
        }
        cons = rest;
    }
    // all variables eliminated: a strict constraint "0 > 0" is a contradiction
    cons.iter().all(|(_, strict)| !strict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let m = vec![vec![2, 1], vec![1, 1]];
        assert_eq!(det(&m), 1);
        let inv = inverse_unimodular(&m);
        assert_eq!(mat_mul(&m, &inv), identity(2));
    }

    #[test]
    fn column_hermite_completes_basis() {
        // single primitive row in Z^3
        let t = vec![vec![2, 3, 5]];
        let u = column_hermite(&t, 3);
        assert_eq!(det(&u).abs(), 1);
        let tu = mat_mul(&t, &u);
        assert_eq!(tu[0][1], 0);
        assert_eq!(tu[0][2], 0);
        assert_eq!(tu[0][0].abs(), 1);
    }

    #[test]
    fn hermite_span_check() {
        assert!(spans_lattice(&[vec![1, 0], vec![0, 1]]));
        assert!(spans_lattice(&[vec![1, 1], vec![0, 1], vec![5, 3]]));
        assert!(!spans_lattice(&[vec![2, 0], vec![0, 1]]));
        assert!(!spans_lattice(&[vec![1, 2]]));
    }

    #[test]
    fn rational_solve() {
        let m = vec![rat_vec(&[1, 2]), rat_vec(&[3, 4])];
        let b = rat_vec(&[5, 6]);
        let x = solve_rational(&m, &b).unwrap();
        assert_eq!(x[0], Rat::new(-4, 1));
        assert_eq!(x[1], Rat::new(9, 2));
    }

    #[test]
    fn primitive_vector() {
        assert_eq!(primitive(&[2, -4, 6]), vec![1, -2, 3]);
    }
}

//! Dense exact linear algebra over the coefficient field.

use crate::coeff::Coeff;

pub type Matrix = Vec<Vec<Coeff>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut s = Coeff::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            s += &(x * &b[k][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let d = &f * &m[r][j];
                        m[i][j] = &m[i][j] - &d;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Coeff>> {
    let mut w = m.clone();
    let piv = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Coeff::zero(); cols];
            v[f] = Coeff::one();
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -&w[r][f];
            }
            v
        })
        .collect()
}

/// Some solution of `m x = b`, if one exists.
pub fn solve(m: &Matrix, b: &[Coeff]) -> Option<Vec<Coeff>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Matrix =
        m.iter().zip(b).map(|(row, x)| row.iter().cloned().chain([x.clone()]).collect()).collect();
    let piv = rref(&mut aug);
    if piv.contains(&cols) {
        return None;
    }
    let mut x = vec![Coeff::zero(); cols];
    for (r, &p) in piv.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| Coeff::int(x)).collect()).collect()
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn nullspace_and_solve() {
        let a = m(&[&[1, 1, 0], &[0, 0, 1]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        let col: Matrix = ns[0].iter().map(|x| vec![x.clone()]).collect();
        assert_eq!(mat_mul(&a, &col), m(&[&[0], &[0]]));
        let x = solve(&a, &[Coeff::int(3), Coeff::int(4)]).unwrap();
        assert_eq!(x[2], Coeff::int(4));
        assert!(solve(&m(&[&[1, 1], &[1, 1]]), &[Coeff::int(1), Coeff::int(2)]).is_none());
    }
}

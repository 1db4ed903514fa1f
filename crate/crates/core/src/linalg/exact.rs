use std::collections::BTreeMap;

use super::{Field, Mat, Ring};

/// Determinant by Laplace expansion memoized over column subsets.
///
/// Division-free, so it works over any commutative ring. Cost is
/// `O(2^n · n)` ring products, fine for the small matrices handled here.
pub fn det<T: Ring>(m: &Mat<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    assert!(n < 64);
    if n == 0 {
        return T::one();
    }
    let mut level: BTreeMap<u64, T> = BTreeMap::new();
    level.insert(0, T::one());
    for i in 0..n {
        let mut next: BTreeMap<u64, T> = BTreeMap::new();
        for (mask, sub) in &level {
            if sub.is_zero() {
                continue;
            }
            for c in 0..n {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let a = &m[(i, c)];
                if a.is_zero() {
                    continue;
                }
                let new_mask = mask | (1 << c);
                let pos = (new_mask & ((1u64 << c) - 1)).count_ones() as usize;
                let mut term = a.times(sub);
                if (pos + i) % 2 == 1 {
                    term = term.negate();
                }
                next.entry(new_mask)
                    .and_modify(|acc| *acc = acc.plus(&term))
                    .or_insert(term);
            }
        }
        level = next;
    }
    level.remove(&((1u64 << n) - 1)).unwrap_or_else(T::zero)
}

pub fn minor<T: Ring>(m: &Mat<T>, rows: &[usize], cols: &[usize]) -> T {
    det(&m.submatrix(rows, cols))
}

/// Reduced row echelon form and pivot columns.
pub fn rref<T: Field>(m: &Mat<T>) -> (Mat<T>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = a[(r, c)].inv().expect("nonzero pivot");
        for j in c..cols {
            a[(r, j)] = a[(r, j)].times(&inv);
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let d = f.times(&a[(r, j)]);
                a[(i, j)] = a[(i, j)].minus(&d);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<T: Field>(m: &Mat<T>) -> usize {
    rref(m).1.len()
}

/// Basis of the right null space, one vector per column.
pub fn nullspace<T: Field>(m: &Mat<T>) -> Mat<T> {
    let (red, pivots) = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let vecs: Vec<Vec<T>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = red[(row, f)].negate();
            }
            v
        })
        .collect();
    Mat::from_cols(&vecs, cols)
}

/// Solve `a·x = b` for `x`; `None` if the system is inconsistent.
/// When `a` is rank deficient, free variables are set to zero.
pub fn solve<T: Field>(a: &Mat<T>, b: &Mat<T>) -> Option<Mat<T>> {
    assert_eq!(a.rows(), b.rows());
    let aug = a.hcat(b);
    let (red, pivots) = rref(&aug);
    if pivots.iter().any(|&p| p >= a.cols()) {
        return None;
    }
    let mut x = Mat::zeros(a.cols(), b.cols());
    for (row, &pc) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            x[(pc, j)] = red[(row, a.cols() + j)].clone();
        }
    }
    Some(x)
}

pub fn inverse<T: Field>(m: &Mat<T>) -> Option<Mat<T>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    if rank(m) != n {
        return None;
    }
    solve(m, &Mat::identity(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        <BigRational as Ring>::from_i64(v)
    }

    fn qm(rows: &[&[i64]]) -> Mat<BigRational> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect())
    }

    #[test]
    fn det_small() {
        assert_eq!(det(&qm(&[&[2, 1], &[7, 4]])), q(1));
        assert_eq!(det(&qm(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])), q(-3));
        assert_eq!(det(&qm(&[&[0, 1], &[1, 0]])), q(-1));
        assert_eq!(det(&Mat::<BigRational>::identity(0)), q(1));
    }

    #[test]
    fn det_matches_float_lu() {
        let m = qm(&[&[3, -1, 4, 1], &[5, 9, -2, 6], &[5, 3, 5, -8], &[9, 7, 9, 3]]);
        let f = nalgebra::DMatrix::from_fn(4, 4, |r, c| super::super::rational_to_f64(&m[(r, c)]));
        let exact = super::super::rational_to_f64(&det(&m));
        assert!((exact - f.determinant()).abs() < 1e-8);
    }

    #[test]
    fn nullspace_and_solve() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&m);
        assert_eq!(ns.cols(), 2);
        assert!(m.mul(&ns).is_zero());
        assert_eq!(rank(&m), 1);

        let a = qm(&[&[2, 1], &[1, 3]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2));
        assert!(inverse(&qm(&[&[1, 2], &[2, 4]])).is_none());
        assert!(solve(&qm(&[&[1, 1], &[1, 1]]), &qm(&[&[1], &[2]])).is_none());
    }
}

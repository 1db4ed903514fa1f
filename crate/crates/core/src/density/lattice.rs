//! LLL reduction in floating point for small dimensions.

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &star[j]) / norms[j] } else { 0.0 };
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * y;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (star, mu, norms)
}

/// Reduce the rows of `basis` in place with parameter `delta` (typically 0.99).
pub fn lll(basis: &mut [Vec<f64>], delta: f64) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let (_, mut mu, mut norms) = gram_schmidt(basis);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = basis[j].clone();
                for (x, y) in basis[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
                for l in 0..=j {
                    let m = if l == j { 1.0 } else { mu[j][l] };
                    mu[k][l] -= q * m;
                }
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            let gs = gram_schmidt(basis);
            mu = gs.1;
            norms = gs.2;
            k = (k - 1).max(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_integer_relation() {
        // 1·x + 2·y − 1·z = 0 for (x, y, z) = (√2, √3, √2 + 2√3)
        let v = [2f64.sqrt(), 3f64.sqrt(), 2f64.sqrt() + 2.0 * 3f64.sqrt()];
        let c = 1e12;
        let mut b: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut row = vec![0.0; 4];
                row[i] = 1.0;
                row[3] = c * v[i];
                row
            })
            .collect();
        lll(&mut b, 0.99);
        let s = &b[0][..3];
        let norm: f64 = s.iter().map(|x| x.abs()).sum();
        assert_eq!(norm, 4.0);
        assert!((s[0] * v[0] + s[1] * v[1] + s[2] * v[2]).abs() < 1e-12);
    }

    #[test]
    fn reduced_basis_is_size_reduced() {
        let mut b = vec![vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0], vec![3.0, 5.0, 6.0]];
        lll(&mut b, 0.75);
        let (_, mu, _) = gram_schmidt(&b);
        for i in 1..3 {
            for j in 0..i {
                assert!(mu[i][j].abs() <= 0.5 + 1e-12);
            }
        }
    }
}

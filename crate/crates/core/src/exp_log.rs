//! Exponential and logarithm on the block triangular cone, and logarithms
//! of homogenized affine maps that are themselves `Ψ`-images.

use num_complex::Complex64;

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::linalg::{float, Mat, Scalar};
use crate::normal_form::{k_membership, NormalForm, Partition};

/// Entrywise relative tolerance for witness verification.
pub const WITNESS_TOL: f64 = 1e-9;

/// `f′` with `exp(Ψ(f′)) = Φ(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogWitness<S> {
    pub fprime: AffineMap<S>,
    /// Per-block `2πi` multiples added to the principal logarithm.
    pub branch_shifts: Vec<i64>,
    /// The `k` subtracted as `2πik·I` to clear the corner entry.
    pub corner_shift: i64,
}

fn block_parts<S: Scalar>(m: &Mat<S>, start: usize, len: usize) -> (S, Mat<S>) {
    let mu = m[(start, start)].clone();
    let nil = Mat::from_fn(len, len, |r, c| if r > c { m[(start + r, start + c)].clone() } else { S::zero() });
    (mu, nil)
}

fn factorial(j: usize) -> i64 {
    (1..=j as i64).product()
}

/// Exponential of a matrix in the cone, block by block.
pub fn exp_k<S: Scalar>(n: &Mat<S>, partition: &Partition, tol: f64) -> Result<Mat<S>> {
    if !k_membership(n, partition, tol, false) {
        return Err(Error::Membership("exp_k argument".into()));
    }
    let mut out = Mat::zeros(n.rows(), n.cols());
    for range in partition.ranges() {
        let len = range.len();
        let (mu, nil) = block_parts(n, range.start, len);
        let scale = mu.exp_scalar().ok_or_else(|| Error::NotRepresentable(format!("exp of {mu:?}")))?;
        let mut term = Mat::identity(len);
        let mut sum = Mat::identity(len);
        for j in 1..len {
            term = term.mul(&nil);
            sum = sum.add(&term.scale(&S::from_ratio(1, factorial(j))));
        }
        let block = sum.scale(&scale);
        for r in 0..len {
            for c in 0..len {
                out[(range.start + r, range.start + c)] = block[(r, c)].clone();
            }
        }
    }
    Ok(out)
}

/// Logarithm of an invertible cone matrix with `Log μ_k + 2πi·branches[k]`
/// on block `k`.
pub fn log_k<S: Scalar>(m: &Mat<S>, partition: &Partition, branches: &[i64], tol: f64) -> Result<Mat<S>> {
    if branches.len() != partition.r() {
        return Err(Error::DimensionMismatch { expected: partition.r(), found: branches.len() });
    }
    if !k_membership(m, partition, tol, false) {
        return Err(Error::Membership("log_k argument".into()));
    }
    let mut out = Mat::zeros(m.rows(), m.cols());
    for (k, range) in partition.ranges().into_iter().enumerate() {
        let len = range.len();
        let (mu, nil) = block_parts(m, range.start, len);
        if mu.negligible(m.max_magnitude(), tol) {
            return Err(Error::Membership(format!("block {} is singular", k + 1)));
        }
        let log_mu = mu
            .log_scalar(branches[k])
            .ok_or_else(|| Error::NotRepresentable(format!("logarithm of {mu:?}")))?;
        let mu_inv = mu.try_inv().ok_or_else(|| Error::NotRepresentable(format!("inverse of {mu:?}")))?;
        let x = nil.scale(&mu_inv);
        let mut term = Mat::identity(len);
        let mut sum = Mat::identity(len).scale(&log_mu);
        for j in 1..len {
            term = term.mul(&x);
            let sign = if j % 2 == 1 { 1 } else { -1 };
            sum = sum.add(&term.scale(&S::from_ratio(sign, j as i64)));
        }
        for r in 0..len {
            for c in 0..len {
                out[(range.start + r, range.start + c)] = sum[(r, c)].clone();
            }
        }
    }
    Ok(out)
}

/// Subtract `2πik·I` so the `(1,1)` entry vanishes; the first row must
/// then be zero.
pub fn psi_adjust<S: Scalar>(n: &Mat<S>, tol: f64) -> Result<(Mat<S>, i64)> {
    let k = n[(0, 0)]
        .two_pi_i_multiple(tol)
        .ok_or_else(|| Error::Branch(format!("{:?}", n[(0, 0)])))?;
    let shift = S::two_pi_i().times(&S::from_i64(k));
    let mut out = n.sub(&Mat::identity(n.rows()).scale(&shift));
    let scale = n.max_magnitude();
    for c in 0..out.cols() {
        if !out[(0, c)].negligible(scale, tol) {
            return Err(Error::Shape("first row of the logarithm is not zero".into()));
        }
        out[(0, c)] = S::zero();
    }
    Ok((out, k))
}

/// Logarithm of `Φ(f)` that is a `Ψ`-image, computed through the normal form.
pub fn log_witness<S: Scalar>(f: &AffineMap<S>, nf: &NormalForm<S>, branches: &[i64], tol: f64) -> Result<LogWitness<S>> {
    let m = nf.conjugate(&f.phi());
    let l = log_k(&m, &nf.partition, branches, tol)?;
    let (adjusted, k) = psi_adjust(&nf.unconjugate(&l), tol)?;
    Ok(LogWitness { fprime: AffineMap::psi_inv(&adjusted)?, branch_shifts: branches.to_vec(), corner_shift: k })
}

/// Largest entrywise deviation of `exp(Ψ(f′))` from `Φ(f)`, relative to
/// `1 + max|entry|`, computed in floating point.
pub fn witness_deviation(f: &AffineMap<Complex64>, fprime: &AffineMap<Complex64>) -> f64 {
    float::expm(&fprime.psi()).relative_deviation(&f.phi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Ring;
    use crate::scalar::{CNumber, SymScalar};

    fn c(re: i64, im: i64) -> CNumber {
        CNumber::int(re, im)
    }

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nilpotent_exp() {
        let eta = Partition::new(vec![2]).unwrap();
        let n = Mat::from_rows(vec![vec![c(0, 0), c(0, 0)], vec![c(3, 2), c(0, 0)]]);
        let e = exp_k(&n, &eta, 0.0).unwrap();
        assert_eq!(e, Mat::from_rows(vec![vec![c(1, 0), c(0, 0)], vec![c(3, 2), c(1, 0)]]));
        assert_eq!(log_k(&e, &eta, &[0], 0.0).unwrap(), n);
    }

    #[test]
    fn identity_log_is_zero() {
        let eta = Partition::new(vec![1, 2]).unwrap();
        assert_eq!(log_k(&Mat::<CNumber>::identity(3), &eta, &[0, 0], 0.0).unwrap(), Mat::zeros(3, 3));
        let shifted = log_k(&Mat::<CNumber>::identity(3), &eta, &[0, 1], 0.0).unwrap();
        assert_eq!(shifted[(2, 2)], CNumber::two_pi_i());
        assert_eq!(shifted[(0, 0)], CNumber::zero());
    }

    #[test]
    fn block_with_scalar_diagonal() {
        let eta = Partition::new(vec![2]).unwrap();
        let mu = z(0.3, -1.2);
        let a = z(2.0, 0.5);
        let m = Mat::from_rows(vec![vec![mu, z(0.0, 0.0)], vec![a, mu]]);
        let l = log_k(&m, &eta, &[0], 1e-12).unwrap();
        assert!((l[(1, 0)] - a / mu).norm() < 1e-14);
        assert!((l[(0, 0)] - mu.ln()).norm() < 1e-14);
        let back = exp_k(&l, &eta, 1e-12).unwrap();
        assert!(back.relative_deviation(&m) < 1e-14);
    }

    #[test]
    fn exact_positive_diagonal_round_trip() {
        let eta = Partition::new(vec![1, 2]).unwrap();
        let q = |n, d| CNumber::real(SymScalar::ratio(n, d));
        let m = Mat::from_rows(vec![
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(6, 1), q(0, 1)],
            vec![q(0, 1), q(-5, 3), q(6, 1)],
        ]);
        let l = log_k(&m, &eta, &[0, 0], 0.0).unwrap();
        assert_eq!(l[(1, 1)].re.to_string(), "log(2) + log(3)");
        assert_eq!(exp_k(&l, &eta, 0.0).unwrap(), m);
    }

    #[test]
    fn corner_adjustment() {
        let n = Mat::<CNumber>::identity(3).scale(&CNumber::two_pi_i());
        let (adj, k) = psi_adjust(&n, 0.0).unwrap();
        assert_eq!(k, 1);
        assert!(adj.is_zero());
        let zero = Mat::<CNumber>::zeros(3, 3);
        assert_eq!(psi_adjust(&zero, 0.0).unwrap(), (zero, 0));
        assert!(psi_adjust(&Mat::<CNumber>::identity(2), 0.0).is_err());
    }

    #[test]
    fn witness_for_translation() {
        let f = AffineMap::translation_by(vec![c(1, 1), c(0, 0)]);
        let nf = NormalForm::identity(Partition::new(vec![2, 1]).unwrap(), crate::normal_form::NormalFormOrigin::AlreadyNormal);
        let w = log_witness(&f, &nf, &[0, 0], 0.0).unwrap();
        assert_eq!(w.fprime, AffineMap::new(Mat::zeros(2, 2), vec![c(1, 1), c(0, 0)]).unwrap());
        assert!(witness_deviation(&f.approx(), &w.fprime.approx()) < 1e-15);
        let id = AffineMap::<CNumber>::identity(2);
        assert_eq!(log_witness(&id, &nf, &[0, 0], 0.0).unwrap().fprime, AffineMap::zero(2));
    }
}

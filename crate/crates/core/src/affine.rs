//! Affine maps `x ↦ Ax + a` and their matrix embeddings.
//!
//! `phi` sends `(A, a)` to `[[1, 0], [a, A]]`, a group homomorphism for
//! composition; `psi` sends it to `[[0, 0], [a, A]]`, which is linear.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<S> {
    pub linear: Mat<S>,
    pub translation: Vec<S>,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(linear: Mat<S>, translation: Vec<S>) -> Result<Self> {
        let n = translation.len();
        if linear.rows() != n || linear.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: linear.rows().max(linear.cols()) });
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap { linear: Mat::identity(n), translation: vec![S::zero(); n] }
    }

    pub fn zero(n: usize) -> Self {
        AffineMap { linear: Mat::zeros(n, n), translation: vec![S::zero(); n] }
    }

    pub fn translation_by(a: Vec<S>) -> Self {
        AffineMap { linear: Mat::identity(a.len()), translation: a }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        linalg::vec_add(&self.linear.mul_vec(x), &self.translation)
    }

    /// `self ∘ other`, i.e. `x ↦ A(Bx + b) + a`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(AffineMap { linear: self.linear.mul(&other.linear), translation: self.apply(&other.translation) })
    }

    pub fn add(&self, other: &Self) -> Self {
        AffineMap {
            linear: self.linear.add(&other.linear),
            translation: linalg::vec_add(&self.translation, &other.translation),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        AffineMap { linear: self.linear.scale(s), translation: linalg::vec_scale(&self.translation, s) }
    }

    pub fn phi(&self) -> Mat<S> {
        self.embed(S::one())
    }

    pub fn psi(&self) -> Mat<S> {
        self.embed(S::zero())
    }

    fn embed(&self, corner: S) -> Mat<S> {
        let n = self.dim();
        Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
            (0, 0) => corner.clone(),
            (0, _) => S::zero(),
            (_, 0) => self.translation[r - 1].clone(),
            _ => self.linear[(r - 1, c - 1)].clone(),
        })
    }

    pub fn phi_inv(m: &Mat<S>) -> Result<Self> {
        Self::unembed(m, S::one(), "first row must be (1, 0, …, 0)")
    }

    pub fn psi_inv(m: &Mat<S>) -> Result<Self> {
        Self::unembed(m, S::zero(), "first row must be zero")
    }

    fn unembed(m: &Mat<S>, corner: S, msg: &str) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Shape("expected a nonempty square matrix".into()));
        }
        let n = m.rows() - 1;
        let scale = m.max_magnitude();
        let tol = 1e-9;
        let first_ok = m[(0, 0)].minus(&corner).negligible(scale, tol)
            && (1..=n).all(|c| m[(0, c)].negligible(scale, tol));
        if !first_ok {
            return Err(Error::Shape(msg.into()));
        }
        Ok(AffineMap {
            linear: Mat::from_fn(n, n, |r, c| m[(r + 1, c + 1)].clone()),
            translation: (1..=n).map(|r| m[(r, 0)].clone()).collect(),
        })
    }

    pub fn determinant(&self) -> S {
        linalg::det(&self.linear)
    }

    /// Exact nonzero determinant, or `|det| > tol` for floats.
    pub fn is_invertible(&self, tol: f64) -> bool {
        let d = self.determinant();
        if S::EXACT {
            !d.is_zero()
        } else {
            d.magnitude() > tol * (1.0 + self.linear.max_magnitude()).powi(self.dim() as i32)
        }
    }

    pub fn approx(&self) -> AffineMap<Complex64> {
        AffineMap { linear: self.linear.approx(), translation: linalg::vec_approx(&self.translation) }
    }

    /// Equality, exact or entrywise within `tol·(1 + max entry)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.phi().approx_eq(&other.phi(), tol)
    }
}

/// Default float tolerance for commutativity checks.
pub const COMMUTE_TOL: f64 = 1e-9;

/// `Ok` when every pair commutes; otherwise the first failing index pair.
pub fn check_abelian<S: Scalar>(fs: &[AffineMap<S>], tol: f64) -> std::result::Result<(), (usize, usize)> {
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let ij = fs[i].phi().mul(&fs[j].phi());
            let ji = fs[j].phi().mul(&fs[i].phi());
            if fs[i].dim() != fs[j].dim() || !ij.approx_eq(&ji, tol) {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

//! Dense matrices over the scalar types used throughout the crate.
//!
//! Three families of scalars show up: exact symbolic complex numbers
//! ([`CNumber`](crate::scalar::CNumber)), exact Gaussian rationals
//! ([`GaussQ`]) used by the exact normal form, and `Complex64` floats.
//! [`Ring`] captures what division-free algorithms need, [`Field`] adds
//! inverses, and [`Scalar`] adds the exponential/logarithm hooks that the
//! triangular exp/log code relies on.

mod exact;
pub mod float;
mod gauss;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use exact::{det, minor, nullspace, rank, rref, solve, inverse};
pub use gauss::{eigenvalues_exact, GaussQ};

/// Commutative ring with a float shadow.
pub trait Ring: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Exact zero test (for floats: `== 0.0`).
    fn is_zero(&self) -> bool;
    /// Absolute value of the float shadow.
    fn magnitude(&self) -> f64;
}

pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;
}

/// Complex scalar that the affine/exp/log machinery is generic over.
pub trait Scalar: Ring {
    type Real: Ring;
    const EXACT: bool;

    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn approx(&self) -> Complex64;
    fn real_approx(r: &Self::Real) -> f64;
    fn try_inv(&self) -> Option<Self>;
    fn two_pi_i() -> Self;
    /// `e^self`, when representable.
    fn exp_scalar(&self) -> Option<Self>;
    /// `Log(self) + 2πi·branch` with the principal `Log`, when representable.
    fn log_scalar(&self, branch: i64) -> Option<Self>;
    /// The integer `k` with `self = 2πik`, if any.
    fn two_pi_i_multiple(&self, tol: f64) -> Option<i64>;
    /// Zero for exact scalars; `|self| <= tol·(1 + scale)` for floats.
    fn negligible(&self, scale: f64, tol: f64) -> bool;
}

// ---------------------------------------------------------------------------
// Float and rational ring instances

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Field for f64 {
    fn inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Field for Complex64 {
    fn inv(&self) -> Option<Self> {
        (!Ring::is_zero(self)).then(|| 1.0 / self)
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    const EXACT: bool = false;

    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn approx(&self) -> Complex64 {
        *self
    }
    fn real_approx(r: &f64) -> f64 {
        *r
    }
    fn try_inv(&self) -> Option<Self> {
        Field::inv(self)
    }
    fn two_pi_i() -> Self {
        Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    }
    fn exp_scalar(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn log_scalar(&self, branch: i64) -> Option<Self> {
        if Ring::is_zero(self) {
            return None;
        }
        // num_complex's ln returns arg in (-π, π]
        Some(self.ln() + Self::two_pi_i() * branch as f64)
    }
    fn two_pi_i_multiple(&self, tol: f64) -> Option<i64> {
        let k = (self.im / (2.0 * std::f64::consts::PI)).round();
        let scale = 1.0 + self.norm();
        let resid = (self - Self::two_pi_i() * k).norm();
        (resid <= tol * scale).then_some(k as i64)
    }
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.norm() <= tol * (1.0 + scale)
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Ring for Complex<BigRational> {
    fn zero() -> Self {
        Complex::new(Zero::zero(), Zero::zero())
    }
    fn one() -> Self {
        Complex::new(One::one(), Zero::zero())
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(<BigRational as Ring>::from_i64(v), Zero::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(<BigRational as Ring>::from_ratio(num, den), Zero::zero())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn magnitude(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
}

impl Field for Complex<BigRational> {
    fn inv(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(Complex::new(&self.re / &n, -(&self.im / &n)))
    }
}

// ---------------------------------------------------------------------------
// Dense matrix

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T> Mat<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T: Clone> Mat<T> {
    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_cols(cols: &[Vec<T>], rows: usize) -> Self {
        Mat::from_fn(rows, cols.len(), |r, c| cols[c][r].clone())
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])].clone())
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }
}

impl<T: Ring> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        Mat::from_fn(self.rows, o.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                let a = &self[(r, k)];
                let b = &o[(k, c)];
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.plus(&a.times(b));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for (k, x) in v.iter().enumerate() {
                    acc = acc.plus(&self[(r, k)].times(x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.times(s))
    }

    pub fn neg(&self) -> Self {
        self.map(Ring::negate)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Mat::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Ring::is_zero)
    }

    /// Largest entry magnitude of the float shadow.
    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(Ring::magnitude).fold(0.0, f64::max)
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }
}

impl<S: Scalar> Mat<S> {
    pub fn approx(&self) -> Mat<Complex64> {
        self.map(Scalar::approx)
    }

    /// Entrywise comparison: exact equality for exact scalars, relative
    /// tolerance `tol·(1 + scale)` for floats.
    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return false;
        }
        let scale = self.max_magnitude().max(o.max_magnitude());
        self.data.iter().zip(&o.data).all(|(a, b)| a.minus(b).negligible(scale, tol))
    }
}

impl Mat<Complex64> {
    /// Largest entrywise deviation relative to `1 + max|entry|`.
    pub fn relative_deviation(&self, o: &Self) -> f64 {
        let scale = 1.0 + self.max_magnitude().max(o.max_magnitude());
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
    }
}

pub fn vec_approx<S: Scalar>(v: &[S]) -> Vec<Complex64> {
    v.iter().map(Scalar::approx).collect()
}

pub fn vec_add<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.plus(y)).collect()
}

pub fn vec_sub<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.minus(y)).collect()
}

pub fn vec_scale<T: Ring>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|x| x.times(s)).collect()
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Inverse by Gauss–Jordan elimination, pivoting on the largest invertible
/// entry of the float shadow. Falls back to the adjugate for exact scalars
/// whose pivots are not units.
pub fn inverse_scalar<S: Scalar>(m: &Mat<S>) -> Option<Mat<S>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let mut a = m.hcat(&Mat::identity(n));
    let scale = m.max_magnitude();
    for c in 0..n {
        let mut candidates: Vec<usize> = (c..n).filter(|&r| !a[(r, c)].negligible(scale, 1e-14)).collect();
        candidates.sort_by(|&x, &y| a[(y, c)].magnitude().total_cmp(&a[(x, c)].magnitude()));
        let Some((p, inv)) = candidates.iter().find_map(|&r| a[(r, c)].try_inv().map(|i| (r, i))) else {
            return if S::EXACT && !candidates.is_empty() { adjugate_inverse(m) } else { None };
        };
        if p != c {
            for j in 0..2 * n {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(c, j)].clone();
                a[(c, j)] = tmp;
            }
        }
        for j in 0..2 * n {
            a[(c, j)] = a[(c, j)].times(&inv);
        }
        for r in 0..n {
            if r == c || a[(r, c)].is_zero() {
                continue;
            }
            let f = a[(r, c)].clone();
            for j in 0..2 * n {
                let d = f.times(&a[(c, j)]);
                a[(r, j)] = a[(r, j)].minus(&d);
            }
        }
    }
    Some(Mat::from_fn(n, n, |r, c| a[(r, n + c)].clone()))
}

fn adjugate_inverse<S: Scalar>(m: &Mat<S>) -> Option<Mat<S>> {
    let n = m.rows();
    let dinv = det(m).try_inv()?;
    let idx: Vec<usize> = (0..n).collect();
    Some(Mat::from_fn(n, n, |r, c| {
        let rows: Vec<usize> = idx.iter().copied().filter(|&i| i != c).collect();
        let cols: Vec<usize> = idx.iter().copied().filter(|&j| j != r).collect();
        let cof = minor(m, &rows, &cols);
        let cof = if (r + c) % 2 == 1 { cof.negate() } else { cof };
        cof.times(&dinv)
    }))
}

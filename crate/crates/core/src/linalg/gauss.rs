//! Gaussian rationals ℚ(i) and exact eigenvalues of matrices over them.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;

use super::{rational_to_f64, Field, Mat, Ring};

pub type GaussQ = Complex<BigRational>;

type Poly = Vec<GaussQ>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Ring::is_zero) {
        p.pop();
    }
    p
}

/// Characteristic polynomial `det(xI − A)`, coefficients low to high
/// (Faddeev–LeVerrier).
pub(crate) fn charpoly(a: &Mat<GaussQ>) -> Poly {
    let n = a.rows();
    let mut coeffs = vec![<GaussQ as Ring>::zero(); n + 1];
    coeffs[n] = <GaussQ as Ring>::one();
    let mut m = Mat::<GaussQ>::zeros(n, n);
    for k in 1..=n {
        let mut next = a.mul(&m);
        for i in 0..n {
            next[(i, i)] = next[(i, i)].plus(&coeffs[n - k + 1]);
        }
        m = next;
        let am = a.mul(&m);
        let mut tr = <GaussQ as Ring>::zero();
        for i in 0..n {
            tr = tr.plus(&am[(i, i)]);
        }
        let kq = <GaussQ as Ring>::from_i64(k as i64);
        coeffs[n - k] = tr.times(&Field::inv(&kq).unwrap()).negate();
    }
    coeffs
}

fn derivative(p: &Poly) -> Poly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.times(&<GaussQ as Ring>::from_i64(i as i64)))
            .collect(),
    )
}

fn eval(p: &Poly, x: &GaussQ) -> GaussQ {
    p.iter().rev().fold(<GaussQ as Ring>::zero(), |acc, c| acc.times(x).plus(c))
}

/// Quotient and remainder; `d` must be nonzero.
fn divrem(p: &Poly, d: &Poly) -> (Poly, Poly) {
    let d = trim(d.clone());
    let lead_inv = Field::inv(d.last().expect("division by zero polynomial")).unwrap();
    let mut r = trim(p.clone());
    if r.len() < d.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![<GaussQ as Ring>::zero(); r.len() - d.len() + 1];
    while r.len() >= d.len() && !r.is_empty() {
        let shift = r.len() - d.len();
        let coef = r.last().unwrap().times(&lead_inv);
        for (i, dc) in d.iter().enumerate() {
            r[shift + i] = r[shift + i].minus(&coef.times(dc));
        }
        q[shift] = coef;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        let inv = Field::inv(&lead).unwrap();
        a.iter_mut().for_each(|c| *c = c.times(&inv));
    }
    a
}

fn float_poly(p: &Poly) -> Vec<Complex64> {
    p.iter().map(|c| Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))).collect()
}

fn eval_f(p: &[Complex64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Float roots of a polynomial with simple roots (Durand–Kerner + Newton).
fn float_roots(p: &[Complex64]) -> Vec<Complex64> {
    let deg = p.len() - 1;
    let lead = p[deg];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let bound = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound.min(10.0)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-12, 0.0);
            }
            let step = eval_f(&monic, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    let dp: Vec<Complex64> = monic.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    for zi in &mut z {
        for _ in 0..5 {
            let d = eval_f(&dp, *zi);
            if d.norm() == 0.0 {
                break;
            }
            *zi -= eval_f(&monic, *zi) / d;
        }
    }
    z
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
fn convergents(x: f64, max_den: i128) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    out.push(BigRational::new(BigInt::from(h), BigInt::from(k)));
    for _ in 0..40 {
        if frac.abs() < 1e-14 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor() as i128;
        frac = inv - inv.floor();
        let (Some(hn), Some(kn)) = (a.checked_mul(h).and_then(|v| v.checked_add(h_prev)), a.checked_mul(k).and_then(|v| v.checked_add(k_prev))) else {
            break;
        };
        if kn > max_den {
            break;
        }
        h_prev = h;
        k_prev = k;
        h = hn;
        k = kn;
        out.push(BigRational::new(BigInt::from(h), BigInt::from(k)));
    }
    out
}

fn snap_root(p: &Poly, z: Complex64) -> Option<GaussQ> {
    let tol = 1e-6 * (1.0 + z.norm());
    let res: Vec<BigRational> = convergents(z.re, 1_000_000_000_000)
        .into_iter()
        .filter(|c| (rational_to_f64(c) - z.re).abs() <= tol)
        .collect();
    let ims: Vec<BigRational> = convergents(z.im, 1_000_000_000_000)
        .into_iter()
        .filter(|c| (rational_to_f64(c) - z.im).abs() <= tol)
        .collect();
    for re in &res {
        for im in &ims {
            let cand = Complex::new(re.clone(), im.clone());
            if Ring::is_zero(&eval(p, &cand)) {
                return Some(cand);
            }
        }
    }
    None
}

/// Distinct eigenvalues of `a` with algebraic multiplicities, provided every
/// eigenvalue lies in ℚ(i). Returns `None` otherwise.
pub fn eigenvalues_exact(a: &Mat<GaussQ>) -> Option<Vec<(GaussQ, usize)>> {
    let n = a.rows();
    if n == 0 {
        return Some(Vec::new());
    }
    let cp = charpoly(a);
    let g = gcd(&cp, &derivative(&cp));
    let (sqfree, _) = divrem(&cp, &g);
    let mut out = Vec::new();
    let mut total = 0;
    for z in float_roots(&float_poly(&sqfree)) {
        let root = snap_root(&sqfree, z)?;
        if out.iter().any(|(r, _): &(GaussQ, usize)| *r == root) {
            return None;
        }
        let lin = vec![root.negate(), <GaussQ as Ring>::one()];
        let mut rest = cp.clone();
        let mut mult = 0;
        loop {
            let (q, r) = divrem(&rest, &lin);
            if !r.is_empty() {
                break;
            }
            rest = q;
            mult += 1;
        }
        total += mult;
        out.push((root, mult));
    }
    (total == n).then_some(out)
}

//! Exact scalars: ℚ-combinations of monomials in square roots and declared
//! transcendental symbols, with a deterministic `f64` shadow.
//!
//! A [`SymScalar`] is a finite map from [`Monomial`] to a nonzero rational
//! coefficient. Monomials carry one squarefree radicand and a sorted list of
//! transcendental symbols with integer (possibly negative) exponents, so the
//! ring is a Laurent polynomial ring over ℚ(√2, √3, …). Equality of canonical
//! forms is exact equality *under the declaration that the transcendental
//! symbols are algebraically independent over the radicals*.

mod parse;
mod radical;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::{self, rational_to_f64, GaussQ};

pub use parse::{parse_rational, parse_scalar, ParseScalarError};
pub use radical::{factorize, squarefree_split};
pub use registry::{SymbolDecl, SymbolKind, SymbolRegistry};

mod registry;

/// A named transcendental constant.
#[derive(Clone)]
pub struct Symbol(Arc<SymbolInfo>);

#[derive(Debug)]
struct SymbolInfo {
    name: String,
    approx: f64,
}

impl Symbol {
    pub fn new(name: impl Into<String>, approx: f64) -> Self {
        Symbol(Arc::new(SymbolInfo { name: name.into(), approx }))
    }

    pub fn pi() -> Self {
        Symbol::new("pi", std::f64::consts::PI)
    }

    /// `log(p)` for a prime `p`.
    pub fn log_prime(p: u64) -> Self {
        Symbol::new(format!("log({p})"), (p as f64).ln())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn approx(&self) -> f64 {
        self.0.approx
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

/// `√radicand · Π symbol^exponent`, with `radicand` squarefree and no zero
/// exponents. The empty monomial is `1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    syms: Vec<(Symbol, i32)>,
    radicand: u64,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { syms: Vec::new(), radicand: 1 }
    }

    /// `√d` for squarefree `d`.
    pub fn sqrt(d: u64) -> Self {
        debug_assert_eq!(squarefree_split(d).0, 1);
        Monomial { syms: Vec::new(), radicand: d }
    }

    pub fn symbol(s: Symbol, exp: i32) -> Self {
        if exp == 0 {
            return Monomial::one();
        }
        Monomial { syms: vec![(s, exp)], radicand: 1 }
    }

    pub fn is_one(&self) -> bool {
        self.syms.is_empty() && self.radicand == 1
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn symbols(&self) -> &[(Symbol, i32)] {
        &self.syms
    }

    pub fn approx(&self) -> f64 {
        let mut v = (self.radicand as f64).sqrt();
        for (s, e) in &self.syms {
            v *= s.approx().powi(*e);
        }
        v
    }

    /// Product as `(rational factor, monomial)`.
    fn mul(&self, other: &Monomial) -> (u64, Monomial) {
        let g = self.radicand.gcd(&other.radicand);
        let radicand = (self.radicand / g)
            .checked_mul(other.radicand / g)
            .expect("radicand overflow");
        let mut syms: Vec<(Symbol, i32)> = Vec::with_capacity(self.syms.len() + other.syms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.syms.len() || j < other.syms.len() {
            let ord = match (self.syms.get(i), other.syms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    syms.push(self.syms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    syms.push(other.syms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.syms[i].1 + other.syms[j].1;
                    if e != 0 {
                        syms.push((self.syms[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        (g, Monomial { syms, radicand })
    }

    /// Inverse as `(rational factor, monomial)`: `1/√d = √d / d`.
    fn inv(&self) -> (BigRational, Monomial) {
        let syms = self.syms.iter().map(|(s, e)| (s.clone(), -e)).collect();
        let factor = BigRational::new(BigInt::one(), BigInt::from(self.radicand));
        (factor, Monomial { syms, radicand: self.radicand })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.radicand != 1 {
            parts.push(format!("sqrt({})", self.radicand));
        }
        for (s, e) in &self.syms {
            if *e == 1 {
                parts.push(s.name().to_string());
            } else {
                parts.push(format!("{}^{}", s.name(), e));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact real scalar in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SymScalar {
    terms: BTreeMap<Monomial, BigRational>,
}

impl SymScalar {
    pub fn zero() -> Self {
        SymScalar::default()
    }

    pub fn one() -> Self {
        SymScalar::rational(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        SymScalar::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        SymScalar::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(q: BigRational) -> Self {
        SymScalar::term(q, Monomial::one())
    }

    pub fn term(coeff: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        SymScalar { terms }
    }

    /// `√q` for a nonnegative rational `q`, normalized to `c·√d`.
    pub fn sqrt_rational(q: &BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(SymScalar::zero());
        }
        // √(a/b) = √(ab)/b
        let prod = (q.numer() * q.denom()).to_u64()?;
        let (outside, d) = squarefree_split(prod);
        let coeff = BigRational::new(BigInt::from(outside), q.denom().clone());
        Some(SymScalar::term(coeff, Monomial::sqrt(d)))
    }

    pub fn pi() -> Self {
        SymScalar::term(BigRational::one(), Monomial::symbol(Symbol::pi(), 1))
    }

    pub fn symbol(s: Symbol) -> Self {
        SymScalar::term(BigRational::one(), Monomial::symbol(s, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        SymScalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = SymScalar::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let (g, m) = m1.mul(m2);
                out.add_term(m, c1 * c2 * BigInt::from(g));
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return SymScalar::zero();
        }
        SymScalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(SymScalar::one(), |acc, _| acc.mul(self))
    }

    /// Inverse of a single-term scalar (units of the Laurent ring).
    pub fn try_inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let (factor, minv) = m.inv();
        Some(SymScalar::term(factor / c, minv))
    }

    /// Float shadow, summed in monomial order with compensation.
    pub fn approx(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (m, c) in &self.terms {
            let x = rational_to_f64(c) * m.approx();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// Transcendental symbols appearing in this scalar.
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.terms.keys().flat_map(|m| m.syms.iter().map(|(s, _)| s))
    }

    /// If the scalar is `j·π` for an integer `j`, return `j`.
    pub fn as_pi_multiple(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let pi = Monomial::symbol(Symbol::pi(), 1);
        (*m == pi && c.is_integer()).then(|| c.to_integer())
    }

    /// If the scalar is `Σ e_p·log(p)` with integer `e_p`, return `Π p^{e_p}`.
    pub fn as_log_of_rational(&self) -> Option<BigRational> {
        let mut acc = BigRational::one();
        for (m, c) in &self.terms {
            if m.radicand != 1 || m.syms.len() != 1 || m.syms[0].1 != 1 || !c.is_integer() {
                return None;
            }
            let name = m.syms[0].0.name();
            let p: u64 = name.strip_prefix("log(")?.strip_suffix(')')?.parse().ok()?;
            if factorize(p) != vec![(p, 1)] {
                return None;
            }
            let e = c.to_integer().to_i32()?;
            let base = BigRational::from_integer(BigInt::from(p));
            acc *= if e >= 0 { num_traits::pow(base, e as usize) } else { num_traits::pow(base.recip(), (-e) as usize) };
        }
        Some(acc)
    }

    /// `log|q|` as `Σ e_p·log(p)` over the prime factorization of `|q|`.
    pub fn log_of_rational(q: &BigRational) -> Option<Self> {
        if q.is_zero() {
            return None;
        }
        let num = q.numer().abs().to_u64()?;
        let den = q.denom().to_u64()?;
        let mut out = SymScalar::zero();
        for (p, e) in factorize(num) {
            out.add_term(Monomial::symbol(Symbol::log_prime(p), 1), BigRational::from_integer(BigInt::from(e)));
        }
        for (p, e) in factorize(den) {
            out.add_term(Monomial::symbol(Symbol::log_prime(p), 1), BigRational::from_integer(-BigInt::from(e)));
        }
        Some(out)
    }
}

impl fmt::Display for SymScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SymScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (≈{})", self.approx())
    }
}

/// Union of monomials appearing in `v` and each scalar's rational coordinate
/// vector over that basis (one row per scalar).
pub fn q_coordinates(v: &[SymScalar]) -> (Vec<Monomial>, Vec<Vec<BigRational>>) {
    let mut basis: Vec<Monomial> = v.iter().flat_map(|s| s.terms.keys().cloned()).collect();
    basis.sort();
    basis.dedup();
    let rows = v.iter().map(|s| basis.iter().map(|m| s.coeff(m)).collect()).collect();
    (basis, rows)
}

/// Complex number with exact real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CNumber {
    pub re: SymScalar,
    pub im: SymScalar,
}

impl CNumber {
    pub fn new(re: SymScalar, im: SymScalar) -> Self {
        CNumber { re, im }
    }

    pub fn real(re: SymScalar) -> Self {
        CNumber { re, im: SymScalar::zero() }
    }

    pub fn int(re: i64, im: i64) -> Self {
        CNumber::new(SymScalar::int(re), SymScalar::int(im))
    }

    pub fn i() -> Self {
        CNumber::int(0, 1)
    }

    pub fn conj(&self) -> Self {
        CNumber::new(self.re.clone(), self.im.neg())
    }

    pub fn norm_sqr(&self) -> SymScalar {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn scale_real(&self, s: &SymScalar) -> Self {
        CNumber::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Gaussian-rational value, if both parts are rational.
    pub fn as_gauss(&self) -> Option<GaussQ> {
        Some(Complex::new(self.re.as_rational()?, self.im.as_rational()?))
    }

    pub fn from_gauss(g: &GaussQ) -> Self {
        CNumber::new(SymScalar::rational(g.re.clone()), SymScalar::rational(g.im.clone()))
    }
}

impl fmt::Display for CNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "i*({})", self.im),
            (false, false) => write!(f, "({}) + i*({})", self.re, self.im),
        }
    }
}

impl fmt::Debug for CNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl linalg::Ring for SymScalar {
    fn zero() -> Self {
        SymScalar::zero()
    }
    fn one() -> Self {
        SymScalar::one()
    }
    fn from_i64(v: i64) -> Self {
        SymScalar::int(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        SymScalar::ratio(num, den)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn magnitude(&self) -> f64 {
        self.approx().abs()
    }
}

impl linalg::Ring for CNumber {
    fn zero() -> Self {
        CNumber::default()
    }
    fn one() -> Self {
        CNumber::real(SymScalar::one())
    }
    fn from_i64(v: i64) -> Self {
        CNumber::real(SymScalar::int(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        CNumber::real(SymScalar::ratio(num, den))
    }
    fn plus(&self, o: &Self) -> Self {
        CNumber::new(self.re.add(&o.re), self.im.add(&o.im))
    }
    fn minus(&self, o: &Self) -> Self {
        CNumber::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }
    fn times(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return CNumber::real(self.re.mul(&o.re));
        }
        CNumber::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }
    fn negate(&self) -> Self {
        CNumber::new(self.re.neg(), self.im.neg())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        linalg::Scalar::approx(self).norm()
    }
}

impl linalg::Scalar for CNumber {
    type Real = SymScalar;
    const EXACT: bool = true;

    fn re(&self) -> SymScalar {
        self.re.clone()
    }
    fn im(&self) -> SymScalar {
        self.im.clone()
    }
    fn approx(&self) -> Complex64 {
        Complex64::new(self.re.approx(), self.im.approx())
    }
    fn real_approx(r: &SymScalar) -> f64 {
        r.approx()
    }
    fn try_inv(&self) -> Option<Self> {
        let ninv = self.norm_sqr().try_inv()?;
        Some(self.conj().scale_real(&ninv))
    }
    fn two_pi_i() -> Self {
        CNumber::new(SymScalar::zero(), SymScalar::pi().scale(&BigRational::from_integer(2.into())))
    }
    /// Representable when the real part is `Σ e_p·log(p)` and the imaginary
    /// part an integer multiple of π.
    fn exp_scalar(&self) -> Option<Self> {
        let modulus = self.re.as_log_of_rational()?;
        let j = self.im.as_pi_multiple()?;
        let value = if j.is_odd() { -modulus } else { modulus };
        Some(CNumber::real(SymScalar::rational(value)))
    }
    /// Representable for nonzero real rationals.
    fn log_scalar(&self, branch: i64) -> Option<Self> {
        let q = self.as_gauss()?;
        if !q.im.is_zero() || q.re.is_zero() {
            return None;
        }
        let re = SymScalar::log_of_rational(&q.re)?;
        // principal arg is 0 or π
        let odd = if q.re.is_negative() { 1 } else { 0 };
        let turns = BigRational::from_integer(BigInt::from(2 * branch + odd));
        Some(CNumber::new(re, SymScalar::pi().scale(&turns)))
    }
    fn two_pi_i_multiple(&self, _tol: f64) -> Option<i64> {
        if !self.re.is_zero() {
            return None;
        }
        let j: BigInt = self.im.as_pi_multiple()?;
        if j.is_odd() {
            return None;
        }
        (j / BigInt::from(2)).to_i64()
    }
    fn negligible(&self, _scale: f64, _tol: f64) -> bool {
        linalg::Ring::is_zero(self)
    }
}

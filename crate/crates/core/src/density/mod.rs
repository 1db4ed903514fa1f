//! Generators of `𝔮_{w₀}` and the integer-rank density test.
//!
//! With `M` the `2n × q` real matrix whose columns are the real and
//! imaginary parts of the generators, the additive group they span is dense
//! in ℂⁿ exactly when `M` has rank `2n` and no nonzero integer vector lies in
//! the row space of `M`; equivalently `[M; s]` has rank `2n + 1` for every
//! nonzero integer row `s`.

mod lattice;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::linalg::{self, float, Mat, Scalar};
use crate::normal_form::NormalForm;
use crate::scalar::{q_coordinates, CNumber, SymScalar};

pub use lattice::lll;

/// Statement attached to every exact verdict.
pub const INDEPENDENCE_ASSUMPTION: &str =
    "declared transcendental symbols are algebraically independent over the field generated by the square roots";

#[derive(Clone, Debug, PartialEq)]
pub struct DensityInstance<S> {
    pub n: usize,
    /// `f′_k(w₀)`, natural-number coefficients.
    pub semigroup: Vec<Vec<S>>,
    /// `2πi·p₂(P e^{(k)})` for `k = 2..r`, integer coefficients.
    pub group: Vec<Vec<S>>,
}

impl<S: Scalar> DensityInstance<S> {
    pub fn columns(&self) -> impl Iterator<Item = &Vec<S>> {
        self.semigroup.iter().chain(&self.group)
    }

    pub fn q(&self) -> usize {
        self.semigroup.len() + self.group.len()
    }

    pub fn approx(&self) -> DensityInstance<Complex64> {
        DensityInstance {
            n: self.n,
            semigroup: self.semigroup.iter().map(|v| linalg::vec_approx(v)).collect(),
            group: self.group.iter().map(|v| linalg::vec_approx(v)).collect(),
        }
    }
}

pub fn q_w0_generators<S: Scalar>(fprimes: &[AffineMap<S>], nf: &NormalForm<S>) -> Result<DensityInstance<S>> {
    let n = nf.w0.len();
    let mut semigroup = Vec::with_capacity(fprimes.len());
    for f in fprimes {
        if f.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.dim() });
        }
        semigroup.push(f.apply(&nf.w0));
    }
    let mut group = Vec::new();
    for k in 2..=nf.partition.r() {
        let pe = nf.p_e(k)?;
        group.push(linalg::vec_scale(&pe[1..], &S::two_pi_i()));
    }
    Ok(DensityInstance { n, semigroup, group })
}

/// Real parts stacked over imaginary parts, one column per generator.
pub fn assemble_property_d<S: Scalar>(inst: &DensityInstance<S>) -> Mat<S::Real> {
    let cols: Vec<&Vec<S>> = inst.columns().collect();
    let n = inst.n;
    Mat::from_fn(2 * n, cols.len(), |r, c| if r < n { cols[c][r].re() } else { cols[c][r - n].im() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Dense,
    NotDense,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    Exact,
    Numeric,
}

/// The homogeneous rational system whose only solution is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub unknowns: usize,
    pub pivot_columns: Vec<usize>,
    pub monomials: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityVerdict {
    pub outcome: Outcome,
    pub mode: DecisionMode,
    pub witness: Option<Vec<i64>>,
    pub reason: String,
    pub certificate: Option<Certificate>,
    pub assumptions: Vec<String>,
}

impl DensityVerdict {
    fn new(outcome: Outcome, mode: DecisionMode, witness: Option<Vec<i64>>, reason: impl Into<String>) -> Self {
        let assumptions = match mode {
            DecisionMode::Exact => vec![INDEPENDENCE_ASSUMPTION.to_string()],
            DecisionMode::Numeric => vec!["floating-point search; not a proof".to_string()],
        };
        DensityVerdict { outcome, mode, witness, reason: reason.into(), certificate: None, assumptions }
    }
}

fn unit(q: usize) -> Vec<i64> {
    let mut e = vec![0; q];
    if q > 0 {
        e[0] = 1;
    }
    e
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn approx_real(m: &Mat<SymScalar>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].approx())
}

/// A set of `rows` columns with nonzero exact minor, searched in order of
/// decreasing float determinant.
fn pivot_columns(m: &Mat<SymScalar>) -> Option<(Vec<usize>, SymScalar)> {
    let rows: Vec<usize> = (0..m.rows()).collect();
    let f = approx_real(m);
    let mut subsets: Vec<(f64, Vec<usize>)> = combinations(m.cols(), m.rows())
        .into_iter()
        .map(|cols| {
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| f[(r, cols[c])]);
            (sub.determinant().abs(), cols)
        })
        .collect();
    subsets.sort_by(|a, b| b.0.total_cmp(&a.0));
    subsets.into_iter().find_map(|(_, cols)| {
        let d = linalg::minor(m, &rows, &cols);
        (!d.is_zero()).then_some((cols, d))
    })
}

/// Coefficients `c_j` with `det([M; s]) = Σ s_j c_j`, when `M` has one more
/// column than rows.
pub fn determinant_form(m: &Mat<SymScalar>) -> Option<Vec<SymScalar>> {
    if m.cols() != m.rows() + 1 {
        return None;
    }
    let rows: Vec<usize> = (0..m.rows()).collect();
    Some(
        (0..m.cols())
            .map(|j| {
                let cols: Vec<usize> = (0..m.cols()).filter(|&c| c != j).collect();
                let d = linalg::minor(m, &rows, &cols);
                if (m.rows() + j) % 2 == 1 {
                    d.neg()
                } else {
                    d
                }
            })
            .collect(),
    )
}

/// Whether `[M; s]` has rank below `rows + 1`, by exact minors.
pub fn witness_drops_rank(m: &Mat<SymScalar>, s: &[i64]) -> bool {
    let ext = m.vcat(&Mat::from_rows(vec![s.iter().map(|&v| SymScalar::int(v)).collect()]));
    let rows: Vec<usize> = (0..ext.rows()).collect();
    combinations(ext.cols(), ext.rows()).iter().all(|cols| linalg::minor(&ext, &rows, cols).is_zero())
}

fn to_integer_vector(v: &[BigRational]) -> Option<Vec<i64>> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    let sign = if ints.iter().find(|x| !x.is_zero())?.is_negative() { -BigInt::one() } else { BigInt::one() };
    ints.iter().map(|x| (x / &g * &sign).to_i64()).collect()
}

/// Exact decision over the symbolic scalars.
pub fn decide_dense_exact(inst: &DensityInstance<CNumber>) -> DensityVerdict {
    let m = assemble_property_d(inst);
    decide_matrix_exact(&m)
}

pub fn decide_matrix_exact(m: &Mat<SymScalar>) -> DensityVerdict {
    let (rows, q) = (m.rows(), m.cols());
    let exact = DecisionMode::Exact;
    if q == 0 {
        return DensityVerdict::new(Outcome::NotDense, exact, Some(Vec::new()), "no generators");
    }
    if q <= rows {
        return DensityVerdict::new(
            Outcome::NotDense,
            exact,
            Some(unit(q)),
            format!("column deficit: {q} generators cannot reach rank {}", rows + 1),
        );
    }
    let Some((pivots, d)) = pivot_columns(m) else {
        return DensityVerdict::new(Outcome::NotDense, exact, Some(unit(q)), format!("rank below {rows}"));
    };
    // Cramer null vectors, one per non-pivot column
    let all_rows: Vec<usize> = (0..rows).collect();
    let mut nulls: Vec<Vec<SymScalar>> = Vec::new();
    for j in (0..q).filter(|j| !pivots.contains(j)) {
        let mut x = vec![SymScalar::zero(); q];
        x[j] = d.clone();
        for (i, &ci) in pivots.iter().enumerate() {
            let mut cols = pivots.clone();
            cols[i] = j;
            x[ci] = linalg::minor(m, &all_rows, &cols).neg();
        }
        nulls.push(x);
    }
    let flat: Vec<SymScalar> = nulls.iter().flatten().cloned().collect();
    let (basis, coords) = q_coordinates(&flat);
    // equation (j, monomial): Σ_i s_i · coeff(x_j[i], monomial) = 0
    let mut system: Vec<Vec<BigRational>> = Vec::new();
    for j in 0..nulls.len() {
        for mono in 0..basis.len() {
            let row: Vec<BigRational> = (0..q).map(|i| coords[j * q + i][mono].clone()).collect();
            if row.iter().any(|c| !Zero::is_zero(c)) {
                system.push(row);
            }
        }
    }
    let sys = Mat::from_rows(system.clone());
    let kernel = if system.is_empty() { Mat::<BigRational>::identity(q) } else { linalg::nullspace(&sys) };
    if kernel.cols() == 0 {
        let mut v = DensityVerdict::new(
            Outcome::Dense,
            exact,
            None,
            "the rational system for integer vectors in the row space has only the zero solution",
        );
        v.certificate = Some(Certificate {
            unknowns: q,
            pivot_columns: pivots,
            monomials: basis.iter().map(|b| b.to_string()).collect(),
            rows: system.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect(),
        });
        return v;
    }
    match to_integer_vector(&kernel.col(0)) {
        Some(w) => DensityVerdict::new(Outcome::NotDense, exact, Some(w), "integer vector in the row space"),
        None => DensityVerdict::new(Outcome::Inconclusive, exact, None, "witness exceeds 64-bit integers"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    /// Singular values below `rank_tol·σ_max` count as zero.
    pub rank_tol: f64,
    /// Lattice scaling `10^precision`.
    pub precision: i32,
    /// Largest coefficient accepted in a witness.
    pub bound: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { rank_tol: 1e-8, precision: 12, bound: 1e6 }
    }
}

/// Floating-point decision by lattice reduction.
pub fn decide_dense_numeric(inst: &DensityInstance<Complex64>, opts: &NumericOptions) -> DensityVerdict {
    let m = assemble_property_d(inst);
    let f = DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)]);
    decide_matrix_numeric(&f, opts)
}

/// Best lattice relation found at scale `10^precision`.
struct LatticeHit {
    resid: f64,
    relation: Vec<i64>,
    /// Shortest non-relation basis vector over the relation vector, both
    /// measured in the scaled lattice.
    gap: f64,
}

fn lattice_search(x: &DMatrix<f64>, precision: i32, bound: f64, ambiguous: f64) -> Option<LatticeHit> {
    let (q, k) = x.shape();
    let c = 10f64.powi(precision);
    let mut basis: Vec<Vec<f64>> = (0..q)
        .map(|i| {
            let mut row = vec![0.0; q + k];
            row[i] = 1.0;
            for j in 0..k {
                row[q + j] = c * x[(i, j)];
            }
            row
        })
        .collect();
    lattice::lll(&mut basis, 0.99);
    let mut best: Option<LatticeHit> = None;
    let mut longest_relation = 0.0f64;
    let mut shortest_other = f64::INFINITY;
    for row in &basis {
        let length = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s: Vec<f64> = row[..q].iter().map(|v| v.round()).collect();
        let size = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if size == 0.0 {
            shortest_other = shortest_other.min(length);
            continue;
        }
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let resid = (0..k).map(|j| (0..q).map(|i| s[i] * x[(i, j)]).sum::<f64>().powi(2)).sum::<f64>().sqrt() / norm;
        if resid > ambiguous || size > bound {
            shortest_other = shortest_other.min(length);
            continue;
        }
        longest_relation = longest_relation.max(length);
        if best.as_ref().is_none_or(|h| resid < h.resid) {
            best = Some(LatticeHit { resid, relation: s.iter().map(|&v| v as i64).collect(), gap: 0.0 });
        }
    }
    best.map(|mut h| {
        h.gap = shortest_other / longest_relation;
        h
    })
}

/// Required ratio between the shortest non-relation and the relation.
const LATTICE_GAP: f64 = 10.0;

pub fn decide_matrix_numeric(m: &DMatrix<f64>, opts: &NumericOptions) -> DensityVerdict {
    let (rows, q) = m.shape();
    let numeric = DecisionMode::Numeric;
    if q == 0 {
        return DensityVerdict::new(Outcome::NotDense, numeric, Some(Vec::new()), "no generators");
    }
    if q <= rows {
        return DensityVerdict::new(
            Outcome::NotDense,
            numeric,
            Some(unit(q)),
            format!("column deficit: {q} generators cannot reach rank {}", rows + 1),
        );
    }
    if float::real_rank(m, opts.rank_tol) < rows {
        return DensityVerdict::new(Outcome::NotDense, numeric, Some(unit(q)), format!("rank below {rows}"));
    }
    let x = float::real_nullspace(m, opts.rank_tol);
    let accept = 10f64.powi(-opts.precision - 2);
    let ambiguous = 10f64.powi(-opts.precision - 1);
    match lattice_search(&x, opts.precision, opts.bound, ambiguous) {
        Some(h) if h.resid <= accept && h.gap >= LATTICE_GAP => DensityVerdict::new(
            Outcome::NotDense,
            numeric,
            Some(h.relation),
            format!("integer vector in the row space, relative residual {:.1e}, lattice gap {:.1e}", h.resid, h.gap),
        ),
        Some(h) if h.resid <= accept && h.gap >= LATTICE_GAP / 2.0 => DensityVerdict::new(
            Outcome::Inconclusive,
            numeric,
            None,
            format!("near relation with relative residual {:.1e}, lattice gap {:.1e}", h.resid, h.gap),
        ),
        _ => DensityVerdict::new(
            Outcome::Dense,
            numeric,
            None,
            format!(
                "no integer relation found with coefficients up to {:.0e} at lattice scaling 1e{}",
                opts.bound, opts.precision
            ),
        ),
    }
}

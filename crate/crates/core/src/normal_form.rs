//! Simultaneous block lower-triangular form of a commuting family.
//!
//! Given homogenized generators `X_k = Φ(f_k)`, find `P` with first row
//! `(1, 0, …, 0)` such that every `P⁻¹X_kP` is block diagonal, each block
//! lower triangular with a constant diagonal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::linalg::{self, float, GaussQ, Mat, Ring, Scalar};
use crate::scalar::CNumber;

/// Default tolerance for block-structure tests on float data.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Default relative gap below which two float eigenvalues are merged.
pub const EIG_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Shape(format!("invalid partition {sizes:?}")));
        }
        Ok(Partition(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Index ranges of the blocks.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.0
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }
}

/// `e^{(k)}`: the unit vector at the first coordinate of block `k` (1-based).
pub fn basis_vector_e<S: Ring>(k: usize, partition: &Partition) -> Result<Vec<S>> {
    if k == 0 || k > partition.r() {
        return Err(Error::OutOfRange { index: k, len: partition.r() });
    }
    let mut v = vec![S::zero(); partition.total()];
    v[partition.ranges()[k - 1].start] = S::one();
    Ok(v)
}

/// Whether `m` lies in the cone for `partition`; with `invertible` the block
/// diagonals must also be nonzero.
pub fn k_membership<S: Scalar>(m: &Mat<S>, partition: &Partition, tol: f64, invertible: bool) -> bool {
    let n = m.rows();
    if !m.is_square() || partition.total() != n {
        return false;
    }
    let scale = m.max_magnitude();
    let zero = |x: &S| x.negligible(scale, tol);
    let ranges = partition.ranges();
    let block = |i: usize| ranges.iter().position(|r| r.contains(&i)).unwrap();
    for i in 0..n {
        for j in 0..n {
            if (j > i || block(i) != block(j)) && !zero(&m[(i, j)]) {
                return false;
            }
        }
    }
    ranges.iter().all(|r| {
        let mu = &m[(r.start, r.start)];
        (!invertible || !zero(mu)) && r.clone().all(|i| zero(&m[(i, i)].minus(mu)))
    })
}

/// The finest partition for which every matrix is in the invertible cone.
pub fn scan_partition<S: Scalar>(mats: &[Mat<S>], tol: f64) -> Option<Partition> {
    let n = mats.first()?.rows();
    let neg = |m: &Mat<S>, i: usize, j: usize| m[(i, j)].negligible(m.max_magnitude(), tol);
    if !mats.iter().all(|m| (0..n).all(|i| (i + 1..n).all(|j| neg(m, i, j)))) {
        return None;
    }
    let mut sizes = Vec::new();
    let mut start = 0;
    for cut in 1..=n {
        let valid = cut == n || mats.iter().all(|m| (cut..n).all(|i| (0..cut).all(|j| neg(m, i, j))));
        if valid {
            sizes.push(cut - start);
            start = cut;
        }
    }
    let p = Partition::new(sizes).ok()?;
    mats.iter().all(|m| k_membership(m, &p, tol, true)).then_some(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalFormOrigin {
    /// The family was already in block form; `P = I`.
    AlreadyNormal,
    /// Computed by simultaneous triangularization.
    Computed,
    /// Supplied with the problem and verified.
    Supplied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<S> {
    pub p: Mat<S>,
    pub p_inv: Mat<S>,
    pub partition: Partition,
    pub u0: Vec<S>,
    pub v0: Vec<S>,
    pub w0: Vec<S>,
    pub varphi: AffineMap<S>,
    pub origin: NormalFormOrigin,
}

impl<S: Scalar> NormalForm<S> {
    pub fn new(p: Mat<S>, p_inv: Mat<S>, partition: Partition, origin: NormalFormOrigin) -> Result<Self> {
        let varphi = AffineMap::phi_inv(&p)?;
        if partition.total() != p.rows() {
            return Err(Error::DimensionMismatch { expected: p.rows(), found: partition.total() });
        }
        let u0 = (1..=partition.r()).fold(vec![S::zero(); p.rows()], |acc, k| {
            linalg::vec_add(&acc, &basis_vector_e(k, &partition).unwrap())
        });
        let v0 = p.mul_vec(&u0);
        let w0 = v0[1..].to_vec();
        Ok(NormalForm { p, p_inv, partition, u0, v0, w0, varphi, origin })
    }

    pub fn identity(partition: Partition, origin: NormalFormOrigin) -> Self {
        let m = partition.total();
        Self::new(Mat::identity(m), Mat::identity(m), partition, origin).expect("identity is a valid conjugator")
    }

    /// Build from a supplied `P`, checking membership of every conjugated
    /// generator.
    pub fn supplied(p: Mat<S>, partition: Partition, mats: &[Mat<S>], tol: f64) -> Result<Self> {
        let p_inv = linalg::inverse_scalar(&p).ok_or_else(|| Error::Shape("supplied P is not invertible".into()))?;
        let nf = Self::new(p, p_inv, partition, NormalFormOrigin::Supplied)?;
        nf.verify(mats, tol)?;
        Ok(nf)
    }

    pub fn conjugate(&self, x: &Mat<S>) -> Mat<S> {
        self.p_inv.mul(x).mul(&self.p)
    }

    pub fn unconjugate(&self, x: &Mat<S>) -> Mat<S> {
        self.p.mul(x).mul(&self.p_inv)
    }

    pub fn verify(&self, mats: &[Mat<S>], tol: f64) -> Result<()> {
        for (k, x) in mats.iter().enumerate() {
            if !k_membership(&self.conjugate(x), &self.partition, tol, true) {
                return Err(Error::Membership(format!("conjugated generator {} leaves the cone", k + 1)));
            }
        }
        Ok(())
    }

    /// `P e^{(k)}`, 1-based.
    pub fn p_e(&self, k: usize) -> Result<Vec<S>> {
        Ok(self.p.mul_vec(&basis_vector_e(k, &self.partition)?))
    }

    pub fn approx(&self) -> NormalForm<Complex64> {
        NormalForm {
            p: self.p.approx(),
            p_inv: self.p_inv.approx(),
            partition: self.partition.clone(),
            u0: linalg::vec_approx(&self.u0),
            v0: linalg::vec_approx(&self.v0),
            w0: linalg::vec_approx(&self.w0),
            varphi: self.varphi.approx(),
            origin: self.origin,
        }
    }
}

/// Exact normal form. Works when the family is already in block form, or
/// when all entries are Gaussian rationals and every eigenvalue lies in ℚ(i).
pub fn find_normal_form_exact(fs: &[AffineMap<CNumber>]) -> Result<NormalForm<CNumber>> {
    let mats: Vec<Mat<CNumber>> = fs.iter().map(AffineMap::phi).collect();
    if let Some(p) = scan_partition(&mats, 0.0) {
        return Ok(NormalForm::identity(p, NormalFormOrigin::AlreadyNormal));
    }
    let gauss: Option<Vec<Mat<GaussQ>>> = mats
        .iter()
        .map(|m| {
            let entries: Option<Vec<GaussQ>> = m.iter().map(CNumber::as_gauss).collect();
            entries.map(|e| Mat::from_fn(m.rows(), m.cols(), |r, c| e[r * m.cols() + c].clone()))
        })
        .collect();
    let gauss = gauss.ok_or_else(|| Error::NotRepresentable("entries outside ℚ(i)".into()))?;
    let p = triangularize(&gauss, 0.0)?;
    let p = p.map(CNumber::from_gauss);
    let p_inv = linalg::inverse_scalar(&p).ok_or_else(|| Error::NumericalFailure("singular conjugator".into()))?;
    finish(p, p_inv, &mats, 0.0)
}

/// Float normal form with eigenvalue clustering tolerance `eig_tol`.
pub fn find_normal_form_float(fs: &[AffineMap<Complex64>], eig_tol: f64) -> Result<NormalForm<Complex64>> {
    let mats: Vec<Mat<Complex64>> = fs.iter().map(AffineMap::phi).collect();
    if let Some(p) = scan_partition(&mats, MEMBERSHIP_TOL) {
        return Ok(NormalForm::identity(p, NormalFormOrigin::AlreadyNormal));
    }
    let p = triangularize(&mats, eig_tol)?;
    let p_inv = float::inverse(&p).ok_or_else(|| Error::NumericalFailure("singular conjugator".into()))?;
    finish(p, p_inv, &mats, 1e-8)
}

fn finish<S: Scalar>(p: Mat<S>, p_inv: Mat<S>, mats: &[Mat<S>], tol: f64) -> Result<NormalForm<S>> {
    let conj: Vec<Mat<S>> = mats.iter().map(|x| p_inv.mul(x).mul(&p)).collect();
    let partition = scan_partition(&conj, tol)
        .ok_or_else(|| Error::NumericalFailure("conjugated family is not block triangular".into()))?;
    NormalForm::new(p, p_inv, partition, NormalFormOrigin::Computed)
}

/// Field operations the triangularization needs, exact or floating.
trait TriField: linalg::Field {
    /// Distinct eigenvalues with algebraic multiplicities.
    fn eigen(r: &Mat<Self>, eig_tol: f64) -> Result<Vec<(Self, usize)>>;
    /// Basis (columns) of the null space of `m`, which should have dimension `dim`.
    fn kernel_of_dim(m: &Mat<Self>, dim: usize) -> Result<Mat<Self>>;
    /// Basis of the null space of `m`.
    fn kernel(m: &Mat<Self>) -> Mat<Self>;
    /// Coordinates `c` with `w·c = y`, for `w` of full column rank.
    fn coords(w: &Mat<Self>, y: &Mat<Self>) -> Mat<Self>;
    /// Rows annihilating the span of `u` (the identity when `u` is empty).
    fn annihilator(u: &[Vec<Self>], dim: usize) -> Mat<Self>;
    /// A column of `cands` outside the span of `u`, reduced against it.
    fn extend(u: &[Vec<Self>], cands: &Mat<Self>) -> Option<Vec<Self>>;
    fn near(&self, other: &Self, eig_tol: f64) -> bool;
    fn key(&self) -> (f64, f64);
}

impl TriField for GaussQ {
    fn eigen(r: &Mat<Self>, _: f64) -> Result<Vec<(Self, usize)>> {
        linalg::eigenvalues_exact(r).ok_or_else(|| Error::NotRepresentable("eigenvalues outside ℚ(i)".into()))
    }

    fn kernel_of_dim(m: &Mat<Self>, dim: usize) -> Result<Mat<Self>> {
        let k = linalg::nullspace(m);
        if k.cols() != dim {
            return Err(Error::NumericalFailure(format!("generalized eigenspace has dimension {} not {dim}", k.cols())));
        }
        Ok(k)
    }

    fn kernel(m: &Mat<Self>) -> Mat<Self> {
        linalg::nullspace(m)
    }

    fn coords(w: &Mat<Self>, y: &Mat<Self>) -> Mat<Self> {
        linalg::solve(w, y).expect("invariant subspace")
    }

    fn annihilator(u: &[Vec<Self>], dim: usize) -> Mat<Self> {
        if u.is_empty() {
            return Mat::identity(dim);
        }
        linalg::nullspace(&Mat::from_rows(u.to_vec())).transpose()
    }

    fn extend(u: &[Vec<Self>], cands: &Mat<Self>) -> Option<Vec<Self>> {
        let base = u.len();
        (0..cands.cols()).map(|c| cands.col(c)).find(|v| {
            let mut rows = u.to_vec();
            rows.push(v.clone());
            linalg::rank(&Mat::from_rows(rows)) > base
        })
    }

    fn near(&self, other: &Self, _: f64) -> bool {
        self == other
    }

    fn key(&self) -> (f64, f64) {
        (linalg::rational_to_f64(&self.re), linalg::rational_to_f64(&self.im))
    }
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn orthogonalize(u: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let mut v = v.to_vec();
    for _ in 0..2 {
        for b in u {
            let c = dot_conj(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    v
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl TriField for Complex64 {
    fn eigen(r: &Mat<Self>, eig_tol: f64) -> Result<Vec<(Self, usize)>> {
        // an eigenvalue of a defective d×d block is only determined to about
        // ε^{1/d}; the cluster mean is accurate to ε
        let scale = 1.0 + r.max_magnitude();
        let tol = eig_tol.max(10.0 * (f64::EPSILON * scale).powf(1.0 / r.rows().max(1) as f64));
        let mut ev = float::eigenvalues(r);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut clusters: Vec<Vec<Complex64>> = Vec::new();
        for z in ev {
            match clusters.iter_mut().find(|c| c.iter().any(|w| (z - w).norm() <= tol * w.norm().max(1.0))) {
                Some(c) => c.push(z),
                None => clusters.push(vec![z]),
            }
        }
        let centers: Vec<(Complex64, usize)> =
            clusters.iter().map(|c| (c.iter().sum::<Complex64>() / c.len() as f64, c.len())).collect();
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let gap = (centers[i].0 - centers[j].0).norm();
                if gap <= 10.0 * tol * centers[i].0.norm().max(1.0) {
                    return Err(Error::NumericalFailure(format!("ambiguous eigenvalue clustering, gap {gap:.3e}")));
                }
            }
        }
        Ok(centers)
    }

    fn kernel_of_dim(m: &Mat<Self>, dim: usize) -> Result<Mat<Self>> {
        let (v, worst) = float::smallest_singular_vectors(m, dim);
        let limit = 1e-6 * (1.0 + m.max_magnitude());
        if worst > limit {
            return Err(Error::NumericalFailure(format!(
                "generalized eigenspace of dimension {dim} not found, residual {worst:.3e}"
            )));
        }
        Ok(v)
    }

    fn kernel(m: &Mat<Self>) -> Mat<Self> {
        float::nullspace(m, 1e-8)
    }

    fn coords(w: &Mat<Self>, y: &Mat<Self>) -> Mat<Self> {
        float::conj_transpose(w).mul(y)
    }

    fn annihilator(u: &[Vec<Self>], dim: usize) -> Mat<Self> {
        let mut proj = Mat::identity(dim);
        for b in u {
            proj = proj.sub(&Mat::from_fn(dim, dim, |r, c| b[r] * b[c].conj()));
        }
        proj
    }

    fn extend(u: &[Vec<Self>], cands: &Mat<Self>) -> Option<Vec<Self>> {
        let best = (0..cands.cols())
            .map(|c| orthogonalize(u, &cands.col(c)))
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))?;
        let n = norm(&best);
        (n > 1e-6).then(|| best.iter().map(|z| z / n).collect())
    }

    fn near(&self, other: &Self, eig_tol: f64) -> bool {
        (self - other).norm() <= eig_tol * other.norm().max(1.0)
    }

    fn key(&self) -> (f64, f64) {
        (self.re, self.im)
    }
}

struct JointClass<T> {
    basis: Mat<T>,
    eigen: Vec<T>,
}

/// Split the space into joint generalized eigenspaces of the family.
fn joint_classes<T: TriField>(mats: &[Mat<T>], eig_tol: f64) -> Result<Vec<JointClass<T>>> {
    let dim = mats[0].rows();
    let mut classes = vec![JointClass { basis: Mat::identity(dim), eigen: Vec::new() }];
    for x in mats {
        let mut next = Vec::new();
        for class in classes {
            let w = &class.basis;
            let restricted = T::coords(w, &x.mul(w));
            for (lambda, mult) in T::eigen(&restricted, eig_tol)? {
                let shifted = restricted.sub(&Mat::identity(w.cols()).scale(&lambda));
                let y = T::kernel_of_dim(&shifted.pow(mult), mult)?;
                let mut eigen = class.eigen.clone();
                eigen.push(lambda);
                next.push(JointClass { basis: w.mul(&y), eigen });
            }
        }
        classes = next;
    }
    Ok(classes)
}

/// Flag `u_1 ⊂ … ⊂ u_d` inside `span(space)` with `(X_k − λ_k)u_{i+1} ∈ span(u_1..u_i)`.
fn flag<T: TriField>(space: &Mat<T>, nil: &[Mat<T>], start: Vec<Vec<T>>, steps: usize) -> Result<Vec<Vec<T>>> {
    let dim = space.rows();
    let mut u = start;
    for _ in 0..steps {
        let c = T::annihilator(&u, dim);
        let stacked = nil.iter().map(|n| c.mul(n).mul(space)).reduce(|a, b| a.vcat(&b)).unwrap();
        let y = T::kernel(&stacked);
        let cands = space.mul(&y);
        let v = T::extend(&u, &cands).ok_or_else(|| Error::NumericalFailure("no common eigenvector found".into()))?;
        u.push(v);
    }
    Ok(u)
}

fn triangularize<T: TriField>(mats: &[Mat<T>], eig_tol: f64) -> Result<Mat<T>> {
    let dim = mats[0].rows();
    let classes = joint_classes(mats, eig_tol)?;
    let is_trivial = |c: &JointClass<T>| c.eigen.iter().all(|l| l.near(&T::one(), eig_tol));
    let first = classes
        .iter()
        .position(is_trivial)
        .ok_or_else(|| Error::NumericalFailure("no joint eigenvalue class equal to 1".into()))?;
    let mut order: Vec<usize> = (0..classes.len()).filter(|&i| i != first).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (classes[a].eigen[0].key(), classes[b].eigen[0].key());
        classes[b].basis.cols().cmp(&classes[a].basis.cols()).then(ka.0.total_cmp(&kb.0)).then(ka.1.total_cmp(&kb.1))
    });
    order.insert(0, first);

    let mut columns: Vec<Vec<T>> = Vec::with_capacity(dim);
    for (pos, &ci) in order.iter().enumerate() {
        let class = &classes[ci];
        let nil: Vec<Mat<T>> = mats
            .iter()
            .zip(&class.eigen)
            .map(|(x, l)| x.sub(&Mat::identity(dim).scale(l)))
            .collect();
        let d = class.basis.cols();
        let flag_vecs = if pos == 0 {
            // the hyperplane x_0 = 0 meets the class in a (d−1)-dimensional
            // invariant subspace; the remaining vector carries x_0 = 1
            let row0 = Mat::from_fn(1, d, |_, c| class.basis[(0, c)].clone());
            let inside = class.basis.mul(&T::kernel(&row0));
            let mut u = flag(&inside, &nil, Vec::new(), d - 1)?;
            let top = T::extend(&u, &class.basis)
                .ok_or_else(|| Error::NumericalFailure("homogenizing direction missing".into()))?;
            let lead = top[0].inv().ok_or_else(|| Error::NumericalFailure("homogenizing direction missing".into()))?;
            u.push(top.iter().map(|x| x.times(&lead)).collect());
            u
        } else {
            flag(&class.basis, &nil, Vec::new(), d)?
        };
        columns.extend(flag_vecs.into_iter().rev());
    }
    // P must lie in Φ(GA): clean the first row of the float residue
    for col in columns.iter_mut().skip(1) {
        col[0] = T::zero();
    }
    Ok(Mat::from_cols(&columns, dim))
}

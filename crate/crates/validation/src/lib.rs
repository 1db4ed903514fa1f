//! Random instance generators and fixture loading for end-to-end checks
//! of the decision procedure.

use hypercyclic::affine::AffineMap;
use hypercyclic::linalg::{Mat, Ring};
use hypercyclic::normal_form::Partition;
use hypercyclic::pipeline::Options;
use hypercyclic::problem::{Family, Mode, Problem};
use hypercyclic::scalar::{CNumber, SymScalar, SymbolRegistry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> Problem {
    Problem::load(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn rational(rng: &mut impl Rng, span: i64) -> SymScalar {
    SymScalar::ratio(rng.gen_range(-span..=span), rng.gen_range(1..=4))
}

pub fn positive(rng: &mut impl Rng) -> SymScalar {
    SymScalar::ratio(rng.gen_range(1..=9), rng.gen_range(1..=4))
}

pub fn gauss(rng: &mut impl Rng, span: i64) -> CNumber {
    CNumber::new(rational(rng, span), rational(rng, span))
}

pub fn real(rng: &mut impl Rng, span: i64) -> CNumber {
    CNumber::real(rational(rng, span))
}

pub fn affine(rng: &mut impl Rng, n: usize) -> AffineMap<CNumber> {
    AffineMap::new(Mat::from_fn(n, n, |_, _| gauss(rng, 3)), (0..n).map(|_| gauss(rng, 3)).collect()).unwrap()
}

pub fn partition(rng: &mut impl Rng, total: usize) -> Partition {
    let mut sizes = Vec::new();
    let mut left = total;
    while left > 0 {
        let s = rng.gen_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    Partition::new(sizes).unwrap()
}

/// Cone matrix with the given block diagonals and strictly lower entries from `off`.
pub fn cone_matrix<S: Ring>(partition: &Partition, diag: &[S], mut off: impl FnMut() -> S) -> Mat<S> {
    let m = partition.total();
    let mut out = Mat::zeros(m, m);
    for (k, range) in partition.ranges().into_iter().enumerate() {
        for i in range.clone() {
            out[(i, i)] = diag[k].clone();
            for j in range.start..i {
                out[(i, j)] = off();
            }
        }
    }
    out
}

pub fn approx_c(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

/// Random `P = Φ(φ)` with small integer entries, invertible.
pub fn conjugator(rng: &mut impl Rng, n: usize) -> Mat<CNumber> {
    loop {
        let p = Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
            (0, 0) => CNumber::one(),
            (0, _) => CNumber::zero(),
            _ => CNumber::int(rng.gen_range(-2..=2), if rng.gen_bool(0.3) { rng.gen_range(-1..=1) } else { 0 }),
        });
        if !hypercyclic::linalg::det(&p).is_zero() {
            return p;
        }
    }
}

/// Commuting family already in the cone: on block `b` generator `k` is
/// `μ_kb I + a_kb N_b + c_kb N_b²` for a shared strictly lower `N_b`.
/// The first block has `μ = 1`, so each matrix is a `Φ`-image.
pub fn commuting_cone_family(rng: &mut impl Rng, partition: &Partition, count: usize, exact_diag: bool) -> Vec<Mat<CNumber>> {
    let m = partition.total();
    let ranges = partition.ranges();
    let nil: Vec<Mat<CNumber>> = ranges
        .iter()
        .map(|r| Mat::from_fn(r.len(), r.len(), |i, j| if i > j { gauss(rng, 2) } else { CNumber::zero() }))
        .collect();
    (0..count)
        .map(|_| {
            let mut out = Mat::zeros(m, m);
            for (b, range) in ranges.iter().enumerate() {
                let mu = if b == 0 {
                    CNumber::one()
                } else if exact_diag {
                    CNumber::real(positive(rng))
                } else {
                    loop {
                        let z = gauss(rng, 3);
                        if !z.is_zero() {
                            break z;
                        }
                    }
                };
                let (a, c) = (gauss(rng, 2), gauss(rng, 2));
                let n2 = nil[b].mul(&nil[b]);
                let block = Mat::identity(range.len()).scale(&mu).add(&nil[b].scale(&a)).add(&n2.scale(&c));
                for i in 0..range.len() {
                    for j in 0..range.len() {
                        out[(range.start + i, range.start + j)] = block[(i, j)].clone();
                    }
                }
            }
            out
        })
        .collect()
}

pub fn problem_from(n: usize, maps: Vec<AffineMap<CNumber>>) -> Problem {
    Problem {
        n,
        registry: SymbolRegistry::new(),
        independent: true,
        mode: Mode::Exact,
        generators: Family::from_exact(maps),
        witnesses: None,
        normal_form: None,
        branches: None,
    }
}

pub fn no_shortcuts() -> Options {
    Options { skip_shortcuts: true, ..Options::default() }
}

//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false` so the lines are always printed. The process
//! exits nonzero when a blocking criterion fails; criterion 8 is reported
//! but does not gate.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hypercyclic_validation::*;
use hypercyclic::affine::AffineMap;
use hypercyclic::density::{assemble_property_d, decide_dense_exact, witness_drops_rank, DecisionMode, DensityInstance, Outcome};
use hypercyclic::exp_log::{exp_k, log_k};
use hypercyclic::linalg::{self, Mat, Ring, Scalar};
use hypercyclic::normal_form::{find_normal_form_exact, find_normal_form_float, k_membership, NormalFormOrigin, EIG_TOL};
use hypercyclic::orbit::{simulate, SimConfig};
use hypercyclic::pipeline::{decide_hypercyclic, DecisionReport, Options, Verdict};
use hypercyclic::problem::{Family, Mode, Problem};
use hypercyclic::scalar::{parse_scalar, CNumber, SymScalar};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

/// Float tolerance for the exp/log round trip and commutators.
const EXP_LOG_TOL: f64 = 1e-9;
/// Float tolerance for normal-form membership.
const NF_TOL: f64 = 1e-8;
/// Grid spacing and covering radius for the density oracle.
const EPS: f64 = 0.05;
/// Coefficient range of the brute-force integer sweep.
const SWEEP: i64 = 50;
/// Coefficient range of the coverage enumeration.
const COVER: i64 = 200;
const COVERAGE_GATE: f64 = 0.30;
const CONTRACTION_GATE: f64 = 0.05;

struct Line {
    id: u8,
    pass: bool,
    blocking: bool,
    detail: String,
}

fn line(id: u8, pass: bool, detail: String) -> Line {
    Line { id, pass, blocking: true, detail }
}

fn main() -> ExitCode {
    let checks: [(u8, fn() -> Line); 8] = [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8)];
    let mut blocking_failures = 0;
    for (id, check) in checks {
        let start = Instant::now();
        let l = check();
        assert_eq!(l.id, id);
        let tag = if l.pass { "PASS" } else { "FAIL" };
        let gate = if l.blocking { "" } else { " (non-blocking)" };
        println!("criterion {id}: {tag}{gate} [{:.2}s] {}", start.elapsed().as_secs_f64(), l.detail);
        if !l.pass && l.blocking {
            blocking_failures += 1;
        }
    }
    if blocking_failures > 0 {
        println!("{blocking_failures} blocking criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn parse(problem: &Problem, src: &str) -> SymScalar {
    parse_scalar(src, &problem.registry).unwrap()
}

/// The rational `c` with `got = c·want`, when one exists.
fn proportional(got: &[SymScalar], want: &[SymScalar]) -> Option<BigRational> {
    let i = want.iter().position(|w| !w.is_zero())?;
    let c = got[i].mul(&want[i].try_inv()?).as_rational()?;
    got.iter().zip(want).all(|(g, w)| *g == w.scale(&c)).then_some(c)
}

fn c1() -> Line {
    let start = Instant::now();
    let problem = fixture("golden.json");
    let report = decide_hypercyclic(&problem, &Options::default()).unwrap();
    let elapsed = start.elapsed();
    let nf = report.normal_form.as_ref().unwrap();
    let identity: Vec<Vec<String>> = (0..3).map(|r| (0..3).map(|c| if r == c { "1" } else { "0" }.to_string()).collect()).collect();
    let mut failures = Vec::new();
    if report.verdict != Verdict::Hypercyclic {
        failures.push(format!("verdict {}", report.verdict));
    }
    if nf.eta != [2, 1] || nf.r != 2 {
        failures.push(format!("eta {:?}, r {}", nf.eta, nf.r));
    }
    if nf.p != identity {
        failures.push(format!("P {:?}", nf.p));
    }
    if nf.w0 != ["0", "1"] {
        failures.push(format!("w0 {:?}", nf.w0));
    }
    if elapsed > Duration::from_secs(5) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    let form = report.density.as_ref().and_then(|d| d.determinant_form.clone()).unwrap_or_default();
    let got: Vec<SymScalar> = form.iter().map(|s| parse(&problem, s)).collect();
    let printed: Vec<SymScalar> = ["-2*sqrt(3)*pi", "4*sqrt(2)*pi", "-8*pi^2", "2*sqrt(5)*pi", "-2*sqrt(7)*pi"]
        .iter()
        .map(|s| parse(&problem, s))
        .collect();
    if got.len() != printed.len() || proportional(&got, &printed).is_none() {
        let ratios: Vec<String> = got
            .iter()
            .zip(&printed)
            .map(|(g, w)| g.mul(&w.try_inv().unwrap()).to_string())
            .collect();
        failures.push(format!("determinant coefficients [{}] are not proportional to 2pi*(-sqrt(3), 2sqrt(2), -4pi, sqrt(5), -sqrt(7)); termwise ratios [{}]", form.join(", "), ratios.join(", ")));
    }
    let summary = format!("verdict {}, eta {:?}, w0 ({}), {:.0} ms", report.verdict, nf.eta, nf.w0.join(", "), elapsed.as_secs_f64() * 1e3);
    if failures.is_empty() {
        line(1, true, summary)
    } else {
        line(1, false, format!("{summary}; {}", failures.join("; ")))
    }
}

/// `p` commuting lower-triangular maps with rational data, as polynomials
/// `I + a(X - I) + b(X - I)²` in one triangular `X = Φ(g)`.
fn triangular_family(rng: &mut impl Rng, n: usize, p: usize) -> Vec<AffineMap<CNumber>> {
    let diag = [(1, 1), (2, 1), (1, 2), (3, 1), (2, 3)];
    'retry: loop {
        let x = Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
            (0, 0) => CNumber::one(),
            _ if r == c => {
                let (a, b) = diag[rng.gen_range(0..diag.len())];
                CNumber::real(SymScalar::ratio(a, b))
            }
            _ if r > c => real(rng, 2),
            _ => CNumber::zero(),
        });
        let y = x.sub(&Mat::identity(n + 1));
        let y2 = y.mul(&y);
        let mut maps = Vec::new();
        for _ in 0..p {
            let (a, b) = (real(rng, 3), real(rng, 2));
            let m = Mat::identity(n + 1).add(&y.scale(&a)).add(&y2.scale(&b));
            let positive = (1..=n).all(|i| m[(i, i)].re.as_rational().is_some_and(|d| d > BigRational::from_integer(0.into())));
            if !positive {
                continue 'retry;
            }
            maps.push(AffineMap::phi_inv(&m).unwrap());
        }
        return maps;
    }
}

fn c2() -> Line {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut failures = Vec::new();
    let total = 100;
    for case in 0..total {
        let n = 1 + case % 4;
        let maps = triangular_family(&mut rng, n, n);
        let problem = problem_from(n, maps);
        let report = decide_hypercyclic(&problem, &Options::default());
        let shortcut = matches!(&report, Ok(r) if r.verdict == Verdict::NotHypercyclic && r.shortcut.is_some());
        let full = decide_hypercyclic(&problem, &Options { mode: Some(Mode::Exact), ..no_shortcuts() });
        let deficit = matches!(&full, Ok(r) if r.verdict == Verdict::NotHypercyclic
            && r.density.as_ref().is_some_and(|d| d.verdict.reason.starts_with("column deficit")));
        if !(shortcut && deficit) {
            let why = match (&report, &full) {
                (Err(e), _) | (_, Err(e)) => e.to_string(),
                (Ok(a), Ok(b)) => format!("{} / {}", a.reason, b.reason),
            };
            failures.push(format!("case {case} (n = {n}): {why}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(30);
    let mut detail = format!("{}/{total} families NotHypercyclic with independent column deficit, {:.1} s", total - failures.len(), elapsed.as_secs_f64());
    if let Some(f) = failures.first() {
        detail += &format!("; first failure {f}");
    }
    line(2, pass, detail)
}

fn drop_generator(problem: &Problem, k: usize) -> Problem {
    let drop = |f: &Family| {
        let mut float = f.float.clone();
        float.remove(k);
        let exact = f.exact.clone().map(|mut v| {
            v.remove(k);
            v
        });
        Family { exact, float }
    };
    Problem {
        generators: drop(&problem.generators),
        witnesses: problem.witnesses.as_ref().map(drop),
        ..problem.clone()
    }
}

fn exact_density(report: &DecisionReport) -> Option<Outcome> {
    let d = report.density.as_ref()?;
    (d.verdict.mode == DecisionMode::Exact).then_some(d.verdict.outcome)
}

fn c3() -> Line {
    let exact = Options { mode: Some(Mode::Exact), ..Options::default() };
    let exact_full = Options { mode: Some(Mode::Exact), ..no_shortcuts() };
    let mut failures = Vec::new();
    let mut cases = 0;
    for name in ["golden.json", "generic_four.json"] {
        let problem = fixture(name);
        let four = decide_hypercyclic(&problem, &exact).unwrap();
        cases += 1;
        let nf = four.normal_form.as_ref().unwrap();
        if nf.r != 2 || four.verdict != Verdict::Hypercyclic || exact_density(&four) != Some(Outcome::Dense) {
            failures.push(format!("{name} p = 4: r = {}, {} ({})", nf.r, four.verdict, four.reason));
        }
        for k in 0..4 {
            let three = drop_generator(&problem, k);
            let short = decide_hypercyclic(&three, &exact).unwrap();
            let full = decide_hypercyclic(&three, &exact_full).unwrap();
            cases += 1;
            let ok = short.verdict == Verdict::NotHypercyclic
                && short.shortcut.as_ref().is_some_and(|s| s.bound == 3)
                && full.verdict == Verdict::NotHypercyclic
                && exact_density(&full) == Some(Outcome::NotDense);
            if !ok {
                failures.push(format!("{name} without f{}: {} / {}", k + 1, short.reason, full.reason));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{cases} exact runs: p = 4 Dense, every p = 3 subfamily NotHypercyclic (shortcut and density)")
    } else {
        failures.join("; ")
    };
    line(3, failures.is_empty(), detail)
}

fn density_entry(rng: &mut impl Rng, radical: bool) -> SymScalar {
    let two = SymScalar::sqrt_rational(&BigRational::from_integer(2.into())).unwrap();
    let three = SymScalar::sqrt_rational(&BigRational::from_integer(3.into())).unwrap();
    let mut x = rational(rng, 3);
    if radical {
        x = x.add(&two.mul(&SymScalar::int(rng.gen_range(-2..=2))));
        x = x.add(&three.mul(&SymScalar::int(rng.gen_range(-2..=2))));
    }
    x
}

/// Visit every vector in `[-h, h]^q` with sup norm exactly `h`, stopping
/// when `f` returns true.
fn shell(q: usize, h: i64, signed: bool, f: &mut impl FnMut(&[i64]) -> bool) -> bool {
    let mut s = vec![-h; q];
    loop {
        let on_shell = s.iter().any(|x| x.abs() == h);
        let canonical = !signed || s.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
        if on_shell && canonical && f(&s) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == q {
                return false;
            }
            if s[i] < h {
                s[i] += 1;
                break;
            }
            s[i] = -h;
            i += 1;
        }
    }
}

/// Brute-force search for a nonzero integer `s` with `|s_j| ≤ SWEEP` and
/// `rank [m; s] < rows + 1`. The float prefilter uses
/// `rank [m; s] = rank m + [s ∉ rowspace m]`; hits are confirmed by exact
/// minors.
fn sweep(m: &Mat<SymScalar>) -> Option<Vec<i64>> {
    let q = m.cols();
    let f = DMatrix::from_fn(m.rows(), q, |r, c| m[(r, c)].approx());
    let svd = f.svd(false, true);
    let vt = svd.v_t.unwrap();
    let top = svd.singular_values.max();
    let basis: Vec<Vec<f64>> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-10 * top.max(1.0))
        .map(|k| vt.row(k).iter().copied().collect())
        .collect();
    let deficient = basis.len() < m.rows();
    let mut found = None;
    for h in 1..=SWEEP {
        let hit = shell(q, h, true, &mut |s: &[i64]| {
            let norm: f64 = s.iter().map(|&x| (x * x) as f64).sum();
            let proj: f64 = basis.iter().map(|b| b.iter().zip(s).map(|(x, &y)| x * y as f64).sum::<f64>().powi(2)).sum();
            let in_rowspace = norm - proj <= 1e-9 * norm;
            if (deficient || in_rowspace) && witness_drops_rank(m, s) {
                found = Some(s.to_vec());
                return true;
            }
            false
        });
        if hit {
            return found;
        }
    }
    None
}

/// Whether every point of the `EPS`-spaced grid on `[-1, 1]²` lies within
/// `EPS` of some `Σ z_j x_j` with `|z_j| ≤ COVER`.
fn covers(cols: &[Complex64]) -> Result<(), String> {
    const TAIL_CAP: usize = 2_000_000;
    let g = (2.0 / EPS).round() as usize + 1;
    let mut covered = vec![false; g * g];
    let mut missing = g * g;
    let q = cols.len();
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let (i, j) = (0..q)
        .flat_map(|i| (i + 1..q).map(move |j| (i, j)))
        .max_by(|&(a, b), &(c, d)| cross(cols[a], cols[b]).abs().total_cmp(&cross(cols[c], cols[d]).abs()))
        .ok_or("fewer than two columns")?;
    let (xi, xj) = (cols[i], cols[j]);
    if cross(xi, xj).abs() < 1e-9 {
        return Err("columns are collinear".into());
    }
    let tail: Vec<usize> = (0..q).filter(|&k| k != i && k != j).collect();
    let lo = -1.0 - EPS;
    let hi = 1.0 + EPS;
    let mark = |p: Complex64, covered: &mut Vec<bool>, missing: &mut usize| {
        let ax = ((p.re + 1.0) / EPS).floor() as i64;
        let ay = ((p.im + 1.0) / EPS).floor() as i64;
        for a in ax - 1..=ax + 2 {
            for b in ay - 1..=ay + 2 {
                if a < 0 || b < 0 || a >= g as i64 || b >= g as i64 {
                    continue;
                }
                let gp = Complex64::new(-1.0 + a as f64 * EPS, -1.0 + b as f64 * EPS);
                let idx = a as usize * g + b as usize;
                if !covered[idx] && (p - gp).norm() <= EPS {
                    covered[idx] = true;
                    *missing -= 1;
                }
            }
        }
    };
    let mut tails = 0usize;
    let mut visit = |z: &[i64]| {
        tails += 1;
        let v: Complex64 = tail.iter().zip(z).map(|(&k, &c)| cols[k] * c as f64).sum();
        // u ranges over the projection of the box onto the xi direction
        // along xj.
        let det = cross(xi, xj);
        let corners = [Complex64::new(lo, lo), Complex64::new(lo, hi), Complex64::new(hi, lo), Complex64::new(hi, hi)];
        let us: Vec<f64> = corners.iter().map(|&c| cross(c - v, xj) / det).collect();
        let umin = (us.iter().copied().fold(f64::INFINITY, f64::min).ceil() as i64).max(-COVER);
        let umax = (us.iter().copied().fold(f64::NEG_INFINITY, f64::max).floor() as i64).min(COVER);
        for u in umin..=umax {
            let base = v + xi * u as f64;
            let mut wlo = -COVER as f64;
            let mut whi = COVER as f64;
            for (b, d) in [(base.re, xj.re), (base.im, xj.im)] {
                if d.abs() < 1e-15 {
                    if b < lo || b > hi {
                        whi = wlo - 1.0;
                    }
                    continue;
                }
                let (t1, t2) = ((lo - b) / d, (hi - b) / d);
                wlo = wlo.max(t1.min(t2));
                whi = whi.min(t1.max(t2));
            }
            let mut w = wlo.ceil() as i64;
            while (w as f64) <= whi {
                mark(base + xj * w as f64, &mut covered, &mut missing);
                w += 1;
            }
        }
        missing == 0 || tails >= TAIL_CAP
    };
    for h in 0..=COVER {
        if tail.is_empty() {
            visit(&[]);
            break;
        }
        if h == 0 {
            if visit(&vec![0; tail.len()]) {
                break;
            }
            continue;
        }
        if shell(tail.len(), h, false, &mut visit) {
            break;
        }
    }
    if missing == 0 {
        Ok(())
    } else {
        Err(format!("{missing} of {} grid points uncovered", g * g))
    }
}

fn c4() -> Line {
    let mut rng = rng(4);
    let total = 200;
    let (mut dense, mut not_dense) = (0, 0);
    let mut failures = Vec::new();
    let mut failed_q = Vec::new();
    for case in 0..total {
        let q = rng.gen_range(1..=5);
        let before = failures.len();
        let radical = case % 2 == 1;
        let semigroup = (0..q).map(|_| vec![CNumber::new(density_entry(&mut rng, radical), density_entry(&mut rng, radical))]).collect();
        let inst = DensityInstance { n: 1, semigroup, group: Vec::new() };
        let verdict = decide_dense_exact(&inst);
        let m = assemble_property_d(&inst);
        match verdict.outcome {
            Outcome::NotDense => {
                not_dense += 1;
                if sweep(&m).is_none() {
                    failures.push(format!("case {case}: NotDense but no integer vector with |s| <= {SWEEP}"));
                }
            }
            Outcome::Dense => {
                dense += 1;
                let cols: Vec<Complex64> = inst.semigroup.iter().map(|v| v[0].approx()).collect();
                if let Err(e) = covers(&cols) {
                    failures.push(format!("case {case} (q = {q}): Dense but {e}"));
                }
            }
            Outcome::Inconclusive => failures.push(format!("case {case}: inconclusive ({})", verdict.reason)),
        }
        if failures.len() > before {
            failed_q.push(q);
        }
    }
    let mut detail = format!("{dense} Dense, {not_dense} NotDense, {} disagreements", failures.len());
    if !failures.is_empty() {
        let by_q: BTreeMap<usize, usize> = failed_q.iter().fold(BTreeMap::new(), |mut m, &q| {
            *m.entry(q).or_default() += 1;
            m
        });
        detail += &format!(" (by q: {by_q:?}); first: {}", failures.iter().take(3).cloned().collect::<Vec<_>>().join("; "));
    }
    line(4, failures.is_empty(), detail)
}

fn entrywise_relative(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm() / y.norm().max(1.0)).fold(0.0, f64::max)
}

fn nonzero_complex(rng: &mut impl Rng) -> Complex64 {
    loop {
        let z = approx_c(rng);
        if z.norm() >= 0.3 {
            return z;
        }
    }
}

fn c5() -> Line {
    let mut rng = rng(5);
    let mut failures = Vec::new();
    for case in 0..500 {
        let m = rng.gen_range(2..=5);
        let part = partition(&mut rng, m);
        let diag: Vec<CNumber> = (0..part.r()).map(|_| CNumber::real(positive(&mut rng))).collect();
        let mat = cone_matrix(&part, &diag, || gauss(&mut rng, 3));
        let zeros = vec![0; part.r()];
        let back = log_k(&mat, &part, &zeros, 0.0).and_then(|l| exp_k(&l, &part, 0.0));
        if back.as_ref().ok() != Some(&mat) {
            failures.push(format!("exact case {case}: {back:?}"));
        }
    }
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let m = rng.gen_range(2..=5);
        let part = partition(&mut rng, m);
        let diag: Vec<Complex64> = (0..part.r()).map(|_| nonzero_complex(&mut rng)).collect();
        let mat = cone_matrix(&part, &diag, || approx_c(&mut rng));
        let zeros = vec![0; part.r()];
        match log_k(&mat, &part, &zeros, 1e-12).and_then(|l| exp_k(&l, &part, 1e-12)) {
            Ok(back) => {
                let d = entrywise_relative(&back, &mat);
                worst = worst.max(d);
                if d > EXP_LOG_TOL {
                    failures.push(format!("float case {case}: deviation {d:e}"));
                }
            }
            Err(e) => failures.push(format!("float case {case}: {e}")),
        }
    }
    let mut worst_commutator: f64 = 0.0;
    for case in 0..500 {
        let m = rng.gen_range(2..=5);
        let part = partition(&mut rng, m);
        let diag: Vec<Complex64> = (0..part.r()).map(|_| nonzero_complex(&mut rng)).collect();
        let a = cone_matrix(&part, &diag, || approx_c(&mut rng));
        let b = loop {
            let (x, y, z) = (approx_c(&mut rng), approx_c(&mut rng), approx_c(&mut rng));
            let b = a.mul(&a).scale(&x).add(&a.scale(&y)).add(&Mat::identity(m).scale(&z));
            if part.ranges().iter().all(|r| b[(r.start, r.start)].norm() >= 0.3) {
                break b;
            }
        };
        let zeros = vec![0; part.r()];
        match (log_k(&a, &part, &zeros, 1e-12), log_k(&b, &part, &zeros, 1e-12)) {
            (Ok(la), Ok(lb)) => {
                let c = la.commutator(&lb).max_magnitude() / (1.0 + la.max_magnitude() * lb.max_magnitude());
                worst_commutator = worst_commutator.max(c);
                if c > EXP_LOG_TOL {
                    failures.push(format!("pair {case}: commutator {c:e}"));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("pair {case}: {e}")),
        }
    }
    let mut detail = format!("500 exact round trips, 500 float (worst {worst:.1e}), 500 commuting pairs (worst {worst_commutator:.1e})");
    if let Some(f) = failures.first() {
        detail += &format!("; {} failures, first {f}", failures.len());
    }
    line(5, failures.is_empty(), detail)
}

fn c6() -> Line {
    let mut rng = rng(6);
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let (f, g) = (affine(&mut rng, n), affine(&mut rng, n));
        let (a, b) = (gauss(&mut rng, 3), gauss(&mut rng, 3));
        let composed = f.compose(&g).unwrap().phi() == f.phi().mul(&g.phi());
        let linear = f.scale(&a).add(&g.scale(&b)).psi() == f.psi().scale(&a).add(&g.psi().scale(&b));
        let inverse = AffineMap::phi_inv(&f.phi()).unwrap() == f && AffineMap::psi_inv(&f.psi()).unwrap() == f;
        if !(composed && linear && inverse) {
            failures += 1;
        }
    }
    line(6, failures == 0, format!("1000 rational pairs, {failures} violations of Phi(f o g) = Phi(f)Phi(g) or Psi linearity"))
}

fn c7() -> Line {
    let mut rng = rng(7);
    let mut failures = Vec::new();
    let total = 100;
    for case in 0..total {
        let n = rng.gen_range(1..=3);
        let part = partition(&mut rng, n + 1);
        let count = rng.gen_range(2..=3);
        let cone = commuting_cone_family(&mut rng, &part, count, false);
        let p = conjugator(&mut rng, n);
        let p_inv = linalg::inverse_scalar(&p).unwrap();
        let mats: Vec<Mat<CNumber>> = cone.iter().map(|k| p.mul(k).mul(&p_inv)).collect();
        let fs: Vec<AffineMap<CNumber>> = mats.iter().map(|m| AffineMap::phi_inv(m).unwrap()).collect();

        match find_normal_form_exact(&fs) {
            Ok(nf) => {
                let conj: Vec<Mat<CNumber>> = mats.iter().map(|m| nf.conjugate(m)).collect();
                if !conj.iter().all(|m| k_membership(m, &nf.partition, 0.0, true)) {
                    failures.push(format!("case {case}: exact conjugates leave the cone"));
                }
                let again: Vec<AffineMap<CNumber>> = conj.iter().map(|m| AffineMap::phi_inv(m).unwrap()).collect();
                match find_normal_form_exact(&again) {
                    Ok(nf2) if nf2.origin == NormalFormOrigin::AlreadyNormal && nf2.partition == nf.partition => {}
                    other => failures.push(format!("case {case}: exact idempotence {:?}", other.map(|x| x.partition))),
                }
            }
            Err(e) => failures.push(format!("case {case}: exact {e}")),
        }

        let approx: Vec<AffineMap<Complex64>> = fs.iter().map(AffineMap::approx).collect();
        match find_normal_form_float(&approx, EIG_TOL) {
            Ok(nf) => {
                let conj: Vec<Mat<Complex64>> = approx.iter().map(|f| nf.conjugate(&f.phi())).collect();
                if !conj.iter().all(|m| k_membership(m, &nf.partition, NF_TOL, true)) {
                    failures.push(format!("case {case}: float conjugates leave the cone"));
                }
                let again: Vec<AffineMap<Complex64>> = conj.iter().map(|m| AffineMap::phi_inv(m).unwrap()).collect();
                match find_normal_form_float(&again, EIG_TOL) {
                    Ok(nf2) if nf2.origin == NormalFormOrigin::AlreadyNormal && nf2.partition == nf.partition => {}
                    other => failures.push(format!("case {case}: float idempotence {:?}", other.map(|x| x.partition))),
                }
            }
            Err(e) => failures.push(format!("case {case}: float {e}")),
        }
    }
    let mut detail = format!("{total} conjugated families, exact and float routes, {} failures", failures.len());
    if let Some(f) = failures.first() {
        detail += &format!("; first {f}");
    }
    line(7, failures.is_empty(), detail)
}

fn c8() -> Line {
    let cfg = SimConfig { budget: 100_000, grid: 8, box_radius: 2.0, seed: 7, ..SimConfig::default() }.with_decades();
    let golden = fixture("golden.json");
    let w0 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let g = simulate(&golden.generators.float, &w0, &cfg);
    let contraction = fixture("contraction.json");
    let c = simulate(&contraction.generators.float, &[Complex64::new(1.0, 0.0)], &cfg);
    let pass = g.final_coverage() >= COVERAGE_GATE && g.is_monotone() && c.final_coverage() < CONTRACTION_GATE;
    Line {
        id: 8,
        pass,
        blocking: false,
        detail: format!(
            "golden orbit coverage {:.4} (gate {COVERAGE_GATE}), monotone {}; contraction coverage {:.4} (gate < {CONTRACTION_GATE})",
            g.final_coverage(),
            g.is_monotone(),
            c.final_coverage()
        ),
    }
}

//! End-to-end decision: commutativity, generator-count shortcuts, normal
//! form, logarithm witnesses, and the density test on `𝔮_{w₀}`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::{check_abelian, AffineMap, COMMUTE_TOL};
use crate::density::{
    self, assemble_property_d, decide_dense_exact, decide_dense_numeric, determinant_form, q_w0_generators,
    DensityVerdict, NumericOptions, Outcome,
};
use crate::error::{Error, Result};
use crate::exp_log::{log_witness, witness_deviation, WITNESS_TOL};
use crate::linalg::{self, Mat, Scalar};
use crate::normal_form::{
    find_normal_form_exact, find_normal_form_float, scan_partition, NormalForm, NormalFormOrigin, EIG_TOL,
    MEMBERSHIP_TOL,
};
use crate::problem::{Family, Mode, Problem, Shown};
use crate::scalar::CNumber;

pub const REPORT_SCHEMA: u32 = 1;
/// Relative determinant threshold for float invertibility.
pub const INVERTIBLE_TOL: f64 = 1e-12;
/// Membership tolerance for logarithms of float data.
const LOG_TOL: f64 = 1e-8;

const INTEGER_FORM: &str = "the rank condition is quantified over integer coefficient vectors; \
natural-number (semigroup) coefficients are not decided separately";

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    /// Overrides the problem's mode when set.
    pub mode: Option<Mode>,
    pub eig_tol: f64,
    pub numeric: NumericOptions,
    /// Report a numeric "no relation found" as hypercyclic.
    pub accept_heuristic: bool,
    /// Skip the generator-count shortcuts and always run the density test.
    pub skip_shortcuts: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: None, eig_tol: EIG_TOL, numeric: NumericOptions::default(), accept_heuristic: false, skip_shortcuts: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hypercyclic,
    NotHypercyclic,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Hypercyclic => 0,
            Verdict::NotHypercyclic => 1,
            Verdict::Inconclusive => 4,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Hypercyclic => "hypercyclic",
            Verdict::NotHypercyclic => "not hypercyclic",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub n: usize,
    pub generators: usize,
    pub exact_input: bool,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelianReport {
    pub commuting: bool,
    pub exact: bool,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortcutReport {
    /// `"p <= n"` before the normal form, `"p <= 2n - r + 1"` after it.
    pub rule: String,
    pub p: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub p: Vec<Vec<String>>,
    pub eta: Vec<usize>,
    pub r: usize,
    pub w0: Vec<String>,
    pub origin: NormalFormOrigin,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// 1-based generator index.
    pub generator: usize,
    pub linear: Vec<Vec<String>>,
    pub translation: Vec<String>,
    pub supplied: bool,
    pub exact: bool,
    pub branch_shifts: Vec<i64>,
    pub corner_shift: Option<i64>,
    /// Max relative deviation of `exp(Ψ(f′))` from `Φ(f)`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub semigroup: Vec<Vec<String>>,
    pub group: Vec<Vec<String>>,
    /// Real parts over imaginary parts, one column per generator.
    pub matrix: Vec<Vec<String>>,
    /// Coefficients of `det([M; s])` in `s`, when `M` has `2n + 1` columns.
    pub determinant_form: Option<Vec<String>>,
    pub verdict: DensityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub schema: u32,
    pub input: InputSummary,
    pub abelian: AbelianReport,
    pub shortcut: Option<ShortcutReport>,
    pub normal_form: Option<NormalFormReport>,
    pub witnesses: Vec<WitnessReport>,
    pub density: Option<DensityReport>,
    pub verdict: Verdict,
    pub reason: String,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl DecisionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Entry formatting shared by exact and float data.
pub trait Show {
    fn show(&self) -> String;
}

impl Show for CNumber {
    fn show(&self) -> String {
        self.to_string()
    }
}

impl Show for Complex64 {
    fn show(&self) -> String {
        Shown(self).to_string()
    }
}

fn show_vec<S: Show>(v: &[S]) -> Vec<String> {
    v.iter().map(Show::show).collect()
}

fn show_mat<S: Show + Clone>(m: &Mat<S>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| show_vec(r)).collect()
}

fn nf_report<S: Scalar + Show>(nf: &NormalForm<S>, exact: bool) -> NormalFormReport {
    NormalFormReport {
        p: show_mat(&nf.p),
        eta: nf.partition.sizes().to_vec(),
        r: nf.partition.r(),
        w0: show_vec(&nf.w0),
        origin: nf.origin,
        exact,
    }
}

fn witness_report<S: Scalar + Show>(k: usize, f: &AffineMap<S>, supplied: bool, shifts: (Vec<i64>, Option<i64>), dev: f64) -> WitnessReport {
    WitnessReport {
        generator: k + 1,
        linear: show_mat(&f.linear),
        translation: show_vec(&f.translation),
        supplied,
        exact: S::EXACT,
        branch_shifts: shifts.0,
        corner_shift: shifts.1,
        deviation: dev,
    }
}

/// Generator-count rule: `p ≤ n` when `r` is unknown, else `p ≤ 2n − r + 1`.
pub fn shortcut_generator_count(p: usize, n: usize, r: Option<usize>) -> Option<ShortcutReport> {
    let (rule, bound) = match r {
        None => ("p <= n", n),
        Some(r) => ("p <= 2n - r + 1", (2 * n + 1).saturating_sub(r)),
    };
    (p <= bound).then(|| ShortcutReport { rule: rule.into(), p, bound })
}

struct Clock(BTreeMap<String, f64>, Instant);

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0.insert(stage.to_string(), (now - self.1).as_secs_f64() * 1e3);
        self.1 = now;
    }
}

/// The normal form in the exact and float views; `exact` is absent when only
/// a float conjugator is known.
pub struct Forms {
    pub exact: Option<NormalForm<CNumber>>,
    pub float: NormalForm<Complex64>,
}

impl Forms {
    pub fn report(&self) -> NormalFormReport {
        match &self.exact {
            Some(nf) => nf_report(nf, true),
            None => nf_report(&self.float, false),
        }
    }
}

/// Normal form of the problem's generators; `notes` collects fallbacks.
pub fn normal_form(problem: &Problem, want_exact: bool, eig_tol: f64, notes: &mut Vec<String>) -> Result<Forms> {
    let gens = &problem.generators;
    let exact_mats: Option<Vec<Mat<CNumber>>> = gens.exact.as_ref().map(|fs| fs.iter().map(AffineMap::phi).collect());
    let float_mats: Vec<Mat<Complex64>> = gens.float.iter().map(AffineMap::phi).collect();
    if let Some(s) = &problem.normal_form {
        if let (true, Some(p)) = (want_exact, &s.p_exact) {
            let p_inv = linalg::inverse_scalar(p).ok_or_else(|| Error::Shape("supplied P is not invertible".into()))?;
            let nf = NormalForm::new(p.clone(), p_inv, s.partition.clone(), NormalFormOrigin::Supplied)?;
            match &exact_mats {
                Some(m) => nf.verify(m, 0.0)?,
                None => nf.approx().verify(&float_mats, MEMBERSHIP_TOL)?,
            }
            let float = nf.approx();
            return Ok(Forms { exact: Some(nf), float });
        }
        let nf = NormalForm::supplied(s.p_float.clone(), s.partition.clone(), &float_mats, MEMBERSHIP_TOL)?;
        return Ok(Forms { exact: None, float: nf });
    }
    let scanned = match &exact_mats {
        Some(m) => scan_partition(m, 0.0),
        None => scan_partition(&float_mats, MEMBERSHIP_TOL),
    };
    if let Some(partition) = scanned {
        if exact_mats.is_none() {
            notes.push(format!("block structure of the float generators detected at tolerance {MEMBERSHIP_TOL:e}"));
        }
        let nf = NormalForm::identity(partition, NormalFormOrigin::AlreadyNormal);
        let float = nf.approx();
        return Ok(Forms { exact: Some(nf), float });
    }
    if let (true, Some(fs)) = (want_exact, &gens.exact) {
        match find_normal_form_exact(fs) {
            Ok(nf) => {
                let float = nf.approx();
                return Ok(Forms { exact: Some(nf), float });
            }
            Err(Error::NotRepresentable(why)) => {
                notes.push(format!("exact normal form unavailable ({why}); computed in floating point"));
            }
            Err(e) => return Err(e),
        }
    }
    let float = find_normal_form_float(&gens.float, eig_tol)?;
    Ok(Forms { exact: None, float })
}

pub struct Witnesses {
    pub exact: Option<Vec<AffineMap<CNumber>>>,
    pub float: Vec<AffineMap<Complex64>>,
    pub reports: Vec<WitnessReport>,
}

fn check_witness(k: usize, f: &AffineMap<Complex64>, fprime: &AffineMap<Complex64>) -> Result<f64> {
    let dev = witness_deviation(f, fprime);
    if dev.is_finite() && dev <= WITNESS_TOL {
        Ok(dev)
    } else {
        Err(Error::WitnessMismatch { index: k + 1, deviation: dev })
    }
}

/// Verify supplied witnesses against the generators.
pub fn verify_witnesses(gens: &Family, witnesses: &Family) -> Result<Vec<f64>> {
    gens.float.iter().zip(&witnesses.float).enumerate().map(|(k, (f, w))| check_witness(k, f, w)).collect()
}

/// Supplied witnesses after verification, or computed logarithms.
pub fn witnesses(problem: &Problem, forms: &Forms, want_exact: bool, notes: &mut Vec<String>) -> Result<Witnesses> {
    let gens = &problem.generators;
    if let Some(w) = &problem.witnesses {
        let devs = verify_witnesses(gens, w)?;
        let exact = w.exact.clone().filter(|_| want_exact);
        let reports = devs
            .iter()
            .enumerate()
            .map(|(k, &d)| match &exact {
                Some(e) => witness_report(k, &e[k], true, (Vec::new(), None), d),
                None => witness_report(k, &w.float[k], true, (Vec::new(), None), d),
            })
            .collect();
        return Ok(Witnesses { exact, float: w.float.clone(), reports });
    }
    let r = forms.float.partition.r();
    let branches = |k: usize| problem.branches.as_ref().map_or_else(|| vec![0; r], |b| b[k].clone());
    let mut exact = match (&forms.exact, &gens.exact) {
        (Some(_), Some(_)) if want_exact => Some(Vec::with_capacity(gens.len())),
        _ => None,
    };
    let mut float = Vec::with_capacity(gens.len());
    let mut reports = Vec::with_capacity(gens.len());
    for k in 0..gens.len() {
        let b = branches(k);
        if b.len() != r {
            return Err(Error::DimensionMismatch { expected: r, found: b.len() });
        }
        if let (Some(list), Some(nf), Some(fs)) = (exact.as_mut(), &forms.exact, &gens.exact) {
            match log_witness(&fs[k], nf, &b, 0.0) {
                Ok(w) => {
                    let fa = w.fprime.approx();
                    let dev = check_witness(k, &gens.float[k], &fa)?;
                    reports.push(witness_report(k, &w.fprime, false, (w.branch_shifts, Some(w.corner_shift)), dev));
                    list.push(w.fprime);
                    float.push(fa);
                    continue;
                }
                Err(Error::NotRepresentable(why)) => {
                    notes.push(format!("exact logarithm of generator {} unavailable ({why}); using floating point", k + 1));
                    exact = None;
                    // earlier witnesses keep their exact reports but the family is float from here on
                }
                Err(e) => return Err(e),
            }
        }
        let w = log_witness(&gens.float[k], &forms.float, &b, LOG_TOL)?;
        let dev = check_witness(k, &gens.float[k], &w.fprime)?;
        reports.push(witness_report(k, &w.fprime, false, (w.branch_shifts, Some(w.corner_shift)), dev));
        float.push(w.fprime);
    }
    Ok(Witnesses { exact, float, reports })
}

fn density_report<S: Scalar + Show>(inst: &density::DensityInstance<S>, matrix: Vec<Vec<String>>, form: Option<Vec<String>>, verdict: DensityVerdict) -> DensityReport {
    DensityReport {
        semigroup: inst.semigroup.iter().map(|v| show_vec(v)).collect(),
        group: inst.group.iter().map(|v| show_vec(v)).collect(),
        matrix,
        determinant_form: form,
        verdict,
    }
}

/// Run the full decision.
pub fn decide_hypercyclic(problem: &Problem, opts: &Options) -> Result<DecisionReport> {
    let mut clock = Clock(BTreeMap::new(), Instant::now());
    let mode = opts.mode.unwrap_or(problem.mode);
    let want_exact = mode != Mode::Numeric;
    let gens = &problem.generators;
    let n = problem.n;
    let p = gens.len();
    let mut notes = Vec::new();
    let mut assumptions = vec![INTEGER_FORM.to_string()];

    let exact_gens = gens.exact.as_ref().filter(|_| want_exact);
    let abelian = match exact_gens {
        Some(fs) => check_abelian(fs, 0.0),
        None => check_abelian(&gens.float, COMMUTE_TOL),
    };
    if let Err((i, j)) = abelian {
        return Err(Error::NotAbelian(i + 1, j + 1));
    }
    let abelian = AbelianReport { commuting: true, exact: exact_gens.is_some(), tolerance: exact_gens.is_none().then_some(COMMUTE_TOL) };
    for k in 0..p {
        let ok = match exact_gens {
            Some(fs) => fs[k].is_invertible(0.0),
            None => gens.float[k].is_invertible(INVERTIBLE_TOL),
        };
        if !ok {
            return Err(Error::NotInvertible(k + 1));
        }
    }
    clock.lap("validate");

    let input = InputSummary { n, generators: p, exact_input: gens.exact.is_some(), mode };
    let mut report = DecisionReport {
        schema: REPORT_SCHEMA,
        input,
        abelian,
        shortcut: None,
        normal_form: None,
        witnesses: Vec::new(),
        density: None,
        verdict: Verdict::Inconclusive,
        reason: String::new(),
        assumptions: Vec::new(),
        notes: Vec::new(),
        timings_ms: BTreeMap::new(),
    };
    let finish = |mut report: DecisionReport, notes: Vec<String>, assumptions: Vec<String>, clock: Clock| {
        report.notes = notes;
        report.assumptions = assumptions;
        report.timings_ms = clock.0;
        Ok(report)
    };

    if !opts.skip_shortcuts {
        if let Some(s) = shortcut_generator_count(p, n, None) {
            report.reason = format!("p = {p} generators on a space of complex dimension n = {n} cannot have a dense orbit (p <= n)");
            report.shortcut = Some(s);
            report.verdict = Verdict::NotHypercyclic;
            return finish(report, notes, assumptions, clock);
        }
    }

    let forms = normal_form(problem, want_exact, opts.eig_tol, &mut notes)?;
    report.normal_form = Some(forms.report());
    clock.lap("normal_form");
    let r = forms.float.partition.r();
    if !opts.skip_shortcuts {
        if let Some(s) = shortcut_generator_count(p, n, Some(r)) {
            report.reason = format!("p = {p} generators with r = {r} blocks cannot have a dense orbit (p <= 2n - r + 1 = {})", s.bound);
            report.shortcut = Some(s);
            report.verdict = Verdict::NotHypercyclic;
            return finish(report, notes, assumptions, clock);
        }
    }

    let w = witnesses(problem, &forms, want_exact, &mut notes)?;
    report.witnesses = w.reports;
    clock.lap("witnesses");

    let mut verdict = None;
    if let (Some(fprimes), Some(nf)) = (&w.exact, &forms.exact) {
        let inst = q_w0_generators(fprimes, nf)?;
        let m = assemble_property_d(&inst);
        let mut v = decide_dense_exact(&inst);
        if v.outcome == Outcome::Dense && !problem.independent && problem.registry.transcendentals().len() > 1 {
            v.outcome = Outcome::Inconclusive;
            v.reason = format!("{}; but the declared symbols are not asserted independent", v.reason);
        }
        let form = (m.cols() == m.rows() + 1).then(|| determinant_form(&m)).flatten().map(|f| f.iter().map(|c| c.to_string()).collect());
        let matrix = m.to_rows().iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
        let usable = v.outcome != Outcome::Inconclusive || mode == Mode::Exact;
        if !usable {
            notes.push(format!("exact density test inconclusive ({}); falling back to lattice search", v.reason));
        }
        report.density = Some(density_report(&inst, matrix, form, v.clone()));
        if usable {
            verdict = Some(v);
        }
    } else if mode == Mode::Exact {
        let v = DensityVerdict {
            outcome: Outcome::Inconclusive,
            mode: density::DecisionMode::Exact,
            witness: None,
            reason: "exact data for the density test is unavailable".into(),
            certificate: None,
            assumptions: Vec::new(),
        };
        verdict = Some(v);
    }
    let verdict = match verdict {
        Some(v) => v,
        None => {
            let inst = q_w0_generators(&w.float, &forms.float)?;
            let m = assemble_property_d(&inst);
            let mut v = decide_dense_numeric(&inst, &opts.numeric);
            if v.outcome == Outcome::Dense && !opts.accept_heuristic {
                v.outcome = Outcome::Inconclusive;
                v.reason = format!("{} (heuristic; pass --accept-heuristic to accept)", v.reason);
            }
            let matrix = m.to_rows().iter().map(|r| r.iter().map(|c| format!("{c:e}")).collect()).collect();
            report.density = Some(density_report(&inst, matrix, None, v.clone()));
            v
        }
    };
    clock.lap("density");
    assumptions.extend(verdict.assumptions.iter().cloned());
    report.verdict = match verdict.outcome {
        Outcome::Dense => Verdict::Hypercyclic,
        Outcome::NotDense => Verdict::NotHypercyclic,
        Outcome::Inconclusive => Verdict::Inconclusive,
    };
    report.reason = match verdict.outcome {
        Outcome::Dense => format!("property D holds: {}", verdict.reason),
        Outcome::NotDense => format!("property D fails: {}", verdict.reason),
        Outcome::Inconclusive => verdict.reason.clone(),
    };
    if let Some(d) = report.density.as_mut() {
        d.verdict = verdict;
    }
    finish(report, notes, assumptions, clock)
}

impl fmt::Display for DecisionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "reason: {}", self.reason)?;
        writeln!(f, "n = {}, generators = {}, mode = {:?}", self.input.n, self.input.generators, self.input.mode)?;
        if let Some(s) = &self.shortcut {
            writeln!(f, "shortcut: {} (p = {}, bound = {})", s.rule, s.p, s.bound)?;
        }
        if let Some(nf) = &self.normal_form {
            writeln!(f, "normal form ({:?}{}):", nf.origin, if nf.exact { ", exact" } else { ", float" })?;
            writeln!(f, "  eta = {:?}, r = {}", nf.eta, nf.r)?;
            for row in &nf.p {
                writeln!(f, "  P | {}", row.join(", "))?;
            }
            writeln!(f, "  w0 = ({})", nf.w0.join(", "))?;
        }
        for w in &self.witnesses {
            writeln!(
                f,
                "witness f'_{}: B = {:?}, b = ({}), deviation {:.1e}{}",
                w.generator,
                w.linear,
                w.translation.join(", "),
                w.deviation,
                if w.supplied { ", supplied" } else { "" }
            )?;
        }
        if let Some(d) = &self.density {
            writeln!(f, "density ({:?}): {:?}", d.verdict.mode, d.verdict.outcome)?;
            for row in &d.matrix {
                writeln!(f, "  M | {}", row.join(", "))?;
            }
            if let Some(form) = &d.determinant_form {
                writeln!(f, "  det([M; s]) coefficients: {}", form.join(", "))?;
            }
            if let Some(w) = &d.verdict.witness {
                writeln!(f, "  integer witness: {w:?}")?;
            }
        }
        for a in &self.assumptions {
            writeln!(f, "assumption: {a}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

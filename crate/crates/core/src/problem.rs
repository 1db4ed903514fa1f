//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 1,
//!   "symbols": [{"name": "e", "kind": "transcendental", "approx": 2.718281828459045}],
//!   "generators": [
//!     {"linear": [["1"]], "translation": [{"re": "1", "im": "sqrt(2)"}]},
//!     {"linear": [[{"exp": {"re": "-1", "im": "1/2"}}]], "translation": ["0"]}
//!   ]
//! }
//! ```
//!
//! An entry is a scalar literal string (real), a JSON number, an object
//! `{"re": .., "im": ..}`, or `{"exp": {"re": .., "im": ..}}` for `e^z`.
//! JSON numbers with an integral value are exact; other numbers, and
//! exponentials that leave the scalar tower, are float only.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::linalg::{Mat, Scalar};
use crate::normal_form::Partition;
use crate::scalar::{parse_scalar, CNumber, ParseScalarError, SymScalar, SymbolDecl, SymbolRegistry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealSpec {
    Literal(String),
    Float(f64),
}

impl Default for RealSpec {
    fn default() -> Self {
        RealSpec::Literal("0".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    #[serde(default)]
    pub re: RealSpec,
    #[serde(default)]
    pub im: RealSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSpec {
    pub exp: ComplexSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    Real(RealSpec),
    Exp(ExpSpec),
    Complex(ComplexSpec),
}

impl From<&str> for EntrySpec {
    fn from(s: &str) -> Self {
        EntrySpec::Real(RealSpec::Literal(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub linear: Vec<Vec<EntrySpec>>,
    pub translation: Vec<EntrySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormSpec {
    pub p: Vec<Vec<EntrySpec>>,
    pub eta: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Numeric,
    #[default]
    Auto,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "numeric" => Ok(Mode::Numeric),
            "auto" => Ok(Mode::Auto),
            other => Err(format!("unknown mode {other:?}; expected exact, numeric or auto")),
        }
    }
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_auto(m: &Mode) -> bool {
    *m == Mode::Auto
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<SymbolDecl>,
    /// Whether the declared transcendental symbols may be treated as
    /// algebraically independent over the radicals.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub independent: bool,
    #[serde(default, skip_serializing_if = "is_auto")]
    pub mode: Mode,
    pub generators: Vec<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<MapSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormSpec>,
    /// Logarithm branch per generator and block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{location}: {source}")]
    Scalar { location: String, source: ParseScalarError },
    #[error("{0}")]
    Shape(String),
}

impl From<serde_json::Error> for ProblemError {
    fn from(e: serde_json::Error) -> Self {
        ProblemError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

/// A matrix or map entry with an exact value when one is available.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub exact: Option<CNumber>,
    pub approx: Complex64,
}

impl Entry {
    fn exact(c: CNumber) -> Self {
        let approx = c.approx();
        Entry { exact: Some(c), approx }
    }
}

fn real_entry(spec: &RealSpec, reg: &SymbolRegistry, loc: &str) -> Result<(Option<SymScalar>, f64), ProblemError> {
    match spec {
        RealSpec::Literal(s) => {
            let v = parse_scalar(s, reg).map_err(|source| ProblemError::Scalar { location: loc.to_string(), source })?;
            let a = v.approx();
            Ok((Some(v), a))
        }
        RealSpec::Float(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => Ok((Some(SymScalar::int(*x as i64)), *x)),
        RealSpec::Float(x) => Ok((None, *x)),
    }
}

fn complex_entry(spec: &ComplexSpec, reg: &SymbolRegistry, loc: &str) -> Result<Entry, ProblemError> {
    let (re, ra) = real_entry(&spec.re, reg, &format!("{loc}.re"))?;
    let (im, ia) = real_entry(&spec.im, reg, &format!("{loc}.im"))?;
    Ok(match (re, im) {
        (Some(re), Some(im)) => Entry::exact(CNumber::new(re, im)),
        _ => Entry { exact: None, approx: Complex64::new(ra, ia) },
    })
}

pub fn parse_entry(spec: &EntrySpec, reg: &SymbolRegistry, loc: &str) -> Result<Entry, ProblemError> {
    match spec {
        EntrySpec::Real(r) => {
            let (v, a) = real_entry(r, reg, loc)?;
            Ok(match v {
                Some(v) => Entry::exact(CNumber::real(v)),
                None => Entry { exact: None, approx: Complex64::new(a, 0.0) },
            })
        }
        EntrySpec::Complex(c) => complex_entry(c, reg, loc),
        EntrySpec::Exp(e) => {
            let z = complex_entry(&e.exp, reg, &format!("{loc}.exp"))?;
            let exact = z.exact.as_ref().and_then(|c| c.exp_scalar());
            Ok(Entry { exact, approx: z.approx.exp() })
        }
    }
}

/// Parallel exact and float views of the same list of maps; `exact` is set
/// only when every entry of every map is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub exact: Option<Vec<AffineMap<CNumber>>>,
    pub float: Vec<AffineMap<Complex64>>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.float.len()
    }

    pub fn is_empty(&self) -> bool {
        self.float.is_empty()
    }

    pub fn from_exact(maps: Vec<AffineMap<CNumber>>) -> Self {
        let float = maps.iter().map(AffineMap::approx).collect();
        Family { exact: Some(maps), float }
    }

    pub fn from_float(maps: Vec<AffineMap<Complex64>>) -> Self {
        Family { exact: None, float: maps }
    }
}

fn parse_matrix(rows: &[Vec<EntrySpec>], n: usize, reg: &SymbolRegistry, loc: &str) -> Result<Vec<Vec<Entry>>, ProblemError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ProblemError::Shape(format!("{loc}: expected a {n}×{n} matrix")));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, e)| parse_entry(e, reg, &format!("{loc}[{i}][{j}]"))).collect())
        .collect()
}

fn split(entries: &[Vec<Entry>]) -> (Option<Mat<CNumber>>, Mat<Complex64>) {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    let float = Mat::from_fn(rows, cols, |r, c| entries[r][c].approx);
    let exact: Option<Vec<Vec<CNumber>>> = entries.iter().map(|row| row.iter().map(|e| e.exact.clone()).collect()).collect();
    (exact.map(Mat::from_rows), float)
}

fn parse_map(spec: &MapSpec, n: usize, reg: &SymbolRegistry, loc: &str) -> Result<(Option<AffineMap<CNumber>>, AffineMap<Complex64>), ProblemError> {
    let lin = parse_matrix(&spec.linear, n, reg, &format!("{loc}.linear"))?;
    if spec.translation.len() != n {
        return Err(ProblemError::Shape(format!("{loc}.translation: expected {n} entries")));
    }
    let tr: Vec<Entry> = spec
        .translation
        .iter()
        .enumerate()
        .map(|(i, e)| parse_entry(e, reg, &format!("{loc}.translation[{i}]")))
        .collect::<Result<_, _>>()?;
    let (lin_exact, lin_float) = split(&lin);
    let tr_exact: Option<Vec<CNumber>> = tr.iter().map(|e| e.exact.clone()).collect();
    let float = AffineMap::new(lin_float, tr.iter().map(|e| e.approx).collect()).map_err(|e| ProblemError::Shape(e.to_string()))?;
    let exact = match (lin_exact, tr_exact) {
        (Some(a), Some(b)) => Some(AffineMap::new(a, b).map_err(|e| ProblemError::Shape(e.to_string()))?),
        _ => None,
    };
    Ok((exact, float))
}

fn parse_family(specs: &[MapSpec], n: usize, reg: &SymbolRegistry, what: &str) -> Result<Family, ProblemError> {
    let mut exact = Some(Vec::new());
    let mut float = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let (e, f) = parse_map(spec, n, reg, &format!("{what}[{k}]"))?;
        exact = exact.zip(e).map(|(mut v, e)| {
            v.push(e);
            v
        });
        float.push(f);
    }
    Ok(Family { exact, float })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuppliedNormalForm {
    pub p_exact: Option<Mat<CNumber>>,
    pub p_float: Mat<Complex64>,
    pub partition: Partition,
}

/// A parsed problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub n: usize,
    pub registry: SymbolRegistry,
    pub independent: bool,
    pub mode: Mode,
    pub generators: Family,
    pub witnesses: Option<Family>,
    pub normal_form: Option<SuppliedNormalForm>,
    pub branches: Option<Vec<Vec<i64>>>,
}

impl ProblemFile {
    pub fn from_json(src: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn parse(&self) -> Result<Problem, ProblemError> {
        let registry = SymbolRegistry::from_decls(&self.symbols)
            .map_err(|source| ProblemError::Scalar { location: "symbols".into(), source })?;
        if self.n == 0 {
            return Err(ProblemError::Shape("n must be positive".into()));
        }
        if self.generators.is_empty() {
            return Err(ProblemError::Shape("at least one generator is required".into()));
        }
        let generators = parse_family(&self.generators, self.n, &registry, "generators")?;
        let witnesses = match &self.witnesses {
            Some(w) if w.len() != self.generators.len() => {
                return Err(ProblemError::Shape(format!("{} witnesses for {} generators", w.len(), self.generators.len())))
            }
            Some(w) => Some(parse_family(w, self.n, &registry, "witnesses")?),
            None => None,
        };
        let normal_form = match &self.normal_form {
            Some(nf) => {
                let p = parse_matrix(&nf.p, self.n + 1, &registry, "normal_form.p")?;
                let (p_exact, p_float) = split(&p);
                let partition = Partition::new(nf.eta.clone()).map_err(|e| ProblemError::Shape(e.to_string()))?;
                if partition.total() != self.n + 1 {
                    return Err(ProblemError::Shape(format!("normal_form.eta must sum to {}", self.n + 1)));
                }
                Some(SuppliedNormalForm { p_exact, p_float, partition })
            }
            None => None,
        };
        if let Some(b) = &self.branches {
            if b.len() != self.generators.len() {
                return Err(ProblemError::Shape(format!("{} branch lists for {} generators", b.len(), self.generators.len())));
            }
        }
        Ok(Problem {
            n: self.n,
            registry,
            independent: self.independent,
            mode: self.mode,
            generators,
            witnesses,
            normal_form,
            branches: self.branches.clone(),
        })
    }
}

impl Problem {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        ProblemFile::load(path)?.parse()
    }
}

/// Spec for an exact value, written as a literal string or `{re, im}`.
pub fn entry_spec(c: &CNumber) -> EntrySpec {
    if c.im.is_zero() {
        EntrySpec::Real(RealSpec::Literal(c.re.to_string()))
    } else {
        EntrySpec::Complex(ComplexSpec { re: RealSpec::Literal(c.re.to_string()), im: RealSpec::Literal(c.im.to_string()) })
    }
}

pub fn map_spec(f: &AffineMap<CNumber>) -> MapSpec {
    MapSpec {
        linear: f.linear.to_rows().iter().map(|r| r.iter().map(entry_spec).collect()).collect(),
        translation: f.translation.iter().map(entry_spec).collect(),
    }
}

/// Display form of an entry for reports.
pub struct Shown<'a, S>(pub &'a S);

impl fmt::Display for Shown<'_, Complex64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.0;
        if z.im == 0.0 {
            write!(f, "{}", z.re)
        } else if z.re == 0.0 {
            write!(f, "{}i", z.im)
        } else {
            write!(f, "{}{:+}i", z.re, z.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "n": 1,
        "symbols": [{"name": "e", "kind": "transcendental", "approx": 2.718281828459045}],
        "generators": [
            {"linear": [["1"]], "translation": [{"re": "1", "im": "sqrt(2)"}]},
            {"linear": [[{"exp": {"re": "-1", "im": "1/2"}}]], "translation": [0]},
            {"linear": [[0.5]], "translation": ["e^2 - 1/3"]}
        ]
    }"#;

    #[test]
    fn entries_parse_with_exactness() {
        let file = ProblemFile::from_json(SAMPLE).unwrap();
        let p = file.parse().unwrap();
        assert!(p.generators.exact.is_none());
        assert_eq!(p.generators.float[0].translation[0], Complex64::new(1.0, 2f64.sqrt()));
        let z = p.generators.float[1].linear[(0, 0)];
        assert!((z - Complex64::new(-1.0, 0.5).exp()).norm() < 1e-15);
        assert!((p.generators.float[2].translation[0].re - (std::f64::consts::E.powi(2) - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let file = ProblemFile::from_json(SAMPLE).unwrap();
        let again = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file, again);
    }

    #[test]
    fn errors_locate_the_entry() {
        let bad = SAMPLE.replace("sqrt(2)", "sqrt(2");
        match ProblemFile::from_json(&bad).unwrap().parse() {
            Err(ProblemError::Scalar { location, source }) => {
                assert_eq!(location, "generators[0].translation[0].im");
                assert!(source.column > 0);
            }
            other => panic!("{other:?}"),
        }
        match ProblemFile::from_json("{\n  \"n\": 1,\n  \"generators\": [}") {
            Err(ProblemError::Json { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_exponential() {
        let reg = SymbolRegistry::new();
        let e = parse_entry(&EntrySpec::Exp(ExpSpec { exp: ComplexSpec { re: RealSpec::Literal("log(3)".into()), im: RealSpec::Literal("pi".into()) } }), &reg, "x").unwrap();
        assert_eq!(e.exact, Some(CNumber::int(-3, 0)));
    }
}

use std::path::PathBuf;

use hypercyclic::density::{DecisionMode, Outcome};
use hypercyclic::pipeline::{decide_hypercyclic, normal_form, verify_witnesses, witnesses, Options, Verdict};
use hypercyclic::problem::{Mode, Problem, ProblemFile};
use hypercyclic::Error;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixture(name: &str) -> Problem {
    Problem::load(path(name)).unwrap()
}

fn no_shortcuts() -> Options {
    Options { skip_shortcuts: true, ..Options::default() }
}

#[test]
fn golden_example() {
    let r = decide_hypercyclic(&fixture("golden.json"), &Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Hypercyclic);
    let nf = r.normal_form.as_ref().unwrap();
    assert_eq!((nf.eta.as_slice(), nf.r), (&[2, 1][..], 2));
    assert_eq!(nf.w0, ["0", "1"]);
    let d = r.density.as_ref().unwrap();
    assert_eq!((d.verdict.mode, d.verdict.outcome), (DecisionMode::Exact, Outcome::Dense));
    assert_eq!(d.determinant_form.as_ref().unwrap().len(), 5);
    assert_eq!(r.witnesses.len(), 4);
    assert!(r.witnesses.iter().all(|w| w.supplied && w.deviation < 1e-9));
}

#[test]
fn expected_verdicts() {
    let cases = [
        ("golden.json", Verdict::Hypercyclic),
        ("generic_four.json", Verdict::Hypercyclic),
        ("three_generators.json", Verdict::NotHypercyclic),
        ("contraction.json", Verdict::NotHypercyclic),
        ("translations_rational.json", Verdict::NotHypercyclic),
        ("translations_radical.json", Verdict::Hypercyclic),
        ("conjugated.json", Verdict::NotHypercyclic),
    ];
    for (name, want) in cases {
        let r = decide_hypercyclic(&fixture(name), &Options::default()).unwrap();
        assert_eq!(r.verdict, want, "{name}: {}", r.reason);
    }
}

#[test]
fn missing_witnesses_fall_back_to_lattice_search() {
    let problem = fixture("golden_no_witness.json");
    let r = decide_hypercyclic(&problem, &Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive, "{}", r.reason);
    assert_eq!(r.density.as_ref().unwrap().verdict.mode, DecisionMode::Numeric);
    let r = decide_hypercyclic(&problem, &Options { accept_heuristic: true, ..Options::default() }).unwrap();
    assert_eq!(r.verdict, Verdict::Hypercyclic, "{}", r.reason);
    let r = decide_hypercyclic(&problem, &Options { mode: Some(Mode::Exact), ..Options::default() }).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn numeric_mode_on_golden_example() {
    let opts = Options { mode: Some(Mode::Numeric), accept_heuristic: true, ..Options::default() };
    let r = decide_hypercyclic(&fixture("golden.json"), &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Hypercyclic, "{}", r.reason);
    assert_eq!(r.density.as_ref().unwrap().verdict.mode, DecisionMode::Numeric);
}

#[test]
fn shortcuts_agree_with_the_density_test() {
    for name in ["three_generators.json", "contraction.json", "conjugated.json"] {
        let problem = fixture(name);
        let short = decide_hypercyclic(&problem, &Options::default()).unwrap();
        assert!(short.shortcut.is_some(), "{name}");
        let full = decide_hypercyclic(&problem, &no_shortcuts()).unwrap();
        assert_eq!(full.verdict, Verdict::NotHypercyclic, "{name}: {}", full.reason);
        let d = full.density.unwrap();
        assert!(d.verdict.reason.starts_with("column deficit"), "{name}: {}", d.verdict.reason);
    }
}

#[test]
fn conjugated_family_gets_computed_witnesses() {
    let problem = fixture("conjugated.json");
    let mut notes = Vec::new();
    let forms = normal_form(&problem, true, hypercyclic::normal_form::EIG_TOL, &mut notes).unwrap();
    let nf = forms.exact.as_ref().unwrap();
    assert_eq!(nf.partition.sizes(), &[1, 1, 1]);
    let w = witnesses(&problem, &forms, true, &mut notes).unwrap();
    assert!(w.reports.iter().all(|r| !r.supplied && r.deviation < 1e-9));
    let fam = hypercyclic::problem::Family::from_exact(w.exact.unwrap());
    let dev = verify_witnesses(&problem.generators, &fam).unwrap();
    assert!(dev.iter().all(|&d| d < 1e-9), "{dev:?}");
}

#[test]
fn invalid_inputs() {
    assert!(matches!(
        decide_hypercyclic(&fixture("invalid/non_commuting.json"), &Options::default()),
        Err(Error::NotAbelian(1, 2))
    ));
    assert!(matches!(
        decide_hypercyclic(&fixture("invalid/bad_witness.json"), &Options::default()),
        Err(Error::WitnessMismatch { index: 3, .. })
    ));
    let singular = r#"{"n": 1, "generators": [{"linear": [["0"]], "translation": ["0"]}, {"linear": [["2"]], "translation": ["0"]}]}"#;
    let problem = ProblemFile::from_json(singular).unwrap().parse().unwrap();
    assert!(matches!(decide_hypercyclic(&problem, &Options::default()), Err(Error::NotInvertible(1))));
}

#[test]
fn problem_files_round_trip() {
    for entry in std::fs::read_dir(path("")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let file = ProblemFile::load(&p).unwrap();
            let again = ProblemFile::from_json(&file.to_json()).unwrap();
            assert_eq!(file, again, "{}", p.display());
            assert_eq!(file.parse().unwrap().generators.float, again.parse().unwrap().generators.float);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let problem = fixture("golden.json");
    let run = || {
        let mut r = decide_hypercyclic(&problem, &Options::default()).unwrap();
        r.timings_ms.clear();
        r.to_json()
    };
    let first = run();
    assert_eq!(first, run());
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    for key in ["schema", "input", "abelian", "normal_form", "witnesses", "density", "verdict", "reason", "assumptions"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "hypercyclic");
}

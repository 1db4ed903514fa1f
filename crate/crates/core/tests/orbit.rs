use hypercyclic::orbit::{sample_orbit, simulate, SimConfig};
use hypercyclic::problem::Problem;
use num_complex::Complex64;

fn generators(name: &str) -> Vec<hypercyclic::affine::AffineMap<Complex64>> {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    Problem::load(path).unwrap().generators.float
}

fn w0() -> [Complex64; 2] {
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
}

#[test]
fn fixed_seed_is_reproducible() {
    let fs = generators("golden.json");
    let cfg = SimConfig { budget: 5_000, seed: 7, ..SimConfig::default() }.with_decades();
    let a = simulate(&fs, &w0(), &cfg);
    let b = simulate(&fs, &w0(), &cfg);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.is_monotone());
    assert_eq!(a.checkpoints.last().unwrap().budget, 5_000);
}

#[test]
fn every_point_is_its_parent_moved_by_one_generator() {
    let fs = generators("golden.json");
    let cfg = SimConfig { budget: 2_000, seed: 3, ..SimConfig::default() };
    let sample = sample_orbit(&fs, &w0(), &cfg);
    assert_eq!(sample.points[0].depth, 0);
    for p in &sample.points[1..] {
        let (parent, g) = p.parent.unwrap();
        let q = &sample.points[parent];
        assert_eq!(p.depth, q.depth + 1);
        let image = fs[g].apply(&q.x);
        let err: f64 = image.iter().zip(&p.x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-9 * (1.0 + image.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }
}

#[test]
fn contraction_stays_small() {
    let fs = generators("contraction.json");
    let cfg = SimConfig { budget: 10_000, seed: 1, ..SimConfig::default() };
    let r = simulate(&fs, &[Complex64::new(1.0, 0.0)], &cfg);
    assert!(r.final_coverage() < 0.05);
}

use hypercyclic::affine::AffineMap;
use hypercyclic::exp_log::{exp_k, log_k};
use hypercyclic::linalg::Mat;
use hypercyclic::normal_form::Partition;
use hypercyclic::scalar::{CNumber, SymScalar};
use proptest::prelude::*;

fn gauss() -> impl Strategy<Value = CNumber> {
    (-4i64..=4, 1i64..=3, -4i64..=4, 1i64..=3).prop_map(|(a, b, c, d)| CNumber::new(SymScalar::ratio(a, b), SymScalar::ratio(c, d)))
}

fn affine(n: usize) -> impl Strategy<Value = AffineMap<CNumber>> {
    (prop::collection::vec(gauss(), n * n), prop::collection::vec(gauss(), n))
        .prop_map(move |(a, t)| AffineMap::new(Mat::from_fn(n, n, |r, c| a[r * n + c].clone()), t).unwrap())
}

fn pair() -> impl Strategy<Value = (AffineMap<CNumber>, AffineMap<CNumber>, AffineMap<CNumber>)> {
    (1usize..=3).prop_flat_map(|n| (affine(n), affine(n), affine(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_multiplicative((f, g, h) in pair()) {
        prop_assert_eq!(f.compose(&g).unwrap().phi(), f.phi().mul(&g.phi()));
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn psi_is_linear((f, g, _) in pair(), a in gauss(), b in gauss()) {
        prop_assert_eq!(f.scale(&a).add(&g.scale(&b)).psi(), f.psi().scale(&a).add(&g.psi().scale(&b)));
        prop_assert_eq!(AffineMap::psi_inv(&f.psi()).unwrap(), f);
    }

    #[test]
    fn exact_log_inverts_exp(entries in prop::collection::vec(gauss(), 3), d in (1i64..=6, 1i64..=6)) {
        // one 3×3 block with positive rational diagonal
        let eta = Partition::new(vec![3]).unwrap();
        let diag = CNumber::real(SymScalar::ratio(d.0, d.1));
        let m = Mat::from_fn(3, 3, |r, c| match (r, c) {
            _ if r == c => diag.clone(),
            (1, 0) => entries[0].clone(),
            (2, 0) => entries[1].clone(),
            (2, 1) => entries[2].clone(),
            _ => CNumber::new(SymScalar::zero(), SymScalar::zero()),
        });
        let back = exp_k(&log_k(&m, &eta, &[0], 0.0).unwrap(), &eta, 0.0).unwrap();
        prop_assert_eq!(back, m);
    }
}

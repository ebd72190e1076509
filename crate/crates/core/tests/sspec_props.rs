use hyperschur::qmat::QMatrix;
use hyperschur::quat::{Quaternion, UnitImaginary};
use hyperschur::random;
use hyperschur::sspec::{riesz_projector, spectral_split, ContourSpec};
use proptest::prelude::*;

type M = QMatrix<f64>;
type Q = Quaternion<f64>;

/// Real `U diag(d) U^{-1}` with real eigenvalues.
fn real_diagonalizable(seed: u64, d: &[f64]) -> (M, M) {
    let mut r = random::rng(seed);
    let n = d.len();
    let u = loop {
        let g: M = random::matrix(&mut r, n, n, 0.4 / n as f64);
        let u = &M::identity(n) + &g.map(|q| Q::real(q.x0));
        if u.sigma_min() > 0.3 {
            break u;
        }
    };
    let t = &(&u * &M::real_diag(d)) * &u.inverse().unwrap();
    (t, u)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projectors_sum_to_identity_and_split_ranks(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let case = random::separated_spectrum::<f64>(&mut r, 4, 0.2);
        let radius = (case.moduli[1] * case.moduli[2]).sqrt();
        let c = ContourSpec::new(0.0, radius, random::unit_imaginary(&mut r), 256).unwrap();
        let p1 = riesz_projector(&case.t, &c).unwrap().projector;
        let p2 = &M::identity(4) - &p1;
        prop_assert!((&p1 + &p2).dist(&M::identity(4)) < 1e-14);
        prop_assert!((&p1 * &p2).max_abs() < 1e-8);
        let sp = spectral_split(&case.t, &c).unwrap();
        prop_assert_eq!((sp.rank_inside, sp.rank_outside), (2, 2));
    }

    #[test]
    fn real_matrix_matches_classical_projector(seed in any::<u64>()) {
        let d = [0.3, -0.5, 1.4, 2.0];
        let (t, u) = real_diagonalizable(seed, &d);
        let c = ContourSpec::new(0.0, 1.0, UnitImaginary::i(), 256).unwrap();
        let p = riesz_projector(&t, &c).unwrap().projector;
        let mask: Vec<f64> = d.iter().map(|x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).collect();
        let want = &(&u * &M::real_diag(&mask)) * &u.inverse().unwrap();
        prop_assert!(p.dist(&want) < 1e-10);
    }
}

#[test]
fn quadrature_converges_with_nodes() {
    let mut r = random::rng(11);
    let case = random::separated_spectrum::<f64>(&mut r, 3, 0.2);
    let radius = (case.moduli[0] * case.moduli[1]).sqrt();
    let slice = random::unit_imaginary(&mut r);
    let mut last = f64::INFINITY;
    for nodes in [16, 32, 64, 128] {
        let c = ContourSpec::new(0.0, radius, slice, nodes).unwrap();
        let e = riesz_projector(&case.t, &c).unwrap().idempotency_residual();
        assert!(e < last || e < 1e-13, "{nodes} nodes: {e} after {last}");
        last = e;
    }
    assert!(last < 1e-12);
}

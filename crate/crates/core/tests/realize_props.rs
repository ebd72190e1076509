use hyperschur::qmat::QMatrix;
use hyperschur::quat::Quaternion;
use hyperschur::random;
use hyperschur::realize::{
    boundary_defect, congruence_residuals, kernel_identity_residual, krein_langer_factor, realization_eval, realize,
    stein_residual,
};
use hyperschur::verify::kl_case;
use proptest::prelude::*;

type M = QMatrix<f64>;
type Q = Quaternion<f64>;

fn stable(r: &mut random::TestRng, n: usize) -> M {
    let lambda: Vec<Q> = (0..n).map(|_| random::ball_point(r, 0.7)).collect();
    random::similar_to_diagonal(r, &lambda)
}

/// Largest singular value.
fn op_norm(m: &M) -> f64 {
    m.singular_values().into_iter().fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certified_realizations(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let m = 1 + (seed % 3) as usize;
        let a = stable(&mut r, m);
        let c: M = random::matrix(&mut r, 2, m, 1.0);
        let sigma = if seed % 2 == 0 { M::identity(2) } else { M::real_diag(&[1.0, -1.0]) };
        let real = realize(&a, &c, &sigma).unwrap();
        let p = real.gram.clone().unwrap();
        prop_assert!(stein_residual(&a, &c, &sigma, &p) < 1e-10 * (1.0 + p.frobenius_norm()));
        let cr = congruence_residuals(&real, &p).unwrap();
        prop_assert!(cr.inverse_form < 1e-8 && cr.direct_form < 1e-8);
        for _ in 0..10 {
            let (x, y) = (random::ball_point(&mut r, 0.5), random::ball_point(&mut r, 0.5));
            prop_assert!(kernel_identity_residual(&real, x, y).unwrap() < 1e-8);
        }
    }

    #[test]
    fn completed_scalar_systems_are_inner(seed in any::<u64>()) {
        // scalar only: for N > 1 the boundary defect is X - p X conj(p) with X quaternionic, not zero
        let mut r = random::rng(seed);
        let m = 1 + (seed % 3) as usize;
        let a = stable(&mut r, m);
        let c: M = random::matrix(&mut r, 1, m, 1.0);
        let real = realize(&a, &c, &M::identity(1)).unwrap();
        for _ in 0..8 {
            let p = random::ball_point(&mut r, 0.95);
            prop_assert!(op_norm(&realization_eval(&real, p).unwrap()) <= 1.0 + 1e-10);
            let u = random::unit_imaginary(&mut r);
            let t = random::quaternion::<f64>(&mut r, 3.0).x0;
            prop_assert!(boundary_defect(&real, u.exp(t)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn matrix_boundary_defect_follows_the_kernel_identity(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let a = stable(&mut r, 2);
        let c: M = random::matrix(&mut r, 2, 2, 1.0);
        let real = realize(&a, &c, &M::identity(2)).unwrap();
        let u = random::unit_imaginary(&mut r);
        let p = u.exp(random::quaternion::<f64>(&mut r, 3.0).x0);
        prop_assert!(kernel_identity_residual(&real, p, p).unwrap() < 1e-9);
    }

    #[test]
    fn krein_langer_roundtrip(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let k = 1 + (seed % 3) as usize;
        let zeros: Vec<Q> = (0..k).map(|i| random::on_sphere(&mut r, 0.35 + 0.15 * i as f64)).collect();
        let c = random::on_sphere(&mut r, 0.5);
        let case = kl_case(&zeros, c, 16).unwrap();
        let f = krein_langer_factor(&case.realization, 16).unwrap();
        prop_assert_eq!(f.kappa, k);
        for z in &case.zeros {
            let best = f.zero_spheres.iter().map(|s| s.distance(z)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-6);
            prop_assert!(f.b_realization.sphere_zero(z).unwrap().1 < 1e-6);
        }
    }
}

use hyperschur::blaschke::blaschke_point;
use hyperschur::kernels::{block_toeplitz, neg_squares, schur_kernel_coeffs, schur_kernel_coeffs_identity};
use hyperschur::qmat::QMatrix;
use hyperschur::quat::Quaternion;
use hyperschur::random;
use hyperschur::slicefun::SliceSeries;
use hyperschur::verify::reciprocal_times_constant;
use proptest::prelude::*;

type M = QMatrix<f64>;
type Q = Quaternion<f64>;
type S = SliceSeries<f64>;

/// `sum_{n <= terms} p^n (sigma2 - S(p) sigma1 S(q)^*) conj(q)^n`.
fn pointwise_kernel(s: &S, s1: &M, s2: &M, p: Q, q: Q, terms: usize) -> M {
    let mid = s2 - &(&(&s.eval(p) * s1) * &s.eval(q).adjoint());
    let mut acc = M::zeros(mid.rows(), mid.cols());
    for n in 0..=terms {
        acc = &acc + &mid.left_scale(p.powi(n)).right_scale(q.conj().powi(n));
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_match_pointwise_kernel(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let c: Vec<M> = (0..=3).map(|_| random::matrix(&mut r, 2, 2, 0.4)).collect();
        let s = S::polynomial(&c, 12).unwrap();
        let s1 = M::real_diag(&[1.0, -1.0]);
        let s2 = M::identity(2);
        let k = schur_kernel_coeffs(&s, &s1, &s2, 12).unwrap();
        prop_assert!(k.hermitian_defect() == 0.0);
        let p = random::ball_point(&mut r, 0.4);
        let q = random::ball_point(&mut r, 0.4);
        let want = pointwise_kernel(&s, &s1, &s2, p, q, 60);
        // neglected terms are of order (0.16)^13 times the coefficient size
        prop_assert!(k.eval(p, q, 12).dist(&want) < 1e-8);
    }

    #[test]
    fn kappa_is_monotone_in_mu(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let a = random::on_sphere(&mut r, 0.7);
        let c = random::on_sphere(&mut r, 0.6);
        let s = reciprocal_times_constant(a, c, 10).unwrap();
        let ns = neg_squares(&schur_kernel_coeffs_identity(&s, 10).unwrap(), 10).unwrap();
        prop_assert!(ns.table.windows(2).all(|w| w[0].negatives <= w[1].negatives));
        prop_assert_eq!(ns.kappa, 1);
    }

    #[test]
    fn difference_identity(seed in any::<u64>()) {
        // A(S) = L (A(S0) - A(B)) L^* with S = B^{-*} * S0 and L the Toeplitz matrix of B^{-*}
        let mut r = random::rng(seed);
        let mu = 8;
        let a = random::on_sphere(&mut r, 0.6);
        let b = blaschke_point(a, mu).unwrap();
        let beta = b.star_inverse().unwrap();
        let s0 = S::scalar_poly(&[random::ball_point(&mut r, 0.5), random::ball_point(&mut r, 0.3)], mu);
        let s = beta.star_mul(&s0).unwrap();
        let ks = schur_kernel_coeffs_identity(&s, mu).unwrap().block_matrix(mu);
        let k0 = schur_kernel_coeffs_identity(&s0, mu).unwrap().block_matrix(mu);
        let kb = schur_kernel_coeffs_identity(&b, mu).unwrap().block_matrix(mu);
        let l = block_toeplitz(&beta, mu);
        let rhs = &(&l * &(&k0 - &kb)) * &l.adjoint();
        prop_assert!(ks.dist(&rhs) < 1e-8 * (1.0 + ks.frobenius_norm()));
    }
}

#[test]
fn kappa_depends_only_on_coefficients() {
    let s = reciprocal_times_constant(Q::new(0.3, 0.4, 0.0, 0.2), Q::real(0.5), 10).unwrap();
    let again = S::new(s.coeffs().to_vec()).unwrap();
    let a = neg_squares(&schur_kernel_coeffs_identity(&s, 10).unwrap(), 10).unwrap();
    let b = neg_squares(&schur_kernel_coeffs_identity(&again, 10).unwrap(), 10).unwrap();
    assert_eq!(a.kappa, b.kappa);
}

use hyperschur::blaschke::{
    blaschke_point, blaschke_product, blaschke_product_reciprocal, blaschke_sphere, point_tail_bound,
    BlaschkeSpec, PointZero, SphereZero,
};
use hyperschur::kernels::{neg_squares, schur_kernel_coeffs_identity};
use hyperschur::quat::Quaternion;
use hyperschur::random;
use proptest::prelude::*;

type Q = Quaternion<f64>;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unit_modulus_on_the_boundary(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let a: Q = random::ball_point(&mut r, 0.8);
        let d = 48;
        let b = blaschke_point(a, d).unwrap();
        let bound = point_tail_bound(a.norm(), d);
        for _ in 0..4 {
            let u = random::unit_imaginary(&mut r);
            for k in 0..64 {
                let v = b.eval(u.exp(std::f64::consts::TAU * k as f64 / 64.0))[(0, 0)];
                prop_assert!((v.norm() - 1.0).abs() <= bound);
            }
        }
    }

    #[test]
    fn sphere_factor_ignores_the_representative(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let c: Q = random::ball_point(&mut r, 0.7);
        let u = random::unit_imaginary(&mut r);
        let other = u.slice_point(c.x0, c.im_norm());
        let s1 = blaschke_sphere(c.sphere(), 20).unwrap();
        let s2 = blaschke_sphere(other.sphere(), 20).unwrap();
        prop_assert!(s1.max_coeff_dist(&s2) < 1e-14);
    }

    #[test]
    fn finite_products_have_positive_kernels(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let spec = BlaschkeSpec {
            points: (0..2).map(|_| PointZero { a: random::ball_point(&mut r, 0.7), multiplicity: 1 }).collect(),
            spheres: vec![SphereZero { sphere: random::ball_point::<f64>(&mut r, 0.7).sphere(), multiplicity: 1 }],
        };
        let prod = blaschke_product(&spec, 12).unwrap();
        let ns = neg_squares(&schur_kernel_coeffs_identity(&prod.series, 10).unwrap(), 10).unwrap();
        prop_assert_eq!(ns.kappa, 0);
    }

    #[test]
    fn product_reciprocal_reverses_order(seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let spec = BlaschkeSpec {
            points: (0..2).map(|_| PointZero { a: random::on_sphere::<f64>(&mut r, 0.7), multiplicity: 1 }).collect(),
            spheres: vec![],
        };
        let prod = blaschke_product(&spec, 16).unwrap();
        let inv = blaschke_product_reciprocal(&prod).unwrap();
        prop_assert!(prod.series.star_mul(&inv.series).unwrap().identity_defect() < 1e-9);
        prop_assert!(inv.series.star_mul(&prod.series).unwrap().identity_defect() < 1e-9);
    }
}

//! Acceptance criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use hyperschur::blaschke::{
    blaschke_point, blaschke_point_reciprocal, blaschke_product, point_tail_bound, verify_zeros, BlaschkeSpec,
    PointZero, SphereZero,
};
use hyperschur::kernels::{congruence_check, neg_squares, schur_kernel_coeffs_identity};
use hyperschur::qmat::{right_eigen_spheres, right_eigenpairs, s_eigencheck, SphereMultiplicity};
use hyperschur::random::{self, TestRng};
use hyperschur::realize::{
    congruence_residuals, kernel_identity_residual, krein_langer_factor, realization_eval, realize, stein_residual,
};
use hyperschur::sspec::{
    projector_identities_with, resolvent_eq_residuals, riesz_projector, s_resolvent_left, spectral_split,
    sphere_list_distance, ContourSpec,
};
use hyperschur::verify::{contour_cases, kl_case, reciprocal_times_constant, VerifyConfig};
use hyperschur::{QMat, Quat, Series};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn off_spectrum(r: &mut TestRng, t: &QMat, scale: f64) -> Quat {
    loop {
        let s: Quat = random::quaternion(r, scale);
        if t.char_operator(s).sigma_min() > 1e-2 {
            return s;
        }
    }
}

fn resolvent() -> Outcome {
    let start = Instant::now();
    let mut r = random::rng(1001);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let t: QMat = random::matrix(&mut r, 5, 5, 1.0);
        let s = off_spectrum(&mut r, &t, 2.0);
        let (a, b) = resolvent_eq_residuals(s, &t).unwrap();
        worst = worst.max(a.max(b) / (1.0 + t.frobenius_norm()));
        // left equation S s - T S = I recomputed here from the left resolvent
        let sl = s_resolvent_left(s, &t).unwrap();
        let direct = &(&sl.right_scale(s) - &(&t * &sl)) - &QMat::identity(5);
        worst = worst.max(direct.frobenius_norm() / (1.0 + t.frobenius_norm()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(5),
        format!("max scaled residual {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn acceptance_cases() -> Vec<hyperschur::verify::ContourCase> {
    let cfg = VerifyConfig {
        seed: 2002,
        ..Default::default()
    };
    contour_cases(&cfg, 20).unwrap()
}

fn projectors() -> Outcome {
    let mut r = random::rng(2003);
    let (mut pp, mut comm, mut ids, mut slices) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in acceptance_cases() {
        assert!(case.t.rows() <= 8);
        let rp = riesz_projector(&case.t, &case.contour).unwrap();
        pp = pp.max(rp.idempotency_residual());
        comm = comm.max(rp.commutator_residual(&case.t));
        let lambda = off_spectrum(&mut r, &case.t, 1.5);
        let (a, b) = projector_identities_with(&case.t, &rp, lambda).unwrap();
        ids = ids.max(a).max(b);
        for _ in 0..5 {
            let c = ContourSpec {
                slice: random::unit_imaginary(&mut r),
                ..case.contour
            };
            slices = slices.max(riesz_projector(&case.t, &c).unwrap().projector.dist(&rp.projector));
        }
    }
    outcome(
        pp < 1e-8 && comm < 1e-8 && ids < 1e-7 && slices < 1e-8,
        format!("P^2-P {pp:.2e}, TP-PT {comm:.2e}, identities {ids:.2e}, slices {slices:.2e}"),
    )
}

fn split() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for case in acceptance_cases() {
        let sp = spectral_split(&case.t, &case.contour).unwrap();
        let union: Vec<_> = sp.inside.iter().chain(&sp.outside).cloned().collect();
        // the generating spheres are the oracle, not a second eigensolve
        let truth: Vec<_> = case
            .spheres
            .iter()
            .map(|&sphere| SphereMultiplicity { sphere, multiplicity: 1 })
            .collect();
        match sphere_list_distance(&union, &truth) {
            Some(d) => worst = worst.max(d),
            None => ok = false,
        }
    }
    outcome(ok && worst < 1e-6, format!("max sphere distance {worst:.2e}"))
}

fn s_equals_r() -> Outcome {
    let mut r = random::rng(4004);
    let (mut smin, mut check) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let n = 1 + k % 6;
        let t: QMat = random::matrix(&mut r, n, n, 1.0);
        for s in right_eigen_spheres(&t).unwrap() {
            for _ in 0..3 {
                let u = random::unit_imaginary(&mut r);
                smin = smin.max(t.char_operator(s.sphere.representative(&u)).sigma_min());
            }
        }
        for es in right_eigenpairs(&t).unwrap() {
            for c in 0..es.vectors.cols() {
                check = check.max(s_eigencheck(&t, &es.vectors.col(c), es.eigenvalue).unwrap());
            }
        }
    }
    outcome(
        smin < 1e-8 && check < 1e-8,
        format!("sigma_min {smin:.2e}, eigencheck {check:.2e}"),
    )
}

fn star_algebra() -> Outcome {
    let mut r = random::rng(5005);
    let d = 16;
    let series = |r: &mut TestRng, n: usize| -> Series {
        Series::new((0..=d).map(|_| random::matrix(r, n, n, 0.5)).collect()).unwrap()
    };
    let mut alg = 0.0f64;
    for n in [1, 2, 3] {
        for _ in 0..10 {
            let (f, g, h) = (series(&mut r, n), series(&mut r, n), series(&mut r, n));
            let fg = f.star_mul(&g).unwrap();
            alg = alg.max(fg.star_mul(&h).unwrap().max_coeff_dist(&f.star_mul(&g.star_mul(&h).unwrap()).unwrap()));
            let left = f.star_mul(&g.try_add(&h).unwrap()).unwrap();
            alg = alg.max(left.max_coeff_dist(&fg.try_add(&f.star_mul(&h).unwrap()).unwrap()));
        }
    }
    let mut inv = 0.0f64;
    for _ in 0..100 {
        let mut c: Vec<Quat> = (0..=d).map(|_| random::quaternion(&mut r, 0.3)).collect();
        c[0] = random::on_sphere(&mut r, 1.5);
        let f = Series::scalar_poly(&c, d);
        let fi = f.star_inverse().unwrap();
        inv = inv.max(f.star_mul(&fi).unwrap().identity_defect());
    }
    outcome(
        alg < 1e-12 && inv < 1e-10,
        format!("algebra {alg:.2e}, reciprocal {inv:.2e}"),
    )
}

fn blaschke() -> Outcome {
    let mut r = random::rng(6006);
    let d = 48;
    let mut ratio = 0.0f64;
    for k in 0..8 {
        // include the extreme modulus
        let a: Quat = if k == 0 { random::on_sphere(&mut r, 0.8) } else { random::ball_point(&mut r, 0.8) };
        let b = blaschke_point(a, d).unwrap();
        let bound = point_tail_bound(a.norm(), d);
        for _ in 0..4 {
            let u = random::unit_imaginary(&mut r);
            for j in 0..64 {
                let v = b.eval(u.exp(std::f64::consts::TAU * j as f64 / 64.0))[(0, 0)];
                ratio = ratio.max((v.norm() - 1.0).abs() / bound);
            }
        }
    }
    let spec = BlaschkeSpec {
        points: vec![
            PointZero {
                a: Quat::new(0.2, 0.3, 0.0, -0.1),
                multiplicity: 1,
            },
            PointZero {
                a: Quat::new(-0.4, 0.0, 0.2, 0.1),
                multiplicity: 1,
            },
            PointZero {
                a: Quat::new(0.1, -0.2, 0.3, 0.3),
                multiplicity: 1,
            },
        ],
        spheres: vec![SphereZero {
            sphere: Quat::new(0.3, 0.0, 0.4, 0.0).sphere(),
            multiplicity: 1,
        }],
    };
    let prod = blaschke_product(&spec, d).unwrap();
    let zero = verify_zeros(&spec, &prod.series).iter().fold(0.0f64, |m, z| m.max(z.residual));
    outcome(
        ratio <= 1.0 && zero < 1e-8,
        format!("boundary defect / tail {ratio:.2}, zero residual {zero:.2e}"),
    )
}

fn negative_squares() -> Outcome {
    let mu = 10;
    let p = Series::var(mu);
    let kp = neg_squares(&schur_kernel_coeffs_identity(&p, mu).unwrap(), mu).unwrap().kappa;
    let a = Quat::new(0.3, 0.2, -0.4, 0.1);
    let c = Quat::new(0.5, 0.0, 0.0, 0.2);
    let s = reciprocal_times_constant(a, c, mu).unwrap();
    // cross-check the composition against the closed-form reciprocal
    let recip = blaschke_point_reciprocal(a, mu).unwrap().series;
    let via = recip.right_mul(&QMat::scalar(c)).unwrap();
    let consistent = s.max_coeff_dist(&via) < 1e-8;
    let k = schur_kernel_coeffs_identity(&s, mu).unwrap();
    let ns = neg_squares(&k, mu).unwrap();
    let at_mu = ns.table[mu].negatives;
    let mut r = random::rng(7007);
    let mut invariant = true;
    for _ in 0..20 {
        let mut coeff: Vec<QMat> = (0..=mu).map(|_| random::matrix(&mut r, 1, 1, 0.5)).collect();
        coeff[0] = QMat::scalar(random::on_sphere(&mut r, 1.0));
        let alpha = Series::new(coeff).unwrap();
        let rep = congruence_check(&k, &alpha, mu).unwrap();
        invariant &= rep.before.table.iter().zip(&rep.after.table).all(|(x, y)| x.negatives == y.negatives);
    }
    outcome(
        kp == 0 && ns.kappa == 1 && at_mu == 1 && ns.stabilized && consistent && invariant,
        format!("kappa(p) {kp}, kappa(B^-1 c) {} at mu={mu}, congruence invariant {invariant}", ns.kappa),
    )
}

fn realization() -> Outcome {
    let mut r = random::rng(8008);
    let (mut stein, mut cong, mut kern) = (0.0f64, 0.0f64, 0.0f64);
    for sigma in [QMat::identity(2), QMat::real_diag(&[1.0, -1.0])] {
        for m in 1..=3 {
            let lambda: Vec<Quat> = (0..m).map(|_| random::ball_point(&mut r, 0.7)).collect();
            let a = random::similar_to_diagonal(&mut r, &lambda);
            let c: QMat = random::matrix(&mut r, 2, m, 1.0);
            let real = realize(&a, &c, &sigma).unwrap();
            let p = real.gram.clone().unwrap();
            stein = stein.max(stein_residual(&a, &c, &sigma, &p));
            let cr = congruence_residuals(&real, &p).unwrap();
            cong = cong.max(cr.inverse_form).max(cr.direct_form);
            for _ in 0..50 {
                let (x, y): (Quat, Quat) = (random::ball_point(&mut r, 0.5), random::ball_point(&mut r, 0.5));
                kern = kern.max(kernel_identity_residual(&real, x, y).unwrap());
            }
        }
    }
    let id = realize(&QMat::zeros(1, 1), &QMat::identity(1), &QMat::identity(1)).unwrap();
    let mut exact = id.series(10).scalar_coeffs().iter().enumerate().all(|(n, c)| {
        *c == if n == 1 { Quat::real(1.0) } else { Quat::real(0.0) }
    });
    for _ in 0..50 {
        let p: Quat = random::ball_point(&mut r, 1.0);
        exact &= realization_eval(&id, p).unwrap()[(0, 0)] == p;
    }
    outcome(
        stein < 1e-10 && cong < 1e-8 && kern < 1e-8 && exact,
        format!("Stein {stein:.2e}, congruence {cong:.2e}, kernel {kern:.2e}, S(p)=p exact {exact}"),
    )
}

fn krein_langer() -> Outcome {
    let mu = 10;
    let d = 24;
    let cases: [(&[Quat], Quat); 4] = [
        (&[Quat::new(0.3, 0.4, 0.0, 0.2)], Quat::real(0.5)),
        (&[Quat::new(-0.5, 0.0, 0.3, 0.0)], Quat::new(0.2, 0.3, 0.0, 0.0)),
        (&[Quat::new(0.4, 0.1, 0.2, 0.0), Quat::new(0.0, 0.0, 0.3, -0.5)], Quat::real(0.4)),
        (&[Quat::new(0.6, 0.0, 0.0, 0.0), Quat::new(-0.2, 0.3, 0.3, 0.0)], Quat::new(0.0, 0.3, 0.0, 0.3)),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for (zeros, c) in cases {
        let case = kl_case(zeros, c, d).unwrap();
        let f = krein_langer_factor(&case.realization, d).unwrap();
        let ks = neg_squares(&schur_kernel_coeffs_identity(&case.composed, mu).unwrap(), mu).unwrap().kappa;
        let k0 = neg_squares(&schur_kernel_coeffs_identity(&f.s0, mu).unwrap(), mu).unwrap().kappa;
        ok &= f.kappa == zeros.len() && ks == zeros.len() && k0 == 0;
        for z in zeros {
            let near = f.zero_spheres.iter().map(|s| s.distance(&z.sphere())).fold(f64::INFINITY, f64::min);
            let (_, res) = f.b_realization.sphere_zero(&z.sphere()).unwrap();
            worst = worst.max(near).max(res);
        }
    }
    outcome(ok && worst < 1e-6, format!("kappa recovered {ok}, zero error {worst:.2e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let start = Instant::now();
    let criteria: [Criterion; 9] = [
        ("1 resolvent equations", resolvent),
        ("2 Riesz projectors", projectors),
        ("3 spectral split", split),
        ("4 S-spectrum equals right spectrum", s_equals_r),
        ("5 star algebra", star_algebra),
        ("6 Blaschke products", blaschke),
        ("7 negative squares", negative_squares),
        ("8 realization", realization),
        ("9 Krein-Langer roundtrip", krein_langer),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(name);
        }
    }
    let total = start.elapsed();
    let fast = total < Duration::from_secs(120);
    println!(
        "{} runtime: {:.1} s (limit 120 s)",
        if fast { "PASS" } else { "FAIL" },
        total.as_secs_f64()
    );
    assert!(failed.is_empty(), "failed: {failed:?}");
    assert!(fast);
}

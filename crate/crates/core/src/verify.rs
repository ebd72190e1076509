//! Property suites behind `hyperschur verify`.

use serde::{Deserialize, Serialize};

use crate::blaschke::{
    blaschke_point, blaschke_point_closed_form, blaschke_product, point_tail_bound, verify_zeros, BlaschkeSpec,
    PointZero, SphereZero,
};
use crate::error::{Error, Result};
use crate::kernels::{congruence_check, neg_squares, schur_kernel_coeffs_identity};
use crate::qmat::{right_eigen_spheres, right_eigenpairs, s_eigencheck, QMatrix, SphereMultiplicity};
use crate::quat::{Quaternion, Sphere, UnitImaginary};
use crate::random::{self, TestRng};
use crate::realize::{
    cascade, congruence_residuals, kernel_identity_residual, krein_langer_compose, krein_langer_factor, realize,
    realization_eval, stein_residual, Realization,
};
use crate::slicefun::SliceSeries;
use crate::sspec::{
    projector_identities_with, resolvent_eq_residuals, riesz_projector, spectral_split, sphere_list_distance,
    ContourSpec,
};

type Q = Quaternion<f64>;
type M = QMatrix<f64>;
type S = SliceSeries<f64>;

pub const SUITES: [&str; 9] = [
    "resolvent", "projector", "split", "eigen", "star", "blaschke", "negsq", "realize", "kl",
];

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Quadrature nodes for contour suites.
    pub nodes: usize,
    /// Series degree; each suite has its own default.
    pub degree: Option<usize>,
    pub mu_max: usize,
    /// Replaces every tolerance when set.
    pub tol: Option<f64>,
    /// Fixed slice for contour suites instead of a random one.
    pub slice: Option<UnitImaginary<f64>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            nodes: 256,
            degree: None,
            mu_max: 10,
            tol: None,
            slice: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: &str, cfg: &VerifyConfig) -> Self {
        Self {
            suite: suite.into(),
            seed: cfg.seed,
            checks: Vec::new(),
        }
    }

    /// `value <= tol`, with the tolerance override applied.
    fn le(&mut self, cfg: &VerifyConfig, name: &str, value: f64, tol: f64) {
        let tol = cfg.tol.unwrap_or(tol);
        self.checks.push(Check {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        });
    }

    /// Exact count comparison; `value` is the absolute difference.
    fn count(&mut self, name: &str, got: usize, want: usize) {
        self.checks.push(Check {
            name: name.into(),
            value: got.abs_diff(want) as f64,
            tol: 0.0,
            pass: got == want,
        });
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.checks.push(Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tol: 0.0,
            pass: ok,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Report> {
    match name {
        "resolvent" => resolvent(cfg),
        "projector" => projector(cfg),
        "split" => split(cfg),
        "eigen" => eigen(cfg),
        "star" => star(cfg),
        "blaschke" => blaschke(cfg),
        "negsq" => negsq(cfg),
        "realize" => realization(cfg),
        "kl" => kl(cfg),
        other => Err(Error::InvalidSpec(format!("unknown suite {other}"))),
    }
}

fn rng(cfg: &VerifyConfig, salt: u64) -> TestRng {
    random::rng(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
}

/// Random `s` whose sphere stays away from the spectrum of `t`.
fn off_spectrum(r: &mut TestRng, t: &M, scale: f64) -> Q {
    loop {
        let s: Q = random::quaternion(r, scale);
        if t.char_operator(s).sigma_min() > 1e-2 {
            return s;
        }
    }
}

pub fn resolvent(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("resolvent", cfg);
    let mut r = rng(cfg, 1);
    let (mut left, mut right) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let t: M = random::matrix(&mut r, 5, 5, 1.0);
        let s = off_spectrum(&mut r, &t, 2.0);
        let (a, b) = resolvent_eq_residuals(s, &t)?;
        let scale = 1.0 + t.frobenius_norm();
        left = left.max(a / scale);
        right = right.max(b / scale);
    }
    rep.le(cfg, "left_equation", left, 1e-10);
    rep.le(cfg, "right_equation", right, 1e-10);
    Ok(rep)
}

/// One projector case: separated spectrum and a circle about 0 through the widest modulus gap.
pub struct ContourCase {
    pub t: M,
    pub spheres: Vec<Sphere<f64>>,
    pub contour: ContourSpec<f64>,
}

pub fn contour_cases(cfg: &VerifyConfig, count: usize) -> Result<Vec<ContourCase>> {
    let mut r = rng(cfg, 2);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rand::Rng::random_range(&mut r, 2..=8usize);
        let case = random::separated_spectrum::<f64>(&mut r, n, 0.2);
        let k = (0..n - 1)
            .max_by(|&i, &j| {
                let ri = case.moduli[i + 1] / case.moduli[i];
                let rj = case.moduli[j + 1] / case.moduli[j];
                ri.partial_cmp(&rj).unwrap()
            })
            .unwrap();
        let radius = (case.moduli[k] * case.moduli[k + 1]).sqrt();
        let slice = match cfg.slice {
            Some(s) => s,
            None => random::unit_imaginary(&mut r),
        };
        let contour = ContourSpec::new(0.0, radius, slice, cfg.nodes)?;
        out.push(ContourCase {
            t: case.t,
            spheres: case.spheres,
            contour,
        });
    }
    Ok(out)
}

pub fn projector(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("projector", cfg);
    let mut r = rng(cfg, 3);
    let (mut idem, mut comm, mut ids, mut slices) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in contour_cases(cfg, 20)? {
        let rp = riesz_projector(&case.t, &case.contour)?;
        idem = idem.max(rp.idempotency_residual());
        comm = comm.max(rp.commutator_residual(&case.t));
        let lambda = off_spectrum(&mut r, &case.t, 1.5);
        let (a, b) = projector_identities_with(&case.t, &rp, lambda)?;
        ids = ids.max(a).max(b);
        for _ in 0..5 {
            let other = ContourSpec {
                slice: random::unit_imaginary(&mut r),
                ..case.contour
            };
            let p = riesz_projector(&case.t, &other)?;
            slices = slices.max(p.projector.dist(&rp.projector));
        }
    }
    rep.le(cfg, "idempotency", idem, 1e-8);
    rep.le(cfg, "commutation", comm, 1e-8);
    rep.le(cfg, "resolvent_identities", ids, 1e-7);
    rep.le(cfg, "slice_independence", slices, 1e-8);
    Ok(rep)
}

pub fn split(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("split", cfg);
    let (mut union, mut inside) = (0.0f64, 0.0f64);
    let mut counts_ok = true;
    for case in contour_cases(cfg, 20)? {
        let sp = spectral_split(&case.t, &case.contour)?;
        let full = right_eigen_spheres(&case.t)?;
        let both: Vec<_> = sp.inside.iter().chain(&sp.outside).cloned().collect();
        match sphere_list_distance(&both, &full) {
            Some(d) => union = union.max(d),
            None => counts_ok = false,
        }
        let want: Vec<SphereMultiplicity<f64>> = case
            .spheres
            .iter()
            .filter(|s| s.modulus() < case.contour.radius)
            .map(|&sphere| SphereMultiplicity { sphere, multiplicity: 1 })
            .collect();
        match sphere_list_distance(&sp.inside, &want) {
            Some(d) => inside = inside.max(d),
            None => counts_ok = false,
        }
    }
    rep.flag("multiplicities_match", counts_ok);
    rep.le(cfg, "union_equals_spectrum", union, 1e-6);
    rep.le(cfg, "inside_equals_enclosed", inside, 1e-6);
    Ok(rep)
}

pub fn eigen(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("eigen", cfg);
    let mut r = rng(cfg, 4);
    let (mut smin, mut check) = (0.0f64, 0.0f64);
    let mut dims_ok = true;
    for _ in 0..50 {
        let n = rand::Rng::random_range(&mut r, 1..=6usize);
        let t: M = random::matrix(&mut r, n, n, 1.0);
        let spheres = right_eigen_spheres(&t)?;
        dims_ok &= spheres.iter().map(|s| s.multiplicity).sum::<usize>() == n;
        for s in &spheres {
            let u = random::unit_imaginary(&mut r);
            smin = smin.max(t.char_operator(s.sphere.representative(&u)).sigma_min());
        }
        for es in right_eigenpairs(&t)? {
            for k in 0..es.vectors.cols() {
                check = check.max(s_eigencheck(&t, &es.vectors.col(k), es.eigenvalue)?);
                let tv = &t * &es.vectors.col(k);
                check = check.max(tv.dist(&es.vectors.col(k).right_scale(es.eigenvalue)));
            }
        }
    }
    rep.flag("multiplicities_sum_to_dim", dims_ok);
    rep.le(cfg, "char_operator_sigma_min", smin, 1e-8);
    rep.le(cfg, "eigenvector_residual", check, 1e-8);
    Ok(rep)
}

fn random_series(r: &mut TestRng, n: usize, degree: usize, scale: f64) -> S {
    let c: Vec<M> = (0..=degree).map(|_| random::matrix(r, n, n, scale)).collect();
    S::new(c).expect("nonempty")
}

pub fn star(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("star", cfg);
    let d = cfg.degree.unwrap_or(16);
    let mut r = rng(cfg, 5);
    let (mut assoc, mut dist) = (0.0f64, 0.0f64);
    for n in [1, 2] {
        for _ in 0..10 {
            let f = random_series(&mut r, n, d, 0.5);
            let g = random_series(&mut r, n, d, 0.5);
            let h = random_series(&mut r, n, d, 0.5);
            let lhs = f.star_mul(&g)?.star_mul(&h)?;
            assoc = assoc.max(lhs.max_coeff_dist(&f.star_mul(&g.star_mul(&h)?)?));
            let sum = f.star_mul(&g.try_add(&h)?)?;
            dist = dist.max(sum.max_coeff_dist(&f.star_mul(&g)?.try_add(&f.star_mul(&h)?)?));
            let sum = f.try_add(&g)?.star_mul(&h)?;
            dist = dist.max(sum.max_coeff_dist(&f.star_mul(&h)?.try_add(&g.star_mul(&h)?)?));
        }
    }
    rep.le(cfg, "associativity", assoc, 1e-12);
    rep.le(cfg, "distributivity", dist, 1e-12);
    let mut inv = 0.0f64;
    for _ in 0..100 {
        // leading coefficient dominates so the reciprocal stays bounded
        let mut c: Vec<Q> = (0..=d).map(|_| random::quaternion(&mut r, 0.3)).collect();
        let m = rand::Rng::random_range(&mut r, 1.0..2.0);
        c[0] = random::on_sphere(&mut r, m);
        let f = S::scalar_poly(&c, d);
        let fi = f.star_inverse()?;
        inv = inv.max(f.star_mul(&fi)?.identity_defect()).max(fi.star_mul(&f)?.identity_defect());
    }
    rep.le(cfg, "reciprocal_defect", inv, 1e-10);
    Ok(rep)
}

pub fn blaschke(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("blaschke", cfg);
    let d = cfg.degree.unwrap_or(48);
    let mut r = rng(cfg, 6);
    let (mut modulus, mut closed) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let a: Q = random::ball_point(&mut r, 0.8);
        let b = blaschke_point(a, d)?;
        let bound = point_tail_bound(a.norm(), d);
        for _ in 0..4 {
            let u = random::unit_imaginary(&mut r);
            for k in 0..64 {
                let p = u.exp(std::f64::consts::TAU * k as f64 / 64.0);
                let v = b.eval(p)[(0, 0)];
                modulus = modulus.max((v.norm() - 1.0).abs() / bound);
                closed = closed.max((v - blaschke_point_closed_form(a, p)?).norm() / bound);
            }
        }
    }
    rep.le(cfg, "boundary_modulus_over_tail", modulus, 1.0);
    rep.le(cfg, "closed_form_over_tail", closed, 1.0);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let points: Vec<PointZero<f64>> = (0..3)
            .map(|_| PointZero {
                a: random::ball_point(&mut r, 0.6),
                multiplicity: 1,
            })
            .collect();
        let s: Q = random::ball_point(&mut r, 0.6);
        let spec = BlaschkeSpec {
            points,
            spheres: vec![SphereZero {
                sphere: s.sphere(),
                multiplicity: 1,
            }],
        };
        let prod = blaschke_product(&spec, d)?;
        for z in verify_zeros(&spec, &prod.series) {
            worst = worst.max(z.residual);
        }
    }
    rep.le(cfg, "product_zero_residual", worst, 1e-8);
    Ok(rep)
}

/// `B_a^{-*} * c` for a scalar `c`.
pub fn reciprocal_times_constant(a: Q, c: Q, degree: usize) -> Result<S> {
    krein_langer_compose(&blaschke_point(a, degree)?, &S::scalar_poly(&[c], degree))
}

pub fn negsq(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("negsq", cfg);
    let mu = cfg.mu_max;
    let p = S::var(mu);
    let k = schur_kernel_coeffs_identity(&p, mu)?;
    rep.count("kappa_of_p", neg_squares(&k, mu)?.kappa, 0);
    let mut r = rng(cfg, 7);
    let a = random::on_sphere(&mut r, 0.6);
    let c = random::on_sphere(&mut r, 0.5);
    let s = reciprocal_times_constant(a, c, mu)?;
    let ns = neg_squares(&schur_kernel_coeffs_identity(&s, mu)?, mu)?;
    rep.count("kappa_of_reciprocal", ns.kappa, 1);
    rep.flag("reciprocal_stabilized", ns.stabilized);
    let k = schur_kernel_coeffs_identity(&s, mu)?;
    let mut same = true;
    for _ in 0..20 {
        let mut c: Vec<M> = (0..=mu).map(|_| random::matrix(&mut r, 1, 1, 0.4)).collect();
        c[0] = M::scalar(random::on_sphere(&mut r, 1.0));
        let alpha = S::new(c)?;
        let cr = congruence_check(&k, &alpha, mu)?;
        same &= cr.before.table.iter().zip(&cr.after.table).all(|(x, y)| x.negatives == y.negatives);
    }
    rep.flag("congruence_invariance", same);
    Ok(rep)
}

fn stable_matrix(r: &mut TestRng, n: usize, radius: f64) -> M {
    let lambda: Vec<Q> = (0..n).map(|_| random::ball_point(r, radius)).collect();
    random::similar_to_diagonal(r, &lambda)
}

fn pair_in_ball(r: &mut TestRng, radius: f64) -> (Q, Q) {
    (random::ball_point(r, radius), random::ball_point(r, radius))
}

pub fn realization(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("realize", cfg);
    let mut r = rng(cfg, 8);
    let (mut stein, mut cong, mut kern) = (0.0f64, 0.0f64, 0.0f64);
    let sigmas = [M::identity(2), M::real_diag(&[1.0, -1.0])];
    for sigma in &sigmas {
        for _ in 0..5 {
            let a = stable_matrix(&mut r, 3, 0.7);
            let c: M = random::matrix(&mut r, 2, 3, 1.0);
            let real = realize(&a, &c, sigma)?;
            let p = real.gram.clone().expect("set by realize");
            stein = stein.max(stein_residual(&a, &c, sigma, &p) / (1.0 + p.frobenius_norm()));
            let cr = congruence_residuals(&real, &p)?;
            cong = cong.max(cr.inverse_form).max(cr.direct_form);
            for _ in 0..50 {
                let (x, y) = pair_in_ball(&mut r, 0.5);
                kern = kern.max(kernel_identity_residual(&real, x, y)?);
            }
        }
    }
    rep.le(cfg, "stein_residual", stein, 1e-10);
    rep.le(cfg, "congruence_residual", cong, 1e-8);
    rep.le(cfg, "kernel_identity", kern, 1e-8);
    let id = realize(&M::zeros(1, 1), &M::identity(1), &M::identity(1))?;
    let coeffs = id.series(8).scalar_coeffs();
    let mut exact = coeffs.iter().enumerate().all(|(n, c)| *c == if n == 1 { Q::real(1.0) } else { Q::real(0.0) });
    for _ in 0..20 {
        let p = random::ball_point(&mut r, 1.0);
        exact &= realization_eval(&id, p)?[(0, 0)] == p;
    }
    rep.flag("identity_case_exact", exact);
    Ok(rep)
}

/// Realization of `B_a^{-*} c`: `A = a^{-1}`, `B = (a^{-1} - conj(a)) c`, `C = 1/|a|`, `D = c/|a|`.
pub fn reciprocal_realization(a: Q, c: Q) -> Result<Realization<f64>> {
    let ai = a.inverse()?;
    let m = a.norm();
    Realization::new(
        M::scalar(ai),
        M::scalar((ai - a.conj()) * c),
        M::scalar(Q::real(1.0 / m)),
        M::scalar(c.scale(1.0 / m)),
        M::identity(1),
    )
}

/// Compose-then-factor case with the prescribed zeros of `B`.
pub struct KleinCase {
    pub realization: Realization<f64>,
    pub composed: S,
    pub zeros: Vec<Sphere<f64>>,
}

/// `B_{a_1}^{-*} * ... * B_{a_k}^{-*} * c`, both as a composed series and as a realization.
pub fn kl_case(zeros: &[Q], c: Q, degree: usize) -> Result<KleinCase> {
    let (last, rest) = zeros.split_last().expect("at least one zero");
    let mut real = reciprocal_realization(*last, c)?;
    let mut composed = reciprocal_times_constant(*last, c, degree)?;
    for &a in rest.iter().rev() {
        real = cascade(&reciprocal_realization(a, Q::real(1.0))?, &real)?;
        composed = reciprocal_times_constant(a, Q::real(1.0), degree)?.star_mul(&composed)?;
    }
    Ok(KleinCase {
        realization: real,
        composed,
        zeros: zeros.iter().map(|a| a.sphere()).collect(),
    })
}

pub fn kl(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new("kl", cfg);
    let mu = cfg.mu_max;
    let d = cfg.degree.unwrap_or(24).max(mu);
    let mut r = rng(cfg, 9);
    for k in [1usize, 2] {
        let mut kappa_ok = true;
        let mut kappa0_ok = true;
        let mut kappa_s_ok = true;
        let (mut zero_dist, mut zero_res, mut series) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..5 {
            let zeros: Vec<Q> = loop {
                let z: Vec<Q> = (0..k)
                    .map(|_| {
                        let m = rand::Rng::random_range(&mut r, 0.4..0.8);
                        random::on_sphere(&mut r, m)
                    })
                    .collect();
                if k == 1 || z[0].sphere().distance(&z[1].sphere()) > 0.1 {
                    break z;
                }
            };
            let c = random::on_sphere(&mut r, 0.5);
            let case = kl_case(&zeros, c, d)?;
            let scale = case.composed.coeffs().iter().fold(1.0f64, |m, x| m.max(x.max_abs()));
            series = series.max(case.realization.series(d).max_coeff_dist(&case.composed) / scale);
            let f = krein_langer_factor(&case.realization, d)?;
            kappa_ok &= f.kappa == k;
            let ns = neg_squares(&schur_kernel_coeffs_identity(&case.composed, mu)?, mu)?;
            kappa_s_ok &= ns.kappa == k;
            let ns0 = neg_squares(&schur_kernel_coeffs_identity(&f.s0, mu)?, mu)?;
            kappa0_ok &= ns0.kappa == 0;
            let found: Vec<_> = f.zero_spheres.iter().map(|&sphere| SphereMultiplicity { sphere, multiplicity: 1 }).collect();
            let want: Vec<_> = case.zeros.iter().map(|&sphere| SphereMultiplicity { sphere, multiplicity: 1 }).collect();
            match sphere_list_distance(&found, &want) {
                Some(x) => zero_dist = zero_dist.max(x),
                None => kappa_ok = false,
            }
            for z in &case.zeros {
                zero_res = zero_res.max(f.b_realization.sphere_zero(z)?.1);
            }
        }
        rep.le(cfg, &format!("deg{k}_realization_matches_composition"), series, 1e-10);
        rep.flag(&format!("deg{k}_kappa_recovered"), kappa_ok);
        rep.flag(&format!("deg{k}_kappa_of_s"), kappa_s_ok);
        rep.flag(&format!("deg{k}_kappa_of_s0_zero"), kappa0_ok);
        rep.le(cfg, &format!("deg{k}_zero_sphere_distance"), zero_dist, 1e-6);
        rep.le(cfg, &format!("deg{k}_b_vanishes_on_zeros"), zero_res, 1e-6);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &VerifyConfig::default()).is_err());
    }

    #[test]
    fn tolerance_override_applies() {
        let cfg = VerifyConfig {
            tol: Some(0.0),
            ..Default::default()
        };
        let mut rep = Report::new("x", &cfg);
        rep.le(&cfg, "a", 1e-20, 1.0);
        assert!(!rep.passed());
    }
}

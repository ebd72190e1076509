//! Blaschke factors at points and spheres, and their finite products.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quat::{Quaternion, Sphere, UnitImaginary};
use crate::scalar::{fmax, lit, Real};
use crate::slicefun::{real_series_inverse, SliceSeries};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PointZero<T> {
    pub a: Quaternion<T>,
    #[serde(default = "one_usize")]
    pub multiplicity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SphereZero<T> {
    pub sphere: Sphere<T>,
    #[serde(default = "one_usize")]
    pub multiplicity: usize,
}

fn one_usize() -> usize {
    1
}

/// Prescribed zeros of a finite Blaschke product.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlaschkeSpec<T> {
    #[serde(default)]
    pub points: Vec<PointZero<T>>,
    #[serde(default)]
    pub spheres: Vec<SphereZero<T>>,
}

fn check_modulus<T: Real>(m: T) -> Result<()> {
    if !(m > T::zero() && m < T::one()) {
        return Err(Error::InvalidModulus(m.to_f64_lossy()));
    }
    Ok(())
}

impl<T: Real> BlaschkeSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let tol = lit::<T>(1e-10);
        for (i, p) in self.points.iter().enumerate() {
            check_modulus(p.a.norm())?;
            if p.multiplicity == 0 {
                return Err(Error::InvalidSpec(format!("point {i} has multiplicity 0")));
            }
            if self.points[..i].iter().any(|q| (q.a - p.a).norm() <= tol) {
                return Err(Error::InvalidSpec(format!("point {i} listed twice")));
            }
        }
        for (i, s) in self.spheres.iter().enumerate() {
            check_modulus(s.sphere.modulus())?;
            if s.multiplicity == 0 {
                return Err(Error::InvalidSpec(format!("sphere {i} has multiplicity 0")));
            }
            if self.spheres[..i].iter().any(|t| t.sphere.distance(&s.sphere) <= tol) {
                return Err(Error::InvalidSpec(format!("sphere {i} listed twice")));
            }
        }
        Ok(())
    }

    /// Number of quaternionic zeros counted with multiplicity; a sphere counts twice.
    pub fn degree(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum::<usize>()
            + 2 * self.spheres.iter().map(|s| s.multiplicity).sum::<usize>()
    }
}

/// `B_a(p) = (1 - p conj(a))^{-*} * (a - p) conj(a)/|a|`.
pub fn blaschke_point<T: Real>(a: Quaternion<T>, degree: usize) -> Result<SliceSeries<T>> {
    let m = a.norm();
    check_modulus(m)?;
    let ab = a.conj();
    let geo: Vec<_> = (0..=degree).map(|n| ab.powi(n)).collect();
    let geo = SliceSeries::scalar_poly(&geo, degree);
    let lin = SliceSeries::scalar_poly(&[Quaternion::real(m), -ab.scale(T::one() / m)], degree);
    geo.star_mul(&lin)
}

/// `B_[c](p) = (1 - 2 Re(c) p + |c|^2 p^2)^{-1} (|c|^2 - 2 Re(c) p + p^2)`.
pub fn blaschke_sphere<T: Real>(c: Sphere<T>, degree: usize) -> Result<SliceSeries<T>> {
    let m = c.modulus();
    check_modulus(m)?;
    let two_re = lit::<T>(2.0) * c.re;
    let m2 = m * m;
    let mut den = vec![T::one(), -two_re, m2];
    den.resize(degree + 1, T::zero());
    let inv = real_series_inverse(&den);
    let num = [m2, -two_re, T::one()];
    Ok(real_series(&real_conv(&inv, &num, degree), degree))
}

fn real_conv<T: Real>(a: &[T], b: &[T], degree: usize) -> Vec<T> {
    (0..=degree)
        .map(|n| {
            let mut acc = T::zero();
            for r in 0..=n {
                if r < a.len() && n - r < b.len() {
                    acc += a[r] * b[n - r];
                }
            }
            acc
        })
        .collect()
}

fn real_series<T: Real>(c: &[T], degree: usize) -> SliceSeries<T> {
    let q: Vec<_> = c.iter().map(|&x| Quaternion::real(x)).collect();
    SliceSeries::scalar_poly(&q, degree)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor<T> {
    Point { a: Quaternion<T> },
    Sphere { sphere: Sphere<T> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlaschkeProduct<T> {
    pub series: SliceSeries<T>,
    /// Factors in multiplication order, points after their conjugation.
    pub factors: Vec<Factor<T>>,
}

/// Sphere factors first, then `B_{a'_j}^{*mu_j}` with `a'_j = l^{-1} a_j l`,
/// `l` the preceding partial product evaluated at `a_j`.
pub fn blaschke_product<T: Real>(spec: &BlaschkeSpec<T>, degree: usize) -> Result<BlaschkeProduct<T>> {
    spec.validate()?;
    let mut acc = SliceSeries::identity(1, degree);
    let mut factors = Vec::new();
    for s in &spec.spheres {
        let f = blaschke_sphere(s.sphere, degree)?;
        for _ in 0..s.multiplicity {
            acc = acc.star_mul(&f)?;
            factors.push(Factor::Sphere { sphere: s.sphere });
        }
    }
    for (j, p) in spec.points.iter().enumerate() {
        let lambda = acc.eval(p.a)[(0, 0)];
        if lambda.norm() <= lit(1e-10) {
            return Err(Error::DegenerateChoice(j));
        }
        let a = lambda.inverse()? * p.a * lambda;
        let f = blaschke_point(a, degree)?;
        for _ in 0..p.multiplicity {
            acc = acc.star_mul(&f)?;
            factors.push(Factor::Point { a });
        }
    }
    Ok(BlaschkeProduct { series: acc, factors })
}

/// A reciprocal expanded at the origin, valid for `|p|` below the smallest pole modulus.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Reciprocal<T> {
    pub series: SliceSeries<T>,
    pub pole_spheres: Vec<Sphere<T>>,
    pub zero_points: Vec<Quaternion<T>>,
    pub zero_spheres: Vec<Sphere<T>>,
}

impl<T: Real> Reciprocal<T> {
    /// Radius of validity of the expansion.
    pub fn radius(&self) -> T {
        self.pole_spheres
            .iter()
            .fold(T::infinity(), |m, s| num_traits::Float::min(m, s.modulus()))
    }
}

/// `B_a^{-*} = (a/|a|) (a - p)^{-*} * (1 - p conj(a))`: pole sphere `[a]`, zero `1/conj(a)`.
pub fn blaschke_point_reciprocal<T: Real>(a: Quaternion<T>, degree: usize) -> Result<Reciprocal<T>> {
    let m = a.norm();
    check_modulus(m)?;
    let lin = SliceSeries::scalar_poly(&[a, -Quaternion::one()], degree);
    let inv = lin.star_inverse()?;
    let tail = SliceSeries::scalar_poly(&[Quaternion::one(), -a.conj()], degree);
    let series = inv
        .star_mul(&tail)?
        .left_mul(&QMatrix::scalar(a.scale(T::one() / m)))?;
    Ok(Reciprocal {
        series,
        pole_spheres: vec![a.sphere()],
        zero_points: vec![a.conj().inverse()?],
        zero_spheres: Vec::new(),
    })
}

/// `B_[c]^{-*} = (|c|^2 - 2 Re(c) p + p^2)^{-1} (1 - 2 Re(c) p + |c|^2 p^2)`.
pub fn blaschke_sphere_reciprocal<T: Real>(c: Sphere<T>, degree: usize) -> Result<Reciprocal<T>> {
    let m = c.modulus();
    check_modulus(m)?;
    let two_re = lit::<T>(2.0) * c.re;
    let m2 = m * m;
    let mut den = vec![m2, -two_re, T::one()];
    den.resize(degree + 1, T::zero());
    let inv = real_series_inverse(&den);
    let num = [T::one(), -two_re, m2];
    Ok(Reciprocal {
        series: real_series(&real_conv(&inv, &num, degree), degree),
        pole_spheres: vec![c],
        zero_points: Vec::new(),
        zero_spheres: vec![c.reciprocal()],
    })
}

/// Reciprocal of a product: factor reciprocals in reverse order.
pub fn blaschke_product_reciprocal<T: Real>(prod: &BlaschkeProduct<T>) -> Result<Reciprocal<T>> {
    let degree = prod.series.degree();
    let mut out = Reciprocal {
        series: SliceSeries::identity(1, degree),
        pole_spheres: Vec::new(),
        zero_points: Vec::new(),
        zero_spheres: Vec::new(),
    };
    for f in prod.factors.iter().rev() {
        let r = match *f {
            Factor::Point { a } => blaschke_point_reciprocal(a, degree)?,
            Factor::Sphere { sphere } => blaschke_sphere_reciprocal(sphere, degree)?,
        };
        out.series = out.series.star_mul(&r.series)?;
        out.pole_spheres.extend(r.pole_spheres);
        out.zero_points.extend(r.zero_points);
        out.zero_spheres.extend(r.zero_spheres);
    }
    Ok(out)
}

/// `(f * g)(p) = f(p) g(f(p)^{-1} p f(p))`, or `0` when `f(p) = 0`.
fn star_eval<T: Real>(
    fp: Quaternion<T>,
    p: Quaternion<T>,
    g: impl Fn(Quaternion<T>) -> Quaternion<T>,
) -> Quaternion<T> {
    match fp.inverse() {
        Ok(fi) if fp.norm() > fp.tol_zero() => fp * g(fi * p * fp),
        _ => Quaternion::zero(),
    }
}

/// Exact value of `B_a(p)` off the sphere `[1/conj(a)]`.
pub fn blaschke_point_closed_form<T: Real>(a: Quaternion<T>, p: Quaternion<T>) -> Result<Quaternion<T>> {
    let m = a.norm();
    check_modulus(m)?;
    // (1 - p conj(a))^{-*} = (1 - 2 Re(a) p + |a|^2 p^2)^{-1} (1 - p a)
    let one = Quaternion::one();
    let den = one - p.scale(lit::<T>(2.0) * a.re()) + (p * p).scale(m * m);
    let fp = den.inverse()? * (one - p * a);
    let ab = a.conj().scale(T::one() / m);
    Ok(star_eval(fp, p, |q| (a - q) * ab))
}

/// Exact value of `B_a^{-*}(p)` off the pole sphere `[a]`.
pub fn blaschke_point_reciprocal_closed_form<T: Real>(a: Quaternion<T>, p: Quaternion<T>) -> Result<Quaternion<T>> {
    let m = a.norm();
    check_modulus(m)?;
    // (a - p)^{-*} = (|a|^2 - 2 Re(a) p + p^2)^{-1} (conj(a) - p)
    let c = a.scale(T::one() / m);
    // the unit constant sits on the left of a star product: c h(c^{-1} p c)
    let p = c.conj() * p * c;
    let den = Quaternion::real(m * m) - p.scale(lit::<T>(2.0) * a.re()) + p * p;
    let fp = den.inverse().map_err(|_| Error::OnPoleSphere)? * (a.conj() - p);
    let ab = a.conj();
    Ok(c * star_eval(fp, p, |q| Quaternion::one() - q * ab))
}

/// Residual of one prescribed zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub kind: String,
    pub location: [f64; 4],
    pub residual: f64,
}

/// Sample units used to probe sphere zeros.
pub fn probe_units<T: Real>() -> Vec<UnitImaginary<T>> {
    let raw = [
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
        (1.0, 1.0, 0.0),
        (0.0, -1.0, 1.0),
        (1.0, 0.0, -1.0),
        (1.0, 2.0, 3.0),
        (-2.0, 1.0, 0.5),
    ];
    raw.iter()
        .filter_map(|&(x, y, z)| UnitImaginary::new(lit(x), lit(y), lit(z)))
        .collect()
}

/// Evaluates the product at every prescribed point and on every prescribed sphere.
pub fn verify_zeros<T: Real>(spec: &BlaschkeSpec<T>, series: &SliceSeries<T>) -> Vec<ZeroCheck> {
    let mut out = Vec::new();
    for p in &spec.points {
        out.push(ZeroCheck {
            kind: "point".into(),
            location: p.a.to_array(),
            residual: series.eval(p.a)[(0, 0)].norm().to_f64_lossy(),
        });
    }
    for s in &spec.spheres {
        let worst = probe_units::<T>().iter().fold(T::zero(), |m, u| {
            fmax(m, series.eval(s.sphere.representative(u))[(0, 0)].norm())
        });
        out.push(ZeroCheck {
            kind: "sphere".into(),
            location: [s.sphere.re.to_f64_lossy(), s.sphere.im_mag.to_f64_lossy(), 0.0, 0.0],
            residual: worst.to_f64_lossy(),
        });
    }
    out
}

/// Bound on `|B_a(p) - B_a^{(d)}(p)|` for `|p| <= 1`.
pub fn point_tail_bound<T: Real>(a_mod: T, degree: usize) -> T {
    (T::one() + a_mod) * num_traits::Float::powi(a_mod, degree as i32) + lit(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Quaternion<f64>;

    #[test]
    fn point_factor_vanishes_at_a() {
        let a = Q::new(0.2, 0.3, -0.1, 0.25);
        let b = blaschke_point(a, 48).unwrap();
        assert!(b.eval(a)[(0, 0)].norm() < 1e-12);
        assert!(blaschke_point_closed_form(a, a).unwrap().norm() < 1e-15);
    }

    #[test]
    fn point_factor_on_boundary() {
        let a = Q::new(0.3, 0.0, 0.5, -0.2);
        let d = 48;
        let b = blaschke_point(a, d).unwrap();
        let tol = point_tail_bound(a.norm(), d);
        for u in probe_units::<f64>() {
            for k in 0..16 {
                let p = u.exp(k as f64 * 0.4);
                assert!((b.eval(p)[(0, 0)].norm() - 1.0).abs() <= tol);
                assert!((blaschke_point_closed_form(a, p).unwrap().norm() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn real_point_is_mobius() {
        let r = 0.4;
        let b = blaschke_point(Q::real(r), 20).unwrap().scalar_coeffs();
        // (r - p)/(1 - r p) = r + sum_{n>=1} (r^{n+1} - r^{n-1}) p^n
        assert!((b[0] - Q::real(r)).norm() < 1e-15);
        for (n, c) in b.iter().enumerate().skip(1) {
            let want = r.powi(n as i32 + 1) - r.powi(n as i32 - 1);
            assert!((*c - Q::real(want)).norm() < 1e-15, "coefficient {n}");
        }
    }

    #[test]
    fn sphere_factor() {
        let c = Sphere::new(0.3, 0.4);
        let b = blaschke_sphere(c, 48).unwrap();
        assert!(b.max_imag() == 0.0);
        for u in probe_units::<f64>() {
            assert!(b.eval(c.representative(&u))[(0, 0)].norm() < 1e-12);
        }
        // real c: B_[c] = B_c^2
        let r = 0.35;
        let s = blaschke_sphere(Sphere::new(r, 0.0), 30).unwrap();
        let p = blaschke_point(Q::real(r), 30).unwrap();
        assert!(s.max_coeff_dist(&p.star_mul(&p).unwrap()) < 1e-14);
    }

    #[test]
    fn invalid_moduli() {
        assert!(matches!(blaschke_point(Q::zero(), 8), Err(Error::InvalidModulus(_))));
        assert!(matches!(blaschke_point(Q::real(1.0), 8), Err(Error::InvalidModulus(_))));
        assert!(matches!(blaschke_sphere(Sphere::new(0.0, 1.2), 8), Err(Error::InvalidModulus(_))));
    }

    #[test]
    fn product_vanishes_at_every_zero() {
        let spec = BlaschkeSpec {
            points: vec![
                PointZero { a: Q::i().scale(0.5), multiplicity: 1 },
                PointZero { a: Q::j().scale(0.5), multiplicity: 1 },
            ],
            spheres: vec![],
        };
        let prod = blaschke_product(&spec, 48).unwrap();
        for z in verify_zeros(&spec, &prod.series) {
            assert!(z.residual < 1e-8, "{z:?}");
        }
        let one = BlaschkeSpec {
            points: vec![PointZero { a: Q::new(0.1, 0.2, 0.3, 0.0), multiplicity: 1 }],
            spheres: vec![],
        };
        let single = blaschke_product(&one, 20).unwrap().series;
        assert!(single.max_coeff_dist(&blaschke_point(one.points[0].a, 20).unwrap()) < 1e-15);

        let mixed = BlaschkeSpec {
            points: vec![PointZero { a: Q::new(0.1, 0.0, 0.4, 0.2), multiplicity: 2 }],
            spheres: vec![SphereZero { sphere: Sphere::new(-0.2, 0.3), multiplicity: 1 }],
        };
        let prod = blaschke_product(&mixed, 48).unwrap();
        for z in verify_zeros(&mixed, &prod.series) {
            assert!(z.residual < 1e-8, "{z:?}");
        }
    }

    #[test]
    fn invalid_specs() {
        let dup = BlaschkeSpec {
            points: vec![
                PointZero { a: Q::i().scale(0.5), multiplicity: 1 },
                PointZero { a: Q::j().scale(0.5), multiplicity: 1 },
            ],
            spheres: vec![SphereZero { sphere: Sphere::new(0.0, 0.5), multiplicity: 1 }],
        };
        // the points already sit on the listed sphere
        assert!(matches!(blaschke_product(&dup, 48), Err(Error::DegenerateChoice(0))));
        // two zeros on one sphere already kill the whole sphere
        let three = BlaschkeSpec {
            points: vec![
                PointZero { a: Q::i().scale(0.5), multiplicity: 1 },
                PointZero { a: Q::j().scale(0.5), multiplicity: 1 },
                PointZero { a: Q::k().scale(0.5), multiplicity: 1 },
            ],
            spheres: vec![],
        };
        assert!(matches!(blaschke_product(&three, 48), Err(Error::DegenerateChoice(2))));
        let twice = BlaschkeSpec {
            points: vec![
                PointZero { a: Q::i().scale(0.5), multiplicity: 1 },
                PointZero { a: Q::i().scale(0.5), multiplicity: 1 },
            ],
            spheres: vec![],
        };
        assert!(matches!(blaschke_product(&twice, 10), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn reciprocals() {
        let a = Q::new(0.4, -0.3, 0.2, 0.5);
        let b = blaschke_point(a, 30).unwrap();
        let r = blaschke_point_reciprocal(a, 30).unwrap();
        assert!(b.star_mul(&r.series).unwrap().identity_defect() < 1e-10);
        assert!(r.series.star_mul(&b).unwrap().identity_defect() < 1e-10);
        let z = r.zero_points[0];
        assert!(blaschke_point_reciprocal_closed_form(a, z).unwrap().norm() < 1e-14);
        let p = Q::new(0.1, 0.1, 0.0, -0.2);
        let v = blaschke_point_reciprocal_closed_form(a, p).unwrap();
        assert!((v - r.series.eval(p)[(0, 0)]).norm() < 1e-10);

        let c = Sphere::new(0.2, 0.6);
        let s = blaschke_sphere(c, 30).unwrap();
        let sr = blaschke_sphere_reciprocal(c, 30).unwrap();
        assert!(s.star_mul(&sr.series).unwrap().identity_defect() < 1e-10);
    }

    #[test]
    fn product_reciprocal_reverses_order() {
        let spec = BlaschkeSpec {
            points: vec![
                PointZero { a: Q::new(0.3, 0.6, 0.0, 0.0), multiplicity: 1 },
                PointZero { a: Q::new(-0.2, 0.0, 0.1, 0.7), multiplicity: 1 },
            ],
            spheres: vec![],
        };
        let prod = blaschke_product(&spec, 20).unwrap();
        let inv = blaschke_product_reciprocal(&prod).unwrap();
        assert!(prod.series.star_mul(&inv.series).unwrap().identity_defect() < 1e-10);
    }

    #[test]
    fn spec_json() {
        let s: BlaschkeSpec<f64> =
            serde_json::from_str(r#"{"points":[{"a":[0.0,0.5,0.0,0.0]}],"spheres":[{"sphere":{"re":0.1,"im_mag":0.2},"multiplicity":2}]}"#)
                .unwrap();
        assert_eq!(s.points[0].multiplicity, 1);
        assert_eq!(s.degree(), 5);
    }
}

//! S-resolvents and Riesz projectors of quaternionic matrices.

use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{char_operator, complex_singular_values, right_eigen_spheres, QMatrix, SphereMultiplicity};
use crate::quat::{Quaternion, UnitImaginary};
use crate::scalar::{fabs, fsqrt, lit, Real};

/// Circle `center + radius e^{I theta}` in the slice `C_I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec<T> {
    pub center: T,
    pub radius: T,
    pub slice: UnitImaginary<T>,
    pub nodes: usize,
}

impl<T: Real> ContourSpec<T> {
    pub fn new(center: T, radius: T, slice: UnitImaginary<T>, nodes: usize) -> Result<Self> {
        let c = Self {
            center,
            radius,
            slice,
            nodes,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius <= T::zero() || !Float::is_finite(self.radius) {
            return Err(Error::InvalidContour(format!("radius {} must be positive", self.radius)));
        }
        if !Float::is_finite(self.center) {
            return Err(Error::InvalidContour("center must be finite".into()));
        }
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return Err(Error::InvalidContour(format!(
                "node count {} must be even and at least 16",
                self.nodes
            )));
        }
        Ok(())
    }

    /// Quadrature nodes `(s_k, e^{I theta_k})`, ascending in `theta`.
    pub fn nodes(&self) -> impl Iterator<Item = (Quaternion<T>, Quaternion<T>)> + '_ {
        let two_pi = lit::<T>(std::f64::consts::TAU);
        let n = T::from_usize(self.nodes).unwrap();
        (0..self.nodes).map(move |k| {
            let theta = two_pi * T::from_usize(k).unwrap() / n;
            let e = self.slice.exp(theta);
            (Quaternion::real(self.center) + e.scale(self.radius), e)
        })
    }

    /// Distance from the circle to the nearest sphere of `spheres`.
    pub fn gap(&self, spheres: &[SphereMultiplicity<T>]) -> T {
        spheres.iter().fold(T::infinity(), |m, s| {
            let dx = s.sphere.re - self.center;
            let d = fabs(fsqrt(dx * dx + s.sphere.im_mag * s.sphere.im_mag) - self.radius);
            Float::min(m, d)
        })
    }

    pub fn encloses(&self, s: &SphereMultiplicity<T>) -> bool {
        let dx = s.sphere.re - self.center;
        fsqrt(dx * dx + s.sphere.im_mag * s.sphere.im_mag) < self.radius
    }

    fn check_against(&self, t: &QMatrix<T>) -> Result<Vec<SphereMultiplicity<T>>> {
        self.validate()?;
        let spheres = right_eigen_spheres(t)?;
        let gap = self.gap(&spheres);
        if gap <= self.radius * lit(1e-6) {
            return Err(Error::ContourOnSpectrum(gap.to_f64_lossy()));
        }
        Ok(spheres)
    }
}

fn q_inverse<T: Real>(s: Quaternion<T>, t: &QMatrix<T>) -> Result<QMatrix<T>> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch("S-resolvent needs a square matrix".into()));
    }
    char_operator(t, s).inverse().map_err(|e| match e {
        Error::Singular(p) => Error::OnSpectrum(p),
        other => other,
    })
}

fn t_minus_sbar<T: Real>(s: Quaternion<T>, t: &QMatrix<T>) -> QMatrix<T> {
    t - &QMatrix::identity(t.rows()).right_scale(s.conj())
}

/// `-Q_s(T)^{-1} (T - conj(s) I)`.
pub fn s_resolvent_left<T: Real>(s: Quaternion<T>, t: &QMatrix<T>) -> Result<QMatrix<T>> {
    let qi = q_inverse(s, t)?;
    Ok(-&(&qi * &t_minus_sbar(s, t)))
}

/// `-(T - conj(s) I) Q_s(T)^{-1}`.
pub fn s_resolvent_right<T: Real>(s: Quaternion<T>, t: &QMatrix<T>) -> Result<QMatrix<T>> {
    let qi = q_inverse(s, t)?;
    Ok(-&(&t_minus_sbar(s, t) * &qi))
}

/// Frobenius residuals of `S_L s - T S_L = I` and `s S_R - S_R T = I`.
pub fn resolvent_eq_residuals<T: Real>(s: Quaternion<T>, t: &QMatrix<T>) -> Result<(T, T)> {
    let id = QMatrix::identity(t.rows());
    let sl = s_resolvent_left(s, t)?;
    let sr = s_resolvent_right(s, t)?;
    let left = &(&sl.right_scale(s) - &(t * &sl)) - &id;
    let right = &(&sr.left_scale(s) - &(&sr * t)) - &id;
    Ok((left.frobenius_norm(), right.frobenius_norm()))
}

/// Riesz projector `P` and `T_part = T P` by the trapezoid rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RieszProjector<T> {
    pub projector: QMatrix<T>,
    pub tpart: QMatrix<T>,
}

impl<T: Real> RieszProjector<T> {
    pub fn idempotency_residual(&self) -> T {
        (&self.projector * &self.projector).dist(&self.projector)
    }

    pub fn commutator_residual(&self, t: &QMatrix<T>) -> T {
        (t * &self.projector).dist(&(&self.projector * t))
    }

    pub fn tpart_residual(&self, t: &QMatrix<T>) -> T {
        self.tpart.dist(&(t * &self.projector))
    }
}

pub fn riesz_projector<T: Real>(t: &QMatrix<T>, c: &ContourSpec<T>) -> Result<RieszProjector<T>> {
    c.check_against(t)?;
    let n = t.rows();
    let mut p = QMatrix::zeros(n, n);
    let mut tp = QMatrix::zeros(n, n);
    for (s, e) in c.nodes() {
        let term = s_resolvent_left(s, t)?.right_scale(e);
        tp = &tp + &term.right_scale(s);
        p = &p + &term;
    }
    let w = c.radius / T::from_usize(c.nodes).unwrap();
    Ok(RieszProjector {
        projector: p.scale(w),
        tpart: tp.scale(w),
    })
}

/// Residuals of `P S_L(l) l - T_part S_L(l) = P` and `l S_R(l) P - S_R(l) T_part = P`.
pub fn projector_resolvent_identities<T: Real>(
    t: &QMatrix<T>,
    c: &ContourSpec<T>,
    lambda: Quaternion<T>,
) -> Result<(T, T)> {
    let rp = riesz_projector(t, c)?;
    projector_identities_with(t, &rp, lambda)
}

pub fn projector_identities_with<T: Real>(
    t: &QMatrix<T>,
    rp: &RieszProjector<T>,
    lambda: Quaternion<T>,
) -> Result<(T, T)> {
    let p = &rp.projector;
    let sl = s_resolvent_left(lambda, t)?;
    let sr = s_resolvent_right(lambda, t)?;
    let left = &(&(p * &sl).right_scale(lambda) - &(&rp.tpart * &sl)) - p;
    let right = &(&(&sr * p).left_scale(lambda) - &(&sr * &rp.tpart)) - p;
    Ok((left.frobenius_norm(), right.frobenius_norm()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectralSplit<T> {
    pub inside: Vec<SphereMultiplicity<T>>,
    pub outside: Vec<SphereMultiplicity<T>>,
    pub rank_inside: usize,
    pub rank_outside: usize,
}

const PROJECTOR_RANK_TOL: f64 = 1e-7;

fn projector_rank<T: Real>(p: &QMatrix<T>) -> usize {
    let sv = complex_singular_values(&p.to_complex());
    sv.iter().filter(|&&s| s > lit(PROJECTOR_RANK_TOL)).count().div_ceil(2)
}

fn restrict<T: Real>(t: &QMatrix<T>, p: &QMatrix<T>, rank: usize) -> Result<Vec<SphereMultiplicity<T>>> {
    if rank == 0 {
        return Ok(Vec::new());
    }
    let q = p.column_basis(rank, lit(1e-10));
    if q.cols() != rank {
        return Err(Error::RankDeficiency {
            inside: q.cols(),
            outside: 0,
            dim: rank,
        });
    }
    right_eigen_spheres(&(&(&q.adjoint() * t) * &q))
}

/// Spheres of `T` restricted to `ran P` and `ran (I - P)`.
pub fn spectral_split<T: Real>(t: &QMatrix<T>, c: &ContourSpec<T>) -> Result<SpectralSplit<T>> {
    let rp = riesz_projector(t, c)?;
    let p1 = rp.projector;
    let p2 = &QMatrix::identity(t.rows()) - &p1;
    let r1 = projector_rank(&p1);
    let r2 = projector_rank(&p2);
    if r1 + r2 != t.rows() {
        return Err(Error::RankDeficiency {
            inside: r1,
            outside: r2,
            dim: t.rows(),
        });
    }
    Ok(SpectralSplit {
        inside: restrict(t, &p1, r1)?,
        outside: restrict(t, &p2, r2)?,
        rank_inside: r1,
        rank_outside: r2,
    })
}

/// Largest distance from a sphere of one list to the matching sphere of the
/// other, or `None` when the multiplicity-expanded lists differ in length.
pub fn sphere_list_distance<T: Real>(a: &[SphereMultiplicity<T>], b: &[SphereMultiplicity<T>]) -> Option<T> {
    let expand = |l: &[SphereMultiplicity<T>]| {
        let mut v: Vec<_> = l
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.sphere, s.multiplicity))
            .collect();
        v.sort_by(|x, y| (x.re, x.im_mag).partial_cmp(&(y.re, y.im_mag)).unwrap());
        v
    };
    let (ea, eb) = (expand(a), expand(b));
    if ea.len() != eb.len() {
        return None;
    }
    Some(ea.iter().zip(&eb).fold(T::zero(), |m, (x, y)| Float::max(m, x.distance(y))))
}

pub fn is_zero_matrix<T: Real>(m: &QMatrix<T>) -> bool {
    m.as_slice().iter().all(|q| q.is_zero())
}

//! Seeded test data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qmat::QMatrix;
use crate::quat::{Quaternion, Sphere, UnitImaginary};
use crate::scalar::{lit, Real};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unif<T: Real>(r: &mut TestRng, lo: f64, hi: f64) -> T {
    lit(r.random_range(lo..hi))
}

/// Components uniform in `[-scale, scale]`.
pub fn quaternion<T: Real>(r: &mut TestRng, scale: f64) -> Quaternion<T> {
    Quaternion::new(
        unif(r, -scale, scale),
        unif(r, -scale, scale),
        unif(r, -scale, scale),
        unif(r, -scale, scale),
    )
}

/// Uniform in the open ball of the given radius.
pub fn ball_point<T: Real>(r: &mut TestRng, radius: f64) -> Quaternion<T> {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 < 1.0 && n2 > 1e-6 {
            return Quaternion::new(lit(v[0] * radius), lit(v[1] * radius), lit(v[2] * radius), lit(v[3] * radius));
        }
    }
}

pub fn unit_imaginary<T: Real>(r: &mut TestRng) -> UnitImaginary<T> {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 <= 1.0 && n2 > 1e-4 {
            return UnitImaginary::new(lit(v[0]), lit(v[1]), lit(v[2])).expect("nonzero");
        }
    }
}

/// Quaternion of modulus `m` with a random direction.
pub fn on_sphere<T: Real>(r: &mut TestRng, m: f64) -> Quaternion<T> {
    let q: Quaternion<T> = ball_point(r, 1.0);
    q.scale(lit::<T>(m) / q.norm())
}

pub fn matrix<T: Real>(r: &mut TestRng, rows: usize, cols: usize, scale: f64) -> QMatrix<T> {
    QMatrix::from_fn(rows, cols, |_, _| quaternion(r, scale))
}

/// Hermitian matrix with entries of size `scale`.
pub fn hermitian<T: Real>(r: &mut TestRng, n: usize, scale: f64) -> QMatrix<T> {
    let m = matrix::<T>(r, n, n, scale);
    (&m + &m.adjoint()).scale(lit(0.5))
}

/// `T = U diag(q) U^{-1}` with `|q_k|` spaced by at least `gap`, plus its spheres.
pub struct SeparatedCase<T> {
    pub t: QMatrix<T>,
    pub moduli: Vec<f64>,
    pub spheres: Vec<Sphere<T>>,
}

pub fn separated_spectrum<T: Real>(r: &mut TestRng, n: usize, gap: f64) -> SeparatedCase<T> {
    let mut moduli = Vec::with_capacity(n);
    let mut m = r.random_range(0.2..0.4);
    for _ in 0..n {
        moduli.push(m);
        m += gap + r.random_range(0.0..0.15);
    }
    let lambda: Vec<Quaternion<T>> = moduli.iter().map(|&m| on_sphere(r, m)).collect();
    let spheres = lambda.iter().map(|q| q.sphere()).collect();
    let t = similar_to_diagonal(r, &lambda);
    SeparatedCase { t, moduli, spheres }
}

/// `U diag(lambda) U^{-1}` for a random well-conditioned `U`.
pub fn similar_to_diagonal<T: Real>(r: &mut TestRng, lambda: &[Quaternion<T>]) -> QMatrix<T> {
    let n = lambda.len();
    let u = loop {
        let u = &QMatrix::identity(n) + &matrix::<T>(r, n, n, 0.5 / (n as f64).sqrt());
        if u.sigma_min() > lit(0.3) {
            break u;
        }
    };
    &(&u * &QMatrix::diag(lambda)) * &u.inverse().expect("well conditioned")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible() {
        let a: QMatrix<f64> = matrix(&mut rng(7), 3, 3, 1.0);
        let b: QMatrix<f64> = matrix(&mut rng(7), 3, 3, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn separated_case_has_listed_spheres() {
        let mut g = rng(3);
        let case = separated_spectrum::<f64>(&mut g, 5, 0.2);
        let found = crate::qmat::right_eigen_spheres(&case.t).unwrap();
        assert_eq!(found.len(), 5);
        for s in &case.spheres {
            assert!(found.iter().any(|f| f.sphere.distance(s) < 1e-8));
        }
        assert!(case.moduli.windows(2).all(|w| w[1] - w[0] >= 0.2));
    }
}

//! Quaternion arithmetic, slice decomposition and 2-sphere bookkeeping.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{fabs, fsqrt, lit, Real};

/// `x0 + x1 i + x2 j + x3 k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion<T> {
    pub x0: T,
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

impl<T: Real> Quaternion<T> {
    pub fn new(x0: T, x1: T, x2: T, x3: T) -> Self {
        Self { x0, x1, x2, x3 }
    }

    pub fn real(x0: T) -> Self {
        Self::new(x0, T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self::new(lit(x0), lit(x1), lit(x2), lit(x3))
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn re(&self) -> T {
        self.x0
    }

    /// Imaginary part as a quaternion with zero real part.
    pub fn im(&self) -> Self {
        Self::new(T::zero(), self.x1, self.x2, self.x3)
    }

    pub fn im_norm(&self) -> T {
        fsqrt(self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn norm_sqr(&self) -> T {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn norm(&self) -> T {
        fsqrt(self.norm_sqr())
    }

    /// Scale-relative threshold below which a magnitude is treated as zero.
    pub fn tol_zero(&self) -> T {
        lit::<T>(1e-13) * (T::one() + self.norm())
    }

    pub fn is_real(&self) -> bool {
        self.im_norm() <= self.tol_zero()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }

    /// `conj(p) / |p|^2`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm();
        if n <= lit::<T>(1e-13) * (T::one() + n) {
            return Err(Error::ZeroDivision(n.to_f64_lossy()));
        }
        Ok(self.conj().scale(T::one() / self.norm_sqr()))
    }

    /// `p = x0 + I x1` with `x1 = |Im p| >= 0`; `I` is `None` for real `p`.
    pub fn slice_decompose(&self) -> (T, T, Option<UnitImaginary<T>>) {
        let m = self.im_norm();
        if m <= self.tol_zero() {
            (self.x0, m, None)
        } else {
            let inv = T::one() / m;
            let unit = UnitImaginary {
                x1: self.x1 * inv,
                x2: self.x2 * inv,
                x3: self.x3 * inv,
            };
            (self.x0, m, Some(unit))
        }
    }

    pub fn sphere(&self) -> Sphere<T> {
        Sphere::new(self.x0, self.im_norm())
    }

    /// `s^2 - 2 Re(s) s + |s|^2`, identically zero over the quaternions.
    pub fn char_poly_value(&self) -> Self {
        *self * *self - self.scale(lit::<T>(2.0) * self.x0) + Self::real(self.norm_sqr())
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc *= *self;
        }
        acc
    }

    /// `p = z1 + z2 j` with `z1 = x0 + x1 i`, `z2 = x2 + x3 i`.
    pub fn to_complex_pair(&self) -> (Complex<T>, Complex<T>) {
        (Complex::new(self.x0, self.x1), Complex::new(self.x2, self.x3))
    }

    pub fn from_complex_pair(z1: Complex<T>, z2: Complex<T>) -> Self {
        Self::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        (*self - *other).norm() <= tol
    }

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.x0.to_f64_lossy(),
            self.x1.to_f64_lossy(),
            self.x2.to_f64_lossy(),
            self.x3.to_f64_lossy(),
        ]
    }
}

impl<T: Real> Zero for Quaternion<T> {
    fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    fn is_zero(&self) -> bool {
        self.x0.is_zero() && self.x1.is_zero() && self.x2.is_zero() && self.x3.is_zero()
    }
}

impl<T: Real> One for Quaternion<T> {
    fn one() -> Self {
        Self::real(T::one())
    }
}

impl<T: Real> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl<T: Real> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl<T: Real> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.x0 * b.x0 - a.x1 * b.x1 - a.x2 * b.x2 - a.x3 * b.x3,
            a.x0 * b.x1 + a.x1 * b.x0 + a.x2 * b.x3 - a.x3 * b.x2,
            a.x0 * b.x2 - a.x1 * b.x3 + a.x2 * b.x0 + a.x3 * b.x1,
            a.x0 * b.x3 + a.x1 * b.x2 - a.x2 * b.x1 + a.x3 * b.x0,
        )
    }
}

impl<T: Real> AddAssign for Quaternion<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Quaternion<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Quaternion<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> std::iter::Sum for Quaternion<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Real> fmt::Display for Quaternion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.x0, self.x1, self.x2, self.x3)
    }
}

impl<T: Real> Serialize for Quaternion<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Quaternion<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 4]>::deserialize(d)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("non-finite quaternion component"));
        }
        Ok(Self::from_f64(v[0], v[1], v[2], v[3]))
    }
}

/// Element of the 2-sphere of purely imaginary unit quaternions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitImaginary<T> {
    x1: T,
    x2: T,
    x3: T,
}

impl<T: Real> UnitImaginary<T> {
    /// Normalizes `(x1, x2, x3)`; `None` for the zero vector.
    pub fn new(x1: T, x2: T, x3: T) -> Option<Self> {
        let n = fsqrt(x1 * x1 + x2 * x2 + x3 * x3);
        if n <= T::zero() || !n.is_finite() {
            return None;
        }
        Some(Self {
            x1: x1 / n,
            x2: x2 / n,
            x3: x3 / n,
        })
    }

    pub fn i() -> Self {
        Self {
            x1: T::one(),
            x2: T::zero(),
            x3: T::zero(),
        }
    }

    pub fn j() -> Self {
        Self {
            x1: T::zero(),
            x2: T::one(),
            x3: T::zero(),
        }
    }

    pub fn k() -> Self {
        Self {
            x1: T::zero(),
            x2: T::zero(),
            x3: T::one(),
        }
    }

    pub fn components(&self) -> (T, T, T) {
        (self.x1, self.x2, self.x3)
    }

    pub fn as_quaternion(&self) -> Quaternion<T> {
        Quaternion::new(T::zero(), self.x1, self.x2, self.x3)
    }

    /// `x + I y` in the slice through this unit.
    pub fn slice_point(&self, x: T, y: T) -> Quaternion<T> {
        Quaternion::new(x, self.x1 * y, self.x2 * y, self.x3 * y)
    }

    /// `e^{I theta}`.
    pub fn exp(&self, theta: T) -> Quaternion<T> {
        self.slice_point(num_traits::Float::cos(theta), num_traits::Float::sin(theta))
    }
}

/// The 2-sphere `[p] = { Re p + J |Im p| : J unit imaginary }`, a single point
/// when `im_mag == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sphere<T> {
    pub re: T,
    pub im_mag: T,
}

impl<T: Real> Sphere<T> {
    pub fn new(re: T, im_mag: T) -> Self {
        Self {
            re,
            im_mag: fabs(im_mag),
        }
    }

    /// Modulus shared by every element of the sphere.
    pub fn modulus(&self) -> T {
        fsqrt(self.re * self.re + self.im_mag * self.im_mag)
    }

    pub fn is_real(&self) -> bool {
        self.im_mag <= lit::<T>(1e-13) * (T::one() + self.modulus())
    }

    pub fn representative(&self, unit: &UnitImaginary<T>) -> Quaternion<T> {
        unit.slice_point(self.re, self.im_mag)
    }

    /// Complex representative `re + i im_mag` in the upper half plane.
    pub fn to_complex(&self) -> Complex<T> {
        Complex::new(self.re, self.im_mag)
    }

    pub fn contains(&self, q: &Quaternion<T>, tol: T) -> bool {
        self.distance(&q.sphere()) <= tol
    }

    /// Distance between the upper-half-plane representatives.
    pub fn distance(&self, other: &Self) -> T {
        let dr = self.re - other.re;
        let di = self.im_mag - other.im_mag;
        fsqrt(dr * dr + di * di)
    }

    /// Sphere of `1 / q` for any `q` in this sphere.
    pub fn reciprocal(&self) -> Self {
        let m2 = self.re * self.re + self.im_mag * self.im_mag;
        Self::new(self.re / m2, self.im_mag / m2)
    }
}

impl<T: Real> fmt::Display for Sphere<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} + S {}]", self.re, self.im_mag)
    }
}

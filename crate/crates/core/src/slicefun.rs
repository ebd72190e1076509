//! Truncated left slice power series `f(p) = sum p^n a_n` with matrix coefficients.
//!
//! A series of degree `d` knows `a_0 .. a_d`; nothing is assumed beyond.
//! Binary operations truncate to the smaller degree.

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quat::{Quaternion, Sphere, UnitImaginary};
use crate::scalar::{fabs, fmax, lit, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SliceSeries<T> {
    rows: usize,
    cols: usize,
    coeff: Vec<QMatrix<T>>,
}

impl<T: Real> SliceSeries<T> {
    pub fn new(coeff: Vec<QMatrix<T>>) -> Result<Self> {
        let Some(first) = coeff.first() else {
            return Err(Error::ShapeMismatch("series needs at least one coefficient".into()));
        };
        let (rows, cols) = first.shape();
        if coeff.iter().any(|c| c.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch("coefficients differ in shape".into()));
        }
        Ok(Self { rows, cols, coeff })
    }

    /// Polynomial `sum p^n a_n`, zero padded up to `degree`.
    pub fn polynomial(coeff: &[QMatrix<T>], degree: usize) -> Result<Self> {
        let Some(first) = coeff.first() else {
            return Err(Error::ShapeMismatch("polynomial needs at least one coefficient".into()));
        };
        let (r, c) = first.shape();
        let mut v: Vec<_> = coeff.iter().take(degree + 1).cloned().collect();
        v.resize(degree + 1, QMatrix::zeros(r, c));
        Self::new(v)
    }

    /// Scalar polynomial with quaternion coefficients.
    pub fn scalar_poly(coeff: &[Quaternion<T>], degree: usize) -> Self {
        let mats: Vec<_> = coeff.iter().map(|&q| QMatrix::scalar(q)).collect();
        if mats.is_empty() {
            return Self::zero(1, 1, degree);
        }
        Self::polynomial(&mats, degree).expect("scalar shapes agree")
    }

    pub fn constant(m: QMatrix<T>, degree: usize) -> Self {
        let (r, c) = m.shape();
        Self::polynomial(&[m], degree).unwrap_or_else(|_| Self::zero(r, c, degree))
    }

    pub fn zero(rows: usize, cols: usize, degree: usize) -> Self {
        Self {
            rows,
            cols,
            coeff: vec![QMatrix::zeros(rows, cols); degree + 1],
        }
    }

    pub fn identity(n: usize, degree: usize) -> Self {
        Self::constant(QMatrix::identity(n), degree)
    }

    /// The variable `p` as a scalar series.
    pub fn var(degree: usize) -> Self {
        Self::scalar_poly(&[Quaternion::zero(), Quaternion::one()], degree)
    }

    pub fn degree(&self) -> usize {
        self.coeff.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_scalar(&self) -> bool {
        self.shape() == (1, 1)
    }

    pub fn coeffs(&self) -> &[QMatrix<T>] {
        &self.coeff
    }

    pub fn coeff(&self, n: usize) -> &QMatrix<T> {
        &self.coeff[n]
    }

    /// Coefficients of a `1 x 1` series.
    pub fn scalar_coeffs(&self) -> Vec<Quaternion<T>> {
        self.coeff.iter().map(|c| c[(0, 0)]).collect()
    }

    pub fn truncate(&self, degree: usize) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            coeff: self.coeff[..=degree.min(self.degree())].to_vec(),
        }
    }

    fn map(&self, f: impl Fn(&QMatrix<T>) -> QMatrix<T>) -> Self {
        let coeff: Vec<_> = self.coeff.iter().map(f).collect();
        let (rows, cols) = coeff[0].shape();
        Self { rows, cols, coeff }
    }

    pub fn star_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "star product of {:?} and {:?} series",
                self.shape(),
                other.shape()
            )));
        }
        let d = self.degree().min(other.degree());
        let coeff = (0..=d)
            .map(|n| {
                let mut acc = QMatrix::zeros(self.rows, other.cols);
                for r in 0..=n {
                    acc = &acc + &(&self.coeff[r] * &other.coeff[n - r]);
                }
                acc
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            coeff,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(&QMatrix<T>, &QMatrix<T>) -> QMatrix<T>) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let d = self.degree().min(other.degree());
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            coeff: (0..=d).map(|n| f(&self.coeff[n], &other.coeff[n])).collect(),
        })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|c| c.scale(s))
    }

    /// Constant `m` star-multiplied on the left: coefficients `m a_n`.
    pub fn left_mul(&self, m: &QMatrix<T>) -> Result<Self> {
        if m.cols() != self.rows {
            return Err(Error::ShapeMismatch("left factor does not fit".into()));
        }
        Ok(self.map(|c| m * c))
    }

    /// Constant `m` star-multiplied on the right: coefficients `a_n m`.
    pub fn right_mul(&self, m: &QMatrix<T>) -> Result<Self> {
        if m.rows() != self.cols {
            return Err(Error::ShapeMismatch("right factor does not fit".into()));
        }
        Ok(self.map(|c| c * m))
    }

    /// `p f(p)`: shifts coefficients up, dropping the top one.
    pub fn shift(&self) -> Self {
        let mut coeff = vec![QMatrix::zeros(self.rows, self.cols)];
        coeff.extend(self.coeff[..self.degree()].iter().cloned());
        Self {
            rows: self.rows,
            cols: self.cols,
            coeff,
        }
    }

    pub fn star_pow(&self, k: usize) -> Result<Self> {
        let mut acc = Self::identity(self.rows, self.degree());
        for _ in 0..k {
            acc = acc.star_mul(self)?;
        }
        Ok(acc)
    }

    /// `f^c`, conjugated coefficients.
    pub fn series_conj(&self) -> Self {
        self.map(|c| c.conj_entries())
    }

    /// `f^s = f^c * f` for a scalar series; its coefficients are real.
    pub fn series_sym(&self) -> Result<Self> {
        if !self.is_scalar() {
            return Err(Error::ShapeMismatch("symmetrization needs a scalar series".into()));
        }
        self.series_conj().star_mul(self)
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> T {
        self.coeff
            .iter()
            .flat_map(|c| c.as_slice().iter())
            .fold(T::zero(), |m, q| fmax(m, q.im_norm()))
    }

    /// Slice reciprocal `(f^s)^{-1} f^c` of a scalar series.
    pub fn star_inverse(&self) -> Result<Self> {
        if !self.is_scalar() {
            return Err(Error::ShapeMismatch("slice reciprocal needs a scalar series".into()));
        }
        let a0 = self.coeff[0][(0, 0)];
        if a0.norm() <= a0.tol_zero() {
            return Err(Error::NotInvertibleAtZero);
        }
        let fs: Vec<T> = self.series_sym()?.scalar_coeffs().iter().map(|q| q.re()).collect();
        let inv = real_series_inverse(&fs);
        let inv = Self::scalar_poly(
            &inv.iter().map(|&x| Quaternion::real(x)).collect::<Vec<_>>(),
            self.degree(),
        );
        inv.star_mul(&self.series_conj())
    }

    /// Formal inverse of a square matrix series via `g_0 = a_0^{-1}`,
    /// `g_n = -a_0^{-1} sum_{r>=1} a_r g_{n-r}`.
    pub fn star_inverse_matrix(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("matrix star inverse needs square coefficients".into()));
        }
        let a0_inv = self.coeff[0].inverse().map_err(|_| Error::NotInvertibleAtZero)?;
        let mut g: Vec<QMatrix<T>> = vec![a0_inv.clone()];
        for n in 1..=self.degree() {
            let mut acc = QMatrix::zeros(self.rows, self.cols);
            for r in 1..=n {
                acc = &acc + &(&self.coeff[r] * &g[n - r]);
            }
            g.push(-&(&a0_inv * &acc));
        }
        Self::new(g)
    }

    /// `f(p) = sum p^n a_n` by Horner's rule.
    pub fn eval(&self, p: Quaternion<T>) -> QMatrix<T> {
        let mut acc = QMatrix::zeros(self.rows, self.cols);
        for c in self.coeff.iter().rev() {
            acc = c + &acc.left_scale(p);
        }
        acc
    }

    /// Largest coefficient distance over the common degree.
    pub fn max_coeff_dist(&self, other: &Self) -> T {
        self.coeff
            .iter()
            .zip(&other.coeff)
            .fold(T::zero(), |m, (a, b)| fmax(m, (a - b).max_abs()))
    }

    /// Largest deviation from the identity series.
    pub fn identity_defect(&self) -> T {
        let id = Self::identity(self.rows, self.degree());
        self.max_coeff_dist(&id)
    }

    /// Coefficientwise adjoint as a right series `sum a_n^* p^n`.
    pub fn adjoint_series(&self) -> RightSeries<T> {
        RightSeries {
            coeff: self.coeff.iter().map(|c| c.adjoint()).collect(),
        }
    }

    /// `(alpha, beta)` with `f(x + J y) = alpha + J beta` for every unit `J`.
    pub fn slice_parts(&self, x: T, y: T) -> (QMatrix<T>, QMatrix<T>) {
        slice_parts_of(|p| Ok(self.eval(p)), x, y).expect("series evaluation is total")
    }

    /// The point of the sphere where a scalar series vanishes, with the
    /// residual `|f(q)|`.  When `f` vanishes on the whole sphere the
    /// representative through `i` is returned.
    pub fn sphere_zero(&self, sphere: &Sphere<T>) -> Result<(Quaternion<T>, T)> {
        if !self.is_scalar() {
            return Err(Error::ShapeMismatch("sphere zeros need a scalar series".into()));
        }
        sphere_zero_of(|p| Ok(self.eval(p)[(0, 0)]), sphere)
    }
}

/// Slice parts of any left slice function given by its values.
pub fn slice_parts_of<T: Real>(
    f: impl Fn(Quaternion<T>) -> Result<QMatrix<T>>,
    x: T,
    y: T,
) -> Result<(QMatrix<T>, QMatrix<T>)> {
    let i = UnitImaginary::i();
    let fp = f(i.slice_point(x, y))?;
    let fm = f(i.slice_point(x, -y))?;
    let alpha = (&fp + &fm).scale(lit(0.5));
    let beta = (&fp - &fm).left_scale(-Quaternion::i()).scale(lit(0.5));
    Ok((alpha, beta))
}

/// Zero of a scalar left slice function on `sphere`, with its residual.
pub fn sphere_zero_of<T: Real>(
    f: impl Fn(Quaternion<T>) -> Result<Quaternion<T>>,
    sphere: &Sphere<T>,
) -> Result<(Quaternion<T>, T)> {
    let (alpha, beta) = slice_parts_of(|p| Ok(QMatrix::scalar(f(p)?)), sphere.re, sphere.im_mag)?;
    let (a, b) = (alpha[(0, 0)], beta[(0, 0)]);
    let q = match b.inverse() {
        Ok(bi) if b.norm() > lit::<T>(1e-12) * (T::one() + a.norm()) => {
            let j = -(a * bi);
            match UnitImaginary::new(j.x1, j.x2, j.x3) {
                Some(u) => sphere.representative(&u),
                None => sphere.representative(&UnitImaginary::i()),
            }
        }
        _ => sphere.representative(&UnitImaginary::i()),
    };
    Ok((q, f(q)?.norm()))
}

/// `1 / c(p)` for a real series with `c_0 != 0`.
pub fn real_series_inverse<T: Real>(c: &[T]) -> Vec<T> {
    let mut b = vec![T::one() / c[0]];
    for n in 1..c.len() {
        let mut acc = T::zero();
        for r in 1..=n {
            acc += c[r] * b[n - r];
        }
        b.push(-acc / c[0]);
    }
    b
}

/// `sum p^n A^n`, the expansion of `(I - p A)^{-*}`.
pub fn star_resolvent<T: Real>(a: &QMatrix<T>, degree: usize) -> Result<SliceSeries<T>> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("star resolvent needs a square matrix".into()));
    }
    let mut coeff = vec![QMatrix::identity(a.rows())];
    for n in 1..=degree {
        coeff.push(&coeff[n - 1] * a);
    }
    SliceSeries::new(coeff)
}

/// `(I - conj(p) A) (|p|^2 A^2 - 2 Re(p) A + I)^{-1}`.
pub fn star_resolvent_eval<T: Real>(a: &QMatrix<T>, p: Quaternion<T>) -> Result<QMatrix<T>> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("star resolvent needs a square matrix".into()));
    }
    let n = a.rows();
    let q = a.real_poly(&[T::one(), -lit::<T>(2.0) * p.re(), p.norm_sqr()]);
    let num = &QMatrix::identity(n) - &a.left_scale(p.conj());
    let qi = q.inverse()?;
    Ok(&num * &qi)
}

/// Right series `sum b_n p^n`, coefficients on the left of the powers.
#[derive(Clone, Debug, PartialEq)]
pub struct RightSeries<T> {
    pub coeff: Vec<QMatrix<T>>,
}

impl<T: Real> RightSeries<T> {
    pub fn degree(&self) -> usize {
        self.coeff.len() - 1
    }

    /// Right star product, again a coefficient convolution.
    pub fn star_mul_r(&self, other: &Self) -> Result<Self> {
        let d = self.degree().min(other.degree());
        let mut coeff = Vec::with_capacity(d + 1);
        for n in 0..=d {
            let mut acc = self.coeff[0].try_mul(&other.coeff[n])?;
            for r in 1..=n {
                acc = &acc + &(&self.coeff[r] * &other.coeff[n - r]);
            }
            coeff.push(acc);
        }
        Ok(Self { coeff })
    }

    pub fn eval(&self, p: Quaternion<T>) -> QMatrix<T> {
        let (r, c) = self.coeff[0].shape();
        let mut acc = QMatrix::zeros(r, c);
        for b in self.coeff.iter().rev() {
            acc = b + &acc.right_scale(p);
        }
        acc
    }

    pub fn adjoint_series(&self) -> SliceSeries<T> {
        SliceSeries::new(self.coeff.iter().map(|c| c.adjoint()).collect()).expect("nonempty")
    }

    pub fn max_coeff_dist(&self, other: &Self) -> T {
        self.coeff
            .iter()
            .zip(&other.coeff)
            .fold(T::zero(), |m, (a, b)| fmax(m, (a - b).max_abs()))
    }
}

/// Geometric-tail bound `|q|^{d+1} / (1 - |q|)` for `|q| < 1`.
pub fn geometric_tail<T: Real>(q: T, degree: usize) -> T {
    let q = fabs(q);
    if q >= T::one() {
        return T::infinity();
    }
    num_traits::Float::powi(q, degree as i32 + 1) / (T::one() - q)
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct SeriesJson<T> {
    shape: [usize; 2],
    degree: usize,
    coeff: Vec<QMatrix<T>>,
}

impl<T: Real> Serialize for SliceSeries<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            shape: [self.rows, self.cols],
            degree: self.degree(),
            coeff: self.coeff.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SliceSeries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SeriesJson::<T>::deserialize(d)?;
        if raw.coeff.len() != raw.degree + 1 {
            return Err(D::Error::custom(format!(
                "degree {} needs {} coefficients, got {}",
                raw.degree,
                raw.degree + 1,
                raw.coeff.len()
            )));
        }
        let s = SliceSeries::new(raw.coeff).map_err(D::Error::custom)?;
        if s.shape() != (raw.shape[0], raw.shape[1]) {
            return Err(D::Error::custom("shape does not match coefficients"));
        }
        Ok(s)
    }
}

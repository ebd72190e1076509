//! Dense quaternionic matrices.
//!
//! Spectral work goes through the complex adjoint embedding
//! `M = M1 + M2 j  ->  [[M1, M2], [-conj(M2), conj(M1)]]`, which is a unital
//! *-homomorphism `H^{n x m} -> C^{2n x 2m}`.  A quaternion column `v = v1 + v2 j`
//! is carried to `[v1; -conj(v2)]`, so that `chi(M) phi(v) = phi(M v)` and
//! `phi(v z) = phi(v) z` for complex `z`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quat::{Quaternion, Sphere};
use crate::scalar::{fabs, fmax, fsqrt, lit, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

const EIG_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion<T>>,
}

impl<T: Real> QMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Quaternion::one()
            } else {
                Quaternion::zero()
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Quaternion<T>>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(n, m, rows.iter().flatten().copied().collect())
    }

    pub fn diag(entries: &[Quaternion<T>]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| if r == c { entries[r] } else { Quaternion::zero() })
    }

    pub fn real_diag(entries: &[T]) -> Self {
        let q: Vec<_> = entries.iter().map(|&x| Quaternion::real(x)).collect();
        Self::diag(&q)
    }

    pub fn scalar(q: Quaternion<T>) -> Self {
        Self::diag(&[q])
    }

    pub fn column(entries: &[Quaternion<T>]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Quaternion<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj_entries(&self) -> Self {
        self.map(|q| q.conj())
    }

    pub fn map(&self, f: impl Fn(Quaternion<T>) -> Quaternion<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| f(q)).collect(),
        }
    }

    /// `q M`, every entry multiplied on the left.
    pub fn left_scale(&self, q: Quaternion<T>) -> Self {
        self.map(|x| q * x)
    }

    /// `M q`, every entry multiplied on the right.
    pub fn right_scale(&self, q: Quaternion<T>) -> Self {
        self.map(|x| x * q)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn frobenius_norm(&self) -> T {
        fsqrt(self.data.iter().fold(T::zero(), |a, q| a + q.norm_sqr()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, q| fmax(a, q.norm()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &Self, f: impl Fn(Quaternion<T>, Quaternion<T>) -> Quaternion<T>) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Frobenius distance; panics on shape mismatch.
    pub fn dist(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.dist(&self.adjoint()) <= tol
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    pub fn col(&self, c: usize) -> Self {
        self.block(0, c, self.rows, 1)
    }

    pub fn hstack(blocks: &[&Self]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::ShapeMismatch("hstack row counts differ".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            out.set_block(0, c0, b);
            c0 += b.cols;
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::ShapeMismatch("vstack column counts differ".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            out.set_block(r0, 0, b);
            r0 += b.rows;
        }
        Ok(out)
    }

    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `c0 I + c1 M + c2 M^2 + ...` with real coefficients.
    pub fn real_poly(&self, coeffs: &[T]) -> Self {
        let mut acc = Self::zeros(self.rows, self.cols);
        for &c in coeffs.iter().rev() {
            acc = &(&acc * self) + &Self::identity(self.rows).scale(c);
        }
        acc
    }

    /// The complex adjoint `chi(M)`.
    pub fn to_complex(&self) -> CMatrix<T> {
        let (n, m) = (self.rows, self.cols);
        let mut out = CMatrix::<T>::zeros(2 * n, 2 * m);
        for r in 0..n {
            for c in 0..m {
                let (z1, z2) = self[(r, c)].to_complex_pair();
                out[(r, c)] = z1;
                out[(r, m + c)] = z2;
                out[(n + r, c)] = -z2.conj();
                out[(n + r, m + c)] = z1.conj();
            }
        }
        out
    }

    /// Reads `M` back from the top block row of a (structured) `chi(M)`.
    pub fn from_complex(z: &CMatrix<T>) -> Result<Self> {
        if !z.nrows().is_multiple_of(2) || !z.ncols().is_multiple_of(2) {
            return Err(Error::ShapeMismatch("complex adjoint must have even dimensions".into()));
        }
        let (n, m) = (z.nrows() / 2, z.ncols() / 2);
        Ok(Self::from_fn(n, m, |r, c| Quaternion::from_complex_pair(z[(r, c)], z[(r, m + c)])))
    }

    /// `X` with `M X = rhs`, solved on the complex adjoint.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || self.rows != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "solve {:?} with rhs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let y = complex_solve(self.to_complex(), &rhs.to_complex())?;
        Self::from_complex(&y)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// Singular values of `M`, descending (each appears twice in `chi(M)`).
    pub fn singular_values(&self) -> Vec<T> {
        let sv = complex_singular_values(&self.to_complex());
        sv.into_iter().step_by(2).collect()
    }

    pub fn sigma_min(&self) -> T {
        let sv = complex_singular_values(&self.to_complex());
        sv.last().copied().unwrap_or(T::zero())
    }

    /// Quaternionic rank: singular values of `chi(M)` above `rel_tol * sigma_max`, halved.
    pub fn rank(&self, rel_tol: T) -> usize {
        let sv = complex_singular_values(&self.to_complex());
        let Some(&top) = sv.first() else { return 0 };
        if top <= T::zero() {
            return 0;
        }
        let count = sv.iter().filter(|&&s| s > rel_tol * top).count();
        count.div_ceil(2)
    }

    /// Orthonormal basis of the right column span, built by pivoted
    /// Gram-Schmidt; stops after `max_rank` vectors or when every residual
    /// falls below `rel_tol` times the largest column norm.
    pub fn column_basis(&self, max_rank: usize, rel_tol: T) -> Self {
        let cols: Vec<Vec<Quaternion<T>>> = (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)]).collect())
            .collect();
        let basis = pivoted_gram_schmidt(cols, max_rank, rel_tol);
        vectors_to_matrix(self.rows, &basis)
    }

    pub fn char_operator(&self, s: Quaternion<T>) -> Self {
        char_operator(self, s)
    }
}

impl<T: Real> Index<(usize, usize)> for QMatrix<T> {
    type Output = Quaternion<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion<T> {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for QMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion<T> {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mul for &QMatrix<T> {
    type Output = QMatrix<T>;
    fn mul(self, rhs: Self) -> QMatrix<T> {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Real> Add for &QMatrix<T> {
    type Output = QMatrix<T>;
    fn add(self, rhs: Self) -> QMatrix<T> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<T: Real> Sub for &QMatrix<T> {
    type Output = QMatrix<T>;
    fn sub(self, rhs: Self) -> QMatrix<T> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<T: Real> Neg for &QMatrix<T> {
    type Output = QMatrix<T>;
    fn neg(self) -> QMatrix<T> {
        self.map(|q| -q)
    }
}

impl<T: Real> fmt::Display for QMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("({})", self[(r, c)])).collect();
            writeln!(f, "{}", row.join("  "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct QMatrixJson<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion<T>>,
}

impl<T: Real> Serialize for QMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for QMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = QMatrixJson::<T>::deserialize(d)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(serde::de::Error::custom("matrix dimensions must be positive"));
        }
        QMatrix::new(raw.rows, raw.cols, raw.entries).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// free functions mirroring the operation names

pub fn complex_adjoint<T: Real>(m: &QMatrix<T>) -> CMatrix<T> {
    m.to_complex()
}

pub fn solve<T: Real>(m: &QMatrix<T>, rhs: &QMatrix<T>) -> Result<QMatrix<T>> {
    m.solve(rhs)
}

/// `Q_s(T) = T^2 - 2 Re(s) T + |s|^2 I`.
pub fn char_operator<T: Real>(t: &QMatrix<T>, s: Quaternion<T>) -> QMatrix<T> {
    t.real_poly(&[s.norm_sqr(), -lit::<T>(2.0) * s.re(), T::one()])
}

/// `|Q_s(T) v| / |v|`; vanishes whenever `T v = v s`.
pub fn s_eigencheck<T: Real>(t: &QMatrix<T>, v: &QMatrix<T>, s: Quaternion<T>) -> Result<T> {
    let nv = v.frobenius_norm();
    if nv <= T::zero() {
        return Err(Error::ZeroVector);
    }
    let qv = char_operator(t, s).try_mul(v)?;
    Ok(qv.frobenius_norm() / nv)
}

// ---------------------------------------------------------------------------
// vectors

pub(crate) fn qdot<T: Real>(u: &[Quaternion<T>], v: &[Quaternion<T>]) -> Quaternion<T> {
    // v* u
    u.iter().zip(v).map(|(&a, &b)| b.conj() * a).sum()
}

pub(crate) fn qnorm<T: Real>(u: &[Quaternion<T>]) -> T {
    fsqrt(u.iter().fold(T::zero(), |a, q| a + q.norm_sqr()))
}

/// Pivoted Gram-Schmidt over the right module `H^n`.
pub(crate) fn pivoted_gram_schmidt<T: Real>(
    mut cands: Vec<Vec<Quaternion<T>>>,
    max_rank: usize,
    rel_tol: T,
) -> Vec<Vec<Quaternion<T>>> {
    let scale = cands.iter().fold(T::zero(), |a, c| fmax(a, qnorm(c)));
    let mut basis: Vec<Vec<Quaternion<T>>> = Vec::new();
    if scale <= T::zero() {
        return basis;
    }
    while basis.len() < max_rank {
        let (idx, best) = cands
            .iter()
            .enumerate()
            .map(|(i, c)| (i, qnorm(c)))
            .fold((usize::MAX, T::zero()), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if idx == usize::MAX || best <= rel_tol * scale {
            break;
        }
        let mut q = cands.swap_remove(idx);
        // re-orthogonalize once for stability
        for b in &basis {
            let h = qdot(&q, b);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= *bi * h;
            }
        }
        let n = qnorm(&q);
        if n <= rel_tol * scale {
            continue;
        }
        // right unit scaling so the largest entry is real positive
        let lead = q.iter().fold(Quaternion::zero(), |m: Quaternion<T>, x| if x.norm() > m.norm() { *x } else { m });
        let phase = lead.conj().scale(T::one() / (lead.norm() * n));
        q.iter_mut().for_each(|x| *x *= phase);
        for c in cands.iter_mut() {
            let h = qdot(c, &q);
            for (ci, qi) in c.iter_mut().zip(&q) {
                *ci -= *qi * h;
            }
        }
        basis.push(q);
    }
    basis
}

pub(crate) fn vectors_to_matrix<T: Real>(rows: usize, vecs: &[Vec<Quaternion<T>>]) -> QMatrix<T> {
    QMatrix::from_fn(rows, vecs.len(), |r, c| vecs[c][r])
}

/// Quaternion vector represented by the complex vector `[w1; w2]` of length `2n`.
pub(crate) fn complex_to_qvec<T: Real>(w: &[Complex<T>]) -> Vec<Quaternion<T>> {
    let n = w.len() / 2;
    (0..n)
        .map(|r| Quaternion::from_complex_pair(w[r], -w[n + r].conj()))
        .collect()
}

// ---------------------------------------------------------------------------
// complex back end

pub(crate) fn complex_solve<T: Real>(a: CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let scale = a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let scale = fsqrt(scale);
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).fold(T::infinity(), |m, i| num_traits::Float::min(m, u[(i, i)].norm()));
    if min_pivot.is_nan() || min_pivot <= lit::<T>(1e-12) * scale {
        return Err(Error::Singular(min_pivot.to_f64_lossy()));
    }
    lu.solve(b).ok_or(Error::Singular(min_pivot.to_f64_lossy()))
}

/// Singular values sorted descending.
pub(crate) fn complex_singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    if a.is_empty() {
        return Vec::new();
    }
    let svd = SVD::new(a.clone(), false, false);
    let mut sv: Vec<T> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Right singular vectors paired with singular values, ascending.
pub(crate) fn complex_null_vectors<T: Real>(a: &CMatrix<T>) -> Vec<(T, Vec<Complex<T>>)> {
    let n = a.ncols();
    // pad to square so that the full right basis is available
    let sq = if a.nrows() < n {
        let mut p = CMatrix::<T>::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(sq, false, true);
    let vt = svd.v_t.expect("requested V");
    let mut out: Vec<(T, Vec<Complex<T>>)> = (0..vt.nrows())
        .map(|k| {
            let v: Vec<Complex<T>> = vt.row(k).iter().map(|z| z.conj()).collect();
            (svd.singular_values[k], v)
        })
        .collect();
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    out
}

pub(crate) fn complex_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(a.clone(), T::default_epsilon(), EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

// ---------------------------------------------------------------------------
// Hermitian eigenstructure

/// Inertia `(positive, negative, zero)` of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Clone, Debug)]
pub struct HermEig<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    pub signature: Signature,
    /// Unitary `U` with `H = U diag(eigenvalues) U*`.
    pub unitary: QMatrix<T>,
    /// Invertible `V` with `H = V diag(I_t, -I_r, 0_s) V*`.
    pub congruence: QMatrix<T>,
    pub tol: T,
}

impl<T: Real> HermEig<T> {
    /// `diag(I_t, -I_r, 0_s)`.
    pub fn sigma_tr(&self) -> QMatrix<T> {
        let s = self.signature;
        let mut d = vec![T::one(); s.positive];
        d.extend(std::iter::repeat_n(-T::one(), s.negative));
        d.extend(std::iter::repeat_n(T::zero(), s.zero));
        QMatrix::real_diag(&d)
    }

    pub fn congruence_residual(&self, h: &QMatrix<T>) -> T {
        let v = &self.congruence;
        h.dist(&(&(v * &self.sigma_tr()) * &v.adjoint()))
    }
}

/// Eigen-decomposition of a quaternionic Hermitian matrix; eigenvalues with
/// `|lambda| <= rel_tol * max|lambda|` count as zero in the signature.
pub fn herm_eig<T: Real>(h: &QMatrix<T>, rel_tol: T) -> Result<HermEig<T>> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch("Hermitian matrix must be square".into()));
    }
    let n = h.rows();
    let asym = h.dist(&h.adjoint());
    if asym > lit::<T>(1e-10) * fmax(T::one(), h.frobenius_norm()) {
        return Err(Error::NotHermitian(asym.to_f64_lossy()));
    }
    let sym = (h + &h.adjoint()).scale(lit(0.5));
    let eig = SymmetricEigen::try_new(sym.to_complex(), T::default_epsilon(), EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues: Vec<T> = (0..n)
        .map(|k| (eig.eigenvalues[order[2 * k]] + eig.eigenvalues[order[2 * k + 1]]) * lit(0.5))
        .collect();

    let cands: Vec<Vec<Quaternion<T>>> = order
        .iter()
        .map(|&i| {
            let w: Vec<Complex<T>> = eig.eigenvectors.column(i).iter().copied().collect();
            complex_to_qvec(&w)
        })
        .collect();
    let basis = pivoted_gram_schmidt(cands, n, lit(1e-6));
    if basis.len() != n {
        return Err(Error::NoConvergence);
    }
    let mut with_rq: Vec<(T, Vec<Quaternion<T>>)> = basis
        .into_iter()
        .map(|u| {
            let hu = (&sym * &QMatrix::column(&u)).data;
            (qdot(&hu, &u).re(), u)
        })
        .collect();
    with_rq.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let vecs: Vec<Vec<Quaternion<T>>> = with_rq.iter().map(|(_, u)| u.clone()).collect();
    let unitary = vectors_to_matrix(n, &vecs);

    let top = eigenvalues.iter().fold(T::zero(), |a, &x| fmax(a, fabs(x)));
    let tol = rel_tol * top;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut zer = Vec::new();
    for (k, &lam) in eigenvalues.iter().enumerate() {
        if lam > tol {
            pos.push(k);
        } else if lam < -tol {
            neg.push(k);
        } else {
            zer.push(k);
        }
    }
    let signature = Signature {
        positive: pos.len(),
        negative: neg.len(),
        zero: zer.len(),
    };
    let mut congruence = QMatrix::zeros(n, n);
    for (c, &k) in pos.iter().chain(&neg).chain(&zer).enumerate() {
        let lam = eigenvalues[k];
        let s = if lam > tol || lam < -tol { fsqrt(fabs(lam)) } else { T::one() };
        for r in 0..n {
            congruence[(r, c)] = unitary[(r, k)].scale(s);
        }
    }
    Ok(HermEig {
        eigenvalues,
        signature,
        unitary,
        congruence,
        tol,
    })
}

// ---------------------------------------------------------------------------
// right eigenvalues

/// An eigen-sphere of `T` together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SphereMultiplicity<T> {
    pub sphere: Sphere<T>,
    pub multiplicity: usize,
}

fn cluster_spheres<T: Real>(points: &[Sphere<T>], rel: T) -> Vec<(Sphere<T>, usize)> {
    let mut clusters: Vec<(T, T, usize)> = Vec::new();
    for p in points {
        let tol = rel * (T::one() + p.modulus());
        let hit = clusters.iter_mut().find(|(re, im, cnt)| {
            let c = Sphere::new(*re / T::from_usize(*cnt).unwrap(), *im / T::from_usize(*cnt).unwrap());
            c.distance(p) <= tol
        });
        match hit {
            Some(c) => {
                c.0 += p.re;
                c.1 += p.im_mag;
                c.2 += 1;
            }
            None => clusters.push((p.re, p.im_mag, 1)),
        }
    }
    let mut out: Vec<(Sphere<T>, usize)> = clusters
        .into_iter()
        .map(|(re, im, cnt)| {
            let k = T::from_usize(cnt).unwrap();
            (Sphere::new(re / k, im / k), cnt)
        })
        .collect();
    out.sort_by(|a, b| {
        (a.0.re, a.0.im_mag)
            .partial_cmp(&(b.0.re, b.0.im_mag))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// Groups the `2n` eigenvalues of `chi(T)` into spheres; each sphere absorbs a
/// conjugate pair, so multiplicities add up to `n`.
pub fn right_eigen_spheres<T: Real>(t: &QMatrix<T>) -> Result<Vec<SphereMultiplicity<T>>> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch("right eigenvalues need a square matrix".into()));
    }
    let eig = complex_eigenvalues(&t.to_complex())?;
    let points: Vec<Sphere<T>> = eig.iter().map(|z| Sphere::new(z.re, z.im)).collect();
    let mut rel = lit::<T>(1e-8);
    loop {
        let clusters = cluster_spheres(&points, rel);
        let all_even = clusters.iter().all(|(_, c)| c % 2 == 0);
        if all_even || rel > lit(1e-4) {
            return Ok(clusters
                .into_iter()
                .map(|(sphere, c)| SphereMultiplicity {
                    sphere,
                    multiplicity: c.div_ceil(2),
                })
                .collect());
        }
        rel *= lit(10.0);
    }
}

/// Right eigenvectors `T v = v s` for one eigen-sphere.
#[derive(Clone, Debug)]
pub struct RightEigenspace<T> {
    pub sphere: Sphere<T>,
    pub multiplicity: usize,
    /// `re + i im_mag`, the eigenvalue matched by `vectors`.
    pub eigenvalue: Quaternion<T>,
    /// Columns are eigenvectors for `eigenvalue`.
    pub vectors: QMatrix<T>,
    /// Number of independent eigenvectors found at the null-space tolerance.
    pub geometric_multiplicity: usize,
}

/// Eigenvectors recovered from null vectors of `chi(T) - lambda I`.
pub fn right_eigenpairs<T: Real>(t: &QMatrix<T>) -> Result<Vec<RightEigenspace<T>>> {
    let spheres = right_eigen_spheres(t)?;
    let chi = t.to_complex();
    let n = t.rows();
    let scale = T::one() + complex_singular_values(&chi).first().copied().unwrap_or(T::zero());
    let null_tol = lit::<T>(1e-6) * scale;
    let mut out = Vec::with_capacity(spheres.len());
    for sm in spheres {
        let real = sm.sphere.im_mag <= lit::<T>(1e-6) * (T::one() + sm.sphere.modulus());
        let lambda = if real {
            Complex::new(sm.sphere.re, T::zero())
        } else {
            sm.sphere.to_complex()
        };
        let mut shifted = chi.clone();
        for i in 0..2 * n {
            shifted[(i, i)] -= lambda;
        }
        let nulls = complex_null_vectors(&shifted);
        let m = sm.multiplicity;
        let (vecs, geometric) = if real {
            let take = (2 * m).min(nulls.len());
            let cands: Vec<_> = nulls[..take].iter().map(|(_, w)| complex_to_qvec(w)).collect();
            let small = nulls.iter().filter(|(s, _)| *s <= null_tol).count();
            (pivoted_gram_schmidt(cands, m, lit(1e-6)), small / 2)
        } else {
            let take = m.min(nulls.len());
            let v: Vec<_> = nulls[..take]
                .iter()
                .map(|(_, w)| {
                    let q = complex_to_qvec(w);
                    let inv = T::one() / qnorm(&q);
                    q.into_iter().map(|x| x.scale(inv)).collect()
                })
                .collect();
            let small = nulls.iter().filter(|(s, _)| *s <= null_tol).count();
            (v, small)
        };
        out.push(RightEigenspace {
            sphere: sm.sphere,
            multiplicity: m,
            eigenvalue: Quaternion::new(lambda.re, lambda.im, T::zero(), T::zero()),
            vectors: vectors_to_matrix(n, &vecs),
            geometric_multiplicity: geometric,
        });
    }
    Ok(out)
}

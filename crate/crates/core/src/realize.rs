//! Realizations `S(p) = D + p C * (I - pA)^{-*} B`, Stein equations,
//! J-unitary completion and the Krein-Langer factorization.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{complex_eigenvalues, complex_solve, herm_eig, right_eigenpairs, QMatrix, SphereMultiplicity};
use crate::quat::{Quaternion, Sphere};
use crate::scalar::{fabs, fmax, lit, Real};
use crate::slicefun::{sphere_zero_of, SliceSeries};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Realization<T> {
    pub a: QMatrix<T>,
    pub b: QMatrix<T>,
    pub c: QMatrix<T>,
    pub d: QMatrix<T>,
    pub sigma: QMatrix<T>,
    /// Hermitian solution `P` of the Stein equation, when known.
    #[serde(default)]
    pub gram: Option<QMatrix<T>>,
}

impl<T: Real> Realization<T> {
    pub fn new(a: QMatrix<T>, b: QMatrix<T>, c: QMatrix<T>, d: QMatrix<T>, sigma: QMatrix<T>) -> Result<Self> {
        let r = Self {
            a,
            b,
            c,
            d,
            sigma,
            gram: None,
        };
        r.check_shapes()?;
        Ok(r)
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn io_dim(&self) -> usize {
        self.d.rows()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (m, n) = (self.a.rows(), self.d.rows());
        let ok = self.a.shape() == (m, m)
            && self.b.shape() == (m, n)
            && self.c.shape() == (n, m)
            && self.d.shape() == (n, n)
            && self.sigma.shape() == (n, n)
            && self.gram.as_ref().is_none_or(|g| g.shape() == (m, m));
        if !ok {
            return Err(Error::ShapeMismatch("realization blocks do not fit together".into()));
        }
        Ok(())
    }

    /// `[[A, B], [C, D]]`.
    pub fn system_matrix(&self) -> QMatrix<T> {
        let top = QMatrix::hstack(&[&self.a, &self.b]).expect("shapes checked");
        let bottom = QMatrix::hstack(&[&self.c, &self.d]).expect("shapes checked");
        QMatrix::vstack(&[&top, &bottom]).expect("shapes checked")
    }

    /// Coefficients `D, CB, CAB, CA^2B, ...`.
    pub fn series(&self, degree: usize) -> SliceSeries<T> {
        let mut coeff = vec![self.d.clone()];
        let mut ca = self.c.clone();
        for _ in 1..=degree {
            coeff.push(&ca * &self.b);
            ca = &ca * &self.a;
        }
        SliceSeries::new(coeff).expect("nonempty")
    }

    /// Zero of a scalar realization on `sphere`, evaluated in closed form.
    pub fn sphere_zero(&self, sphere: &Sphere<T>) -> Result<(Quaternion<T>, T)> {
        if self.io_dim() != 1 {
            return Err(Error::ShapeMismatch("sphere zeros need a scalar realization".into()));
        }
        sphere_zero_of(|p| Ok(realization_eval(self, p)?[(0, 0)]), sphere)
    }

    pub fn gram_or_solve(&self) -> Result<QMatrix<T>> {
        match &self.gram {
            Some(g) => Ok(g.clone()),
            None => stein_solve(&self.a, &self.c, &self.sigma),
        }
    }
}

fn check_signature<T: Real>(s: &QMatrix<T>) -> Result<()> {
    let tol = lit::<T>(1e-10) * fmax(T::one(), s.frobenius_norm());
    if !s.is_square() || !s.is_hermitian(tol) {
        return Err(Error::BadSignatureMatrix("sigma must be square and Hermitian".into()));
    }
    if s.inverse().is_err() {
        return Err(Error::BadSignatureMatrix("sigma is singular".into()));
    }
    Ok(())
}

/// Smallest `|1 - l_i conj(l_j)|` over eigenvalue pairs of `chi(A)`.
pub fn stein_gap<T: Real>(a: &QMatrix<T>) -> Result<T> {
    let eig = complex_eigenvalues(&a.to_complex())?;
    let mut gap = T::infinity();
    for x in &eig {
        for y in &eig {
            let v = (Complex::new(T::one(), T::zero()) - x * y.conj()).norm();
            gap = num_traits::Float::min(gap, v);
        }
    }
    Ok(gap)
}

/// Hermitian `P` with `P - A^* P A = C^* sigma C`.
pub fn stein_solve<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>, sigma: &QMatrix<T>) -> Result<QMatrix<T>> {
    check_signature(sigma)?;
    let m = a.rows();
    if !a.is_square() || c.cols() != m || c.rows() != sigma.rows() {
        return Err(Error::ShapeMismatch("Stein data do not fit together".into()));
    }
    let gap = stein_gap(a)?;
    if gap < lit(1e-8) {
        return Err(Error::SteinSingular(gap.to_f64_lossy()));
    }
    let rhs = &(&c.adjoint() * sigma) * c;
    let za = a.to_complex();
    let k = 2 * m;
    // vec(A^* X A) = (A^T kron A^*) vec(X), column-major
    let op = DMatrix::<Complex<T>>::identity(k * k, k * k) - za.transpose().kronecker(&za.adjoint());
    let zr = rhs.to_complex();
    let b = DMatrix::from_column_slice(k * k, 1, zr.as_slice());
    let x = complex_solve(op, &b).map_err(|e| match e {
        Error::Singular(v) => Error::SteinSingular(v),
        other => other,
    })?;
    let x = DMatrix::from_column_slice(k, k, x.as_slice());
    let p = QMatrix::from_complex(&x)?;
    Ok((&p + &p.adjoint()).scale(lit(0.5)))
}

pub fn stein_residual<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>, sigma: &QMatrix<T>, p: &QMatrix<T>) -> T {
    let lhs = p - &(&(&a.adjoint() * p) * a);
    lhs.dist(&(&(&c.adjoint() * sigma) * c))
}

/// `[C; CA; ...; CA^{M-1}]`.
pub fn observability_matrix<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>) -> QMatrix<T> {
    let m = a.rows();
    let mut blocks = Vec::with_capacity(m);
    let mut ca = c.clone();
    for _ in 0..m {
        blocks.push(ca.clone());
        ca = &ca * a;
    }
    let refs: Vec<&QMatrix<T>> = blocks.iter().collect();
    QMatrix::vstack(&refs).expect("same column count")
}

pub fn check_observable<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>) -> Result<()> {
    let m = a.rows();
    let rank = observability_matrix(a, c).rank(lit(1e-10));
    if rank < m {
        return Err(Error::NotObservable { rank, dim: m });
    }
    Ok(())
}

fn ip<T: Real>(g: &QMatrix<T>, u: &[Quaternion<T>], v: &[Quaternion<T>]) -> Quaternion<T> {
    // v^* G u
    let gu = g * &QMatrix::column(u);
    v.iter().zip(gu.as_slice()).map(|(&b, &x)| b.conj() * x).sum()
}

fn axpy<T: Real>(v: &mut [Quaternion<T>], u: &[Quaternion<T>], c: Quaternion<T>) {
    // v -= u c
    for (vi, ui) in v.iter_mut().zip(u) {
        *vi -= *ui * c;
    }
}

const NEUTRAL_TOL: f64 = 1e-10;

type Column<T> = Vec<Quaternion<T>>;

/// Extends the `G`-orthonormal columns of `y` by `count` further
/// `G`-orthonormal vectors; returns them with their signs.
fn indefinite_extend<T: Real>(
    y: &QMatrix<T>,
    g: &QMatrix<T>,
    count: usize,
) -> Result<(Vec<Column<T>>, Vec<T>)> {
    let dim = y.rows();
    let mut basis: Vec<(Column<T>, T)> = (0..y.cols())
        .map(|k| {
            let u: Vec<_> = y.col(k).as_slice().to_vec();
            let s = ip(g, &u, &u).re();
            (u, if s >= T::zero() { T::one() } else { -T::one() })
        })
        .collect();
    let mut cands: Vec<Column<T>> = (0..dim)
        .map(|i| {
            let mut e = vec![Quaternion::zero(); dim];
            e[i] = Quaternion::real(T::one());
            e
        })
        .collect();
    let project = |v: &mut Column<T>, basis: &[(Column<T>, T)]| {
        for (u, eps) in basis {
            let c = ip(g, v, u).scale(*eps);
            axpy(v, u, c);
        }
    };
    for c in cands.iter_mut() {
        project(c, &basis);
    }
    let mut out = Vec::with_capacity(count);
    let mut signs = Vec::with_capacity(count);
    while out.len() < count {
        let best = cands
            .iter()
            .enumerate()
            .map(|(i, v)| (i, fabs(ip(g, v, v).re())))
            .fold((usize::MAX, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut v = if best.0 != usize::MAX && best.1 > lit(NEUTRAL_TOL) {
            cands.swap_remove(best.0)
        } else {
            // every candidate is neutral: combine the pair with the largest cross product
            let mut pick = (0, 0, T::zero());
            for i in 0..cands.len() {
                for j in i + 1..cands.len() {
                    let x = ip(g, &cands[j], &cands[i]).norm();
                    if x > pick.2 {
                        pick = (i, j, x);
                    }
                }
            }
            if pick.2 <= lit(NEUTRAL_TOL) {
                return Err(Error::CompletionFailure(format!(
                    "only neutral candidates left after {} of {count} vectors",
                    out.len()
                )));
            }
            let h = ip(g, &cands[pick.1], &cands[pick.0]).conj();
            let vj = cands[pick.1].clone();
            let mut w = cands.swap_remove(pick.0);
            for (wi, xi) in w.iter_mut().zip(&vj) {
                *wi += *xi * h;
            }
            w
        };
        // second pass against the whole basis
        project(&mut v, &basis);
        let s = ip(g, &v, &v).re();
        if fabs(s) <= lit(NEUTRAL_TOL) {
            return Err(Error::CompletionFailure("neutral vector after pivoting".into()));
        }
        let scale = T::one() / num_traits::Float::sqrt(fabs(s));
        v.iter_mut().for_each(|x| *x = x.scale(scale));
        let eps = if s > T::zero() { T::one() } else { -T::one() };
        for c in cands.iter_mut() {
            let coef = ip(g, c, &v).scale(eps);
            axpy(c, &v, coef);
        }
        basis.push((v.clone(), eps));
        out.push(v);
        signs.push(eps);
    }
    Ok((out, signs))
}

/// `(B, D)` making `[[A, B], [C, D]]` unitary for `diag(P, sigma)`.
pub fn j_unitary_complete<T: Real>(
    a: &QMatrix<T>,
    c: &QMatrix<T>,
    sigma: &QMatrix<T>,
    p: &QMatrix<T>,
) -> Result<(QMatrix<T>, QMatrix<T>)> {
    check_signature(sigma)?;
    let (m, n) = (a.rows(), sigma.rows());
    if !a.is_square() || c.shape() != (n, m) || p.shape() != (m, m) {
        return Err(Error::ShapeMismatch("completion data do not fit together".into()));
    }
    check_observable(a, c)?;
    let pe = herm_eig(p, lit(1e-10))?;
    if pe.signature.zero > 0 {
        return Err(Error::CompletionFailure("P is singular".into()));
    }
    let v = &pe.congruence;
    let sig_t = pe.sigma_tr();
    let v_inv_adj = v.adjoint().inverse()?;
    let top = &(&v.adjoint() * a) * &v_inv_adj;
    let bottom = c * &v_inv_adj;
    let y = QMatrix::vstack(&[&top, &bottom])?;
    let g = QMatrix::block_diag(&[&sig_t, sigma]);

    let defect = (&(&y.adjoint() * &g) * &y).dist(&sig_t);
    if defect > lit::<T>(1e-6) * (T::one() + y.frobenius_norm()) {
        return Err(Error::CompletionFailure(format!(
            "Stein certificate fails (Gram defect {defect})"
        )));
    }

    let (vecs, signs) = indefinite_extend(&y, &g, n)?;
    // order columns positives first, then match the Gram to sigma
    let se = herm_eig(sigma, lit(1e-10))?;
    let pos: Vec<usize> = (0..n).filter(|&k| signs[k] > T::zero()).collect();
    let neg: Vec<usize> = (0..n).filter(|&k| signs[k] < T::zero()).collect();
    if pos.len() != se.signature.positive || neg.len() != se.signature.negative {
        return Err(Error::CompletionFailure(format!(
            "completion has inertia ({}, {}) but sigma has ({}, {})",
            pos.len(),
            neg.len(),
            se.signature.positive,
            se.signature.negative
        )));
    }
    let dim = m + n;
    let x = QMatrix::from_fn(dim, n, |r, k| {
        let src = if k < pos.len() { pos[k] } else { neg[k - pos.len()] };
        vecs[src][r]
    });
    let x = &x * &se.congruence.adjoint();
    let b = &v_inv_adj * &x.block(0, 0, m, n);
    let d = x.block(m, 0, n, n);
    Ok((b, d))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CongruenceResiduals {
    /// `W diag(P^{-1}, sigma) W^* - diag(P^{-1}, sigma)`.
    pub inverse_form: f64,
    /// `W^* diag(P, sigma) W - diag(P, sigma)`.
    pub direct_form: f64,
}

pub fn congruence_residuals<T: Real>(r: &Realization<T>, p: &QMatrix<T>) -> Result<CongruenceResiduals> {
    let w = r.system_matrix();
    let pi = p.inverse()?;
    let g1 = QMatrix::block_diag(&[&pi, &r.sigma]);
    let g2 = QMatrix::block_diag(&[p, &r.sigma]);
    let inv = (&(&w * &g1) * &w.adjoint()).dist(&g1);
    let dir = (&(&w.adjoint() * &g2) * &w).dist(&g2);
    Ok(CongruenceResiduals {
        inverse_form: inv.to_f64_lossy(),
        direct_form: dir.to_f64_lossy(),
    })
}

/// Stein solve followed by completion.
pub fn realize<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>, sigma: &QMatrix<T>) -> Result<Realization<T>> {
    let p = stein_solve(a, c, sigma)?;
    let (b, d) = j_unitary_complete(a, c, sigma, &p)?;
    Ok(Realization {
        a: a.clone(),
        b,
        c: c.clone(),
        d,
        sigma: sigma.clone(),
        gram: Some(p),
    })
}

/// Value at `p` of `C * (I - pA)^{-*}`, i.e. of `sum p^n C A^n`.
///
/// With `p = x + I y` and `Q = |p|^2 A^2 - 2x A + I` the sum splits as
/// `C (I - xA) Q^{-1} + I (y C A Q^{-1})`; the unit `I` has to stay to the
/// left of `C`.
pub fn left_resolvent_eval<T: Real>(c: &QMatrix<T>, a: &QMatrix<T>, p: Quaternion<T>) -> Result<QMatrix<T>> {
    let x = p.re();
    let q = a.real_poly(&[T::one(), -lit::<T>(2.0) * x, p.norm_sqr()]);
    let qi = q.inverse().map_err(|_| Error::OnPoleSphere)?;
    let n = a.rows();
    let alpha = &(c * &(&QMatrix::identity(n) - &a.scale(x))) * &qi;
    let im = p.im();
    let beta = &(c * a) * &qi;
    Ok(&alpha + &beta.left_scale(im))
}

/// `S(p) = D + p (C * (I - pA)^{-*}) B`.
pub fn realization_eval<T: Real>(r: &Realization<T>, p: Quaternion<T>) -> Result<QMatrix<T>> {
    let l = left_resolvent_eval(&r.c, &r.a, p)?;
    Ok(&r.d + &(&l * &r.b).left_scale(p))
}

/// Frobenius residual of
/// `sigma - S(p) sigma S(q)^* = L(p) (P^{-1} - p P^{-1} conj(q)) L(q)^*`
/// with `L(p) = C * (I - pA)^{-*}`.
pub fn kernel_identity_residual<T: Real>(
    r: &Realization<T>,
    p: Quaternion<T>,
    q: Quaternion<T>,
) -> Result<T> {
    let pg = r.gram_or_solve()?;
    let pi = pg.inverse()?;
    let sp = realization_eval(r, p)?;
    let sq = realization_eval(r, q)?;
    let lhs = &r.sigma - &(&(&sp * &r.sigma) * &sq.adjoint());
    let lp = left_resolvent_eval(&r.c, &r.a, p)?;
    let lq = left_resolvent_eval(&r.c, &r.a, q)?;
    let mid = &(&lp * &pi) * &lq.adjoint();
    let rhs = &mid - &mid.left_scale(p).right_scale(q.conj());
    Ok(lhs.dist(&rhs))
}

/// The `sigma = I` realization
/// `D = I - C P^{-1} (I - A)^{-*} C^*`, `B = (I - A) P^{-1} (I - A)^{-*} C^*`.
pub fn realization_sigma_i<T: Real>(a: &QMatrix<T>, c: &QMatrix<T>, p: &QMatrix<T>) -> Result<Realization<T>> {
    let m = a.rows();
    let n = c.rows();
    let ima = &QMatrix::identity(m) - a;
    let ima_inv_adj = ima.adjoint().inverse().map_err(|_| Error::IMinusASingular)?;
    let k = &(&p.inverse()? * &ima_inv_adj) * &c.adjoint();
    let d = &QMatrix::identity(n) - &(c * &k);
    let b = &ima * &k;
    Ok(Realization {
        a: a.clone(),
        b,
        c: c.clone(),
        d,
        sigma: QMatrix::identity(n),
        gram: Some(p.clone()),
    })
}

/// Realization of `S1 * S2`.
pub fn cascade<T: Real>(r1: &Realization<T>, r2: &Realization<T>) -> Result<Realization<T>> {
    if r1.io_dim() != r2.io_dim() {
        return Err(Error::ShapeMismatch("cascade needs equal io dimensions".into()));
    }
    let (m1, m2) = (r1.state_dim(), r2.state_dim());
    let mut a = QMatrix::zeros(m1 + m2, m1 + m2);
    a.set_block(0, 0, &r1.a);
    a.set_block(0, m1, &(&r1.b * &r2.c));
    a.set_block(m1, m1, &r2.a);
    let b = QMatrix::vstack(&[&(&r1.b * &r2.d), &r2.b])?;
    let c = QMatrix::hstack(&[&r1.c, &(&r1.d * &r2.c)])?;
    let d = &r1.d * &r2.d;
    Realization::new(a, b, c, d, r1.sigma.clone())
}

/// Realization of `S^{-*}` through `A - B D^{-1} C`.
pub fn inverse_realization<T: Real>(r: &Realization<T>) -> Result<Realization<T>> {
    let di = r.d.inverse().map_err(|_| Error::BNotInvertibleAtZero)?;
    let a = &r.a - &(&(&r.b * &di) * &r.c);
    let b = &r.b * &di;
    let c = -&(&di * &r.c);
    Realization::new(a, b, c, di, r.sigma.clone())
}

/// `B^{-*} * S0`.
pub fn krein_langer_compose<T: Real>(bprod: &SliceSeries<T>, s0: &SliceSeries<T>) -> Result<SliceSeries<T>> {
    if bprod.coeff(0).inverse().is_err() {
        return Err(Error::BNotInvertibleAtZero);
    }
    let inv = if bprod.is_scalar() {
        bprod.star_inverse()
    } else {
        bprod.star_inverse_matrix()
    }
    .map_err(|e| match e {
        Error::NotInvertibleAtZero => Error::BNotInvertibleAtZero,
        other => other,
    })?;
    inv.star_mul(s0)
}

/// Band around modulus one treated as lying on the unit sphere.
pub const UNIT_BAND: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KreinLanger<T> {
    pub bprod: SliceSeries<T>,
    pub s0: SliceSeries<T>,
    /// Eigen-spheres of `A` outside the closed unit ball.
    pub outside: Vec<SphereMultiplicity<T>>,
    /// Zero spheres of `bprod`, reciprocals of the outside spheres.
    pub zero_spheres: Vec<Sphere<T>>,
    /// Realization of `bprod`.
    pub b_realization: Realization<T>,
    pub kappa: usize,
}

/// Splits off the poles of `S` inside the ball: `S = B^{-*} * S0`.
pub fn krein_langer_factor<T: Real>(r: &Realization<T>, degree: usize) -> Result<KreinLanger<T>> {
    r.check_shapes()?;
    let n = r.io_dim();
    if r.sigma.dist(&QMatrix::identity(n)) > lit(1e-12) {
        return Err(Error::BadSignatureMatrix("factorization needs sigma = I".into()));
    }
    let m = r.state_dim();
    let pairs = right_eigenpairs(&r.a)?;
    let mut outside = Vec::new();
    let mut out_vecs: Vec<QMatrix<T>> = Vec::new();
    let mut out_vals = Vec::new();
    let mut all = Vec::new();
    for es in &pairs {
        let md = es.sphere.modulus();
        if fabs(md - T::one()) <= lit(UNIT_BAND) {
            return Err(Error::SpectrumOnUnitSphere(md.to_f64_lossy()));
        }
        if es.geometric_multiplicity < es.multiplicity || es.vectors.cols() < es.multiplicity {
            return Err(Error::NotDiagonalizable(format!(
                "sphere {} has {} eigenvectors for multiplicity {}",
                es.sphere, es.geometric_multiplicity, es.multiplicity
            )));
        }
        for k in 0..es.vectors.cols() {
            all.push(es.vectors.col(k));
        }
        if md > T::one() {
            outside.push(SphereMultiplicity {
                sphere: es.sphere,
                multiplicity: es.multiplicity,
            });
            for k in 0..es.vectors.cols() {
                out_vecs.push(es.vectors.col(k));
                out_vals.push(es.eigenvalue);
            }
        }
    }
    let refs: Vec<&QMatrix<T>> = all.iter().collect();
    let e_all = QMatrix::hstack(&refs)?;
    if e_all.rank(lit(1e-6)) < m {
        return Err(Error::NotDiagonalizable("eigenvectors do not span the state space".into()));
    }
    let kappa = out_vecs.len();
    let zero_spheres: Vec<Sphere<T>> = outside.iter().map(|s| s.sphere.reciprocal()).collect();
    if kappa == 0 {
        let id = QMatrix::identity(n);
        let b_realization = Realization {
            a: QMatrix::zeros(0, 0),
            b: QMatrix::zeros(0, n),
            c: QMatrix::zeros(n, 0),
            d: id.clone(),
            sigma: id,
            gram: None,
        };
        return Ok(KreinLanger {
            bprod: SliceSeries::identity(n, degree),
            s0: r.series(degree),
            outside,
            zero_spheres,
            b_realization,
            kappa,
        });
    }
    // restriction to the invariant subspace of the outside spheres, in the eigenbasis
    let refs: Vec<&QMatrix<T>> = out_vecs.iter().collect();
    let e_out = QMatrix::hstack(&refs)?;
    let a_out = QMatrix::diag(&out_vals);
    let c_out = &r.c * &e_out;
    let id = QMatrix::identity(n);
    let g = stein_solve(&a_out, &c_out, &id)?;
    let (b_out, d_out) = j_unitary_complete(&a_out, &c_out, &id, &g)?;
    // R = B^{-*} has the outside poles; B itself comes from the inverse system
    let rinv = Realization {
        a: a_out,
        b: b_out,
        c: c_out,
        d: d_out,
        sigma: id,
        gram: Some(g),
    };
    let b_realization = inverse_realization(&rinv)?;
    let bprod = b_realization.series(degree);
    let s0 = bprod.star_mul(&r.series(degree))?;
    Ok(KreinLanger {
        bprod,
        s0,
        outside,
        zero_spheres,
        b_realization,
        kappa,
    })
}

/// `|S(p) sigma S(p)^* - sigma|`; vanishes on the unit sphere for scalar inner functions.
pub fn boundary_defect<T: Real>(r: &Realization<T>, p: Quaternion<T>) -> Result<T> {
    let s = realization_eval(r, p)?;
    let u = &(&s * &r.sigma) * &s.adjoint();
    Ok(u.dist(&r.sigma))
}

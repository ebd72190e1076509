//! Coefficient matrices of Schur kernels and their negative squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{herm_eig, QMatrix, Signature};
use crate::quat::Quaternion;
use crate::scalar::{fmax, lit, Real};
use crate::slicefun::SliceSeries;

/// Threshold, relative to the largest eigenvalue, below which an
/// eigenvalue of `A_mu` counts as zero.
pub const SIG_TOL: f64 = 1e-8;

/// Stabilization window for the negative count.
pub const STABLE_WINDOW: usize = 3;

/// `a[n][m]` is the coefficient of `p^n ... conj(q)^m`.
#[derive(Clone, Debug)]
pub struct KernelCoeffs<T> {
    pub block: usize,
    pub a: Vec<Vec<QMatrix<T>>>,
}

impl<T: Real> KernelCoeffs<T> {
    pub fn mu_max(&self) -> usize {
        self.a.len() - 1
    }

    /// `A_mu = (a_{n,m})_{n,m <= mu}`.
    pub fn block_matrix(&self, mu: usize) -> QMatrix<T> {
        let b = self.block;
        let mut out = QMatrix::zeros((mu + 1) * b, (mu + 1) * b);
        for n in 0..=mu {
            for m in 0..=mu {
                out.set_block(n * b, m * b, &self.a[n][m]);
            }
        }
        out
    }

    /// Largest `|a_{n,m} - a_{m,n}^*|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for n in 0..self.a.len() {
            for m in 0..self.a.len() {
                worst = fmax(worst, (&self.a[n][m] - &self.a[m][n].adjoint()).max_abs());
            }
        }
        worst
    }

    /// `sum_{n,m <= mu} p^n a_{n,m} conj(q)^m`.
    pub fn eval(&self, p: Quaternion<T>, q: Quaternion<T>, mu: usize) -> QMatrix<T> {
        let mut acc = QMatrix::zeros(self.block, self.block);
        let qb = q.conj();
        for n in 0..=mu {
            let pn = p.powi(n);
            for m in 0..=mu {
                let term = self.a[n][m].left_scale(pn).right_scale(qb.powi(m));
                acc = &acc + &term;
            }
        }
        acc
    }
}

fn check_signature<T: Real>(s: &QMatrix<T>, name: &str) -> Result<()> {
    if !s.is_square() {
        return Err(Error::BadSignatureMatrix(format!("{name} is not square")));
    }
    let tol = lit::<T>(1e-10) * fmax(T::one(), s.frobenius_norm());
    if !s.is_hermitian(tol) {
        return Err(Error::BadSignatureMatrix(format!("{name} is not Hermitian")));
    }
    if s.inverse().is_err() {
        return Err(Error::BadSignatureMatrix(format!("{name} is singular")));
    }
    Ok(())
}

/// `a_{n,m} = delta_{n,m} sigma2 - sum_{k <= min(n,m)} s_{n-k} sigma1 s_{m-k}^*`.
pub fn schur_kernel_coeffs<T: Real>(
    s: &SliceSeries<T>,
    sigma1: &QMatrix<T>,
    sigma2: &QMatrix<T>,
    mu_max: usize,
) -> Result<KernelCoeffs<T>> {
    check_signature(sigma1, "sigma1")?;
    check_signature(sigma2, "sigma2")?;
    let (rows, cols) = s.shape();
    if sigma1.rows() != cols || sigma2.rows() != rows {
        return Err(Error::ShapeMismatch("signature sizes do not match the series".into()));
    }
    if s.degree() < mu_max {
        return Err(Error::ShapeMismatch(format!(
            "series degree {} below mu_max {mu_max}",
            s.degree()
        )));
    }
    let c = s.coeffs();
    let scaled: Vec<QMatrix<T>> = c[..=mu_max].iter().map(|x| x * sigma1).collect();
    let adj: Vec<QMatrix<T>> = c[..=mu_max].iter().map(|x| x.adjoint()).collect();
    let mut a = vec![vec![QMatrix::zeros(rows, rows); mu_max + 1]; mu_max + 1];
    for n in 0..=mu_max {
        for m in n..=mu_max {
            let mut acc = if n == m { sigma2.clone() } else { QMatrix::zeros(rows, rows) };
            for k in 0..=n {
                acc = &acc - &(&scaled[n - k] * &adj[m - k]);
            }
            if n == m {
                acc = (&acc + &acc.adjoint()).scale(lit(0.5));
            }
            a[m][n] = acc.adjoint();
            a[n][m] = acc;
        }
    }
    Ok(KernelCoeffs { block: rows, a })
}

/// Kernel coefficients with `sigma1 = sigma2 = I`.
pub fn schur_kernel_coeffs_identity<T: Real>(s: &SliceSeries<T>, mu_max: usize) -> Result<KernelCoeffs<T>> {
    let (rows, cols) = s.shape();
    schur_kernel_coeffs(s, &QMatrix::identity(cols), &QMatrix::identity(rows), mu_max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InertiaRow {
    pub mu: usize,
    pub negatives: usize,
    pub zeros: usize,
    pub positives: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NegSquares {
    pub kappa: usize,
    pub stabilized: bool,
    pub table: Vec<InertiaRow>,
}

pub fn inertia<T: Real>(h: &QMatrix<T>) -> Result<Signature> {
    Ok(herm_eig(h, lit(SIG_TOL))?.signature)
}

pub fn neg_squares<T: Real>(k: &KernelCoeffs<T>, mu_max: usize) -> Result<NegSquares> {
    let mu_max = mu_max.min(k.mu_max());
    let mut table = Vec::with_capacity(mu_max + 1);
    for mu in 0..=mu_max {
        let sig = inertia(&k.block_matrix(mu))?;
        table.push(InertiaRow {
            mu,
            negatives: sig.negative,
            zeros: sig.zero,
            positives: sig.positive,
        });
    }
    Ok(summarize(table))
}

fn summarize(table: Vec<InertiaRow>) -> NegSquares {
    let kappa = table.iter().map(|r| r.negatives).max().unwrap_or(0);
    let tail = &table[table.len().saturating_sub(STABLE_WINDOW)..];
    let stabilized = tail.len() == STABLE_WINDOW && tail.iter().all(|r| r.negatives == tail[0].negatives);
    NegSquares {
        kappa,
        stabilized,
        table,
    }
}

/// Lower block-Toeplitz matrix of the first `mu + 1` coefficients of `alpha`.
pub fn block_toeplitz<T: Real>(alpha: &SliceSeries<T>, mu: usize) -> QMatrix<T> {
    let (r, c) = alpha.shape();
    let mut l = QMatrix::zeros((mu + 1) * r, (mu + 1) * c);
    for n in 0..=mu {
        for m in 0..=n {
            l.set_block(n * r, m * c, alpha.coeff(n - m));
        }
    }
    l
}

/// `B_mu = L A_mu L^*`, the coefficient matrix of `alpha(p) * K(p,q) *_r alpha(q)^*`.
pub fn congruent_block<T: Real>(k: &KernelCoeffs<T>, alpha: &SliceSeries<T>, mu: usize) -> QMatrix<T> {
    let l = block_toeplitz(alpha, mu);
    &(&l * &k.block_matrix(mu)) * &l.adjoint()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub before: NegSquares,
    pub after: NegSquares,
}

pub fn congruence_check<T: Real>(
    k: &KernelCoeffs<T>,
    alpha: &SliceSeries<T>,
    mu_max: usize,
) -> Result<CongruenceReport> {
    if alpha.shape() != (k.block, k.block) {
        return Err(Error::ShapeMismatch("alpha must be square of the kernel block size".into()));
    }
    if alpha.coeff(0).inverse().is_err() {
        return Err(Error::AlphaNotInvertibleAtZero);
    }
    let mu_max = mu_max.min(k.mu_max()).min(alpha.degree());
    let before = neg_squares(k, mu_max)?;
    let mut table = Vec::with_capacity(mu_max + 1);
    for mu in 0..=mu_max {
        let sig = inertia(&congruent_block(k, alpha, mu))?;
        table.push(InertiaRow {
            mu,
            negatives: sig.negative,
            zeros: sig.zero,
            positives: sig.positive,
        });
    }
    Ok(CongruenceReport {
        before,
        after: summarize(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    type Q = Quaternion<f64>;
    type S = SliceSeries<f64>;
    type M = QMatrix<f64>;

    #[test]
    fn unitary_constant_has_zero_kernel() {
        let s = S::scalar_poly(&[Q::new(0.6, 0.0, 0.8, 0.0)], 6);
        let k = schur_kernel_coeffs_identity(&s, 6).unwrap();
        assert!(k.block_matrix(6).max_abs() < 1e-15);
    }

    #[test]
    fn zero_series_gives_sigma() {
        let k = schur_kernel_coeffs_identity(&S::zero(1, 1, 4), 4).unwrap();
        assert!(k.block_matrix(4).dist(&M::identity(5)) < 1e-15);
    }

    #[test]
    fn s_equals_p() {
        let k = schur_kernel_coeffs_identity(&S::var(8), 8).unwrap();
        // brute-force convolution of 1 - p conj(q) summed against sum p^n conj(q)^n
        for n in 0..=8 {
            for m in 0..=8 {
                let want = if n == 0 && m == 0 { 1.0 } else { 0.0 };
                assert!((k.a[n][m][(0, 0)] - Q::real(want)).norm() < 1e-15, "({n},{m})");
            }
        }
        let ns = neg_squares(&k, 8).unwrap();
        assert_eq!(ns.kappa, 0);
        assert!(ns.stabilized);
    }

    #[test]
    fn negative_sigma_never_stabilizes() {
        let k = schur_kernel_coeffs(&S::zero(1, 1, 6), &M::identity(1), &M::real_diag(&[-1.0]), 6).unwrap();
        let ns = neg_squares(&k, 6).unwrap();
        assert_eq!(ns.kappa, 7);
        assert!(!ns.stabilized);
    }

    #[test]
    fn bad_signature() {
        let s = S::var(3);
        let nh = M::scalar(Q::i());
        assert!(matches!(
            schur_kernel_coeffs(&s, &nh, &M::identity(1), 3),
            Err(Error::BadSignatureMatrix(_))
        ));
        assert!(matches!(
            schur_kernel_coeffs(&s, &M::identity(1), &M::zeros(1, 1), 3),
            Err(Error::BadSignatureMatrix(_))
        ));
    }

    #[test]
    fn kernel_matches_pointwise() {
        let s = S::scalar_poly(&[Q::new(0.2, 0.1, 0.0, 0.0), Q::new(0.0, 0.0, 0.3, 0.1), Q::real(0.2)], 14);
        let k = schur_kernel_coeffs_identity(&s, 14).unwrap();
        assert!(k.hermitian_defect() < 1e-15);
        let p = Q::new(0.1, 0.2, -0.1, 0.05);
        let q = Q::new(-0.2, 0.0, 0.1, 0.15);
        // sum_n p^n (1 - S(p) S(q)^*) conj(q)^n, star products taken through coefficients
        let coeffs = s.scalar_coeffs();
        let mut want = Q::zero();
        for n in 0..=14 {
            for m in 0..=14 {
                let mut c = if n == m { Q::one() } else { Q::zero() };
                for kk in 0..=n.min(m) {
                    c -= coeffs[n - kk] * coeffs[m - kk].conj();
                }
                want += p.powi(n) * c * q.conj().powi(m);
            }
        }
        let got = k.eval(p, q, 14)[(0, 0)];
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn congruence_by_constant() {
        let s = S::var(5);
        let k = schur_kernel_coeffs_identity(&s, 5).unwrap();
        let alpha = S::scalar_poly(&[Q::new(1.0, 2.0, 0.0, 0.0)], 5);
        let r = congruence_check(&k, &alpha, 5).unwrap();
        assert_eq!(r.before.kappa, r.after.kappa);
        let singular = S::scalar_poly(&[Q::zero(), Q::one()], 5);
        assert!(matches!(
            congruence_check(&k, &singular, 5),
            Err(Error::AlphaNotInvertibleAtZero)
        ));
    }
}

use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by a quaternion of norm {0:e}")]
    ZeroDivision(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular (smallest pivot {0:e})")]
    Singular(f64),
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("zero vector")]
    ZeroVector,
    #[error("point lies on the S-spectrum (char operator pivot {0:e})")]
    OnSpectrum(f64),
    #[error("contour passes through the S-spectrum (distance {0:e})")]
    ContourOnSpectrum(f64),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("range ranks {inside} + {outside} do not add up to {dim}")]
    RankDeficiency { inside: usize, outside: usize, dim: usize },
    #[error("series is not invertible at the origin")]
    NotInvertibleAtZero,
    #[error("signature matrix is not Hermitian and invertible: {0}")]
    BadSignatureMatrix(String),
    #[error("alpha(0) is not invertible")]
    AlphaNotInvertibleAtZero,
    #[error("modulus {0} outside the open interval (0, 1)")]
    InvalidModulus(f64),
    #[error("invalid Blaschke specification: {0}")]
    InvalidSpec(String),
    #[error("zero {0} is already a zero of the preceding partial product")]
    DegenerateChoice(usize),
    #[error("Stein equation is singular: eigenvalue pair with product modulus 1 (gap {0:e})")]
    SteinSingular(f64),
    #[error("pair (C, A) is not observable (rank {rank} < {dim})")]
    NotObservable { rank: usize, dim: usize },
    #[error("J-unitary completion failed: {0}")]
    CompletionFailure(String),
    #[error("point lies on a pole sphere of the realization")]
    OnPoleSphere,
    #[error("I - A is singular")]
    IMinusASingular,
    #[error("B(0) is not invertible")]
    BNotInvertibleAtZero,
    #[error("A has a right eigenvalue sphere of modulus {0} on the unit sphere")]
    SpectrumOnUnitSphere(f64),
    #[error("A is not diagonalizable: {0}")]
    NotDiagonalizable(String),
    #[error("eigen-solver failed to converge")]
    NoConvergence,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

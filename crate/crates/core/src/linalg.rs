//! Dense Hermitian matrices: eigendecomposition, spectral calculus, Schatten
//! norms and operator-order comparison.
//!
//! All values are immutable once built. A [`HermitianOperator`] computes its
//! eigendecomposition lazily, at most once, and shares it between clones made
//! afterwards.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest accepted dimension.
pub const MAX_DIM: usize = 256;
/// Relative Hermiticity tolerance applied by constructors.
pub const TOL_HERM: f64 = 1e-10;
/// Relative reconstruction tolerance of the eigendecomposition.
pub const TOL_EIG: f64 = 1e-12;
/// Operator-order tolerance.
pub const TOL_PSD: f64 = 1e-8;

/// Eigenvalues with magnitude at or below this are treated as exact zeros.
pub fn zero_threshold(dim: usize, lambda_max: f64) -> f64 {
    dim as f64 * f64::EPSILON * lambda_max.abs().max(1.0)
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Eigenvalues with entries inside the zero threshold set to exactly zero.
    pub fn thresholded(&self) -> Vec<f64> {
        let d = self.values.len();
        let lmax = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = zero_threshold(d, lmax);
        self.values
            .iter()
            .map(|&v| if v.abs() <= tol { 0.0 } else { v })
            .collect()
    }
}

/// A d×d complex Hermitian matrix with a cached spectral decomposition.
#[derive(Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    asymmetry: f64,
    spectral: OnceLock<Spectral>,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim())
            .field("entries", &self.entries)
            .field("asymmetry", &self.asymmetry)
            .finish()
    }
}

fn check_square(m: &CMatrix) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::NotSquare(r, c));
    }
    if r == 0 || r > MAX_DIM {
        return Err(Error::BadDimension(r));
    }
    Ok(r)
}

/// Maximum absolute row sum; an upper bound on the spectral norm.
pub fn row_sum_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianOperator {
    /// Symmetrizes `m` after checking that it is Hermitian within
    /// `TOL_HERM * max(1, ||m||)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, TOL_HERM)
    }

    pub fn with_tolerance(m: CMatrix, rel_tol: f64) -> Result<Self> {
        check_square(&m)?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let asymmetry = max_asymmetry(&m);
        let tolerance = rel_tol * row_sum_norm(&m).max(1.0);
        if asymmetry > tolerance {
            return Err(Error::NonHermitianInput {
                asymmetry,
                tolerance,
            });
        }
        let entries = (&m + m.adjoint()).scale(0.5);
        Ok(Self {
            entries,
            asymmetry,
            spectral: OnceLock::new(),
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let m = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(CMatrix::zeros(d, d))
    }

    /// Builds `U diag(values) U†` and seeds the spectral cache with the given
    /// decomposition. `vectors` must be unitary.
    pub fn from_spectral(values: Vec<f64>, vectors: CMatrix) -> Result<Self> {
        let d = check_square(&vectors)?;
        if values.len() != d {
            return Err(Error::DimensionMismatch(values.len(), d));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let vecs = CMatrix::from_fn(d, d, |i, j| vectors[(i, order[j])]);
        let entries = reconstruct(&sorted, &vecs);
        let out = Self {
            entries,
            asymmetry: 0.0,
            spectral: OnceLock::new(),
        };
        let _ = out.spectral.set(Spectral {
            values: sorted,
            vectors: vecs,
        });
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Largest asymmetry removed by the constructor.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Spectral decomposition, computed on first use.
    pub fn spectral(&self) -> Result<&Spectral> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let s = decompose(&self.entries)?;
        let _ = self.spectral.set(s);
        Ok(self.spectral.get().expect("spectral cache populated"))
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let s = self.spectral()?;
        Ok(s.max().abs().max(s.min().abs()))
    }

    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.spectral()?.values.iter().map(|v| v.abs()).sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Self::new(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Self::new(&self.entries - &other.entries)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let entries = self.entries.map(|z| z * c);
        let out = Self {
            entries,
            asymmetry: self.asymmetry * c.abs(),
            spectral: OnceLock::new(),
        };
        if c >= 0.0 {
            if let Some(s) = self.spectral.get() {
                let _ = out.spectral.set(Spectral {
                    values: s.values.iter().map(|v| v * c).collect(),
                    vectors: s.vectors.clone(),
                });
            }
        }
        out
    }

    /// `U A U†` for unitary `U`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(u.nrows(), self.dim()));
        }
        Self::new(u * &self.entries * u.adjoint())
    }
}

fn same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// `U diag(values) U†`.
pub fn reconstruct(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let m = scaled * vectors.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

fn decompose(m: &CMatrix) -> Result<Spectral> {
    let d = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * d.max(8))
        .ok_or(Error::ConvergenceFailure { dim: d })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectral { values, vectors })
}

/// Ascending eigenvalues and unitary eigenvector matrix of `h`.
pub fn eigh(h: &HermitianOperator) -> Result<(Vec<f64>, CMatrix)> {
    let s = h.spectral()?;
    Ok((s.values.clone(), s.vectors.clone()))
}

/// Spectral calculus `U diag(f(λ)) U†`.
///
/// Eigenvalues inside the zero threshold are passed to `guard` and `f` as
/// exact zeros. Any eigenvalue rejected by `guard` is reported.
pub fn apply_function<F, G>(h: &HermitianOperator, f: F, guard: G) -> Result<HermitianOperator>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> bool,
{
    let s = h.spectral()?;
    let lambdas = s.thresholded();
    let mut mapped = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        if !guard(l) {
            return Err(Error::DomainViolation(format!(
                "eigenvalue {l:e} outside the function domain"
            )));
        }
        let v = f(l);
        if !v.is_finite() {
            return Err(Error::DomainViolation(format!(
                "function value at eigenvalue {l:e} is not finite"
            )));
        }
        mapped.push(v);
    }
    HermitianOperator::from_spectral(mapped, s.vectors.clone())
}

/// Schatten index `p` in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenIndex {
    Finite(f64),
    Infinity,
}

impl SchattenIndex {
    pub const ONE: SchattenIndex = SchattenIndex::Finite(1.0);
    pub const TWO: SchattenIndex = SchattenIndex::Finite(2.0);
    pub const INF: SchattenIndex = SchattenIndex::Infinity;

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(SchattenIndex::Infinity)
        } else if p >= 1.0 {
            Ok(SchattenIndex::Finite(p))
        } else {
            Err(Error::DomainViolation(format!("Schatten index {p} < 1")))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            SchattenIndex::Finite(p) => *p,
            SchattenIndex::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for SchattenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenIndex::Finite(p) => write!(f, "{p}"),
            SchattenIndex::Infinity => write!(f, "inf"),
        }
    }
}

/// Singular values of a general square or rectangular complex matrix.
pub fn singular_values(x: &CMatrix) -> Vec<f64> {
    if x.is_square() && x.nrows() > 0 && max_asymmetry(x) == 0.0 {
        if let Some(eig) = SymmetricEigen::try_new(x.clone(), f64::EPSILON, 1000 * x.nrows().max(8)) {
            return eig.eigenvalues.iter().map(|v| v.abs()).collect();
        }
    }
    x.clone().singular_values().iter().copied().collect()
}

pub fn schatten_norm(x: &CMatrix, p: SchattenIndex) -> f64 {
    norm_from_singular_values(&singular_values(x), p)
}

pub fn norm_from_singular_values(sv: &[f64], p: SchattenIndex) -> f64 {
    let smax = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    match p {
        SchattenIndex::Infinity => smax,
        _ if smax == 0.0 => 0.0,
        SchattenIndex::Finite(1.0) => sv.iter().sum(),
        SchattenIndex::Finite(p) => {
            let sum: f64 = sv.iter().map(|s| (s / smax).powf(p)).sum();
            smax * sum.powf(1.0 / p)
        }
    }
}

/// Minimum eigenvalue of `b - a`; `a ≤ b` in operator order iff this is
/// non-negative.
pub fn psd_gap(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    same_dim(a, b)?;
    let diff = b.sub(a)?;
    Ok(diff.spectral()?.min())
}

/// Operator-order test `a ≤ b` with tolerance `TOL_PSD * max(1, ||a||, ||b||)`.
pub fn psd_le(a: &HermitianOperator, b: &HermitianOperator) -> Result<bool> {
    let scale = 1f64.max(a.spectral_norm()?).max(b.spectral_norm()?);
    Ok(psd_gap(a, b)? >= -TOL_PSD * scale)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `max |m_ij|`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eigh_of_diagonal_is_identity_basis() {
        let h = HermitianOperator::from_real_diagonal(&[0.25, 0.75]).unwrap();
        let (vals, vecs) = eigh(&h).unwrap();
        assert_eq!(vals, vec![0.25, 0.75]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(vecs[(i, j)].norm(), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let (vals, _) = eigh(&HermitianOperator::new(m).unwrap()).unwrap();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn rejects_non_square_and_empty() {
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare(2, 3))
        ));
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(0, 0)),
            Err(Error::BadDimension(0))
        ));
    }

    #[test]
    fn symmetrizes_small_asymmetry() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5 + 1e-13), c(0.5), c(1.0)]);
        let h = HermitianOperator::new(m).unwrap();
        assert!(h.asymmetry() > 0.0);
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn apply_function_examples() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let sq = apply_function(&h, |x| x * x, |_| true).unwrap();
        assert_abs_diff_eq!(sq.matrix()[(0, 0)].re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.matrix()[(1, 1)].re, 0.25, epsilon = 1e-15);

        let h = HermitianOperator::from_real_diagonal(&[0.75, 0.25]).unwrap();
        let inv = apply_function(&h, |x| 1.0 / x, |x| x > 0.0).unwrap();
        assert_abs_diff_eq!(inv.matrix()[(0, 0)].re, 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inv.matrix()[(1, 1)].re, 4.0, epsilon = 1e-14);

        let h = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let err = apply_function(&h, |x| 1.0 / x, |x| x > 0.0).unwrap_err();
        assert!(matches!(err, Error::DomainViolation(_)));
    }

    #[test]
    fn zero_threshold_snaps_roundoff() {
        let h = HermitianOperator::from_real_diagonal(&[1e-17, 1.0]).unwrap();
        let err = apply_function(&h, |x| 1.0 / x, |x| x > 0.0);
        assert!(err.is_err());
    }

    #[test]
    fn schatten_examples() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
        assert_abs_diff_eq!(schatten_norm(&x, SchattenIndex::ONE), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(schatten_norm(&x, SchattenIndex::INF), 0.5, epsilon = 1e-15);
        let y = CMatrix::from_row_slice(2, 2, &[c(3.0), c(0.0), c(0.0), c(4.0)]);
        assert_abs_diff_eq!(schatten_norm(&y, SchattenIndex::TWO), 5.0, epsilon = 1e-14);
        assert_eq!(schatten_norm(&CMatrix::zeros(3, 3), SchattenIndex::TWO), 0.0);
    }

    #[test]
    fn schatten_index_validation() {
        assert!(SchattenIndex::new(0.5).is_err());
        assert_eq!(SchattenIndex::new(f64::INFINITY).unwrap(), SchattenIndex::INF);
        assert_eq!(SchattenIndex::new(3.0).unwrap().value(), 3.0);
    }

    #[test]
    fn psd_gap_examples() {
        let zero = HermitianOperator::zeros(2).unwrap();
        let b = HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(psd_gap(&zero, &b).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(psd_gap(&b, &b).unwrap(), 0.0, epsilon = 1e-15);
        let a = HermitianOperator::from_real_diagonal(&[0.0, 2.0]).unwrap();
        let b = HermitianOperator::from_real_diagonal(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(psd_gap(&a, &b).unwrap(), -1.0, epsilon = 1e-15);
        assert!(!psd_le(&a, &b).unwrap());
        assert!(psd_le(&zero, &b).unwrap());
    }

    #[test]
    fn psd_gap_dimension_mismatch() {
        let a = HermitianOperator::zeros(2).unwrap();
        let b = HermitianOperator::zeros(3).unwrap();
        assert!(matches!(psd_gap(&a, &b), Err(Error::DimensionMismatch(2, 3))));
    }
}

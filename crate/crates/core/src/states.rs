//! Density matrices, their supports, random generators, tensor products and
//! partial traces.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{zero_threshold, CMatrix, HermitianOperator, C64};
use crate::rng::{ginibre, haar_unitary};

/// Default tolerance for validating states read from matrices or files.
pub const DEFAULT_STATE_TOL: f64 = 1e-10;
/// Default absolute weight a state may carry on the other state's kernel.
pub const TOL_INCL: f64 = 1e-12;

/// A positive semidefinite, unit-trace Hermitian matrix.
///
/// The spectrum is stored ascending with round-off zeros snapped to exactly
/// zero, and the eigenvectors live in the operator's spectral cache.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
    spectrum: Vec<f64>,
    rank: usize,
    support_projector: HermitianOperator,
}

impl DensityMatrix {
    /// Validates and normalizes an arbitrary complex matrix.
    ///
    /// Eigenvalues in `[-tol, 0)` are clamped to zero and the spectrum is
    /// renormalized to unit sum.
    pub fn from_matrix(m: CMatrix, tol: f64) -> Result<Self> {
        let h = HermitianOperator::with_tolerance(m, tol)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::NotNormalized(tr));
        }
        let s = h.spectral()?;
        if s.min() < -tol {
            return Err(Error::NotPSD(s.min()));
        }
        let values = s.values.iter().map(|&v| v.max(0.0)).collect();
        Self::from_parts(values, s.vectors.clone())
    }

    /// Builds a state from eigenvalues and a unitary eigenvector matrix.
    /// Values are thresholded and renormalized.
    pub fn from_parts(values: Vec<f64>, vectors: CMatrix) -> Result<Self> {
        let d = values.len();
        let lmax = values.iter().fold(0.0f64, |m, &v| m.max(v));
        let tol = zero_threshold(d, lmax);
        if values.iter().any(|v| !v.is_finite() || *v < -tol) {
            return Err(Error::BadSpectrum(format!("{values:?}")));
        }
        let mut values: Vec<f64> = values
            .into_iter()
            .map(|v| if v <= tol { 0.0 } else { v })
            .collect();
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::BadSpectrum("spectrum sums to zero".into()));
        }
        for v in values.iter_mut() {
            *v /= total;
        }
        let op = HermitianOperator::from_spectral(values, vectors)?;
        let spectral = op.spectral()?;
        let spectrum = spectral.values.clone();
        let rank = spectrum.iter().filter(|&&v| v > 0.0).count();
        let proj: Vec<f64> = spectrum
            .iter()
            .map(|&v| if v > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let support_projector = HermitianOperator::from_spectral(proj, spectral.vectors.clone())?;
        Ok(Self {
            op,
            spectrum,
            rank,
            support_projector,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let sum: f64 = diag.iter().sum();
        if (sum - 1.0).abs() > DEFAULT_STATE_TOL {
            return Err(Error::NotNormalized(sum));
        }
        if let Some(&neg) = diag.iter().find(|&&v| v < 0.0) {
            return Err(Error::NotPSD(neg));
        }
        Self::from_parts(diag.to_vec(), CMatrix::identity(d, d))
    }

    /// Pure state `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::BadSpectrum("zero vector".into()));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm2);
        Self::from_matrix(m, DEFAULT_STATE_TOL)
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        Self::from_parts(vec![1.0 / d as f64; d], CMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    /// Ascending eigenvalues; zeros are exact.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Eigenvectors as columns, in the order of [`Self::spectrum`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self
            .op
            .spectral()
            .expect("density matrices carry their decomposition")
            .vectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dim()
    }

    pub fn support_projector(&self) -> &HermitianOperator {
        &self.support_projector
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.spectrum.last().expect("non-empty spectrum")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn min_nonzero_eigenvalue(&self) -> f64 {
        self.spectrum
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .expect("unit trace implies a nonzero eigenvalue")
    }

    /// `U ρ U†`, keeping the exact spectrum.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(u.nrows(), self.dim()));
        }
        Self::from_parts(self.spectrum.clone(), u * self.eigenvectors())
    }

    /// Embeds this state into the first `self.dim()` coordinates of a
    /// `d`-dimensional space, then conjugates by `u`. The orthogonal block is
    /// an exact zero.
    pub fn embed(&self, d: usize, u: &CMatrix) -> Result<Self> {
        let k = self.dim();
        if d < k || u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(k, d));
        }
        let inner = self.eigenvectors();
        let mut block = CMatrix::identity(d, d);
        block.view_mut((0, 0), (k, k)).copy_from(inner);
        let mut values = self.spectrum.clone();
        values.resize(d, 0.0);
        Self::from_parts(values, u * block)
    }

    pub fn to_state_file(&self) -> StateFile {
        StateFile::from_matrix(self.matrix())
    }
}

pub fn density_from_matrix(m: CMatrix, tol: f64) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(m, tol)
}

/// `GG†/tr(GG†)` for a `d × rank` complex Ginibre matrix `G`.
///
/// The generated state has exactly `rank` nonzero eigenvalues.
pub fn sample_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::DomainViolation(format!(
            "rank {rank} outside 1..={d}"
        )));
    }
    let g = ginibre(d, rank, rng);
    let w = &g * g.adjoint();
    let h = HermitianOperator::new(w)?;
    let s = h.spectral()?;
    let mut values = s.values.clone();
    for v in values.iter_mut().take(d - rank) {
        *v = 0.0;
    }
    DensityMatrix::from_parts(values, s.vectors.clone())
}

/// `U diag(spec) U†` with Haar-random `U`.
pub fn density_with_spectrum<R: Rng + ?Sized>(spec: &[f64], rng: &mut R) -> Result<DensityMatrix> {
    if spec.is_empty() {
        return Err(Error::BadSpectrum("empty spectrum".into()));
    }
    if spec.iter().any(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::BadSpectrum(format!("negative entry in {spec:?}")));
    }
    let sum: f64 = spec.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadSpectrum(format!("entries sum to {sum}")));
    }
    let u = haar_unitary(spec.len(), rng);
    DensityMatrix::from_parts(spec.to_vec(), u)
}

/// A pair `(ρ, σ)` on `d` dimensions sharing an exact common kernel of
/// dimension `d - k`: σ has rank `k`, ρ has a random rank in `1..=k`.
pub fn common_kernel_pair<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    if k == 0 || k > d {
        return Err(Error::DomainViolation(format!("support dimension {k} outside 1..={d}")));
    }
    let rho_rank = rng.random_range(1..=k);
    let rho_inner = sample_density(k, rho_rank, rng)?;
    let sigma_inner = sample_density(k, k, rng)?;
    let u = haar_unitary(d, rng);
    Ok((rho_inner.embed(d, &u)?, sigma_inner.embed(d, &u)?))
}

/// True iff ρ carries at most `tol` weight on the kernel of σ, i.e.
/// `tr((1 - P_σ) ρ) ≤ tol`.
pub fn kernel_included(sigma: &DensityMatrix, rho: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(kernel_weight(sigma, rho)? <= tol)
}

/// `tr((1 - P_σ) ρ)`.
pub fn kernel_weight(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(sigma.dim(), rho.dim()));
    }
    let vecs = sigma.eigenvectors();
    let m = rho.matrix();
    let mut weight = 0.0;
    for (j, &b) in sigma.spectrum().iter().enumerate() {
        if b > 0.0 {
            continue;
        }
        let v = vecs.column(j);
        weight += (v.adjoint() * m * v)[(0, 0)].re;
    }
    Ok(weight.max(0.0))
}

/// Kronecker product `ρ₁ ⊗ ρ₂` with spectrum equal to all pairwise products.
pub fn tensor(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DensityMatrix> {
    let s1 = rho1.spectrum();
    let s2 = rho2.spectrum();
    let values: Vec<f64> = s1.iter().flat_map(|a| s2.iter().map(move |b| a * b)).collect();
    let vectors = rho1.eigenvectors().kronecker(rho2.eigenvectors());
    DensityMatrix::from_parts(values, vectors)
}

/// Which factor of a bipartite system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace over one factor of a `dim_a · dim_b` system.
pub fn partial_trace(rho: &DensityMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<DensityMatrix> {
    let d = rho.dim();
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != d {
        return Err(Error::BadFactorization { dim: d, dim_a, dim_b });
    }
    let m = rho.matrix();
    let out = match keep {
        Keep::A => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Keep::B => CMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
    };
    DensityMatrix::from_matrix(out, DEFAULT_STATE_TOL)
}

/// `λρ₁ + (1-λ)ρ₂`.
pub fn mix(lambda: f64, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::DomainViolation(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let m = rho1.matrix().map(|z| z * lambda) + rho2.matrix().map(|z| z * (1.0 - lambda));
    DensityMatrix::from_matrix(m, DEFAULT_STATE_TOL)
}

/// Eigenvalue constants used by the continuity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Largest eigenvalue of ρ.
    pub a1: f64,
    /// Largest eigenvalue of σ.
    pub b1: f64,
    /// Smallest nonzero eigenvalue of σ.
    pub b0: f64,
    /// Smallest eigenvalue over both spectra, zeros included.
    pub lambda0: f64,
    /// Largest eigenvalue over both spectra.
    pub lambda1: f64,
}

impl SpectralSummary {
    pub fn of(rho: &DensityMatrix, sigma: &DensityMatrix) -> Self {
        let a1 = rho.max_eigenvalue();
        let b1 = sigma.max_eigenvalue();
        Self {
            a1,
            b1,
            b0: sigma.min_nonzero_eigenvalue(),
            lambda0: rho.min_eigenvalue().min(sigma.min_eigenvalue()),
            lambda1: a1.max(b1),
        }
    }
}

/// On-disk state: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.nrows();
        let row = |f: fn(&C64) -> f64, i: usize| (0..d).map(|j| f(&m[(i, j)])).collect();
        Self {
            dim: d,
            re: (0..d).map(|i| row(|z| z.re, i)).collect(),
            im: (0..d).map(|i| row(|z| z.im, i)).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Parse(format!("rows do not form a {d}x{d} matrix")));
        }
        Ok(DMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }

    /// JSON text with every number printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        fn rows(rows: &[Vec<f64>]) -> String {
            let body: Vec<String> = rows
                .iter()
                .map(|r| {
                    let nums: Vec<String> = r.iter().map(|x| format!("{x:.16e}")).collect();
                    format!("[{}]", nums.join(", "))
                })
                .collect();
            format!("[{}]", body.join(", "))
        }
        format!(
            "{{\"dim\": {}, \"re\": {}, \"im\": {}}}\n",
            self.dim,
            rows(&self.re),
            rows(&self.im)
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_matrix(self.to_matrix()?, DEFAULT_STATE_TOL)
    }
}

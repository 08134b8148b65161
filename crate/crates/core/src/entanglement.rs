//! Reduced single-mode states of pure two-mode states, with von Neumann
//! entropy and purity.

use alloc::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState, HERMITIAN_TOL, TAIL_WARNING};
use crate::linalg::HermitianSpectrum;

const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_CLAMP, 0]` are treated as zero.
const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<FockBasis>,
    matrix: DMatrix<Complex64>,
    eigenvalues: alloc::vec::Vec<f64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity on a single-mode
    /// basis.
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        basis.expect_modes(1)?;
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::InvalidDensity("matrix size does not match basis"));
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > HERMITIAN_TOL) {
            return Err(Error::InvalidDensity("not Hermitian"));
        }
        if (matrix.trace() - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity("trace differs from 1"));
        }
        let eigenvalues = HermitianSpectrum::new(&matrix).sorted_values();
        if eigenvalues.first().is_some_and(|&e| e < -EIGEN_CLAMP) {
            return Err(Error::InvalidDensity("negative eigenvalue"));
        }
        Ok(DensityMatrix { basis, matrix, eigenvalues })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// Partial trace of a normalized two-mode state, keeping mode `keep`
/// (0 or 1 in basis order).
pub fn reduced_density(state: &QuantumState, keep: usize) -> Result<DensityMatrix> {
    let basis = state.basis();
    basis.expect_modes(2)?;
    basis.expect_full()?;
    if keep > 1 {
        return Err(Error::ModeOutOfRange { mode: keep, modes: 2 });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > TAIL_WARNING {
        return Err(Error::Unnormalized { norm });
    }
    let d = basis.cutoff() + 1;
    // amplitudes reshaped so rows index the kept mode
    let psi = DMatrix::from_fn(d, d, |i, k| {
        let idx = if keep == 0 { i * d + k } else { k * d + i };
        state.amplitudes()[idx]
    });
    let rho = &psi * psi.adjoint();
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(FockBasis::full(1, basis.cutoff())?, rho)
}

/// `-sum p ln p` over eigenvalues, in nats.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    -rho.eigenvalues.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

/// Entropy of the mode-1 reduction.
pub fn entanglement_entropy(state: &QuantumState) -> Result<f64> {
    Ok(entropy(&reduced_density(state, 0)?))
}

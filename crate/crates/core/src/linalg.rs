//! Dense complex matrix functions: the matrix exponential and Hermitian
//! spectral propagators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring around a degree-13 Padé approximant.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(2f64.powi(-squarings), 0.0);

    let ident = DMatrix::<Complex64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &scaled * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let numer = &v + &u;
    let denom = &v - &u;
    let mut result = denom.lu().solve(&numer).expect("Pade denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigendecomposition of a Hermitian matrix, reusable for many evolution
/// times.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
}

impl HermitianSpectrum {
    pub fn new(h: &DMatrix<Complex64>) -> Self {
        if h.nrows() == 0 {
            return HermitianSpectrum { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) };
        }
        // Symmetrize so round-off asymmetry does not leak into the solver.
        let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        HermitianSpectrum { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H t) v`.
    pub fn evolve(&self, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut coeffs = self.vectors.adjoint() * v;
        for (c, &e) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= Complex64::new(0.0, -e * t).exp();
        }
        &self.vectors * coeffs
    }

    /// `exp(-i H t)` as a matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(self.dim(), self.values.iter().map(|&e| Complex64::new(0.0, -e * t).exp()));
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        scaled * self.vectors.adjoint()
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_values(&self) -> alloc::vec::Vec<f64> {
        let mut v: alloc::vec::Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

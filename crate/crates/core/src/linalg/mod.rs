//! Dense complex linear-algebra kernels.
//!
//! Everything above this module works with [`ComplexMatrix`]: Hamiltonians,
//! non-Hermitian perturbations, propagators and density matrices. The kernels
//! here are the matrix exponential ([`expm`]), Hermitian eigendecomposition
//! ([`herm_eig`]), the PSD square root ([`psd_sqrt`]) and the Uhlmann
//! fidelity sandwich ([`uhlmann_fidelity`]).

mod expm;
mod matrix;

pub use expm::expm;
pub use matrix::{ComplexMatrix, MAX_DIM};

use faer::{Mat, Side};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Relative tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default eigenvalue clamp for unit-trace states.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;

/// Spectral decomposition `A = V diag(w) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermEigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl HermEigDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|w| w)
    }

    /// `V diag(f(w)) V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&w| f(w)).collect();
        self.with_spectrum(&weights)
    }

    /// `V diag(weights) V†`
    pub fn with_spectrum(&self, weights: &[f64]) -> ComplexMatrix {
        let v = self.eigenvectors.as_faer();
        let n = v.nrows();
        let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * weights[j]);
        ComplexMatrix::from_faer(&scaled * v.adjoint())
    }

    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        let n = self.eigenvalues.len();
        (0..n).map(|i| self.eigenvectors.get(i, k)).collect()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The input must be Hermitian within `1e-10` relative Frobenius tolerance;
/// the Hermitian part is what gets decomposed.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEigDecomposition> {
    check_hermitian(a)?;
    let sym = a.hermitian_part();
    let evd = sym
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let n = a.dim();
    let s = evd.S();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let eigenvectors = ComplexMatrix::from_faer(evd.U().to_owned());
    Ok(HermEigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only (ascending), for Hermitian input.
pub fn herm_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    a.hermitian_part()
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    a.ensure_finite()?;
    let defect = a.hermiticity_defect();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    if defect > HERMITIAN_TOL * scale && defect > 0.0 {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian: ‖A − A†‖/‖A‖ = {:e}",
            defect / scale
        )));
    }
    Ok(())
}

/// Clamps eigenvalues in `[-clamp_tol, 0)` to zero; anything lower is an error.
fn clamp_spectrum(eigenvalues: &mut [f64], clamp_tol: f64) -> Result<()> {
    for w in eigenvalues.iter_mut() {
        if *w < -clamp_tol {
            return Err(Error::NotPsd {
                eigenvalue: *w,
                tolerance: clamp_tol,
            });
        }
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    Ok(())
}

/// Square root of a Hermitian PSD matrix, returned in decomposed form
/// (eigenvalues are the square roots, all `>= 0`).
pub fn psd_sqrt_decomposed(a: &ComplexMatrix, clamp_tol: f64) -> Result<HermEigDecomposition> {
    let mut eig = herm_eig(a)?;
    clamp_spectrum(&mut eig.eigenvalues, clamp_tol)?;
    for w in eig.eigenvalues.iter_mut() {
        *w = w.sqrt();
    }
    Ok(eig)
}

/// Principal square root `S` of a Hermitian PSD matrix (`S·S = A`).
pub fn psd_sqrt(a: &ComplexMatrix, clamp_tol: f64) -> Result<ComplexMatrix> {
    Ok(psd_sqrt_decomposed(a, clamp_tol)?.reconstruct())
}

/// `(Tr √(√ρ₀ ρₜ √ρ₀))²`, clipped to `[0, 1]`.
///
/// Both arguments must be unit-trace Hermitian PSD within `clamp_tol`;
/// negative eigenvalues of either `ρ₀` or the sandwich below `-clamp_tol`
/// produce [`Error::NotPsd`].
pub fn uhlmann_fidelity(rho0: &ComplexMatrix, rhot: &ComplexMatrix, clamp_tol: f64) -> Result<f64> {
    if rho0.dim() != rhot.dim() {
        return Err(Error::invalid(format!(
            "fidelity arguments differ in dimension: {} vs {}",
            rho0.dim(),
            rhot.dim()
        )));
    }
    let root = psd_sqrt(rho0, clamp_tol)?;
    let sandwich = root.matmul(&rhot.matmul(&root)).hermitian_part();
    let mut w = herm_eigenvalues(&sandwich)?;
    clamp_spectrum(&mut w, clamp_tol)?;
    let root_trace: f64 = w.iter().map(|x| x.sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Singular values of an arbitrary square matrix (descending).
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.as_faer()
        .singular_values()
        .map_err(|_| Error::NoConvergence)
}

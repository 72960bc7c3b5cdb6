use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, herm_eigenvalues, uhlmann_fidelity, ComplexMatrix};

/// Validity tolerance used for evolved states.
pub const DEFAULT_STATE_TOL: f64 = 1e-8;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    tol: f64,
}

impl DensityMatrix {
    /// Validates `matrix` against the invariants at absolute tolerance `tol`.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid("density-matrix tolerance must be positive"));
        }
        matrix.ensure_finite()?;
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::invalid(format!(
                "density matrix is not Hermitian: ‖ρ − ρ†‖ = {defect:e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::invalid(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let w = herm_eigenvalues(&matrix)?;
        if w[0] < -tol {
            return Err(Error::NotPsd {
                eigenvalue: w[0],
                tolerance: tol,
            });
        }
        Ok(Self { matrix, tol })
    }

    /// Re-Hermitizes `(X + X†)/2`, divides by the trace, then validates.
    /// Returns the state and the trace it was divided by.
    pub fn normalize(x: &ComplexMatrix, tol: f64) -> Result<(Self, f64)> {
        let h = x.hermitian_part();
        let trace = h.trace().re;
        if !(trace > 0.0 && trace.is_finite()) {
            return Err(Error::invalid(format!(
                "cannot normalize a matrix with trace {trace:e}"
            )));
        }
        Ok((Self::new(h.scale_real(1.0 / trace), tol)?, trace))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `I / n`
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            tol: DEFAULT_STATE_TOL,
        }
    }
}

/// Boltzmann weights `e^{−β(E − E_min)} / Z` for ascending energies.
pub fn thermal_weights(energies: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies
        .iter()
        .map(|e| (-beta * (e - e_min)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// Gibbs state `e^{−βH} / Tr e^{−βH}` from the eigendecomposition of `H`.
pub fn thermal_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    let eig = herm_eig(h)?;
    let p = thermal_weights(&eig.eigenvalues, beta)?;
    DensityMatrix::new(eig.with_spectrum(&p).hermitian_part(), 1e-10)
}

/// `L = (Tr √(√ρ₀ ρₜ √ρ₀))²`
pub fn loschmidt_echo(rho0: &DensityMatrix, rhot: &DensityMatrix) -> Result<f64> {
    uhlmann_fidelity(rho0.matrix(), rhot.matrix(), rho0.tol().max(rhot.tol()))
}

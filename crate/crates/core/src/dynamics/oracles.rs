//! Closed-form solutions used to cross-check the numerical propagation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// `ψ(t) = e^{−i(EI + λJ)t} a` for the `N × N` Jordan generator
/// `J_{ij} = δ_{i−1,j}`:
/// `ψ_m = e^{−iEt} Σ_{n=0}^{m−1} (−iλt)ⁿ/n! · a_{m−n}`.
pub fn jordan_oracle_state(a: &[C64], lambda: f64, energy: f64, t: f64) -> Vec<C64> {
    let phase = C64::from_polar(1.0, -energy * t);
    let x = C64::new(0.0, -lambda * t);
    // (−iλt)ⁿ/n! for n < N
    let mut series = Vec::with_capacity(a.len());
    let mut term = C64::new(1.0, 0.0);
    for n in 0..a.len() {
        series.push(term);
        term = term * x / (n + 1) as f64;
    }
    (0..a.len())
        .map(|m| phase * (0..=m).map(|n| series[n] * a[m - n]).sum::<C64>())
        .collect()
}

/// Unnormalized `ρ(t) = e^{−iDt} (I/2) e^{iD†t}` for `D = λJ + λ′J†` on two
/// levels. With `θ = √(λλ′) t`:
///
/// `ρ = ½ [[cos²θ + (λ′/λ) sin²θ, (i/2)(λ−λ′)/√(λλ′) sin 2θ],
///         [c.c., cos²θ + (λ/λ′) sin²θ]]`
///
/// and the `λ′ = 0` limit is `½ [[1, iλt], [−iλt, 1 + λ²t²]]`.
pub fn two_level_oracle_rho(lambda: f64, lambda_prime: f64, t: f64) -> Result<ComplexMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(lambda_prime >= 0.0 && lambda_prime.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda_prime must be >= 0, got {lambda_prime}"
        )));
    }
    let (d00, off, d11) = if lambda_prime == 0.0 {
        (1.0, lambda * t, 1.0 + (lambda * t).powi(2))
    } else {
        let r = (lambda * lambda_prime).sqrt();
        let theta = r * t;
        let (s, c) = theta.sin_cos();
        (
            c * c + lambda_prime / lambda * s * s,
            0.5 * (2.0 * theta).sin() * (lambda - lambda_prime) / r,
            c * c + lambda / lambda_prime * s * s,
        )
    };
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.5 * d00, 0.0), C64::new(0.0, 0.5 * off)],
        vec![C64::new(0.0, -0.5 * off), C64::new(0.5 * d11, 0.0)],
    ])
}

/// First-order density matrix for a non-degenerate spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderOracle {
    pub rho: ComplexMatrix,
    /// `min ΔE / max(λ, λ′)`; the expansion needs this ≫ 1.
    pub gap_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `ρ(t) ≈ (I + R(t)) / N` for `H = diag(E) + λJ + λ′J†` with `ρ₀ = I/N`,
/// where `R_{i,i−1} = (λ−λ′)/ΔE_i · (e^{−iΔE_i t} − 1)` and
/// `R_{i−1,i} = R_{i,i−1}*`.
pub fn trivial_phase_firstorder(
    energies: &[f64],
    lambda: f64,
    lambda_prime: f64,
    t: f64,
) -> Result<FirstOrderOracle> {
    let n = energies.len();
    if n == 0 {
        return Err(Error::invalid("need at least one energy"));
    }
    let mut min_gap = f64::INFINITY;
    for w in energies.windows(2) {
        let gap = w[1] - w[0];
        if gap <= 0.0 {
            return Err(Error::SingularParameter(format!(
                "energies must be strictly increasing (gap {gap:e}); degenerate levels need the Jordan oracle"
            )));
        }
        min_gap = min_gap.min(gap);
    }
    let scale = lambda.abs().max(lambda_prime.abs());
    let gap_ratio = if scale > 0.0 {
        min_gap / scale
    } else {
        f64::INFINITY
    };
    let warning = (gap_ratio < 10.0)
        .then(|| format!("level spacing is only {gap_ratio:.3} times the perturbation; first order is unreliable"));
    let inv_n = 1.0 / n as f64;
    let mut rho = ComplexMatrix::identity(n).scale_real(inv_n);
    for i in 1..n {
        let gap = energies[i] - energies[i - 1];
        let r = (C64::from_polar(1.0, -gap * t) - 1.0) * ((lambda - lambda_prime) / gap);
        rho.set(i, i - 1, r * inv_n);
        rho.set(i - 1, i, r.conj() * inv_n);
    }
    Ok(FirstOrderOracle {
        rho,
        gap_ratio,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_level_is_a_phase() {
        let psi = jordan_oracle_state(&[C64::new(0.6, 0.8)], 0.3, 2.0, 1.5);
        assert!((psi[0] - C64::from_polar(1.0, -3.0) * C64::new(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn two_level_first_order_term() {
        let psi = jordan_oracle_state(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1.0, 0.0, 1.0);
        assert_eq!(psi, vec![C64::new(1.0, 0.0), C64::new(0.0, -1.0)]);
    }

    #[test]
    fn two_level_limits() {
        let rho = two_level_oracle_rho(0.1, 0.1, 37.0).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let rho = two_level_oracle_rho(0.1, 0.0, 10.0).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![C64::new(0.5, 0.0), C64::new(0.0, 0.5)],
            vec![C64::new(0.0, -0.5), C64::new(1.0, 0.0)],
        ])
        .unwrap();
        assert!(rho.max_abs_diff(&expected) < 1e-15);
        // tiny λ′ approaches the polynomial branch
        let near = two_level_oracle_rho(0.1, 1e-12, 10.0).unwrap();
        assert!(near.max_abs_diff(&expected) < 1e-9);
        assert!(two_level_oracle_rho(0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn first_order_is_identity_when_balanced() {
        let o = trivial_phase_firstorder(&[0.0, 1.0, 2.5], 0.01, 0.01, 7.0).unwrap();
        assert!(
            o.rho
                .max_abs_diff(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0))
                < 1e-16
        );
        assert!(o.warning.is_none());
    }

    #[test]
    fn first_order_entries_are_bounded() {
        let o = trivial_phase_firstorder(&[0.0, 1.0], 0.01, 0.0, 3.0).unwrap();
        assert!(o.rho.get(1, 0).norm() <= 0.02 / 2.0 + 1e-15);
    }

    #[test]
    fn repeated_energies_are_rejected() {
        assert!(matches!(
            trivial_phase_firstorder(&[0.0, 0.0], 0.1, 0.0, 1.0),
            Err(Error::SingularParameter(_))
        ));
        let o = trivial_phase_firstorder(&[0.0, 0.5], 0.1, 0.0, 1.0).unwrap();
        assert!(o.warning.is_some());
    }
}

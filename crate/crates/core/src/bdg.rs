//! Bogoliubov–de Gennes solver for the quadratic models.
//!
//! The Nambu spinor is `Ψ = (a_0 … a_{D−1}, a_0† … a_{D−1}†)` with `D`
//! fermionic modes laid out as in [`crate::opalg`]. A quadratic Hamiltonian
//! `Σ h_ij a_i† a_j + ½ Σ (Δ_ij a_i† a_j† + h.c.) + c` equals
//! `½ Ψ† M Ψ + ½ Tr h + c` with `M = [[h, Δ], [Δ†, −hᵀ]]`.
//!
//! A vector `(u, v)` in Nambu space stands for the operator
//! `Σ u_i a_i† + v_i a_i`. Majorana operators are written in the real basis
//! `c_{2i} = a_i + a_i†`, `c_{2i+1} = −i(a_i − a_i†)`, so the operator with
//! `v = u*` has real coefficients `r_{2i} = Re u_i`, `r_{2i+1} = Im u_i` and
//! squares to `Σ r²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix, C64};
use crate::models::ModelSpec;

/// Minimum ratio between the first bulk level and the zero-mode pair.
pub const ZERO_MODE_GAP_RATIO: f64 = 10.0;

/// Default share of the chain counted as an edge.
pub const DEFAULT_EDGE_FRACTION: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct BdgMatrix {
    matrix: ComplexMatrix,
    sites: usize,
    modes_per_site: usize,
    /// `½ Tr h + c`, the many-body energy of `½Ψ†MΨ = 0`.
    offset: f64,
}

impl BdgMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn modes_per_site(&self) -> usize {
        self.modes_per_site
    }

    /// Fermionic modes `D`; the Nambu matrix is `2D × 2D`.
    pub fn n_modes(&self) -> usize {
        self.sites * self.modes_per_site
    }

    /// All `2D` eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::linalg::herm_eigenvalues(&self.matrix)
    }

    /// The `D` non-negative quasiparticle energies, ascending.
    pub fn quasiparticle_energies(&self) -> Result<Vec<f64>> {
        let e = self.eigenvalues()?;
        let d = self.n_modes();
        // ±ε pairs: the upper half, ascending, is the non-negative branch
        Ok(e[d..].iter().map(|x| x.abs()).collect())
    }

    /// `‖τx M* τx + M‖_max`; zero for a valid Nambu matrix.
    pub fn phs_residual(&self) -> f64 {
        let d = self.n_modes();
        let m = &self.matrix;
        let swap = |i: usize| if i < d { i + d } else { i - d };
        let mut worst: f64 = 0.0;
        for i in 0..2 * d {
            for j in 0..2 * d {
                worst = worst.max((m.get(swap(i), swap(j)).conj() + m.get(i, j)).norm());
            }
        }
        worst
    }

    /// Every many-body level `E₀ + Σ n_k ε_k`, ascending.
    ///
    /// Enumerates all `2^D` occupations, so `D` is capped at 16.
    pub fn many_body_spectrum(&self) -> Result<Vec<f64>> {
        let d = self.n_modes();
        if d > 16 {
            return Err(Error::Capacity {
                requested: 1 << d,
                max: 1 << 16,
            });
        }
        let eps = self.quasiparticle_energies()?;
        let e0 = self.offset - 0.5 * eps.iter().sum::<f64>();
        let mut levels: Vec<f64> = (0..1usize << d)
            .map(|occ| {
                e0 + (0..d)
                    .filter(|k| occ & (1 << k) != 0)
                    .map(|k| eps[k])
                    .sum::<f64>()
            })
            .collect();
        levels.sort_by(f64::total_cmp);
        Ok(levels)
    }
}

/// Quadratic form `h`, antisymmetric pairing `Δ` and constant.
struct Quadratic {
    h: Vec<Vec<C64>>,
    delta: Vec<Vec<C64>>,
    constant: f64,
}

impl Quadratic {
    fn new(d: usize) -> Self {
        let zero = vec![vec![C64::new(0.0, 0.0); d]; d];
        Self {
            h: zero.clone(),
            delta: zero,
            constant: 0.0,
        }
    }

    /// `x a_i† a_j + h.c.` (or `x n_i` for `i = j`, `x` real).
    fn hop(&mut self, i: usize, j: usize, x: C64) {
        if i == j {
            self.h[i][i] += x.re;
        } else {
            self.h[i][j] += x;
            self.h[j][i] += x.conj();
        }
    }

    /// `x a_i† a_j† + h.c.`
    fn pair(&mut self, i: usize, j: usize, x: f64) {
        self.delta[i][j] += x;
        self.delta[j][i] -= x;
    }

    fn into_nambu(self) -> (ComplexMatrix, f64) {
        let d = self.h.len();
        let m = ComplexMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
            (true, true) => self.h[i][j],
            (true, false) => self.delta[i][j - d],
            (false, true) => self.delta[j][i - d].conj(),
            (false, false) => -self.h[j - d][i - d],
        });
        let trace: f64 = (0..d).map(|i| self.h[i][i].re).sum();
        (m, 0.5 * trace + self.constant)
    }
}

/// Nambu matrix of a Kitaev or nanowire chain, assembled from the model
/// parameters directly (independent of the many-body builder).
pub fn build_bdg(spec: &ModelSpec) -> Result<BdgMatrix> {
    spec.validate()?;
    let re = |x: f64| C64::new(x, 0.0);
    match *spec {
        ModelSpec::Kitaev {
            sites,
            t,
            mu,
            delta,
        } => {
            let mut q = Quadratic::new(sites);
            for j in 0..sites {
                q.hop(j, j, re(-mu));
            }
            for j in 0..sites - 1 {
                q.hop(j, j + 1, re(-t));
                // Δ a_{j+1}† a_j† + h.c.
                q.pair(j + 1, j, delta);
            }
            q.constant = 0.5 * mu * sites as f64;
            let (matrix, offset) = q.into_nambu();
            Ok(BdgMatrix {
                matrix,
                sites,
                modes_per_site: 1,
                offset,
            })
        }
        ModelSpec::Nanowire {
            sites,
            t,
            mu,
            alpha,
            v,
            delta,
        } => {
            let mut q = Quadratic::new(2 * sites);
            let mode = |i: usize, s: usize| 2 * i + s;
            for i in 0..sites {
                for s in 0..2 {
                    let sigma = if s == 0 { 1.0 } else { -1.0 };
                    q.hop(mode(i, s), mode(i, s), re(2.0 * t - mu));
                    if i + 1 < sites {
                        q.hop(mode(i + 1, s), mode(i, s), -C64::new(t, -alpha * sigma));
                    }
                }
                q.hop(mode(i, 0), mode(i, 1), re(v));
                // Δ a_↓† a_↑† + h.c.
                q.pair(mode(i, 1), mode(i, 0), delta);
            }
            let (matrix, offset) = q.into_nambu();
            Ok(BdgMatrix {
                matrix,
                sites,
                modes_per_site: 2,
                offset,
            })
        }
        _ => Err(Error::invalid(format!(
            "no BdG form for the {} model",
            spec.name()
        ))),
    }
}

/// Fit of the left zero mode's first-site spinor to
/// `s(i e^{iφ} a_↑† + e^{−iφ} a_↓†) + h.c.`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseFit {
    /// In `[0, π)`; the sign ambiguity is carried by `scale`.
    pub phi: f64,
    pub scale: f64,
    /// Squared misfit divided by the spinor's squared norm.
    pub residual: f64,
}

/// Two self-conjugate edge modes of a BdG matrix.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroModePair {
    /// The two eigenvalues nearest zero.
    pub energies: [f64; 2],
    /// Smallest remaining |E| divided by the larger zero-mode |E|.
    pub gap_ratio: f64,
    /// Real Majorana coefficients, unit norm (`γ² = 1`), left-localized.
    pub gamma: Vec<f64>,
    /// Right-localized partner, orthogonal to `gamma`.
    pub gamma_prime: Vec<f64>,
    /// Weight of `gamma` on the left edge and `gamma_prime` on the right.
    pub edge_weights: (f64, f64),
    pub edge_sites: usize,
    pub modes_per_site: usize,
    pub phase: Option<PhaseFit>,
}

impl ZeroModePair {
    pub fn sites(&self) -> usize {
        self.gamma.len() / (2 * self.modes_per_site)
    }

    /// Share of `coeffs` on the first (`from_left`) or last `count` sites.
    pub fn site_weight(&self, coeffs: &[f64], count: usize, from_left: bool) -> f64 {
        let per_site = 2 * self.modes_per_site;
        let sites = self.sites();
        let range = if from_left {
            0..count.min(sites)
        } else {
            sites.saturating_sub(count)..sites
        };
        let total: f64 = coeffs.iter().map(|x| x * x).sum();
        let part: f64 = range
            .flat_map(|s| s * per_site..(s + 1) * per_site)
            .map(|k| coeffs[k] * coeffs[k])
            .sum();
        part / total
    }

    /// `u_i` of `Σ u_i a_i† + h.c.` from real Majorana coefficients.
    pub fn creation_amplitudes(coeffs: &[f64]) -> Vec<C64> {
        coeffs.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
    }

    /// Coefficients restricted to the edge sites and renormalized.
    pub fn truncated(&self) -> (Vec<f64>, Vec<f64>) {
        let per_site = 2 * self.modes_per_site;
        let sites = self.sites();
        let cut = |coeffs: &[f64], keep: &dyn Fn(usize) -> bool| {
            let mut out: Vec<f64> = coeffs
                .iter()
                .enumerate()
                .map(|(k, &x)| if keep(k / per_site) { x } else { 0.0 })
                .collect();
            let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
            out.iter_mut().for_each(|x| *x /= norm);
            out
        };
        let e = self.edge_sites;
        (
            cut(&self.gamma, &|s| s < e),
            cut(&self.gamma_prime, &|s| s + e >= sites),
        )
    }
}

/// Edge sites for a chain of `sites` at `fraction`; at least one.
pub fn edge_site_count(sites: usize, fraction: f64) -> usize {
    ((fraction * sites as f64).round() as usize).clamp(1, sites)
}

/// Isolates the Majorana zero-mode pair of `bdg`.
///
/// Fails with [`Error::NotTopological`] unless the two levels nearest zero
/// sit at least [`ZERO_MODE_GAP_RATIO`] below the rest of the spectrum.
pub fn extract_zero_modes(bdg: &BdgMatrix, edge_fraction: f64) -> Result<ZeroModePair> {
    if !(edge_fraction > 0.0 && edge_fraction <= 0.5) {
        return Err(Error::invalid(format!(
            "edge_fraction must lie in (0, 0.5], got {edge_fraction}"
        )));
    }
    let eig = herm_eig(bdg.matrix())?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .abs()
            .total_cmp(&eig.eigenvalues[b].abs())
    });
    let zero_scale = eig.eigenvalues[order[1]].abs();
    let bulk = eig.eigenvalues[order[2]].abs();
    let gap_ratio = if zero_scale > 0.0 {
        bulk / zero_scale
    } else {
        f64::INFINITY
    };
    if gap_ratio < ZERO_MODE_GAP_RATIO {
        return Err(Error::NotTopological(format!(
            "lowest levels |E| = {zero_scale:.3e} and {bulk:.3e} are not separated by a factor {ZERO_MODE_GAP_RATIO}"
        )));
    }

    let d = bdg.n_modes();
    // Self-conjugate (Hermitian) combinations of each eigenvector, written
    // in the real Majorana basis
    let mut candidates = Vec::with_capacity(4);
    for &k in &order[..2] {
        let psi = eig.eigenvector(k);
        let (u, v) = psi.split_at(d);
        let w1: Vec<C64> = (0..d).map(|i| u[i] + v[i].conj()).collect();
        let w2: Vec<C64> = (0..d)
            .map(|i| C64::new(0.0, 1.0) * (u[i] - v[i].conj()))
            .collect();
        for w in [w1, w2] {
            candidates.push(w.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>());
        }
    }
    let basis = orthonormal_basis(candidates, 2)?;

    let sites = bdg.sites();
    let per_site = 2 * bdg.modes_per_site();
    let edge_sites = edge_site_count(sites, edge_fraction);
    let left =
        |x: &[f64], y: &[f64]| -> f64 { (0..edge_sites * per_site).map(|k| x[k] * y[k]).sum() };
    // Maximize left weight over unit combinations cos θ e₀ + sin θ e₁
    let (q00, q01, q11) = (
        left(&basis[0], &basis[0]),
        left(&basis[0], &basis[1]),
        left(&basis[1], &basis[1]),
    );
    let theta = 0.5 * (2.0 * q01).atan2(q00 - q11);
    let (c, s) = (theta.cos(), theta.sin());
    let mut gamma: Vec<f64> = basis[0]
        .iter()
        .zip(&basis[1])
        .map(|(a, b)| c * a + s * b)
        .collect();
    let mut gamma_prime: Vec<f64> = basis[0]
        .iter()
        .zip(&basis[1])
        .map(|(a, b)| -s * a + c * b)
        .collect();
    fix_sign(&mut gamma);
    fix_sign(&mut gamma_prime);

    let mut pair = ZeroModePair {
        energies: [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]],
        gap_ratio,
        gamma,
        gamma_prime,
        edge_weights: (0.0, 0.0),
        edge_sites,
        modes_per_site: bdg.modes_per_site(),
        phase: None,
    };
    pair.edge_weights = (
        pair.site_weight(&pair.gamma, edge_sites, true),
        pair.site_weight(&pair.gamma_prime, edge_sites, false),
    );
    if bdg.modes_per_site() == 2 {
        let u = ZeroModePair::creation_amplitudes(&pair.gamma[..4]);
        pair.phase = Some(fit_edge_phase(u[0], u[1]));
    }
    Ok(pair)
}

/// Gram–Schmidt keeping the first `rank` independent vectors.
fn orthonormal_basis(vectors: Vec<Vec<f64>>, rank: usize) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rank);
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    for mut v in vectors {
        for _ in 0..2 {
            for b in &basis {
                let overlap: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= overlap * y);
            }
        }
        let n = norm(&v);
        if n > 1e-6 * scale {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
            if basis.len() == rank {
                return Ok(basis);
            }
        }
    }
    Err(Error::NoConvergence)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Makes the largest-magnitude coefficient positive.
fn fix_sign(v: &mut [f64]) {
    let lead = v.iter().copied().fold(
        0.0f64,
        |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc },
    );
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Least-squares fit of `(u_↑, u_↓) ≈ s (i e^{iφ}, e^{−iφ})`.
///
/// The misfit is `‖u‖² − 2s f(φ) + 2s²` with
/// `f(φ) = Re(−i e^{−iφ} u_↑ + e^{iφ} u_↓) = P cos φ + Q sin φ`, so the
/// optimum is `φ = atan2(Q, P)` and `s = f/2`.
pub fn fit_edge_phase(up: C64, down: C64) -> PhaseFit {
    let p = up.im + down.re;
    let q = -up.re - down.im;
    let mut phi = q.atan2(p);
    let mut scale = 0.5 * (p * p + q * q).sqrt();
    if phi < 0.0 {
        phi += PI;
        scale = -scale;
    }
    if phi >= PI {
        phi -= PI;
        scale = -scale;
    }
    let total = up.norm_sqr() + down.norm_sqr();
    let misfit = (total - 2.0 * scale * scale).max(0.0);
    PhaseFit {
        phi,
        scale,
        residual: if total > 0.0 { misfit / total } else { 0.0 },
    }
}

/// Roots `x±` of the Kitaev zero-mode ansatz `γ ∝ Σ_j (α₊x₊^j + α₋x₋^j) c_{2j−1}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KitaevLocalization {
    pub x_plus: C64,
    pub x_minus: C64,
}

impl KitaevLocalization {
    pub fn max_modulus(&self) -> f64 {
        self.x_plus.norm().max(self.x_minus.norm())
    }

    /// Both roots inside the unit circle.
    pub fn is_normalizable(&self) -> bool {
        self.max_modulus() < 1.0
    }
}

/// `x± = (−μ ± √(μ² − 4t² + 4Δ²)) / (2(t + Δ))`
pub fn kitaev_x_pm(spec: &ModelSpec) -> Result<KitaevLocalization> {
    let ModelSpec::Kitaev { t, mu, delta, .. } = *spec else {
        return Err(Error::invalid(format!(
            "x± is defined for the Kitaev chain, got {}",
            spec.name()
        )));
    };
    let denom = 2.0 * (t + delta);
    if denom.abs() < 1e-300 {
        return Err(Error::SingularParameter("t + Δ = 0".into()));
    }
    let root = C64::new(mu * mu - 4.0 * t * t + 4.0 * delta * delta, 0.0).sqrt();
    Ok(KitaevLocalization {
        x_plus: (-mu + root) / denom,
        x_minus: (-mu - root) / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweet_spot_single_particle_energies() {
        let bdg = build_bdg(&ModelSpec::kitaev(2, 1.0, 0.0, 1.0)).unwrap();
        let e = bdg.eigenvalues().unwrap();
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (x, y) in e.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{e:?}");
        }
        assert!(bdg.phs_residual() < 1e-14);
    }

    #[test]
    fn sweet_spot_modes_are_end_majoranas() {
        let n = 4;
        let zm = extract_zero_modes(
            &build_bdg(&ModelSpec::kitaev(n, 1.0, 0.0, 1.0)).unwrap(),
            0.1,
        )
        .unwrap();
        let mut c1 = vec![0.0; 2 * n];
        c1[0] = 1.0;
        let mut c2n = vec![0.0; 2 * n];
        c2n[2 * n - 1] = 1.0;
        let diff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        assert!(diff(&zm.gamma, &c1) < 1e-12, "{:?}", zm.gamma);
        assert!(diff(&zm.gamma_prime, &c2n) < 1e-12, "{:?}", zm.gamma_prime);
    }

    #[test]
    fn trivial_chain_has_no_pair() {
        let bdg = build_bdg(&ModelSpec::kitaev(20, 1.0, 2.9, 1.0)).unwrap();
        assert!(matches!(
            extract_zero_modes(&bdg, 0.1),
            Err(Error::NotTopological(_))
        ));
    }

    #[test]
    fn x_pm_examples() {
        let x = kitaev_x_pm(&ModelSpec::kitaev(4, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(x.max_modulus(), 0.0);
        let x = kitaev_x_pm(&ModelSpec::kitaev(4, 1.0, 1.0, 1.0)).unwrap();
        assert!(x.x_plus.norm() < 1e-15 && (x.x_minus - C64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(!kitaev_x_pm(&ModelSpec::kitaev(4, 1.0, 2.5, 1.0))
            .unwrap()
            .is_normalizable());
        assert!(matches!(
            kitaev_x_pm(&ModelSpec::Kitaev {
                sites: 4,
                t: -1.0,
                mu: 0.0,
                delta: 1.0
            }),
            Err(Error::SingularParameter(_))
        ));
    }

    #[test]
    fn phase_fit_recovers_exact_form() {
        for phi in [0.0, 0.36, 1.2, 3.0] {
            let up = C64::new(0.0, 0.7) * C64::from_polar(1.0, phi);
            let down = C64::from_polar(0.7, -phi);
            let fit = fit_edge_phase(up, down);
            assert!((fit.phi - phi).abs() < 1e-12, "{phi} -> {fit:?}");
            assert!((fit.scale - 0.7).abs() < 1e-12 && fit.residual < 1e-24);
        }
    }

    #[test]
    fn rejects_unsupported_model() {
        assert!(build_bdg(&ModelSpec::parafermion(3, 1.0, 1.0)).is_err());
    }
}

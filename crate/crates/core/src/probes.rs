//! Non-Hermitian probe operators and their exceptional-point diagnostics.
//!
//! Every probe is built in the literal operator form on the full many-body
//! space. Projection onto the low-energy cluster only happens when a probe is
//! validated by [`jordan_form_report`].

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::bdg::{build_bdg, extract_zero_modes, ZeroModePair, DEFAULT_EDGE_FRACTION};
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, singular_values, ComplexMatrix, C64};
use crate::models::ModelSpec;
use crate::opalg::{ModeOperatorSet, Statistics};

/// Sign in `J = γ ± iγ′`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Single-edge and two-edge nanowire probes used for robustness checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxVariant {
    Delta1,
    Delta2,
    Delta3,
    Delta4,
}

/// Recipe for the perturbation added to the post-quench Hamiltonian.
/// Serialized with a `"probe"` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum ProbeSpec {
    /// `λ(a₁ + a₁† ± (a_N − a_N†))`
    KitaevEdge {
        lambda: f64,
        #[serde(default)]
        branch: Branch,
    },
    /// `λJ + λ′J†` with the `+` Kitaev edge probe `J`.
    KitaevRandomized { lambda: f64, lambda_prime: f64 },
    /// `κ₁ J_a + κ₂ J_b`, one Kitaev edge probe per chain.
    DoubleKitaevEdge { kappa1: f64, kappa2: f64 },
    /// `λ(γ + iγ′)` from the edge form of the nanowire zero modes, with `φ`
    /// read off a BdG solve of `reference` (a 50-site wire by default).
    NanowireMzm {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<ModelSpec>,
    },
    NanowireAux {
        variant: AuxVariant,
        lambda: f64,
        phi: f64,
    },
    /// `λα₁`
    ParafermionApprox { lambda: f64 },
    /// `λ(α₁ + e^{−iπ/3} α_{2N})`
    ParafermionExact { lambda: f64 },
}

/// Reference wire whose BdG zero modes fix `φ` for [`ProbeSpec::NanowireMzm`].
pub fn default_nanowire_reference() -> ModelSpec {
    ModelSpec::nanowire(50, 1.0, 0.5, 0.5, 1.5, 1.0)
}

impl ProbeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeSpec::KitaevEdge { .. } => "kitaev_edge",
            ProbeSpec::KitaevRandomized { .. } => "kitaev_randomized",
            ProbeSpec::DoubleKitaevEdge { .. } => "double_kitaev_edge",
            ProbeSpec::NanowireMzm { .. } => "nanowire_mzm",
            ProbeSpec::NanowireAux { .. } => "nanowire_aux",
            ProbeSpec::ParafermionApprox { .. } => "parafermion_approx",
            ProbeSpec::ParafermionExact { .. } => "parafermion_exact",
        }
    }

    /// Overall strength `λ` (for double-Kitaev, the larger κ).
    pub fn strength(&self) -> f64 {
        match *self {
            ProbeSpec::KitaevEdge { lambda, .. }
            | ProbeSpec::KitaevRandomized { lambda, .. }
            | ProbeSpec::NanowireMzm { lambda, .. }
            | ProbeSpec::NanowireAux { lambda, .. }
            | ProbeSpec::ParafermionApprox { lambda }
            | ProbeSpec::ParafermionExact { lambda } => lambda,
            ProbeSpec::DoubleKitaevEdge { kappa1, kappa2 } => kappa1.abs().max(kappa2.abs()),
        }
    }

    /// Checks finiteness and signs of the strengths.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("{}: {what}", self.name())));
        match *self {
            ProbeSpec::KitaevRandomized {
                lambda,
                lambda_prime,
            } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return bad("lambda must be finite and >= 0");
                }
                if !(lambda_prime.is_finite() && lambda_prime >= 0.0) {
                    return bad("lambda_prime must be finite and >= 0");
                }
            }
            ProbeSpec::DoubleKitaevEdge { kappa1, kappa2 } => {
                if !(kappa1.is_finite() && kappa2.is_finite()) {
                    return bad("kappa1 and kappa2 must be finite");
                }
            }
            ProbeSpec::NanowireAux { lambda, phi, .. } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return bad("lambda must be finite and >= 0");
                }
                if !phi.is_finite() {
                    return bad("phi must be finite");
                }
            }
            _ => {
                let lambda = self.strength();
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return bad("lambda must be finite and >= 0");
                }
            }
        }
        if let ProbeSpec::NanowireMzm {
            reference: Some(r), ..
        } = self
        {
            if !matches!(r, ModelSpec::Nanowire { .. }) {
                return bad("reference must be a nanowire model");
            }
        }
        Ok(())
    }

    /// Whether `model` is a family this probe can act on.
    pub fn supports(&self, model: &ModelSpec) -> bool {
        matches!(
            (self, model),
            (
                ProbeSpec::KitaevEdge { .. } | ProbeSpec::KitaevRandomized { .. },
                ModelSpec::Kitaev { .. }
            ) | (
                ProbeSpec::DoubleKitaevEdge { .. },
                ModelSpec::DoubleKitaev { .. }
            ) | (
                ProbeSpec::NanowireMzm { .. } | ProbeSpec::NanowireAux { .. },
                ModelSpec::Nanowire { .. }
            ) | (
                ProbeSpec::ParafermionApprox { .. } | ProbeSpec::ParafermionExact { .. },
                ModelSpec::Parafermion { .. }
            )
        )
    }

    /// The zero-mode pair this probe needs, if any, solved from its reference.
    pub fn zero_modes(&self) -> Result<Option<ZeroModePair>> {
        match self {
            ProbeSpec::NanowireMzm { reference, .. } => {
                let reference = reference.unwrap_or_else(default_nanowire_reference);
                let bdg = build_bdg(&reference)?;
                extract_zero_modes(&bdg, DEFAULT_EDGE_FRACTION).map(Some)
            }
            _ => Ok(None),
        }
    }
}

fn expect_fermions(ops: &ModeOperatorSet, what: &str) -> Result<()> {
    if ops.statistics() != Statistics::Fermion {
        return Err(Error::invalid(format!("{what} needs fermionic modes")));
    }
    Ok(())
}

/// `a_first + a_first† + s(a_last − a_last†)`
fn kitaev_edge(ops: &ModeOperatorSet, first: usize, last: usize, sign: f64) -> ComplexMatrix {
    let a1 = ops.op(first);
    let an = ops.op(last);
    let mut j = a1 + &a1.adjoint();
    j += &(an - &an.adjoint()).scale_real(sign);
    j
}

/// `x a† + y a` on mode `m`.
fn edge_term(ops: &ModeOperatorSet, m: usize, create: C64, annihilate: C64) -> ComplexMatrix {
    let a = ops.op(m);
    &a.adjoint().scale(create) + &a.scale(annihilate)
}

/// Edge operators of the nanowire written with phase `φ`. Site `first` and
/// `last` are many-body sites; mode `2·site + s` has spin `s` (↑ = 0).
fn nanowire_terms(ops: &ModeOperatorSet, phi: f64) -> NanowireEdge<'_> {
    NanowireEdge {
        ops,
        e: C64::from_polar(1.0, phi),
        i: C64::new(0.0, 1.0),
    }
}

struct NanowireEdge<'a> {
    ops: &'a ModeOperatorSet,
    /// `e^{iφ}`
    e: C64,
    i: C64,
}

impl NanowireEdge<'_> {
    fn last_site(&self) -> usize {
        self.ops.len() / 2 - 1
    }

    /// `ie^{iφ}a†_{1↑} − ie^{−iφ}a_{1↑}`
    fn first_up(&self) -> ComplexMatrix {
        edge_term(self.ops, 0, self.i * self.e, -self.i * self.e.conj())
    }

    /// `e^{−iφ}a†_{1↓} + e^{iφ}a_{1↓}`
    fn first_down(&self) -> ComplexMatrix {
        edge_term(self.ops, 1, self.e.conj(), self.e)
    }

    /// `ie^{−iφ}a†_{N↑} − ie^{iφ}a_{N↑}`
    fn last_up(&self) -> ComplexMatrix {
        edge_term(
            self.ops,
            2 * self.last_site(),
            self.i * self.e.conj(),
            -self.i * self.e,
        )
    }

    /// `−e^{iφ}a†_{N↓} − e^{−iφ}a_{N↓}`
    fn last_down(&self) -> ComplexMatrix {
        edge_term(self.ops, 2 * self.last_site() + 1, -self.e, -self.e.conj())
    }

    fn gamma(&self) -> ComplexMatrix {
        &self.first_up() + &self.first_down()
    }

    fn gamma_prime(&self) -> ComplexMatrix {
        &self.last_up() + &self.last_down()
    }

    fn aux(&self, variant: AuxVariant) -> ComplexMatrix {
        let (i, e) = (self.i, self.e);
        let n = self.last_site();
        match variant {
            // ie^{iφ}a†_{1↑} − ie^{−iφ}a_{1↑} − ie^{iφ}a†_{N↓} − ie^{−iφ}a_{N↓}
            AuxVariant::Delta1 => {
                &self.first_up() + &edge_term(self.ops, 2 * n + 1, -i * e, -i * e.conj())
            }
            // ie^{iφ}a†_{1↑} − ie^{−iφ}a_{1↑} − e^{−iφ}a†_{N↑} + e^{iφ}a_{N↑}
            AuxVariant::Delta2 => &self.first_up() + &edge_term(self.ops, 2 * n, -e.conj(), e),
            AuxVariant::Delta3 => self.gamma(),
            AuxVariant::Delta4 => self.gamma_prime(),
        }
    }
}

/// The perturbation matrix of `spec` on `ops` (`λJ`, `λJ + λ′J†`, or
/// `κ₁J₁ + κ₂J₂`).
///
/// [`ProbeSpec::NanowireMzm`] needs the zero-mode pair carrying `φ`.
pub fn build_probe(
    spec: &ProbeSpec,
    ops: &ModeOperatorSet,
    zm: Option<&ZeroModePair>,
) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = ops.len();
    let j = match *spec {
        ProbeSpec::KitaevEdge { lambda, branch } => {
            expect_fermions(ops, spec.name())?;
            kitaev_edge(ops, 0, n - 1, branch.sign()).scale_real(lambda)
        }
        ProbeSpec::KitaevRandomized {
            lambda,
            lambda_prime,
        } => {
            expect_fermions(ops, spec.name())?;
            let j = kitaev_edge(ops, 0, n - 1, 1.0);
            &j.scale_real(lambda) + &j.adjoint().scale_real(lambda_prime)
        }
        ProbeSpec::DoubleKitaevEdge { kappa1, kappa2 } => {
            expect_fermions(ops, spec.name())?;
            if n % 2 != 0 || n < 4 {
                return Err(Error::invalid(
                    "double_kitaev_edge needs two chains of at least two sites",
                ));
            }
            let half = n / 2;
            let ja = kitaev_edge(ops, 0, half - 1, 1.0);
            let jb = kitaev_edge(ops, half, n - 1, 1.0);
            &ja.scale_real(kappa1) + &jb.scale_real(kappa2)
        }
        ProbeSpec::NanowireMzm { lambda, .. } => {
            expect_fermions(ops, spec.name())?;
            let zm = zm.ok_or_else(|| {
                Error::invalid("nanowire_mzm needs the zero-mode pair of the reference wire")
            })?;
            let phase = zm.phase.ok_or_else(|| {
                Error::invalid("zero-mode pair carries no spin phase (not a nanowire solve)")
            })?;
            check_spinful(ops)?;
            let edge = nanowire_terms(ops, phase.phi);
            (&edge.gamma() + &edge.gamma_prime().scale(C64::new(0.0, 1.0))).scale_real(lambda)
        }
        ProbeSpec::NanowireAux {
            variant,
            lambda,
            phi,
        } => {
            expect_fermions(ops, spec.name())?;
            check_spinful(ops)?;
            nanowire_terms(ops, phi).aux(variant).scale_real(lambda)
        }
        ProbeSpec::ParafermionApprox { lambda } => {
            expect_parafermions(ops, spec.name())?;
            ops.op(0).scale_real(lambda)
        }
        ProbeSpec::ParafermionExact { lambda } => {
            expect_parafermions(ops, spec.name())?;
            let phase = C64::from_polar(1.0, -PI / 3.0);
            (ops.op(0) + &ops.op(n - 1).scale(phase)).scale_real(lambda)
        }
    };
    Ok(j)
}

fn check_spinful(ops: &ModeOperatorSet) -> Result<()> {
    if ops.len() < 4 || ops.len() % 2 != 0 {
        return Err(Error::invalid(
            "nanowire probes need at least two spinful sites",
        ));
    }
    Ok(())
}

fn expect_parafermions(ops: &ModeOperatorSet, what: &str) -> Result<()> {
    match ops.statistics() {
        Statistics::Parafermion { d: 3 } => Ok(()),
        other => Err(Error::invalid(format!(
            "{what} needs Z3 parafermions, got {other:?}"
        ))),
    }
}

/// Branch `s ∈ {+1, −1}` minimizing `‖[J, P] − 2sJ‖_F`, and that residual.
pub fn parity_commutator_residual(j: &ComplexMatrix, parity: &ComplexMatrix) -> Result<(i8, f64)> {
    if j.dim() != parity.dim() {
        return Err(Error::invalid(format!(
            "J is {0}×{0} but P is {1}×{1}",
            j.dim(),
            parity.dim()
        )));
    }
    let comm = j.commutator(parity);
    let twice = j.scale_real(2.0);
    let plus = (&comm - &twice).frobenius_norm();
    let minus = (&comm + &twice).frobenius_norm();
    Ok(if plus <= minus {
        (1, plus)
    } else {
        (-1, minus)
    })
}

/// Tolerances for [`jordan_form_report`].
#[derive(Clone, Debug)]
pub struct JordanOptions {
    /// Width for grouping eigenvalues into the ground cluster (absolute).
    pub degeneracy_tol: f64,
    /// `‖R^k‖ ≤ tol · ‖R‖^k` counts as zero.
    pub nilpotency_tol: f64,
    /// Singular values below `tol · σ_max` count as zero.
    pub rank_tol: f64,
    /// Parity operator on the full space (e.g. `P_γ = iγγ′` or the total
    /// parity); projected onto the cluster for the residual.
    pub parity: Option<ComplexMatrix>,
}

impl JordanOptions {
    pub fn new(degeneracy_tol: f64) -> Self {
        Self {
            degeneracy_tol,
            nilpotency_tol: 1e-8,
            rank_tol: 1e-8,
            parity: None,
        }
    }

    /// Default width: `1e-6 ×` the spectral range of `h`.
    pub fn for_hamiltonian(h: &ComplexMatrix) -> Result<Self> {
        let e = crate::linalg::herm_eigenvalues(h)?;
        let range = e[e.len() - 1] - e[0];
        Ok(Self::new(1e-6 * range.max(f64::MIN_POSITIVE)))
    }

    pub fn with_parity(mut self, parity: ComplexMatrix) -> Self {
        self.parity = Some(parity);
        self
    }

    pub fn with_nilpotency_tol(mut self, tol: f64) -> Self {
        self.nilpotency_tol = tol;
        self.rank_tol = tol;
        self
    }
}

/// Structure of a probe restricted to the ground cluster of `H`.
#[derive(Clone, Debug, Serialize)]
pub struct JordanFormReport {
    pub subspace_dim: usize,
    pub cluster_energies: Vec<f64>,
    /// Gap from the cluster to the next level.
    pub gap_above: Option<f64>,
    #[serde(serialize_with = "serialize_mat")]
    pub restricted_j: Mat<C64>,
    pub rank: usize,
    /// Smallest `k` with `R^k = 0`, if `R` is nilpotent.
    pub nilpotency_index: Option<usize>,
    /// `‖R^N‖ / ‖R‖^N`
    pub nilpotency_residual: f64,
    pub single_chain: bool,
    pub parity_branch: Option<i8>,
    /// `‖[R, P] ∓ 2R‖_F / ‖2R‖_F` on the cluster.
    pub parity_residual: Option<f64>,
}

fn serialize_mat<S: serde::Serializer>(m: &Mat<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols())
            .map(|j| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

fn mat_norm(m: &Mat<C64>) -> f64 {
    m.norm_l2()
}

/// Projects `J` onto the ground cluster of `H` and certifies whether it is a
/// single nilpotent Jordan chain there.
pub fn jordan_form_report(
    h: &ComplexMatrix,
    j: &ComplexMatrix,
    options: &JordanOptions,
) -> Result<JordanFormReport> {
    if !(options.degeneracy_tol > 0.0) {
        return Err(Error::invalid("degeneracy_tol must be positive"));
    }
    if h.dim() != j.dim() {
        return Err(Error::invalid("H and J differ in dimension"));
    }
    let eig = herm_eig(h)?;
    let w = &eig.eigenvalues;
    let mut size = 1;
    while size < w.len() && w[size] - w[size - 1] <= options.degeneracy_tol {
        size += 1;
    }
    let v = eig.eigenvectors.as_faer().subcols(0, size).to_owned();
    let restricted = j.project(&v);

    let r_norm = mat_norm(&restricted);
    let mut power = restricted.clone();
    let mut nilpotency_index = None;
    let mut nilpotency_residual = 0.0;
    if r_norm > 0.0 {
        for k in 1..=size {
            let rel = mat_norm(&power) / r_norm.powi(k as i32);
            if k == size {
                nilpotency_residual = rel;
            }
            if rel <= options.nilpotency_tol && nilpotency_index.is_none() {
                nilpotency_index = Some(k);
            }
            power = &power * &restricted;
        }
    } else {
        nilpotency_index = Some(1);
    }

    let rmat = ComplexMatrix::from_faer(restricted.clone());
    let sv = singular_values(&rmat)?;
    let rank = sv
        .iter()
        .filter(|&&s| s > options.rank_tol * sv[0].max(f64::MIN_POSITIVE))
        .count();
    let single_chain = size >= 2 && rank == size - 1 && nilpotency_index == Some(size);

    let (parity_branch, parity_residual) = match &options.parity {
        Some(p) => {
            if p.dim() != h.dim() {
                return Err(Error::invalid("parity operator and H differ in dimension"));
            }
            let pc = ComplexMatrix::from_faer(p.project(&v));
            let (sign, res) = parity_commutator_residual(&rmat, &pc)?;
            let scale = 2.0 * rmat.frobenius_norm();
            (
                Some(sign),
                Some(if scale > 0.0 { res / scale } else { 0.0 }),
            )
        }
        None => (None, None),
    };

    Ok(JordanFormReport {
        subspace_dim: size,
        cluster_energies: w[..size].to_vec(),
        gap_above: w.get(size).map(|e| e - w[size - 1]),
        restricted_j: restricted,
        rank,
        nilpotency_index,
        nilpotency_residual,
        single_chain,
        parity_branch,
        parity_residual,
    })
}

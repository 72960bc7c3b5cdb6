//! Second-quantized operators as dense many-body matrices.
//!
//! Fermionic ladder operators come from the Jordan–Wigner construction and
//! Z_d parafermions from its clock-model analogue (Fradkin–Kadanoff). Basis
//! states are occupation (or clock) numbers with mode 0 as the least
//! significant digit; for spinful chains mode `2·site + s` holds spin `s`
//! (↑ = 0, ↓ = 1).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, MAX_DIM};

/// Tolerance for the operator-algebra identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

const FERMION_MAX_MODES: usize = 12;

/// Tensor-product space of `n_modes` local factors of dimension `local_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: usize,
    local_dim: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize, local_dim: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("a Fock space needs at least one mode"));
        }
        if local_dim < 2 {
            return Err(Error::invalid(format!(
                "local dimension must be >= 2, got {local_dim}"
            )));
        }
        let mut dim: usize = 1;
        for _ in 0..n_modes {
            dim = dim.saturating_mul(local_dim);
            if dim > MAX_DIM {
                return Err(Error::Capacity {
                    requested: dim,
                    max: MAX_DIM,
                });
            }
        }
        Ok(Self { n_modes, local_dim })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.n_modes as u32)
    }

    /// Digit of basis state `index` on `mode`.
    fn digit(&self, index: usize, mode: usize) -> usize {
        (index / self.local_dim.pow(mode as u32)) % self.local_dim
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    Fermion,
    /// Z_d parafermions; two operators per clock site.
    Parafermion {
        d: usize,
    },
}

/// Ladder operators on a [`FockSpace`].
///
/// For fermions `operators[j]` is `a_j`. For parafermions the list holds
/// `α_0 … α_{2n−1}` (two per clock site).
#[derive(Clone, Debug)]
pub struct ModeOperatorSet {
    space: FockSpace,
    statistics: Statistics,
    operators: Vec<ComplexMatrix>,
}

impl ModeOperatorSet {
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn is_fermionic(&self) -> bool {
        self.statistics == Statistics::Fermion
    }

    /// Annihilator (or parafermion) `j`, zero-based.
    pub fn op(&self, j: usize) -> &ComplexMatrix {
        &self.operators[j]
    }

    /// Adjoint of operator `j`.
    pub fn op_dag(&self, j: usize) -> ComplexMatrix {
        self.operators[j].adjoint()
    }

    /// `a_j† a_j`
    pub fn number(&self, j: usize) -> ComplexMatrix {
        self.op_dag(j).matmul(&self.operators[j])
    }

    fn require_fermions(&self, what: &str) -> Result<()> {
        if self.is_fermionic() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} requires fermionic modes")))
        }
    }
}

/// Jordan–Wigner annihilators `a_j = (∏_{k<j} (−1)^{n_k}) σ⁻_j`.
pub fn build_fermion_modes(n_modes: usize) -> Result<ModeOperatorSet> {
    if n_modes == 0 {
        return Err(Error::invalid("need at least one fermion mode"));
    }
    if n_modes > FERMION_MAX_MODES {
        return Err(Error::Capacity {
            requested: 1usize << n_modes.min(63),
            max: MAX_DIM,
        });
    }
    let space = FockSpace::new(n_modes, 2)?;
    let dim = space.dim();
    let operators = (0..n_modes)
        .map(|j| {
            let mut a = ComplexMatrix::zeros(dim);
            let bit = 1usize << j;
            for state in 0..dim {
                if state & bit != 0 {
                    let below = (state & (bit - 1)).count_ones();
                    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                    a.set(state ^ bit, state, C64::new(sign, 0.0));
                }
            }
            a
        })
        .collect();
    Ok(ModeOperatorSet {
        space,
        statistics: Statistics::Fermion,
        operators,
    })
}

/// Majorana operators `c_{2j} = a_j + a_j†`, `c_{2j+1} = −i(a_j − a_j†)`
/// (zero-based, so `c_0, c_1` belong to mode 0).
pub fn majorana_modes(ops: &ModeOperatorSet) -> Result<Vec<ComplexMatrix>> {
    ops.require_fermions("majorana_modes")?;
    let minus_i = C64::new(0.0, -1.0);
    let mut out = Vec::with_capacity(2 * ops.len());
    for a in ops.operators() {
        let a_dag = a.adjoint();
        out.push(a + &a_dag);
        out.push((a - &a_dag).scale(minus_i));
    }
    Ok(out)
}

/// `P = ∏_j (1 − 2 a_j† a_j)`, diagonal ±1.
pub fn total_parity(ops: &ModeOperatorSet) -> Result<ComplexMatrix> {
    ops.require_fermions("total_parity")?;
    let dim = ops.dim();
    let values: Vec<f64> = (0..dim)
        .map(|s| if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    Ok(ComplexMatrix::from_real_diagonal(&values))
}

/// `P_γ = iγγ′` for a pair of anticommuting Majorana operators.
pub fn ground_parity_operator(
    gamma: &ComplexMatrix,
    gamma_prime: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    const TOL: f64 = 1e-8;
    if gamma.dim() != gamma_prime.dim() {
        return Err(Error::invalid("γ and γ′ differ in dimension"));
    }
    let id = ComplexMatrix::identity(gamma.dim());
    let checks: [(&str, f64); 5] = [
        ("γ = γ†", gamma.hermiticity_defect()),
        ("γ′ = γ′†", gamma_prime.hermiticity_defect()),
        ("γ² = I", gamma.matmul(gamma).max_abs_diff(&id)),
        ("γ′² = I", gamma_prime.matmul(gamma_prime).max_abs_diff(&id)),
        ("{γ, γ′} = 0", gamma.anticommutator(gamma_prime).max_abs()),
    ];
    for (relation, residual) in checks {
        if residual > TOL {
            return Err(Error::invalid(format!(
                "{relation} violated (residual {residual:e})"
            )));
        }
    }
    Ok(gamma.matmul(gamma_prime).scale(C64::new(0.0, 1.0)))
}

/// Phase making `α_{2j+1}^d = 1` in the clock representation.
fn odd_parafermion_phase(d: usize) -> C64 {
    C64::from_polar(1.0, -PI * (d as f64 - 1.0) / d as f64)
}

/// Z_d parafermions on `n_sites` clock sites:
/// `α_{2j} = (∏_{k<j} τ_k) σ_j`, `α_{2j+1} = c (∏_{k<j} τ_k) σ_j τ_j`
/// with `σ = diag(ω^k)`, `τ|k⟩ = |k+1⟩`, and `c = e^{−iπ(d−1)/d}`.
pub fn build_parafermion_modes(n_sites: usize, d: usize) -> Result<ModeOperatorSet> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "parafermion order d must be >= 2, got {d}"
        )));
    }
    let space = FockSpace::new(n_sites, d)?;
    let dim = space.dim();
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64);
    let phase = odd_parafermion_phase(d);

    // shift digit `site` by `by` and return new index
    let shift = |index: usize, site: usize, by: usize| {
        let p = d.pow(site as u32);
        let digit = (index / p) % d;
        index - digit * p + ((digit + by) % d) * p
    };
    let string = |mut index: usize, j: usize| {
        for k in 0..j {
            index = shift(index, k, 1);
        }
        index
    };

    let mut operators = Vec::with_capacity(2 * n_sites);
    for j in 0..n_sites {
        let mut even = ComplexMatrix::zeros(dim);
        let mut odd = ComplexMatrix::zeros(dim);
        for state in 0..dim {
            let k = space.digit(state, j);
            even.set(string(state, j), state, omega(k));
            let shifted = shift(state, j, 1);
            odd.set(string(shifted, j), state, phase * omega(k + 1));
        }
        operators.push(even);
        operators.push(odd);
    }
    Ok(ModeOperatorSet {
        space,
        statistics: Statistics::Parafermion { d },
        operators,
    })
}

/// Global Z_d charge `∏_j τ_j` of the clock representation.
pub fn clock_charge(ops: &ModeOperatorSet) -> Result<ComplexMatrix> {
    let Statistics::Parafermion { d } = ops.statistics() else {
        return Err(Error::invalid("clock_charge requires parafermionic modes"));
    };
    let space = ops.space();
    let dim = space.dim();
    let mut q = ComplexMatrix::zeros(dim);
    for state in 0..dim {
        let mut target = 0;
        let mut p = 1;
        for site in 0..space.n_modes() {
            target += ((space.digit(state, site) + 1) % d) * p;
            p *= d;
        }
        q.set(target, state, C64::new(1.0, 0.0));
    }
    Ok(q)
}

/// Worst residual of an algebra check and the relation that produced it.
#[derive(Clone, Debug)]
pub struct AlgebraReport {
    pub max_residual: f64,
    pub worst_relation: String,
    pub relations_checked: usize,
}

impl AlgebraReport {
    fn new() -> Self {
        Self {
            max_residual: 0.0,
            worst_relation: String::new(),
            relations_checked: 0,
        }
    }

    fn record(&mut self, residual: f64, relation: impl FnOnce() -> String) {
        self.relations_checked += 1;
        if residual > self.max_residual || self.worst_relation.is_empty() {
            self.max_residual = residual;
            self.worst_relation = relation();
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

/// Checks every defining relation over all operator pairs (entrywise max-abs).
pub fn algebra_check(ops: &ModeOperatorSet) -> AlgebraReport {
    let mut report = AlgebraReport::new();
    let id = ComplexMatrix::identity(ops.dim());
    let n = ops.len();
    match ops.statistics() {
        Statistics::Fermion => {
            let daggers: Vec<ComplexMatrix> = (0..n).map(|j| ops.op_dag(j)).collect();
            for i in 0..n {
                for (j, dag) in daggers.iter().enumerate() {
                    let mixed = ops.op(i).anticommutator(dag);
                    let residual = if i == j {
                        mixed.max_abs_diff(&id)
                    } else {
                        mixed.max_abs()
                    };
                    report.record(residual, || format!("{{a_{i}, a_{j}†}} = δ"));
                    let same = ops.op(i).anticommutator(ops.op(j)).max_abs();
                    report.record(same, || format!("{{a_{i}, a_{j}}} = 0"));
                }
            }
        }
        Statistics::Parafermion { d } => {
            for j in 0..n {
                let a = ops.op(j);
                let power_d = a.powi(d as u32);
                report.record(power_d.max_abs_diff(&id), || format!("α_{j}^{d} = I"));
                let power_dm1 = a.powi(d as u32 - 1);
                report.record(power_dm1.max_abs_diff(&a.adjoint()), || {
                    format!("α_{j}† = α_{j}^{}", d - 1)
                });
            }
            let omega = C64::from_polar(1.0, 2.0 * PI / d as f64);
            for i in 0..n {
                for j in (i + 1)..n {
                    // i < j: α_i α_j = ω α_j α_i
                    let lhs = ops.op(i).matmul(ops.op(j));
                    let rhs = ops.op(j).matmul(ops.op(i)).scale(omega);
                    report.record(lhs.max_abs_diff(&rhs), || {
                        format!("α_{i} α_{j} = ω α_{j} α_{i}")
                    });
                }
            }
        }
    }
    report
}

/// Exchange phase `q` with `A B = q B A`, if the pair obeys one.
pub fn exchange_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<C64> {
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    let n = a.dim();
    let mut best: Option<(f64, C64)> = None;
    for j in 0..n {
        for i in 0..n {
            let z = ba.get(i, j);
            if best.map_or(true, |(m, _)| z.norm() > m) {
                best = Some((z.norm(), ab.get(i, j) / z));
            }
        }
    }
    let (m, q) = best?;
    if m < 1e-12 {
        return None;
    }
    (ab.max_abs_diff(&ba.scale(q)) < 1e-10).then_some(q)
}

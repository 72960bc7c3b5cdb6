//! The four model families as dense many-body Hamiltonians.
//!
//! Every builder assembles the Hamiltonian literally from ladder-operator
//! products supplied by [`crate::opalg`], with open boundary conditions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::opalg::{self, ModeOperatorSet, Statistics};

fn default_d() -> usize {
    3
}

/// Parameters of one model family. Serialized with a `"model"` tag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Kitaev {
        sites: usize,
        t: f64,
        mu: f64,
        delta: f64,
    },
    /// Two Kitaev chains `a` and `b` joined end to end into a ring by `w`.
    DoubleKitaev {
        sites: usize,
        t: f64,
        mu: f64,
        delta: f64,
        w: f64,
    },
    Nanowire {
        sites: usize,
        t: f64,
        mu: f64,
        alpha: f64,
        #[serde(rename = "V")]
        v: f64,
        delta: f64,
    },
    Parafermion {
        sites: usize,
        h: f64,
        g: f64,
        #[serde(default = "default_d")]
        d: usize,
    },
}

impl ModelSpec {
    pub fn kitaev(sites: usize, t: f64, mu: f64, delta: f64) -> Self {
        ModelSpec::Kitaev {
            sites,
            t,
            mu,
            delta,
        }
    }

    pub fn double_kitaev(sites: usize, t: f64, mu: f64, delta: f64, w: f64) -> Self {
        ModelSpec::DoubleKitaev {
            sites,
            t,
            mu,
            delta,
            w,
        }
    }

    pub fn nanowire(sites: usize, t: f64, mu: f64, alpha: f64, v: f64, delta: f64) -> Self {
        ModelSpec::Nanowire {
            sites,
            t,
            mu,
            alpha,
            v,
            delta,
        }
    }

    pub fn parafermion(sites: usize, h: f64, g: f64) -> Self {
        ModelSpec::Parafermion { sites, h, g, d: 3 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Kitaev { .. } => "kitaev",
            ModelSpec::DoubleKitaev { .. } => "double_kitaev",
            ModelSpec::Nanowire { .. } => "nanowire",
            ModelSpec::Parafermion { .. } => "parafermion",
        }
    }

    pub fn sites(&self) -> usize {
        match *self {
            ModelSpec::Kitaev { sites, .. }
            | ModelSpec::DoubleKitaev { sites, .. }
            | ModelSpec::Nanowire { sites, .. }
            | ModelSpec::Parafermion { sites, .. } => sites,
        }
    }

    fn couplings(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelSpec::Kitaev { t, mu, delta, .. } => vec![("t", t), ("mu", mu), ("delta", delta)],
            ModelSpec::DoubleKitaev {
                t, mu, delta, w, ..
            } => {
                vec![("t", t), ("mu", mu), ("delta", delta), ("w", w)]
            }
            ModelSpec::Nanowire {
                t,
                mu,
                alpha,
                v,
                delta,
                ..
            } => {
                vec![
                    ("t", t),
                    ("mu", mu),
                    ("alpha", alpha),
                    ("V", v),
                    ("delta", delta),
                ]
            }
            ModelSpec::Parafermion { h, g, .. } => vec![("h", h), ("g", g)],
        }
    }

    /// Checks finiteness, chain length, sign of Δ and d = 3.
    pub fn validate(&self) -> Result<()> {
        if self.sites() < 2 {
            return Err(Error::invalid(format!(
                "{}: sites must be >= 2, got {}",
                self.name(),
                self.sites()
            )));
        }
        for (field, value) in self.couplings() {
            if !value.is_finite() {
                return Err(Error::invalid(format!(
                    "{}: {field} must be finite",
                    self.name()
                )));
            }
        }
        match *self {
            ModelSpec::Kitaev { delta, .. } | ModelSpec::DoubleKitaev { delta, .. }
                if delta < 0.0 =>
            {
                Err(Error::invalid(format!(
                    "{}: delta must be >= 0, got {delta}",
                    self.name()
                )))
            }
            ModelSpec::Parafermion { d, .. } if d != 3 => Err(Error::invalid(format!(
                "parafermion: only d = 3 is supported, got {d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Number of operators the model needs from [`ModeOperatorSet`].
    pub fn required_modes(&self) -> usize {
        match *self {
            ModelSpec::Kitaev { sites, .. } => sites,
            ModelSpec::DoubleKitaev { sites, .. } | ModelSpec::Nanowire { sites, .. } => 2 * sites,
            ModelSpec::Parafermion { sites, .. } => 2 * sites,
        }
    }

    /// Many-body dimension, or `None` if it overflows `usize`.
    pub fn hilbert_dim(&self) -> Option<usize> {
        let local: usize = match *self {
            ModelSpec::Parafermion { d, .. } => d,
            _ => 2,
        };
        let factors = match *self {
            ModelSpec::Parafermion { sites, .. } => sites,
            _ => self.required_modes(),
        };
        local.checked_pow(u32::try_from(factors).ok()?)
    }

    /// Builds the matching operator set.
    pub fn operators(&self) -> Result<ModeOperatorSet> {
        self.validate()?;
        match *self {
            ModelSpec::Parafermion { sites, d, .. } => opalg::build_parafermion_modes(sites, d),
            _ => opalg::build_fermion_modes(self.required_modes()),
        }
    }

    fn check_ops(&self, ops: &ModeOperatorSet) -> Result<()> {
        let expected_stats = match *self {
            ModelSpec::Parafermion { d, .. } => Statistics::Parafermion { d },
            _ => Statistics::Fermion,
        };
        if ops.statistics() != expected_stats || ops.len() != self.required_modes() {
            return Err(Error::invalid(format!(
                "{} with {} sites needs {} {:?} operators, got {} {:?}",
                self.name(),
                self.sites(),
                self.required_modes(),
                expected_stats,
                ops.len(),
                ops.statistics()
            )));
        }
        Ok(())
    }
}

/// One ladder operator: `Op(j)` is `a_j`, `Dag(j)` is `a_j†`.
#[derive(Clone, Copy)]
enum Ladder {
    Op(usize),
    Dag(usize),
}

use Ladder::{Dag, Op};

/// Accumulates `coeff · x·y` products of ladder operators.
struct Builder<'a> {
    ops: &'a ModeOperatorSet,
    daggers: Vec<ComplexMatrix>,
    h: ComplexMatrix,
}

impl<'a> Builder<'a> {
    fn new(ops: &'a ModeOperatorSet) -> Self {
        let daggers = (0..ops.len()).map(|j| ops.op_dag(j)).collect();
        Self {
            ops,
            daggers,
            h: ComplexMatrix::zeros(ops.dim()),
        }
    }

    fn get(&self, l: Ladder) -> &ComplexMatrix {
        match l {
            Op(j) => self.ops.op(j),
            Dag(j) => &self.daggers[j],
        }
    }

    fn term(&mut self, coeff: C64, x: Ladder, y: Ladder) {
        if coeff != C64::new(0.0, 0.0) {
            let product = self.get(x).matmul(self.get(y)).scale(coeff);
            self.h += &product;
        }
    }

    fn add_identity(&mut self, coeff: f64) {
        self.h += &ComplexMatrix::identity(self.ops.dim()).scale_real(coeff);
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kitaev chain on modes `offset .. offset + sites`.
fn add_kitaev_chain(b: &mut Builder<'_>, offset: usize, sites: usize, t: f64, mu: f64, delta: f64) {
    for j in offset..offset + sites - 1 {
        b.term(re(-t), Dag(j), Op(j + 1));
        b.term(re(-t), Dag(j + 1), Op(j));
        b.term(re(delta), Op(j), Op(j + 1));
        b.term(re(delta), Dag(j + 1), Dag(j));
    }
    for j in offset..offset + sites {
        b.term(re(-mu), Dag(j), Op(j));
    }
    b.add_identity(0.5 * mu * sites as f64);
}

/// Dense many-body Hamiltonian of `spec` on `ops`.
pub fn build_hamiltonian(spec: &ModelSpec, ops: &ModeOperatorSet) -> Result<ComplexMatrix> {
    spec.validate()?;
    spec.check_ops(ops)?;
    let mut b = Builder::new(ops);
    match *spec {
        ModelSpec::Kitaev {
            sites,
            t,
            mu,
            delta,
        } => add_kitaev_chain(&mut b, 0, sites, t, mu, delta),
        ModelSpec::DoubleKitaev {
            sites,
            t,
            mu,
            delta,
            w,
        } => {
            add_kitaev_chain(&mut b, 0, sites, t, mu, delta);
            add_kitaev_chain(&mut b, sites, sites, t, mu, delta);
            let (a1, an, b1, bn) = (0, sites - 1, sites, 2 * sites - 1);
            // −w(a†_N b_1 + b†_1 a_N + b†_N a_1 + a†_1 b_N − a_N b_1 − b†_1 a†_N − b_N a_1 − a†_1 b†_N)
            let terms = [
                (-w, Dag(an), Op(b1)),
                (-w, Dag(b1), Op(an)),
                (-w, Dag(bn), Op(a1)),
                (-w, Dag(a1), Op(bn)),
                (w, Op(an), Op(b1)),
                (w, Dag(b1), Dag(an)),
                (w, Op(bn), Op(a1)),
                (w, Dag(a1), Dag(bn)),
            ];
            for (coeff, x, y) in terms {
                b.term(re(coeff), x, y);
            }
        }
        ModelSpec::Nanowire {
            sites,
            t,
            mu,
            alpha,
            v,
            delta,
        } => {
            // T as listed (σ = +1 for ↑, −1 for ↓), then H = (T + T†)/2
            let mode = |site: usize, s: usize| 2 * site + s;
            let mut tb = Builder::new(ops);
            for i in 0..sites {
                for s in 0..2 {
                    let sigma = if s == 0 { 1.0 } else { -1.0 };
                    let m = mode(i, s);
                    tb.term(re(2.0 * t - mu), Dag(m), Op(m));
                    if i + 1 < sites {
                        tb.term(
                            -C64::new(2.0 * t, -2.0 * alpha * sigma),
                            Dag(mode(i + 1, s)),
                            Op(m),
                        );
                    }
                    tb.term(re(v), Dag(mode(i, 0)), Op(mode(i, 1)));
                    tb.term(re(delta), Op(mode(i, 0)), Op(mode(i, 1)));
                }
            }
            b.h = (&tb.h + &tb.h.adjoint()).scale_real(0.5);
        }
        ModelSpec::Parafermion { sites, h, g, d } => {
            let phase = C64::from_polar(1.0, PI / d as f64);
            for j in 0..sites {
                b.term(phase * h, Dag(2 * j), Op(2 * j + 1));
            }
            for j in 0..sites - 1 {
                b.term(phase.conj() * g, Dag(2 * j + 1), Op(2 * j + 2));
            }
            let hc = b.h.adjoint();
            b.h += &hc;
        }
    }
    Ok(b.h)
}

/// Kitaev Hamiltonian assembled from Majorana bilinears,
/// `(i/2) Σ [−μ c_{2j−1}c_{2j} + (Δ+t) c_{2j}c_{2j+1} + (Δ−t) c_{2j−1}c_{2j+2}]`.
///
/// With the `+μ/2` per-site shift kept in the fermionic form the two agree
/// with no constant offset.
pub fn majorana_form_hamiltonian(spec: &ModelSpec, ops: &ModeOperatorSet) -> Result<ComplexMatrix> {
    let ModelSpec::Kitaev {
        sites,
        t,
        mu,
        delta,
    } = *spec
    else {
        return Err(Error::invalid(format!(
            "Majorana form is defined for the Kitaev chain, got {}",
            spec.name()
        )));
    };
    spec.validate()?;
    spec.check_ops(ops)?;
    let c = opalg::majorana_modes(ops)?;
    let half_i = C64::new(0.0, 0.5);
    let mut h = ComplexMatrix::zeros(ops.dim());
    // zero-based: c[2j] is c_{2j-1} of site j, c[2j+1] is c_{2j}
    for j in 0..sites {
        h += &c[2 * j].matmul(&c[2 * j + 1]).scale(half_i * -mu);
    }
    for j in 0..sites - 1 {
        h += &c[2 * j + 1]
            .matmul(&c[2 * j + 2])
            .scale(half_i * (delta + t));
        h += &c[2 * j].matmul(&c[2 * j + 3]).scale(half_i * (delta - t));
    }
    Ok(h)
}

/// Infinite-chain quasiparticle energies at one momentum, ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BulkSpectrum {
    pub k: f64,
    pub branches: Vec<f64>,
}

/// Analytic bulk bands (two for Kitaev, four for the nanowire).
pub fn bulk_spectrum(spec: &ModelSpec, k: f64) -> Result<BulkSpectrum> {
    let mut branches = match *spec {
        ModelSpec::Kitaev { t, mu, delta, .. } => {
            let e =
                ((2.0 * t * k.cos() + mu).powi(2) + 4.0 * delta * delta * k.sin().powi(2)).sqrt();
            vec![-e, e]
        }
        ModelSpec::Nanowire {
            t,
            mu,
            alpha,
            v,
            delta,
            ..
        } => {
            let eps = 2.0 * t - 2.0 * t * k.cos() - mu;
            let so = 4.0 * alpha * alpha * k.sin().powi(2);
            let base = eps * eps + so + delta * delta + v * v;
            let root = 2.0 * (delta * delta * v * v + v * v * eps * eps + so * eps * eps).sqrt();
            let lower = (base - root).max(0.0).sqrt();
            let upper = (base + root).sqrt();
            vec![-upper, -lower, lower, upper]
        }
        _ => {
            return Err(Error::invalid(format!(
                "no analytic bulk spectrum for {}",
                spec.name()
            )));
        }
    };
    branches.sort_by(f64::total_cmp);
    Ok(BulkSpectrum { k, branches })
}

/// Smallest |E| over `samples` evenly spaced momenta in `[−π, π]`, refined
/// by golden-section search around the best sample.
pub fn min_bulk_gap(spec: &ModelSpec, samples: usize) -> Result<(f64, f64)> {
    let gap = |k: f64| -> Result<f64> {
        let b = bulk_spectrum(spec, k)?;
        Ok(b.branches
            .iter()
            .map(|e| e.abs())
            .fold(f64::INFINITY, f64::min))
    };
    let samples = samples.max(3);
    let dk = 2.0 * PI / (samples - 1) as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..samples {
        let k = -PI + dk * i as f64;
        let g = gap(k)?;
        if g < best.0 {
            best = (g, k);
        }
    }
    let (mut lo, mut hi) = (best.1 - dk, best.1 + dk);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if gap(a)? < gap(b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    let k = 0.5 * (lo + hi);
    let g = gap(k)?;
    Ok(if g < best.0 { (g, k) } else { best })
}

/// Location of the analytic phase transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(
    tag = "parameter",
    content = "critical_value",
    rename_all = "snake_case"
)]
pub enum PhaseBoundary {
    /// Topological for |μ| < μ_c.
    Mu(f64),
    /// Topological for V > V_c.
    #[serde(rename = "V")]
    Zeeman(f64),
    /// Ordered (topological) for g > g_c.
    G(f64),
}

impl PhaseBoundary {
    pub fn critical_value(&self) -> f64 {
        match *self {
            PhaseBoundary::Mu(x) | PhaseBoundary::Zeeman(x) | PhaseBoundary::G(x) => x,
        }
    }
}

pub fn phase_boundary(spec: &ModelSpec) -> Result<PhaseBoundary> {
    match *spec {
        ModelSpec::Kitaev { t, .. } => Ok(PhaseBoundary::Mu(2.0 * t.abs())),
        ModelSpec::Nanowire { mu, delta, .. } => {
            Ok(PhaseBoundary::Zeeman((delta * delta + mu * mu).sqrt()))
        }
        ModelSpec::Parafermion { h, .. } => Ok(PhaseBoundary::G(h)),
        ModelSpec::DoubleKitaev { .. } => Err(Error::invalid(
            "the double Kitaev chain has no closed-form phase boundary",
        )),
    }
}

/// Whether `spec` lies on the topological side of its analytic boundary.
pub fn is_topological(spec: &ModelSpec) -> Result<bool> {
    let boundary = phase_boundary(spec)?;
    Ok(match (*spec, boundary) {
        (ModelSpec::Kitaev { mu, .. }, PhaseBoundary::Mu(c)) => mu.abs() < c,
        (ModelSpec::Nanowire { v, .. }, PhaseBoundary::Zeeman(c)) => v.abs() > c,
        (ModelSpec::Parafermion { g, .. }, PhaseBoundary::G(c)) => g.abs() > c.abs(),
        _ => unreachable!("phase_boundary matched this model"),
    })
}

/// Distance of the control parameter from its critical value, relative to
/// that value (`||μ| − μ_c| / μ_c`, `||V| − V_c| / V_c`, `||g| − g_c| / g_c`).
pub fn relative_boundary_distance(spec: &ModelSpec) -> Result<f64> {
    let boundary = phase_boundary(spec)?;
    let c = boundary.critical_value().abs();
    let x = match *spec {
        ModelSpec::Kitaev { mu, .. } => mu,
        ModelSpec::Nanowire { v, .. } => v,
        ModelSpec::Parafermion { g, .. } => g,
        ModelSpec::DoubleKitaev { .. } => unreachable!("phase_boundary rejected this model"),
    };
    if c == 0.0 {
        return Ok(if x == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((x.abs() - c).abs() / c)
}

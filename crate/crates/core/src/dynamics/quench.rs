use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm, herm_eig, singular_values, ComplexMatrix, C64};
use crate::models::ModelSpec;
use crate::probes::ProbeSpec;

use super::density::{thermal_weights, DensityMatrix, DEFAULT_STATE_TOL};

/// Smallest pre-normalization trace accepted before reporting underflow.
pub const TRACE_FLOOR: f64 = 1e-300;

/// Default inverse temperature of the initial Gibbs state.
pub const DEFAULT_BETA: f64 = 5.0;

/// Integration step and readout cadence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub step: f64,
    pub sample_every: f64,
    pub horizon: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            step: 0.05,
            sample_every: 1.0,
            horizon: 200.0,
        }
    }
}

impl TimeGrid {
    /// Checks positivity and that readouts fall on whole steps.
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("step", self.step),
            ("sample_every", self.sample_every),
            ("horizon", self.horizon),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {x}"
                )));
            }
        }
        if self.sample_every < self.step {
            return Err(Error::invalid("sample_every must be at least one step"));
        }
        let ratio = self.sample_every / self.step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::invalid(format!(
                "sample_every ({}) must be a whole multiple of step ({})",
                self.sample_every, self.step
            )));
        }
        Ok(())
    }

    pub fn steps_per_sample(&self) -> usize {
        (self.sample_every / self.step).round() as usize
    }

    /// Readout count after `t = 0`.
    pub fn samples(&self) -> usize {
        (self.horizon / self.sample_every + 1e-9).floor() as usize
    }

    /// Readout times `0, Δ, 2Δ, …` up to the horizon.
    pub fn times(&self) -> Vec<f64> {
        let sample = self.steps_per_sample() as f64 * self.step;
        (0..=self.samples()).map(|k| k as f64 * sample).collect()
    }
}

/// One readout of the generic propagation.
#[derive(Clone, Debug)]
pub struct EvolvedState {
    pub time: f64,
    pub rho: DensityMatrix,
    /// `Tr(M ρ₀ M†)` before normalization.
    pub trace: f64,
}

/// Propagates `ρ₀` under a (generally non-Hermitian) Hamiltonian.
///
/// `M(t)` is accumulated by multiplying the single-step propagator
/// `expm(−i H step)`; each requested time is snapped to the nearest whole
/// step. The state is normalized only at readouts, so the pre-normalization
/// trace is the full `Tr(M ρ₀ M†)`.
pub fn evolve_quench(
    h_post: &ComplexMatrix,
    rho0: &DensityMatrix,
    times: &[f64],
    step: f64,
) -> Result<Vec<EvolvedState>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(format!(
            "step must be positive and finite, got {step}"
        )));
    }
    if h_post.dim() != rho0.dim() {
        return Err(Error::invalid("Hamiltonian and state differ in dimension"));
    }
    let mut targets = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!(
                "times must be finite and >= 0, got {t}"
            )));
        }
        let n = (t / step).round() as usize;
        if targets.last().is_some_and(|&prev| n < prev) {
            return Err(Error::invalid("times must be ascending"));
        }
        targets.push(n);
    }

    let single = expm(&h_post.scale(C64::new(0.0, -step)))?;
    let mut m = ComplexMatrix::identity(h_post.dim());
    let mut done = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &n in &targets {
        while done < n {
            m = single.matmul(&m);
            done += 1;
        }
        let time = n as f64 * step;
        let unnormalized = m.matmul(&rho0.matrix().matmul(&m.adjoint()));
        let trace = unnormalized.trace().re;
        if !(trace >= TRACE_FLOOR) || !trace.is_finite() {
            return Err(Error::Underflow { time, trace });
        }
        let (rho, trace) = DensityMatrix::normalize(&unnormalized, DEFAULT_STATE_TOL)?;
        out.push(EvolvedState { time, rho, trace });
    }
    Ok(out)
}

/// Run parameters echoed into the output files.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    pub beta: f64,
    pub step: f64,
    pub sample_every: f64,
    pub horizon: f64,
    pub dim: usize,
}

/// `L̄` together with the window it was averaged over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyAverage {
    pub t0: f64,
    pub t1: f64,
    pub value: f64,
}

/// Echo time series of one quench.
#[derive(Clone, Debug, Serialize)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub le_values: Vec<f64>,
    /// Pre-normalization `Tr(M ρ₀ M†)` at each readout.
    pub norm_traces: Vec<f64>,
    pub steady_average: Option<SteadyAverage>,
    pub metadata: RunMetadata,
}

impl QuenchResult {
    /// Computes and stores `L̄` over `[t0, t1]`.
    pub fn with_window(mut self, t0: f64, t1: f64) -> Result<Self> {
        let value = steady_average(&self, t0, t1)?;
        self.steady_average = Some(SteadyAverage { t0, t1, value });
        Ok(self)
    }

    pub fn with_specs(mut self, model: ModelSpec, probe: ProbeSpec) -> Self {
        self.metadata.model = Some(model);
        self.metadata.probe = Some(probe);
        self
    }

    /// `time,le,trace` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,le,trace\n");
        for ((t, l), tr) in self
            .times
            .iter()
            .zip(&self.le_values)
            .zip(&self.norm_traces)
        {
            out.push_str(&format!("{},{},{}\n", fmt17(*t), fmt17(*l), fmt17(*tr)));
        }
        out
    }
}

/// A float with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x:.16e}")
    }
}

/// Echo of the Gibbs state of `h` under `h + perturbation`.
///
/// Works in the eigenbasis of `h`, where `ρ₀ = S²` with `S` diagonal.
/// Instead of `ρ(t)` it propagates the factor `Y = M S`, so that
/// `ρ(t) ∝ Y Y†`, `√ρ₀ ρ(t) √ρ₀ ∝ (SY)(SY)†`, and
/// `L = (Σ σ_i(SY))² / ‖Y‖_F²`. `Y` is rescaled to unit norm after each
/// readout, with the running product of rescalings kept as the trace.
pub fn quench_echo(
    h: &ComplexMatrix,
    perturbation: &ComplexMatrix,
    beta: f64,
    grid: &TimeGrid,
) -> Result<QuenchResult> {
    grid.validate()?;
    if h.dim() != perturbation.dim() {
        return Err(Error::invalid(
            "Hamiltonian and perturbation differ in dimension",
        ));
    }
    perturbation.ensure_finite()?;
    let eig = herm_eig(h)?;
    let p = thermal_weights(&eig.eigenvalues, beta)?;
    let n = h.dim();
    let sqrt_p: Vec<f64> = p.iter().map(|w| w.sqrt()).collect();

    let v = &eig.eigenvectors;
    let rotated = v.adjoint().matmul(&perturbation.matmul(v));
    let post = ComplexMatrix::from_fn(n, |i, j| {
        let diag = if i == j {
            C64::new(eig.eigenvalues[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        diag + rotated.get(i, j)
    });
    let single = expm(&post.scale(C64::new(0.0, -grid.step)))?;
    let sample = single.powi(grid.steps_per_sample() as u32);

    let times = grid.times();
    let mut le_values = Vec::with_capacity(times.len());
    let mut norm_traces = Vec::with_capacity(times.len());
    le_values.push(1.0);
    norm_traces.push(1.0);

    let mut y = ComplexMatrix::from_real_diagonal(&sqrt_p);
    let mut trace = 1.0;
    for &time in &times[1..] {
        y = sample.matmul(&y);
        let norm_sq = y.frobenius_norm().powi(2);
        if !(norm_sq >= TRACE_FLOOR) || !norm_sq.is_finite() {
            return Err(Error::Underflow {
                time,
                trace: trace * norm_sq,
            });
        }
        y = y.scale_real(1.0 / norm_sq.sqrt());
        trace *= norm_sq;
        let sy = ComplexMatrix::from_fn(n, |i, j| y.get(i, j) * sqrt_p[i]);
        let root_trace: f64 = singular_values(&sy)?.iter().sum();
        le_values.push((root_trace * root_trace).clamp(0.0, 1.0));
        norm_traces.push(trace);
    }

    Ok(QuenchResult {
        times,
        le_values,
        norm_traces,
        steady_average: None,
        metadata: RunMetadata {
            model: None,
            probe: None,
            beta,
            step: grid.step,
            sample_every: grid.sample_every,
            horizon: grid.horizon,
            dim: n,
        },
    })
}

/// `(1/(t₁−t₀)) ∫ L dt` by the trapezoid rule, interpolating linearly at
/// window edges that fall between readouts.
pub fn steady_average(result: &QuenchResult, t0: f64, t1: f64) -> Result<f64> {
    let times = &result.times;
    let values = &result.le_values;
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::invalid("empty time series"));
    };
    let slack = 1e-9 * last.abs().max(1.0);
    if !(t0 < t1) || t0 < first - slack || t1 > last + slack {
        return Err(Error::invalid(format!(
            "window [{t0}, {t1}] must be increasing and inside the grid [{first}, {last}]"
        )));
    }
    let t0 = t0.max(first);
    let t1 = t1.min(last);
    let at = |t: f64| -> f64 {
        let k = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
        let (ta, tb) = (times[k - 1], times[k]);
        let s = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
        values[k - 1] + s * (values[k] - values[k - 1])
    };
    let mut nodes = vec![(t0, at(t0))];
    nodes.extend(
        times
            .iter()
            .zip(values)
            .filter(|(&t, _)| t > t0 && t < t1)
            .map(|(&t, &l)| (t, l)),
    );
    nodes.push((t1, at(t1)));
    let integral: f64 = nodes
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(integral / (t1 - t0))
}

//! Batch driver: single quenches, 1D/2D parameter sweeps and their CSV, JSON
//! and SVG artifacts.
//!
//! Sweep points run in parallel on a dedicated thread pool; each point is a
//! single-threaded deterministic quench, and results are gathered in grid
//! order so outputs are byte-identical across runs and job counts.

mod config;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    resolve_field, with_field, Axis, FieldTarget, RunConfig, SweepAxes, DEFAULT_AXIS_POINTS,
};

use crate::bdg::{build_bdg, extract_zero_modes, ZeroModePair};
use crate::dynamics::{fmt17, quench_echo, QuenchResult};
use crate::error::{Error, Result};
use crate::models::{build_hamiltonian, is_topological, relative_boundary_distance, ModelSpec};
use crate::opalg::{total_parity, Statistics};
use crate::probes::{build_probe, jordan_form_report, JordanFormReport, JordanOptions, ProbeSpec};

/// Upper bound on the summed Hilbert dimension over all sweep points.
pub const SWEEP_BUDGET: usize = 1 << 20;

/// `L̄` threshold separating the phases for Majorana models (midpoint of 1/2 and 1).
pub const MAJORANA_THRESHOLD: f64 = 0.75;

/// `L̄` threshold for the Z₃ parafermion chain (midpoint of 1/3 and 1).
pub const PARAFERMION_THRESHOLD: f64 = 2.0 / 3.0;

/// Minimum relative distance from the boundary for a point to count as deep.
pub const DEEP_FRACTION: f64 = 0.2;

/// Samples per direction when tracing the analytic boundary.
const BOUNDARY_SAMPLES: usize = 161;

/// Classification threshold for `model`.
pub fn threshold_for(model: &ModelSpec) -> f64 {
    match model {
        ModelSpec::Parafermion { .. } => PARAFERMION_THRESHOLD,
        _ => MAJORANA_THRESHOLD,
    }
}

/// Echo of one `(model, probe)` pair, with `L̄` over `window`.
pub fn simulate(
    model: &ModelSpec,
    probe: &ProbeSpec,
    zero_modes: Option<&ZeroModePair>,
    beta: f64,
    grid: &crate::dynamics::TimeGrid,
    window: (f64, f64),
) -> Result<QuenchResult> {
    let ops = model.operators()?;
    let h = build_hamiltonian(model, &ops)?;
    let perturbation = build_probe(probe, &ops, zero_modes)?;
    quench_echo(&h, &perturbation, beta, grid)?
        .with_window(window.0, window.1)
        .map(|r| r.with_specs(*model, probe.clone()))
}

/// Runs the single quench described by `config`.
pub fn run_quench(config: &RunConfig) -> Result<QuenchResult> {
    let zm = config.probe.zero_modes()?;
    simulate(
        &config.model,
        &config.probe,
        zm.as_ref(),
        config.beta,
        &config.grid,
        config.window,
    )
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes `<name>.csv`, `<name>.json` and `<name>.svg` for a quench.
pub fn write_quench(result: &QuenchResult, name: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    let points: Vec<(f64, f64)> = result
        .times
        .iter()
        .copied()
        .zip(result.le_values.iter().copied())
        .collect();
    let title = match result.steady_average {
        Some(avg) => format!("{name}: L̄ = {:.4} over [{}, {}]", avg.value, avg.t0, avg.t1),
        None => name.to_owned(),
    };
    Ok(vec![
        write(dir, &format!("{name}.csv"), &result.to_csv())?,
        write(dir, &format!("{name}.json"), &to_json(result)?)?,
        write(
            dir,
            &format!("{name}.svg"),
            &svg::render_line_plot(&title, "t", "L(t)", &points, &[], false),
        )?,
    ])
}

/// A sweep point that failed, recorded in place of its value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointWarning {
    pub index: usize,
    /// `field=value` pairs naming the point.
    pub point: String,
    pub coords: Vec<f64>,
    pub error: String,
}

/// Per-point comparison of the `L̄` threshold with the analytic phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointClass {
    pub coords: Vec<f64>,
    pub lbar: f64,
    pub predicted_topological: bool,
    pub analytic_topological: bool,
    pub relative_distance: f64,
    pub deep: bool,
}

impl PointClass {
    pub fn agrees(&self) -> bool {
        self.predicted_topological == self.analytic_topological
    }
}

/// Agreement of the thresholded `L̄` grid with the analytic boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub threshold: f64,
    pub deep_fraction: f64,
    pub deep_points: usize,
    pub deep_agreeing: usize,
    /// Deep points whose thresholded phase disagrees with the analytic one.
    pub deep_mismatches: Vec<Vec<f64>>,
    /// Points near the boundary whose thresholded phase disagrees.
    pub boundary_mismatches: Vec<Vec<f64>>,
    pub points: Vec<PointClass>,
}

impl Classification {
    /// Whether every deep point is classified correctly.
    pub fn deep_agreement(&self) -> bool {
        self.deep_mismatches.is_empty()
    }
}

/// Sweep output: `L̄` on the grid, the analytic boundary, and diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub name: String,
    pub model: ModelSpec,
    pub probe: ProbeSpec,
    pub beta: f64,
    pub window: (f64, f64),
    pub axis1: Axis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    /// `lbar[i1][i2]` in `[0, 1]`, NaN (null in JSON) for failed points.
    pub lbar: Vec<Vec<f64>>,
    /// Analytic boundary in `(axis1, axis2)` coordinates (2D sweeps).
    pub boundary: Vec<Vec<[f64; 2]>>,
    /// Analytic critical values along `axis1` (1D sweeps).
    pub critical_points: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    pub warnings: Vec<PointWarning>,
}

impl PhaseDiagram {
    /// `L̄` at grid index `(i1, i2)`; use `i2 = 0` for 1D sweeps.
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.lbar[i1][i2]
    }

    /// `axis1,[axis2,]lbar` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.axis1.field.clone();
        if let Some(a2) = &self.axis2 {
            out.push(',');
            out.push_str(&a2.field);
        }
        out.push_str(",lbar\n");
        for (i, x) in self.axis1.values.iter().enumerate() {
            match &self.axis2 {
                Some(a2) => {
                    for (j, y) in a2.values.iter().enumerate() {
                        out.push_str(&format!(
                            "{},{},{}\n",
                            fmt17(*x),
                            fmt17(*y),
                            fmt17(self.lbar[i][j])
                        ));
                    }
                }
                None => out.push_str(&format!("{},{}\n", fmt17(*x), fmt17(self.lbar[i][0]))),
            }
        }
        out
    }

    /// Heatmap for 2D sweeps, line plot for 1D sweeps.
    pub fn to_svg(&self) -> String {
        let title = format!(
            "{}: L̄ over [{}, {}]",
            self.name, self.window.0, self.window.1
        );
        match &self.axis2 {
            Some(a2) => svg::render_heatmap(
                &title,
                &self.axis1.field,
                &self.axis1.values,
                &a2.field,
                &a2.values,
                &self.lbar,
                &self.boundary,
            ),
            None => {
                let pts: Vec<(f64, f64)> = self
                    .axis1
                    .values
                    .iter()
                    .zip(&self.lbar)
                    .map(|(x, row)| (*x, row[0]))
                    .collect();
                svg::render_line_plot(
                    &title,
                    &self.axis1.field,
                    "L̄",
                    &pts,
                    &self.critical_points,
                    true,
                )
            }
        }
    }
}

/// The specs at one grid point.
/// Grid coordinates with the window-averaged echo and the spec it ran.
type PointOutcome = (Vec<f64>, Result<(f64, ModelSpec)>);

fn point_specs(
    config: &RunConfig,
    axes: &SweepAxes,
    i1: usize,
    i2: usize,
) -> Result<(ModelSpec, ProbeSpec, Vec<f64>)> {
    let x = axes.axis1.values[i1];
    let (mut model, mut probe) = with_field(&config.model, &config.probe, &axes.axis1.field, x)?;
    let mut coords = vec![x];
    if let Some(a2) = &axes.axis2 {
        let y = a2.values[i2];
        (model, probe) = with_field(&model, &probe, &a2.field, y)?;
        coords.push(y);
    }
    Ok((model, probe, coords))
}

fn point_label(axes: &SweepAxes, coords: &[f64]) -> String {
    axes.axes()
        .zip(coords)
        .map(|(a, v)| format!("{}={v:?}", a.field))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Checks the summed Hilbert dimension against [`SWEEP_BUDGET`].
fn check_budget(config: &RunConfig, axes: &SweepAxes) -> Result<()> {
    let n2 = axes.axis2.as_ref().map_or(1, |a| a.values.len());
    let mut total: usize = 0;
    for i1 in 0..axes.axis1.values.len() {
        for i2 in 0..n2 {
            let (model, _, _) = point_specs(config, axes, i1, i2)?;
            let dim = model.hilbert_dim().unwrap_or(usize::MAX);
            total = total.saturating_add(dim);
        }
    }
    if total > SWEEP_BUDGET {
        return Err(Error::Capacity {
            requested: total,
            max: SWEEP_BUDGET,
        });
    }
    Ok(())
}

/// Sign changes of `f` on `[lo, hi]`, refined by bisection.
fn crossings(f: &dyn Fn(f64) -> Option<bool>, lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return Vec::new();
    }
    let n = BOUNDARY_SAMPLES;
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let vals: Vec<Option<bool>> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for k in 0..n - 1 {
        let (Some(a), Some(b)) = (vals[k], vals[k + 1]) else {
            continue;
        };
        if a == b {
            continue;
        }
        let (mut l, mut r) = (xs[k], xs[k + 1]);
        for _ in 0..60 {
            let m = 0.5 * (l + r);
            if f(m) == Some(a) {
                l = m;
            } else {
                r = m;
            }
        }
        out.push(0.5 * (l + r));
    }
    out
}

fn range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        })
}

/// Polylines of the analytic boundary over a 2D grid. Scans along each axis
/// and keeps the direction that finds more crossings; the k-th crossing of
/// consecutive scan lines forms the k-th polyline while the count is stable.
fn trace_boundary(config: &RunConfig, a1: &Axis, a2: &Axis) -> Vec<Vec<[f64; 2]>> {
    let phase = |x: f64, y: f64| -> Option<bool> {
        let (m, p) = with_field(&config.model, &config.probe, &a1.field, x).ok()?;
        let (m, _) = with_field(&m, &p, &a2.field, y).ok()?;
        is_topological(&m).ok()
    };
    let scan = |along_first: bool| -> Vec<Vec<[f64; 2]>> {
        let (r_scan, r_fixed) = if along_first {
            (range(&a1.values), range(&a2.values))
        } else {
            (range(&a2.values), range(&a1.values))
        };
        let n = if r_fixed.1 > r_fixed.0 {
            BOUNDARY_SAMPLES
        } else {
            1
        };
        let mut lines: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        for i in 0..n {
            let fixed = if n == 1 {
                r_fixed.0
            } else {
                r_fixed.0 + (r_fixed.1 - r_fixed.0) * i as f64 / (n - 1) as f64
            };
            let f = |s: f64| {
                if along_first {
                    phase(s, fixed)
                } else {
                    phase(fixed, s)
                }
            };
            let cs = crossings(&f, r_scan.0, r_scan.1);
            if cs.len() != open.len() {
                open = (0..cs.len()).map(|k| lines.len() + k).collect();
                lines.extend(cs.iter().map(|_| Vec::new()));
            }
            for (k, c) in cs.into_iter().enumerate() {
                lines[open[k]].push(if along_first { [c, fixed] } else { [fixed, c] });
            }
        }
        lines.retain(|l| !l.is_empty());
        lines
    };
    let count = |ls: &[Vec<[f64; 2]>]| ls.iter().map(Vec::len).sum::<usize>();
    let first = scan(true);
    let second = scan(false);
    if count(&second) > count(&first) {
        second
    } else {
        first
    }
}

/// Runs every point of the sweep in `config` on `jobs` worker threads.
///
/// Failed points become NaN cells with a [`PointWarning`]; only invalid
/// configs, budget overruns and a failing shared zero-mode solve abort.
pub fn run_sweep(config: &RunConfig, jobs: usize) -> Result<PhaseDiagram> {
    let axes = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("config has no `sweep` section".into()))?;
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    check_budget(config, axes)?;
    let zm = config.probe.zero_modes()?;
    let n1 = axes.axis1.values.len();
    let n2 = axes.axis2.as_ref().map_or(1, |a| a.values.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        (0..n1 * n2)
            .into_par_iter()
            .map(|idx| {
                let (i1, i2) = (idx / n2, idx % n2);
                match point_specs(config, axes, i1, i2) {
                    Ok((model, probe, coords)) => {
                        let run = simulate(
                            &model,
                            &probe,
                            zm.as_ref(),
                            config.beta,
                            &config.grid,
                            config.window,
                        )
                        .map(|r| {
                            (
                                r.steady_average
                                    .map_or(f64::NAN, |a| a.value.clamp(0.0, 1.0)),
                                model,
                            )
                        });
                        (coords, run)
                    }
                    Err(e) => (Vec::new(), Err(e)),
                }
            })
            .collect()
    });

    let mut lbar = vec![vec![f64::NAN; n2]; n1];
    let mut warnings = Vec::new();
    let mut classes = Vec::new();
    let mut classifiable = true;
    let threshold = threshold_for(&config.model);
    for (idx, (coords, outcome)) in outcomes.into_iter().enumerate() {
        let (i1, i2) = (idx / n2, idx % n2);
        match outcome {
            Ok((value, model)) => {
                lbar[i1][i2] = value;
                match (is_topological(&model), relative_boundary_distance(&model)) {
                    (Ok(analytic), Ok(dist)) if value.is_finite() => classes.push(PointClass {
                        coords,
                        lbar: value,
                        predicted_topological: value < threshold,
                        analytic_topological: analytic,
                        relative_distance: dist,
                        deep: dist >= DEEP_FRACTION,
                    }),
                    _ => classifiable = false,
                }
            }
            Err(e) => warnings.push(PointWarning {
                index: idx,
                point: point_label(axes, &coords),
                coords,
                error: e.to_string(),
            }),
        }
    }

    let classification = classifiable.then(|| {
        let deep: Vec<&PointClass> = classes.iter().filter(|c| c.deep).collect();
        Classification {
            threshold,
            deep_fraction: DEEP_FRACTION,
            deep_points: deep.len(),
            deep_agreeing: deep.iter().filter(|c| c.agrees()).count(),
            deep_mismatches: deep
                .iter()
                .filter(|c| !c.agrees())
                .map(|c| c.coords.clone())
                .collect(),
            boundary_mismatches: classes
                .iter()
                .filter(|c| !c.deep && !c.agrees())
                .map(|c| c.coords.clone())
                .collect(),
            points: classes,
        }
    });

    let (boundary, critical_points) = match &axes.axis2 {
        Some(a2) => (trace_boundary(config, &axes.axis1, a2), Vec::new()),
        None => {
            let a1 = &axes.axis1;
            let f = |x: f64| {
                let (m, _) = with_field(&config.model, &config.probe, &a1.field, x).ok()?;
                is_topological(&m).ok()
            };
            let (lo, hi) = range(&a1.values);
            (Vec::new(), crossings(&f, lo, hi))
        }
    };

    Ok(PhaseDiagram {
        name: config.name.clone(),
        model: config.model,
        probe: config.probe.clone(),
        beta: config.beta,
        window: config.window,
        axis1: axes.axis1.clone(),
        axis2: axes.axis2.clone(),
        lbar,
        boundary,
        critical_points,
        classification,
        warnings,
    })
}

/// Writes `phase.csv`, `phase.json` and `phase.svg`.
pub fn write_sweep(diagram: &PhaseDiagram, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write(dir, "phase.csv", &diagram.to_csv())?,
        write(dir, "phase.json", &to_json(diagram)?)?,
        write(dir, "phase.svg", &diagram.to_svg())?,
    ])
}

/// Zero-mode pair of the BdG model in `config`.
pub fn zero_mode_report(config: &RunConfig) -> Result<ZeroModePair> {
    let bdg = build_bdg(&config.model)?;
    extract_zero_modes(&bdg, config.edge_fraction)
}

/// Exceptional-point certificate of the probe in `config` on the ground
/// cluster of its model. Fermionic models also get the parity residual.
pub fn probe_report(config: &RunConfig) -> Result<JordanFormReport> {
    let ops = config.model.operators()?;
    let h = build_hamiltonian(&config.model, &ops)?;
    let zm = config.probe.zero_modes()?;
    let j = build_probe(&config.probe, &ops, zm.as_ref())?;
    let mut options = match config.degeneracy_tol {
        Some(tol) => JordanOptions::new(tol),
        None => JordanOptions::for_hamiltonian(&h)?,
    };
    if ops.statistics() == Statistics::Fermion {
        options = options.with_parity(total_parity(&ops)?);
    }
    jordan_form_report(&h, &j, &options)
}

//! JSON run configuration.
//!
//! A config is one JSON object. The model fields sit at the top level next
//! to the `"model"` tag, exactly as [`ModelSpec`] serializes; the probe is a
//! nested object in [`ProbeSpec`] form. Example:
//!
//! ```json
//! {
//!   "name": "kitaev_mu",
//!   "model": "kitaev", "sites": 8, "t": 1.0, "mu": 0.1, "delta": 1.0,
//!   "probe": { "probe": "kitaev_edge", "lambda": 0.1 },
//!   "window": [100, 200],
//!   "sweep": { "axis1": { "field": "mu", "start": 0, "stop": 3, "count": 21 } }
//! }
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bdg::DEFAULT_EDGE_FRACTION;
use crate::dynamics::{TimeGrid, DEFAULT_BETA};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::probes::ProbeSpec;

/// Grid points per axis when an axis gives `start`/`stop` without `count`.
pub const DEFAULT_AXIS_POINTS: usize = 21;

/// Top-level keys that are not model fields.
const RUN_KEYS: [&str; 10] = [
    "name",
    "probe",
    "beta",
    "step",
    "sample_every",
    "horizon",
    "window",
    "sweep",
    "edge_fraction",
    "degeneracy_tol",
];

/// Probe keys that select a variant rather than hold a number.
const PROBE_NON_NUMERIC: [&str; 4] = ["probe", "variant", "branch", "reference"];

/// One swept parameter and its values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub field: String,
    pub values: Vec<f64>,
}

/// One or two swept parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAxes {
    pub axis1: Axis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
}

impl SweepAxes {
    pub fn axes(&self) -> impl Iterator<Item = &Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.as_ref())
    }

    pub fn len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub model: ModelSpec,
    pub probe: ProbeSpec,
    pub beta: f64,
    pub grid: TimeGrid,
    pub window: (f64, f64),
    pub edge_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    field: String,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis1: RawAxis,
    axis2: Option<RawAxis>,
}

/// 1-based line of the first occurrence of `"key"` in `src`.
fn line_of(src: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn config_error(src: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match line_of(src, key) {
        Some(line) => Error::Config(format!("line {line}, field `{key}`: {msg}")),
        None => Error::Config(format!("field `{key}`: {msg}")),
    }
}

/// The member of `obj` whose value breaks deserialization: removing it
/// either succeeds or turns the error into "missing field" for that member.
/// Needed for tagged enums, whose errors carry no path. The tag itself is
/// skipped, since removing it always reports a missing field.
fn culprit<T: DeserializeOwned>(obj: &Map<String, Value>, tag: &str) -> Option<String> {
    obj.keys().filter(|k| *k != tag).find_map(|k| {
        let mut trial = obj.clone();
        trial.remove(k);
        match serde_json::from_value::<T>(Value::Object(trial)) {
            Ok(_) => Some(k.clone()),
            Err(e) if e.to_string().contains(&format!("missing field `{k}`")) => Some(k.clone()),
            Err(_) => None,
        }
    })
}

/// Deserializes `value`, reporting the failing path below `key`.
fn typed<T: DeserializeOwned>(src: &str, key: &str, value: Value) -> Result<T> {
    let members = value.as_object().cloned();
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut path = e.path().to_string();
        let mut leaf = e.path().iter().next_back().map(|s| s.to_string());
        let msg = e.into_inner();
        if path == "." || path.is_empty() {
            let text = msg.to_string();
            let tag = if text.contains("variant") { "" } else { key };
            let suspect = members
                .as_ref()
                .filter(|_| !text.starts_with("missing"))
                .and_then(|m| culprit::<T>(m, tag));
            if let Some(k) = suspect {
                path = k.clone();
                leaf = Some(k);
            }
        }
        // model fields live at the top level, so their path needs no prefix
        let field = match (path.as_str(), key) {
            ("" | ".", _) => key.to_owned(),
            (p, "model") => p.to_owned(),
            (p, _) => format!("{key}.{p}"),
        };
        let leaf = leaf.unwrap_or_else(|| key.to_owned());
        match line_of(src, &leaf).or_else(|| line_of(src, key)) {
            Some(line) => Error::Config(format!("line {line}, field `{field}`: {msg}")),
            None => Error::Config(format!("field `{field}`: {msg}")),
        }
    })
}

fn take_f64(src: &str, obj: &mut Map<String, Value>, key: &str) -> Result<Option<f64>> {
    obj.remove(key)
        .map(|v| typed::<f64>(src, key, v))
        .transpose()
}

impl Axis {
    fn from_raw(src: &str, key: &str, raw: RawAxis) -> Result<Self> {
        let values = match (raw.values, raw.start, raw.stop) {
            (Some(v), None, None) if raw.count.is_none() => v,
            (None, Some(start), Some(stop)) => {
                let count = raw.count.unwrap_or(DEFAULT_AXIS_POINTS);
                match count {
                    0 => Vec::new(),
                    1 => vec![start],
                    _ => (0..count)
                        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                        .collect(),
                }
            }
            _ => {
                return Err(config_error(
                    src,
                    key,
                    "give either `values` or `start`, `stop` and optional `count`",
                ));
            }
        };
        if values.is_empty() {
            return Err(config_error(src, key, "axis has no values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(config_error(src, key, "axis values must be finite"));
        }
        Ok(Axis {
            field: raw.field,
            values,
        })
    }
}

/// Which spec a swept field belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldTarget {
    Model,
    Probe,
}

/// Resolves `field` to the model or probe, rejecting non-numeric fields.
pub fn resolve_field(model: &ModelSpec, probe: &ProbeSpec, field: &str) -> Result<FieldTarget> {
    let model_value = serde_json::to_value(model).map_err(|e| Error::Config(e.to_string()))?;
    let probe_value = serde_json::to_value(probe).map_err(|e| Error::Config(e.to_string()))?;
    if field != "model" && model_value.get(field).is_some() {
        return Ok(FieldTarget::Model);
    }
    if !PROBE_NON_NUMERIC.contains(&field) && probe_value.get(field).is_some_and(Value::is_number) {
        return Ok(FieldTarget::Probe);
    }
    let mut known: Vec<String> = model_value
        .as_object()
        .into_iter()
        .chain(probe_value.as_object())
        .flat_map(|o| {
            o.iter()
                .filter(|(_, v)| v.is_number())
                .map(|(k, _)| k.clone())
        })
        .collect();
    known.sort();
    known.dedup();
    Err(Error::Config(format!(
        "unknown sweep field `{field}`; sweepable fields are {}",
        known.join(", ")
    )))
}

fn set_number<T: Serialize + DeserializeOwned>(spec: &T, field: &str, value: f64) -> Result<T> {
    let mut v = serde_json::to_value(spec).map_err(|e| Error::Config(e.to_string()))?;
    let slot = v
        .get_mut(field)
        .ok_or_else(|| Error::Config(format!("field `{field}` not present")))?;
    *slot = if slot.is_u64() {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(Error::Config(format!(
                "field `{field}` needs a non-negative integer, got {value}"
            )));
        }
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    serde_json::from_value(v).map_err(|e| Error::Config(format!("field `{field}` = {value}: {e}")))
}

/// Returns copies of `model` and `probe` with `field` set to `value`.
pub fn with_field(
    model: &ModelSpec,
    probe: &ProbeSpec,
    field: &str,
    value: f64,
) -> Result<(ModelSpec, ProbeSpec)> {
    match resolve_field(model, probe, field)? {
        FieldTarget::Model => Ok((set_number(model, field, value)?, probe.clone())),
        FieldTarget::Probe => Ok((*model, set_number(probe, field, value)?)),
    }
}

impl RunConfig {
    /// Parses and validates a JSON config. All failures are [`Error::Config`]
    /// with the offending line and field where they can be located.
    pub fn from_json(src: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(src)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let Value::Object(mut obj) = root else {
            return Err(Error::Config("config must be a JSON object".into()));
        };

        let name = match obj.remove("name") {
            Some(v) => typed::<String>(src, "name", v)?,
            None => "run".to_owned(),
        };
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(config_error(
                src,
                "name",
                "must be a non-empty file stem without path separators",
            ));
        }
        let probe: ProbeSpec = match obj.remove("probe") {
            Some(v) => typed(src, "probe", v)?,
            None => return Err(Error::Config("missing field `probe`".into())),
        };
        let beta = take_f64(src, &mut obj, "beta")?.unwrap_or(DEFAULT_BETA);
        let defaults = TimeGrid::default();
        let grid = TimeGrid {
            step: take_f64(src, &mut obj, "step")?.unwrap_or(defaults.step),
            sample_every: take_f64(src, &mut obj, "sample_every")?.unwrap_or(defaults.sample_every),
            horizon: take_f64(src, &mut obj, "horizon")?.unwrap_or(defaults.horizon),
        };
        let window = match obj.remove("window") {
            Some(v) => {
                let [t0, t1] = typed::<[f64; 2]>(src, "window", v)?;
                (t0, t1)
            }
            None => (0.5 * grid.horizon, grid.horizon),
        };
        let edge_fraction =
            take_f64(src, &mut obj, "edge_fraction")?.unwrap_or(DEFAULT_EDGE_FRACTION);
        let degeneracy_tol = take_f64(src, &mut obj, "degeneracy_tol")?;
        let raw_sweep = obj
            .remove("sweep")
            .map(|v| typed::<RawSweep>(src, "sweep", v))
            .transpose()?;

        if !obj.contains_key("model") {
            return Err(Error::Config("missing field `model`".into()));
        }
        let model_keys: Vec<String> = obj.keys().cloned().collect();
        let model: ModelSpec = typed(src, "model", Value::Object(obj))?;
        let echoed = serde_json::to_value(model).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(extra) = model_keys.iter().find(|k| echoed.get(k.as_str()).is_none()) {
            let mut expected: Vec<&str> = RUN_KEYS.to_vec();
            if let Some(o) = echoed.as_object() {
                expected.extend(o.keys().map(String::as_str));
            }
            return Err(config_error(
                src,
                extra,
                format!(
                    "unknown field for model `{}`; expected one of {}",
                    model.name(),
                    expected.join(", ")
                ),
            ));
        }

        let sweep = match raw_sweep {
            Some(raw) => {
                let axis1 = Axis::from_raw(src, "axis1", raw.axis1)?;
                let axis2 = raw
                    .axis2
                    .map(|a| Axis::from_raw(src, "axis2", a))
                    .transpose()?;
                Some(SweepAxes { axis1, axis2 })
            }
            None => None,
        };

        let config = RunConfig {
            name,
            model,
            probe,
            beta,
            grid,
            window,
            edge_fraction,
            degeneracy_tol,
            sweep,
        };
        config.validate(src)?;
        Ok(config)
    }

    fn validate(&self, src: &str) -> Result<()> {
        let wrap = |key: &str, e: Error| match e {
            Error::Config(_) => e,
            other => config_error(src, key, other),
        };
        self.model.validate().map_err(|e| wrap("model", e))?;
        self.probe.validate().map_err(|e| wrap("probe", e))?;
        if !self.probe.supports(&self.model) {
            return Err(config_error(
                src,
                "probe",
                format!(
                    "probe `{}` cannot act on model `{}`",
                    self.probe.name(),
                    self.model.name()
                ),
            ));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(config_error(src, "beta", "must be finite and positive"));
        }
        self.grid.validate().map_err(|e| wrap("step", e))?;
        let (t0, t1) = self.window;
        if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 < t1 && t1 <= self.grid.horizon) {
            return Err(config_error(
                src,
                "window",
                format!(
                    "need 0 <= t0 < t1 <= horizon = {}, got [{t0}, {t1}]",
                    self.grid.horizon
                ),
            ));
        }
        if !(self.edge_fraction > 0.0 && self.edge_fraction <= 0.5) {
            return Err(config_error(src, "edge_fraction", "must lie in (0, 0.5]"));
        }
        if let Some(tol) = self.degeneracy_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(config_error(
                    src,
                    "degeneracy_tol",
                    "must be finite and positive",
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if let Some(axis2) = &sweep.axis2 {
                if axis2.field == sweep.axis1.field {
                    return Err(config_error(
                        src,
                        "axis2",
                        "axis2 sweeps the same field as axis1",
                    ));
                }
            }
            for (key, axis) in [
                ("axis1", Some(&sweep.axis1)),
                ("axis2", sweep.axis2.as_ref()),
            ] {
                let Some(axis) = axis else { continue };
                resolve_field(&self.model, &self.probe, &axis.field).map_err(|e| wrap(key, e))?;
                for &x in &axis.values {
                    let (m, p) = with_field(&self.model, &self.probe, &axis.field, x)
                        .map_err(|e| wrap(key, e))?;
                    m.validate().map_err(|e| wrap(key, e))?;
                    p.validate().map_err(|e| wrap(key, e))?;
                }
            }
        }
        Ok(())
    }

    /// Reads and parses a config file.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&src)
    }
}

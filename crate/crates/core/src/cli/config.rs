//! Run configuration: file format, command-line overrides and validation.
//!
//! A config file is TOML (or JSON when the file name ends in `.json`):
//!
//! ```toml
//! task = "cfc-check"        # analyze | cfc-check | flag-curvature | beltrami
//! samples = 100
//! seed = 0
//! residual_tol = 1e-6
//! # constancy_tol = 1e-6
//! # projective_factor = "half-funk-norm"
//!
//! [metric]
//! family = "riemannian_matrix"
//! matrix = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1 + x1^2"]]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cfc::{Tolerances, DEFAULT_RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::metrics::{Domain, MetricDefinition, PhasePoint};
use crate::projective::ProjectiveFactor;

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_FLAGS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Analyze,
    CfcCheck,
    FlagCurvature,
    Beltrami,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "analyze" => Ok(Task::Analyze),
            "cfc-check" => Ok(Task::CfcCheck),
            "flag-curvature" => Ok(Task::FlagCurvature),
            "beltrami" => Ok(Task::Beltrami),
            other => Err(Error::Config(format!(
                "unknown task '{other}' (expected analyze, cfc-check, flag-curvature or beltrami)"
            ))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Analyze => "analyze",
            Task::CfcCheck => "cfc-check",
            Task::FlagCurvature => "flag-curvature",
            Task::Beltrami => "beltrami",
        })
    }
}

/// A matrix entry may be written as a number or as an expression string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Expr(String),
}

impl Entry {
    fn source(&self) -> String {
        match self {
            Entry::Number(v) => format!("{v:?}"),
            Entry::Expr(s) => s.clone(),
        }
    }
}

/// Metric description as written in a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Norm expression for `custom`.
    #[serde(default, rename = "F", alias = "f", skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    /// Entries `g_ij(x)` for `riemannian_matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Entry>>>,
    /// Coordinate domain for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MetricSpec {
    /// `euclidean`, `custom:<F>`, `riemannian:<row>;<row>` and so on.
    pub fn from_shorthand(s: &str) -> MetricSpec {
        let s = s.trim();
        if let Some(src) = s.strip_prefix("custom:") {
            return MetricSpec { family: "custom".into(), norm: Some(src.trim().into()), ..Default::default() };
        }
        if let Some(rows) = s.strip_prefix("riemannian:").or_else(|| s.strip_prefix("riemannian_matrix:")) {
            let matrix =
                rows.split(';').map(|r| r.split(',').map(|e| Entry::Expr(e.trim().to_string())).collect()).collect();
            return MetricSpec { family: "riemannian_matrix".into(), matrix: Some(matrix), ..Default::default() };
        }
        MetricSpec { family: s.to_string(), ..Default::default() }
    }

    fn reject(&self, field: &str, path: &str) -> Result<()> {
        Err(Error::Config(format!("{path}.{field} is not used by family '{}'", self.family)))
    }

    pub fn build(&self, path: &str) -> Result<MetricDefinition> {
        let need_n =
            || self.n.ok_or_else(|| Error::Config(format!("{path}.n is required for family '{}'", self.family)));
        let family = self.family.as_str();
        if family != "custom" {
            if self.norm.is_some() {
                self.reject("F", path)?;
            }
            if self.domain.is_some() {
                self.reject("domain", path)?;
            }
        }
        if !matches!(family, "riemannian_matrix" | "riemannian") && self.matrix.is_some() {
            self.reject("matrix", path)?;
        }
        let def = match family {
            "euclidean" => MetricDefinition::euclidean(need_n()?)?,
            "sphere_stereographic" => MetricDefinition::sphere_stereographic(need_n()?)?,
            "klein" => MetricDefinition::klein(need_n()?)?,
            "funk" => MetricDefinition::funk(need_n()?)?,
            "custom" => {
                let src = self
                    .norm
                    .as_deref()
                    .ok_or_else(|| Error::Config(format!("{path}.F is required for family 'custom'")))?;
                MetricDefinition::custom(src, need_n()?, self.domain.unwrap_or(Domain::Whole))?
            }
            "riemannian_matrix" | "riemannian" => {
                let rows = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("{path}.matrix is required for family '{family}'")))?;
                let table: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(Entry::source).collect()).collect();
                let def = MetricDefinition::riemannian(&table)?;
                if let Some(n) = self.n {
                    if n != def.n {
                        return Err(Error::Config(format!("{path}.n = {n} but the matrix is {0}×{0}", def.n)));
                    }
                }
                def
            }
            other => {
                return Err(Error::Config(format!(
                    "{path}.family: unknown metric family '{other}' (expected euclidean, sphere_stereographic, \
                     klein, funk, riemannian_matrix or custom)"
                )))
            }
        };
        Ok(match &self.label {
            Some(l) => def.with_label(l.clone()),
            None => def,
        })
    }
}

/// An explicit evaluation point, optionally with a flag direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse: Option<Vec<f64>>,
}

impl PointSpec {
    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint::new(self.x.clone(), self.y.clone())
    }
}

/// The config file schema. Every field is optional so that command-line
/// flags can supply or override it.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub task: Option<Task>,
    pub metric: Option<MetricSpec>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub residual_tol: Option<f64>,
    pub constancy_tol: Option<f64>,
    pub projective_factor: Option<String>,
    pub target_metric: Option<MetricSpec>,
    pub flags: Option<usize>,
    pub points: Option<Vec<PointSpec>>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str, json: bool) -> Result<ConfigFile> {
        if json {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json)
    }
}

/// Values given on the command line; each one overrides the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub metric: Option<String>,
    pub expr: Option<String>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub residual_tol: Option<f64>,
    pub constancy_tol: Option<f64>,
    pub projective_factor: Option<String>,
    pub target_metric: Option<String>,
    pub flags: Option<usize>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// The echo of a validated config that goes into every report. Runtime-only
/// settings (workers, output paths) are left out so that reports compare
/// byte-for-byte across them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub task: Task,
    pub metric: MetricSpec,
    pub samples: usize,
    pub seed: u64,
    pub residual_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constancy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projective_factor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_metric: Option<MetricSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointSpec>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Runtime {
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// A config whose metric, factor and expressions have all been built.
#[derive(Clone, Debug)]
pub struct Plan {
    pub config: RunConfig,
    pub runtime: Runtime,
    pub metric: MetricDefinition,
    pub factor: Option<ProjectiveFactor>,
    pub target: Option<MetricDefinition>,
}

impl Plan {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { residual: self.config.residual_tol, constancy: self.config.constancy_tol }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be a positive finite number, got {v}")))
    }
}

/// Merges the config file with command-line overrides, fills defaults and validates.
pub fn resolve(file: ConfigFile, cli: Overrides) -> Result<Plan> {
    let task = cli
        .task
        .or(file.task)
        .ok_or_else(|| Error::Config("task is required (analyze, cfc-check, flag-curvature or beltrami)".into()))?;

    let mut metric = match (&cli.metric, &cli.expr) {
        (Some(_), Some(_)) => return Err(Error::Config("--metric and --expr are mutually exclusive".into())),
        (Some(m), None) => MetricSpec::from_shorthand(m),
        (None, Some(e)) => MetricSpec { family: "custom".into(), norm: Some(e.clone()), ..Default::default() },
        (None, None) => file.metric.ok_or_else(|| Error::Config("metric is required".into()))?,
    };
    if cli.n.is_some() {
        metric.n = cli.n;
    }
    let target_metric = match cli.target_metric {
        Some(t) => Some(MetricSpec::from_shorthand(&t)),
        None => file.target_metric,
    };
    let mut target_metric = target_metric;
    if let Some(t) = target_metric.as_mut() {
        if t.n.is_none() && t.matrix.is_none() {
            t.n = metric.n;
        }
    }

    let samples = cli.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let residual_tol =
        positive("residual_tol", cli.residual_tol.or(file.residual_tol).unwrap_or(DEFAULT_RESIDUAL_TOL))?;
    let constancy_tol = cli.constancy_tol.or(file.constancy_tol).map(|v| positive("constancy_tol", v)).transpose()?;
    let flags = match task {
        Task::FlagCurvature => Some(cli.flags.or(file.flags).unwrap_or(DEFAULT_FLAGS)),
        _ => None,
    };
    if flags == Some(0) {
        return Err(Error::Config("flags must be at least 1".into()));
    }
    let workers = cli.workers.or(file.workers).unwrap_or(1);
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }

    let projective_factor = cli.projective_factor.or(file.projective_factor);
    if task == Task::Beltrami && projective_factor.is_none() {
        return Err(Error::Config("task beltrami requires projective_factor".into()));
    }

    let def = metric.build("metric")?;
    let factor = projective_factor.as_deref().map(|p| ProjectiveFactor::parse(p, def.n)).transpose()?;
    let target = target_metric.as_ref().map(|t| t.build("target_metric")).transpose()?;

    let points = file.points;
    if let Some(pts) = &points {
        if !matches!(task, Task::Analyze | Task::FlagCurvature) {
            return Err(Error::Config(format!("points are only used by analyze and flag-curvature, not {task}")));
        }
        if pts.is_empty() {
            return Err(Error::Config("points must not be empty".into()));
        }
        for (i, p) in pts.iter().enumerate() {
            let bad =
                p.x.len() != def.n || p.y.len() != def.n || p.transverse.as_ref().is_some_and(|t| t.len() != def.n);
            if bad {
                return Err(Error::Config(format!("points[{i}]: every vector needs {} components", def.n)));
            }
        }
    }

    Ok(Plan {
        config: RunConfig {
            task,
            metric,
            samples,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            residual_tol,
            constancy_tol,
            projective_factor,
            target_metric,
            flags,
            points,
        },
        runtime: Runtime { workers, output: cli.output.or(file.output), csv: cli.csv.or(file.csv) },
        metric: def,
        factor,
        target,
    })
}

//! Command-line front end: `flagcurv <task> [flags]`.
//!
//! Exit codes: 0 pass (or CFC), 1 NOT_CFC or a failed property, 2 invalid
//! input or a degenerate metric, 3 INCONCLUSIVE.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{resolve, ConfigFile, MetricSpec, Overrides, Plan, PointSpec, RunConfig, Task};
pub use run::{emit, run, write_csv, Payload, RunReport, Status, EXIT_INVALID, SCHEMA_VERSION};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "flagcurv", version, about = "Finsler curvature pipeline and constant flag curvature checks")]
pub struct Args {
    /// analyze | cfc-check | flag-curvature | beltrami
    #[arg(value_name = "TASK")]
    pub task: Option<String>,
    /// Same as the positional TASK.
    #[arg(long = "task", value_name = "TASK")]
    pub task_flag: Option<String>,
    /// TOML config file (JSON if the name ends in .json).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// euclidean | sphere_stereographic | klein | funk | custom:<F> | riemannian:<row>;<row>;…
    #[arg(long)]
    pub metric: Option<String>,
    /// Norm expression F(x, y); shorthand for --metric custom:<F>.
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Absolute tolerance on the κ spread.
    #[arg(long)]
    pub constancy_tol: Option<f64>,
    /// Projective factor P for beltrami: an expression or half-funk-norm.
    #[arg(long)]
    pub factor: Option<String>,
    /// Metric whose F̃² normalizes the transformed flag curvature in beltrami.
    #[arg(long)]
    pub target: Option<String>,
    /// Flags per point for flag-curvature.
    #[arg(long)]
    pub flags: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Report path; standard output if omitted or "-".
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-sample κ as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Args {
    pub fn plan(self) -> Result<Plan> {
        let task = match (&self.task, &self.task_flag) {
            (Some(a), Some(b)) if a != b => {
                return Err(crate::Error::Config(format!("conflicting tasks '{a}' and '{b}'")));
            }
            (a, b) => a.as_deref().or(b.as_deref()).map(Task::parse).transpose()?,
        };
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        resolve(
            file,
            Overrides {
                task,
                metric: self.metric,
                expr: self.expr,
                n: self.n,
                samples: self.samples,
                seed: self.seed,
                residual_tol: self.tol,
                constancy_tol: self.constancy_tol,
                projective_factor: self.factor,
                target_metric: self.target,
                flags: self.flags,
                workers: self.workers,
                output: self.out,
                csv: self.csv,
            },
        )
    }
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = args.plan().and_then(|plan| {
        let report = run(&plan)?;
        emit(&plan, &report)?;
        Ok(report.exit_code)
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("flagcurv: error: {e}");
            EXIT_INVALID
        }
    }
}

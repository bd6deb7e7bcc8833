//! Task execution, report assembly and exit codes.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Plan, RunConfig, Task};
use crate::cfc::{cfc_check, kappa_at_point, sample_points, xi_from_trace, CfcReport, SkippedSample, Verdict};
use crate::error::{Error, Result};
use crate::exec::parallel_map;
use crate::geometry::{analyze_point, Pipeline, PointAnalysis, CURVATURE_ORDER};
use crate::metrics::{unit_vector, PhasePoint};
use crate::projective::{beltrami_check, BeltramiReport, IDENTITY_GAP_TOL, TRANSPORT_TOL};

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stream offset separating flag directions from phase-point samples.
const FLAG_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Cfc,
    NotCfc,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Cfc => 0,
            Status::Fail | Status::NotCfc => 1,
            Status::Inconclusive => 3,
        }
    }

    fn from_verdict(v: Verdict) -> Status {
        match v {
            Verdict::Cfc => Status::Cfc,
            Verdict::NotCfc => Status::NotCfc,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

/// Exit code for a run that could not complete.
pub const EXIT_INVALID: i32 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzedPoint {
    pub index: usize,
    #[serde(flatten)]
    pub analysis: PointAnalysis,
    pub identities_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeResult {
    pub identities_pass: bool,
    pub points: Vec<AnalyzedPoint>,
    pub skipped: Vec<SkippedSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagSample {
    pub transverse: Vec<f64>,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagRow {
    pub index: usize,
    pub point: PhasePoint,
    pub flags: Vec<FlagSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagCurvatureResult {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_mean: f64,
    pub points: Vec<FlagRow>,
    pub skipped: Vec<SkippedSample>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Analyze(AnalyzeResult),
    Cfc(CfcReport),
    FlagCurvature(FlagCurvatureResult),
    Beltrami(BeltramiReport),
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub status: Status,
    pub exit_code: i32,
    pub result: Payload,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl RunReport {
    /// Pretty JSON; `with_timing = false` gives the deterministic payload.
    pub fn to_json(&self, with_timing: bool) -> String {
        let mut r = self.clone();
        if !with_timing {
            r.elapsed_ms = None;
        }
        let mut s = serde_json::to_string_pretty(&r).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
        s.push('\n');
        s
    }
}

fn points_for(plan: &Plan) -> Vec<PhasePoint> {
    match &plan.config.points {
        Some(pts) => pts.iter().map(|p| p.phase_point()).collect(),
        None => sample_points(&plan.metric, plan.config.samples, plan.config.seed),
    }
}

fn split_skipped<T>(
    outcomes: Vec<std::result::Result<T, SkippedSample>>,
    total: usize,
) -> Result<(Vec<T>, Vec<SkippedSample>)> {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(s) => skipped.push(s),
        }
    }
    if skipped.len() as f64 > crate::cfc::MAX_SKIPPED_FRACTION * total as f64 || ok.is_empty() {
        return Err(Error::TooManySkipped {
            skipped: skipped.len(),
            total,
            reason: skipped.first().map_or_else(String::new, |s| s.reason.clone()),
        });
    }
    Ok((ok, skipped))
}

fn run_analyze(plan: &Plan) -> Result<(Status, Payload)> {
    let def = &plan.metric;
    let points = points_for(plan);
    let outcomes = parallel_map(&points, plan.runtime.workers, |index, p| {
        let skip = |e: Error| SkippedSample { index, point: p.clone(), reason: e.to_string() };
        let mut analysis = analyze_point(def, p).map_err(skip)?;
        if def.n > 2 {
            let xi = xi_from_trace(&analysis.curvature.r).map_err(skip)?;
            analysis.curvature.kappa = Some(kappa_at_point(&xi, &p.y, analysis.metric.f2));
            analysis.curvature.xi = Some(xi);
        }
        let identities_pass = analysis.identities.passes();
        Ok(AnalyzedPoint { index, analysis, identities_pass })
    });
    let (points, skipped) = split_skipped(outcomes, points.len())?;
    let identities_pass = points.iter().all(|p| p.identities_pass);
    let status = if identities_pass { Status::Pass } else { Status::Fail };
    Ok((status, Payload::Analyze(AnalyzeResult { identities_pass, points, skipped })))
}

fn run_flag_curvature(plan: &Plan) -> Result<(Status, Payload)> {
    let def = &plan.metric;
    let n = def.n;
    let flags = plan.config.flags.unwrap_or(1);
    let points = points_for(plan);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.config.seed ^ FLAG_STREAM);
    let directions: Vec<Vec<Vec<f64>>> = (0..points.len())
        .map(|i| {
            let fixed = plan.config.points.as_ref().and_then(|pts| pts[i].transverse.clone());
            match fixed {
                Some(t) => vec![t],
                None => (0..flags).map(|_| unit_vector(n, &mut rng)).collect(),
            }
        })
        .collect();
    let outcomes = parallel_map(&points, plan.runtime.workers, |index, p| {
        let skip = |e: Error| SkippedSample { index, point: p.clone(), reason: e.to_string() };
        let pipe = Pipeline::new(def, p, CURVATURE_ORDER).map_err(skip)?;
        let flags = directions[index]
            .iter()
            .map(|t| Ok(FlagSample { transverse: t.clone(), kappa: pipe.flag_curvature(t)? }))
            .collect::<Result<Vec<_>>>()
            .map_err(skip)?;
        Ok(FlagRow { index, point: p.clone(), flags })
    });
    let (rows, skipped) = split_skipped(outcomes, points.len())?;
    let kappas: Vec<f64> = rows.iter().flat_map(|r| r.flags.iter().map(|f| f.kappa)).collect();
    let result = FlagCurvatureResult {
        kappa_min: kappas.iter().copied().fold(f64::INFINITY, f64::min),
        kappa_max: kappas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        kappa_mean: kappas.iter().sum::<f64>() / kappas.len() as f64,
        points: rows,
        skipped,
    };
    Ok((Status::Pass, Payload::FlagCurvature(result)))
}

fn run_cfc(plan: &Plan) -> Result<(Status, Payload)> {
    let c = &plan.config;
    let report = cfc_check(&plan.metric, c.samples, c.seed, plan.tolerances(), plan.runtime.workers)?;
    Ok((Status::from_verdict(report.verdict), Payload::Cfc(report)))
}

fn run_beltrami(plan: &Plan) -> Result<(Status, Payload)> {
    let c = &plan.config;
    let factor =
        plan.factor.as_ref().ok_or_else(|| Error::Config("task beltrami requires projective_factor".into()))?;
    let report = beltrami_check(
        &plan.metric,
        factor,
        plan.target.as_ref(),
        c.samples,
        c.seed,
        plan.tolerances(),
        plan.runtime.workers,
    )?;
    let consistent = report.rrt_crosscheck_residual < TRANSPORT_TOL && report.hamel_djeta_gap_max < IDENTITY_GAP_TOL;
    let status = if consistent { Status::from_verdict(report.transformed_cfc.verdict) } else { Status::Fail };
    Ok((status, Payload::Beltrami(report)))
}

/// Executes a validated plan. Timing is recorded but kept out of the payload.
pub fn run(plan: &Plan) -> Result<RunReport> {
    let start = std::time::Instant::now();
    let (status, result) = match plan.config.task {
        Task::Analyze => run_analyze(plan)?,
        Task::CfcCheck => run_cfc(plan)?,
        Task::FlagCurvature => run_flag_curvature(plan)?,
        Task::Beltrami => run_beltrami(plan)?,
    };
    let report = RunReport {
        schema: SCHEMA_VERSION,
        tool: "flagcurv",
        version: VERSION,
        config: plan.config.clone(),
        status,
        exit_code: status.exit_code(),
        result,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    };
    if !serde_json::to_value(&report).is_ok_and(|v| all_finite(&v)) {
        return Err(Error::NonFinite("report"));
    }
    Ok(report)
}

fn all_finite(v: &serde_json::Value) -> bool {
    match v {
        // serde_json turns NaN and ±∞ into null; the schema has no other nulls.
        serde_json::Value::Null => false,
        serde_json::Value::Array(a) => a.iter().all(all_finite),
        serde_json::Value::Object(o) => o.values().all(all_finite),
        _ => true,
    }
}

fn vector_header(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn fmt_all(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| format!("{x:?}"))
}

/// Per-sample κ as CSV for external plotting.
pub fn write_csv<W: Write>(report: &RunReport, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(vector_header("x", n));
    header.extend(vector_header("y", n));
    match &report.result {
        Payload::Cfc(r) => cfc_rows(&mut w, header, r).map_err(io)?,
        Payload::Beltrami(r) => cfc_rows(&mut w, header, &r.transformed_cfc).map_err(io)?,
        Payload::Analyze(r) => {
            header.push("kappa_ricci".into());
            w.write_record(&header).map_err(io)?;
            for p in &r.points {
                let mut row = vec![p.index.to_string()];
                row.extend(fmt_all(&p.analysis.point.x));
                row.extend(fmt_all(&p.analysis.point.y));
                row.push(p.analysis.curvature.kappa.map(|k| format!("{k:?}")).unwrap_or_default());
                w.write_record(&row).map_err(io)?;
            }
        }
        Payload::FlagCurvature(r) => {
            header.insert(1, "flag".into());
            header.extend(vector_header("X", n));
            header.push("kappa".into());
            w.write_record(&header).map_err(io)?;
            for p in &r.points {
                for (k, f) in p.flags.iter().enumerate() {
                    let mut row = vec![p.index.to_string(), k.to_string()];
                    row.extend(fmt_all(&p.point.x));
                    row.extend(fmt_all(&p.point.y));
                    row.extend(fmt_all(&f.transverse));
                    row.push(format!("{:?}", f.kappa));
                    w.write_record(&row).map_err(io)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cfc_rows<W: Write>(w: &mut csv::Writer<W>, mut header: Vec<String>, r: &CfcReport) -> csv::Result<()> {
    header.extend(["kappa", "residual_basis", "residual_skew", "residual_wedge"].map(String::from));
    w.write_record(&header)?;
    for p in &r.points {
        let mut row = vec![p.index.to_string()];
        row.extend(fmt_all(&p.point.x));
        row.extend(fmt_all(&p.point.y));
        row.push(p.kappa.map(|k| format!("{k:?}")).unwrap_or_default());
        row.extend(fmt_all(&[p.residual_basis, p.residual_skew, p.residual_wedge]));
        w.write_record(&row)?;
    }
    Ok(())
}

/// Writes the JSON report (and CSV if requested) where the plan says.
pub fn emit(plan: &Plan, report: &RunReport) -> Result<()> {
    let json = report.to_json(true);
    match plan.runtime.output.as_deref() {
        Some(path) if path != Path::new("-") => std::fs::write(path, json)?,
        _ => std::io::stdout().write_all(json.as_bytes())?,
    }
    if let Some(path) = &plan.runtime.csv {
        let file = std::fs::File::create(path)?;
        write_csv(report, plan.metric.n, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

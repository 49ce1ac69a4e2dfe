//! JSON job files and the artifacts each command writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{
    validate_spherical_arclength, Curve, CurveSpec, Family, Grid, SphericalReport,
};
use crate::error::{Error, Result};
use crate::frenetode::CurvatureProfile;
use crate::rectify::{
    condition_terms, e4_constant_k1_k3, e4_constant_k2_k3, kappa_last_closed_form,
    measure_components, AnalysisOptions, Center, RectifyingReport, Tolerances, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Construct,
    Integrate,
    Condition,
    Corpus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Construct => "construct",
            Command::Integrate => "integrate",
            Command::Condition => "condition",
            Command::Corpus => "corpus",
        }
    }
}

/// Curvature profiles given by their closed forms instead of term by term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    /// Constant `κ₁ … κ_{n−2}` and the matching `κ_{n−1}`.
    LastCurvature {
        dimension: usize,
        curvatures: Vec<f64>,
        b: f64,
        c: f64,
        #[serde(default = "plus_one")]
        sign: f64,
    },
    /// `E⁴`, constant `κ₂, κ₃`, `κ₁ = c₁ sin(κ₃s + c₂)/(s + c)`.
    ConstantK2K3 {
        k2: f64,
        k3: f64,
        c1: f64,
        c2: f64,
        c: f64,
        interval: [f64; 2],
    },
    /// `E⁴`, constant `κ₁, κ₃`, `κ₂ = c₂(s + c) sec(κ₃s + c₁)`.
    ConstantK1K3 {
        k1: f64,
        k3: f64,
        c1: f64,
        c2: f64,
        c: f64,
        interval: [f64; 2],
    },
}

fn plus_one() -> f64 {
    1.0
}

impl ClosedForm {
    pub fn profile(&self) -> Result<CurvatureProfile> {
        match self {
            ClosedForm::LastCurvature {
                dimension,
                curvatures,
                b,
                c,
                sign,
            } => Ok(kappa_last_closed_form(*dimension, curvatures, *b, *c, *sign)?.profile),
            ClosedForm::ConstantK2K3 {
                k2,
                k3,
                c1,
                c2,
                c,
                interval,
            } => e4_constant_k2_k3(*k2, *k3, *c1, *c2, *c, (interval[0], interval[1])),
            ClosedForm::ConstantK1K3 {
                k1,
                k3,
                c1,
                c2,
                c,
                interval,
            } => e4_constant_k1_k3(*k1, *k3, *c1, *c2, *c, (interval[0], interval[1])),
        }
    }
}

/// Sec-scaling of a unit-speed curve on the unit hypersphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub inner: CurveSpec,
    #[serde(default = "plus_one")]
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
    pub domain: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub report: Option<String>,
    pub csv: Option<String>,
    /// Integrated samples (`integrate` only).
    pub samples: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub construct: Option<Construction>,
    #[serde(default)]
    pub profile: Option<CurvatureProfile>,
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    /// Arclength range for `integrate`.
    #[serde(default)]
    pub range: Option<[f64; 2]>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub anchor: Option<f64>,
    #[serde(default)]
    pub center: Option<Center>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output: Outputs,
    #[serde(default)]
    pub expect: Option<Verdict>,
    /// Job files run by `corpus`, relative to the corpus file.
    #[serde(default)]
    pub jobs: Vec<String>,
}

pub const DEFAULT_GRID_COUNT: usize = 201;

impl JobSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::spec(format!("job file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::spec(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Command-line overrides applied on top of the job file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub tol_certify: Option<f64>,
    pub tol_falsify: Option<f64>,
    /// Directory that relative job paths resolve against.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrationSummary {
    pub step: f64,
    pub steps: usize,
    pub max_step_drift: f64,
    pub end_point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSample {
    pub s: f64,
    pub value: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusEntry {
    pub job: String,
    pub expect: Option<Verdict>,
    pub verdict: Option<Verdict>,
    pub components_verdict: Option<Verdict>,
    pub condition_verdict: Option<Verdict>,
    pub error: Option<String>,
    pub passed: bool,
}

/// Everything a job produced; serialized as the report file.
#[derive(Debug, Clone, Serialize)]
pub struct JobOutcome {
    pub name: String,
    pub command: Command,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spherical_check: Option<SphericalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<Vec<ConditionSample>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RectifyingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<Vec<CorpusEntry>>,
    #[serde(skip)]
    pub artifacts: Vec<PathBuf>,
}

impl JobOutcome {
    fn new(name: String, command: Command, verdict: Verdict) -> Self {
        Self {
            name,
            command,
            verdict,
            curve: None,
            spherical_check: None,
            integration: None,
            condition: None,
            report: None,
            corpus: None,
            artifacts: Vec::new(),
        }
    }
}

/// Exit status for an error: 64 for malformed input, 65 for numerical failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidSpec(_) | Error::DimensionMismatch { .. } => 64,
        _ => 65,
    }
}

fn tolerances(job: &JobSpec, opts: &RunOptions) -> Result<Tolerances> {
    let base = job.tolerances.unwrap_or_default();
    Tolerances::new(
        opts.tol_certify.unwrap_or(base.certify),
        opts.tol_falsify.unwrap_or(base.falsify),
    )
}

fn grid_for(job: &JobSpec, domain: (f64, f64)) -> Result<Grid> {
    match job.grid {
        Some(g) => {
            g.validate()?;
            Ok(g)
        }
        None => Grid::new(domain.0, domain.1, DEFAULT_GRID_COUNT),
    }
}

fn require<'a, T>(field: &'a Option<T>, name: &str, command: Command) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::spec(format!("{} jobs need a \"{name}\" field", command.name())))
}

fn options(job: &JobSpec, tol: Tolerances) -> AnalysisOptions {
    AnalysisOptions {
        center: job.center,
        anchor: job.anchor,
        c: job.c,
        tolerances: tol,
    }
}

fn profile_of(job: &JobSpec, command: Command) -> Result<CurvatureProfile> {
    match (&job.profile, &job.closed_form) {
        (Some(p), None) => {
            p.validate()?;
            Ok(p.clone())
        }
        (None, Some(cf)) => cf.profile(),
        (Some(_), Some(_)) => Err(Error::spec(
            "give either \"profile\" or \"closed_form\", not both",
        )),
        (None, None) => Err(Error::spec(format!(
            "{} jobs need a \"profile\" or \"closed_form\"",
            command.name()
        ))),
    }
}

fn fmt_float(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

/// Per-sample CSV with a fixed column layout.
pub fn report_csv(report: &RectifyingReport) -> String {
    let n = report.dimension;
    let mut out = String::from("t,s,rho2,tangential,normal_inner,normal_len");
    for i in 1..n - 1 {
        let _ = write!(out, ",mu_{i}_measured");
    }
    for i in 1..n - 1 {
        let _ = write!(out, ",mu_{i}_predicted");
    }
    out.push_str(",condition_residual\n");
    for j in 0..report.t.len() {
        let mut cells = vec![
            report.t[j],
            report.s[j],
            report.rho2[j],
            report.tangential[j],
            report.normal_inner[j],
            report.normal_len[j],
        ];
        cells.extend(&report.mu_measured[j]);
        for (k, x) in cells.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            fmt_float(&mut out, *x);
        }
        for i in 0..n - 2 {
            out.push(',');
            if let Some(p) = &report.mu_predicted {
                fmt_float(&mut out, p[j][i]);
            }
        }
        out.push(',');
        if let Some(c) = &report.condition_values {
            fmt_float(&mut out, c[j]);
        }
        out.push('\n');
    }
    out
}

fn samples_csv(curve: &Curve) -> String {
    let Some(ic) = curve.integrated() else {
        return String::new();
    };
    let n = ic.dimension();
    let mut out = String::from("s");
    for k in 1..=n {
        let _ = write!(out, ",x_{k}");
    }
    out.push('\n');
    for sample in ic.samples() {
        fmt_float(&mut out, sample.s);
        for x in &sample.point {
            out.push(',');
            fmt_float(&mut out, *x);
        }
        out.push('\n');
    }
    out
}

fn write_artifact(
    dir: &Path,
    file: &str,
    contents: &str,
    produced: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = dir.join(file);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| Error::spec(format!("{}: {e}", parent.display())))?;
    }
    fs::write(&path, contents).map_err(|e| Error::spec(format!("{}: {e}", path.display())))?;
    produced.push(path);
    Ok(())
}

fn analyze_curve(
    name: String,
    command: Command,
    curve: &Curve,
    job: &JobSpec,
    tol: Tolerances,
) -> Result<JobOutcome> {
    let grid = grid_for(job, curve.domain())?;
    let report = measure_components(curve, &grid, &options(job, tol))?;
    let verdict = match command {
        Command::Condition => report.condition_verdict.ok_or(Error::OrderTooLow {
            need: curve.dimension() - 2,
            have: 0,
        })?,
        _ => report.verdict(),
    };
    let mut outcome = JobOutcome::new(name, command, verdict);
    outcome.curve = Some(curve.spec().clone());
    outcome.report = Some(report);
    Ok(outcome)
}

/// Condition straight from curvature jets of a profile, at the grid's `s` values.
fn condition_from_profile(
    name: String,
    profile: &CurvatureProfile,
    job: &JobSpec,
    tol: Tolerances,
) -> Result<JobOutcome> {
    let (lo, hi) = profile.bounds();
    let domain = job.range.map(|r| (r[0], r[1])).unwrap_or((lo, hi));
    if !domain.0.is_finite() || !domain.1.is_finite() {
        return Err(Error::spec(
            "condition jobs on unbounded profiles need a \"range\" or \"grid\"",
        ));
    }
    let grid = grid_for(job, domain)?;
    let c = job.c.unwrap_or(0.0);
    let order = profile.dimension.saturating_sub(2);
    let samples = grid
        .points()
        .par_iter()
        .map(|&s| {
            let (a, b) = condition_terms(&profile.jets(s, order)?, c)?;
            Ok(ConditionSample {
                s,
                value: a + b,
                scaled: (a + b).abs() / (a.abs() + b.abs()).max(1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = samples.iter().map(|x| x.scaled).fold(0.0, f64::max);
    let mut outcome = JobOutcome::new(name, Command::Condition, tol.classify(worst));
    outcome.condition = Some(samples);
    Ok(outcome)
}

fn job_name(job: &JobSpec, fallback: &str) -> String {
    job.name.clone().unwrap_or_else(|| fallback.to_string())
}

/// Runs one job and writes its artifacts.
pub fn run(
    job: &JobSpec,
    command: Command,
    fallback_name: &str,
    opts: &RunOptions,
) -> Result<JobOutcome> {
    if let Some(c) = job.command {
        if c != command {
            return Err(Error::spec(format!(
                "job file is a {} job, invoked as {}",
                c.name(),
                command.name()
            )));
        }
    }
    let tol = tolerances(job, opts)?;
    let name = job_name(job, fallback_name);
    let mut outcome = match command {
        Command::Analyze => {
            let curve = Curve::new(require(&job.curve, "curve", command)?.clone())?;
            analyze_curve(name.clone(), command, &curve, job, tol)?
        }
        Command::Construct => {
            let cons = require(&job.construct, "construct", command)?;
            let inner = Curve::new(cons.inner.clone())?;
            let (lo, hi) = (cons.domain[0], cons.domain[1]);
            let check =
                validate_spherical_arclength(&inner, &Grid::new(lo, hi, DEFAULT_GRID_COUNT)?)?;
            if !check.passes {
                return Err(Error::spec(format!(
                    "inner curve is not a unit-speed curve on the unit sphere (radius off by {:e}, speed by {:e})",
                    check.max_radius_deviation, check.max_speed_deviation
                )));
            }
            let spec = CurveSpec::sec_scaled(cons.inner.clone(), cons.scale, cons.shift, (lo, hi));
            let curve = Curve::new(spec)?;
            let mut o = analyze_curve(name.clone(), command, &curve, job, tol)?;
            o.spherical_check = Some(check);
            o
        }
        Command::Integrate => {
            let profile = profile_of(job, command)?;
            let range = require(&job.range, "range", command)?;
            let step = *require(&job.step, "step", command)?;
            let spec = CurveSpec::new(
                profile.dimension,
                Family::CurvatureDriven { profile, step },
                (range[0], range[1]),
            );
            let curve = Curve::new(spec)?;
            let mut o = analyze_curve(name.clone(), command, &curve, job, tol)?;
            let ic = curve
                .integrated()
                .expect("curvature-driven curves carry their integration");
            o.integration = Some(IntegrationSummary {
                step,
                steps: ic.samples().len() - 1,
                max_step_drift: ic.max_step_drift(),
                end_point: ic
                    .samples()
                    .last()
                    .map(|x| x.point.clone())
                    .unwrap_or_default(),
            });
            if let Some(file) = &job.output.samples {
                let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
                write_artifact(&dir, file, &samples_csv(&curve), &mut o.artifacts)?;
            }
            o
        }
        Command::Condition => match (
            &job.curve,
            job.profile.is_some() || job.closed_form.is_some(),
        ) {
            (Some(spec), false) => {
                let curve = Curve::new(spec.clone())?;
                analyze_curve(name.clone(), command, &curve, job, tol)?
            }
            (None, true) => {
                condition_from_profile(name.clone(), &profile_of(job, command)?, job, tol)?
            }
            _ => {
                return Err(Error::spec(
                    "condition jobs need exactly one of \"curve\" or a profile",
                ))
            }
        },
        Command::Corpus => run_corpus(job, &name, opts)?,
    };

    let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let report_file = job
        .output
        .report
        .clone()
        .unwrap_or_else(|| format!("{name}.report.json"));
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| Error::spec(e.to_string()))?;
    let mut produced = std::mem::take(&mut outcome.artifacts);
    write_artifact(&dir, &report_file, &(json + "\n"), &mut produced)?;
    if let Some(report) = &outcome.report {
        let csv_file = job
            .output
            .csv
            .clone()
            .unwrap_or_else(|| format!("{name}.csv"));
        write_artifact(&dir, &csv_file, &report_csv(report), &mut produced)?;
    }
    outcome.artifacts = produced;
    Ok(outcome)
}

fn run_corpus(job: &JobSpec, name: &str, opts: &RunOptions) -> Result<JobOutcome> {
    if job.jobs.is_empty() {
        return Err(Error::spec("corpus jobs need a non-empty \"jobs\" list"));
    }
    let base = opts.base_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."))
        .join(name);
    let entries: Vec<CorpusEntry> = job
        .jobs
        .par_iter()
        .map(|rel| {
            let path = base.join(rel);
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("job")
                .to_string();
            let sub_opts = RunOptions {
                out_dir: Some(out_dir.clone()),
                base_dir: path.parent().map(Path::to_path_buf),
                ..opts.clone()
            };
            let result = JobSpec::load(&path).and_then(|j| {
                let command = j
                    .command
                    .ok_or_else(|| Error::spec("corpus members must name their command"))?;
                if command == Command::Corpus {
                    return Err(Error::spec("corpus files cannot nest"));
                }
                let o = run(&j, command, &stem, &sub_opts)?;
                Ok((j.expect, o))
            });
            match result {
                Ok((expect, o)) => {
                    let (cv, dv) = o
                        .report
                        .as_ref()
                        .map(|r| (Some(r.components_verdict), r.condition_verdict))
                        .unwrap_or((None, Some(o.verdict)));
                    let agree = match (cv, dv) {
                        (Some(a), Some(b)) => a == b,
                        _ => true,
                    };
                    CorpusEntry {
                        job: rel.clone(),
                        expect,
                        verdict: Some(o.verdict),
                        components_verdict: cv,
                        condition_verdict: dv,
                        error: None,
                        passed: agree && expect.is_none_or(|e| e == o.verdict),
                    }
                }
                Err(e) => CorpusEntry {
                    job: rel.clone(),
                    expect: None,
                    verdict: None,
                    components_verdict: None,
                    condition_verdict: None,
                    error: Some(format!("{}: {e}", e.name())),
                    passed: false,
                },
            }
        })
        .collect();
    let all = entries.iter().all(|e| e.passed);
    let mut outcome = JobOutcome::new(
        name.to_string(),
        Command::Corpus,
        if all {
            Verdict::Rectifying
        } else {
            Verdict::NotRectifying
        },
    );
    outcome.corpus = Some(entries);
    Ok(outcome)
}

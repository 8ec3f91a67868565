//! Runs a configured ensemble, fits it against the predicted limit law and
//! writes the CSV, summary and histogram files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use cremona_core::limitlaw::{
    fit, histogram, ks_statistic, normalize, predict, Fit, KSReport, Law, LimitError,
    LimitLawPrediction, Target,
};
use cremona_core::walk::{run_trials, Ensemble, WalkError};
use thiserror::Error;

use crate::config::{ConfigError, Experiment};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("walk: {0}")]
    Walk(#[from] WalkError),
    #[error("limit law: {0}")]
    Limit(#[from] LimitError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckpointReport {
    pub step: usize,
    pub ks: Option<KSReport>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub prediction: LimitLawPrediction,
    /// Parameters actually tested: predicted when known, fitted otherwise.
    pub ell: f64,
    pub sigma: f64,
    pub fitted: Option<Fit>,
    pub checkpoints: Vec<CheckpointReport>,
    pub ensemble: Ensemble,
    pub all_zero: bool,
}

impl ExperimentReport {
    pub fn final_ks(&self) -> Option<&KSReport> {
        self.checkpoints.last().and_then(|c| c.ks.as_ref())
    }

    /// Final-checkpoint KS passes, at least one trial succeeded and none failed.
    pub fn passed(&self) -> bool {
        self.ensemble.failures.is_empty()
            && !self.ensemble.samples.is_empty()
            && self.final_ks().is_none_or(KSReport::passed)
    }

    pub fn uses_fitted_parameters(&self) -> bool {
        self.prediction.is_estimated()
    }
}

fn column(ensemble: &Ensemble, k: usize) -> Vec<f64> {
    ensemble.samples.iter().map(|s| s.log_degree[k]).collect()
}

/// Runs the ensemble and the goodness-of-fit checks; writes nothing.
pub fn evaluate(exp: &Experiment) -> Result<ExperimentReport, RunError> {
    let prediction = predict(&exp.walk.measure)?;
    let ensemble = run_trials(&exp.walk)?;
    let cps = &exp.walk.checkpoints;
    let last = cps.len() - 1;
    let fitted = if ensemble.samples.is_empty() || cps[last] == 0 {
        None
    } else {
        Some(fit(&column(&ensemble, last), cps[last])?)
    };
    let (ell, sigma) = match (prediction.ell, prediction.sigma, fitted) {
        (Some(l), Some(s), _) => (l, s),
        (_, _, Some(f)) => (f.ell, f.sigma),
        _ => (0.0, 0.0),
    };
    let law = if prediction.is_estimated() && sigma == 0.0 {
        Law::Dirac
    } else {
        prediction.law
    };
    let mut checkpoints = Vec::with_capacity(cps.len());
    for (k, &step) in cps.iter().enumerate() {
        let values = column(&ensemble, k);
        let z = if step == 0 {
            values.clone()
        } else {
            normalize(&values, ell, step)
        };
        let ks = if step == 0 || z.is_empty() {
            None
        } else {
            Some(ks_statistic(
                &z,
                Target::from_law(law, sigma),
                exp.ks_threshold,
            )?)
        };
        checkpoints.push(CheckpointReport { step, ks, z });
    }
    let all_zero = ensemble
        .samples
        .iter()
        .all(|s| s.log_degree.iter().all(|&v| v == 0.0));
    Ok(ExperimentReport {
        prediction,
        ell,
        sigma,
        fitted,
        checkpoints,
        ensemble,
        all_zero,
    })
}

pub fn render_csv(ensemble: &Ensemble, checkpoints: &[usize]) -> String {
    let mut out = String::from("trial,step,log_deg\n");
    for s in &ensemble.samples {
        for (step, v) in checkpoints.iter().zip(&s.log_degree) {
            let _ = writeln!(out, "{},{},{}", s.trial, step, v);
        }
    }
    let _ = writeln!(out, "summary,failures,{}", ensemble.failures.len());
    out
}

pub fn render_histogram(report: &ExperimentReport, bins: usize) -> String {
    let mut out = String::from("step,left_edge,width,count\n");
    for c in &report.checkpoints {
        for b in histogram(&c.z, bins) {
            let _ = writeln!(out, "{},{},{},{}", c.step, b.left, b.width, b.count);
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "estimated".to_string(), |x| x.to_string())
}

pub fn render_summary(exp: &Experiment, report: &ExperimentReport) -> String {
    let p = &report.prediction;
    let w = &exp.walk;
    let mut s = String::new();
    let _ = writeln!(s, "schema_version: {}", crate::config::SCHEMA_VERSION);
    let _ = writeln!(s, "engine: {}", report.ensemble.engine);
    let _ = writeln!(s, "seed: {}", w.seed);
    let _ = writeln!(s, "length: {}", w.length);
    let _ = writeln!(s, "trials: {}", w.trials);
    let _ = writeln!(s, "completed: {}", report.ensemble.samples.len());
    let _ = writeln!(s, "failures: {}", report.ensemble.failures.len());
    for f in report.ensemble.failures.iter().take(5) {
        let _ = writeln!(s, "failure: trial {}: {}", f.trial, f.error);
    }
    let _ = writeln!(s, "family: {}", p.family);
    let _ = writeln!(s, "law: {}", p.law);
    let _ = writeln!(s, "ell: {}", opt(p.ell));
    let _ = writeln!(s, "sigma: {}", opt(p.sigma));
    let _ = writeln!(
        s,
        "lambda_mu: {}",
        p.lambda_mu.map_or("n/a".into(), |v| v.to_string())
    );
    if let Some(f) = report.fitted {
        let _ = writeln!(s, "ell_hat: {}", f.ell);
        let _ = writeln!(s, "sigma_hat: {}", f.sigma);
    }
    if report.uses_fitted_parameters() {
        let _ = writeln!(
            s,
            "parameters: fitted (KS against N(0, sigma_hat) with sigma_hat from the same samples; the statistic is optimistic)"
        );
    } else {
        let _ = writeln!(s, "parameters: predicted");
    }
    let _ = writeln!(s, "log_degree_all_zero: {}", report.all_zero);
    for c in &report.checkpoints {
        match &c.ks {
            Some(k) => {
                let _ = writeln!(
                    s,
                    "checkpoint {}: ks={} threshold={} {}",
                    c.step,
                    k.statistic,
                    k.threshold,
                    if k.passed() { "pass" } else { "fail" }
                );
            }
            None => {
                let _ = writeln!(s, "checkpoint {}: ks=n/a", c.step);
            }
        }
    }
    let _ = writeln!(
        s,
        "status: {}",
        if report.passed() { "pass" } else { "fail" }
    );
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run leaves no partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Files produced by one run, rendered before anything touches disk.
pub struct Rendered {
    pub csv: String,
    pub summary: String,
    pub histogram: String,
}

pub fn render(exp: &Experiment, report: &ExperimentReport) -> Rendered {
    Rendered {
        csv: render_csv(&report.ensemble, &exp.walk.checkpoints),
        summary: render_summary(exp, report),
        histogram: render_histogram(report, exp.outputs.histogram_bins),
    }
}

/// Writes every configured output.
pub fn write_outputs(exp: &Experiment, rendered: &Rendered) -> Result<(), RunError> {
    let o = &exp.outputs;
    for (path, body) in [
        (&o.csv, &rendered.csv),
        (&o.summary, &rendered.summary),
        (&o.histogram, &rendered.histogram),
    ] {
        if let Some(p) = path {
            write_atomic(p, body)?;
        }
    }
    Ok(())
}

/// Full pipeline. Exit status: 0 pass, 1 threshold failure, 2 configuration
/// error, 3 I/O error.
pub fn run_experiment(exp: &Experiment) -> Result<(ExperimentReport, Rendered), RunError> {
    let report = evaluate(exp)?;
    let rendered = render(exp, &report);
    write_outputs(exp, &rendered)?;
    Ok((report, rendered))
}

//! Experiment harness: TOML-configured sweeps over the core library that emit
//! a table plus a replayable certificate.

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::Value;

pub mod config;
pub mod experiments;
pub mod report;

use config::{ExperimentConfig, KINDS};
use experiments::Evaluation;
use report::{parse_certificate, Certificate, Check, PointRecord, Report, SCHEMA};

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building the worker pool")
}

/// Evaluates every point of `cfg`. Output depends only on the config.
pub fn run(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Report> {
    cfg.validate()?;
    let kind = cfg.experiment.kind();
    let header = experiments::header(kind)?;
    let specs = experiments::generate(cfg)?;
    let evals: Vec<Evaluation> = pool(jobs)?.install(|| {
        specs
            .par_iter()
            .map(|s| {
                experiments::evaluate(kind, &s.input, cfg.cap).with_context(|| format!("point {}", s.key))
            })
            .collect::<Result<_>>()
    })?;
    let points: Vec<PointRecord> = specs
        .into_iter()
        .zip(evals)
        .map(|(s, e)| PointRecord {
            key: s.key,
            input: s.input,
            complete: e.complete,
            checks: e.checks,
            rows: e.rows,
        })
        .collect();
    let mut config = cfg.clone();
    config.out = None;
    Ok(Report {
        header,
        certificate: Certificate {
            schema: SCHEMA.to_string(),
            kind: kind.to_string(),
            config,
            complete: points.iter().all(|p| p.complete),
            points,
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReplayOutcome {
    Verified { points: usize },
    Mismatch {
        point: String,
        check: String,
        expected: Value,
        found: Value,
    },
}

/// Re-evaluates every point of a certificate from its stored inputs and
/// compares the checks exactly.
pub fn replay(text: &str, cap: Option<u64>, jobs: Option<usize>) -> Result<ReplayOutcome> {
    let cert = parse_certificate(text)?;
    experiments::header(&cert.kind)?;
    let cap = cap.unwrap_or(cert.config.cap);
    let found: Vec<Result<Evaluation>> = pool(jobs)?.install(|| {
        cert.points
            .par_iter()
            .map(|p| experiments::evaluate(&cert.kind, &p.input, cap))
            .collect()
    });
    for (p, got) in cert.points.iter().zip(found) {
        let got = match got {
            Ok(e) => e,
            Err(e) => {
                return Ok(ReplayOutcome::Mismatch {
                    point: p.key.clone(),
                    check: "input".into(),
                    expected: "evaluable input".into(),
                    found: format!("{e:#}").into(),
                })
            }
        };
        if let Some(m) = first_difference(p, &got) {
            return Ok(m);
        }
    }
    Ok(ReplayOutcome::Verified {
        points: cert.points.len(),
    })
}

fn first_difference(p: &PointRecord, got: &Evaluation) -> Option<ReplayOutcome> {
    let mismatch = |check: &str, expected: Value, found: Value| ReplayOutcome::Mismatch {
        point: p.key.clone(),
        check: check.to_string(),
        expected,
        found,
    };
    let names = |cs: &[Check]| -> Value { cs.iter().map(|c| c.name.clone()).collect::<Vec<_>>().into() };
    if p.checks.len() != got.checks.len() || p.checks.iter().zip(&got.checks).any(|(a, b)| a.name != b.name) {
        return Some(mismatch("check list", names(&p.checks), names(&got.checks)));
    }
    for (want, have) in p.checks.iter().zip(&got.checks) {
        if want.value != have.value {
            return Some(mismatch(&want.name, want.value.clone(), have.value.clone()));
        }
    }
    if p.complete != got.complete {
        return Some(mismatch("complete", p.complete.into(), got.complete.into()));
    }
    if p.rows != got.rows {
        let rows = |r: &Vec<Vec<String>>| serde_json::to_value(r).unwrap_or(Value::Null);
        return Some(mismatch("table rows", rows(&p.rows), rows(&got.rows)));
    }
    None
}

pub fn list_experiments() -> String {
    let width = KINDS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    KINDS
        .iter()
        .map(|(k, d)| format!("{k:<width$}  {d}\n"))
        .collect()
}

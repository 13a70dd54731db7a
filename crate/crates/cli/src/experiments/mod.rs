//! Per-kind sweep generation and point evaluation.
//!
//! `generate` expands a config into points whose inputs are stored by value,
//! so `evaluate` needs nothing but the input to recompute every check.

use anyhow::{bail, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::Check;

mod audit;
mod f2a;
mod free_sets;
mod frontier;
mod pr_colors;
mod z4;

#[derive(Clone, Debug, PartialEq)]
pub struct PointSpec {
    pub key: String,
    pub input: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub checks: Vec<Check>,
    pub rows: Vec<Vec<String>>,
    /// False when a cap cut some search short.
    pub complete: bool,
}

pub fn header(kind: &str) -> Result<Vec<&'static str>> {
    Ok(match kind {
        "free-set-spectrum" => free_sets::HEADER.to_vec(),
        "pr-min-colors" => pr_colors::HEADER.to_vec(),
        "z4-vs-oracle" => z4::HEADER.to_vec(),
        "refinement-frontier" => frontier::HEADER.to_vec(),
        "f2a-pipeline" => f2a::HEADER.to_vec(),
        "modular-model-audit" => audit::HEADER.to_vec(),
        other => bail!("unknown experiment kind {other:?}"),
    })
}

pub fn generate(cfg: &ExperimentConfig) -> Result<Vec<PointSpec>> {
    let seed = cfg.seed.unwrap_or(0);
    let mut points = match &cfg.experiment {
        Experiment::FreeSetSpectrum(p) => free_sets::generate(p, seed)?,
        Experiment::PrMinColors(p) => pr_colors::generate(p)?,
        Experiment::Z4VsOracle(p) => z4::generate(p)?,
        Experiment::RefinementFrontier(p) => frontier::generate(p, seed)?,
        Experiment::F2aPipeline(p) => f2a::generate(p)?,
        Experiment::ModularModelAudit(p) => audit::generate(p)?,
    };
    points.sort_by(|a, b| a.key.cmp(&b.key));
    if let Some(w) = points.windows(2).find(|w| w[0].key == w[1].key) {
        bail!("duplicate point key {}", w[0].key);
    }
    Ok(points)
}

pub fn evaluate(kind: &str, input: &Value, cap: u64) -> Result<Evaluation> {
    match kind {
        "free-set-spectrum" => free_sets::evaluate(decode(input)?, cap),
        "pr-min-colors" => pr_colors::evaluate(decode(input)?, cap),
        "z4-vs-oracle" => z4::evaluate(decode(input)?, cap),
        "refinement-frontier" => frontier::evaluate(decode(input)?, cap),
        "f2a-pipeline" => f2a::evaluate(decode(input)?, cap),
        "modular-model-audit" => audit::evaluate(decode(input)?, cap),
        other => bail!("unknown experiment kind {other:?}"),
    }
}

fn decode<T: DeserializeOwned>(input: &Value) -> Result<T> {
    Ok(serde_json::from_value(input.clone())?)
}

fn point(key: String, input: &impl Serialize) -> Result<PointSpec> {
    Ok(PointSpec {
        key,
        input: serde_json::to_value(input)?,
    })
}

/// `Ok(None)` when the library gave up at its cap.
fn capped<T>(r: hyperfree_core::Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(hyperfree_core::Error::CapExceeded { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn show_set(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

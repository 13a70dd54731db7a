use serde::{Deserialize, Serialize};

use super::algebra::PartitionAlgebra;
use super::pattern::{MonotonePattern, MAX_LAMBDA};
use crate::error::{invalid, Result};
use crate::hypergraph::{Collapse, ConsistencyProfile, Hypergraph, PartialRType, SignedTuple};
use crate::subset::range_subsets;

/// `s -> B_s`, the indices at which the fragment `s` is consistent, as
/// bitmasks over an index set of at most 64 models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LosPattern {
    pub index_count: usize,
    pub lambda: usize,
    pub sets: Vec<u64>,
}

impl LosPattern {
    pub fn get(&self, s: u64) -> u64 {
        self.sets[s as usize]
    }

    pub fn is_monotone(&self) -> bool {
        (0..self.sets.len()).all(|s| {
            (0..self.lambda).all(|b| self.sets[s | 1 << b] & !self.sets[s] == 0)
        })
    }

    /// The same family inside the powerset algebra of the index set, with
    /// index `t` as atom `t` (one partition into `|I|` parts).
    pub fn to_pattern(&self) -> Result<MonotonePattern> {
        let alg = PartitionAlgebra::new(1, self.index_count)?;
        let elements = self
            .sets
            .iter()
            .map(|&m| alg.from_fn(|t| m >> t & 1 == 1))
            .collect();
        MonotonePattern::new(alg, self.lambda, elements)
    }
}

/// Host on parameter indices at one index model: a `(k+1)`-set of
/// parameters is an edge when their projections are distinct and form an
/// edge of the model.
pub fn parameter_host(model: &Hypergraph, projection: &[usize]) -> Result<Hypergraph> {
    let mut host = Hypergraph::new(projection.len(), model.k(), model.m())?;
    for e in range_subsets(projection.len(), model.k() + 1) {
        let mut img: Vec<usize> = e.iter().map(|&i| projection[i]).collect();
        img.sort_unstable();
        let distinct = img.windows(2).all(|w| w[0] != w[1]);
        if distinct && model.has_edge(&img) {
            host.add_edge(&e)?;
        }
    }
    Ok(host)
}

pub fn parameter_count(formulas: &[SignedTuple]) -> usize {
    formulas
        .iter()
        .flat_map(|f| f.params.iter())
        .max()
        .map_or(0, |&v| v + 1)
}

/// Computes `B_s` for every subset `s` of the formulas. `params[t][i]` is the
/// vertex of `models[t]` denoted by parameter `i`; equal projections are
/// collapsed.
pub fn los_pattern(
    models: &[Hypergraph],
    params: &[Vec<usize>],
    formulas: &[SignedTuple],
) -> Result<LosPattern> {
    if models.is_empty() || models.len() > 64 {
        return invalid("the index set must have between 1 and 64 models");
    }
    if params.len() != models.len() {
        return invalid("one parameter assignment is needed per index model");
    }
    if formulas.len() > MAX_LAMBDA {
        return invalid(format!("at most {MAX_LAMBDA} formulas"));
    }
    let (m, k) = (models[0].m(), models[0].k());
    if models.iter().any(|h| h.m() != m || h.k() != k) {
        return invalid("index models disagree on (m, k)");
    }
    let np = parameter_count(formulas);
    let mut sets = vec![0u64; 1 << formulas.len()];
    for (t, (model, proj)) in models.iter().zip(params).enumerate() {
        if proj.len() < np {
            return invalid(format!("parameter {} has no projection at index {t}", proj.len()));
        }
        let proj = &proj[..np];
        if let Some(&v) = proj.iter().find(|&&v| v >= model.vertex_count()) {
            return invalid(format!("projection {v} is not a vertex of model {t}"));
        }
        let host = parameter_host(model, proj)?;
        let pt = PartialRType::new(&host, formulas.to_vec(), Collapse::from_labels(proj))?;
        let profile = ConsistencyProfile::new(&pt, m, k)?;
        for (s, set) in sets.iter_mut().enumerate() {
            if profile.consistent(s as u64) {
                *set |= 1 << t;
            }
        }
    }
    Ok(LosPattern {
        index_count: models.len(),
        lambda: formulas.len(),
        sets,
    })
}

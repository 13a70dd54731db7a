use serde::{Deserialize, Serialize};

use super::algebra::{BElement, PartitionAlgebra};
use super::pattern::MonotonePattern;
use crate::error::{invalid, Error, Result};
use crate::subset::range_subsets;

/// Membership condition imposed on a multiplicative refinement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every `b′_s` is nonzero.
    Positive,
    /// Every `b′_s` lies above the given element.
    Filter(BElement),
    /// Positive, and each `b′_{β}` depends on at most this many coordinates.
    Budget(usize),
}

/// A multiplicative family given by atom traces: `b′_s = {a : s ⊆ T(a)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub lambda: usize,
    pub traces: Vec<u64>,
}

impl Refinement {
    /// The refinement reading `p` itself through its singletons.
    pub fn identity_of(p: &MonotonePattern) -> Self {
        Refinement {
            lambda: p.lambda(),
            traces: (0..p.algebra().atom_count())
                .map(|a| p.singleton_trace(a))
                .collect(),
        }
    }

    pub fn element(&self, alg: &PartitionAlgebra, s: u64) -> BElement {
        alg.from_fn(|a| self.traces[a] & s == s)
    }

    pub fn singleton(&self, alg: &PartitionAlgebra, beta: usize) -> BElement {
        self.element(alg, 1 << beta)
    }

    pub fn materialize(&self, alg: &PartitionAlgebra) -> Vec<BElement> {
        (0..1u64 << self.lambda).map(|s| self.element(alg, s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Found(Refinement),
    Infeasible,
    CapExceeded,
}

/// Record of the search that produced an outcome.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub nodes: u64,
    pub anchors_tried: u64,
    /// Longest prefix of coordinates assigned during the search.
    pub deepest: usize,
    pub identity: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub transcript: Transcript,
}

impl SolveReport {
    pub fn refinement(&self) -> Option<&Refinement> {
        match &self.outcome {
            Outcome::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// First clause of the refinement definition that `r` violates for `p` under
/// `mode`, checked on the materialized family.
pub fn refinement_violation(
    p: &MonotonePattern,
    r: &Refinement,
    mode: &Mode,
) -> Result<Option<String>> {
    let alg = p.algebra();
    if r.lambda != p.lambda() || r.traces.len() != alg.atom_count() {
        return Ok(Some("shape differs from the pattern".into()));
    }
    if r.traces.iter().any(|&t| t > p.full_mask()) {
        return Ok(Some("trace outside the coordinate range".into()));
    }
    let fam = r.materialize(alg);
    for s in 0..fam.len() {
        if !fam[s].leq(&fam[0])? {
            return Ok(Some(format!("b′_{s:#b} is not below b′_∅")));
        }
        for beta in 0..p.lambda() {
            let t = s | 1 << beta;
            if t != s && fam[t] != fam[s].meet(&fam[1 << beta])? {
                return Ok(Some(format!("b′_{t:#b} is not b′_{s:#b} ∧ b′_{{{beta}}}")));
            }
        }
        if !fam[s].leq(p.get(s as u64))? {
            return Ok(Some(format!("b′_{s:#b} is not below b_{s:#b}")));
        }
    }
    let full = &fam[fam.len() - 1];
    match mode {
        Mode::Positive => {
            if full.is_zero() {
                return Ok(Some("some b′_s is 0".into()));
            }
        }
        Mode::Filter(d) => {
            if !d.leq(full)? {
                return Ok(Some("some b′_s misses the filter element".into()));
            }
        }
        Mode::Budget(b) => {
            if full.is_zero() {
                return Ok(Some("some b′_s is 0".into()));
            }
            for beta in 0..p.lambda() {
                let ess = alg.essential_coordinates(&fam[1 << beta])?;
                if ess.len() > *b {
                    return Ok(Some(format!(
                        "b′_{{{beta}}} depends on {} coordinates",
                        ess.len()
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Searches for a multiplicative refinement of `p` meeting `mode`.
///
/// Positive and filter modes are decided by `b_full`: an atom can carry the
/// full trace iff it lies in `b_full`. The returned family is the least one,
/// giving the full trace to a single anchor (positive) or to the filter
/// element's atoms and the empty trace to everything else. Budget mode fixes
/// an anchor in `b_full` and, coordinate by coordinate, a support `S_β` of
/// size `min(B, A)`, setting `b′_{β}` to the anchor's cylinder over `S_β`;
/// any solution shrinks to one of this form, so exhausting the tree proves
/// infeasibility. `cap` bounds the number of search nodes.
pub fn find_mult_refinement(p: &MonotonePattern, mode: &Mode, cap: u64) -> Result<SolveReport> {
    if cap == 0 {
        return invalid("the node cap must be positive");
    }
    let alg = p.algebra();
    if let Mode::Filter(d) = mode {
        if !d.belongs_to(alg) {
            return Err(Error::MixedAlgebras);
        }
    }
    let full = p.get(p.full_mask());
    let mut transcript = Transcript::default();

    if p.is_multiplicative() {
        let id = Refinement::identity_of(p);
        if refinement_violation(p, &id, mode)?.is_none() {
            transcript.identity = true;
            transcript.deepest = p.lambda();
            transcript.reason = "pattern is already a refinement of itself".into();
            return Ok(SolveReport {
                outcome: Outcome::Found(id),
                transcript,
            });
        }
    }

    let all = p.full_mask();
    let outcome = match mode {
        Mode::Positive => {
            transcript.nodes = full.first_atom().map_or(alg.atom_count(), |a| a + 1) as u64;
            match full.first_atom() {
                Some(anchor) => {
                    let mut traces = vec![0; alg.atom_count()];
                    traces[anchor] = all;
                    transcript.deepest = p.lambda();
                    transcript.reason = format!("atom {anchor} carries the full trace");
                    Outcome::Found(Refinement {
                        lambda: p.lambda(),
                        traces,
                    })
                }
                None => {
                    transcript.reason =
                        "b over all coordinates is 0, so no atom may carry the full trace".into();
                    Outcome::Infeasible
                }
            }
        }
        Mode::Filter(d) => {
            transcript.nodes = alg.atom_count() as u64;
            match d.atoms().find(|&a| !full.contains(a)) {
                Some(a) => {
                    transcript.reason =
                        format!("atom {a} of the filter element is outside b over all coordinates");
                    Outcome::Infeasible
                }
                None => {
                    let traces = (0..alg.atom_count())
                        .map(|a| if d.contains(a) { all } else { 0 })
                        .collect();
                    transcript.deepest = p.lambda();
                    transcript.reason = "filter atoms carry the full trace".into();
                    Outcome::Found(Refinement {
                        lambda: p.lambda(),
                        traces,
                    })
                }
            }
        }
        Mode::Budget(b) => budget_search(p, *b, cap, &mut transcript),
    };
    Ok(SolveReport {
        outcome,
        transcript,
    })
}

struct BudgetSearch<'a> {
    p: &'a MonotonePattern,
    /// `cylinders[c]` lists the atoms agreeing with the anchor on support `c`.
    cylinders: Vec<Vec<usize>>,
    traces: Vec<u64>,
    cap: u64,
}

enum Step {
    Found,
    Exhausted,
    Cap,
}

impl BudgetSearch<'_> {
    fn dfs(&mut self, beta: usize, tr: &mut Transcript) -> Step {
        tr.deepest = tr.deepest.max(beta);
        if beta == self.p.lambda() {
            return Step::Found;
        }
        for c in 0..self.cylinders.len() {
            tr.nodes += 1;
            if tr.nodes > self.cap {
                return Step::Cap;
            }
            let bit = 1u64 << beta;
            for &a in &self.cylinders[c] {
                self.traces[a] |= bit;
            }
            let ok = self.cylinders[c]
                .iter()
                .all(|&a| self.p.get(self.traces[a]).contains(a));
            if ok {
                match self.dfs(beta + 1, tr) {
                    Step::Exhausted => {}
                    other => return other,
                }
            }
            for &a in &self.cylinders[c] {
                self.traces[a] &= !bit;
            }
        }
        Step::Exhausted
    }
}

fn budget_search(p: &MonotonePattern, b: usize, cap: u64, tr: &mut Transcript) -> Outcome {
    let alg = p.algebra();
    let width = b.min(alg.index_count());
    let supports: Vec<Vec<usize>> = range_subsets(alg.index_count(), width).collect();
    let full = p.get(p.full_mask());
    for anchor in full.atoms() {
        tr.anchors_tried += 1;
        let cylinders = supports
            .iter()
            .map(|s| alg.cylinder(anchor, s).atoms().collect())
            .collect();
        let mut search = BudgetSearch {
            p,
            cylinders,
            traces: vec![0; alg.atom_count()],
            cap,
        };
        match search.dfs(0, tr) {
            Step::Found => {
                tr.reason = format!("anchor {anchor} with supports of size {width}");
                return Outcome::Found(Refinement {
                    lambda: p.lambda(),
                    traces: search.traces,
                });
            }
            Step::Cap => {
                tr.reason = format!("node cap {cap} reached at anchor {anchor}");
                return Outcome::CapExceeded;
            }
            Step::Exhausted => {}
        }
    }
    tr.reason = if full.is_zero() {
        "b over all coordinates is 0, so no anchor exists".into()
    } else {
        format!(
            "every anchor and every choice of supports of size {width} forces some atom out of its pattern entry"
        )
    };
    Outcome::Infeasible
}

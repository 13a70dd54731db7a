use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::los::parameter_count;
use super::pattern::MonotonePattern;
use crate::error::{invalid, Result};
use crate::hypergraph::{Collapse, ConsistencyProfile, Hypergraph, PartialRType, SignedTuple};
use crate::subset::{elements, subsets_of_size};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Possibility {
    Ok,
    /// No host and parameters realize the pattern decided by `atom` on the
    /// fragment `u_star`.
    Failing { u_star: Vec<usize>, atom: usize },
    CapExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PossibilityReport {
    pub verdict: Possibility,
    /// Distinct (fragment, decided pattern) classes examined.
    pub classes: usize,
    pub nodes: u64,
}

/// Checks that every decided fragment of `p` is realizable in the generic
/// m-free (k+1)-uniform structure, where coordinate `β` is the formula
/// `formulas[β]`.
///
/// Any `c` deciding the relevant entries has the same decided pattern as any
/// atom below it, and a realization for the largest admissible fragment
/// `J(a) = {β : a ∈ b_{β}}` restricts to every smaller one, so it suffices to
/// realize, for each atom `a`, the down-set `{u ⊆ J(a) : a ∈ b_u}`. Each
/// realization search runs over collapses of the parameters (most classes
/// first) and over hosts assembled from one edge witness per minimal
/// unrealized fragment; adding edges only removes consistency, so such hosts
/// are the only ones worth trying.
pub fn check_possibility(
    p: &MonotonePattern,
    m: usize,
    k: usize,
    formulas: &[SignedTuple],
    cap: u64,
) -> Result<PossibilityReport> {
    if formulas.len() != p.lambda() {
        return invalid(format!(
            "{} formulas given for {} coordinates",
            formulas.len(),
            p.lambda()
        ));
    }
    if k == 0 || m < k {
        return invalid("need 1 <= k <= m");
    }
    if let Some(f) = formulas.iter().find(|f| f.params.len() != k) {
        return invalid(format!("formula {:?} must have {k} distinct parameters", f.params));
    }
    let np = parameter_count(formulas);
    let mut seen: HashMap<(u64, Vec<u64>), ()> = HashMap::new();
    let mut nodes = 0u64;
    for atom in 0..p.algebra().atom_count() {
        let j = p.singleton_trace(atom);
        let local: Vec<usize> = elements(j);
        let down = decided_downset(p, atom, &local);
        if seen.insert((j, pack(&down)), ()).is_some() {
            continue;
        }
        let fs: Vec<SignedTuple> = local.iter().map(|&b| formulas[b].clone()).collect();
        let mut search = Realizer::new(np, m, k, fs, down, cap, nodes)?;
        let found = search.run()?;
        nodes = search.nodes;
        match found {
            Some(true) => {}
            Some(false) => {
                return Ok(PossibilityReport {
                    verdict: Possibility::Failing {
                        u_star: local,
                        atom,
                    },
                    classes: seen.len(),
                    nodes,
                })
            }
            None => {
                return Ok(PossibilityReport {
                    verdict: Possibility::CapExceeded,
                    classes: seen.len(),
                    nodes,
                })
            }
        }
    }
    Ok(PossibilityReport {
        verdict: Possibility::Ok,
        classes: seen.len(),
        nodes,
    })
}

/// `down[u] = a ∈ b_u` for local masks `u` over the coordinates in `local`.
fn decided_downset(p: &MonotonePattern, atom: usize, local: &[usize]) -> Vec<bool> {
    let size = 1usize << local.len();
    let mut global = vec![0u64; size];
    let mut down = vec![false; size];
    for u in 0..size {
        if u > 0 {
            let low = u.trailing_zeros() as usize;
            global[u] = global[u & (u - 1)] | 1 << local[low];
        }
        down[u] = p.get(global[u]).contains(atom);
    }
    down
}

fn pack(bits: &[bool]) -> Vec<u64> {
    bits.chunks(64)
        .map(|c| c.iter().enumerate().fold(0, |w, (i, &b)| w | (b as u64) << i))
        .collect()
}

struct Realizer {
    host: Hypergraph,
    m: usize,
    k: usize,
    formulas: Vec<SignedTuple>,
    vertices: Vec<usize>,
    /// Maximal members of the down-set: all must stay consistent.
    maximal: Vec<u64>,
    /// Minimal non-members: all must become inconsistent.
    minimal: Vec<u64>,
    cap: u64,
    nodes: u64,
}

impl Realizer {
    fn new(
        np: usize,
        m: usize,
        k: usize,
        formulas: Vec<SignedTuple>,
        down: Vec<bool>,
        cap: u64,
        nodes: u64,
    ) -> Result<Self> {
        let n = formulas.len();
        let mut maximal = Vec::new();
        let mut minimal = Vec::new();
        for u in 0..down.len() {
            if down[u] {
                if (0..n).all(|b| u >> b & 1 == 1 || !down[u | 1 << b]) {
                    maximal.push(u as u64);
                }
            } else if (0..n).all(|b| u >> b & 1 == 0 || down[u & !(1 << b)]) {
                minimal.push(u as u64);
            }
        }
        let vertices: BTreeSet<usize> = formulas.iter().flat_map(|f| f.params.clone()).collect();
        Ok(Realizer {
            host: Hypergraph::new(np.max(1), k, m)?,
            m,
            k,
            formulas,
            vertices: vertices.into_iter().collect(),
            maximal,
            minimal,
            cap,
            nodes,
        })
    }

    /// `Some(found)`, or `None` when the cap is hit.
    fn run(&mut self) -> Result<Option<bool>> {
        let n = self.vertices.len();
        if n == 0 {
            return self.try_collapse(&[]);
        }
        let mut labels = vec![0usize; n];
        let mut outcome: Result<Option<bool>> = Ok(Some(false));
        for blocks in (1..=n).rev() {
            let flow = for_each_partition(&mut labels, 0, 0, blocks, &mut |labels| {
                match self.try_collapse(labels) {
                    Ok(Some(false)) => ControlFlow::Continue(()),
                    other => {
                        outcome = other;
                        ControlFlow::Break(())
                    }
                }
            });
            if flow.is_break() {
                break;
            }
        }
        outcome
    }

    fn try_collapse(&mut self, labels: &[usize]) -> Result<Option<bool>> {
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); labels.iter().max().map_or(0, |&l| l + 1)];
        for (&v, &l) in self.vertices.iter().zip(labels) {
            classes[l].push(v);
        }
        let collapse = Collapse::from_classes(&classes)?;
        for e in self.host.edges().cloned().collect::<Vec<_>>() {
            self.host.remove_edge(&e);
        }
        self.extend(&collapse, 0)
    }

    fn profile(&self, collapse: &Collapse) -> Result<ConsistencyProfile> {
        let pt = PartialRType::new(&self.host, self.formulas.clone(), collapse.clone())?;
        ConsistencyProfile::new(&pt, self.m, self.k)
    }

    fn extend(&mut self, collapse: &Collapse, from: usize) -> Result<Option<bool>> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Ok(None);
        }
        let prof = self.profile(collapse)?;
        if self.maximal.iter().any(|&u| !prof.consistent(u)) {
            return Ok(Some(false));
        }
        let Some(idx) = (from..self.minimal.len()).find(|&i| prof.consistent(self.minimal[i]))
        else {
            return Ok(Some(true));
        };
        for w in self.witness_candidates(collapse, self.minimal[idx]) {
            let added: Vec<Vec<usize>> = subsets_of_size(&w, self.k + 1)
                .filter(|e| !self.host.has_edge(e))
                .collect();
            for e in &added {
                self.host.add_edge(e)?;
            }
            let result = if self.host.is_m_free() {
                self.extend(collapse, idx + 1)?
            } else {
                Some(false)
            };
            if result != Some(false) {
                return Ok(result);
            }
            for e in &added {
                self.host.remove_edge(e);
            }
        }
        Ok(Some(false))
    }

    /// m-sets of classes all of whose k-subsets are positive, nondegenerate
    /// images of formulas in `u`.
    fn witness_candidates(&self, collapse: &Collapse, u: u64) -> Vec<Vec<usize>> {
        let demanded: BTreeSet<Vec<usize>> = elements(u)
            .into_iter()
            .map(|b| &self.formulas[b])
            .filter(|f| f.positive)
            .map(|f| collapse.image(&f.params))
            .filter(|img| img.windows(2).all(|w| w[0] != w[1]))
            .collect();
        let classes: BTreeSet<usize> = demanded.iter().flatten().copied().collect();
        let classes: Vec<usize> = classes.into_iter().collect();
        subsets_of_size(&classes, self.m)
            .filter(|w| subsets_of_size(w, self.k).all(|v| demanded.contains(&v)))
            .collect()
    }
}

/// Visits every labelling of `labels[i..]` that completes a set partition
/// with exactly `blocks` blocks, `used` of them opened before position `i`.
fn for_each_partition(
    labels: &mut [usize],
    i: usize,
    used: usize,
    blocks: usize,
    f: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if i == labels.len() {
        return if used == blocks {
            f(labels)
        } else {
            ControlFlow::Continue(())
        };
    }
    let remaining = labels.len() - i;
    if remaining < blocks - used {
        return ControlFlow::Continue(());
    }
    for l in 0..used {
        labels[i] = l;
        for_each_partition(labels, i + 1, used, blocks, f)?;
    }
    if used < blocks {
        labels[i] = used;
        for_each_partition(labels, i + 1, used + 1, blocks, f)?;
    }
    ControlFlow::Continue(())
}

use serde::{Deserialize, Serialize};

use super::algebra::{decides, Generator, PartitionAlgebra};
use super::pattern::MonotonePattern;
use super::solver::Refinement;
use crate::error::{invalid, Result};

pub const MAX_SUPPORT_LAMBDA: usize = 12;

/// Per subset mask `s`, generators whose elements form a maximal antichain
/// of deciders of `b_s`, each extending a generator listed for every `s ∖ {β}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub antichains: Vec<Vec<Generator>>,
}

impl SupportSet {
    pub fn antichain(&self, s: u64) -> &[Generator] {
        &self.antichains[s as usize]
    }

    /// Distinct generators across all entries.
    pub fn generators(&self) -> Vec<Generator> {
        let mut all: Vec<Generator> = self.antichains.iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        all
    }

    /// Re-checks maximality, decision and coherence by direct evaluation.
    pub fn violation(&self, p: &MonotonePattern) -> Result<Option<String>> {
        let alg = p.algebra();
        if self.antichains.len() != p.elements().len() {
            return Ok(Some("wrong number of entries".into()));
        }
        for (s, chain) in self.antichains.iter().enumerate() {
            let elems = chain.iter().map(|f| alg.gen(f)).collect::<Result<Vec<_>>>()?;
            if !alg.is_max_antichain(&elems)? {
                return Ok(Some(format!("entry {s:#b} is not a maximal antichain")));
            }
            for (f, e) in chain.iter().zip(&elems) {
                let mut sub = s;
                loop {
                    if !decides(e, p.get(sub as u64))? {
                        return Ok(Some(format!("{f:?} does not decide b_{sub:#b}")));
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & s;
                }
                for beta in 0..p.lambda() {
                    if s >> beta & 1 == 1 {
                        let parent = &self.antichains[s & !(1 << beta)];
                        if !parent.iter().any(|g| f.extends(g)) {
                            return Ok(Some(format!("{f:?} refines nothing below entry {s:#b}")));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Greedy support: subsets are handled in increasing mask order, so every
/// `s ∖ {β}` is done before `s`. For `s`, take the first atom not yet covered,
/// start from the union of the parent generators containing it, and add the
/// atom's own coordinates one at a time until the generator decides `b_s` and
/// avoids everything already covered.
pub fn build_support(p: &MonotonePattern) -> Result<SupportSet> {
    if p.lambda() > MAX_SUPPORT_LAMBDA {
        return invalid(format!(
            "supports are built for at most {MAX_SUPPORT_LAMBDA} coordinates"
        ));
    }
    let alg = p.algebra();
    let mut antichains: Vec<Vec<Generator>> = Vec::with_capacity(p.elements().len());
    for s in 0..p.elements().len() {
        let target = p.get(s as u64);
        let mut covered = alg.zero();
        let mut chain = Vec::new();
        while let Some(a) = covered.complement().first_atom() {
            let mut f = Generator::empty();
            for beta in 0..p.lambda() {
                if s >> beta & 1 == 1 {
                    let parent = &antichains[s & !(1 << beta)];
                    if let Some(g) = parent.iter().find(|g| alg.extends(a, g)) {
                        f = f.union(g).expect("generators containing one atom are compatible");
                    }
                }
            }
            let mut next = 0;
            loop {
                let x = alg.gen(&f)?;
                if decides(&x, target)? && x.disjoint(&covered)? {
                    covered = covered.join(&x)?;
                    break;
                }
                while f.get(next).is_some() {
                    next += 1;
                }
                f.insert(next, alg.value(a, next));
            }
            chain.push(f);
        }
        antichains.push(chain);
    }
    Ok(SupportSet { antichains })
}

/// `S_β` per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportProfile {
    pub supports: Vec<Vec<usize>>,
}

impl SupportProfile {
    /// Supports of a refinement's singletons. `b′_{β}` is the disjoint union
    /// of the generators over its essential coordinates, and no generator
    /// decomposition uses fewer coordinates.
    pub fn of_refinement(alg: &PartitionAlgebra, r: &Refinement) -> Result<Self> {
        let supports = (0..r.lambda)
            .map(|beta| alg.essential_coordinates(&r.singleton(alg, beta)))
            .collect::<Result<_>>()?;
        Ok(SupportProfile { supports })
    }

    pub fn max_size(&self) -> usize {
        self.supports.iter().map(Vec::len).max().unwrap_or(0)
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::algebra::{Generator, PartitionAlgebra};
use super::pattern::{MonotonePattern, MAX_LAMBDA};
use super::solver::{refinement_violation, Mode, Refinement};
use super::support::SupportProfile;
use crate::error::{invalid, Error, Result};
use crate::hypergraph::SignedTuple;
use crate::setmaps::{Flavor, SetMapping, SetTable};
use crate::subset::{normalize, subsets_of_size};

/// Pattern over the k-subsets `v_β` met by a family `P` of (k+1)-sets:
/// `b_s = 1 − ∪{x_{α_w ↦ g_w} : w ∈ P, [w]^k ⊆ {v_β : β ∈ s}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2aPattern {
    pub pattern: MonotonePattern,
    pub k: usize,
    /// `v_β` in lexicographic order.
    pub coords: Vec<Vec<usize>>,
    pub family: Vec<Vec<usize>>,
    pub alpha: Vec<usize>,
    pub g: Vec<usize>,
}

impl F2aPattern {
    /// The positive formulas `R(x, v_β)`.
    pub fn formulas(&self) -> Vec<SignedTuple> {
        self.coords.iter().map(|v| SignedTuple::pos(v)).collect()
    }

    /// Mask of the coordinates `[w]^k` for member `i` of the family.
    pub fn member_mask(&self, i: usize) -> u64 {
        subsets_of_size(&self.family[i], self.k)
            .map(|v| self.coords.binary_search(&v).expect("k-subsets of members are coordinates"))
            .fold(0, |m, b| m | 1 << b)
    }
}

pub fn f2a_pattern(
    algebra: &PartitionAlgebra,
    family: &[Vec<usize>],
    k: usize,
    alpha: &[usize],
    g: &[usize],
) -> Result<F2aPattern> {
    if k == 0 {
        return invalid("k must be positive");
    }
    if alpha.len() != family.len() || g.len() != family.len() {
        return invalid("alpha and g need one entry per member of the family");
    }
    let mut members = Vec::with_capacity(family.len());
    for w in family {
        let w = normalize(w);
        if w.len() != k + 1 {
            return invalid(format!("{w:?} is not a set of {} parameters", k + 1));
        }
        members.push(w);
    }
    if members.iter().collect::<BTreeSet<_>>().len() != members.len() {
        return invalid("family members must be distinct");
    }
    if alpha.iter().collect::<BTreeSet<_>>().len() != alpha.len() {
        return invalid("alpha must be injective");
    }
    for (&a, &v) in alpha.iter().zip(g) {
        if a >= algebra.index_count() || v >= algebra.parts() {
            return invalid(format!("generator {a}->{v} outside the algebra"));
        }
    }
    let coords: BTreeSet<Vec<usize>> = members
        .iter()
        .flat_map(|w| subsets_of_size(w, k).collect::<Vec<_>>())
        .collect();
    let coords: Vec<Vec<usize>> = coords.into_iter().collect();
    if coords.len() > MAX_LAMBDA {
        return invalid(format!("{} coordinates exceed the limit {MAX_LAMBDA}", coords.len()));
    }
    let mut out = F2aPattern {
        pattern: MonotonePattern::new(algebra.clone(), 0, vec![algebra.one()])?,
        k,
        coords,
        family: members,
        alpha: alpha.to_vec(),
        g: g.to_vec(),
    };
    let killers: Vec<(u64, _)> = (0..out.family.len())
        .map(|i| {
            let x = algebra.gen(&Generator::from_pairs([(alpha[i], g[i])]))?;
            Ok((out.member_mask(i), x.complement()))
        })
        .collect::<Result<_>>()?;
    out.pattern = MonotonePattern::from_fn(algebra.clone(), out.coords.len(), |s| {
        let mut b = algebra.one();
        for (mask, keep) in &killers {
            if mask & s == *mask {
                b.meet_in(keep);
            }
        }
        b
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportReport {
    pub profile: SupportProfile,
    /// Whether every `α_w` lies in some `S_β` with `v_β ⊆ w`.
    pub subclaim: bool,
    /// Family members for which the subclaim fails.
    pub undetected: Vec<usize>,
    /// Strong mapping `F(v_β) = v_β ∪ ∪{w : α_w ∈ S_β}`.
    pub mapping: SetMapping,
    /// `covered[i]`: whether member `i` is covered by `mapping`.
    pub covered: Vec<bool>,
}

/// Reads supports off a positive refinement of an f2a pattern and turns
/// them into a strong set mapping on the parameters.
pub fn refinement_support_profile(f: &F2aPattern, r: &Refinement) -> Result<SupportReport> {
    if let Some(why) = refinement_violation(&f.pattern, r, &Mode::Positive)? {
        return Err(Error::Misuse(format!("not a positive refinement: {why}")));
    }
    let alg = f.pattern.algebra();
    let profile = SupportProfile::of_refinement(alg, r)?;
    let undetected: Vec<usize> = (0..f.family.len())
        .filter(|&i| {
            let mask = f.member_mask(i);
            !(0..f.coords.len())
                .any(|b| mask >> b & 1 == 1 && profile.supports[b].contains(&f.alpha[i]))
        })
        .collect();

    let ground = f.family.iter().flatten().max().map_or(0, |&v| v + 1);
    let mut table = SetTable::new();
    for (b, v) in f.coords.iter().enumerate() {
        let mut img: BTreeSet<usize> = v.iter().copied().collect();
        for (i, w) in f.family.iter().enumerate() {
            if profile.supports[b].contains(&f.alpha[i]) {
                img.extend(w.iter().copied());
            }
        }
        table.insert(v.clone(), img.into_iter().collect());
    }
    let bound = table.values().map(Vec::len).max().unwrap_or(0).max(f.k);
    let mapping = SetMapping::new(ground, f.k, Flavor::Strong, bound, table)?;
    let covered = f
        .family
        .iter()
        .map(|w| mapping.is_covered(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SupportReport {
        profile,
        subclaim: undetected.is_empty(),
        undetected,
        mapping,
        covered,
    })
}

/// Certificate inputs for an f2a instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2aInputs {
    #[serde(rename = "A")]
    pub index_count: usize,
    pub mu: usize,
    pub k: usize,
    pub family: Vec<Vec<usize>>,
    pub alpha: Vec<usize>,
    pub g: Vec<usize>,
}

impl F2aInputs {
    pub fn build(&self) -> Result<F2aPattern> {
        let alg = PartitionAlgebra::new(self.index_count, self.mu)?;
        f2a_pattern(&alg, &self.family, self.k, &self.alpha, &self.g)
    }
}

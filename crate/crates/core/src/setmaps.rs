//! Set mappings, free sets and covered sets over finite ground sets.

use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::modular_model;
use crate::subset::{binomial, normalize, range_subsets, subsets_of_size};

/// Raw table from argument sets to image sets.
pub type SetTable = BTreeMap<Vec<usize>, Vec<usize>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `F(x) ∩ x = ∅`.
    Standard,
    /// `x ⊆ F(x)`.
    Strong,
}

/// A set mapping on `[0, ground)` with arguments of size `arity`.
///
/// Arguments absent from the table map to the least admissible image: the
/// empty set (standard) or the argument itself (strong).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SetMappingDoc", into = "SetMappingDoc")]
pub struct SetMapping {
    ground: usize,
    arity: usize,
    flavor: Flavor,
    image_bound: usize,
    table: SetTable,
}

#[derive(Serialize, Deserialize)]
struct SetMappingDoc {
    #[serde(rename = "L")]
    ground: usize,
    arity: usize,
    flavor: Flavor,
    #[serde(rename = "B")]
    image_bound: usize,
    entries: Vec<(Vec<usize>, Vec<usize>)>,
}

impl TryFrom<SetMappingDoc> for SetMapping {
    type Error = Error;

    fn try_from(doc: SetMappingDoc) -> Result<Self> {
        SetMapping::new(
            doc.ground,
            doc.arity,
            doc.flavor,
            doc.image_bound,
            doc.entries.into_iter().collect(),
        )
    }
}

impl From<SetMapping> for SetMappingDoc {
    fn from(f: SetMapping) -> Self {
        SetMappingDoc {
            ground: f.ground,
            arity: f.arity,
            flavor: f.flavor,
            image_bound: f.image_bound,
            entries: f.table.into_iter().collect(),
        }
    }
}

impl SetMapping {
    pub fn new(
        ground: usize,
        arity: usize,
        flavor: Flavor,
        image_bound: usize,
        table: SetTable,
    ) -> Result<Self> {
        if flavor == Flavor::Strong && arity > image_bound {
            return invalid(format!(
                "strong mapping of arity {arity} cannot have image bound {image_bound}"
            ));
        }
        let mut clean = SetTable::new();
        for (x, img) in table {
            let x = normalize(&x);
            let img = normalize(&img);
            if x.len() != arity {
                return invalid(format!("argument {x:?} does not have size {arity}"));
            }
            if let Some(v) = x.iter().chain(&img).find(|&&v| v >= ground) {
                return invalid(format!("element {v} outside ground [0, {ground})"));
            }
            if img.len() > image_bound {
                return invalid(format!(
                    "image of {x:?} has {} elements, bound is {image_bound}",
                    img.len()
                ));
            }
            match flavor {
                Flavor::Standard if img.iter().any(|v| x.binary_search(v).is_ok()) => {
                    return invalid(format!("image of {x:?} meets its argument"));
                }
                Flavor::Strong if !crate::subset::is_sorted_subset(&x, &img) => {
                    return invalid(format!("image of {x:?} does not contain its argument"));
                }
                _ => {}
            }
            if clean.insert(x.clone(), img).is_some() {
                return invalid(format!("argument {x:?} listed twice"));
            }
        }
        Ok(SetMapping {
            ground,
            arity,
            flavor,
            image_bound,
            table: clean,
        })
    }

    /// Builds a mapping from a function evaluated on every argument, with the
    /// image bound set to the largest image produced.
    pub fn from_fn(
        ground: usize,
        arity: usize,
        flavor: Flavor,
        mut f: impl FnMut(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let table: SetTable = range_subsets(ground, arity)
            .map(|x| {
                let img = normalize(&f(&x));
                (x, img)
            })
            .collect();
        let floor = if flavor == Flavor::Strong { arity } else { 0 };
        let bound = table.values().map(Vec::len).max().unwrap_or(0).max(floor);
        SetMapping::new(ground, arity, flavor, bound, table)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn image_bound(&self) -> usize {
        self.image_bound
    }

    pub fn table(&self) -> &SetTable {
        &self.table
    }

    /// Image of a sorted argument.
    pub fn image(&self, x: &[usize]) -> Cow<'_, [usize]> {
        match self.table.get(x) {
            Some(img) => Cow::Borrowed(img.as_slice()),
            None => match self.flavor {
                Flavor::Standard => Cow::Borrowed(&[]),
                Flavor::Strong => Cow::Owned(x.to_vec()),
            },
        }
    }

    fn check_subset(&self, xs: &[usize]) -> Result<()> {
        if let Some(v) = xs.iter().find(|&&v| v >= self.ground) {
            return invalid(format!("element {v} outside ground [0, {})", self.ground));
        }
        Ok(())
    }

    fn require(&self, flavor: Flavor, op: &str) -> Result<()> {
        if self.flavor != flavor {
            return Err(Error::Misuse(format!(
                "{op} needs a {flavor:?} mapping, got {:?}",
                self.flavor
            )));
        }
        Ok(())
    }

    /// First `(x, y)` in lexicographic order with `x ∈ [X]^arity` and
    /// `y ∈ F(x) ∩ X`; `None` when `X` is free.
    pub fn free_violation(&self, xs: &[usize]) -> Result<Option<(Vec<usize>, usize)>> {
        self.require(Flavor::Standard, "is_free")?;
        let xs = normalize(xs);
        self.check_subset(&xs)?;
        for x in subsets_of_size(&xs, self.arity) {
            let img = self.image(&x);
            if let Some(&y) = img.iter().find(|y| xs.binary_search(y).is_ok()) {
                return Ok(Some((x, y)));
            }
        }
        Ok(None)
    }

    pub fn is_free(&self, xs: &[usize]) -> Result<bool> {
        Ok(self.free_violation(xs)?.is_none())
    }

    /// First `x ∈ [X]^arity` (lexicographic) with `X ⊆ F(x)`.
    pub fn covering_witness(&self, xs: &[usize]) -> Result<Option<Vec<usize>>> {
        self.require(Flavor::Strong, "is_covered")?;
        let xs = normalize(xs);
        self.check_subset(&xs)?;
        let found = subsets_of_size(&xs, self.arity)
            .find(|x| crate::subset::is_sorted_subset(&xs, &self.image(x)));
        Ok(found)
    }

    pub fn is_covered(&self, xs: &[usize]) -> Result<bool> {
        Ok(self.covering_witness(xs)?.is_some())
    }

    /// Lexicographically first free set of size `n`, by depth-first search
    /// that abandons a partial set as soon as it stops being free.
    pub fn find_free(&self, n: usize) -> Result<Option<Vec<usize>>> {
        self.require(Flavor::Standard, "find_free")?;
        let mut chosen = Vec::with_capacity(n);
        let mut blocked = vec![0u32; self.ground];
        Ok(self.extend_free(&mut chosen, &mut blocked, 0, n).then_some(chosen))
    }

    fn extend_free(&self, chosen: &mut Vec<usize>, blocked: &mut [u32], start: usize, n: usize) -> bool {
        if chosen.len() == n {
            return true;
        }
        if self.ground - start < n - chosen.len() {
            return false;
        }
        for e in start..self.ground {
            if self.ground - e < n - chosen.len() {
                break;
            }
            if blocked[e] > 0 {
                continue;
            }
            // New arguments are the arity-subsets containing e.
            let mut new_args = Vec::new();
            let mut ok = true;
            if chosen.len() + 1 >= self.arity {
                for rest in subsets_of_size(chosen, self.arity.saturating_sub(1)) {
                    let mut x = rest;
                    x.push(e);
                    let img = self.image(&x);
                    if img.iter().any(|y| *y == e || chosen.binary_search(y).is_ok()) {
                        ok = false;
                        break;
                    }
                    new_args.push(x);
                }
            }
            if !ok {
                continue;
            }
            for x in &new_args {
                for &y in self.image(x).iter() {
                    blocked[y] += 1;
                }
            }
            chosen.push(e);
            if self.extend_free(chosen, blocked, e + 1, n) {
                return true;
            }
            chosen.pop();
            for x in &new_args {
                for &y in self.image(x).iter() {
                    blocked[y] -= 1;
                }
            }
        }
        false
    }
}

/// Turns an arbitrary map on k-subsets of `[1, top]` into the standard set
/// mapping `G(u) = (F(u) \ u) ∪ {0}` on `[0, top]`. A free set for `G` of size
/// greater than k avoids 0 and is covered by no `F(u)`.
pub fn c10_normalize(top: usize, k: usize, f: &SetTable) -> Result<SetMapping> {
    if k == 0 {
        return invalid("arity must be positive");
    }
    for (u, img) in f {
        if u.contains(&0) {
            return invalid(format!("argument {u:?} contains the reserved element 0"));
        }
        if u.len() != k {
            return invalid(format!("argument {u:?} does not have size {k}"));
        }
        if let Some(v) = u.iter().chain(img).find(|&&v| v > top) {
            return invalid(format!("element {v} outside [0, {top}]"));
        }
    }
    let shifted: Vec<usize> = (1..=top).collect();
    let table: SetTable = subsets_of_size(&shifted, k)
        .map(|u| {
            let mut img: Vec<usize> = f
                .get(&u)
                .map(|img| normalize(img))
                .unwrap_or_default()
                .into_iter()
                .filter(|v| u.binary_search(v).is_err())
                .collect();
            img.insert(0, 0);
            img.dedup();
            (u, img)
        })
        .collect();
    let bound = table.values().map(Vec::len).max().unwrap_or(0);
    SetMapping::new(top + 1, k, Flavor::Standard, bound, table)
}

/// Raises the arity of a standard mapping from `m0 = F.arity` to `target`:
/// `F′(u) = ∪{F(u′) : u′ ∈ [u]^{m0}} \ u`.
pub fn shrink_arity(f: &SetMapping, target: usize) -> Result<SetMapping> {
    f.require(Flavor::Standard, "shrink_arity")?;
    if f.arity > target {
        return invalid(format!(
            "source arity {} exceeds target arity {target}",
            f.arity
        ));
    }
    let table: SetTable = range_subsets(f.ground, target)
        .filter_map(|u| {
            let mut img: Vec<usize> = subsets_of_size(&u, f.arity)
                .flat_map(|x| f.image(&x).into_owned())
                .filter(|y| u.binary_search(y).is_err())
                .collect();
            img.sort_unstable();
            img.dedup();
            (!img.is_empty()).then_some((u, img))
        })
        .collect();
    let bound = binomial(target, f.arity) * f.image_bound;
    SetMapping::new(f.ground, target, Flavor::Standard, bound, table)
}

/// Sub-selection step of the monotonicity transform: given `v_star` free for
/// `shrink_arity(f, m)` with `|v_star| > m`, its first `n0` elements form a
/// set free for `f`.
pub fn monotone_subselection(f: &SetMapping, m: usize, v_star: &[usize], n0: usize) -> Result<Vec<usize>> {
    let v_star = normalize(v_star);
    if v_star.len() <= m {
        return invalid(format!(
            "free set of size {} must exceed the arity {m}",
            v_star.len()
        ));
    }
    if n0 > v_star.len() {
        return invalid(format!("cannot select {n0} of {} elements", v_star.len()));
    }
    f.check_subset(&v_star)?;
    Ok(v_star[..n0].to_vec())
}

/// How `β` is tied to an element `γ` of a perturbed image when building `F₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationRule {
    /// `β < nγ + n` and `γ < nβ + n`, evaluated as written. Every `β` from the
    /// block of `γ` upward qualifies, so images swallow all larger points.
    Literal,
    /// `β` is the block index of `γ`: `nβ ≤ γ < nβ + n`.
    #[default]
    Block,
}

impl SeparationRule {
    fn related(self, beta: usize, gamma: usize, n: usize) -> bool {
        match self {
            SeparationRule::Literal => beta < n * gamma + n && gamma < n * beta + n,
            SeparationRule::Block => gamma / n == beta,
        }
    }
}

/// `F₁(v)` for every `v ∈ [q]^k`: all `β < q` related to some `γ` in the image
/// of a perturbed tuple `{n·α_j + i_j}` with `i_j < n`.
pub fn f1_transform(q: usize, n: usize, k: usize, f: &SetMapping, rule: SeparationRule) -> Result<SetTable> {
    check_f2ax_args(q, n, k, f)?;
    let mut out = SetTable::new();
    for v in range_subsets(q, k) {
        let mut gammas: Vec<usize> = Vec::new();
        let mut offsets = vec![0usize; k];
        loop {
            let tuple: Vec<usize> = v.iter().zip(&offsets).map(|(&a, &i)| n * a + i).collect();
            gammas.extend(f.image(&tuple).iter().copied());
            // Odometer over (i_0, .., i_{k-1}) ∈ [0, n)^k.
            let mut pos = 0;
            while pos < k {
                offsets[pos] += 1;
                if offsets[pos] < n {
                    break;
                }
                offsets[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
        gammas.sort_unstable();
        gammas.dedup();
        let img: Vec<usize> = (0..q)
            .filter(|&beta| gammas.iter().any(|&g| rule.related(beta, g, n)))
            .collect();
        out.insert(v, img);
    }
    Ok(out)
}

fn check_f2ax_args(q: usize, n: usize, k: usize, f: &SetMapping) -> Result<()> {
    if k < 2 || n <= k {
        return invalid(format!("need n > k >= 2, got n={n}, k={k}"));
    }
    f.require(Flavor::Strong, "f2ax_witness")?;
    if f.arity != k {
        return invalid(format!("mapping has arity {}, expected {k}", f.arity));
    }
    if f.ground != n * q {
        return invalid(format!("mapping ground {} is not n*q = {}", f.ground, n * q));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2axWitness {
    /// Free set `{α*_i}` found in `[0, q)`.
    pub w1: Vec<usize>,
    /// `{n·α*_i + i}`: complete in the modular model and not covered by `F`.
    pub w2: Vec<usize>,
}

/// Produces an R-complete n-set of the modular model that the strong mapping
/// `f` does not cover, by finding a free set for the normalized `F₁`.
pub fn f2ax_witness(
    q: usize,
    n: usize,
    k: usize,
    f: &SetMapping,
    rule: SeparationRule,
) -> Result<Option<F2axWitness>> {
    let f1 = f1_transform(q, n, k, f, rule)?;
    // Move [0, q) to [1, q] so that 0 is free for the normalization.
    let shifted: SetTable = f1
        .iter()
        .map(|(u, img)| {
            (
                u.iter().map(|x| x + 1).collect(),
                img.iter().map(|x| x + 1).collect(),
            )
        })
        .collect();
    let g = c10_normalize(q, k, &shifted)?;
    let Some(free) = g.find_free(n)? else {
        return Ok(None);
    };
    debug_assert!(!free.contains(&0));
    let w1: Vec<usize> = free.iter().map(|x| x - 1).collect();
    let w2: Vec<usize> = w1.iter().enumerate().map(|(i, &a)| n * a + i).collect();

    let model = modular_model(q, n, k)?;
    assert!(model.is_complete(&w2)?, "β-witness {w2:?} is not complete");
    assert!(!f.is_covered(&w2)?, "β-witness {w2:?} is covered");
    Ok(Some(F2axWitness { w1, w2 }))
}

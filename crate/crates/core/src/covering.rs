//! Covering colorings: the properties Pr⁰ and Pr¹, minimal color counts,
//! order-type compression and lifting, and the level-by-level amalgamation
//! construction run on finite strata.
//!
//! Subsets of the ground set `[0, L)` are `u64` bitmasks, so `L ≤ 63`;
//! materialized colorings need `L ≤ 20`.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::Hypergraph;
use crate::subset::{binomial, elements, mask_of, normalize, range_subsets, submasks_of_size};

pub const DEFAULT_CAP: u64 = 10_000_000;
pub const MAX_DENSE_UNIVERSE: usize = 20;
pub const MAX_UNIVERSE: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Every n-set is constrained.
    Pr0,
    /// Only n-sets that are complete in the host hypergraph are constrained.
    Pr1,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrInstance {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub mu: usize,
    pub theta: usize,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<Hypergraph>,
}

impl PrInstance {
    pub fn pr0(n: usize, k: usize, l: usize, mu: usize, theta: usize) -> Result<Self> {
        let inst = PrInstance {
            n,
            k,
            l,
            mu,
            theta,
            variant: Variant::Pr0,
            host: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn pr1(n: usize, k: usize, mu: usize, theta: usize, host: Hypergraph) -> Result<Self> {
        let inst = PrInstance {
            n,
            k,
            l: host.vertex_count(),
            mu,
            theta,
            variant: Variant::Pr1,
            host: Some(host),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n <= self.k {
            return invalid(format!("need n > k >= 2, got n={}, k={}", self.n, self.k));
        }
        if self.theta < self.k + 1 {
            return invalid(format!("theta={} must be at least k+1", self.theta));
        }
        if self.l > MAX_UNIVERSE {
            return invalid(format!("ground size {} exceeds {MAX_UNIVERSE}", self.l));
        }
        if self.mu == 0 {
            return invalid("palette must have at least one color");
        }
        match (&self.variant, &self.host) {
            (Variant::Pr1, None) => invalid("variant 1 needs a host hypergraph"),
            (Variant::Pr1, Some(h)) if h.vertex_count() != self.l || h.k() != self.k => invalid(format!(
                "host must have {} vertices and edges of size {}",
                self.l,
                self.k + 1
            )),
            _ => Ok(()),
        }
    }

    /// Same instance with the host dropped and the variant set to Pr⁰, or with
    /// a host attached and the variant set to Pr¹.
    pub fn with_host(&self, host: Option<Hypergraph>) -> Result<Self> {
        let mut inst = self.clone();
        inst.variant = if host.is_some() { Variant::Pr1 } else { Variant::Pr0 };
        inst.host = host;
        inst.validate()?;
        Ok(inst)
    }

    /// The constrained n-sets as masks, lexicographic.
    pub fn constrained_sets(&self) -> Vec<u64> {
        range_subsets(self.l, self.n)
            .filter(|w| match &self.host {
                Some(h) if self.variant == Variant::Pr1 => h.is_complete(w).unwrap_or(false),
                _ => true,
            })
            .map(|w| mask_of(&w))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Table {
    /// Color per mask of `[0, L)`; masks of size `>= theta` are unused.
    Dense(Vec<u32>),
    /// Color derived from a keyed hash of the mask.
    Hashed(u64),
}

/// A map from subsets of `[0, L)` of size `< theta` to colors in `[0, mu)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ColoringDoc", into = "ColoringDoc")]
pub struct Coloring {
    universe: usize,
    theta: usize,
    mu: usize,
    table: Table,
}

#[derive(Serialize, Deserialize)]
struct ColoringDoc {
    #[serde(rename = "L")]
    universe: usize,
    theta: usize,
    mu: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hashed_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    entries: Vec<(Vec<usize>, u32)>,
}

impl TryFrom<ColoringDoc> for Coloring {
    type Error = Error;

    fn try_from(doc: ColoringDoc) -> Result<Self> {
        if let Some(seed) = doc.hashed_seed {
            return Coloring::hashed(doc.universe, doc.theta, doc.mu, seed);
        }
        let entries: HashMap<u64, u32> = doc
            .entries
            .iter()
            .map(|(u, c)| (mask_of(u), *c))
            .collect();
        if entries.len() != doc.entries.len() {
            return invalid("coloring lists a subset twice");
        }
        let c = Coloring::from_fn(doc.universe, doc.theta, doc.mu, |m| {
            entries.get(&m).copied().unwrap_or(u32::MAX)
        });
        match c {
            Err(Error::InvalidInput(_)) if entries.len() < canonical_masks(doc.universe, doc.theta).len() => {
                invalid("coloring entries do not cover every small subset")
            }
            other => other,
        }
    }
}

impl From<Coloring> for ColoringDoc {
    fn from(c: Coloring) -> Self {
        match c.table {
            Table::Hashed(seed) => ColoringDoc {
                universe: c.universe,
                theta: c.theta,
                mu: c.mu,
                hashed_seed: Some(seed),
                entries: Vec::new(),
            },
            Table::Dense(ref colors) => ColoringDoc {
                universe: c.universe,
                theta: c.theta,
                mu: c.mu,
                hashed_seed: None,
                entries: canonical_masks(c.universe, c.theta)
                    .into_iter()
                    .map(|m| (elements(m), colors[m as usize]))
                    .collect(),
            },
        }
    }
}

/// Masks of `[0, universe)` with fewer than `theta` elements, ordered by size
/// and then numerically.
pub fn canonical_masks(universe: usize, theta: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for size in 0..theta.min(universe + 1) {
        let mut layer: Vec<u64> = range_subsets(universe, size).map(|s| mask_of(&s)).collect();
        layer.sort_unstable();
        out.extend(layer);
    }
    out
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Coloring {
    /// Materializes `f` on every subset of size `< theta`.
    pub fn from_fn(universe: usize, theta: usize, mu: usize, mut f: impl FnMut(u64) -> u32) -> Result<Self> {
        if universe > MAX_DENSE_UNIVERSE {
            return invalid(format!(
                "dense colorings need L <= {MAX_DENSE_UNIVERSE}, got {universe}"
            ));
        }
        if mu == 0 {
            return invalid("palette must have at least one color");
        }
        let mut colors = vec![u32::MAX; 1usize << universe];
        for m in canonical_masks(universe, theta) {
            let c = f(m);
            if c as usize >= mu {
                return invalid(format!("color {c} of {:?} outside palette of {mu}", elements(m)));
            }
            colors[m as usize] = c;
        }
        Ok(Coloring {
            universe,
            theta,
            mu,
            table: Table::Dense(colors),
        })
    }

    pub fn constant(universe: usize, theta: usize) -> Result<Self> {
        Coloring::from_fn(universe, theta, 1, |_| 0)
    }

    /// Lazily evaluated coloring: the color of a set is a keyed hash of its
    /// canonical (bitmask) form, so it never needs materializing.
    pub fn hashed(universe: usize, theta: usize, mu: usize, seed: u64) -> Result<Self> {
        if universe > MAX_UNIVERSE {
            return invalid(format!("ground size {universe} exceeds {MAX_UNIVERSE}"));
        }
        if mu == 0 {
            return invalid("palette must have at least one color");
        }
        Ok(Coloring {
            universe,
            theta,
            mu,
            table: Table::Hashed(seed),
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.table, Table::Dense(_))
    }

    /// Color of a subset given as a mask; callers keep `|mask| < theta`.
    pub fn color(&self, mask: u64) -> u32 {
        debug_assert!((mask.count_ones() as usize) < self.theta);
        match &self.table {
            Table::Dense(colors) => colors[mask as usize],
            Table::Hashed(seed) => (mix(seed ^ mix(mask)) % self.mu as u64) as u32,
        }
    }

    pub fn color_of(&self, u: &[usize]) -> Result<u32> {
        let u = normalize(u);
        if let Some(v) = u.iter().find(|&&v| v >= self.universe) {
            return invalid(format!("element {v} outside [0, {})", self.universe));
        }
        if u.len() >= self.theta {
            return invalid(format!("set of size {} is outside the domain (< {})", u.len(), self.theta));
        }
        Ok(self.color(mask_of(&u)))
    }

    /// Number of distinct colors actually used on sets of size `< theta`.
    pub fn colors_used(&self) -> usize {
        let mut seen: Vec<u32> = canonical_masks(self.universe, self.theta)
            .into_iter()
            .map(|m| self.color(m))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// A candidate failure of Pr: an n-set `w` with an envelope `u_v ⊇ v` for each
/// `v ∈ [w]^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    pub w: Vec<usize>,
    /// `(v, u_v)` pairs sorted by `v`.
    pub envelopes: Vec<(Vec<usize>, Vec<usize>)>,
}

impl EnvelopeConfig {
    pub fn new(w: &[usize], k: usize, envelopes: Vec<(Vec<usize>, Vec<usize>)>) -> Result<Self> {
        let w = normalize(w);
        let mut map = BTreeMap::new();
        for (v, u) in envelopes {
            let (v, u) = (normalize(&v), normalize(&u));
            if !crate::subset::is_sorted_subset(&v, &w) || v.len() != k {
                return invalid(format!("{v:?} is not a {k}-subset of {w:?}"));
            }
            if !crate::subset::is_sorted_subset(&v, &u) {
                return invalid(format!("envelope {u:?} does not contain {v:?}"));
            }
            if map.insert(v.clone(), u).is_some() {
                return invalid(format!("two envelopes for {v:?}"));
            }
        }
        if map.len() != binomial(w.len(), k) {
            return invalid(format!("need an envelope for each of the {} k-subsets", binomial(w.len(), k)));
        }
        Ok(EnvelopeConfig {
            w,
            envelopes: map.into_iter().collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.envelopes.first().map_or(0, |(v, _)| v.len())
    }
}

/// Whether `cfg` defeats `g`: all envelopes share a color and none contains `w`.
pub fn config_violates(g: &Coloring, cfg: &EnvelopeConfig) -> bool {
    let w = mask_of(&cfg.w);
    let mut colors = cfg.envelopes.iter().map(|(_, u)| g.color(mask_of(u)));
    let Some(first) = colors.next() else { return false };
    colors.all(|c| c == first) && cfg.envelopes.iter().all(|(_, u)| mask_of(u) & w != w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrVerdict {
    Ok,
    Counterexample(EnvelopeConfig),
}

impl PrVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, PrVerdict::Ok)
    }
}

/// Masks `u ⊇ v` inside `[0, universe)` with `|u| < theta` and `w ⊄ u`,
/// ordered by size and then numerically.
fn envelopes_of(v: u64, w: u64, universe: usize, theta: usize) -> Vec<u64> {
    let base = v.count_ones() as usize;
    let free: Vec<usize> = (0..universe).filter(|&i| v & (1 << i) == 0).collect();
    let mut out = Vec::new();
    for extra in 0..theta.saturating_sub(base) {
        let mut layer: Vec<u64> = free
            .iter()
            .copied()
            .combinations(extra)
            .map(|c| v | mask_of(&c))
            .filter(|u| u & w != w)
            .collect();
        layer.sort_unstable();
        out.extend(layer);
    }
    out
}

fn envelope_count(universe: usize, k: usize, theta: usize) -> u128 {
    (0..theta.saturating_sub(k))
        .map(|j| binomial(universe.saturating_sub(k), j) as u128)
        .sum()
}

fn check_compatible(g: &Coloring, inst: &PrInstance) -> Result<()> {
    inst.validate()?;
    if g.universe < inst.l || g.theta < inst.theta {
        return invalid(format!(
            "coloring on L={} theta={} does not cover instance L={} theta={}",
            g.universe, g.theta, inst.l, inst.theta
        ));
    }
    if g.mu > inst.mu {
        return invalid(format!("coloring palette {} exceeds instance palette {}", g.mu, inst.mu));
    }
    Ok(())
}

/// Decides Pr for `g` at `inst` by checking, for each constrained `w` in
/// lexicographic order, whether some color is available to every `v ∈ [w]^k`
/// among envelopes avoiding `w`. The first failing `w` yields a counterexample
/// with the least envelope (by size, then mask) of the shared color.
pub fn verify_pr(g: &Coloring, inst: &PrInstance, cap: u64) -> Result<PrVerdict> {
    check_compatible(g, inst)?;
    let ws = inst.constrained_sets();
    let work = ws.len() as u128 * binomial(inst.n, inst.k) as u128 * envelope_count(inst.l, inst.k, inst.theta);
    if work > cap as u128 {
        return Err(Error::CapExceeded {
            what: format!("verify_pr over {} sets", ws.len()),
            cap,
        });
    }
    let found = ws.par_iter().find_map_first(|&w| failing_config(g, inst, w));
    Ok(match found {
        Some(cfg) => PrVerdict::Counterexample(cfg),
        None => PrVerdict::Ok,
    })
}

fn failing_config(g: &Coloring, inst: &PrInstance, w: u64) -> Option<EnvelopeConfig> {
    let vs = submasks_of_size(w, inst.k);
    let mut per_v: Vec<Vec<u64>> = Vec::with_capacity(vs.len());
    let mut common: Option<Vec<u32>> = None;
    for &v in &vs {
        let envs = envelopes_of(v, w, inst.l, inst.theta);
        let mut colors: Vec<u32> = envs.iter().map(|&u| g.color(u)).collect();
        colors.sort_unstable();
        colors.dedup();
        common = Some(match common {
            None => colors,
            Some(prev) => prev.into_iter().filter(|c| colors.binary_search(c).is_ok()).collect(),
        });
        if common.as_ref().is_some_and(Vec::is_empty) {
            return None;
        }
        per_v.push(envs);
    }
    let c = *common?.first()?;
    let envelopes = vs
        .iter()
        .zip(&per_v)
        .map(|(&v, envs)| {
            let u = envs.iter().copied().find(|&u| g.color(u) == c).expect("shared color");
            (elements(v), elements(u))
        })
        .collect();
    Some(EnvelopeConfig {
        w: elements(w),
        envelopes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinColors {
    pub mu_min: usize,
    pub witness: Coloring,
    /// Search nodes visited over all palette sizes tried.
    pub nodes: u64,
}

/// Least palette size admitting a coloring that passes [`verify_pr`], with a
/// witness. `inst.mu` is ignored. Sets smaller than k are never envelopes and
/// get color 0; the remaining sets are colored by backtracking in canonical
/// order with incremental monochromatic-family counters.
pub fn min_colors(inst: &PrInstance, cap: u64) -> Result<MinColors> {
    inst.validate()?;
    if inst.l > MAX_DENSE_UNIVERSE {
        return invalid(format!("min_colors needs L <= {MAX_DENSE_UNIVERSE}"));
    }
    let ws = inst.constrained_sets();
    let subsets: Vec<u64> = canonical_masks(inst.l, inst.theta)
        .into_iter()
        .filter(|m| m.count_ones() as usize >= inst.k)
        .collect();
    let nv = binomial(inst.n, inst.k);
    // incidences[i]: (w index, v index) pairs for which subsets[i] is an envelope.
    let vs_of: Vec<Vec<u64>> = ws.iter().map(|&w| submasks_of_size(w, inst.k)).collect();
    let incidences: Vec<Vec<(usize, usize)>> = subsets
        .iter()
        .map(|&u| {
            let mut out = Vec::new();
            for (wi, &w) in ws.iter().enumerate() {
                if u & w == w {
                    continue;
                }
                for (vi, &v) in vs_of[wi].iter().enumerate() {
                    if u & v == v {
                        out.push((wi, vi));
                    }
                }
            }
            out
        })
        .collect();

    let mut nodes = 0u64;
    for mu in 1.. {
        let mut search = ColorSearch {
            incidences: &incidences,
            nv,
            mu,
            cnt: vec![0; ws.len() * nv * mu],
            full: vec![0; ws.len() * mu],
            assign: vec![0; subsets.len()],
            nodes: &mut nodes,
            cap,
        };
        if search.run(0, 0)? {
            let chosen: HashMap<u64, u32> = subsets.iter().copied().zip(search.assign.iter().copied()).collect();
            let witness = Coloring::from_fn(inst.l, inst.theta, mu, |m| chosen.get(&m).copied().unwrap_or(0))?;
            return Ok(MinColors {
                mu_min: mu,
                witness,
                nodes,
            });
        }
    }
    unreachable!("an injective coloring always passes")
}

struct ColorSearch<'a> {
    incidences: &'a [Vec<(usize, usize)>],
    nv: usize,
    mu: usize,
    cnt: Vec<u32>,
    full: Vec<u32>,
    assign: Vec<u32>,
    nodes: &'a mut u64,
    cap: u64,
}

impl ColorSearch<'_> {
    /// Applies (`delta = 1`) or removes (`delta = -1`) color `c` on subset `i`;
    /// returns whether some constrained set became fully monochromatic.
    fn apply(&mut self, i: usize, c: usize, add: bool) -> bool {
        let mut violated = false;
        for &(wi, vi) in &self.incidences[i] {
            let slot = (wi * self.nv + vi) * self.mu + c;
            let full = wi * self.mu + c;
            if add {
                self.cnt[slot] += 1;
                if self.cnt[slot] == 1 {
                    self.full[full] += 1;
                    if self.full[full] as usize == self.nv {
                        violated = true;
                    }
                }
            } else {
                self.cnt[slot] -= 1;
                if self.cnt[slot] == 0 {
                    self.full[full] -= 1;
                }
            }
        }
        violated
    }

    fn run(&mut self, i: usize, used: usize) -> Result<bool> {
        if i == self.incidences.len() {
            return Ok(true);
        }
        *self.nodes += 1;
        if *self.nodes > self.cap {
            return Err(Error::CapExceeded {
                what: "min_colors backtracking".into(),
                cap: self.cap,
            });
        }
        for c in 0..self.mu.min(used + 1) {
            let violated = self.apply(i, c, true);
            if !violated {
                self.assign[i] = c as u32;
                if self.run(i + 1, used.max(c + 1))? {
                    return Ok(true);
                }
            }
            self.apply(i, c, false);
        }
        Ok(false)
    }
}

/// Colors of all subsets of `u` (ascending `u`), listed by position mask.
fn signature(u: u64, g: &Coloring) -> Vec<u32> {
    let elems = elements(u);
    (0u64..1 << elems.len())
        .map(|pos| {
            let sub = elements(pos).iter().fold(0u64, |m, &p| m | 1 << elems[p]);
            g.color(sub)
        })
        .collect()
}

fn check_in_domain(u: u64, g: &Coloring) -> Result<()> {
    if (u.count_ones() as usize) >= g.theta {
        return invalid(format!("{:?} is too large for a coloring with theta={}", elements(u), g.theta));
    }
    if g.universe < 64 && u >> g.universe != 0 {
        return invalid(format!("{:?} leaves the ground set", elements(u)));
    }
    Ok(())
}

/// The relation E_*: equal size and the order isomorphism preserves the color
/// of every subset.
pub fn otp_equiv(u1: &[usize], u2: &[usize], g1: &Coloring) -> Result<bool> {
    let (a, b) = (mask_of(&normalize(u1)), mask_of(&normalize(u2)));
    check_in_domain(a, g1)?;
    check_in_domain(b, g1)?;
    Ok(a.count_ones() == b.count_ones() && signature(a, g1) == signature(b, g1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressedConfig {
    /// Union of the positions of each `v` inside its envelope.
    pub u_star: Vec<usize>,
    /// `(v, u′_v)` with `u′_v` the image of `u_star` in `u_v`.
    pub envelopes: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Pulls every envelope back to its positions, takes the union `u_star` of the
/// positions of the `v`'s, and pushes `u_star` forward into each envelope.
pub fn compress_config(cfg: &EnvelopeConfig) -> Result<CompressedConfig> {
    let Some((_, first)) = cfg.envelopes.first() else {
        return invalid("configuration has no envelopes");
    };
    let zeta = first.len();
    if cfg.envelopes.iter().any(|(_, u)| u.len() != zeta) {
        return invalid("envelopes have different order types");
    }
    let mut u_star: Vec<usize> = cfg
        .envelopes
        .iter()
        .flat_map(|(v, u)| v.iter().map(move |x| u.binary_search(x).expect("v inside u_v")))
        .collect();
    u_star.sort_unstable();
    u_star.dedup();
    let k = cfg.k();
    let bound = k * binomial(cfg.w.len(), k);
    assert!(u_star.len() <= bound, "|u_star| = {} exceeds {bound}", u_star.len());
    let envelopes = cfg
        .envelopes
        .iter()
        .map(|(v, u)| (v.clone(), u_star.iter().map(|&p| u[p]).collect()))
        .collect();
    Ok(CompressedConfig { u_star, envelopes })
}

/// Colors each set of size `< theta_target` by its E_*-class under `g1`,
/// numbering classes in canonical order of their first member.
pub fn lift_coloring(g1: &Coloring, theta_target: usize, palette: usize) -> Result<Coloring> {
    if theta_target > g1.theta {
        return invalid(format!(
            "E_* compares colors of whole argument sets, so theta_target={theta_target} cannot exceed theta={}",
            g1.theta
        ));
    }
    let mut classes: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
    let mut colors: HashMap<u64, u32> = HashMap::new();
    for m in canonical_masks(g1.universe, theta_target) {
        let key = (m.count_ones(), signature(m, g1));
        let next = classes.len() as u32;
        let id = *classes.entry(key).or_insert(next);
        colors.insert(m, id);
    }
    if classes.len() > palette {
        return Err(Error::PaletteOverflow {
            needed: classes.len(),
            palette,
        });
    }
    Coloring::from_fn(g1.universe, theta_target, palette, |m| colors[&m])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumViolation {
    pub level: usize,
    pub size: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Z4Failure {
    /// Case 1 needed more fresh colors than the palette had left.
    PaletteExhausted {
        level: usize,
        u: Vec<usize>,
        a: Vec<usize>,
        needed: usize,
        available: usize,
    },
    /// The finished coloring did not pass verification.
    Verification(EnvelopeConfig),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z4Report {
    pub strata: Vec<usize>,
    pub coloring: Option<Coloring>,
    pub failure: Option<Z4Failure>,
    /// Largest color index used plus one.
    pub palette_used: usize,
    pub calls: usize,
    pub stratum_violations: Vec<StratumViolation>,
}

impl Z4Report {
    pub fn succeeded(&self) -> bool {
        self.coloring.is_some()
    }
}

struct Z4State<'a> {
    inst: &'a PrInstance,
    strata: &'a [usize],
    colors: Vec<Option<u32>>,
    calls: usize,
    violations: Vec<StratumViolation>,
}

impl Z4State<'_> {
    fn palette_used(&self) -> usize {
        self.colors.iter().flatten().map(|&c| c as usize + 1).max().unwrap_or(0)
    }

    /// Colors every uncolored set of size `< theta` inside `domain` that
    /// contains `must`, with distinct colors avoiding those already used
    /// inside `domain`.
    fn fresh(&mut self, level: usize, u: &[usize], a: &[usize]) -> Result<(), Z4Failure> {
        let domain = mask_of(u) | mask_of(a);
        let must = mask_of(a);
        let mut taken = vec![false; self.inst.mu];
        let mut todo = Vec::new();
        for m in canonical_masks(self.inst.l, self.inst.theta) {
            if m & !domain != 0 {
                continue;
            }
            match self.colors[m as usize] {
                Some(c) => taken[c as usize] = true,
                None if m & must == must => todo.push(m),
                None => unreachable!("sets missing a point of A are inherited"),
            }
        }
        let free: Vec<u32> = (0..self.inst.mu as u32).filter(|&c| !taken[c as usize]).collect();
        if free.len() < todo.len() {
            return Err(Z4Failure::PaletteExhausted {
                level,
                u: u.to_vec(),
                a: a.to_vec(),
                needed: todo.len(),
                available: free.len(),
            });
        }
        for (m, c) in todo.into_iter().zip(free) {
            self.colors[m as usize] = Some(c);
        }
        Ok(())
    }

    /// Solves the level-`level` approximation with base `u` and new points `a`:
    /// on return every small subset of `u ∪ a` is colored.
    fn solve(&mut self, level: usize, u: &[usize], a: &[usize]) -> Result<(), Z4Failure> {
        self.calls += 1;
        if level < self.strata.len() && u.len() >= self.strata[level] {
            self.violations.push(StratumViolation {
                level,
                size: u.len(),
                bound: self.strata[level],
            });
        }
        if level == 0 {
            return self.fresh(0, u, a);
        }
        // The initial segment is `a` alone.
        self.fresh(level, &[], a)?;
        for i in 0..u.len() {
            let sigma_len = i + 1 + a.len();
            if sigma_len < self.inst.n {
                let mut pts = a.to_vec();
                pts.push(u[i]);
                self.fresh(level, &u[..i], &pts)?;
            } else {
                let mut a_next = a.to_vec();
                a_next.push(u[i]);
                self.solve(level - 1, &u[..i], &a_next)?;
            }
        }
        Ok(())
    }
}

/// Builds a Pr⁰ coloring by the approximation scheme: level `k` over the whole
/// ground set, splitting off one point at a time and descending a level when
/// the prefix is large enough to carry an n-set, with fresh colors at level 0.
/// `strata[ℓ]` bounds the base size at level ℓ; breaches are recorded, not
/// enforced. The result is always re-verified.
pub fn z4_construct(inst: &PrInstance, strata: &[usize], cap: u64) -> Result<Z4Report> {
    inst.validate()?;
    if inst.variant != Variant::Pr0 {
        return invalid("the amalgamation construction runs on variant 0");
    }
    if inst.n != inst.k + 1 {
        return invalid(format!("construction needs n = k+1, got n={}, k={}", inst.n, inst.k));
    }
    if inst.l > MAX_DENSE_UNIVERSE {
        return invalid(format!("construction needs L <= {MAX_DENSE_UNIVERSE}"));
    }
    if strata.len() != inst.k || strata.windows(2).any(|p| p[0] >= p[1]) {
        return invalid(format!("need {} strictly increasing strata", inst.k));
    }
    if inst.l > strata[inst.k - 1] {
        return invalid(format!(
            "ground size {} exceeds the top stratum {}",
            inst.l,
            strata[inst.k - 1]
        ));
    }
    let mut state = Z4State {
        inst,
        strata,
        colors: vec![None; 1usize << inst.l],
        calls: 0,
        violations: Vec::new(),
    };
    let ground: Vec<usize> = (0..inst.l).collect();
    let outcome = state.solve(inst.k, &ground, &[]);
    let mut report = Z4Report {
        strata: strata.to_vec(),
        coloring: None,
        failure: None,
        palette_used: state.palette_used(),
        calls: state.calls,
        stratum_violations: state.violations,
    };
    if let Err(f) = outcome {
        report.failure = Some(f);
        return Ok(report);
    }
    let colors = &state.colors;
    let g = Coloring::from_fn(inst.l, inst.theta, inst.mu, |m| colors[m as usize].expect("all colored"))?;
    match verify_pr(&g, inst, cap)? {
        PrVerdict::Ok => report.coloring = Some(g),
        PrVerdict::Counterexample(cfg) => report.failure = Some(Z4Failure::Verification(cfg)),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::modular_model;

    #[test]
    fn violation_examples() {
        let g = Coloring::constant(3, 3).unwrap();
        let minimal = EnvelopeConfig::new(
            &[0, 1, 2],
            2,
            vec![(vec![0, 1], vec![0, 1]), (vec![0, 2], vec![0, 2]), (vec![1, 2], vec![1, 2])],
        )
        .unwrap();
        assert!(config_violates(&g, &minimal));
        let distinct = Coloring::from_fn(3, 3, 3, |m| if m.count_ones() == 2 { m.trailing_zeros() + (m >> 2 & 1) as u32 } else { 0 }).unwrap();
        assert!(!config_violates(&distinct, &minimal));
        let g4 = Coloring::constant(4, 4).unwrap();
        let containing = EnvelopeConfig::new(
            &[0, 1, 2],
            2,
            vec![(vec![0, 1], vec![0, 1, 2]), (vec![0, 2], vec![0, 2]), (vec![1, 2], vec![1, 2])],
        )
        .unwrap();
        assert!(!config_violates(&g4, &containing));
    }

    #[test]
    fn constant_coloring_fails_with_minimal_envelopes() {
        let inst = PrInstance::pr0(3, 2, 3, 1, 3).unwrap();
        let g = Coloring::constant(3, 3).unwrap();
        match verify_pr(&g, &inst, DEFAULT_CAP).unwrap() {
            PrVerdict::Counterexample(cfg) => {
                assert_eq!(cfg.w, vec![0, 1, 2]);
                assert!(cfg.envelopes.iter().all(|(v, u)| v == u));
                assert!(config_violates(&g, &cfg));
            }
            PrVerdict::Ok => panic!("constant coloring passed"),
        }
    }

    #[test]
    fn injective_coloring_passes() {
        let masks = canonical_masks(5, 4);
        let inst = PrInstance::pr0(3, 2, 5, masks.len(), 4).unwrap();
        let index: HashMap<u64, u32> = masks.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let g = Coloring::from_fn(5, 4, masks.len(), |m| index[&m]).unwrap();
        assert!(verify_pr(&g, &inst, DEFAULT_CAP).unwrap().is_ok());
    }

    #[test]
    fn empty_host_is_vacuous() {
        let host = Hypergraph::new(4, 2, 3).unwrap();
        let inst = PrInstance::pr1(3, 2, 1, 3, host).unwrap();
        assert!(verify_pr(&Coloring::constant(4, 3).unwrap(), &inst, DEFAULT_CAP).unwrap().is_ok());
    }

    #[test]
    fn cap_is_reported() {
        let inst = PrInstance::pr0(3, 2, 12, 2, 6).unwrap();
        let g = Coloring::hashed(12, 6, 2, 1).unwrap();
        assert!(matches!(verify_pr(&g, &inst, 1000), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn min_colors_small_cases() {
        let r = min_colors(&PrInstance::pr0(3, 2, 3, 1, 3).unwrap(), DEFAULT_CAP).unwrap();
        assert_eq!(r.mu_min, 2);
        let inst = PrInstance::pr0(3, 2, 3, 2, 3).unwrap();
        assert!(verify_pr(&r.witness, &inst, DEFAULT_CAP).unwrap().is_ok());
        assert_eq!(min_colors(&PrInstance::pr0(3, 2, 2, 1, 3).unwrap(), DEFAULT_CAP).unwrap().mu_min, 1);
    }

    #[test]
    fn min_colors_shrinks_with_theta() {
        let mut last = usize::MAX;
        for theta in (3..=5).rev() {
            let mu = min_colors(&PrInstance::pr0(3, 2, 5, 1, theta).unwrap(), DEFAULT_CAP).unwrap().mu_min;
            assert!(mu <= last);
            last = mu;
        }
    }

    #[test]
    fn otp_examples() {
        let constant = Coloring::constant(6, 4).unwrap();
        assert!(otp_equiv(&[0, 1, 2], &[3, 4, 5], &constant).unwrap());
        assert!(otp_equiv(&[1, 4], &[1, 4], &Coloring::hashed(6, 4, 5, 3).unwrap()).unwrap());
        let by_singleton = Coloring::from_fn(6, 4, 7, |m| if m.count_ones() == 1 { m.trailing_zeros() } else { 6 }).unwrap();
        assert!(!otp_equiv(&[0, 1], &[1, 2], &by_singleton).unwrap());
        assert!(otp_equiv(&[0, 1, 2, 3, 4], &[0], &constant).is_err());
    }

    #[test]
    fn compression_of_minimal_envelopes() {
        let cfg = EnvelopeConfig::new(
            &[0, 2, 4],
            2,
            vec![(vec![0, 2], vec![0, 2]), (vec![0, 4], vec![0, 4]), (vec![2, 4], vec![2, 4])],
        )
        .unwrap();
        let c = compress_config(&cfg).unwrap();
        assert_eq!(c.u_star, vec![0, 1]);
        assert_eq!(c.envelopes, cfg.envelopes);
        let uneven = EnvelopeConfig::new(
            &[0, 2, 4],
            2,
            vec![(vec![0, 2], vec![0, 1, 2]), (vec![0, 4], vec![0, 4]), (vec![2, 4], vec![2, 4])],
        )
        .unwrap();
        assert!(compress_config(&uneven).is_err());
    }

    #[test]
    fn lifting_constant_keeps_failure() {
        let g1 = Coloring::constant(5, 6).unwrap();
        let g2 = lift_coloring(&g1, 5, 8).unwrap();
        let inst = PrInstance::pr0(3, 2, 5, 8, 5).unwrap();
        assert!(!verify_pr(&g2, &inst, DEFAULT_CAP).unwrap().is_ok());
        assert!(matches!(lift_coloring(&g1, 7, 8), Err(Error::InvalidInput(_))));
        let injective = Coloring::from_fn(5, 6, 32, |m| m as u32).unwrap();
        assert!(matches!(lift_coloring(&injective, 5, 8), Err(Error::PaletteOverflow { .. })));
    }

    #[test]
    fn z4_generous_palette() {
        let inst = PrInstance::pr0(3, 2, 4, 64, 4).unwrap();
        let report = z4_construct(&inst, &[2, 4], DEFAULT_CAP).unwrap();
        assert!(report.succeeded(), "{:?}", report.failure);
        assert!(verify_pr(report.coloring.as_ref().unwrap(), &inst, DEFAULT_CAP).unwrap().is_ok());
    }

    #[test]
    fn z4_tiny_ground_and_starved_palette() {
        let inst = PrInstance::pr0(3, 2, 2, 8, 3).unwrap();
        assert!(z4_construct(&inst, &[2, 4], DEFAULT_CAP).unwrap().succeeded());
        let starved = PrInstance::pr0(3, 2, 4, 2, 4).unwrap();
        let report = z4_construct(&starved, &[2, 4], DEFAULT_CAP).unwrap();
        assert!(matches!(report.failure, Some(Z4Failure::PaletteExhausted { .. })));
    }

    #[test]
    fn pr0_witness_is_pr1_witness() {
        let r = min_colors(&PrInstance::pr0(3, 2, 5, 1, 4).unwrap(), DEFAULT_CAP).unwrap();
        let host = modular_model(2, 3, 2).unwrap().induced(&[0, 1, 2, 3, 4]).unwrap();
        let inst = PrInstance::pr1(3, 2, r.mu_min, 4, host).unwrap();
        assert!(verify_pr(&r.witness, &inst, DEFAULT_CAP).unwrap().is_ok());
    }

    #[test]
    fn coloring_serialization() {
        let g = Coloring::from_fn(3, 2, 2, |m| m.count_ones() % 2).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"L":3,"theta":2,"mu":2,"entries":[[[],0],[[0],1],[[1],1],[[2],1]]}"#);
        assert_eq!(serde_json::from_str::<Coloring>(&text).unwrap(), g);
        let h = Coloring::hashed(9, 4, 3, 77).unwrap();
        let back: Coloring = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back.color(0b1011), h.color(0b1011));
    }
}

//! Finite m-free (k+1)-uniform hypergraphs.
//!
//! A [`Hypergraph`] on vertices `[0, L)` stores its edges as sorted vertex
//! lists, so symmetry and irreflexivity hold by construction. The m-free
//! condition forbids a complete sub-hypergraph on `m + 1` vertices.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::subset::{normalize, range_subsets, subsets_of_size};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypergraphDoc", into = "HypergraphDoc")]
pub struct Hypergraph {
    vertex_count: usize,
    k: usize,
    m: usize,
    edges: BTreeSet<Vec<usize>>,
}

/// Wire form: `{L, k, m, edges}` with edges sorted lexicographically.
#[derive(Serialize, Deserialize)]
struct HypergraphDoc {
    #[serde(rename = "L")]
    vertex_count: usize,
    k: usize,
    m: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<HypergraphDoc> for Hypergraph {
    type Error = Error;

    fn try_from(doc: HypergraphDoc) -> Result<Self> {
        Hypergraph::from_edges(doc.vertex_count, doc.k, doc.m, doc.edges)
    }
}

impl From<Hypergraph> for HypergraphDoc {
    fn from(h: Hypergraph) -> Self {
        HypergraphDoc {
            vertex_count: h.vertex_count,
            k: h.k,
            m: h.m,
            edges: h.edges.into_iter().collect(),
        }
    }
}

impl Hypergraph {
    /// Empty hypergraph on `[0, vertex_count)` whose edges have `k + 1` vertices
    /// and which forbids complete graphs on `m + 1` vertices.
    pub fn new(vertex_count: usize, k: usize, m: usize) -> Result<Self> {
        if k == 0 {
            return invalid("edge arity k+1 needs k >= 1");
        }
        if m < k {
            return invalid(format!("clique bound m={m} must be at least k={k}"));
        }
        Ok(Hypergraph {
            vertex_count,
            k,
            m,
            edges: BTreeSet::new(),
        })
    }

    pub fn from_edges<I>(vertex_count: usize, k: usize, m: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut h = Hypergraph::new(vertex_count, k, m)?;
        for e in edges {
            h.add_edge(&e)?;
        }
        Ok(h)
    }

    pub fn complete(vertex_count: usize, k: usize, m: usize) -> Result<Self> {
        let edges: Vec<_> = range_subsets(vertex_count, k + 1).collect();
        Hypergraph::from_edges(vertex_count, k, m, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_size(&self) -> usize {
        self.k + 1
    }

    pub fn edges(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn check_vertices(&self, vs: &[usize]) -> Result<()> {
        if let Some(v) = vs.iter().find(|&&v| v >= self.vertex_count) {
            return invalid(format!("vertex {v} outside [0, {})", self.vertex_count));
        }
        Ok(())
    }

    /// Inserts an edge; returns whether it was new.
    pub fn add_edge(&mut self, e: &[usize]) -> Result<bool> {
        let e = normalize(e);
        if e.len() != self.k + 1 {
            return invalid(format!(
                "edge {e:?} must have exactly {} distinct vertices",
                self.k + 1
            ));
        }
        self.check_vertices(&e)?;
        Ok(self.edges.insert(e))
    }

    pub fn remove_edge(&mut self, e: &[usize]) -> bool {
        self.edges.remove(&normalize(e))
    }

    /// Edge membership for any vertex list; lists with repeats are never edges.
    pub fn has_edge(&self, e: &[usize]) -> bool {
        let e = normalize(e);
        e.len() == self.k + 1 && self.edges.contains(&e)
    }

    /// Whether every (k+1)-subset of `w` is an edge.
    pub fn is_complete(&self, w: &[usize]) -> Result<bool> {
        let w = normalize(w);
        self.check_vertices(&w)?;
        if w.len() <= self.k {
            return invalid(format!(
                "completeness needs at least {} vertices, got {}",
                self.k + 1,
                w.len()
            ));
        }
        Ok(self.is_complete_unchecked(&w))
    }

    fn is_complete_unchecked(&self, w: &[usize]) -> bool {
        subsets_of_size(w, self.k + 1).all(|e| self.edges.contains(&e))
    }

    /// The lexicographically first complete (m+1)-subset, if any.
    pub fn forbidden_clique(&self) -> Option<Vec<usize>> {
        let size = self.m + 1;
        if size > self.vertex_count {
            return None;
        }
        // Only vertices lying on some edge can be part of a clique.
        let touched: BTreeSet<usize> = self.edges.iter().flatten().copied().collect();
        let touched: Vec<usize> = touched.into_iter().collect();
        let found = subsets_of_size(&touched, size).find(|w| self.is_complete_unchecked(w));
        found
    }

    pub fn is_m_free(&self) -> bool {
        self.forbidden_clique().is_none()
    }

    /// Whether inserting `e` would complete some (m+1)-subset.
    pub fn edge_completes_forbidden(&self, e: &[usize]) -> bool {
        let e = normalize(e);
        let extra = self.m + 1 - e.len();
        let others: Vec<usize> = (0..self.vertex_count)
            .filter(|v| e.binary_search(v).is_err())
            .collect();
        let hit = subsets_of_size(&others, extra).any(|rest| {
            let mut w = e.clone();
            w.extend(rest);
            w.sort_unstable();
            let complete = subsets_of_size(&w, self.k + 1).all(|f| f == e || self.edges.contains(&f));
            complete
        });
        hit
    }

    /// Restriction to the vertices in `keep`, relabelled to `[0, keep.len())`
    /// in increasing order.
    pub fn induced(&self, keep: &[usize]) -> Result<Hypergraph> {
        let keep = normalize(keep);
        self.check_vertices(&keep)?;
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges = self.edges.iter().filter_map(|e| {
            e.iter()
                .map(|v| index.get(v).copied())
                .collect::<Option<Vec<usize>>>()
        });
        Hypergraph::from_edges(keep.len(), self.k, self.m, edges.collect::<Vec<_>>())
    }
}

/// Separation test of the modular model: some multiple of `n` lies in `(a, b]`
/// (or `(b, a]`), i.e. `a` and `b` sit in different residue blocks.
fn separated(a: usize, b: usize, n: usize) -> bool {
    a / n != b / n
}

/// Edge rule of the modular model on `n * q` vertices.
pub fn modular_edge(tuple: &[usize], n: usize) -> bool {
    tuple.iter().enumerate().all(|(i, &a)| {
        tuple[i + 1..]
            .iter()
            .all(|&b| a % n != b % n && separated(a, b, n))
    })
}

/// The modular model: vertices `[0, n*q)`, an edge on `(a_0, .., a_k)` iff the
/// entries are pairwise distinct mod `n` and pairwise in different blocks
/// `[n*j, n*j + n)`. The result is n-free.
pub fn modular_model(q: usize, n: usize, k: usize) -> Result<Hypergraph> {
    if k < 2 || n <= k {
        return invalid(format!("modular model needs n > k >= 2, got n={n}, k={k}"));
    }
    if q == 0 {
        return invalid("modular model needs q >= 1");
    }
    let vertices = n * q;
    let edges: Vec<_> = range_subsets(vertices, k + 1)
        .filter(|e| modular_edge(e, n))
        .collect();
    Hypergraph::from_edges(vertices, k, n, edges)
}

/// Greedy seeded generator: candidate edges are visited in a shuffled order
/// and kept unless they complete a forbidden (m+1)-configuration.
pub fn random_m_free(
    vertex_count: usize,
    m: usize,
    k: usize,
    edge_budget: usize,
    seed: u64,
) -> Result<Hypergraph> {
    if k < 2 || m <= k {
        return invalid(format!("random_m_free needs m > k >= 2, got m={m}, k={k}"));
    }
    let mut h = Hypergraph::new(vertex_count, k, m)?;
    if edge_budget == 0 {
        return Ok(h);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<usize>> = range_subsets(vertex_count, k + 1).collect();
    candidates.shuffle(&mut rng);
    for e in candidates {
        if h.edge_count() >= edge_budget {
            break;
        }
        if !h.edge_completes_forbidden(&e) {
            h.edges.insert(e);
        }
    }
    Ok(h)
}

/// A literal `R(x, params)` (positive) or `¬R(x, params)` (negative).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedTuple {
    pub params: Vec<usize>,
    pub positive: bool,
}

impl SignedTuple {
    pub fn new(params: &[usize], positive: bool) -> Self {
        SignedTuple {
            params: normalize(params),
            positive,
        }
    }

    pub fn pos(params: &[usize]) -> Self {
        SignedTuple::new(params, true)
    }

    pub fn neg(params: &[usize]) -> Self {
        SignedTuple::new(params, false)
    }
}

/// Identification of parameters that denote the same element. Vertices not
/// listed are their own class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collapse {
    rep: BTreeMap<usize, usize>,
}

impl Collapse {
    pub fn trivial() -> Self {
        Collapse::default()
    }

    /// Builds a partition from explicit classes; each class is represented by
    /// its least element. Classes must be disjoint.
    pub fn from_classes(classes: &[Vec<usize>]) -> Result<Self> {
        let mut rep = BTreeMap::new();
        for class in classes {
            let class = normalize(class);
            let Some(&r) = class.first() else { continue };
            for &v in &class {
                if rep.insert(v, r).is_some() {
                    return invalid(format!("vertex {v} appears in two collapse classes"));
                }
            }
        }
        Ok(Collapse { rep })
    }

    /// Partition of `[0, labels.len())` putting `i`, `j` together iff their
    /// labels agree.
    pub fn from_labels<T: Ord>(labels: &[T]) -> Self {
        let mut first: BTreeMap<&T, usize> = BTreeMap::new();
        let mut rep = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            let r = *first.entry(l).or_insert(i);
            rep.insert(i, r);
        }
        Collapse { rep }
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.rep.get(&v).copied().unwrap_or(v)
    }

    /// Collapsed image as a sorted multiset.
    pub fn image(&self, params: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = params.iter().map(|&v| self.class_of(v)).collect();
        out.sort_unstable();
        out
    }
}

/// A finite set of signed formulas over host vertices, read modulo a collapse.
#[derive(Clone, Debug)]
pub struct PartialRType<'h> {
    pub host: &'h Hypergraph,
    pub formulas: Vec<SignedTuple>,
    pub collapse: Collapse,
}

impl<'h> PartialRType<'h> {
    pub fn new(host: &'h Hypergraph, formulas: Vec<SignedTuple>, collapse: Collapse) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &formulas {
            if f.params.len() != host.k {
                return invalid(format!(
                    "formula {:?} must have {} distinct parameters",
                    f.params, host.k
                ));
            }
            host.check_vertices(&f.params)?;
            if !seen.insert(&f.params) {
                return invalid(format!("two formulas share parameters {:?}", f.params));
            }
        }
        Ok(PartialRType {
            host,
            formulas,
            collapse,
        })
    }
}

/// Why a partial type cannot be realized in the generic m-free structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inconsistency {
    /// Formulas `first` and `second` collapse to the same tuple with opposite signs.
    Collision { first: usize, second: usize },
    /// A positive formula collapses to fewer than k distinct elements.
    Degenerate { formula: usize },
    /// The collapsed classes in `witness` would form, together with the
    /// realizing element, a complete graph on m+1 vertices.
    Edge { witness: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Consistency {
    Consistent,
    Inconsistent(Inconsistency),
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

/// Collapsed host edges among the given classes: a class set is an edge when
/// some host edge maps onto it bijectively.
fn collapsed_edges(host: &Hypergraph, collapse: &Collapse) -> HashSet<Vec<usize>> {
    host.edges
        .iter()
        .filter_map(|e| {
            let img = collapse.image(e);
            let distinct = img.windows(2).all(|p| p[0] != p[1]);
            distinct.then_some(img)
        })
        .collect()
}

/// Decides realizability of `p` over the collapsed parameters in the generic
/// m-free structure. Only two obstructions exist: sign collisions (including
/// degenerate positive tuples) and edge witnesses.
pub fn type_consistent(p: &PartialRType<'_>, m: usize, k: usize) -> Result<Consistency> {
    if p.host.k != k || p.host.m != m {
        return invalid(format!(
            "host has (m, k) = ({}, {}) but ({m}, {k}) was requested",
            p.host.m, p.host.k
        ));
    }
    let images: Vec<Vec<usize>> = p.formulas.iter().map(|f| p.collapse.image(&f.params)).collect();

    for (i, f) in p.formulas.iter().enumerate() {
        let distinct = images[i].windows(2).all(|w| w[0] != w[1]);
        if f.positive && !distinct {
            return Ok(Consistency::Inconsistent(Inconsistency::Degenerate { formula: i }));
        }
    }
    let mut by_image: BTreeMap<&Vec<usize>, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (i, f) in p.formulas.iter().enumerate() {
        let slot = by_image.entry(&images[i]).or_default();
        if f.positive {
            slot.0.get_or_insert(i);
        } else {
            slot.1.get_or_insert(i);
        }
    }
    let collision = by_image
        .values()
        .filter_map(|&(pos, neg)| Some((pos?, neg?)))
        .min_by_key(|&(a, b)| (a.max(b), a.min(b)));
    if let Some((a, b)) = collision {
        return Ok(Consistency::Inconsistent(Inconsistency::Collision {
            first: a.min(b),
            second: a.max(b),
        }));
    }

    let demanded: HashSet<&Vec<usize>> = p
        .formulas
        .iter()
        .zip(&images)
        .filter(|(f, _)| f.positive)
        .map(|(_, img)| img)
        .collect();
    let classes: BTreeSet<usize> = demanded.iter().flat_map(|img| img.iter().copied()).collect();
    let classes: Vec<usize> = classes.into_iter().collect();
    let edges = collapsed_edges(p.host, &p.collapse);
    let witness = subsets_of_size(&classes, m).find(|w| {
        subsets_of_size(w, k).all(|v| demanded.contains(&v))
            && subsets_of_size(w, k + 1).all(|e| edges.contains(&e))
    });
    Ok(match witness {
        Some(witness) => Consistency::Inconsistent(Inconsistency::Edge { witness }),
        None => Consistency::Consistent,
    })
}

/// Compiled consistency test for every subfamily of a fixed formula list
/// (at most 64 formulas), encoded as a bitmask over formula positions.
#[derive(Clone, Debug)]
pub struct ConsistencyProfile {
    degenerate: u64,
    collisions: Vec<u64>,
    /// Each witness is a list of groups; a subfamily is killed by the witness
    /// when it meets every group.
    witnesses: Vec<Vec<u64>>,
}

impl ConsistencyProfile {
    pub fn new(p: &PartialRType<'_>, m: usize, k: usize) -> Result<Self> {
        if p.formulas.len() > 64 {
            return invalid("consistency profiles hold at most 64 formulas");
        }
        if p.host.k != k || p.host.m != m {
            return invalid("host parameters disagree with (m, k)");
        }
        let images: Vec<Vec<usize>> =
            p.formulas.iter().map(|f| p.collapse.image(&f.params)).collect();
        let mut degenerate = 0u64;
        let mut positive_by_image: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        let mut negative_by_image: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for (i, f) in p.formulas.iter().enumerate() {
            let distinct = images[i].windows(2).all(|w| w[0] != w[1]);
            if f.positive && !distinct {
                degenerate |= 1 << i;
            }
            let table = if f.positive {
                &mut positive_by_image
            } else {
                &mut negative_by_image
            };
            *table.entry(images[i].clone()).or_default() |= 1 << i;
        }
        let mut collisions = Vec::new();
        for (img, &pos) in &positive_by_image {
            if let Some(&neg) = negative_by_image.get(img) {
                for a in crate::subset::elements(pos) {
                    for b in crate::subset::elements(neg) {
                        collisions.push((1u64 << a) | (1u64 << b));
                    }
                }
            }
        }
        let classes: BTreeSet<usize> = positive_by_image
            .keys()
            .filter(|img| img.windows(2).all(|w| w[0] != w[1]))
            .flat_map(|img| img.iter().copied())
            .collect();
        let classes: Vec<usize> = classes.into_iter().collect();
        let edges = collapsed_edges(p.host, &p.collapse);
        let mut witnesses = Vec::new();
        for w in subsets_of_size(&classes, m) {
            let groups: Option<Vec<u64>> = subsets_of_size(&w, k)
                .map(|v| positive_by_image.get(&v).copied())
                .collect();
            let Some(groups) = groups else { continue };
            if subsets_of_size(&w, k + 1).all(|e| edges.contains(&e)) {
                witnesses.push(groups);
            }
        }
        Ok(ConsistencyProfile {
            degenerate,
            collisions,
            witnesses,
        })
    }

    pub fn consistent(&self, subfamily: u64) -> bool {
        if subfamily & self.degenerate != 0 {
            return false;
        }
        if self.collisions.iter().any(|&c| c & !subfamily == 0) {
            return false;
        }
        !self
            .witnesses
            .iter()
            .any(|groups| groups.iter().all(|&g| g & subfamily != 0))
    }
}

/// A vertex of `h`, not mentioned in `literals`, whose edges to the tuples of
/// `literals` follow the signs exactly.
pub fn check_extension(h: &Hypergraph, literals: &[SignedTuple]) -> Option<usize> {
    let mentioned: HashSet<usize> = literals.iter().flat_map(|t| t.params.iter().copied()).collect();
    (0..h.vertex_count).find(|x| {
        !mentioned.contains(x)
            && literals.iter().all(|t| {
                let mut e = t.params.clone();
                e.push(*x);
                h.has_edge(&e) == t.positive
            })
    })
}

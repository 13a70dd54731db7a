use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_ATOM_CAP: usize = 1 << 20;

/// Powerset algebra over the total functions `[0, A) -> [0, mu)`. Atom `a`
/// has value `(a / mu^i) % mu` at coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlgebraDoc", into = "AlgebraDoc")]
pub struct PartitionAlgebra {
    index_count: usize,
    mu: usize,
    strides: Vec<usize>,
    atoms: usize,
}

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    #[serde(rename = "A")]
    index_count: usize,
    mu: usize,
}

impl TryFrom<AlgebraDoc> for PartitionAlgebra {
    type Error = Error;

    fn try_from(doc: AlgebraDoc) -> Result<Self> {
        PartitionAlgebra::new(doc.index_count, doc.mu)
    }
}

impl From<PartitionAlgebra> for AlgebraDoc {
    fn from(alg: PartitionAlgebra) -> Self {
        AlgebraDoc {
            index_count: alg.index_count,
            mu: alg.mu,
        }
    }
}

impl PartitionAlgebra {
    pub fn new(index_count: usize, mu: usize) -> Result<Self> {
        Self::with_cap(index_count, mu, DEFAULT_ATOM_CAP)
    }

    pub fn with_cap(index_count: usize, mu: usize, cap: usize) -> Result<Self> {
        if mu == 0 {
            return invalid("an algebra needs at least one part per partition");
        }
        let mut strides = Vec::with_capacity(index_count);
        let mut atoms = 1usize;
        for _ in 0..index_count {
            strides.push(atoms);
            atoms = match atoms.checked_mul(mu) {
                Some(a) if a <= cap => a,
                _ => {
                    return Err(Error::CapExceeded {
                        what: format!("algebra with A={index_count}, mu={mu}"),
                        cap: cap as u64,
                    })
                }
            };
        }
        if atoms > cap {
            return Err(Error::CapExceeded {
                what: format!("algebra with A={index_count}, mu={mu}"),
                cap: cap as u64,
            });
        }
        Ok(PartitionAlgebra {
            index_count,
            mu,
            strides,
            atoms,
        })
    }

    pub fn index_count(&self) -> usize {
        self.index_count
    }

    pub fn parts(&self) -> usize {
        self.mu
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    fn key(&self) -> (usize, usize) {
        (self.index_count, self.mu)
    }

    pub fn value(&self, atom: usize, i: usize) -> usize {
        (atom / self.strides[i]) % self.mu
    }

    pub fn coordinates(&self, atom: usize) -> Vec<usize> {
        (0..self.index_count).map(|i| self.value(atom, i)).collect()
    }

    pub fn atom_of(&self, values: &[usize]) -> Result<usize> {
        if values.len() != self.index_count || values.iter().any(|&v| v >= self.mu) {
            return invalid(format!("{values:?} is not an atom of this algebra"));
        }
        Ok(values.iter().zip(&self.strides).map(|(v, s)| v * s).sum())
    }

    /// Atom that differs from `atom` only at coordinate `i`, where it takes `v`.
    pub fn with_value(&self, atom: usize, i: usize, v: usize) -> usize {
        atom - self.value(atom, i) * self.strides[i] + v * self.strides[i]
    }

    pub fn zero(&self) -> BElement {
        BElement {
            alg: self.key(),
            len: self.atoms,
            bits: vec![0; self.atoms.div_ceil(64)],
        }
    }

    pub fn one(&self) -> BElement {
        let mut e = self.zero();
        for a in 0..self.atoms {
            e.insert(a);
        }
        e
    }

    pub fn atom(&self, a: usize) -> Result<BElement> {
        self.from_atoms([a])
    }

    pub fn from_atoms(&self, atoms: impl IntoIterator<Item = usize>) -> Result<BElement> {
        let mut e = self.zero();
        for a in atoms {
            if a >= self.atoms {
                return invalid(format!("atom {a} out of range"));
            }
            e.insert(a);
        }
        Ok(e)
    }

    pub fn from_fn(&self, mut f: impl FnMut(usize) -> bool) -> BElement {
        let mut e = self.zero();
        for a in 0..self.atoms {
            if f(a) {
                e.insert(a);
            }
        }
        e
    }

    pub fn check_generator(&self, f: &Generator) -> Result<()> {
        for (&i, &v) in &f.map {
            if i >= self.index_count || v >= self.mu {
                return invalid(format!("generator entry {i}->{v} outside the algebra"));
            }
        }
        Ok(())
    }

    /// `x_f`: every atom extending `f`.
    pub fn gen(&self, f: &Generator) -> Result<BElement> {
        self.check_generator(f)?;
        Ok(self.from_fn(|a| self.extends(a, f)))
    }

    pub fn extends(&self, atom: usize, f: &Generator) -> bool {
        f.map.iter().all(|(&i, &v)| self.value(atom, i) == v)
    }

    /// Atoms agreeing with `atom` on `coords`.
    pub fn cylinder(&self, atom: usize, coords: &[usize]) -> BElement {
        self.from_fn(|a| coords.iter().all(|&i| self.value(a, i) == self.value(atom, i)))
    }

    pub fn restrict(&self, atom: usize, coords: &[usize]) -> Generator {
        Generator::from_pairs(coords.iter().map(|&i| (i, self.value(atom, i))))
    }

    fn owns(&self, e: &BElement) -> Result<()> {
        if e.alg != self.key() {
            return Err(Error::MixedAlgebras);
        }
        Ok(())
    }

    /// Nonzero, pairwise disjoint, joining to 1.
    pub fn is_max_antichain(&self, elems: &[BElement]) -> Result<bool> {
        let mut seen = self.zero();
        for e in elems {
            self.owns(e)?;
            if e.is_zero() || !e.meet(&seen)?.is_zero() {
                return Ok(false);
            }
            seen = seen.join(e)?;
        }
        Ok(seen.count() == self.atoms)
    }

    /// Coordinates the element depends on: `i` is essential when flipping the
    /// `i`-th value of some atom moves it across the boundary of `b`.
    pub fn essential_coordinates(&self, b: &BElement) -> Result<Vec<usize>> {
        self.owns(b)?;
        let out = (0..self.index_count)
            .filter(|&i| {
                b.atoms().any(|a| {
                    (0..self.mu).any(|v| !b.contains(self.with_value(a, i, v)))
                })
            })
            .collect();
        Ok(out)
    }
}

/// Finite partial function from partition indices to parts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    map: BTreeMap<usize, usize>,
}

impl Generator {
    pub fn empty() -> Self {
        Generator::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Generator {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.map.get(&i).copied()
    }

    pub fn insert(&mut self, i: usize, v: usize) -> Option<usize> {
        self.map.insert(i, v)
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.keys().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.iter().map(|(&i, &v)| (i, v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn compatible(&self, other: &Generator) -> bool {
        self.map
            .iter()
            .all(|(i, v)| other.map.get(i).is_none_or(|w| w == v))
    }

    pub fn union(&self, other: &Generator) -> Option<Generator> {
        if !self.compatible(other) {
            return None;
        }
        let mut map = self.map.clone();
        map.extend(other.map.iter().map(|(&i, &v)| (i, v)));
        Some(Generator { map })
    }

    pub fn extends(&self, other: &Generator) -> bool {
        other.map.iter().all(|(i, v)| self.map.get(i) == Some(v))
    }
}

/// A set of atoms of one partition algebra, as a dense bit-vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BElement {
    alg: (usize, usize),
    len: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for BElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    #[serde(rename = "A")]
    index_count: usize,
    mu: usize,
    atoms: Vec<usize>,
}

impl Serialize for BElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementDoc {
            index_count: self.alg.0,
            mu: self.alg.1,
            atoms: self.atoms().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ElementDoc::deserialize(d)?;
        let alg = PartitionAlgebra::new(doc.index_count, doc.mu).map_err(serde::de::Error::custom)?;
        alg.from_atoms(doc.atoms).map_err(serde::de::Error::custom)
    }
}

impl BElement {
    fn same(&self, other: &BElement) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::MixedAlgebras);
        }
        Ok(())
    }

    /// `(A, mu)` of the owning algebra.
    pub fn algebra_key(&self) -> (usize, usize) {
        self.alg
    }

    pub fn belongs_to(&self, alg: &PartitionAlgebra) -> bool {
        self.alg == alg.key()
    }

    pub(crate) fn insert(&mut self, a: usize) {
        self.bits[a / 64] |= 1 << (a % 64);
    }

    pub fn contains(&self, a: usize) -> bool {
        a < self.len && self.bits[a / 64] >> (a % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.count() == self.len
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&a| self.contains(a))
    }

    pub fn first_atom(&self) -> Option<usize> {
        self.bits
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn meet(&self, other: &BElement) -> Result<BElement> {
        self.same(other)?;
        let mut out = self.clone();
        out.meet_in(other);
        Ok(out)
    }

    pub fn join(&self, other: &BElement) -> Result<BElement> {
        self.same(other)?;
        let mut out = self.clone();
        for (w, o) in out.bits.iter_mut().zip(&other.bits) {
            *w |= o;
        }
        Ok(out)
    }

    pub fn complement(&self) -> BElement {
        let mut out = self.clone();
        for w in out.bits.iter_mut() {
            *w = !*w;
        }
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = out.bits.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out
    }

    pub fn leq(&self, other: &BElement) -> Result<bool> {
        self.same(other)?;
        Ok(self.leq_unchecked(other))
    }

    pub fn disjoint(&self, other: &BElement) -> Result<bool> {
        self.same(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0))
    }

    pub(crate) fn meet_in(&mut self, other: &BElement) {
        for (w, o) in self.bits.iter_mut().zip(&other.bits) {
            *w &= o;
        }
    }

    pub(crate) fn leq_unchecked(&self, other: &BElement) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

/// `c` decides `b` when it lies below `b` or below its complement.
pub fn decides(c: &BElement, b: &BElement) -> Result<bool> {
    Ok(c.leq(b)? || c.disjoint(b)?)
}

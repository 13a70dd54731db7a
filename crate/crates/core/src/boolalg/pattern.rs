use serde::{Deserialize, Serialize};

use super::algebra::{BElement, PartitionAlgebra};
use crate::error::{invalid, Error, Result};

pub const MAX_LAMBDA: usize = 20;

/// Monotone-decreasing family `s -> b_s` over the subsets of `[0, Λ)`,
/// stored densely by subset mask, with `b_∅ = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonePattern {
    algebra: PartitionAlgebra,
    lambda: usize,
    elements: Vec<BElement>,
}

impl MonotonePattern {
    pub fn new(algebra: PartitionAlgebra, lambda: usize, elements: Vec<BElement>) -> Result<Self> {
        if lambda > MAX_LAMBDA {
            return invalid(format!("patterns support at most {MAX_LAMBDA} coordinates"));
        }
        if elements.len() != 1 << lambda {
            return invalid(format!(
                "expected {} pattern entries, got {}",
                1usize << lambda,
                elements.len()
            ));
        }
        if elements.iter().any(|e| !e.belongs_to(&algebra)) {
            return Err(Error::MixedAlgebras);
        }
        if !elements[0].is_one() {
            return invalid("b_∅ must be 1");
        }
        for s in 0..elements.len() {
            for beta in 0..lambda {
                let t = s | 1 << beta;
                if t != s && !elements[t].leq_unchecked(&elements[s]) {
                    return invalid(format!("b_{t:#b} is not below b_{s:#b}"));
                }
            }
        }
        Ok(MonotonePattern {
            algebra,
            lambda,
            elements,
        })
    }

    pub fn from_fn(
        algebra: PartitionAlgebra,
        lambda: usize,
        mut f: impl FnMut(u64) -> BElement,
    ) -> Result<Self> {
        if lambda > MAX_LAMBDA {
            return invalid(format!("patterns support at most {MAX_LAMBDA} coordinates"));
        }
        let elements = (0..1u64 << lambda).map(&mut f).collect();
        MonotonePattern::new(algebra, lambda, elements)
    }

    pub fn algebra(&self) -> &PartitionAlgebra {
        &self.algebra
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.lambda) - 1
    }

    pub fn get(&self, s: u64) -> &BElement {
        &self.elements[s as usize]
    }

    pub fn elements(&self) -> &[BElement] {
        &self.elements
    }

    /// `{β : a ∈ b_{β}}`.
    pub fn singleton_trace(&self, atom: usize) -> u64 {
        (0..self.lambda)
            .filter(|&b| self.elements[1 << b].contains(atom))
            .fold(0, |m, b| m | 1 << b)
    }

    /// Whether `b_s` is the meet of the singletons of `s` for every `s`.
    pub fn is_multiplicative(&self) -> bool {
        (0..self.elements.len()).all(|s| {
            let mut m = self.algebra.one();
            for b in 0..self.lambda {
                if s >> b & 1 == 1 {
                    m.meet_in(&self.elements[1 << b]);
                }
            }
            m == self.elements[s]
        })
    }

    pub fn is_positive(&self) -> bool {
        !self.elements[self.full_mask() as usize].is_zero()
    }

    pub fn to_doc(&self) -> PatternDoc {
        PatternDoc {
            index_count: self.algebra.index_count(),
            mu: self.algebra.parts(),
            lambda: self.lambda,
            b: self.elements.iter().map(|e| e.atoms().collect()).collect(),
        }
    }
}

/// Text form of a pattern: entry `s` lists the atoms of `b_s` in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternDoc {
    #[serde(rename = "A")]
    pub index_count: usize,
    pub mu: usize,
    pub lambda: usize,
    pub b: Vec<Vec<usize>>,
}

impl TryFrom<PatternDoc> for MonotonePattern {
    type Error = Error;

    fn try_from(doc: PatternDoc) -> Result<Self> {
        let alg = PartitionAlgebra::new(doc.index_count, doc.mu)?;
        let elements = doc
            .b
            .into_iter()
            .map(|atoms| alg.from_atoms(atoms))
            .collect::<Result<Vec<_>>>()?;
        MonotonePattern::new(alg, doc.lambda, elements)
    }
}

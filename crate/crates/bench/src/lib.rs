//! Fixed benchmark instances.

use hyperfree_core::boolalg::F2aPattern;
use hyperfree_core::subset::range_subsets;
use hyperfree_core::{f2a_pattern, modular_model, Flavor, PartitionAlgebra, PrInstance, SetMapping, SetTable};

/// The modular family for q = n = 3, k = 2 with distinct indices and value 1.
pub fn f2a_fixture() -> F2aPattern {
    let family: Vec<Vec<usize>> = modular_model(3, 3, 2).unwrap().edges().cloned().collect();
    let alg = PartitionAlgebra::new(family.len(), 2).unwrap();
    let alpha: Vec<usize> = (0..family.len()).collect();
    f2a_pattern(&alg, &family, 2, &alpha, &vec![1; family.len()]).unwrap()
}

pub fn pr0(l: usize, theta: usize, mu: usize) -> PrInstance {
    PrInstance::pr0(3, 2, l, mu, theta).unwrap()
}

/// Arity-2 standard mapping on `[0, ground)` sending `{x, y}` to the next
/// point after `y` when one exists.
pub fn shift_mapping(ground: usize) -> SetMapping {
    let table: SetTable = range_subsets(ground, 2)
        .map(|x| {
            let img = if x[1] + 1 < ground { vec![x[1] + 1] } else { vec![] };
            (x, img)
        })
        .collect();
    SetMapping::new(ground, 2, Flavor::Standard, 1, table).unwrap()
}

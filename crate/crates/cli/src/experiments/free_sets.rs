use anyhow::Result;
use hyperfree_core::subset::range_subsets;
use hyperfree_core::{Flavor, SetMapping, SetTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{point, show_set, Evaluation, PointSpec};
use crate::config::FreeSetParams;
use crate::report::Check;

pub(super) const HEADER: [&str; 6] = ["L", "arity", "B", "sample", "max_free", "witness"];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    #[serde(rename = "L")]
    ground: usize,
    arity: usize,
    #[serde(rename = "B")]
    bound: usize,
    sample: usize,
    mapping: SetMapping,
}

/// Standard mapping whose images are uniform random subsets of the
/// complement, of uniform size in `0..=bound`.
fn random_mapping(rng: &mut ChaCha8Rng, ground: usize, arity: usize, bound: usize) -> Result<SetMapping> {
    let mut table = SetTable::new();
    for x in range_subsets(ground, arity) {
        let outside: Vec<usize> = (0..ground).filter(|v| !x.contains(v)).collect();
        let size = rng.gen_range(0..=bound.min(outside.len()));
        let img: Vec<usize> = outside.choose_multiple(rng, size).copied().collect();
        table.insert(x, img);
    }
    Ok(SetMapping::new(ground, arity, Flavor::Standard, bound, table)?)
}

pub(super) fn generate(p: &FreeSetParams, seed: u64) -> Result<Vec<PointSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &ground in &p.grounds {
        for &bound in &p.bounds {
            for sample in 0..p.samples {
                let input = Input {
                    ground,
                    arity: p.arity,
                    bound,
                    sample,
                    mapping: random_mapping(&mut rng, ground, p.arity, bound)?,
                };
                out.push(point(format!("L{ground:02}-a{:02}-B{bound:02}-s{sample:03}", p.arity), &input)?);
            }
        }
    }
    Ok(out)
}

pub(super) fn evaluate(input: Input, _cap: u64) -> Result<Evaluation> {
    let f = &input.mapping;
    // subsets of free sets are free, so the first failing size ends the scan
    let mut best = (0, Vec::new());
    for n in 1..=f.ground() {
        match f.find_free(n)? {
            Some(w) => best = (n, w),
            None => break,
        }
    }
    let (max_free, witness) = best;
    let next = if max_free < f.ground() {
        f.find_free(max_free + 1)?.is_some()
    } else {
        false
    };
    let checks = vec![
        Check::new("max_free", max_free),
        Check::new("witness", &witness),
        Check::new("witness_free", f.is_free(&witness)?),
        Check::new("larger_free_exists", next),
    ];
    let rows = vec![vec![
        f.ground().to_string(),
        f.arity().to_string(),
        input.bound.to_string(),
        input.sample.to_string(),
        max_free.to_string(),
        show_set(&witness),
    ]];
    Ok(Evaluation {
        checks,
        rows,
        complete: true,
    })
}

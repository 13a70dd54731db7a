use anyhow::Result;
use hyperfree_core::boolalg::{refinement_violation, Outcome, PatternDoc, SolveReport};
use hyperfree_core::{find_mult_refinement, Generator, Mode, MonotonePattern, PartitionAlgebra};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{point, Evaluation, PointSpec};
use crate::config::FrontierParams;
use crate::report::Check;

pub(super) const HEADER: [&str; 8] = ["A", "mu", "lambda", "sample", "killers", "positive", "min_budget", "nodes"];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    sample: usize,
    /// `(coordinate mask, index, value)`: entries above the mask lose the
    /// cylinder of `index ↦ value`.
    killers: Vec<(u64, usize, usize)>,
    pattern: PatternDoc,
}

fn build(alg: &PartitionAlgebra, lambda: usize, killers: &[(u64, usize, usize)]) -> Result<MonotonePattern> {
    let cut = killers
        .iter()
        .map(|&(mask, i, v)| Ok((mask, alg.gen(&Generator::from_pairs([(i, v)]))?.complement())))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonotonePattern::from_fn(alg.clone(), lambda, |s| {
        cut.iter()
            .filter(|(mask, _)| mask & s == *mask)
            .try_fold(alg.one(), |b, (_, keep)| b.meet(keep))
            .expect("one algebra")
    })?)
}

pub(super) fn generate(p: &FrontierParams, seed: u64) -> Result<Vec<PointSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &[a, mu] in &p.shapes {
        let alg = PartitionAlgebra::new(a, mu)?;
        for &lambda in &p.lambdas {
            for sample in 0..p.samples {
                let count = rng.gen_range(1..=lambda);
                let killers: Vec<(u64, usize, usize)> = (0..count)
                    .map(|_| {
                        let mask = rng.gen_range(1..1u64 << lambda);
                        (mask, rng.gen_range(0..a.max(1)), rng.gen_range(0..mu))
                    })
                    .filter(|_| a > 0)
                    .collect();
                let pattern = build(&alg, lambda, &killers)?.to_doc();
                let input = Input {
                    sample,
                    killers,
                    pattern,
                };
                out.push(point(format!("A{a:02}-mu{mu:02}-l{lambda:02}-s{sample:03}"), &input)?);
            }
        }
    }
    Ok(out)
}

fn label(rep: &SolveReport) -> &'static str {
    match rep.outcome {
        Outcome::Found(_) => "found",
        Outcome::Infeasible => "infeasible",
        Outcome::CapExceeded => "cap",
    }
}

pub(super) fn evaluate(input: Input, cap: u64) -> Result<Evaluation> {
    let p = MonotonePattern::try_from(input.pattern.clone())?;
    let alg = p.algebra().clone();
    let mut complete = true;
    let mut sound = true;
    let mut nodes = 0;
    let mut run = |mode: Mode| -> Result<SolveReport> {
        let rep = find_mult_refinement(&p, &mode, cap)?;
        complete &= rep.outcome != Outcome::CapExceeded;
        if let Some(r) = rep.refinement() {
            sound &= refinement_violation(&p, r, &mode)?.is_none();
        }
        nodes += rep.transcript.nodes;
        Ok(rep)
    };
    let positive = run(Mode::Positive)?;
    let mut budgets = Vec::new();
    for b in 0..=alg.index_count() {
        budgets.push(run(Mode::Budget(b))?);
    }
    let min_budget = budgets.iter().position(|r| r.refinement().is_some());
    let mut checks = vec![Check::new("positive", &positive)];
    for (b, rep) in budgets.iter().enumerate() {
        checks.push(Check::new(format!("budget_{b}"), rep));
    }
    checks.push(Check::new("min_budget", min_budget));
    checks.push(Check::new("found_refinements_valid", sound));
    // a positive refinement exists iff the unrestricted budget finds one
    checks.push(Check::new(
        "positive_matches_full_budget",
        positive.refinement().is_some() == budgets.last().and_then(|r| r.refinement()).is_some(),
    ));
    let rows = vec![vec![
        alg.index_count().to_string(),
        alg.parts().to_string(),
        p.lambda().to_string(),
        input.sample.to_string(),
        input.killers.len().to_string(),
        label(&positive).to_string(),
        min_budget.map_or("-".into(), |b| b.to_string()),
        nodes.to_string(),
    ]];
    Ok(Evaluation {
        checks,
        rows,
        complete,
    })
}

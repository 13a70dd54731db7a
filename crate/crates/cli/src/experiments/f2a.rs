use anyhow::{ensure, Result};
use hyperfree_core::boolalg::{refinement_violation, F2aInputs, Outcome, Possibility};
use hyperfree_core::{check_possibility, find_mult_refinement, modular_model, refinement_support_profile, Mode};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{point, Evaluation, PointSpec};
use crate::config::F2aParams;
use crate::report::Check;

pub(super) const HEADER: [&str; 10] = [
    "q", "|P|", "lambda", "B", "outcome", "nodes", "subclaim", "covered", "possibility", "headline",
];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    q: usize,
    n: usize,
    m: usize,
    budgets: Vec<usize>,
    headline: usize,
    instance: F2aInputs,
}

pub(super) fn generate(p: &F2aParams) -> Result<Vec<PointSpec>> {
    let family: Vec<Vec<usize>> = modular_model(p.q, p.n, p.k)?.edges().cloned().collect();
    let instance = F2aInputs {
        index_count: family.len().max(1),
        mu: p.mu,
        k: p.k,
        alpha: (0..family.len()).collect(),
        g: vec![1; family.len()],
        family,
    };
    // fail at config time when the instance is out of reach
    instance.build()?;
    let input = Input {
        q: p.q,
        n: p.n,
        m: p.k + 1,
        budgets: (0..=p.budget + 1).collect(),
        headline: p.budget,
        instance,
    };
    Ok(vec![point(format!("q{:02}-n{:02}-k{:02}", p.q, p.n, p.k), &input)?])
}

pub(super) fn evaluate(input: Input, cap: u64) -> Result<Evaluation> {
    ensure!(input.budgets.contains(&input.headline), "headline budget is not swept");
    let f = input.instance.build()?;
    let k = input.instance.k;
    let poss = check_possibility(&f.pattern, input.m, k, &f.formulas(), cap)?;
    let poss_label = match &poss.verdict {
        Possibility::Ok => "ok",
        Possibility::Failing { .. } => "failing",
        Possibility::CapExceeded => "cap",
    };
    let mut complete = poss.verdict != Possibility::CapExceeded;
    let mut checks = vec![
        Check::new("coordinates", f.coords.len()),
        Check::new("possibility", &poss),
    ];
    let mut rows = Vec::new();
    let mut headline = Value::Null;
    for &b in &input.budgets {
        let mode = Mode::Budget(b);
        let rep = find_mult_refinement(&f.pattern, &mode, cap)?;
        let (label, detail) = match &rep.outcome {
            Outcome::Found(r) => {
                let valid = refinement_violation(&f.pattern, r, &mode)?.is_none();
                let sup = refinement_support_profile(&f, r)?;
                let covered = sup.covered.iter().all(|&c| c);
                ("found", json!({ "valid": valid, "subclaim": sup.subclaim, "all_covered": covered, "support": sup }))
            }
            Outcome::Infeasible => ("infeasible", Value::Null),
            Outcome::CapExceeded => {
                complete = false;
                ("cap", Value::Null)
            }
        };
        if b == input.headline {
            headline = label.into();
        }
        let flag = |key: &str| detail.get(key).map_or("-".to_string(), Value::to_string);
        rows.push(vec![
            input.q.to_string(),
            f.family.len().to_string(),
            f.coords.len().to_string(),
            b.to_string(),
            label.to_string(),
            rep.transcript.nodes.to_string(),
            flag("subclaim"),
            flag("all_covered"),
            poss_label.to_string(),
            if b == input.headline { "*" } else { "" }.to_string(),
        ]);
        checks.push(Check::new(
            format!("budget_{b}"),
            json!({ "outcome": label, "transcript": rep.transcript, "refinement": rep.refinement(), "detail": detail }),
        ));
    }
    checks.push(Check::new("headline", headline));
    Ok(Evaluation {
        checks,
        rows,
        complete,
    })
}

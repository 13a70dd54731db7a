use anyhow::Result;
use hyperfree_core::{min_colors, verify_pr, z4_construct, PrInstance};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{capped, point, show_set, Evaluation, PointSpec};
use crate::config::Z4Params;
use crate::report::Check;

pub(super) const HEADER: [&str; 9] = [
    "L", "theta", "strata", "z4", "palette", "calls", "violations", "mu_min", "verified",
];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    n: usize,
    k: usize,
    #[serde(rename = "L")]
    ground: usize,
    theta: usize,
    mu: usize,
    strata: Vec<usize>,
    oracle: bool,
}

/// Strata `2, 3, .., k` topped by the ground size.
fn strata_for(k: usize, ground: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (2..=k).collect();
    s.push(ground.max(k + 1));
    s
}

pub(super) fn generate(p: &Z4Params) -> Result<Vec<PointSpec>> {
    let mut out = Vec::new();
    for &ground in &p.grounds {
        let input = Input {
            n: p.k + 1,
            k: p.k,
            ground,
            theta: p.theta,
            mu: p.mu,
            strata: strata_for(p.k, ground),
            oracle: ground <= p.oracle_max_ground,
        };
        PrInstance::pr0(input.n, input.k, ground, p.mu, p.theta)?;
        out.push(point(format!("L{ground:02}"), &input)?);
    }
    Ok(out)
}

pub(super) fn evaluate(input: Input, cap: u64) -> Result<Evaluation> {
    let inst = PrInstance::pr0(input.n, input.k, input.ground, input.mu, input.theta)?;
    let rep = z4_construct(&inst, &input.strata, cap)?;
    let mut complete = true;
    let verified: Value = match &rep.coloring {
        Some(g) => match capped(verify_pr(g, &inst, cap))? {
            Some(v) => v.is_ok().into(),
            None => {
                complete = false;
                "cap_exceeded".into()
            }
        },
        None => Value::Null,
    };
    let mu_min: Value = if input.oracle {
        match capped(min_colors(&inst, cap))? {
            Some(mc) => mc.mu_min.into(),
            None => {
                complete = false;
                "cap_exceeded".into()
            }
        }
    } else {
        Value::Null
    };
    let within_oracle = mu_min
        .as_u64()
        .filter(|_| rep.succeeded())
        .map(|m| rep.palette_used as u64 >= m);
    let checks = vec![
        Check::new("succeeded", rep.succeeded()),
        Check::new("palette_used", rep.palette_used),
        Check::new("calls", rep.calls),
        Check::new("stratum_violations", &rep.stratum_violations),
        Check::new("failure", &rep.failure),
        Check::new("coloring", &rep.coloring),
        Check::new("verified", &verified),
        Check::new("oracle_mu_min", &mu_min),
        Check::new("palette_at_least_oracle", within_oracle),
    ];
    let show = |v: &Value| match v {
        Value::Null => "-".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let rows = vec![vec![
        input.ground.to_string(),
        input.theta.to_string(),
        show_set(&input.strata),
        if rep.succeeded() { "ok" } else { "failed" }.to_string(),
        rep.palette_used.to_string(),
        rep.calls.to_string(),
        rep.stratum_violations.len().to_string(),
        show(&mu_min),
        show(&verified),
    ]];
    Ok(Evaluation {
        checks,
        rows,
        complete,
    })
}

use anyhow::Result;
use hyperfree_core::{min_colors, verify_pr, PrInstance};
use serde::{Deserialize, Serialize};

use super::{capped, point, Evaluation, PointSpec};
use crate::config::PrMinColorsParams;
use crate::report::Check;

pub(super) const HEADER: [&str; 7] = ["n", "k", "L", "theta", "mu_min", "nodes", "verified"];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    n: usize,
    k: usize,
    #[serde(rename = "L")]
    ground: usize,
    theta: usize,
}

pub(super) fn generate(p: &PrMinColorsParams) -> Result<Vec<PointSpec>> {
    let mut out = Vec::new();
    for &ground in &p.grounds {
        for &theta in &p.thetas {
            let input = Input {
                n: p.n,
                k: p.k,
                ground,
                theta,
            };
            PrInstance::pr0(p.n, p.k, ground, 1, theta)?;
            out.push(point(format!("L{ground:02}-t{theta:02}"), &input)?);
        }
    }
    Ok(out)
}

pub(super) fn evaluate(input: Input, cap: u64) -> Result<Evaluation> {
    let inst = PrInstance::pr0(input.n, input.k, input.ground, 1, input.theta)?;
    let base = vec![
        input.n.to_string(),
        input.k.to_string(),
        input.ground.to_string(),
        input.theta.to_string(),
    ];
    let Some(mc) = capped(min_colors(&inst, cap))? else {
        let mut row = base;
        row.extend(["cap".into(), format!(">{cap}"), "-".into()]);
        return Ok(Evaluation {
            checks: vec![Check::new("status", "cap_exceeded")],
            rows: vec![row],
            complete: false,
        });
    };
    let sized = PrInstance::pr0(input.n, input.k, input.ground, mc.mu_min, input.theta)?;
    let verified = match capped(verify_pr(&mc.witness, &sized, cap))? {
        Some(v) => serde_json::to_value(v.is_ok())?,
        None => "cap_exceeded".into(),
    };
    let mut row = base;
    row.extend([mc.mu_min.to_string(), mc.nodes.to_string(), verified.to_string()]);
    Ok(Evaluation {
        checks: vec![
            Check::new("status", "done"),
            Check::new("mu_min", mc.mu_min),
            Check::new("nodes", mc.nodes),
            Check::new("witness", &mc.witness),
            Check::new("witness_verified", &verified),
        ],
        rows: vec![row],
        complete: verified.is_boolean(),
    })
}

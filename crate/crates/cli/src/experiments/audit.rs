use anyhow::Result;
use hyperfree_core::subset::range_subsets;
use hyperfree_core::{modular_model, Hypergraph};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{point, show_set, Evaluation, PointSpec};
use crate::config::AuditParams;
use crate::report::Check;

pub(super) const HEADER: [&str; 9] = [
    "q", "n", "k", "vertices", "edges", "m_free", "tuples", "all_complete", "matches",
];

#[derive(Serialize, Deserialize)]
pub(super) struct Input {
    q: usize,
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
}

pub(super) fn generate(p: &AuditParams) -> Result<Vec<PointSpec>> {
    let mut out = Vec::new();
    for &q in &p.qs {
        for &n in &p.ns {
            let k = n - 1;
            let edges = modular_model(q, n, k)?.edges().cloned().collect();
            out.push(point(format!("q{q:02}-n{n:02}"), &Input { q, n, k, edges })?);
        }
    }
    Ok(out)
}

pub(super) fn evaluate(input: Input, _cap: u64) -> Result<Evaluation> {
    let (q, n, k) = (input.q, input.n, input.k);
    let rebuilt: Vec<Vec<usize>> = modular_model(q, n, k)?.edges().cloned().collect();
    let matches = rebuilt == input.edges;
    let mut checks = vec![
        Check::new("construction_matches", matches),
        Check::new("edge_count", input.edges.len()),
    ];
    let graph = match Hypergraph::from_edges(q * n, k, n, input.edges.clone()) {
        Ok(g) => g,
        Err(e) => {
            checks.push(Check::new("embedded_graph", format!("invalid: {e}")));
            let row = vec![q, n, k, q * n, input.edges.len()]
                .into_iter()
                .map(|v| v.to_string())
                .chain(["invalid".into(), "-".into(), "-".into(), matches.to_string()])
                .collect();
            return Ok(Evaluation {
                checks,
                rows: vec![row],
                complete: true,
            });
        }
    };
    let clique = graph.forbidden_clique();
    // one vertex of residue i from each block in an increasing choice of n blocks
    let mut tuples = 0usize;
    let mut first_incomplete: Option<Vec<usize>> = None;
    for blocks in range_subsets(q, n) {
        let beta: Vec<usize> = blocks.iter().enumerate().map(|(i, &b)| n * b + i).collect();
        tuples += 1;
        if first_incomplete.is_none() && !graph.is_complete(&beta)? {
            first_incomplete = Some(beta);
        }
    }
    let all_complete = first_incomplete.is_none();
    checks.extend([
        Check::new("embedded_graph", "valid"),
        Check::new("m_free", clique.is_none()),
        Check::new("forbidden_clique", &clique),
        Check::new("witness_tuples", tuples),
        Check::new("witness_tuples_complete", all_complete),
        Check::new(
            "first_incomplete",
            first_incomplete.as_deref().map_or(Value::Null, |t| show_set(t).into()),
        ),
    ]);
    let rows = vec![vec![
        q.to_string(),
        n.to_string(),
        k.to_string(),
        (q * n).to_string(),
        graph.edge_count().to_string(),
        clique.is_none().to_string(),
        tuples.to_string(),
        all_complete.to_string(),
        matches.to_string(),
    ]];
    Ok(Evaluation {
        checks,
        rows,
        complete: true,
    })
}

//! Plain-text rendering of answers for the terminal.

use std::fmt::Write;

use marx_core::abstraction::Plan;
use marx_core::checker::WitnessStep;
use marx_core::domain::Domain;
use marx_core::service::{QueryAnswer, Verdict};
use marx_core::Mmdp;

pub fn witness_lines(witness: &[WitnessStep], mmdp: &Mmdp, domain: &Domain) -> Vec<String> {
    witness
        .iter()
        .map(|w| {
            let events = w
                .events
                .iter()
                .map(|e| {
                    format!(
                        "{} by {}",
                        domain.task_name(e.task),
                        domain.agent_ids(e.coalition).join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            let events = if events.is_empty() {
                String::new()
            } else {
                format!("  [{events}]")
            };
            format!(
                "s{} {} -> s{} {}{events}",
                w.src,
                mmdp.state(w.src),
                w.dst,
                mmdp.state(w.dst)
            )
        })
        .collect()
}

pub fn answer_text(answer: &QueryAnswer, mmdp: &Mmdp, domain: &Domain) -> String {
    let mut out = String::new();
    match &answer.verdict {
        Verdict::Feasible { witness } => {
            writeln!(out, "FEASIBLE").unwrap();
            writeln!(out, "query:   {}", answer.query.render(domain)).unwrap();
            writeln!(out, "formula: {}", answer.query.to_pctl(domain)).unwrap();
            writeln!(out, "witness:").unwrap();
            for line in witness_lines(witness, mmdp, domain) {
                writeln!(out, "  {line}").unwrap();
            }
        }
        Verdict::Infeasible { report } => {
            writeln!(out, "INFEASIBLE").unwrap();
            writeln!(out, "query:   {}", answer.query.render(domain)).unwrap();
            for (n, failure) in report.failures.iter().enumerate() {
                writeln!(
                    out,
                    "failure {}: item {} ({}) of {}",
                    n + 1,
                    failure.index + 1,
                    marx_core::TemporalQuery::new(vec![failure.item]).render(domain),
                    failure.query.render(domain)
                )
                .unwrap();
                for clause in &failure.clauses {
                    writeln!(out, "  {}", clause.text).unwrap();
                }
            }
            let status = if report.final_feasible {
                "feasible"
            } else {
                "still infeasible"
            };
            writeln!(
                out,
                "suggested query: {} ({status})",
                report.final_query.render(domain)
            )
            .unwrap();
        }
    }
    if let Some(r) = &answer.rollout {
        writeln!(
            out,
            "rollouts: {} ({} steps, {} new states, {} new transitions)",
            r.rollouts, r.env_steps, r.new_states, r.new_transitions
        )
        .unwrap();
    }
    let t = &answer.timings;
    writeln!(
        out,
        "mmdp: {} states, {} transitions; check {:.1} ms, rollout {:.1} ms, explain {:.1} ms",
        answer.mmdp_stats.num_states,
        answer.mmdp_stats.num_transitions,
        t.check_ms,
        t.rollout_ms,
        t.explain_ms
    )
    .unwrap();
    out
}

pub fn plan_document(plan: &Plan, domain: &Domain) -> serde_json::Value {
    let columns: Vec<Vec<serde_json::Value>> = plan
        .columns
        .iter()
        .map(|column| {
            column
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "task": domain.task_name(e.task),
                        "coalition": domain.agent_ids(e.coalition),
                    })
                })
                .collect()
        })
        .collect();
    serde_json::json!({ "columns": columns, "table": plan.render_table(domain) })
}

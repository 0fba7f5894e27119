use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{AbstractionError, Mmdp};
use crate::coalition::CompletionEvent;
use crate::domain::Domain;

/// High-level plan: columns of completion events in execution order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub columns: Vec<Vec<CompletionEvent>>,
}

impl Plan {
    /// One row per agent, one column per step of the plan; a cell names the
    /// task the agent helps complete there.
    pub fn render_table(&self, domain: &Domain) -> String {
        let header: Vec<String> = (1..=self.columns.len()).map(|c| c.to_string()).collect();
        let mut rows = vec![std::iter::once(String::new())
            .chain(header)
            .collect::<Vec<_>>()];
        for (agent, name) in domain.agents.iter().enumerate() {
            let mut row = vec![name.display.clone()];
            for column in &self.columns {
                let cell = column
                    .iter()
                    .filter(|e| e.coalition.contains(agent))
                    .map(|e| domain.task_name(e.task))
                    .collect::<Vec<_>>()
                    .join("+");
                row.push(if cell.is_empty() { "-".into() } else { cell });
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        rows.iter()
            .map(|r| {
                r.iter()
                    .zip(&widths)
                    .map(|(cell, w)| format!("{cell:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Extracts one witness execution: from the initial state, repeatedly take
/// the most frequent outgoing non-self-loop edge (ties go to the smaller
/// target id) among edges that can still reach an all-complete state.
pub fn summarize_plan(mmdp: &Mmdp) -> Result<Plan, AbstractionError> {
    let graph = mmdp.support_graph();
    let n = mmdp.num_states();

    // Backward reachability from complete states.
    let mut preds = vec![Vec::new(); n];
    for edge in graph.iter().flatten() {
        preds[edge.dst].push(edge.src);
    }
    let mut useful = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| mmdp.state(s).is_complete()).collect();
    for &s in &queue {
        useful[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !useful[p] {
                useful[p] = true;
                queue.push_back(p);
            }
        }
    }
    if !useful[mmdp.initial()] {
        return Err(AbstractionError::NoCompletePath);
    }

    let mut columns = Vec::new();
    let mut current = mmdp.initial();
    while !mmdp.state(current).is_complete() {
        let edge = graph[current]
            .iter()
            .filter(|e| useful[e.dst])
            // most frequent, then smallest id
            .min_by_key(|e| (std::cmp::Reverse(e.count), e.dst))
            .expect("useful state has a useful successor");
        columns.push(edge.events.clone());
        current = edge.dst;
    }
    Ok(Plan { columns })
}

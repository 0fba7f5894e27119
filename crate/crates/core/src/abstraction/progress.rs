use std::fmt;

use super::AbstractionError;
use crate::coalition::{AgentId, Coalition, CompletionEvent, TaskId};

/// Who has completed what: an N x |G| Boolean matrix stored as a flat bit
/// vector, bit `agent * |G| + task`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgressMatrix {
    num_agents: usize,
    num_tasks: usize,
    bits: u64,
}

impl ProgressMatrix {
    pub fn empty(num_agents: usize, num_tasks: usize) -> Self {
        assert!(
            num_agents * num_tasks <= 64,
            "progress matrix exceeds 64 bits"
        );
        ProgressMatrix {
            num_agents,
            num_tasks,
            bits: 0,
        }
    }

    pub fn from_bits(num_agents: usize, num_tasks: usize, bits: u64) -> Self {
        let mut m = Self::empty(num_agents, num_tasks);
        let width = m.num_vars();
        assert!(
            width == 64 || bits >> width == 0,
            "bits beyond matrix width"
        );
        m.bits = bits;
        m
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    /// Number of Boolean variables, N x |G|.
    pub fn num_vars(&self) -> usize {
        self.num_agents * self.num_tasks
    }

    pub fn var_index(&self, agent: AgentId, task: TaskId) -> usize {
        agent * self.num_tasks + task
    }

    /// Flat encoding used by the Boolean minimizer.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, agent: AgentId, task: TaskId) -> bool {
        self.bits & (1 << self.var_index(agent, task)) != 0
    }

    pub fn set(&mut self, agent: AgentId, task: TaskId) {
        self.bits |= 1 << self.var_index(agent, task);
    }

    /// Agents whose bit for `task` is set.
    pub fn task_coalition(&self, task: TaskId) -> Coalition {
        (0..self.num_agents)
            .filter(|&a| self.get(a, task))
            .collect()
    }

    pub fn task_done(&self, task: TaskId) -> bool {
        !self.task_coalition(task).is_empty()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.num_tasks).all(|t| self.task_done(t))
    }

    pub fn is_subset_of(&self, other: &ProgressMatrix) -> bool {
        self.bits & !other.bits == 0
    }

    /// The matrix after `events`. Every event must set only fresh bits.
    pub fn after(&self, events: &[CompletionEvent]) -> Result<ProgressMatrix, AbstractionError> {
        let mut next = *self;
        for e in events {
            if e.task >= self.num_tasks || e.coalition.max_agent() >= Some(self.num_agents) {
                return Err(AbstractionError::InconsistentEvent(format!(
                    "event {e:?} outside a {}x{} matrix",
                    self.num_agents, self.num_tasks
                )));
            }
            for agent in e.coalition.iter() {
                if next.get(agent, e.task) {
                    return Err(AbstractionError::InconsistentEvent(format!(
                        "agent {agent} already completed task {}",
                        e.task
                    )));
                }
                next.set(agent, e.task);
            }
        }
        Ok(next)
    }

    /// Parses the `(000,100,100)` form produced by `Display`.
    pub fn parse(text: &str, num_agents: usize, num_tasks: usize) -> Option<Self> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        let rows: Vec<&str> = inner.split(',').map(str::trim).collect();
        if rows.len() != num_agents {
            return None;
        }
        let mut m = Self::empty(num_agents, num_tasks);
        for (agent, row) in rows.iter().enumerate() {
            if row.len() != num_tasks {
                return None;
            }
            for (task, c) in row.chars().enumerate() {
                match c {
                    '1' => m.set(agent, task),
                    '0' => {}
                    _ => return None,
                }
            }
        }
        Some(m)
    }
}

impl fmt::Display for ProgressMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for agent in 0..self.num_agents {
            if agent > 0 {
                f.write_str(",")?;
            }
            for task in 0..self.num_tasks {
                f.write_str(if self.get(agent, task) { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ProgressMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Completion events separating two progress matrices: one event per task
/// whose bits changed, with the agents whose bits flipped.
pub fn events_of(
    source: &ProgressMatrix,
    target: &ProgressMatrix,
) -> Result<Vec<CompletionEvent>, AbstractionError> {
    if source.num_agents != target.num_agents || source.num_tasks != target.num_tasks {
        return Err(AbstractionError::Invalid(
            "progress matrices of different shapes".into(),
        ));
    }
    if !source.is_subset_of(target) {
        return Err(AbstractionError::NonMonotone {
            from: source.to_string(),
            to: target.to_string(),
        });
    }
    let added = ProgressMatrix {
        bits: target.bits & !source.bits,
        ..*source
    };
    Ok((0..source.num_tasks)
        .filter_map(|task| {
            let c = added.task_coalition(task);
            (!c.is_empty()).then(|| CompletionEvent::new(task, c))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> ProgressMatrix {
        ProgressMatrix::parse(text, 3, 3).unwrap()
    }

    fn c(agents: &[usize]) -> Coalition {
        agents.iter().copied().collect()
    }

    #[test]
    fn sr3_chain_labels() {
        let s0 = m("(000,000,000)");
        let s1 = m("(000,100,100)");
        let s2 = m("(010,110,100)");
        assert_eq!(
            events_of(&s0, &s1).unwrap(),
            vec![CompletionEvent::new(0, c(&[1, 2]))]
        );
        assert_eq!(
            events_of(&s1, &s2).unwrap(),
            vec![CompletionEvent::new(1, c(&[0, 1]))]
        );
        assert!(events_of(&s2, &s2).unwrap().is_empty());
    }

    #[test]
    fn non_monotone_rejected() {
        let err = events_of(&m("(010,110,100)"), &m("(000,100,100)")).unwrap_err();
        assert!(matches!(err, AbstractionError::NonMonotone { .. }));
    }

    #[test]
    fn display_parse_round_trip() {
        let s = m("(011,110,101)");
        assert_eq!(s.to_string(), "(011,110,101)");
        assert_eq!(s.var_index(2, 1), 7);
        assert!(s.get(2, 2) && !s.get(2, 1));
        assert!(ProgressMatrix::parse("(01,110,101)", 3, 3).is_none());
        assert!(ProgressMatrix::parse("(000,000)", 3, 3).is_none());
    }

    #[test]
    fn after_rejects_repeat_completion() {
        let s1 = m("(000,100,100)");
        assert!(s1.after(&[CompletionEvent::new(0, c(&[1]))]).is_err());
        let s2 = s1.after(&[CompletionEvent::new(1, c(&[0, 1]))]).unwrap();
        assert_eq!(s2, m("(010,110,100)"));
    }
}

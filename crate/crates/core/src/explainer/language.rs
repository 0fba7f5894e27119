//! Sentence templates for explanation clauses.
//!
//! Rendering is a pure function of the clause payload and the [`Domain`],
//! so a stored payload can always be re-rendered to the same text.

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, TaskId};
use crate::domain::Domain;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum ClauseKind {
    /// `task` (by `coalition`) has to happen before `before_task`.
    #[serde(rename_all = "camelCase")]
    Precedence {
        task: TaskId,
        coalition: Coalition,
        before_task: TaskId,
    },
    /// The queried coalition for `task` is not the one that completes it.
    #[serde(rename_all = "camelCase")]
    Coalition {
        task: TaskId,
        queried_coalition: Coalition,
        required_coalition: Coalition,
    },
    /// No sampled execution completes `task` at all.
    NeverObserved { task: TaskId },
    /// `task` is completed in some execution, but never once `after_task`
    /// (and everything queried before it) has been done.
    #[serde(rename_all = "camelCase")]
    NeverAfter { task: TaskId, after_task: TaskId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationClause {
    #[serde(flatten)]
    pub kind: ClauseKind,
    pub text: String,
}

impl ExplanationClause {
    pub fn new(kind: ClauseKind, domain: &Domain) -> Self {
        let text = render(&kind, domain);
        ExplanationClause { kind, text }
    }

    /// Payload with task and agent indices replaced by their identifiers.
    pub fn named_payload(&self, domain: &Domain) -> serde_json::Value {
        use serde_json::json;
        let task = |t: TaskId| domain.task_name(t).to_string();
        let agents = |c: Coalition| domain.agent_ids(c);
        match self.kind {
            ClauseKind::Precedence {
                task: t,
                coalition,
                before_task,
            } => json!({
                "task": task(t),
                "coalition": agents(coalition),
                "beforeTask": task(before_task),
            }),
            ClauseKind::Coalition {
                task: t,
                queried_coalition,
                required_coalition,
            } => json!({
                "task": task(t),
                "queriedCoalition": agents(queried_coalition),
                "requiredCoalition": agents(required_coalition),
            }),
            ClauseKind::NeverObserved { task: t } => json!({ "task": task(t) }),
            ClauseKind::NeverAfter {
                task: t,
                after_task,
            } => json!({ "task": task(t), "afterTask": task(after_task) }),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ClauseKind::Precedence { .. } => "Precedence",
            ClauseKind::Coalition { .. } => "Coalition",
            ClauseKind::NeverObserved { .. } => "NeverObserved",
            ClauseKind::NeverAfter { .. } => "NeverAfter",
        }
    }
}

fn capitalized(noun: &str) -> String {
    let mut chars = noun.chars();
    match chars.next() {
        Some(first) => format!("The {}{}", first.to_lowercase(), chars.as_str()),
        None => "The agents".to_string(),
    }
}

pub fn render(kind: &ClauseKind, domain: &Domain) -> String {
    let subject = capitalized(&domain.agent_noun);
    match *kind {
        ClauseKind::Precedence {
            task, before_task, ..
        } => format!(
            "{subject} cannot {} because {} must be completed before {}.",
            domain.verb(before_task),
            domain.gerund(task),
            domain.gerund(before_task)
        ),
        ClauseKind::Coalition {
            task,
            queried_coalition: queried,
            required_coalition: required,
        } => {
            let verb = domain.verb(task);
            let extra = required.difference(queried);
            let surplus = queried.difference(required);
            let reason = if surplus.is_empty() {
                let need = if queried.len() == 1 { "needs" } else { "need" };
                format!(
                    "{} {need} {} to help {verb}",
                    domain.display_list(queried),
                    domain.display_list(extra)
                )
            } else if extra.is_empty() {
                format!(
                    "{} must {verb} without {}",
                    domain.display_list(required),
                    domain.display_list(surplus)
                )
            } else {
                format!(
                    "{} requires {}",
                    domain.gerund(task),
                    domain.display_list(required)
                )
            };
            format!("{subject} cannot {verb} because {reason}.")
        }
        ClauseKind::NeverObserved { task } => format!(
            "{subject} never {} in any observed execution.",
            domain.verb(task)
        ),
        ClauseKind::NeverAfter { task, after_task } => format!(
            "{subject} never {} after {} in any observed execution.",
            domain.verb(task),
            domain.gerund(after_task)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(agents: &[usize]) -> Coalition {
        agents.iter().copied().collect()
    }

    #[test]
    fn worked_sentences() {
        let d = fixtures::sr3_config().domain();
        let precedence = ClauseKind::Precedence {
            task: 0,
            coalition: c(&[1, 2]),
            before_task: 1,
        };
        assert_eq!(
            render(&precedence, &d),
            "The robots cannot remove the obstacle because fighting the fire must be completed before removing the obstacle."
        );
        let coalition = ClauseKind::Coalition {
            task: 2,
            queried_coalition: c(&[0]),
            required_coalition: c(&[0, 2]),
        };
        assert_eq!(
            render(&coalition, &d),
            "The robots cannot rescue the victim because Robot I needs Robot III to help rescue the victim."
        );
    }

    #[test]
    fn coalition_variants() {
        let d = fixtures::sr3_config().domain();
        let smaller = ClauseKind::Coalition {
            task: 2,
            queried_coalition: c(&[0, 1, 2]),
            required_coalition: c(&[0, 2]),
        };
        assert_eq!(
            render(&smaller, &d),
            "The robots cannot rescue the victim because Robot I and Robot III must rescue the victim without Robot II."
        );
        let swapped = ClauseKind::Coalition {
            task: 0,
            queried_coalition: c(&[0]),
            required_coalition: c(&[1, 2]),
        };
        assert_eq!(
            render(&swapped, &d),
            "The robots cannot fight the fire because fighting the fire requires Robot II and Robot III."
        );
        let plural = ClauseKind::Coalition {
            task: 0,
            queried_coalition: c(&[0, 1]),
            required_coalition: c(&[0, 1, 2]),
        };
        assert!(render(&plural, &d).contains("Robot I and Robot II need Robot III"));
    }

    #[test]
    fn never_sentences() {
        let d = fixtures::sr3_config().domain();
        assert_eq!(
            render(&ClauseKind::NeverObserved { task: 2 }, &d),
            "The robots never rescue the victim in any observed execution."
        );
        assert_eq!(
            render(
                &ClauseKind::NeverAfter {
                    task: 0,
                    after_task: 1
                },
                &d
            ),
            "The robots never fight the fire after removing the obstacle in any observed execution."
        );
    }

    #[test]
    fn clause_serializes_with_kind_and_payload() {
        let d = fixtures::sr3_config().domain();
        let clause = ExplanationClause::new(ClauseKind::NeverObserved { task: 1 }, &d);
        let v = serde_json::to_value(&clause).unwrap();
        assert_eq!(v["kind"], "NeverObserved");
        assert_eq!(v["payload"]["task"], 1);
        let back: ExplanationClause = serde_json::from_value(v).unwrap();
        assert_eq!(back, clause);
        assert_eq!(clause.named_payload(&d)["task"], "obstacle");
    }
}

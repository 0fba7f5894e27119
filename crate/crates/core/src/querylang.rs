//! Temporal user queries: an ordered list of tasks, each with the exact
//! coalition expected to complete it.
//!
//! Text form:
//!
//! ```text
//! query := item ( "->" item )*
//! item  := taskName ":" agent ( "," agent )*
//! ```
//!
//! Whitespace is ignored between tokens; empty input is the empty query.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{AgentId, Coalition, TaskId};
use crate::domain::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryItem {
    pub task: TaskId,
    pub coalition: Coalition,
}

impl QueryItem {
    pub fn new(task: TaskId, coalition: Coalition) -> Self {
        QueryItem { task, coalition }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalQuery {
    pub items: Vec<QueryItem>,
}

impl TemporalQuery {
    pub fn new(items: Vec<QueryItem>) -> Self {
        TemporalQuery { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn position_of(&self, task: TaskId) -> Option<usize> {
        self.items.iter().position(|i| i.task == task)
    }

    /// Canonical text form; parses back to the same query.
    pub fn render(&self, domain: &Domain) -> String {
        self.items
            .iter()
            .map(|item| {
                format!(
                    "{}:{}",
                    domain.task_name(item.task),
                    domain.agent_ids(item.coalition).join(",")
                )
            })
            .collect::<Vec<_>>()
            .join(" -> ")
    }

    /// The sequencing formula `P>0 [ F (t1 & F (t2 & ...)) ]`.
    pub fn to_pctl(&self, domain: &Domain) -> String {
        if self.items.is_empty() {
            return "P>0 [ true ]".to_string();
        }
        let mut body = String::new();
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                body.push_str(" & ");
            }
            body.push_str("F (");
            body.push_str(&domain.atom(item.task, item.coalition));
        }
        body.push_str(&")".repeat(self.items.len()));
        format!("P>0 [ {body} ]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown task '{name}' at byte {offset}")]
    UnknownTask { name: String, offset: usize },
    #[error("unknown agent '{name}' at byte {offset}")]
    UnknownAgent { name: String, offset: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    DuplicateTask { task: TaskId },
    EmptyCoalition { index: usize },
    AgentOutOfRange { index: usize, agent: AgentId },
    TaskOutOfRange { index: usize, task: TaskId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    Colon,
    Comma,
    Arrow,
}

fn tokenize(text: &str) -> Result<Vec<(Token<'_>, usize)>, QueryError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b':' => {
                tokens.push((Token::Colon, i));
                i += 1;
            }
            b',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                tokens.push((Token::Arrow, i));
                i += 2;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(&text[start..i]), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(QueryError::Parse {
                    offset: i,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        }
    }
    Ok(tokens)
}

struct RawItem<'a> {
    task: (&'a str, usize),
    agents: Vec<(&'a str, usize)>,
}

fn parse_syntax(text: &str) -> Result<Vec<RawItem<'_>>, QueryError> {
    let tokens = tokenize(text)?;
    let mut items = Vec::new();
    if tokens.is_empty() {
        return Ok(items);
    }
    let mut pos = 0;
    let describe = |t: Option<&(Token, usize)>| match t {
        None => "end of input".to_string(),
        Some((Token::Ident(s), _)) => format!("'{s}'"),
        Some((Token::Colon, _)) => "':'".into(),
        Some((Token::Comma, _)) => "','".into(),
        Some((Token::Arrow, _)) => "'->'".into(),
    };
    let err_at = |pos: usize, expected: &str| {
        let t = tokens.get(pos);
        QueryError::Parse {
            offset: t.map_or(text.len(), |t| t.1),
            message: format!("expected {expected}, found {}", describe(t)),
        }
    };
    loop {
        let task = match tokens.get(pos) {
            Some(&(Token::Ident(s), off)) => (s, off),
            _ => return Err(err_at(pos, "a task name")),
        };
        pos += 1;
        if !matches!(tokens.get(pos), Some((Token::Colon, _))) {
            return Err(err_at(pos, "':'"));
        }
        pos += 1;
        let mut agents = Vec::new();
        loop {
            match tokens.get(pos) {
                Some(&(Token::Ident(s), off)) => agents.push((s, off)),
                _ => return Err(err_at(pos, "an agent name")),
            }
            pos += 1;
            if matches!(tokens.get(pos), Some((Token::Comma, _))) {
                pos += 1;
            } else {
                break;
            }
        }
        items.push(RawItem { task, agents });
        match tokens.get(pos) {
            None => return Ok(items),
            Some((Token::Arrow, _)) => pos += 1,
            _ => return Err(err_at(pos, "'->' or end of input")),
        }
    }
}

/// Parses query text and resolves names against `domain`. Syntax errors are
/// reported before name errors.
pub fn parse_query(text: &str, domain: &Domain) -> Result<TemporalQuery, QueryError> {
    let raw = parse_syntax(text)?;
    let mut items = Vec::with_capacity(raw.len());
    for item in raw {
        let (name, offset) = item.task;
        let task = domain
            .task_index(name)
            .ok_or_else(|| QueryError::UnknownTask {
                name: name.to_string(),
                offset,
            })?;
        let mut coalition = Coalition::EMPTY;
        for (agent, offset) in item.agents {
            let a = domain
                .agent_index(agent)
                .ok_or_else(|| QueryError::UnknownAgent {
                    name: agent.to_string(),
                    offset,
                })?;
            coalition.insert(a);
        }
        items.push(QueryItem { task, coalition });
    }
    Ok(TemporalQuery { items })
}

/// Structural problems with a query; an empty list means the query is valid.
pub fn validate(query: &TemporalQuery, domain: &Domain) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (index, item) in query.items.iter().enumerate() {
        if item.task >= domain.num_tasks() {
            out.push(Violation::TaskOutOfRange {
                index,
                task: item.task,
            });
        } else if !seen.insert(item.task) {
            out.push(Violation::DuplicateTask { task: item.task });
        }
        if item.coalition.is_empty() {
            out.push(Violation::EmptyCoalition { index });
        }
        for agent in item.coalition.iter().filter(|&a| a >= domain.num_agents()) {
            out.push(Violation::AgentOutOfRange { index, agent });
        }
    }
    out
}

impl Violation {
    pub fn describe(&self, domain: &Domain) -> String {
        match self {
            Violation::DuplicateTask { task } => {
                format!("task '{}' appears more than once", domain.task_name(*task))
            }
            Violation::EmptyCoalition { index } => format!("item {} has no agents", index + 1),
            Violation::AgentOutOfRange { index, agent } => {
                format!("item {} names agent index {agent} out of range", index + 1)
            }
            Violation::TaskOutOfRange { index, task } => {
                format!("item {} names task index {task} out of range", index + 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn sr3() -> Domain {
        fixtures::sr3_config().domain()
    }

    fn c(agents: &[usize]) -> Coalition {
        agents.iter().copied().collect()
    }

    #[test]
    fn parses_example_query() {
        let q = parse_query("obstacle:r1,r2 -> fire:r2", &sr3()).unwrap();
        assert_eq!(
            q.items,
            vec![QueryItem::new(1, c(&[0, 1])), QueryItem::new(0, c(&[1]))]
        );
    }

    #[test]
    fn whitespace_insensitive_and_empty() {
        let d = sr3();
        assert_eq!(
            parse_query("  obstacle : r1 , r2->fire:r2 ", &d).unwrap(),
            parse_query("obstacle:r1,r2 -> fire:r2", &d).unwrap()
        );
        assert!(parse_query("", &d).unwrap().is_empty());
        assert!(parse_query(" \n ", &d).unwrap().is_empty());
    }

    #[test]
    fn name_errors() {
        let d = sr3();
        assert_eq!(
            parse_query("fire:r9", &d),
            Err(QueryError::UnknownAgent {
                name: "r9".into(),
                offset: 5
            })
        );
        assert!(matches!(
            parse_query("flood:r1", &d),
            Err(QueryError::UnknownTask { offset: 0, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let d = sr3();
        assert!(matches!(
            parse_query("fire:r1,fire:r2", &d),
            Err(QueryError::Parse { offset: 12, .. })
        ));
        assert!(matches!(
            parse_query("fire:", &d),
            Err(QueryError::Parse { offset: 5, .. })
        ));
        assert!(matches!(
            parse_query("fire:r1 ->", &d),
            Err(QueryError::Parse { offset: 10, .. })
        ));
        assert!(matches!(
            parse_query("fire r1", &d),
            Err(QueryError::Parse { offset: 5, .. })
        ));
        assert!(matches!(
            parse_query("fire:r1 > victim:r2", &d),
            Err(QueryError::Parse { offset: 8, .. })
        ));
    }

    #[test]
    fn validation() {
        let d = sr3();
        let dup = TemporalQuery::new(vec![QueryItem::new(0, c(&[1])), QueryItem::new(0, c(&[2]))]);
        assert_eq!(
            validate(&dup, &d),
            vec![Violation::DuplicateTask { task: 0 }]
        );
        let ok = parse_query("fire:r2,r3 -> victim:r1,r3", &d).unwrap();
        assert!(validate(&ok, &d).is_empty());
        let empty = TemporalQuery::new(vec![QueryItem::new(0, Coalition::EMPTY)]);
        assert_eq!(
            validate(&empty, &d),
            vec![Violation::EmptyCoalition { index: 0 }]
        );
        let far = TemporalQuery::new(vec![QueryItem::new(0, c(&[5]))]);
        assert_eq!(
            validate(&far, &d),
            vec![Violation::AgentOutOfRange { index: 0, agent: 5 }]
        );
    }

    #[test]
    fn pctl_rendering() {
        let d = sr3();
        let q = parse_query("fire:r2,r3 -> victim:r1,r3", &d).unwrap();
        assert_eq!(
            q.to_pctl(&d),
            "P>0 [ F (fire_robotII_robotIII & F (victim_robotI_robotIII)) ]"
        );
        assert_eq!(TemporalQuery::default().to_pctl(&d), "P>0 [ true ]");
        let single = parse_query("obstacle:r1,r2", &d).unwrap();
        let text = single.to_pctl(&d);
        assert_eq!(text, "P>0 [ F (obstacle_robotI_robotII) ]");
        // the single atom re-parses as the same item
        let atom = text.trim_start_matches("P>0 [ F (").trim_end_matches(") ]");
        let (task, agents) = atom.split_once('_').unwrap();
        let ids: Vec<String> = agents
            .split('_')
            .map(|a| d.agents.iter().find(|n| n.atom == a).unwrap().id.clone())
            .collect();
        let reparsed = parse_query(&format!("{task}:{}", ids.join(",")), &d).unwrap();
        assert_eq!(reparsed, single);
    }

    fn arb_query() -> impl Strategy<Value = TemporalQuery> {
        // distinct tasks from a 3-task, 3-agent domain
        (
            Just([0usize, 1, 2]).prop_shuffle(),
            0usize..=3,
            prop::collection::vec(1u64..8, 3),
        )
            .prop_map(|(order, len, masks)| {
                TemporalQuery::new(
                    order[..len]
                        .iter()
                        .zip(masks)
                        .map(|(&t, m)| QueryItem::new(t, Coalition::from_mask(m)))
                        .collect(),
                )
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(q in arb_query()) {
            let d = sr3();
            prop_assert!(validate(&q, &d).is_empty());
            prop_assert_eq!(parse_query(&q.render(&d), &d).unwrap(), q.clone());
            // nesting depth equals the item count
            let text = q.to_pctl(&d);
            prop_assert_eq!(text.matches("F (").count(), q.len());
        }
    }
}

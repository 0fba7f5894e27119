//! Contrastive explanations for infeasible queries.
//!
//! The loop repeatedly locates the first query item that no sampled path can
//! reach in order, characterizes the abstract states that complete its task
//! with a minimized Boolean formula over the progress bits, picks the term
//! closest to the query, explains the gap in sentences, and repairs the
//! query accordingly, until the repaired query is feasible.
//!
//! A repair suggested by the minimized formula is kept only if it makes
//! progress (more of the query becomes reachable, or the query becomes
//! feasible). Otherwise the repair is read off a concrete path that
//! completes the failed task right after the matched prefix; if no such
//! path exists the item is dropped with a [`ClauseKind::NeverAfter`] clause.

pub mod language;
pub mod qm;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{Edge, Mmdp, StateId};
use crate::checker::{annotate_on_graph, check_on_graph, monitor_step, MonitorIndex};
use crate::coalition::{Coalition, TaskId};
use crate::domain::Domain;
use crate::querylang::{validate, QueryItem, TemporalQuery};

pub use language::{render, ClauseKind, ExplanationClause};
pub use qm::{minimal_dnf, Implicant, QmError, QmOptions};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("query repair did not converge within {iterations} iterations")]
    RepairDiverged { iterations: usize },
    #[error(transparent)]
    Qm(#[from] QmError),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExplainOptions {
    pub qm: QmOptionsConfig,
}

/// Serializable mirror of [`QmOptions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct QmOptionsConfig {
    pub max_vars: usize,
    pub petrick_limit: usize,
}

impl Default for QmOptionsConfig {
    fn default() -> Self {
        let d = QmOptions::default();
        QmOptionsConfig {
            max_vars: d.max_vars,
            petrick_limit: d.petrick_limit,
        }
    }
}

impl From<QmOptionsConfig> for QmOptions {
    fn from(c: QmOptionsConfig) -> Self {
        QmOptions {
            max_vars: c.max_vars,
            petrick_limit: c.petrick_limit,
        }
    }
}

/// How a failure was resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Resolution {
    /// Repaired from the selected term of the minimized formula.
    Term { encoding: String },
    /// Repaired from a sampled path completing the task after the matched
    /// prefix, because the term-based repair made no progress.
    Path,
    /// The item was dropped from the query.
    Removed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// 0-based position of the failed item in `query`.
    pub index: usize,
    pub item: QueryItem,
    /// The query as it stood when this failure was found.
    pub query: TemporalQuery,
    pub clauses: Vec<ExplanationClause>,
    pub resolution: Resolution,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplanationReport {
    pub failures: Vec<Failure>,
    pub final_query: TemporalQuery,
    pub final_feasible: bool,
}

impl ExplanationReport {
    /// Every rendered sentence, in order.
    pub fn sentences(&self) -> Vec<&str> {
        self.failures
            .iter()
            .flat_map(|f| f.clauses.iter().map(|c| c.text.as_str()))
            .collect()
    }

    /// The structured document form, with names instead of indices and
    /// 1-based failure positions.
    pub fn to_document(&self, domain: &Domain) -> serde_json::Value {
        use serde_json::json;
        let failures: Vec<_> = self
            .failures
            .iter()
            .map(|f| {
                let clauses: Vec<_> = f
                    .clauses
                    .iter()
                    .map(|c| {
                        json!({
                            "kind": c.kind_name(),
                            "payload": c.named_payload(domain),
                            "text": c.text,
                        })
                    })
                    .collect();
                let resolution = match &f.resolution {
                    Resolution::Term { encoding } => json!({"kind": "term", "encoding": encoding}),
                    Resolution::Path => json!({"kind": "path"}),
                    Resolution::Removed => json!({"kind": "removed"}),
                };
                json!({
                    "index": f.index + 1,
                    "task": domain.task_name(f.item.task),
                    "coalition": domain.agent_ids(f.item.coalition),
                    "query": f.query.render(domain),
                    "clauses": clauses,
                    "resolution": resolution,
                })
            })
            .collect();
        json!({
            "failures": failures,
            "finalQuery": self.final_query.render(domain),
            "finalFeasible": self.final_feasible,
        })
    }
}

/// States entered by a sampled edge that completes `task`, by any coalition.
pub fn target_states(mmdp: &Mmdp, task: TaskId) -> Vec<StateId> {
    mmdp.completing_states(task)
}

/// Agent and task of a progress variable.
fn var_owner(var: usize, num_tasks: usize) -> (usize, TaskId) {
    (var / num_tasks, var % num_tasks)
}

/// Closeness of a term to the query: +1 for each positive literal (task g,
/// agent i) with g queried and i in its queried coalition, -1 when g is
/// queried without i.
pub fn term_score(term: &Implicant, query: &TemporalQuery, num_tasks: usize) -> i64 {
    term.positives()
        .map(|v| {
            let (agent, task) = var_owner(v, num_tasks);
            match query.items.iter().find(|i| i.task == task) {
                Some(item) if item.coalition.contains(agent) => 1,
                Some(_) => -1,
                None => 0,
            }
        })
        .sum()
}

/// Highest-scoring term; ties go to the smallest encoding.
pub fn select_term(terms: &[Implicant], query: &TemporalQuery, num_tasks: usize) -> Implicant {
    *terms
        .iter()
        .max_by(|a, b| {
            term_score(a, query, num_tasks)
                .cmp(&term_score(b, query, num_tasks))
                .then_with(|| b.cmp(a))
        })
        .expect("at least one term")
}

/// Positive literals of `term` grouped by task, without the tasks of items
/// before `failed`.
fn filtered_groups(
    term: &Implicant,
    query: &TemporalQuery,
    failed: usize,
    num_tasks: usize,
) -> BTreeMap<TaskId, Coalition> {
    let matched: HashSet<TaskId> = query.items[..failed].iter().map(|i| i.task).collect();
    let mut groups: BTreeMap<TaskId, Coalition> = BTreeMap::new();
    for v in term.positives() {
        let (agent, task) = var_owner(v, num_tasks);
        if !matched.contains(&task) {
            groups.entry(task).or_default().insert(agent);
        }
    }
    groups
}

fn term_clauses(
    term: &Implicant,
    query: &TemporalQuery,
    failed: usize,
    num_tasks: usize,
) -> Vec<ClauseKind> {
    let target = query.items[failed];
    let groups = filtered_groups(term, query, failed, num_tasks);
    let mut kinds = Vec::new();
    let required = groups.get(&target.task).copied().unwrap_or_default();
    if required != target.coalition {
        kinds.push(ClauseKind::Coalition {
            task: target.task,
            queried_coalition: target.coalition,
            required_coalition: required,
        });
    }
    for (&task, &coalition) in groups.iter().filter(|(&t, _)| t != target.task) {
        kinds.push(ClauseKind::Precedence {
            task,
            coalition,
            before_task: target.task,
        });
    }
    kinds
}

/// Explains why item `failed` of `query` cannot be reached, from the
/// selected term: a coalition clause when the term's coalition for the task
/// differs from the queried one, then one precedence clause per other task
/// the term shows completed.
pub fn translate(
    term: &Implicant,
    query: &TemporalQuery,
    failed: usize,
    domain: &Domain,
) -> Vec<ExplanationClause> {
    term_clauses(term, query, failed, domain.num_tasks())
        .into_iter()
        .map(|k| ExplanationClause::new(k, domain))
        .collect()
}

/// Applies the term's groups to the query: the failed item takes the term's
/// coalition, and each other task the term shows completed is moved (or
/// inserted) immediately before it, in task order.
pub fn repair_query(
    query: &TemporalQuery,
    failed: usize,
    term: &Implicant,
    num_tasks: usize,
) -> TemporalQuery {
    let target = query.items[failed];
    let groups = filtered_groups(term, query, failed, num_tasks);
    let mut before: Vec<QueryItem> = Vec::new();
    let mut coalition = target.coalition;
    for (&task, &c) in &groups {
        if task == target.task {
            coalition = c;
        } else {
            before.push(QueryItem::new(task, c));
        }
    }
    let moved: HashSet<TaskId> = before.iter().map(|i| i.task).collect();
    let mut items = query.items[..failed].to_vec();
    items.extend(before);
    items.push(QueryItem::new(target.task, coalition));
    items.extend(
        query.items[failed + 1..]
            .iter()
            .filter(|i| !moved.contains(&i.task)),
    );
    TemporalQuery::new(items)
}

/// Explains every failure of `query`, repairing it until it is feasible.
pub fn explain(
    mmdp: &Mmdp,
    query: &TemporalQuery,
    options: &ExplainOptions,
) -> Result<ExplanationReport, ExplainError> {
    let domain = mmdp.domain();
    let violations = validate(query, &domain);
    if let Some(v) = violations.first() {
        return Err(ExplainError::InvalidQuery(v.describe(&domain)));
    }
    let num_tasks = mmdp.num_tasks();
    let num_vars = mmdp.num_agents() * num_tasks;
    let graph = mmdp.support_graph();
    let initial = mmdp.initial();
    let qm_options: QmOptions = options.qm.into();

    let cap = num_tasks.max(1) * (query.len() + 1);
    let mut current = query.clone();
    let mut failures = Vec::new();
    for _ in 0..cap {
        if check_on_graph(initial, &graph, &current).feasible {
            return Ok(ExplanationReport {
                failures,
                final_query: current,
                final_feasible: true,
            });
        }
        let umax = annotate_on_graph(initial, &graph, &current).umax;
        let failed = umax;
        let item = current.items[failed];
        let targets = target_states(mmdp, item.task);

        if targets.is_empty() {
            let kind = ClauseKind::NeverObserved { task: item.task };
            failures.push(Failure {
                index: failed,
                item,
                query: current.clone(),
                clauses: vec![ExplanationClause::new(kind, &domain)],
                resolution: Resolution::Removed,
            });
            current.items.remove(failed);
            continue;
        }

        let on_set: Vec<u64> = targets.iter().map(|&s| mmdp.state(s).bits()).collect();
        let terms = minimal_dnf(&on_set, num_vars, &qm_options)?;
        let term = select_term(&terms, &current, num_tasks);
        let repaired = repair_query(&current, failed, &term, num_tasks);
        let progresses = repaired != current
            && (check_on_graph(initial, &graph, &repaired).feasible
                || annotate_on_graph(initial, &graph, &repaired).umax > umax);
        let (kinds, resolution, next) = if progresses {
            (
                term_clauses(&term, &current, failed, num_tasks),
                Resolution::Term {
                    encoding: term.encoding(),
                },
                repaired,
            )
        } else if let Some((kinds, next)) = path_repair(initial, &graph, &current, failed) {
            (kinds, Resolution::Path, next)
        } else {
            let mut next = current.clone();
            next.items.remove(failed);
            let kind = match failed.checked_sub(1) {
                Some(prev) => ClauseKind::NeverAfter {
                    task: item.task,
                    after_task: current.items[prev].task,
                },
                // only possible when no completing state is reachable at all
                None => ClauseKind::NeverObserved { task: item.task },
            };
            (vec![kind], Resolution::Removed, next)
        };
        failures.push(Failure {
            index: failed,
            item,
            query: current.clone(),
            clauses: kinds
                .into_iter()
                .map(|k| ExplanationClause::new(k, &domain))
                .collect(),
            resolution,
        });
        current = next;
    }
    if check_on_graph(initial, &graph, &current).feasible {
        return Ok(ExplanationReport {
            failures,
            final_query: current,
            final_feasible: true,
        });
    }
    Err(ExplainError::RepairDiverged { iterations: cap })
}

/// States where the greedy monitor sits at exactly `matched` items.
fn anchors(
    initial: StateId,
    graph: &[Vec<Edge>],
    query: &TemporalQuery,
    matched: usize,
) -> Vec<StateId> {
    let mut seen = HashSet::from([(initial, 0usize)]);
    let mut queue = VecDeque::from([(initial, 0usize)]);
    let mut out = Vec::new();
    while let Some((state, j)) = queue.pop_front() {
        if j == matched {
            out.push(state);
        }
        for edge in &graph[state] {
            if let MonitorIndex::At(next) = monitor_step(MonitorIndex::At(j), &edge.events, query) {
                if next <= matched && seen.insert((edge.dst, next)) {
                    queue.push_back((edge.dst, next));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Repair read off a sampled path: from a state where the matched prefix
/// holds, the cheapest path (fewest pending queried tasks completed on the
/// way, then shortest) to an edge completing the failed task. Pending tasks
/// completed on that path move before the failed item, in completion order,
/// and the failed item takes the coalition that completed it.
fn path_repair(
    initial: StateId,
    graph: &[Vec<Edge>],
    query: &TemporalQuery,
    failed: usize,
) -> Option<(Vec<ClauseKind>, TemporalQuery)> {
    let target = query.items[failed];
    let pending: HashSet<TaskId> = query.items[failed + 1..].iter().map(|i| i.task).collect();
    let pending_events = |e: &Edge| {
        e.events
            .iter()
            .filter(|ev| pending.contains(&ev.task))
            .count()
    };

    let mut dist: HashMap<StateId, (usize, usize)> = HashMap::new();
    let mut parent: HashMap<StateId, &Edge> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for s in anchors(initial, graph, query, failed) {
        dist.insert(s, (0, 0));
        heap.push(Reverse((0usize, 0usize, s)));
    }
    // (moved, coalition differs, length, src, dst)
    type Key = (usize, bool, usize, StateId, StateId);
    let mut best: Option<(Key, &Edge)> = None;
    while let Some(Reverse((moved, len, state))) = heap.pop() {
        if dist.get(&state) != Some(&(moved, len)) {
            continue;
        }
        for edge in &graph[state] {
            let cost = (moved + pending_events(edge), len + 1);
            if let Some(ev) = edge.events.iter().find(|ev| ev.task == target.task) {
                let key = (
                    cost.0,
                    ev.coalition != target.coalition,
                    cost.1,
                    edge.src,
                    edge.dst,
                );
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((key, edge));
                }
                continue;
            }
            if dist.get(&edge.dst).is_none_or(|&d| cost < d) {
                dist.insert(edge.dst, cost);
                parent.insert(edge.dst, edge);
                heap.push(Reverse((cost.0, cost.1, edge.dst)));
            }
        }
    }
    let (_, last) = best?;

    let mut path = vec![last];
    let mut at = last.src;
    while dist[&at] != (0, 0) {
        let e = parent[&at];
        path.push(e);
        at = e.src;
    }
    path.reverse();

    let mut moved: Vec<QueryItem> = Vec::new();
    let mut coalition = target.coalition;
    for edge in &path {
        for ev in &edge.events {
            if ev.task == target.task {
                coalition = ev.coalition;
            } else if pending.contains(&ev.task) {
                moved.push(QueryItem::new(ev.task, ev.coalition));
            }
        }
    }

    let mut kinds = Vec::new();
    if coalition != target.coalition {
        kinds.push(ClauseKind::Coalition {
            task: target.task,
            queried_coalition: target.coalition,
            required_coalition: coalition,
        });
    }
    kinds.extend(moved.iter().map(|m| ClauseKind::Precedence {
        task: m.task,
        coalition: m.coalition,
        before_task: target.task,
    }));

    let moved_tasks: HashSet<TaskId> = moved.iter().map(|m| m.task).collect();
    let mut items = query.items[..failed].to_vec();
    items.extend(moved);
    items.push(QueryItem::new(target.task, coalition));
    items.extend(
        query.items[failed + 1..]
            .iter()
            .filter(|i| !moved_tasks.contains(&i.task)),
    );
    Some((kinds, TemporalQuery::new(items)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::ProgressMatrix;
    use crate::checker::check_feasible;
    use crate::envsim::{Action, JointAction};
    use crate::fixtures;
    use crate::querylang::parse_query;

    fn sr3(text: &str) -> TemporalQuery {
        parse_query(text, &fixtures::sr3_config().domain()).unwrap()
    }

    fn minterm(m: &Mmdp, s: StateId) -> Implicant {
        Implicant::minterm(m.state(s).bits(), m.num_agents() * m.num_tasks())
    }

    const ORIGINAL: &str = "obstacle:r1,r2 -> victim:r1 -> fire:r2,r3";
    const UPDATED: &str = "fire:r2,r3 -> obstacle:r1,r2 -> victim:r1";

    #[test]
    fn sr3_chain_targets() {
        let m = fixtures::sr3_chain_mmdp();
        assert_eq!(target_states(&m, 1), vec![2]);
        assert_eq!(target_states(&m, 2), vec![3]);
        assert_eq!(target_states(&m, 0), vec![1]);
    }

    #[test]
    fn obstacle_formula_is_single_minterm() {
        let m = fixtures::sr3_chain_mmdp();
        let terms = minimal_dnf(&[m.state(2).bits()], 9, &QmOptions::default()).unwrap();
        assert_eq!(terms, vec![minterm(&m, 2)]);
        let d = m.domain();
        let names: Vec<String> = terms[0]
            .positives()
            .map(|v| {
                let (agent, task) = var_owner(v, 3);
                format!("{}_{}", d.task_name(task), d.agents[agent].atom)
            })
            .collect();
        assert_eq!(
            names,
            [
                "obstacle_robotI",
                "fire_robotII",
                "obstacle_robotII",
                "fire_robotIII"
            ]
        );
    }

    #[test]
    fn select_term_tie_goes_to_smaller_encoding() {
        let m = fixtures::sr3_chain_mmdp();
        let q = sr3(ORIGINAL);
        let (s2, s3) = (minterm(&m, 2), minterm(&m, 3));
        assert_eq!(term_score(&s2, &q, 3), 4);
        assert_eq!(term_score(&s3, &q, 3), 4);
        assert_eq!(select_term(&[s3, s2], &q, 3), s2);
        assert_eq!(select_term(&[s3], &q, 3), s3);
    }

    #[test]
    fn translate_worked_examples() {
        let m = fixtures::sr3_chain_mmdp();
        let d = m.domain();
        let first = translate(&minterm(&m, 2), &sr3(ORIGINAL), 0, &d);
        assert_eq!(first.len(), 1);
        assert_eq!(
            first[0].text,
            "The robots cannot remove the obstacle because fighting the fire must be completed before removing the obstacle."
        );
        let second = translate(&minterm(&m, 3), &sr3(UPDATED), 2, &d);
        assert_eq!(second.len(), 1);
        assert_eq!(
            second[0].text,
            "The robots cannot rescue the victim because Robot I needs Robot III to help rescue the victim."
        );
    }

    #[test]
    fn translate_exact_match_is_empty_and_repair_is_fixpoint() {
        let m = fixtures::sr3_chain_mmdp();
        let q = sr3("fire:r2,r3");
        assert!(translate(&minterm(&m, 1), &q, 0, &m.domain()).is_empty());
        assert_eq!(repair_query(&q, 0, &minterm(&m, 1), 3), q);
    }

    #[test]
    fn repair_worked_examples() {
        let m = fixtures::sr3_chain_mmdp();
        assert_eq!(
            repair_query(&sr3(ORIGINAL), 0, &minterm(&m, 2), 3),
            sr3(UPDATED)
        );
        assert_eq!(
            repair_query(&sr3(UPDATED), 2, &minterm(&m, 3), 3),
            sr3("fire:r2,r3 -> obstacle:r1,r2 -> victim:r1,r3")
        );
    }

    #[test]
    fn sr3_chain_full_walkthrough() {
        let m = fixtures::sr3_chain_mmdp();
        let report = explain(&m, &sr3(ORIGINAL), &ExplainOptions::default()).unwrap();
        assert_eq!(report.failures.len(), 2);
        assert_eq!(
            report.sentences(),
            [
                "The robots cannot remove the obstacle because fighting the fire must be completed before removing the obstacle.",
                "The robots cannot rescue the victim because Robot I needs Robot III to help rescue the victim.",
            ]
        );
        assert_eq!(
            report.final_query,
            sr3("fire:r2,r3 -> obstacle:r1,r2 -> victim:r1,r3")
        );
        assert!(report.final_feasible);
        assert_eq!(report.failures[0].index, 0);
        assert_eq!(report.failures[1].index, 2);
        let doc = report.to_document(&m.domain());
        assert_eq!(doc["failures"][1]["index"], 3);
        assert_eq!(doc["failures"][0]["clauses"][0]["kind"], "Precedence");
        assert_eq!(doc["failures"][0]["clauses"][0]["payload"]["task"], "fire");
    }

    #[test]
    fn unseen_task_is_removed() {
        // only fire ever completes
        let mut m = Mmdp::new(1, vec!["fire".into(), "victim".into()]);
        let mut done = ProgressMatrix::empty(1, 2);
        done.set(0, 0);
        m.record_transition(
            ProgressMatrix::empty(1, 2),
            JointAction(vec![Action::Act]),
            done,
            1,
        )
        .unwrap();
        let d = m.domain();
        let q = parse_query("victim:r1", &d).unwrap();
        let report = explain(&m, &q, &ExplainOptions::default()).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(
            report.failures[0].clauses[0].kind,
            ClauseKind::NeverObserved { task: 1 }
        );
        assert_eq!(report.failures[0].resolution, Resolution::Removed);
        assert!(report.final_query.is_empty());
        assert!(report.final_feasible);
    }

    #[test]
    fn feasible_query_has_no_failures() {
        let m = fixtures::sr3_chain_mmdp();
        let q = sr3("fire:r2,r3 -> victim:r1,r3");
        assert!(check_feasible(&m, &q).feasible);
        let report = explain(&m, &q, &ExplainOptions::default()).unwrap();
        assert!(report.failures.is_empty() && report.final_feasible);
    }

    #[test]
    fn path_repair_when_term_repair_stalls() {
        // Two branches from s0: a then b, or b alone. Query "b -> a" needs a
        // after b, which never happens; query "c -> a" where c only occurs
        // after a exercises the removal fallback.
        let n_tasks = 3;
        let pm = |tasks: &[usize]| {
            let mut p = ProgressMatrix::empty(1, n_tasks);
            for &t in tasks {
                p.set(0, t);
            }
            p
        };
        let act = || JointAction(vec![Action::Act]);
        let mut m = Mmdp::new(1, vec!["a".into(), "b".into(), "c".into()]);
        m.record_transition(pm(&[]), act(), pm(&[0]), 1).unwrap();
        m.record_transition(pm(&[0]), act(), pm(&[0, 1]), 1)
            .unwrap();
        m.record_transition(pm(&[]), act(), pm(&[1]), 1).unwrap();
        m.record_transition(pm(&[0, 1]), act(), pm(&[0, 1, 2]), 1)
            .unwrap();
        let d = m.domain();

        let q = parse_query("b:r1 -> a:r1", &d).unwrap();
        let report = explain(&m, &q, &ExplainOptions::default()).unwrap();
        assert!(report.final_feasible);
        assert!(check_feasible(&m, &report.final_query).feasible);
        let last = report.failures.last().unwrap();
        assert_eq!(last.resolution, Resolution::Removed);
        assert_eq!(
            last.clauses[0].text,
            "The agents never complete a after completing b in any observed execution."
        );

        let q = parse_query("c:r1 -> a:r1", &d).unwrap();
        let report = explain(&m, &q, &ExplainOptions::default()).unwrap();
        assert!(report.final_feasible);
        assert!(check_feasible(&m, &report.final_query).feasible);
    }

    #[test]
    fn too_many_variables_propagates() {
        let m = fixtures::sr3_chain_mmdp();
        let options = ExplainOptions {
            qm: QmOptionsConfig {
                max_vars: 4,
                ..Default::default()
            },
        };
        assert!(matches!(
            explain(&m, &sr3(ORIGINAL), &options),
            Err(ExplainError::Qm(QmError::TooManyVariables { .. }))
        ));
    }
}

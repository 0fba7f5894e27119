//! Feasibility of sequencing queries over an abstraction.
//!
//! A query `<t1, t2, ...>` asks for a positive-probability path on which the
//! items occur in order (several may occur on the same step). Over a
//! frequency-counted abstraction `P>0` is plain reachability in the support
//! graph, so the check is a search over the product of abstract states with
//! a monitor index: the number of query items matched so far.
//!
//! Tasks complete at most once per execution, so an event on the task of a
//! still-pending item that does not advance the monitor kills the path (the
//! monitor drops to [`MonitorIndex::Bottom`]).

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::abstraction::{Edge, Mmdp, StateId};
use crate::coalition::CompletionEvent;
use crate::querylang::TemporalQuery;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MonitorIndex {
    /// The query is violated on this path.
    Bottom,
    /// Items `1..=j` are matched.
    At(usize),
}

impl MonitorIndex {
    pub fn value(self) -> Option<usize> {
        match self {
            MonitorIndex::At(j) => Some(j),
            MonitorIndex::Bottom => None,
        }
    }
}

/// Number of consecutive pending items, starting after `matched`, whose exact
/// (task, coalition) occurs in `events`.
fn possible_advances(matched: usize, events: &[CompletionEvent], query: &TemporalQuery) -> usize {
    query.items[matched..]
        .iter()
        .take_while(|item| {
            events
                .iter()
                .any(|e| e.task == item.task && e.coalition == item.coalition)
        })
        .count()
}

/// Whether `events` touch the task of an item after position `matched`.
fn touches_pending(matched: usize, events: &[CompletionEvent], query: &TemporalQuery) -> bool {
    query.items[matched..]
        .iter()
        .any(|item| events.iter().any(|e| e.task == item.task))
}

/// Greedy monitor transition: advance through every item the events match,
/// then fall to `Bottom` if any still-pending item's task was completed.
/// Events on unqueried tasks are neutral.
pub fn monitor_step(
    j: MonitorIndex,
    events: &[CompletionEvent],
    query: &TemporalQuery,
) -> MonitorIndex {
    let MonitorIndex::At(matched) = j else {
        return MonitorIndex::Bottom;
    };
    assert!(matched <= query.len(), "monitor index beyond the query");
    let next = matched + possible_advances(matched, events, query);
    if touches_pending(next, events, query) {
        MonitorIndex::Bottom
    } else {
        MonitorIndex::At(next)
    }
}

/// Monitor indices reachable in one step when the monitor may stop early:
/// any prefix of the greedy advances that leaves no pending task touched.
fn nondeterministic_steps(
    matched: usize,
    events: &[CompletionEvent],
    query: &TemporalQuery,
) -> Vec<usize> {
    let k = possible_advances(matched, events, query);
    (matched..=matched + k)
        .filter(|&j| !touches_pending(j, events, query))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub src: StateId,
    pub action: crate::envsim::JointAction,
    pub dst: StateId,
    pub count: u64,
    pub events: Vec<CompletionEvent>,
}

impl From<&Edge> for WitnessStep {
    fn from(e: &Edge) -> Self {
        WitnessStep {
            src: e.src,
            action: e.action.clone(),
            dst: e.dst,
            count: e.count,
            events: e.events.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Present iff feasible; replaying its events through `monitor_step`
    /// ends with every item matched.
    pub witness: Option<Vec<WitnessStep>>,
}

/// Decides `P>0 [ F (t1 & F (t2 & ...)) ]` by breadth-first search over
/// (state, monitor) pairs. Returns a shortest witness path when feasible.
pub fn check_feasible(mmdp: &Mmdp, query: &TemporalQuery) -> FeasibilityResult {
    check_on_graph(mmdp.initial(), &mmdp.support_graph(), query)
}

pub(crate) fn check_on_graph(
    initial: StateId,
    graph: &[Vec<Edge>],
    query: &TemporalQuery,
) -> FeasibilityResult {
    let goal = query.len();
    let start = (initial, 0usize);
    if goal == 0 {
        return FeasibilityResult {
            feasible: true,
            witness: Some(Vec::new()),
        };
    }
    type Node = (StateId, usize);
    let mut parent: HashMap<Node, (Node, &Edge)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut found = None;
    'search: while let Some(node @ (state, matched)) = queue.pop_front() {
        for edge in &graph[state] {
            // larger advances first so the witness is also greedy-replayable
            for next in nondeterministic_steps(matched, &edge.events, query)
                .into_iter()
                .rev()
            {
                let succ = (edge.dst, next);
                if succ == start || parent.contains_key(&succ) {
                    continue;
                }
                parent.insert(succ, (node, edge));
                if next == goal {
                    found = Some(succ);
                    break 'search;
                }
                queue.push_back(succ);
            }
        }
    }
    let Some(mut node) = found else {
        return FeasibilityResult {
            feasible: false,
            witness: None,
        };
    };
    let mut path = Vec::new();
    while node != start {
        let (prev, edge) = parent[&node];
        path.push(WitnessStep::from(edge));
        node = prev;
    }
    path.reverse();
    FeasibilityResult {
        feasible: true,
        witness: Some(path),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    /// Largest monitor index reached on any path; Bottom nodes ignored.
    pub umax: usize,
    /// Best non-Bottom index per state; states reached only as Bottom are
    /// absent.
    pub node_u: BTreeMap<StateId, usize>,
}

/// Greedy conformance annotation: explores (state, monitor) pairs from the
/// initial state, never expanding Bottom nodes.
pub fn annotate(mmdp: &Mmdp, query: &TemporalQuery) -> Annotation {
    annotate_on_graph(mmdp.initial(), &mmdp.support_graph(), query)
}

pub(crate) fn annotate_on_graph(
    initial: StateId,
    graph: &[Vec<Edge>],
    query: &TemporalQuery,
) -> Annotation {
    let mut node_u = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([(initial, 0usize)]);
    seen.insert((initial, 0usize));
    while let Some((state, matched)) = queue.pop_front() {
        let best = node_u.entry(state).or_insert(matched);
        *best = (*best).max(matched);
        for edge in &graph[state] {
            if let MonitorIndex::At(next) =
                monitor_step(MonitorIndex::At(matched), &edge.events, query)
            {
                if seen.insert((edge.dst, next)) {
                    queue.push_back((edge.dst, next));
                }
            }
        }
    }
    let umax = node_u.values().copied().max().unwrap_or(0);
    Annotation { umax, node_u }
}

//! Policy-abstraction MMDP.
//!
//! Abstract states are progress matrices (which agent completed which task).
//! Every sampled concrete step `(x, a, x')` maps to an abstract transition
//! `(s, a, s')` where `s` accumulates the completion events seen so far in
//! the episode; transition probabilities are frequency counts. For each
//! abstract state we also keep its visit count C(s) and a bounded reservoir
//! X(s) of concrete states observed there, which guided rollouts restart
//! from.
//!
//! Edge labels are not stored: the events of an edge are the bit difference
//! between its endpoints, see [`events_of`].

mod persist;
mod plan;
mod progress;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use plan::{summarize_plan, Plan};
pub use progress::{events_of, ProgressMatrix};

use crate::coalition::CompletionEvent;
use crate::domain::Domain;
use crate::envsim::{
    episode_seed, run_episode, EnvConfig, EnvError, Environment, JointAction, JointState, Policy,
    Trajectory,
};

pub type StateId = usize;

pub const DEFAULT_SAMPLE_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("non-monotone progress from {from} to {to}")]
    NonMonotone { from: String, to: String },
    #[error("inconsistent completion event: {0}")]
    InconsistentEvent(String),
    #[error("no all-tasks-complete state is reachable")]
    NoCompletePath,
    #[error("episodes must be at least 1")]
    ZeroEpisodes,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("malformed MMDP file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported MMDP file version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },
    #[error("invalid MMDP: {0}")]
    Invalid(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Bounded set of distinct concrete states, kept by reservoir sampling.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    states: Vec<JointState>,
    /// Distinct states offered so far, including evicted ones.
    seen: u64,
}

impl SampleSet {
    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    fn offer(&mut self, state: &JointState, cap: usize) {
        if self.states.contains(state) {
            return;
        }
        self.seen += 1;
        if self.states.len() < cap {
            self.states.push(state.clone());
            return;
        }
        // Deterministic stand-in for a uniform draw in [0, seen).
        let slot = (fnv1a(state.key().as_bytes()) ^ self.seen.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            % self.seen;
        if (slot as usize) < cap {
            self.states[slot as usize] = state.clone();
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// One support edge `src -> dst` (self-loops excluded), aggregated over
/// joint actions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: StateId,
    pub dst: StateId,
    /// Smallest sampled joint action realizing the edge.
    pub action: JointAction,
    /// Sampled steps across all joint actions.
    pub count: u64,
    pub events: Vec<CompletionEvent>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mmdp {
    num_agents: usize,
    tasks: Vec<String>,
    env: Option<EnvConfig>,
    states: Vec<ProgressMatrix>,
    index: HashMap<ProgressMatrix, StateId>,
    transitions: BTreeMap<(StateId, JointAction), BTreeMap<StateId, u64>>,
    visit_counts: Vec<u64>,
    samples: Vec<SampleSet>,
    sample_cap: usize,
}

impl Mmdp {
    /// An abstraction holding only the all-false initial state.
    pub fn new(num_agents: usize, tasks: Vec<String>) -> Self {
        let initial = ProgressMatrix::empty(num_agents, tasks.len());
        let mut mmdp = Mmdp {
            num_agents,
            tasks,
            env: None,
            states: Vec::new(),
            index: HashMap::new(),
            transitions: BTreeMap::new(),
            visit_counts: Vec::new(),
            samples: Vec::new(),
            sample_cap: DEFAULT_SAMPLE_CAP,
        };
        mmdp.intern(initial);
        mmdp
    }

    pub fn for_env(config: &EnvConfig) -> Self {
        let mut mmdp = Mmdp::new(config.num_agents, config.task_names());
        mmdp.env = Some(config.clone());
        mmdp
    }

    pub fn with_sample_cap(mut self, cap: usize) -> Self {
        self.sample_cap = cap.max(1);
        self
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn env_config(&self) -> Option<&EnvConfig> {
        self.env.as_ref()
    }

    /// Naming for queries and explanations; falls back to `r1..rN` and plain
    /// task verbs when the abstraction was not built from a named environment.
    pub fn domain(&self) -> Domain {
        match &self.env {
            Some(config) => config.domain(),
            None => Domain::plain(self.num_agents, &self.tasks),
        }
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, id: StateId) -> &ProgressMatrix {
        &self.states[id]
    }

    pub fn states(&self) -> impl Iterator<Item = (StateId, &ProgressMatrix)> {
        self.states.iter().enumerate()
    }

    pub fn state_id(&self, progress: &ProgressMatrix) -> Option<StateId> {
        self.index.get(progress).copied()
    }

    pub fn visit_count(&self, id: StateId) -> u64 {
        self.visit_counts[id]
    }

    pub fn samples(&self, id: StateId) -> &[JointState] {
        self.samples[id].states()
    }

    pub fn sample_set(&self, id: StateId) -> &SampleSet {
        &self.samples[id]
    }

    pub fn sample_cap(&self) -> usize {
        self.sample_cap
    }

    /// Distinct `(src, action, dst)` triples with a positive count.
    pub fn num_transitions(&self) -> usize {
        self.transitions.values().map(BTreeMap::len).sum()
    }

    /// Every `(src, action, dst, count)` in key order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &JointAction, StateId, u64)> {
        self.transitions
            .iter()
            .flat_map(|((src, a), targets)| targets.iter().map(move |(&dst, &c)| (*src, a, dst, c)))
    }

    /// `(dst, count, probability)` for one state-action pair; probabilities
    /// are derived from counts.
    pub fn outcomes(&self, src: StateId, action: &JointAction) -> Vec<(StateId, u64, f64)> {
        let Some(targets) = self.transitions.get(&(src, action.clone())) else {
            return Vec::new();
        };
        let total: u64 = targets.values().sum();
        targets
            .iter()
            .map(|(&dst, &c)| (dst, c, c as f64 / total as f64))
            .collect()
    }

    pub fn count(&self, src: StateId, action: &JointAction, dst: StateId) -> u64 {
        self.transitions
            .get(&(src, action.clone()))
            .and_then(|t| t.get(&dst))
            .copied()
            .unwrap_or(0)
    }

    pub fn probability(&self, src: StateId, action: &JointAction, dst: StateId) -> f64 {
        self.outcomes(src, action)
            .into_iter()
            .find(|&(d, _, _)| d == dst)
            .map_or(0.0, |(_, _, p)| p)
    }

    /// Events on the edge `src -> dst`.
    pub fn edge_events(&self, src: StateId, dst: StateId) -> Vec<CompletionEvent> {
        events_of(&self.states[src], &self.states[dst]).expect("stored edges are monotone")
    }

    /// Outgoing support edges of every state, excluding self-loops, ordered
    /// by destination id.
    pub fn support_graph(&self) -> Vec<Vec<Edge>> {
        let mut agg: Vec<BTreeMap<StateId, (JointAction, u64)>> =
            vec![BTreeMap::new(); self.states.len()];
        for (src, action, dst, count) in self.transitions() {
            if src == dst {
                continue;
            }
            agg[src]
                .entry(dst)
                .and_modify(|(a, c)| {
                    *c += count;
                    if action < a {
                        *a = action.clone();
                    }
                })
                .or_insert_with(|| (action.clone(), count));
        }
        agg.into_iter()
            .enumerate()
            .map(|(src, out)| {
                out.into_iter()
                    .map(|(dst, (action, count))| Edge {
                        src,
                        dst,
                        action,
                        count,
                        events: self.edge_events(src, dst),
                    })
                    .collect()
            })
            .collect()
    }

    /// States with an incoming edge whose events complete `task`, by any
    /// coalition.
    pub fn completing_states(&self, task: usize) -> Vec<StateId> {
        let mut out: Vec<StateId> = self
            .transitions()
            .filter(|&(src, _, dst, _)| {
                src != dst && !self.states[src].task_done(task) && self.states[dst].task_done(task)
            })
            .map(|(_, _, dst, _)| dst)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn intern(&mut self, progress: ProgressMatrix) -> StateId {
        if let Some(&id) = self.index.get(&progress) {
            return id;
        }
        let id = self.states.len();
        self.states.push(progress);
        self.index.insert(progress, id);
        self.visit_counts.push(0);
        self.samples.push(SampleSet::default());
        id
    }

    fn visit(&mut self, id: StateId, state: &JointState) {
        self.visit_counts[id] += 1;
        let cap = self.sample_cap;
        self.samples[id].offer(state, cap);
    }

    /// Adds `count` observations of `src --action--> dst` directly, interning
    /// both endpoints. Visit counts and samples are left alone. Useful for
    /// abstractions that do not come from an environment.
    pub fn record_transition(
        &mut self,
        src: ProgressMatrix,
        action: JointAction,
        dst: ProgressMatrix,
        count: u64,
    ) -> Result<(StateId, StateId), AbstractionError> {
        let shape = (self.num_agents, self.num_tasks());
        for m in [&src, &dst] {
            if (m.num_agents(), m.num_tasks()) != shape {
                return Err(AbstractionError::Invalid(format!(
                    "progress {m} has the wrong shape"
                )));
            }
        }
        if action.0.len() != self.num_agents {
            return Err(AbstractionError::Invalid(format!(
                "action [{action}] has the wrong arity"
            )));
        }
        events_of(&src, &dst)?;
        let s = self.intern(src);
        let d = self.intern(dst);
        if count > 0 {
            *self
                .transitions
                .entry((s, action))
                .or_default()
                .entry(d)
                .or_insert(0) += count;
        }
        Ok((s, d))
    }

    /// Folds one trajectory into the abstraction. `start` is the progress of
    /// the abstract state the trajectory begins in. Each step counts as a
    /// visit to its source state; the final state is visited once more.
    pub fn apply_trajectory(
        &mut self,
        trajectory: &Trajectory,
        start: &ProgressMatrix,
    ) -> Result<(), AbstractionError> {
        if start.num_agents() != self.num_agents || start.num_tasks() != self.num_tasks() {
            return Err(AbstractionError::Invalid(
                "start progress has the wrong shape".into(),
            ));
        }
        // Validate the whole trajectory before touching any counts.
        let mut path = Vec::with_capacity(trajectory.len() + 1);
        path.push(*start);
        for step in &trajectory.steps {
            let next = path.last().unwrap().after(&step.outcome.events)?;
            path.push(next);
        }
        let Some(last) = trajectory.steps.last() else {
            return Ok(());
        };
        for (step, pair) in trajectory.steps.iter().zip(path.windows(2)) {
            let src = self.intern(pair[0]);
            let dst = self.intern(pair[1]);
            self.visit(src, &step.state);
            *self
                .transitions
                .entry((src, step.action.clone()))
                .or_default()
                .entry(dst)
                .or_insert(0) += 1;
        }
        let end = self.intern(*path.last().unwrap());
        self.visit(end, &last.outcome.next_state);
        Ok(())
    }
}

/// Samples `episodes` executions of `policy` and abstracts them.
pub fn build_mmdp(
    env: &dyn Environment,
    policy: &dyn Policy,
    episodes: usize,
    max_steps: usize,
    seed: u64,
) -> Result<Mmdp, AbstractionError> {
    if episodes == 0 {
        return Err(AbstractionError::ZeroEpisodes);
    }
    let mut mmdp = Mmdp::for_env(env.config());
    let start = *mmdp.state(mmdp.initial());
    for e in 0..episodes {
        let trajectory = run_episode(env, policy, max_steps, episode_seed(seed, e as u64))?;
        mmdp.apply_trajectory(&trajectory, &start)?;
    }
    Ok(mmdp)
}

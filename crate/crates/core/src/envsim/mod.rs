//! Cooperative multi-agent task environments and the policies that drive them.
//!
//! Environments expose a pure transition function; [`Session`] wraps one with
//! the mutable "current state" that `reset`, `step` and `inject_state` act on.
//! Task completion is reported as explicit [`CompletionEvent`]s and rewards
//! are derived from them: an agent is rewarded exactly when it belongs to the
//! coalition of an event on that step.

mod config;
mod grid;
mod policy;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{EnvConfig, EnvKind, GridSize, TaskSpec};
pub use grid::TaskGrid;
pub use policy::{
    load_policy, ActionChoice, Policy, PolicyFile, ScriptStage, ScriptedPolicy, TabularEntry,
    TabularPolicy,
};

use crate::coalition::CompletionEvent;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("incompatible state: {0}")]
    IncompatibleState(String),
    #[error("invalid environment config: {message}")]
    Config { message: String },
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("maxSteps must be at least 1")]
    ZeroSteps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
    Act,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Stay,
        Action::Act,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Stay => "stay",
            Action::Act => "act",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointAction(pub Vec<Action>);

impl JointAction {
    pub fn uniform(num_agents: usize, action: Action) -> Self {
        JointAction(vec![action; num_agents])
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a.name())?;
        }
        Ok(())
    }
}

/// Grid position of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct AgentState {
    pub x: i32,
    pub y: i32,
}

impl From<[i32; 2]> for AgentState {
    fn from([x, y]: [i32; 2]) -> Self {
        AgentState { x, y }
    }
}

impl From<AgentState> for [i32; 2] {
    fn from(s: AgentState) -> Self {
        [s.x, s.y]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JointState {
    pub agents: Vec<AgentState>,
    pub task_done: Vec<bool>,
}

impl JointState {
    /// Canonical serialized form, used as the key of tabular policies.
    pub fn key(&self) -> String {
        serde_json::to_string(self).expect("joint state serializes")
    }

    pub fn all_done(&self) -> bool {
        self.task_done.iter().all(|&d| d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepOutcome {
    pub next_state: JointState,
    pub rewards: Vec<f64>,
    /// Sorted by task.
    pub events: Vec<CompletionEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub state: JointState,
    pub action: JointAction,
    pub outcome: StepOutcome,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Completion events in step order.
    pub fn events(&self) -> impl Iterator<Item = &CompletionEvent> {
        self.steps.iter().flat_map(|s| s.outcome.events.iter())
    }
}

/// Deterministic task dynamics. Implementations must be pure: the same state
/// and action always give the same outcome.
pub trait Environment: Send + Sync {
    fn config(&self) -> &EnvConfig;

    fn initial_state(&self) -> JointState;

    fn transition(&self, state: &JointState, action: &JointAction)
        -> Result<StepOutcome, EnvError>;

    /// Actions an agent may take in this environment.
    fn actions(&self) -> &[Action];

    fn check_state(&self, state: &JointState) -> Result<(), EnvError>;
}

pub fn load_environment(config: EnvConfig) -> Result<Box<dyn Environment>, EnvError> {
    config.validate()?;
    Ok(Box::new(TaskGrid::new(config)))
}

/// A stateful handle on an environment: one episode in progress.
pub struct Session<'a> {
    env: &'a dyn Environment,
    current: JointState,
}

impl<'a> Session<'a> {
    pub fn new(env: &'a dyn Environment) -> Self {
        Session {
            env,
            current: env.initial_state(),
        }
    }

    /// The built-in environments have deterministic starts; the seed is
    /// accepted for interface symmetry with stochastic ones.
    pub fn reset(&mut self, _seed: u64) -> JointState {
        self.current = self.env.initial_state();
        self.current.clone()
    }

    pub fn step(&mut self, action: &JointAction) -> Result<StepOutcome, EnvError> {
        let outcome = self.env.transition(&self.current, action)?;
        self.current = outcome.next_state.clone();
        Ok(outcome)
    }

    pub fn inject_state(&mut self, state: &JointState) -> Result<(), EnvError> {
        self.env.check_state(state)?;
        self.current = state.clone();
        Ok(())
    }

    pub fn state(&self) -> &JointState {
        &self.current
    }
}

/// Runs the policy from `start` for at most `max_steps` steps, stopping early
/// once every task is complete.
pub fn run_from(
    env: &dyn Environment,
    policy: &dyn Policy,
    start: &JointState,
    max_steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, EnvError> {
    if max_steps == 0 {
        return Err(EnvError::ZeroSteps);
    }
    let mut session = Session::new(env);
    session.inject_state(start)?;
    let mut steps = Vec::new();
    while steps.len() < max_steps && !session.state().all_done() {
        let state = session.state().clone();
        let action = policy.sample(&state, rng);
        let outcome = session.step(&action)?;
        steps.push(TrajectoryStep {
            state,
            action,
            outcome,
        });
    }
    Ok(Trajectory { steps })
}

pub fn run_episode(
    env: &dyn Environment,
    policy: &dyn Policy,
    max_steps: usize,
    seed: u64,
) -> Result<Trajectory, EnvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Session::new(env).reset(seed);
    run_from(env, policy, &start, max_steps, &mut rng)
}

/// Seed of the `index`-th episode of a batch seeded with `base`.
pub fn episode_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

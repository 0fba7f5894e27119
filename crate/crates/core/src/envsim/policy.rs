use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, AgentState, EnvError, Environment, JointAction, JointState};
use crate::coalition::{Coalition, TaskId};

/// A stochastic joint policy. Sampling draws all randomness from the caller's
/// generator, so a policy can be shared between threads that each own a
/// split seed stream.
pub trait Policy: Send + Sync {
    fn sample(&self, state: &JointState, rng: &mut ChaCha8Rng) -> JointAction;

    /// The action distribution at `state`, when the policy can enumerate it.
    fn distribution(&self, _state: &JointState) -> Option<Vec<(f64, JointAction)>> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicyFile {
    Scripted {
        #[serde(default)]
        epsilon: f64,
        stages: Vec<ScriptStage>,
    },
    Tabular {
        #[serde(default)]
        default: Vec<ActionChoice>,
        entries: Vec<TabularEntry>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptStage {
    pub task: String,
    /// Agent ids as used in queries (`r1`, `r2`, ...).
    pub agents: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionChoice {
    pub p: f64,
    pub action: JointAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularEntry {
    pub state: JointState,
    pub actions: Vec<ActionChoice>,
}

pub fn load_policy(
    path: impl AsRef<Path>,
    env: &dyn Environment,
) -> Result<Box<dyn Policy>, EnvError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EnvError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: PolicyFile = serde_json::from_str(&text)
        .map_err(|e| EnvError::Policy(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    file.instantiate(env)
}

impl PolicyFile {
    pub fn instantiate(&self, env: &dyn Environment) -> Result<Box<dyn Policy>, EnvError> {
        Ok(match self {
            PolicyFile::Scripted { epsilon, stages } => {
                Box::new(ScriptedPolicy::from_stages(env, stages, *epsilon)?)
            }
            PolicyFile::Tabular { default, entries } => {
                Box::new(TabularPolicy::new(env, default, entries)?)
            }
        })
    }
}

/// Waypoint script: stages are worked through in order. Members of the
/// current stage walk to its cell and act once the whole coalition is there;
/// other agents walk to the cell of their next stage and wait. Each agent's
/// choice is independently replaced by a uniformly random action with
/// probability `epsilon`.
#[derive(Clone, Debug)]
pub struct ScriptedPolicy {
    stages: Vec<(TaskId, Coalition)>,
    cells: Vec<[i32; 2]>,
    actions: Vec<Action>,
    num_agents: usize,
    epsilon: f64,
}

impl ScriptedPolicy {
    pub fn new(
        env: &dyn Environment,
        stages: Vec<(TaskId, Coalition)>,
        epsilon: f64,
    ) -> Result<Self, EnvError> {
        let config = env.config();
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(EnvError::Policy(format!("epsilon {epsilon} not in [0, 1]")));
        }
        for &(task, coalition) in &stages {
            if task >= config.num_tasks() {
                return Err(EnvError::Policy(format!("stage task {task} out of range")));
            }
            if coalition.is_empty() || coalition.max_agent() >= Some(config.num_agents) {
                return Err(EnvError::Policy(format!(
                    "stage for '{}' has an invalid coalition",
                    config.tasks[task].name
                )));
            }
        }
        Ok(ScriptedPolicy {
            stages,
            cells: config.tasks.iter().map(|t| t.cell).collect(),
            actions: env.actions().to_vec(),
            num_agents: config.num_agents,
            epsilon,
        })
    }

    pub fn from_stages(
        env: &dyn Environment,
        stages: &[ScriptStage],
        epsilon: f64,
    ) -> Result<Self, EnvError> {
        let domain = env.config().domain();
        let resolved = stages
            .iter()
            .map(|s| {
                let task = domain
                    .task_index(&s.task)
                    .ok_or_else(|| EnvError::Policy(format!("unknown task '{}'", s.task)))?;
                let coalition = s
                    .agents
                    .iter()
                    .map(|a| {
                        domain
                            .agent_index(a)
                            .ok_or_else(|| EnvError::Policy(format!("unknown agent '{a}'")))
                    })
                    .collect::<Result<Coalition, _>>()?;
                Ok((task, coalition))
            })
            .collect::<Result<Vec<_>, EnvError>>()?;
        Self::new(env, resolved, epsilon)
    }

    /// The noise-free action of every agent.
    pub fn scripted_action(&self, state: &JointState) -> JointAction {
        let current = self
            .stages
            .iter()
            .position(|&(task, _)| !state.task_done[task]);
        let actions = (0..self.num_agents)
            .map(|agent| {
                let Some(cur) = current else {
                    return Action::Stay;
                };
                let pos = state.agents[agent];
                let (task, coalition) = self.stages[cur];
                if coalition.contains(agent) {
                    let cell = self.cells[task];
                    if [pos.x, pos.y] != cell {
                        return step_toward(pos, cell);
                    }
                    let all_here = coalition.iter().all(|m| {
                        let p = state.agents[m];
                        [p.x, p.y] == cell
                    });
                    return if all_here { Action::Act } else { Action::Stay };
                }
                let next = self.stages[cur..]
                    .iter()
                    .find(|&&(t, c)| c.contains(agent) && !state.task_done[t]);
                match next {
                    Some(&(t, _)) => step_toward(pos, self.cells[t]),
                    None => Action::Stay,
                }
            })
            .collect();
        JointAction(actions)
    }
}

fn step_toward(pos: AgentState, cell: [i32; 2]) -> Action {
    if pos.x < cell[0] {
        Action::Right
    } else if pos.x > cell[0] {
        Action::Left
    } else if pos.y < cell[1] {
        Action::Down
    } else if pos.y > cell[1] {
        Action::Up
    } else {
        Action::Stay
    }
}

impl Policy for ScriptedPolicy {
    fn sample(&self, state: &JointState, rng: &mut ChaCha8Rng) -> JointAction {
        let mut action = self.scripted_action(state);
        if self.epsilon > 0.0 {
            for a in action.0.iter_mut() {
                if rng.gen::<f64>() < self.epsilon {
                    *a = self.actions[rng.gen_range(0..self.actions.len())];
                }
            }
        }
        action
    }

    fn distribution(&self, state: &JointState) -> Option<Vec<(f64, JointAction)>> {
        (self.epsilon == 0.0).then(|| vec![(1.0, self.scripted_action(state))])
    }
}

/// Explicit action distributions keyed by serialized joint state, with a
/// fallback distribution for states the table does not list.
#[derive(Clone, Debug)]
pub struct TabularPolicy {
    table: HashMap<String, Vec<(f64, JointAction)>>,
    default: Vec<(f64, JointAction)>,
}

impl TabularPolicy {
    pub fn new(
        env: &dyn Environment,
        default: &[ActionChoice],
        entries: &[TabularEntry],
    ) -> Result<Self, EnvError> {
        let n = env.config().num_agents;
        let stay = vec![(1.0, JointAction::uniform(n, Action::Stay))];
        let default = if default.is_empty() {
            stay
        } else {
            check_distribution(env, default)?
        };
        let mut table = HashMap::new();
        for entry in entries {
            env.check_state(&entry.state)?;
            let dist = check_distribution(env, &entry.actions)?;
            if table.insert(entry.state.key(), dist).is_some() {
                return Err(EnvError::Policy(format!(
                    "state listed twice: {}",
                    entry.state.key()
                )));
            }
        }
        Ok(TabularPolicy { table, default })
    }

    fn lookup(&self, state: &JointState) -> &[(f64, JointAction)] {
        self.table
            .get(&state.key())
            .map(Vec::as_slice)
            .unwrap_or(&self.default)
    }
}

fn check_distribution(
    env: &dyn Environment,
    choices: &[ActionChoice],
) -> Result<Vec<(f64, JointAction)>, EnvError> {
    let n = env.config().num_agents;
    let total: f64 = choices.iter().map(|c| c.p).sum();
    if choices.iter().any(|c| c.p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(EnvError::Policy(format!(
            "action probabilities must be non-negative and sum to 1 (got {total})"
        )));
    }
    for c in choices {
        if c.action.0.len() != n || c.action.0.iter().any(|a| !env.actions().contains(a)) {
            return Err(EnvError::InvalidAction(format!(
                "tabular action [{}] is not valid here",
                c.action
            )));
        }
    }
    Ok(choices.iter().map(|c| (c.p, c.action.clone())).collect())
}

impl Policy for TabularPolicy {
    fn sample(&self, state: &JointState, rng: &mut ChaCha8Rng) -> JointAction {
        let dist = self.lookup(state);
        let mut u = rng.gen::<f64>();
        for (p, action) in dist {
            if u < *p {
                return action.clone();
            }
            u -= p;
        }
        dist.last().expect("non-empty distribution").1.clone()
    }

    fn distribution(&self, state: &JointState) -> Option<Vec<(f64, JointAction)>> {
        Some(self.lookup(state).to_vec())
    }
}

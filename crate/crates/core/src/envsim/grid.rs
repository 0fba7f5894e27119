use super::{
    Action, AgentState, EnvConfig, EnvError, EnvKind, Environment, JointAction, JointState,
    StepOutcome,
};
use crate::coalition::{Coalition, CompletionEvent};

const GRID_ACTIONS: [Action; 6] = Action::ALL;
const CHAIN_ACTIONS: [Action; 4] = [Action::Left, Action::Right, Action::Stay, Action::Act];

/// Grid environment with co-located cooperative tasks.
///
/// A task completes when at least its required number of agents stand on its
/// cell and all choose `act` on the same step; the completing coalition is
/// every acting agent on that cell. Acting agents stay put, everyone else
/// moves (clamped to the grid). In the plate-chain variant an unfinished task
/// also blocks movement from its column to the next one.
#[derive(Clone, Debug)]
pub struct TaskGrid {
    config: EnvConfig,
}

impl TaskGrid {
    pub fn new(config: EnvConfig) -> Self {
        TaskGrid { config }
    }

    fn check_action(&self, action: &JointAction) -> Result<(), EnvError> {
        if action.0.len() != self.config.num_agents {
            return Err(EnvError::InvalidAction(format!(
                "joint action has {} entries for {} agents",
                action.0.len(),
                self.config.num_agents
            )));
        }
        if let Some(bad) = action.0.iter().find(|a| !self.actions().contains(a)) {
            return Err(EnvError::InvalidAction(format!(
                "'{}' is not available in a {:?} environment",
                bad.name(),
                self.config.kind
            )));
        }
        Ok(())
    }

    fn blocked_right(&self, state: &JointState, column: i32) -> bool {
        self.config.kind == EnvKind::PlateChain
            && self
                .config
                .tasks
                .iter()
                .zip(&state.task_done)
                .any(|(t, &done)| !done && t.cell[0] == column)
    }

    fn moved(&self, state: &JointState, pos: AgentState, action: Action) -> AgentState {
        let (dx, dy) = match action {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Stay | Action::Act => (0, 0),
        };
        if dx > 0 && self.blocked_right(state, pos.x) {
            return pos;
        }
        let next = [pos.x + dx, pos.y + dy];
        if self.config.grid.contains(next) {
            next.into()
        } else {
            pos
        }
    }
}

impl Environment for TaskGrid {
    fn config(&self) -> &EnvConfig {
        &self.config
    }

    fn initial_state(&self) -> JointState {
        JointState {
            agents: self.config.agents_start.iter().map(|&c| c.into()).collect(),
            task_done: vec![false; self.config.num_tasks()],
        }
    }

    fn actions(&self) -> &[Action] {
        match self.config.kind {
            EnvKind::SearchRescue => &GRID_ACTIONS,
            EnvKind::PlateChain => &CHAIN_ACTIONS,
        }
    }

    fn check_state(&self, state: &JointState) -> Result<(), EnvError> {
        if state.agents.len() != self.config.num_agents {
            return Err(EnvError::IncompatibleState(format!(
                "state has {} agents, environment has {}",
                state.agents.len(),
                self.config.num_agents
            )));
        }
        if state.task_done.len() != self.config.num_tasks() {
            return Err(EnvError::IncompatibleState(format!(
                "state tracks {} tasks, environment has {}",
                state.task_done.len(),
                self.config.num_tasks()
            )));
        }
        if let Some(p) = state
            .agents
            .iter()
            .find(|p| !self.config.grid.contains([p.x, p.y]))
        {
            return Err(EnvError::IncompatibleState(format!(
                "agent position {:?} outside the grid",
                [p.x, p.y]
            )));
        }
        Ok(())
    }

    fn transition(
        &self,
        state: &JointState,
        action: &JointAction,
    ) -> Result<StepOutcome, EnvError> {
        self.check_state(state)?;
        self.check_action(action)?;

        let mut events = Vec::new();
        for (task, spec) in self.config.tasks.iter().enumerate() {
            if state.task_done[task] {
                continue;
            }
            let acting: Coalition = state
                .agents
                .iter()
                .zip(&action.0)
                .enumerate()
                .filter(|(_, (pos, &a))| a == Action::Act && [pos.x, pos.y] == spec.cell)
                .map(|(agent, _)| agent)
                .collect();
            if acting.len() >= spec.required_coalition_size {
                events.push(CompletionEvent::new(task, acting));
            }
        }

        let agents = state
            .agents
            .iter()
            .zip(&action.0)
            .map(|(&pos, &a)| self.moved(state, pos, a))
            .collect();
        let mut task_done = state.task_done.clone();
        let mut rewards = vec![0.0; self.config.num_agents];
        for e in &events {
            task_done[e.task] = true;
            for agent in e.coalition.iter() {
                rewards[agent] = 1.0;
            }
        }
        Ok(StepOutcome {
            next_state: JointState { agents, task_done },
            rewards,
            events,
        })
    }
}

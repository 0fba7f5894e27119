use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::coalition::MAX_AGENTS;
use crate::domain::{AgentName, Domain, TaskName};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    /// Open grid; agents move in four directions.
    #[default]
    SearchRescue,
    /// Single corridor; each unfinished plate blocks passage to its right.
    PlateChain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize {
    pub w: i32,
    pub h: i32,
}

impl GridSize {
    pub fn contains(&self, cell: [i32; 2]) -> bool {
        (0..self.w).contains(&cell[0]) && (0..self.h).contains(&cell[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskSpec {
    pub name: String,
    pub cell: [i32; 2],
    /// Minimum number of agents that must act together on the cell.
    #[serde(rename = "coalition")]
    pub required_coalition_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gerund: Option<String>,
}

fn default_max_steps() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvConfig {
    #[serde(default)]
    pub kind: EnvKind,
    pub num_agents: usize,
    pub grid: GridSize,
    pub tasks: Vec<TaskSpec>,
    pub agents_start: Vec<[i32; 2]>,
    #[serde(default = "default_max_steps")]
    pub max_episode_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<AgentName>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_noun: Option<String>,
}

impl EnvConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnvError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EnvError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let config: EnvConfig = serde_json::from_str(text).map_err(|e| EnvError::Config {
            message: format!("{e} (line {}, column {})", e.line(), e.column()),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |message: String| Err(EnvError::Config { message });
        if self.num_agents == 0 || self.num_agents > MAX_AGENTS {
            return bad(format!("numAgents must be in [1, {MAX_AGENTS}]"));
        }
        if self.num_agents * self.tasks.len() > 64 {
            return bad("numAgents x tasks must not exceed 64 progress bits".into());
        }
        if self.grid.w < 1 || self.grid.h < 1 {
            return bad("grid dimensions must be positive".into());
        }
        if self.kind == EnvKind::PlateChain && self.grid.h != 1 {
            return bad("plate-chain environments have a single row (h = 1)".into());
        }
        if self.agents_start.len() != self.num_agents {
            return bad(format!(
                "agentsStart has {} entries for {} agents",
                self.agents_start.len(),
                self.num_agents
            ));
        }
        if let Some(cell) = self.agents_start.iter().find(|c| !self.grid.contains(**c)) {
            return bad(format!("start cell {cell:?} outside the grid"));
        }
        let mut names = HashSet::new();
        let mut cells = HashSet::new();
        for task in &self.tasks {
            if !names.insert(task.name.as_str()) {
                return bad(format!("duplicate task name '{}'", task.name));
            }
            if !is_identifier(&task.name) {
                return bad(format!("task name '{}' is not an identifier", task.name));
            }
            if !cells.insert(task.cell) {
                return bad(format!("two tasks share cell {:?}", task.cell));
            }
            if !self.grid.contains(task.cell) {
                return bad(format!("task '{}' cell outside the grid", task.name));
            }
            if task.required_coalition_size == 0 || task.required_coalition_size > self.num_agents {
                return bad(format!(
                    "task '{}' coalition size must be in [1, {}]",
                    task.name, self.num_agents
                ));
            }
        }
        if let Some(agents) = &self.agents {
            if agents.len() != self.num_agents {
                return bad("agents list length differs from numAgents".into());
            }
            let mut ids = HashSet::new();
            for a in agents {
                if !is_identifier(&a.id) || !ids.insert(a.id.as_str()) {
                    return bad(format!("agent id '{}' invalid or duplicated", a.id));
                }
            }
        }
        if self.max_episode_steps == 0 {
            return bad("maxEpisodeSteps must be at least 1".into());
        }
        Ok(())
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task_names(&self) -> Vec<String> {
        self.tasks.iter().map(|t| t.name.clone()).collect()
    }

    pub fn domain(&self) -> Domain {
        let agents = match &self.agents {
            Some(a) => a.clone(),
            None => (0..self.num_agents).map(AgentName::default_for).collect(),
        };
        let tasks = self
            .tasks
            .iter()
            .map(|t| {
                let plain = TaskName::plain(&t.name);
                TaskName {
                    name: t.name.clone(),
                    verb: t.verb.clone().unwrap_or(plain.verb),
                    gerund: t.gerund.clone().unwrap_or(plain.gerund),
                }
            })
            .collect();
        Domain {
            agents,
            tasks,
            agent_noun: self.agent_noun.clone().unwrap_or_else(|| "agents".into()),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

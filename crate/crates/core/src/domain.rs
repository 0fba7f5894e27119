//! Names and phrasing for agents and tasks.
//!
//! A [`Domain`] is everything the query parser and the explanation templates
//! need to know about an environment: agent identifiers, the atom spelling
//! used in temporal formulas, display names, and per-task verb phrases.

use serde::{Deserialize, Serialize};

use crate::coalition::{AgentId, Coalition, TaskId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentName {
    /// Identifier used in query text, e.g. `r1`.
    pub id: String,
    /// Spelling inside formula atoms, e.g. `robotI`.
    pub atom: String,
    /// Name used in rendered sentences, e.g. `Robot I`.
    pub display: String,
}

impl AgentName {
    pub fn default_for(index: AgentId) -> Self {
        AgentName {
            id: format!("r{}", index + 1),
            atom: format!("agent{}", index + 1),
            display: format!("Agent {}", index + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskName {
    pub name: String,
    /// Base verb phrase, e.g. `fight the fire`.
    pub verb: String,
    /// Gerund phrase, e.g. `fighting the fire`.
    pub gerund: String,
}

impl TaskName {
    pub fn plain(name: &str) -> Self {
        TaskName {
            name: name.to_string(),
            verb: format!("complete {name}"),
            gerund: format!("completing {name}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Domain {
    pub agents: Vec<AgentName>,
    pub tasks: Vec<TaskName>,
    /// Plural noun for the whole team, e.g. `robots`.
    pub agent_noun: String,
}

impl Domain {
    /// Default naming for `num_agents` agents and the given task names.
    pub fn plain(num_agents: usize, tasks: &[String]) -> Self {
        Domain {
            agents: (0..num_agents).map(AgentName::default_for).collect(),
            tasks: tasks.iter().map(|t| TaskName::plain(t)).collect(),
            agent_noun: "agents".to_string(),
        }
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task_index(&self, name: &str) -> Option<TaskId> {
        self.tasks.iter().position(|t| t.name == name)
    }

    pub fn agent_index(&self, id: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn task_name(&self, task: TaskId) -> &str {
        &self.tasks[task].name
    }

    pub fn verb(&self, task: TaskId) -> &str {
        &self.tasks[task].verb
    }

    pub fn gerund(&self, task: TaskId) -> &str {
        &self.tasks[task].gerund
    }

    pub fn agent_ids(&self, coalition: Coalition) -> Vec<String> {
        coalition
            .iter()
            .map(|a| self.agents[a].id.clone())
            .collect()
    }

    /// Formula atom for a task completed by a coalition: `fire_robotII_robotIII`.
    pub fn atom(&self, task: TaskId, coalition: Coalition) -> String {
        let mut atom = self.tasks[task].name.clone();
        for a in coalition.iter() {
            atom.push('_');
            atom.push_str(&self.agents[a].atom);
        }
        atom
    }

    /// Display names joined for prose: `Robot I`, `Robot I and Robot II`,
    /// `Robot I, Robot II and Robot III`.
    pub fn display_list(&self, coalition: Coalition) -> String {
        let names: Vec<&str> = coalition
            .iter()
            .map(|a| self.agents[a].display.as_str())
            .collect();
        match names.as_slice() {
            [] => String::new(),
            [only] => only.to_string(),
            [init @ .., last] => format!("{} and {}", init.join(", "), last),
        }
    }
}

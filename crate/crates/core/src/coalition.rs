use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Zero-based agent index.
pub type AgentId = usize;
/// Zero-based index into the environment's task list.
pub type TaskId = usize;

/// Largest number of agents a coalition bitmask can hold.
pub const MAX_AGENTS: usize = 64;

/// A set of agents, stored as a bitmask over agent indices.
///
/// Ordering compares the raw masks, which is only used to keep collections
/// deterministic.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_mask(mask: u64) -> Self {
        Coalition(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn singleton(agent: AgentId) -> Self {
        assert!(agent < MAX_AGENTS, "agent index {agent} out of range");
        Coalition(1 << agent)
    }

    pub fn insert(&mut self, agent: AgentId) {
        assert!(agent < MAX_AGENTS, "agent index {agent} out of range");
        self.0 |= 1 << agent;
    }

    pub fn contains(self, agent: AgentId) -> bool {
        agent < MAX_AGENTS && self.0 & (1 << agent) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    /// Highest agent index in the set, if any.
    pub fn max_agent(self) -> Option<AgentId> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Agents in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = AgentId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let agent = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(agent)
        })
    }
}

impl FromIterator<AgentId> for Coalition {
    fn from_iter<I: IntoIterator<Item = AgentId>>(iter: I) -> Self {
        let mut c = Coalition::EMPTY;
        for a in iter {
            c.insert(a);
        }
        c
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Coalition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Coalition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let agents = Vec::<AgentId>::deserialize(deserializer)?;
        if let Some(bad) = agents.iter().find(|&&a| a >= MAX_AGENTS) {
            return Err(serde::de::Error::custom(format!(
                "agent index {bad} out of range"
            )));
        }
        Ok(agents.into_iter().collect())
    }
}

/// A task completed by an exact coalition on one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompletionEvent {
    pub task: TaskId,
    pub coalition: Coalition,
}

impl CompletionEvent {
    pub fn new(task: TaskId, coalition: Coalition) -> Self {
        CompletionEvent { task, coalition }
    }
}

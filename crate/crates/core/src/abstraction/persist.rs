use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{events_of, AbstractionError, Mmdp, ProgressMatrix, SampleSet, StateId};
use crate::envsim::{EnvConfig, JointAction, JointState};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct MmdpFile {
    version: u64,
    num_agents: usize,
    tasks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    env: Option<EnvConfig>,
    #[serde(default = "default_cap")]
    sample_cap: usize,
    states: Vec<StateRecord>,
    initial: StateId,
    transitions: Vec<TransitionRecord>,
    visit_counts: Vec<u64>,
    samples: Vec<SampleRecord>,
}

fn default_cap() -> usize {
    super::DEFAULT_SAMPLE_CAP
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    id: StateId,
    bits: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRecord {
    src: StateId,
    action: JointAction,
    targets: Vec<TargetRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetRecord {
    dst: StateId,
    count: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    state: StateId,
    seen: u64,
    states: Vec<JointState>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

fn parse_error(e: serde_json::Error) -> AbstractionError {
    AbstractionError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl Mmdp {
    pub fn to_json(&self) -> String {
        let file = MmdpFile {
            version: FORMAT_VERSION,
            num_agents: self.num_agents,
            tasks: self.tasks.clone(),
            env: self.env.clone(),
            sample_cap: self.sample_cap,
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, s)| StateRecord {
                    id,
                    bits: s.to_string(),
                })
                .collect(),
            initial: self.initial(),
            transitions: self
                .transitions
                .iter()
                .map(|((src, action), targets)| TransitionRecord {
                    src: *src,
                    action: action.clone(),
                    targets: targets
                        .iter()
                        .map(|(&dst, &count)| TargetRecord { dst, count })
                        .collect(),
                })
                .collect(),
            visit_counts: self.visit_counts.clone(),
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(state, s)| SampleRecord {
                    state,
                    seen: s.seen,
                    states: s.states.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("MMDP serializes")
    }

    pub fn from_json(text: &str) -> Result<Mmdp, AbstractionError> {
        let probe: VersionProbe = serde_json::from_str(text).map_err(parse_error)?;
        if probe.version != FORMAT_VERSION {
            return Err(AbstractionError::UnsupportedVersion {
                found: probe.version,
                expected: FORMAT_VERSION,
            });
        }
        let file: MmdpFile = serde_json::from_str(text).map_err(parse_error)?;
        from_file(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AbstractionError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| AbstractionError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mmdp, AbstractionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AbstractionError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }
}

fn from_file(file: MmdpFile) -> Result<Mmdp, AbstractionError> {
    let invalid = |m: String| Err(AbstractionError::Invalid(m));
    let (n, g) = (file.num_agents, file.tasks.len());
    if n == 0 || n * g > 64 {
        return invalid(format!("unsupported shape {n} agents x {g} tasks"));
    }
    if let Some(env) = &file.env {
        env.validate()?;
        if env.num_agents != n || env.task_names() != file.tasks {
            return invalid("embedded environment disagrees with numAgents/tasks".into());
        }
    }
    if file.initial != 0 {
        return invalid("initial state must have id 0".into());
    }
    let count = file.states.len();
    if count == 0 {
        return invalid("no states".into());
    }
    let mut states = Vec::with_capacity(count);
    let mut index = HashMap::new();
    for (expected, rec) in file.states.iter().enumerate() {
        if rec.id != expected {
            return invalid(format!("state ids must be 0..{count} in order"));
        }
        let Some(m) = ProgressMatrix::parse(&rec.bits, n, g) else {
            return invalid(format!(
                "state {} has malformed bits '{}'",
                rec.id, rec.bits
            ));
        };
        if index.insert(m, rec.id).is_some() {
            return invalid(format!("duplicate progress matrix {m}"));
        }
        states.push(m);
    }
    if states[0].bits() != 0 {
        return invalid("initial state must be the all-false matrix".into());
    }

    let mut transitions: BTreeMap<(StateId, JointAction), BTreeMap<StateId, u64>> = BTreeMap::new();
    for t in file.transitions {
        if t.src >= count {
            return invalid(format!("transition source {} out of range", t.src));
        }
        if t.action.0.len() != n {
            return invalid(format!("action [{}] has the wrong arity", t.action));
        }
        if t.targets.is_empty() {
            return invalid(format!("transition from {} has no targets", t.src));
        }
        let entry = transitions.entry((t.src, t.action)).or_default();
        for target in t.targets {
            if target.dst >= count || target.count == 0 {
                return invalid(format!(
                    "target {} (count {}) invalid",
                    target.dst, target.count
                ));
            }
            events_of(&states[t.src], &states[target.dst])?;
            if entry.insert(target.dst, target.count).is_some() {
                return invalid(format!("duplicate target {}", target.dst));
            }
        }
    }

    if file.visit_counts.len() != count {
        return invalid("visitCounts length differs from state count".into());
    }
    let mut samples = vec![SampleSet::default(); count];
    for rec in file.samples {
        if rec.state >= count {
            return invalid(format!("samples for unknown state {}", rec.state));
        }
        if (rec.seen as usize) < rec.states.len() {
            return invalid(format!(
                "sample set {} claims fewer offers than it holds",
                rec.state
            ));
        }
        samples[rec.state] = SampleSet {
            states: rec.states,
            seen: rec.seen,
        };
    }

    Ok(Mmdp {
        num_agents: n,
        tasks: file.tasks,
        env: file.env,
        states,
        index,
        transitions,
        visit_counts: file.visit_counts,
        samples,
        sample_cap: file.sample_cap.max(1),
    })
}

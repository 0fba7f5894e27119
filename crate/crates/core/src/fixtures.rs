//! Built-in example environments and policies.
//!
//! `sr3` is the three-robot search-and-rescue scene (fire, obstacle, victim)
//! whose scripted plan is: robots II and III fight the fire, robots I and II
//! remove the obstacle, robots I and III rescue the victim. The other
//! fixtures cover the plate chain, a two-ordering scene for guided rollout,
//! and a five-agent scene for desk-scale timing.

use std::path::{Path, PathBuf};

use crate::abstraction::{build_mmdp, AbstractionError, Mmdp};
use crate::coalition::Coalition;
use crate::domain::AgentName;
use crate::envsim::{
    Action, ActionChoice, EnvConfig, EnvError, EnvKind, Environment, GridSize, JointAction,
    JointState, PolicyFile, ScriptStage, ScriptedPolicy, TabularEntry, TabularPolicy, TaskGrid,
    TaskSpec,
};

const ROMAN: [&str; 8] = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII"];

fn robots(n: usize) -> Vec<AgentName> {
    (0..n)
        .map(|i| AgentName {
            id: format!("r{}", i + 1),
            atom: format!("robot{}", ROMAN[i]),
            display: format!("Robot {}", ROMAN[i]),
        })
        .collect()
}

fn task(name: &str, cell: [i32; 2], size: usize, verb: &str, gerund: &str) -> TaskSpec {
    TaskSpec {
        name: name.into(),
        cell,
        required_coalition_size: size,
        verb: Some(verb.into()),
        gerund: Some(gerund.into()),
    }
}

fn coalition(agents: &[usize]) -> Coalition {
    agents.iter().copied().collect()
}

pub fn sr3_config() -> EnvConfig {
    EnvConfig {
        kind: EnvKind::SearchRescue,
        num_agents: 3,
        grid: GridSize { w: 5, h: 5 },
        tasks: vec![
            task("fire", [4, 2], 2, "fight the fire", "fighting the fire"),
            task(
                "obstacle",
                [0, 2],
                2,
                "remove the obstacle",
                "removing the obstacle",
            ),
            task(
                "victim",
                [2, 4],
                2,
                "rescue the victim",
                "rescuing the victim",
            ),
        ],
        agents_start: vec![[0, 4], [2, 2], [4, 4]],
        max_episode_steps: 10_000,
        agents: Some(robots(3)),
        agent_noun: Some("robots".into()),
    }
}

pub fn sr3_env() -> TaskGrid {
    TaskGrid::new(sr3_config())
}

/// fire by {II, III}, then obstacle by {I, II}, then victim by {I, III}.
pub fn sr3_policy(epsilon: f64) -> ScriptedPolicy {
    ScriptedPolicy::new(
        &sr3_env(),
        vec![
            (0, coalition(&[1, 2])),
            (1, coalition(&[0, 1])),
            (2, coalition(&[0, 2])),
        ],
        epsilon,
    )
    .expect("valid sr3 script")
}

/// The four-state chain abstraction of one noise-free sr3 episode.
pub fn sr3_chain_mmdp() -> Mmdp {
    build_mmdp(&sr3_env(), &sr3_policy(0.0), 1, 200, 0).expect("sr3 episode")
}

/// A corridor with three plates at columns 2, 4 and 6; every agent starts in
/// column 0.
pub fn plate_chain_config(num_agents: usize) -> EnvConfig {
    let size = |k: usize| k.min(num_agents);
    EnvConfig {
        kind: EnvKind::PlateChain,
        num_agents,
        grid: GridSize { w: 8, h: 1 },
        tasks: vec![
            task(
                "plate1",
                [2, 0],
                size(1),
                "press plate one",
                "pressing plate one",
            ),
            task(
                "plate2",
                [4, 0],
                size(2),
                "press plate two",
                "pressing plate two",
            ),
            task(
                "plate3",
                [6, 0],
                size(2),
                "press plate three",
                "pressing plate three",
            ),
        ],
        agents_start: vec![[0, 0]; num_agents],
        max_episode_steps: 500,
        agents: None,
        agent_noun: None,
    }
}

pub fn two_ordering_config() -> EnvConfig {
    EnvConfig {
        kind: EnvKind::SearchRescue,
        num_agents: 2,
        grid: GridSize { w: 3, h: 1 },
        tasks: vec![
            task(
                "left",
                [0, 0],
                1,
                "clear the left site",
                "clearing the left site",
            ),
            task(
                "right",
                [2, 0],
                1,
                "clear the right site",
                "clearing the right site",
            ),
        ],
        agents_start: vec![[0, 0], [2, 0]],
        max_episode_steps: 50,
        agents: None,
        agent_noun: None,
    }
}

/// Two single-agent tasks whose order is a coin flip on the first step:
/// `left` first with probability 0.7, `right` first with probability 0.3.
pub fn two_ordering() -> (TaskGrid, TabularPolicy) {
    let env = TaskGrid::new(two_ordering_config());
    let entries = two_ordering_entries(&env);
    let policy = TabularPolicy::new(&env, &[], &entries).expect("valid table");
    (env, policy)
}

fn two_ordering_entries(env: &TaskGrid) -> Vec<TabularEntry> {
    let start = env.initial_state();
    let with_done = |done: [bool; 2]| JointState {
        agents: start.agents.clone(),
        task_done: done.to_vec(),
    };
    let ja = |a: Action, b: Action| JointAction(vec![a, b]);
    let choice = |p: f64, action: JointAction| ActionChoice { p, action };
    vec![
        TabularEntry {
            state: with_done([false, false]),
            actions: vec![
                choice(0.7, ja(Action::Act, Action::Stay)),
                choice(0.3, ja(Action::Stay, Action::Act)),
            ],
        },
        TabularEntry {
            state: with_done([true, false]),
            actions: vec![choice(1.0, ja(Action::Stay, Action::Act))],
        },
        TabularEntry {
            state: with_done([false, true]),
            actions: vec![choice(1.0, ja(Action::Act, Action::Stay))],
        },
    ]
}

/// Five robots, five tasks; every task needs two robots.
pub fn sr5_config() -> EnvConfig {
    EnvConfig {
        kind: EnvKind::SearchRescue,
        num_agents: 5,
        grid: GridSize { w: 7, h: 7 },
        tasks: vec![
            task("fire", [6, 3], 2, "fight the fire", "fighting the fire"),
            task(
                "obstacle",
                [0, 3],
                2,
                "remove the obstacle",
                "removing the obstacle",
            ),
            task(
                "victim",
                [3, 6],
                2,
                "rescue the victim",
                "rescuing the victim",
            ),
            task(
                "debris",
                [3, 0],
                2,
                "clear the debris",
                "clearing the debris",
            ),
            task(
                "supply",
                [6, 6],
                2,
                "deliver the supplies",
                "delivering the supplies",
            ),
        ],
        agents_start: vec![[0, 6], [3, 3], [6, 0], [0, 0], [4, 4]],
        max_episode_steps: 10_000,
        agents: Some(robots(5)),
        agent_noun: Some("robots".into()),
    }
}

pub fn sr5_env() -> TaskGrid {
    TaskGrid::new(sr5_config())
}

/// fire {II,III}, obstacle {I,II}, victim {I,V}, debris {III,IV}, supply {IV,V}.
pub fn sr5_policy(epsilon: f64) -> ScriptedPolicy {
    ScriptedPolicy::new(
        &sr5_env(),
        vec![
            (0, coalition(&[1, 2])),
            (1, coalition(&[0, 1])),
            (2, coalition(&[0, 4])),
            (3, coalition(&[2, 3])),
            (4, coalition(&[3, 4])),
        ],
        epsilon,
    )
    .expect("valid sr5 script")
}

/// Scripted policy that presses the plates left to right with everyone.
pub fn plate_chain_policy(env: &TaskGrid, epsilon: f64) -> ScriptedPolicy {
    let everyone: Coalition = (0..env.config().num_agents).collect();
    ScriptedPolicy::new(env, (0..3).map(|t| (t, everyone)).collect(), epsilon)
        .expect("valid plate script")
}

fn scripted_file(stages: &[(&str, &[&str])], epsilon: f64) -> PolicyFile {
    PolicyFile::Scripted {
        epsilon,
        stages: stages
            .iter()
            .map(|(task, agents)| ScriptStage {
                task: task.to_string(),
                agents: agents.iter().map(|a| a.to_string()).collect(),
            })
            .collect(),
    }
}

/// File form of [`sr3_policy`].
pub fn sr3_policy_file(epsilon: f64) -> PolicyFile {
    scripted_file(
        &[
            ("fire", &["r2", "r3"]),
            ("obstacle", &["r1", "r2"]),
            ("victim", &["r1", "r3"]),
        ],
        epsilon,
    )
}

/// File form of [`sr5_policy`].
pub fn sr5_policy_file(epsilon: f64) -> PolicyFile {
    scripted_file(
        &[
            ("fire", &["r2", "r3"]),
            ("obstacle", &["r1", "r2"]),
            ("victim", &["r1", "r5"]),
            ("debris", &["r3", "r4"]),
            ("supply", &["r4", "r5"]),
        ],
        epsilon,
    )
}

/// File form of the [`two_ordering`] policy.
pub fn two_ordering_policy_file() -> PolicyFile {
    let env = TaskGrid::new(two_ordering_config());
    PolicyFile::Tabular {
        default: Vec::new(),
        entries: two_ordering_entries(&env),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Writes every fixture as a JSON file into `dir`: environment and policy
/// files, the sr3 single-episode abstraction, and a service config for the
/// sr3 scene. Returns the written paths.
pub fn write_fixture_files(dir: &Path) -> Result<Vec<PathBuf>, FixtureError> {
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), FixtureError> {
        let path = dir.join(name);
        std::fs::write(&path, text + "\n").map_err(|e| FixtureError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        written.push(path);
        Ok(())
    };
    put("sr3.env.json", json(&sr3_config()))?;
    put("sr3.policy.json", json(&sr3_policy_file(0.0)))?;
    put("sr3-noisy.policy.json", json(&sr3_policy_file(0.2)))?;
    put("sr3-chain.mmdp.json", sr3_chain_mmdp().to_json())?;
    put("two-ordering.env.json", json(&two_ordering_config()))?;
    put(
        "two-ordering.policy.json",
        json(&two_ordering_policy_file()),
    )?;
    put("sr5.env.json", json(&sr5_config()))?;
    put("sr5.policy.json", json(&sr5_policy_file(0.2)))?;
    put("plate-chain.env.json", json(&plate_chain_config(3)))?;
    put(
        "sr3.config.json",
        serde_json::to_string_pretty(&serde_json::json!({
            "envConfig": "sr3.env.json",
            "policy": "sr3.policy.json",
            "episodes": 1,
            "maxSteps": 200,
            "seed": 0,
        }))
        .expect("json"),
    )?;
    Ok(written)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("fixture serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envsim::load_policy;

    #[test]
    fn written_files_reproduce_the_fixtures() {
        let dir = std::env::temp_dir().join(format!("fixtures-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        write_fixture_files(&dir).unwrap();

        let config = EnvConfig::load(dir.join("sr3.env.json")).unwrap();
        assert_eq!(config, sr3_config());
        let env = TaskGrid::new(config);
        let policy = load_policy(dir.join("sr3.policy.json"), &env).unwrap();
        let rebuilt = build_mmdp(&env, policy.as_ref(), 1, 200, 0).unwrap();
        assert_eq!(rebuilt, sr3_chain_mmdp());
        assert_eq!(
            Mmdp::load(dir.join("sr3-chain.mmdp.json")).unwrap(),
            sr3_chain_mmdp()
        );

        let env = TaskGrid::new(EnvConfig::load(dir.join("two-ordering.env.json")).unwrap());
        let policy = load_policy(dir.join("two-ordering.policy.json"), &env).unwrap();
        let (fixture_env, fixture_policy) = two_ordering();
        assert_eq!(
            build_mmdp(&env, policy.as_ref(), 5, 50, 9).unwrap(),
            build_mmdp(&fixture_env, &fixture_policy, 5, 50, 9).unwrap()
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

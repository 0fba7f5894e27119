//! End-to-end query answering: check the query against the abstraction; if
//! it is infeasible, enrich the abstraction with guided rollouts and check
//! again; if it is still infeasible, explain why.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::abstraction::{build_mmdp, AbstractionError, Mmdp};
use crate::checker::{check_feasible, WitnessStep};
use crate::domain::Domain;
use crate::envsim::{load_environment, load_policy, EnvConfig, EnvError, Environment, Policy};
use crate::explainer::{explain, ExplainError, ExplainOptions, ExplanationReport, QmOptionsConfig};
use crate::querylang::{parse_query, validate, QueryError, TemporalQuery};
use crate::rollout::{guided_rollout, RolloutError, RolloutParams, RolloutStats};

/// Environment variable naming a [`RunConfig`] file.
pub const CONFIG_ENV_VAR: &str = "MARX_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub env_config: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    pub episodes: usize,
    pub max_steps: usize,
    pub rollout_num: usize,
    pub depth_limit: usize,
    pub seed: u64,
    pub mmdp_cache_path: Option<PathBuf>,
    pub explain: ExplainOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env_config: None,
            policy: None,
            episodes: 200,
            max_steps: 10_000,
            rollout_num: 10,
            depth_limit: 50,
            seed: 0,
            mmdp_cache_path: None,
            explain: ExplainOptions {
                qm: QmOptionsConfig {
                    max_vars: 32,
                    ..Default::default()
                },
            },
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.env_config,
            &mut config.policy,
            &mut config.mmdp_cache_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// The file named by `MARX_CONFIG`, or the defaults when it is unset.
    pub fn from_env() -> Result<Self, ServiceError> {
        match std::env::var_os(CONFIG_ENV_VAR) {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: &str| Err(ServiceError::Config(m.to_string()));
        if self.episodes == 0 {
            return bad("episodes must be at least 1");
        }
        if self.max_steps == 0 {
            return bad("maxSteps must be at least 1");
        }
        if self.depth_limit == 0 {
            return bad("depthLimit must be at least 1");
        }
        Ok(())
    }

    pub fn rollout_params(&self) -> RolloutParams {
        RolloutParams {
            rollout_num: self.rollout_num,
            depth_limit: self.depth_limit,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Rollout(#[from] RolloutError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ServiceError {
    /// Stage the error comes from.
    pub fn module(&self) -> &'static str {
        match self {
            ServiceError::Query(_) | ServiceError::InvalidQuery(_) => "querylang",
            ServiceError::Env(_) => "envsim",
            ServiceError::Abstraction(_) => "abstraction",
            ServiceError::Rollout(_) => "rollout",
            ServiceError::Explain(_) => "explainer",
            ServiceError::Config(_) | ServiceError::Io { .. } => "service",
        }
    }

    /// Short machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Query(_) => "ParseError",
            ServiceError::InvalidQuery(_) => "ValidationError",
            ServiceError::Env(_) => "EnvironmentError",
            ServiceError::Abstraction(_) => "AbstractionError",
            ServiceError::Rollout(_) => "RolloutError",
            ServiceError::Explain(_) => "ExplainError",
            ServiceError::Config(_) => "ConfigError",
            ServiceError::Io { .. } => "IoError",
        }
    }

    /// Whether the caller's input (rather than the system) is at fault.
    pub fn is_user_error(&self) -> bool {
        matches!(self, ServiceError::Query(_) | ServiceError::InvalidQuery(_))
    }
}

/// Parses and validates query text against `domain`.
pub fn parse_valid_query(text: &str, domain: &Domain) -> Result<TemporalQuery, ServiceError> {
    let query = parse_query(text, domain)?;
    let problems: Vec<String> = validate(&query, domain)
        .iter()
        .map(|v| v.describe(domain))
        .collect();
    if !problems.is_empty() {
        return Err(ServiceError::InvalidQuery(problems.join("; ")));
    }
    Ok(query)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    pub abstraction_ms: f64,
    pub check_ms: f64,
    pub rollout_ms: f64,
    pub explain_ms: f64,
}

impl Timings {
    pub fn total_ms(&self) -> f64 {
        self.abstraction_ms + self.check_ms + self.rollout_ms + self.explain_ms
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MmdpStats {
    pub num_states: usize,
    pub num_transitions: usize,
}

impl MmdpStats {
    pub fn of(mmdp: &Mmdp) -> Self {
        MmdpStats {
            num_states: mmdp.num_states(),
            num_transitions: mmdp.num_transitions(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum Verdict {
    Feasible { witness: Vec<WitnessStep> },
    Infeasible { report: ExplanationReport },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryAnswer {
    pub query: TemporalQuery,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub timings: Timings,
    pub mmdp_stats: MmdpStats,
    /// Present when rollouts ran.
    pub rollout: Option<RolloutStats>,
}

impl QueryAnswer {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Verdict::Feasible { .. })
    }

    pub fn report(&self) -> Option<&ExplanationReport> {
        match &self.verdict {
            Verdict::Infeasible { report } => Some(report),
            Verdict::Feasible { .. } => None,
        }
    }

    /// Structured document with task and agent names, as served over HTTP
    /// and printed by `--format structured`.
    pub fn to_document(&self, mmdp: &Mmdp, domain: &Domain) -> serde_json::Value {
        let mut doc = json!({
            "query": self.query.render(domain),
            "timings": self.timings,
            "mmdpStats": self.mmdp_stats,
            "rollout": self.rollout,
        });
        match &self.verdict {
            Verdict::Feasible { witness } => {
                doc["verdict"] = json!("feasible");
                doc["witness"] = witness_document(witness, mmdp, domain);
            }
            Verdict::Infeasible { report } => {
                doc["verdict"] = json!("infeasible");
                doc["report"] = report.to_document(domain);
            }
        }
        doc
    }
}

pub fn witness_document(
    witness: &[WitnessStep],
    mmdp: &Mmdp,
    domain: &Domain,
) -> serde_json::Value {
    witness
        .iter()
        .map(|w| {
            json!({
                "src": w.src,
                "dst": w.dst,
                "srcLabel": mmdp.state(w.src).to_string(),
                "dstLabel": mmdp.state(w.dst).to_string(),
                "action": w.action,
                "count": w.count,
                "events": w.events.iter().map(|e| json!({
                    "task": domain.task_name(e.task),
                    "coalition": domain.agent_ids(e.coalition),
                })).collect::<Vec<_>>(),
            })
        })
        .collect()
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// The read-only first check: `Some` answer when the query is already
/// feasible. Never touches the abstraction.
pub fn answer_if_feasible(mmdp: &Mmdp, query: &TemporalQuery) -> Option<QueryAnswer> {
    let start = Instant::now();
    let result = check_feasible(mmdp, query);
    let check_ms = ms_since(start);
    result.witness.map(|witness| QueryAnswer {
        query: query.clone(),
        verdict: Verdict::Feasible { witness },
        timings: Timings {
            check_ms,
            ..Default::default()
        },
        mmdp_stats: MmdpStats::of(mmdp),
        rollout: None,
    })
}

/// Answers one query. Rollouts run only when an environment and policy are
/// supplied and `config.rollout_num > 0`; they extend `mmdp` in place.
/// `timings.abstraction_ms` is left at zero for the caller to fill in.
pub fn answer_query(
    mmdp: &mut Mmdp,
    sampler: Option<(&dyn Environment, &dyn Policy)>,
    query: &TemporalQuery,
    config: &RunConfig,
) -> Result<QueryAnswer, ServiceError> {
    if let Some(answer) = answer_if_feasible(mmdp, query) {
        return Ok(answer);
    }
    let mut timings = Timings::default();
    let mut rollout = None;
    if let Some((env, policy)) = sampler.filter(|_| config.rollout_num > 0) {
        let start = Instant::now();
        let stats = guided_rollout(mmdp, env, policy, query, &config.rollout_params())?;
        timings.rollout_ms = ms_since(start);
        rollout = Some(stats);

        let start = Instant::now();
        let result = check_feasible(mmdp, query);
        timings.check_ms = ms_since(start);
        if let Some(witness) = result.witness {
            return Ok(QueryAnswer {
                query: query.clone(),
                verdict: Verdict::Feasible { witness },
                timings,
                mmdp_stats: MmdpStats::of(mmdp),
                rollout,
            });
        }
    }
    let start = Instant::now();
    let report = explain(mmdp, query, &config.explain)?;
    timings.explain_ms = ms_since(start);
    Ok(QueryAnswer {
        query: query.clone(),
        verdict: Verdict::Infeasible { report },
        timings,
        mmdp_stats: MmdpStats::of(mmdp),
        rollout,
    })
}

/// An environment, its policy and their abstraction, set up from a
/// [`RunConfig`].
pub struct Workspace {
    pub config: RunConfig,
    env: Box<dyn Environment>,
    policy: Box<dyn Policy>,
    pub mmdp: Mmdp,
    /// Time spent building (or loading) the current abstraction.
    pub abstraction_ms: f64,
}

impl Workspace {
    /// Loads the environment and policy named in `config`, then loads the
    /// cached abstraction if it matches the environment, or builds (and
    /// caches) a fresh one.
    pub fn open(config: RunConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let env_path = config
            .env_config
            .as_ref()
            .ok_or_else(|| ServiceError::Config("envConfig is required".into()))?;
        let policy_path = config
            .policy
            .as_ref()
            .ok_or_else(|| ServiceError::Config("policy is required".into()))?;
        let env = load_environment(EnvConfig::load(env_path)?)?;
        let policy = load_policy(policy_path, env.as_ref())?;

        let start = Instant::now();
        let cached = match &config.mmdp_cache_path {
            Some(path) if path.exists() => {
                let m = Mmdp::load(path)?;
                (m.env_config() == Some(env.config())).then_some(m)
            }
            _ => None,
        };
        let mmdp = match cached {
            Some(m) => m,
            None => {
                let m = build_mmdp(
                    env.as_ref(),
                    policy.as_ref(),
                    config.episodes,
                    config.max_steps,
                    config.seed,
                )?;
                if let Some(path) = &config.mmdp_cache_path {
                    m.save(path)?;
                }
                m
            }
        };
        let abstraction_ms = ms_since(start);
        Ok(Workspace {
            config,
            env,
            policy,
            mmdp,
            abstraction_ms,
        })
    }

    pub fn from_parts(
        config: RunConfig,
        env: Box<dyn Environment>,
        policy: Box<dyn Policy>,
        mmdp: Mmdp,
    ) -> Self {
        Workspace {
            config,
            env,
            policy,
            mmdp,
            abstraction_ms: 0.0,
        }
    }

    pub fn domain(&self) -> Domain {
        self.env.config().domain()
    }

    pub fn env(&self) -> &dyn Environment {
        self.env.as_ref()
    }

    pub fn policy(&self) -> &dyn Policy {
        self.policy.as_ref()
    }

    /// Samples a fresh abstraction with the configured budget, without
    /// installing it.
    pub fn build(&self) -> Result<(Mmdp, f64), ServiceError> {
        let start = Instant::now();
        let m = build_mmdp(
            self.env.as_ref(),
            self.policy.as_ref(),
            self.config.episodes,
            self.config.max_steps,
            self.config.seed,
        )?;
        Ok((m, ms_since(start)))
    }

    /// Installs a new abstraction and refreshes the cache file.
    pub fn install(&mut self, mmdp: Mmdp, abstraction_ms: f64) -> Result<(), ServiceError> {
        if let Some(path) = &self.config.mmdp_cache_path {
            mmdp.save(path)?;
        }
        self.mmdp = mmdp;
        self.abstraction_ms = abstraction_ms;
        Ok(())
    }

    pub fn parse(&self, text: &str) -> Result<TemporalQuery, ServiceError> {
        parse_valid_query(text, &self.domain())
    }

    /// Answers `query`; abstraction growth from rollouts is kept and written
    /// back to the cache.
    pub fn answer(&mut self, query: &TemporalQuery) -> Result<QueryAnswer, ServiceError> {
        let mut answer = answer_query(
            &mut self.mmdp,
            Some((self.env.as_ref(), self.policy.as_ref())),
            query,
            &self.config,
        )?;
        answer.timings.abstraction_ms = self.abstraction_ms;
        // rollouts change counts and samples even when no state is new
        if answer.rollout.as_ref().is_some_and(|r| r.rollouts > 0) {
            if let Some(path) = &self.config.mmdp_cache_path {
                self.mmdp.save(path)?;
            }
        }
        Ok(answer)
    }
}

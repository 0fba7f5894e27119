//! Feasibility checking and contrastive explanations for temporal queries
//! over cooperative multi-agent policies.
//!
//! The pipeline samples executions of a policy ([`envsim`]), abstracts them
//! into a task-progress MMDP ([`abstraction`]), checks ordered task queries
//! against it ([`querylang`], [`checker`]), enriches the abstraction with
//! guided rollouts ([`rollout`]) and, when a query stays infeasible, explains
//! and repairs it ([`explainer`]). [`service`] ties the stages together.

pub mod abstraction;
pub mod checker;
pub mod coalition;
pub mod domain;
pub mod envsim;
pub mod explainer;
pub mod fixtures;
pub mod querylang;
pub mod rollout;
pub mod service;

pub use abstraction::{Mmdp, Plan, ProgressMatrix, StateId};
pub use checker::{annotate, check_feasible, monitor_step, FeasibilityResult, MonitorIndex};
pub use coalition::{AgentId, Coalition, CompletionEvent, TaskId};
pub use domain::Domain;
pub use explainer::{explain, ExplanationReport};
pub use querylang::{parse_query, QueryItem, TemporalQuery};
pub use service::{answer_query, QueryAnswer, RunConfig};

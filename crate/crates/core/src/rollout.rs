//! Guided rollout: resample the policy from stored concrete states of the
//! abstract states that conform best with the query and were sampled least.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{AbstractionError, Mmdp, StateId};
use crate::checker::annotate;
use crate::envsim::{run_from, EnvError, Environment, Policy};
use crate::querylang::TemporalQuery;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RolloutParams {
    pub rollout_num: usize,
    pub depth_limit: usize,
    pub seed: u64,
}

impl Default for RolloutParams {
    fn default() -> Self {
        RolloutParams {
            rollout_num: 10,
            depth_limit: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("abstract state {0} has no stored concrete states")]
    EmptySampleMap(StateId),
    #[error("depthLimit must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RolloutStats {
    pub rollouts: usize,
    pub env_steps: usize,
    pub new_states: usize,
    pub new_transitions: usize,
    /// Abstract state each rollout restarted from, in order.
    pub origins: Vec<StateId>,
}

/// States ordered for resampling: conformance U descending, then visit count
/// C(s) ascending, then id. States only reachable with the query already
/// violated are left out.
pub fn frontier(mmdp: &Mmdp, query: &TemporalQuery) -> Vec<StateId> {
    let annotation = annotate(mmdp, query);
    let mut states: Vec<(usize, u64, StateId)> = annotation
        .node_u
        .iter()
        .map(|(&s, &u)| (u, mmdp.visit_count(s), s))
        .collect();
    states.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    states.into_iter().map(|(_, _, s)| s).collect()
}

/// Runs `rollout_num` rollouts of at most `depth_limit` steps each. The
/// frontier is computed once; rollout `k` restarts from frontier entry
/// `k mod len` at a uniformly drawn stored concrete state.
pub fn guided_rollout(
    mmdp: &mut Mmdp,
    env: &dyn Environment,
    policy: &dyn Policy,
    query: &TemporalQuery,
    params: &RolloutParams,
) -> Result<RolloutStats, RolloutError> {
    let mut stats = RolloutStats::default();
    if params.rollout_num == 0 {
        return Ok(stats);
    }
    if params.depth_limit == 0 {
        return Err(RolloutError::ZeroDepth);
    }
    let queue = frontier(mmdp, query);
    let (states_before, transitions_before) = (mmdp.num_states(), mmdp.num_transitions());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for k in 0..params.rollout_num {
        let origin = queue[k % queue.len()];
        let samples = mmdp.samples(origin);
        if samples.is_empty() {
            return Err(RolloutError::EmptySampleMap(origin));
        }
        let start = samples[rng.gen_range(0..samples.len())].clone();
        let progress = *mmdp.state(origin);
        let trajectory = run_from(env, policy, &start, params.depth_limit, &mut rng)?;
        stats.env_steps += trajectory.len();
        stats.origins.push(origin);
        mmdp.apply_trajectory(&trajectory, &progress)?;
        stats.rollouts += 1;
    }
    stats.new_states = mmdp.num_states() - states_before;
    stats.new_transitions = mmdp.num_transitions() - transitions_before;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::build_mmdp;
    use crate::checker::check_feasible;
    use crate::fixtures;
    use crate::querylang::parse_query;

    fn sr3_query(text: &str) -> TemporalQuery {
        parse_query(text, &fixtures::sr3_config().domain()).unwrap()
    }

    #[test]
    fn sr3_chain_frontier_order() {
        let m = fixtures::sr3_chain_mmdp();
        let f = frontier(&m, &sr3_query("fire:r2,r3 -> obstacle:r2"));
        assert_eq!(f, vec![1, 0]);
    }

    #[test]
    fn empty_query_orders_by_visits() {
        let m = fixtures::sr3_chain_mmdp();
        let f = frontier(&m, &TemporalQuery::default());
        let mut expected: Vec<StateId> = (0..m.num_states()).collect();
        expected.sort_by_key(|&s| (m.visit_count(s), s));
        assert_eq!(f, expected);
    }

    #[test]
    fn zero_rollouts_leave_mmdp_unchanged() {
        let mut m = fixtures::sr3_chain_mmdp();
        let before = m.clone();
        let params = RolloutParams {
            rollout_num: 0,
            ..Default::default()
        };
        let stats = guided_rollout(
            &mut m,
            &fixtures::sr3_env(),
            &fixtures::sr3_policy(0.0),
            &sr3_query("victim:r1"),
            &params,
        )
        .unwrap();
        assert_eq!(stats.rollouts, 0);
        assert_eq!(m, before);
    }

    #[test]
    fn work_bound_and_feasibility_monotone() {
        let env = fixtures::sr3_env();
        let policy = fixtures::sr3_policy(0.3);
        let mut m = build_mmdp(&env, &policy, 3, 300, 1).unwrap();
        let feasible = sr3_query("fire:r2,r3");
        assert!(check_feasible(&m, &feasible).feasible);
        let params = RolloutParams {
            rollout_num: 7,
            depth_limit: 13,
            seed: 3,
        };
        let stats =
            guided_rollout(&mut m, &env, &policy, &sr3_query("victim:r1"), &params).unwrap();
        assert_eq!(stats.rollouts, 7);
        assert!(stats.env_steps <= 7 * 13);
        assert!(check_feasible(&m, &feasible).feasible);
    }

    #[test]
    fn two_ordering_flip() {
        let (env, policy) = fixtures::two_ordering();
        let domain = env.config().domain();
        let query = parse_query("right:r2 -> left:r1", &domain).unwrap();
        let mut m = build_mmdp(&env, &policy, 1, 50, 0).unwrap();
        assert!(!check_feasible(&m, &query).feasible);
        let stats =
            guided_rollout(&mut m, &env, &policy, &query, &RolloutParams::default()).unwrap();
        assert_eq!(stats.origins, vec![0; 10]);
        assert!(check_feasible(&m, &query).feasible);
    }
}

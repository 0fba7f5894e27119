//! Random instances and brute-force oracles shared by the integration tests.
//!
//! The oracles work from first principles (explicit path enumeration, truth
//! tables, episode recounting) and do not call into the checker, the
//! minimizer or the explainer.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use marx_core::envsim::{Action, JointAction};
use marx_core::{Coalition, Mmdp, ProgressMatrix, QueryItem, StateId, TemporalQuery};

/// One completion observed on an abstract edge: (task, agent mask).
pub type Event = (usize, u64);

/// Events between two progress matrices, computed column by column.
pub fn diff_events(src: &ProgressMatrix, dst: &ProgressMatrix) -> Vec<Event> {
    let mut events = Vec::new();
    for task in 0..src.num_tasks() {
        let mut mask = 0u64;
        for agent in 0..src.num_agents() {
            if dst.get(agent, task) && !src.get(agent, task) {
                mask |= 1 << agent;
            }
        }
        if mask != 0 {
            events.push((task, mask));
        }
    }
    events
}

/// Random abstraction in which every task completes at most once on any
/// path and every non-loop edge completes at least one task: at most
/// `max_states` states, 2–3 agents, 2–4 tasks.
pub fn random_one_shot(rng: &mut ChaCha8Rng, max_states: usize) -> Mmdp {
    let agents = rng.gen_range(2..=3);
    let tasks = rng.gen_range(2..=4);
    let names: Vec<String> = (0..tasks).map(|t| format!("t{t}")).collect();
    let mut mmdp = Mmdp::new(agents, names);
    let mut known = vec![ProgressMatrix::empty(agents, tasks)];
    let random_action = |rng: &mut ChaCha8Rng| {
        JointAction(
            (0..agents)
                .map(|_| *Action::ALL.choose(rng).unwrap())
                .collect(),
        )
    };
    let attempts = rng.gen_range(3..=3 * max_states);
    for _ in 0..attempts {
        let src = *known.choose(rng).unwrap();
        if rng.gen_bool(0.15) {
            let action = random_action(rng);
            mmdp.record_transition(src, action, src, rng.gen_range(1..=4))
                .unwrap();
            continue;
        }
        let open: Vec<usize> = (0..tasks).filter(|&t| !src.task_done(t)).collect();
        if open.is_empty() {
            continue;
        }
        // Either jump to an existing superset state (shared suffixes) or
        // complete one or two fresh tasks.
        let dst = if rng.gen_bool(0.3) {
            let supersets: Vec<ProgressMatrix> = known
                .iter()
                .filter(|d| **d != src && is_one_shot_step(&src, d))
                .copied()
                .collect();
            match supersets.choose(rng) {
                Some(d) => *d,
                None => continue,
            }
        } else {
            let mut dst = src;
            let n = if open.len() > 1 && rng.gen_bool(0.2) {
                2
            } else {
                1
            };
            for &task in open.choose_multiple(rng, n) {
                let mask = rng.gen_range(1..(1u64 << agents));
                for agent in 0..agents {
                    if mask & (1 << agent) != 0 {
                        dst.set(agent, task);
                    }
                }
            }
            dst
        };
        if !known.contains(&dst) {
            if known.len() >= max_states {
                continue;
            }
            known.push(dst);
        }
        let action = random_action(rng);
        mmdp.record_transition(src, action, dst, rng.gen_range(1..=4))
            .unwrap();
    }
    mmdp
}

/// Whether `dst` extends `src` by completing whole columns that `src` left
/// empty.
fn is_one_shot_step(src: &ProgressMatrix, dst: &ProgressMatrix) -> bool {
    (0..src.num_tasks()).all(|t| {
        let same = (0..src.num_agents()).all(|a| src.get(a, t) == dst.get(a, t));
        same || !src.task_done(t)
    }) && (0..src.num_tasks())
        .all(|t| (0..src.num_agents()).all(|a| !src.get(a, t) || dst.get(a, t)))
}

/// Distinct (src, dst) pairs with a positive count, loops excluded.
pub fn successors(mmdp: &Mmdp) -> Vec<BTreeSet<StateId>> {
    let mut succ = vec![BTreeSet::new(); mmdp.num_states()];
    for (s, _, d, count) in mmdp.transitions() {
        if count > 0 && s != d {
            succ[s].insert(d);
        }
    }
    succ
}

/// Every path from the initial state, as a list of per-step event sets. The
/// empty path is included; paths are enumerated by depth-first search, which
/// terminates because one-shot abstractions are acyclic apart from loops.
pub fn all_paths(mmdp: &Mmdp) -> Vec<Vec<Vec<Event>>> {
    let succ = successors(mmdp);
    let mut out = Vec::new();
    let mut stack = vec![(mmdp.initial(), Vec::<Vec<Event>>::new())];
    while let Some((state, steps)) = stack.pop() {
        for &next in &succ[state] {
            let mut longer = steps.clone();
            longer.push(diff_events(mmdp.state(state), mmdp.state(next)));
            stack.push((next, longer));
        }
        out.push(steps);
    }
    out
}

/// Step at which `task` completes on `steps`, with its coalition mask.
fn completion(steps: &[Vec<Event>], task: usize) -> Option<(usize, u64)> {
    steps.iter().enumerate().find_map(|(i, events)| {
        events
            .iter()
            .find(|(t, _)| *t == task)
            .map(|&(_, mask)| (i, mask))
    })
}

/// Items `..j` complete on `steps` with their exact coalitions, in
/// non-decreasing step order, and no task of a later item completes at all.
pub fn conforms(steps: &[Vec<Event>], query: &TemporalQuery, j: usize) -> bool {
    let mut last = 0;
    for item in &query.items[..j] {
        match completion(steps, item.task) {
            Some((step, mask)) if mask == item.coalition.mask() && step >= last => last = step,
            _ => return false,
        }
    }
    query.items[j..]
        .iter()
        .all(|item| completion(steps, item.task).is_none())
}

/// Some path completes every item in order with the exact coalitions.
pub fn oracle_feasible(paths: &[Vec<Vec<Event>>], query: &TemporalQuery) -> bool {
    let k = query.len();
    paths.iter().any(|p| {
        let mut last = 0;
        query
            .items
            .iter()
            .all(|item| match completion(p, item.task) {
                Some((step, mask)) if mask == item.coalition.mask() && step >= last => {
                    last = step;
                    true
                }
                _ => false,
            })
            || k == 0
    })
}

/// Largest `j` such that some path prefix matches the first `j` items
/// without touching the task of any later item.
pub fn oracle_umax(paths: &[Vec<Vec<Event>>], query: &TemporalQuery) -> usize {
    let mut best = 0;
    for p in paths {
        for len in 0..=p.len() {
            for j in (best + 1)..=query.len() {
                if conforms(&p[..len], query, j) {
                    best = j;
                }
            }
        }
    }
    best
}

/// Random valid query of 1..=`max_len` items over distinct tasks. Coalitions
/// are usually taken from observed completions so that a fair share of the
/// queries is feasible.
pub fn random_query(rng: &mut ChaCha8Rng, mmdp: &Mmdp, max_len: usize) -> TemporalQuery {
    let mut observed: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for (s, _, d, _) in mmdp.transitions() {
        for (task, mask) in diff_events(mmdp.state(s), mmdp.state(d)) {
            observed.entry(task).or_default().insert(mask);
        }
    }
    let len = rng.gen_range(1..=max_len.min(mmdp.num_tasks()));
    let mut tasks: Vec<usize> = (0..mmdp.num_tasks()).collect();
    tasks.shuffle(rng);
    let items = tasks[..len]
        .iter()
        .map(|&task| {
            let seen: Vec<u64> = observed
                .get(&task)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default();
            let mask = match seen.choose(rng) {
                Some(&m) if rng.gen_bool(0.7) => m,
                _ => rng.gen_range(1..(1u64 << mmdp.num_agents())),
            };
            QueryItem::new(task, Coalition::from_mask(mask))
        })
        .collect();
    TemporalQuery::new(items)
}

/// Random ON-set over `n` variables: dense with a random density for small
/// `n`, a sparse scatter of at most `2^n / 8` points for larger `n`.
pub fn random_on_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    let size = 1u64 << n;
    let mut on: Vec<u64> = if n <= 7 {
        let density = rng.gen_range(0.05..0.95);
        (0..size).filter(|_| rng.gen_bool(density)).collect()
    } else {
        let points = rng.gen_range(1..=(size / 8) as usize);
        let set: BTreeSet<u64> = (0..points).map(|_| rng.gen_range(0..size)).collect();
        set.into_iter().collect()
    };
    if on.is_empty() {
        on.push(rng.gen_range(0..size));
    }
    on
}

/// A cube as (value, free mask): covers `p` iff `p` agrees with `value`
/// outside `free`.
pub fn cube_covers(value: u64, free: u64, p: u64) -> bool {
    (p & !free) == (value & !free)
}

/// All prime implicants of the function with ON-set `on`, by enumerating
/// every cube and keeping the maximal ones that avoid the OFF-set.
pub fn brute_primes(on: &[u64], n: usize) -> Vec<(u64, u64)> {
    let size = 1u64 << n;
    let on_set: BTreeSet<u64> = on.iter().copied().collect();
    let is_implicant = |value: u64, free: u64| {
        (0..size)
            .filter(|&p| cube_covers(value, free, p))
            .all(|p| on_set.contains(&p))
    };
    let mut primes = Vec::new();
    for free in 0..size {
        for value in 0..size {
            if value & free != 0 || !is_implicant(value, free) {
                continue;
            }
            let maximal = (0..n)
                .filter(|v| free & (1 << v) == 0)
                .all(|v| !is_implicant(value & !(1 << v), free | (1 << v)));
            if maximal {
                primes.push((value, free));
            }
        }
    }
    primes
}

/// Size of a smallest set of `cubes` covering `on`, by iterative deepening.
pub fn brute_min_cover(on: &[u64], cubes: &[(u64, u64)]) -> usize {
    let masks: Vec<u128> = cubes
        .iter()
        .map(|&(v, f)| {
            on.iter()
                .enumerate()
                .filter(|(_, &p)| cube_covers(v, f, p))
                .fold(0u128, |m, (i, _)| m | (1 << i))
        })
        .collect();
    let all: u128 = if on.len() == 128 {
        u128::MAX
    } else {
        (1u128 << on.len()) - 1
    };

    fn search(covered: u128, all: u128, masks: &[u128], budget: usize) -> bool {
        if covered == all {
            return true;
        }
        if budget == 0 {
            return false;
        }
        let missing = (all & !covered).trailing_zeros();
        masks
            .iter()
            .filter(|m| *m & (1 << missing) != 0)
            .any(|m| search(covered | m, all, masks, budget - 1))
    }

    (0..=cubes.len())
        .find(|&k| search(0, all, &masks, k))
        .expect("the primes cover the ON-set")
}

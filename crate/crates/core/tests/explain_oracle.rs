mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use marx_core::explainer::{explain, ExplainOptions};

use common::{all_paths, oracle_feasible, oracle_umax, random_one_shot, random_query};

#[test]
fn repairs_end_feasible_and_failures_are_localized() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let options = ExplainOptions::default();
    let mut infeasible = 0;
    for round in 0..300 {
        let mmdp = random_one_shot(&mut rng, 12);
        let paths = all_paths(&mmdp);
        let query = random_query(&mut rng, &mmdp, 3);
        let report = explain(&mmdp, &query, &options).unwrap();

        assert!(report.final_feasible, "round {round}");
        assert!(
            oracle_feasible(&paths, &report.final_query),
            "round {round}"
        );
        if oracle_feasible(&paths, &query) {
            assert!(report.failures.is_empty(), "round {round}");
            assert_eq!(report.final_query, query);
            continue;
        }
        infeasible += 1;
        assert!(!report.failures.is_empty(), "round {round}");
        assert_eq!(report.failures[0].query, query);
        for failure in &report.failures {
            assert!(!oracle_feasible(&paths, &failure.query), "round {round}");
            assert_eq!(
                failure.index,
                oracle_umax(&paths, &failure.query),
                "round {round}"
            );
            assert_eq!(failure.item, failure.query.items[failure.index]);
        }
    }
    assert!(
        infeasible > 60,
        "too few infeasible instances: {infeasible}"
    );
}

use arl_core::linalg::{dist_mod_constant, span};
use arl_core::oracle::{self, SolutionSetOracle};
use arl_core::structure::compute_structure;
use arl_core::{examples, solvers, FFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_oracle(name: &str) -> SolutionSetOracle {
    let f = |n| FFunction::mean(n);
    match name {
        "ex2_1a" => oracle::ex2_1a_oracle(f(3)),
        "ex2_1b" => oracle::ex2_1b_oracle(f(4)),
        "ex2_1c" => oracle::ex2_1c_oracle(f(4)),
        _ => unreachable!(),
    }
    .unwrap()
}

#[test]
fn ex5_1_midpoint_is_far_from_the_solution_set() {
    let q1 = [0.5, -1.5, 0.5, 0.5, -0.5, 0.5];
    let q2 = [-2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0];
    let mid: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| 0.5 * (a + b)).collect();
    let o = oracle::ex5_1_oracle(FFunction::sum(6, 0.0), 1e-3).unwrap();
    assert!(o.distance(&q1, true) <= 1e-3 + 1e-12);
    assert!(o.distance(&q2, true) <= 1e-3 + 1e-12);
    let d = o.distance(&mid, false);
    assert!(d - o.resolution(false) >= 0.1, "midpoint distance {d}");
}

#[test]
fn single_class_means_members_differ_by_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, model) in [("ex2_1a", examples::ex2_1a()), ("ex2_1b", examples::ex2_1b()), ("ex2_1c", examples::ex2_1c())] {
        let n_star = compute_structure(&model).unwrap().n_star;
        let o = mean_oracle(name);
        // draw members off the f-slice too, so shifts are part of the test
        let members: Vec<Vec<f64>> = o
            .members(40, &mut rng)
            .into_iter()
            .enumerate()
            .map(|(k, m)| m.iter().map(|v| v + k as f64 * 0.25).collect())
            .collect();
        let all_constant = members.iter().all(|a| members.iter().all(|b| dist_mod_constant(a, b) <= 1e-12));
        assert_eq!(n_star == 1, all_constant, "{name}: n*={n_star}");
    }
}

#[test]
fn oracle_members_solve_the_optimality_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, model) in [("ex2_1a", examples::ex2_1a()), ("ex2_1b", examples::ex2_1b()), ("ex2_1c", examples::ex2_1c())] {
        let o = mean_oracle(name);
        for m in o.members(25, &mut rng) {
            assert!(solvers::optimality_residual(&model, &m, o.r_star) <= 1e-10, "{name}");
            assert!(o.distance(&m, false) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn region_distance_matches_grid_search(q in prop::collection::vec(-5.0f64..5.0, 4)) {
        let o = mean_oracle("ex2_1c");
        let closed = o.distance(&q, false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let grid = o.members(4000, &mut rng).iter().map(|m| dist_mod_constant(&q, m)).fold(f64::INFINITY, f64::min);
        prop_assert!(closed <= grid + 1e-12);
        prop_assert!(grid - closed <= 5e-3);
    }

    #[test]
    fn distance_is_shift_invariant(q in prop::collection::vec(-5.0f64..5.0, 3), c in -10.0f64..10.0) {
        let o = mean_oracle("ex2_1a");
        let shifted: Vec<f64> = q.iter().map(|v| v + c).collect();
        prop_assert!((o.distance(&q, false) - o.distance(&shifted, false)).abs() <= 1e-9);
        prop_assert!((o.distance(&q, false) - span(&q.iter().zip([-1.0, 0.0, -2.0]).map(|(a, b)| a - b).collect::<Vec<_>>()) / 2.0).abs() <= 1e-12);
    }
}

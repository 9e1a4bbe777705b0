//! Cross-validation of the branch-and-bound solver against the exhaustive
//! oracle and of the LP subsolver against independent vertex enumeration.

mod common;

use common::{random_model, rng, vertex_enumeration_lp, RandomModelConfig};
use rand::Rng;
use v2v_rrm::milp::{MilpModel, ObjSense, Sense, VarKind};
use v2v_rrm::solver::{
    brute_force_solve, lp_bound, solve, BranchRule, SolveOptions, SolveStatus,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn lp_matches_vertex_enumeration_on_random_instances() {
    let mut r = rng(0x5EED_0001);
    let cfg = RandomModelConfig { max_bools: 0, max_continuous: 4, max_constraints: 4 };
    let mut optimal = 0;
    for case in 0..300 {
        let m = random_model(&mut r, &cfg);
        let oracle = vertex_enumeration_lp(&m);
        let opts = SolveOptions::default();
        match lp_bound(&m, &opts) {
            Ok(obj) => {
                optimal += 1;
                let expected = oracle.unwrap_or_else(|| panic!("case {case}: oracle found nothing but simplex says {obj}"));
                assert!(rel_close(obj, expected, 1e-6), "case {case}: simplex {obj} vs oracle {expected}");
            }
            Err(_) => {
                assert!(oracle.is_none(), "case {case}: simplex infeasible, oracle {oracle:?}");
            }
        }
    }
    assert!(optimal > 50, "too few feasible LPs generated: {optimal}");
}

#[test]
fn branch_and_bound_matches_brute_force_on_random_models() {
    let mut r = rng(0x5EED_0002);
    let cfg = RandomModelConfig::default();
    let mut agreements = 0;
    for case in 0..150 {
        let m = random_model(&mut r, &cfg);
        let oracle = brute_force_solve(&m, 24).unwrap();
        let sol = solve(&m, &SolveOptions::default()).unwrap();
        match (oracle.status, sol.status) {
            (SolveStatus::Infeasible, SolveStatus::Infeasible) => {}
            (SolveStatus::Optimal, SolveStatus::Optimal) => {
                assert!(
                    rel_close(oracle.objective, sol.objective, 1e-6),
                    "case {case}: oracle {} vs solver {}",
                    oracle.objective,
                    sol.objective
                );
                agreements += 1;
            }
            other => panic!("case {case}: status mismatch {other:?}"),
        }
    }
    assert!(agreements > 40, "too few feasible instances: {agreements}");
}

#[test]
fn branch_rules_agree_on_objective() {
    let mut r = rng(0x5EED_0003);
    let cfg = RandomModelConfig { max_bools: 8, max_continuous: 3, max_constraints: 6 };
    for _ in 0..60 {
        let m = random_model(&mut r, &cfg);
        let a = solve(
            &m,
            &SolveOptions { branch_rule: BranchRule::MostFractional, ..Default::default() },
        )
        .unwrap();
        let b = solve(
            &m,
            &SolveOptions { branch_rule: BranchRule::FirstIndex, ..Default::default() },
        )
        .unwrap();
        assert_eq!(a.status, b.status);
        if a.status == SolveStatus::Optimal {
            assert!(rel_close(a.objective, b.objective, 1e-6));
        }
    }
}

#[test]
fn lp_relaxation_bounds_the_milp_for_maximization() {
    let mut r = rng(0x5EED_0004);
    let cfg = RandomModelConfig { max_bools: 6, max_continuous: 2, max_constraints: 5 };
    for _ in 0..80 {
        let mut m = random_model(&mut r, &cfg);
        // Force maximization for the ordering statement.
        let terms: Vec<(f64, _)> = (0..m.num_vars())
            .map(|i| (if i % 2 == 0 { 1.0 } else { -1.0 }, m.var_by_index(i)))
            .collect();
        m.set_objective(&terms, ObjSense::Maximize).unwrap();
        let opts = SolveOptions::default();
        let (Ok(bound), Ok(sol)) = (lp_bound(&m, &opts), solve(&m, &opts)) else {
            continue;
        };
        if sol.status == SolveStatus::Optimal {
            assert!(bound >= sol.objective - 1e-6 * (1.0 + sol.objective.abs()));
        }
    }
}

#[test]
fn solutions_satisfy_all_constraints() {
    let mut r = rng(0x5EED_0005);
    let cfg = RandomModelConfig::default();
    for case in 0..100 {
        let m = random_model(&mut r, &cfg);
        let sol = solve(&m, &SolveOptions::default()).unwrap();
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        let bad = m.violated_constraints(&sol.assignment, 1e-6);
        assert!(bad.is_empty(), "case {case}: violated constraints {bad:?}");
        let bad_bounds = m.violated_bounds(&sol.assignment, 1e-6);
        assert!(bad_bounds.is_empty(), "case {case}: violated bounds {bad_bounds:?}");
        for i in 0..m.num_vars() {
            if m.kind_by_index(i) == VarKind::Boolean {
                let v = sol.assignment[i];
                assert!((v - v.round()).abs() < 1e-6, "case {case}: fractional Boolean {v}");
            }
        }
    }
}

#[test]
fn min_select_returns_exact_minimum_on_fixed_operands() {
    // zs fixed (4, 2, 7), zeta = 5: minimizing y yields 2; and the
    // single-operand case yields the operand itself.
    let mut m = MilpModel::new();
    let y = m.add_continuous("y", 0.0, 10.0).unwrap();
    let zs: Vec<_> = [4.0, 2.0, 7.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let z = m.add_continuous(format!("z{i}"), v, v).unwrap();
            z
        })
        .collect();
    m.encode_min_select(y, &zs, 5.0).unwrap();
    m.set_objective(&[(1.0, y)], ObjSense::Minimize).unwrap();
    let sol = brute_force_solve(&m, 24).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 2.0).abs() < 1e-9);
    let bb = solve(&m, &SolveOptions::default()).unwrap();
    assert!((bb.objective - 2.0).abs() < 1e-7);

    let mut m1 = MilpModel::new();
    let y1 = m1.add_continuous("y", -3.0, 9.0).unwrap();
    let z1 = m1.add_continuous("z", 3.5, 3.5).unwrap();
    m1.encode_min_select(y1, &[z1], 12.0).unwrap();
    m1.set_objective(&[(1.0, y1)], ObjSense::Minimize).unwrap();
    let sol1 = solve(&m1, &SolveOptions::default()).unwrap();
    assert!((sol1.objective - 3.5).abs() < 1e-7);
}

#[test]
fn min_select_random_instances() {
    let mut r = rng(0x5EED_0006);
    for _ in 0..200 {
        let n = r.gen_range(1..=4usize);
        let vals: Vec<f64> = (0..n).map(|_| (r.gen_range(-40..=40) as f64) / 4.0).collect();
        let zeta = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut m = MilpModel::new();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let y = m.add_continuous("y", lo, hi).unwrap();
        let zs: Vec<_> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| m.add_continuous(format!("z{i}"), v, v).unwrap())
            .collect();
        m.encode_min_select(y, &zs, zeta.max(0.0) + 1.0).unwrap();
        m.set_objective(&[(1.0, y)], ObjSense::Minimize).unwrap();
        let sol = solve(&m, &SolveOptions::default()).unwrap();
        let expect = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            (sol.objective - expect).abs() < 1e-6,
            "min of {vals:?} reported as {}",
            sol.objective
        );
    }
}

#[test]
fn encoder_truth_tables_exhaustive_up_to_arity_4() {
    for arity in 1..=4usize {
        for bits in 0..(1u32 << arity) {
            let mut m = MilpModel::new();
            let xs: Vec<_> = (0..arity).map(|i| m.add_bool(format!("x{i}"))).collect();
            let or = m.encode_or(&xs).unwrap();
            let and = m.encode_and(&xs).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                m.fix(x, ((bits >> i) & 1) as f64).unwrap();
            }
            // Feasibility pins both outputs; read them via the oracle.
            m.set_objective(&[(1.0, or), (1.0, and)], ObjSense::Maximize).unwrap();
            let hi = brute_force_solve(&m, 24).unwrap();
            m.set_objective(&[(1.0, or), (1.0, and)], ObjSense::Minimize).unwrap();
            let lo = brute_force_solve(&m, 24).unwrap();
            let expect_or = if bits != 0 { 1.0 } else { 0.0 };
            let expect_and = if bits == (1 << arity) - 1 { 1.0 } else { 0.0 };
            assert_eq!(hi.objective, expect_or + expect_and, "arity {arity} bits {bits:b}");
            assert_eq!(lo.objective, expect_or + expect_and, "arity {arity} bits {bits:b}");
        }
    }
}

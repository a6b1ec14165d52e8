// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Property tests over seeded random instances.

use proptest::prelude::*;
use vnerg::amenable::{folner_boxes, folner_defect, DiscreteGroup, SetLimits};
use vnerg::cli::{emit, parse_complex, parse_problem, ExperimentConfig, Kind, MatrixBlock, Role};
use vnerg::cp_maps::{adjoint_residual, dual_map, gns_operator, ks_residual, QuantumMap};
use vnerg::ergodic::{cesaro_map, conditional_expectation, invariant_state};
use vnerg::linalg::{c, identity, max_abs, op_norm, DenseMatrix, Tolerances};
use vnerg::random::{ginibre, haar_unitary, isometry, random_faithful_density, random_probabilities, rng};
use vnerg::standard_form::{standard_form, State};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Unital CP map from the blocks of a random isometry `C^n -> C^{nk}`.
fn stinespring_map(seed: u64, n: usize, k: usize) -> QuantumMap {
    let mut g = rng(seed);
    let v = isometry(&mut g, n * k, n);
    let kraus = (0..k).map(|i| v.rows(i * n, n).into_owned()).collect();
    QuantumMap::from_kraus(kraus).unwrap()
}

/// Mixed-unitary channel with a faithful invariant state, or `None` if the
/// invariant state found is too close to singular.
fn invariant_pair(seed: u64, n: usize, k: usize) -> Option<(QuantumMap, State)> {
    let mut g = rng(seed);
    let us: Vec<DenseMatrix> = (0..k).map(|_| haar_unitary(&mut g, n)).collect();
    let map = QuantumMap::mixed_unitary(&random_probabilities(&mut g, k), &us).unwrap();
    let start = random_faithful_density(&mut g, n, 1e-2);
    let st = State::new(invariant_state(&map, &start, &tol()).ok()?, &tol()).ok()?;
    (st.min_eigenvalue() > 1e-6).then_some((map, st))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unital_cp_maps_satisfy_kadison_schwarz(seed in any::<u64>(), n in 2usize..4, k in 1usize..4) {
        let map = stinespring_map(seed, n, k);
        let x = ginibre(&mut rng(seed ^ 0x5eed), n, n);
        prop_assert!(ks_residual(&map, &x).unwrap() <= 1e-9);
    }

    #[test]
    fn dual_is_an_involution_and_an_adjoint(seed in any::<u64>(), n in 2usize..4, k in 2usize..4) {
        let Some((map, st)) = invariant_pair(seed, n, k) else { return Ok(()) };
        let sf = standard_form(st, &tol()).unwrap();
        let dual = dual_map(&map, &sf).unwrap();
        prop_assert!(adjoint_residual(&map, &dual, &sf).unwrap() <= 1e-9);
        let back = dual_map(&dual, &sf).unwrap();
        prop_assert!(max_abs(&(back.superop() - map.superop())) <= 1e-8);
    }

    #[test]
    fn conditional_expectation_is_idempotent(seed in any::<u64>(), n in 2usize..4, k in 2usize..4) {
        let Some((map, st)) = invariant_pair(seed, n, k) else { return Ok(()) };
        let dec = conditional_expectation(&map, &st, &tol()).unwrap();
        prop_assert!(dec.idempotence_residual() <= 1e-9);
        prop_assert!(dec.intertwining_residual(&map) <= 1e-9);
        prop_assert!(dec.state_residual(&st).unwrap() <= 1e-9);
    }

    #[test]
    fn cesaro_averages_stay_contractive(seed in any::<u64>(), n in 2usize..4, k in 2usize..4, m in 1u64..40) {
        let Some((map, st)) = invariant_pair(seed, n, k) else { return Ok(()) };
        let sf = standard_form(st, &tol()).unwrap();
        let t = gns_operator(&cesaro_map(&map, m).unwrap(), &sf).unwrap();
        prop_assert!(op_norm(&t).unwrap() <= 1.0 + 1e-9);
        let unit = cesaro_map(&map, m).unwrap().apply(&identity(n)).unwrap();
        prop_assert!(max_abs(&(unit - identity(n))) <= 1e-9);
    }

    #[test]
    fn zd_box_defect_has_closed_form(d in 1usize..4, n in 0u64..6, axis in 0usize..3) {
        prop_assume!(axis < d);
        let group = DiscreteGroup::zd(d).unwrap();
        let f = folner_boxes(&group, n, &SetLimits::default()).unwrap();
        let mut shift = [0i64; 4];
        shift[axis] = 1;
        let r = folner_defect(&group, &f, &[shift], &SetLimits::default()).unwrap();
        let side = 2 * n as u128 + 1;
        // two faces of side^(d-1) points over side^d points
        prop_assert_eq!(r.num * side, 2 * r.den);
    }

    #[test]
    fn heisenberg_defect_bounds(n in 0u64..4, a in -2i64..3, b in -2i64..3, cc in -2i64..3) {
        let group = DiscreteGroup::Heisenberg3;
        let limits = SetLimits::default();
        let f = folner_boxes(&group, n, &limits).unwrap();
        let e = [0i64; 4];
        prop_assert_eq!(folner_defect(&group, &f, &[e], &limits).unwrap().num, 0);
        let k = [a, b, cc, 0];
        let r = folner_defect(&group, &f, &[e, k], &limits).unwrap();
        prop_assert!(r.num <= r.den);
        let alone = folner_defect(&group, &f, &[k], &limits).unwrap();
        prop_assert!(alone.num <= 2 * alone.den);
        // |F Δ kF| = 2 |kF \ F| since left translation preserves cardinality
        prop_assert_eq!(alone.num % 2, 0);
    }

    #[test]
    fn complex_entries_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let text = format!("{re:?}{}{:?}i", if im < 0.0 { "-" } else { "+" }, im.abs());
        prop_assert_eq!(parse_complex(&text), Some(c(re, im)));
    }

    #[test]
    fn emitted_configs_reparse_equal(seed in any::<u64>(), n in 1usize..4, blocks in 0usize..4, lambdas in prop::collection::vec(1e-3f64..1e3, 0..4)) {
        let mut g = rng(seed);
        let roles = [Role::Kraus, Role::Psi, Role::Unitary, Role::Jump];
        let cfg = ExperimentConfig {
            kind: Some(Kind::Ergodic),
            dim: Some(n),
            seed: Some(seed),
            n_list: vec![1, 5, 17],
            lambda_list: lambdas,
            tol_eq: Some(1e-11),
            blocks: (0..blocks)
                .map(|i| MatrixBlock { role: roles[i], index: i, matrix: ginibre(&mut g, n, n) })
                .collect(),
            ..ExperimentConfig::default()
        };
        let text = emit(&cfg);
        let again = parse_problem(&text).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(emit(&again), text);
    }
}

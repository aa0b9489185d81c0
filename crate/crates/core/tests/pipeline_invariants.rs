mod common;

use std::collections::{BTreeMap, BTreeSet};

use dpc_core::datagen::{generate, GenKind, GenSpec};
use dpc_core::pipeline::{with_threads, NOISE};
use dpc_core::{run_dpc, DpcParams, DpcResult, PointSet, PriorityKey, Strategy};
use proptest::prelude::{prop, prop_assert_eq, proptest, ProptestConfig};
use proptest::strategy::Strategy as _;

fn arb_problem() -> impl proptest::strategy::Strategy<Value = (PointSet, DpcParams)> {
    (1usize..4, 1usize..120)
        .prop_flat_map(|(d, n)| {
            (
                prop::collection::vec(prop::collection::vec(-20i32..20, d), n),
                1u32..15,
                0u32..6,
                1u32..30,
            )
        })
        .prop_map(|(rows, d_cut, rho_min, delta_min)| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| v as f64 * 0.5).collect())
                .collect();
            let params = DpcParams::new(d_cut as f64 * 0.5, rho_min as f64, delta_min as f64 * 0.5).unwrap();
            (PointSet::from_rows(&rows).unwrap(), params)
        })
}

fn check_invariants(points: &PointSet, r: &DpcResult) {
    let n = points.len();
    let p = &r.params;
    let key = |i: usize| PriorityKey::new(r.rho[i] as f64, i);
    let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let noise = (r.rho[i] as f64) < p.rho_min;
        if noise {
            assert_eq!(r.labels[i], NOISE);
            assert_eq!(r.lambda[i], None);
            assert!(r.delta[i].is_infinite());
            continue;
        }
        assert_ne!(r.labels[i], NOISE);
        members.entry(r.labels[i]).or_default().push(i);
        match r.lambda[i] {
            Some(l) => {
                assert!(key(l) > key(i), "dependent point must have higher priority");
                assert!((r.rho[l] as f64) >= p.rho_min);
                if r.delta[i] < p.delta_min {
                    assert_eq!(r.labels[i], r.labels[l], "chain link crosses clusters");
                }
            }
            None => assert!(r.delta[i].is_infinite()),
        }
    }
    let centers: BTreeSet<usize> = r.centers.iter().copied().collect();
    assert_eq!(centers.len(), members.len(), "one center per cluster");
    for (label, ids) in &members {
        assert_eq!(*label, ids[0] as i64 + 1, "label is the smallest member");
        let c: Vec<&usize> = ids.iter().filter(|i| centers.contains(i)).collect();
        assert_eq!(c.len(), 1, "cluster {label} has {} centers", c.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clustering_invariants_hold((points, params) in arb_problem()) {
        for s in Strategy::ALL {
            let r = run_dpc(&points, &params, s).unwrap();
            check_invariants(&points, &r);
        }
    }

    #[test]
    fn raising_rho_min_only_adds_noise((points, params) in arb_problem(), bump in 1u32..4) {
        let a = run_dpc(&points, &params, Strategy::Priority).unwrap();
        let higher = DpcParams { rho_min: params.rho_min + bump as f64, ..params };
        let b = run_dpc(&points, &higher, Strategy::Priority).unwrap();
        for i in 0..points.len() {
            if a.labels[i] == NOISE {
                prop_assert_eq!(b.labels[i], NOISE);
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_result() {
    let points = generate(&GenSpec::new(GenKind::Varden, 20_000, 2, 3)).unwrap();
    let params = DpcParams::new(400.0, 3.0, 8_000.0).unwrap();
    for s in Strategy::ALL.into_iter().filter(|&s| s != Strategy::BruteForce) {
        let base = with_threads(1, || run_dpc(&points, &params, s)).unwrap().unwrap();
        check_invariants(&points, &base);
        for t in [2, 8] {
            let r = with_threads(t, || run_dpc(&points, &params, s)).unwrap().unwrap();
            assert_eq!(r, base, "{s} with {t} workers");
        }
    }
}

#[test]
fn single_point() {
    let points = PointSet::from_rows(&[[3.0, 4.0]]).unwrap();
    let params = DpcParams::new(1.0, 0.0, 1.0).unwrap();
    for s in Strategy::ALL {
        let r = run_dpc(&points, &params, s).unwrap();
        assert_eq!(r.labels, vec![1]);
        assert_eq!(r.centers, vec![0]);
        assert_eq!(r.lambda, vec![None]);
    }
}

#[test]
fn all_noise() {
    let points = PointSet::from_rows(&[[0.0], [10.0], [20.0]]).unwrap();
    let params = DpcParams::new(1.0, 2.0, 1.0).unwrap();
    for s in Strategy::ALL {
        let r = run_dpc(&points, &params, s).unwrap();
        assert_eq!(r.labels, vec![NOISE; 3]);
        assert_eq!(r.lambda, vec![None; 3]);
        assert!(r.centers.is_empty());
    }
}

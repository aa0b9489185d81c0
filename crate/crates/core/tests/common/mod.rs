#![allow(dead_code)]

use std::collections::HashMap;

use dpc_core::oracle::{oracle_cluster_centers, oracle_densities, oracle_dependent};
use dpc_core::pipeline::rho_as_f64;
use dpc_core::{DpcParams, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A seeded random clustering problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub points: PointSet,
    pub params: DpcParams,
}

/// Random instance with n in 50..=500 and d in {2, 3, 5}. A third of the
/// instances snap coordinates to a coarse grid so that duplicate points and
/// distance ties are common.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(50..=500);
    let d = [2, 3, 5][rng.random_range(0..3)];
    let grid = seed.is_multiple_of(3);
    let blobs = rng.random_range(1..6);
    let centers: Vec<Vec<f64>> = (0..blobs)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..100.0)).collect())
        .collect();
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let c = &centers[rng.random_range(0..blobs)];
        let spread: f64 = rng.random_range(1.0..20.0);
        for &x in c {
            let mut v = x + rng.random_range(-spread..spread);
            if grid {
                v = (v / 4.0).round() * 4.0;
            }
            coords.push(v);
        }
    }
    let points = PointSet::new(coords, d).unwrap();
    let d_cut = rng.random_range(1.0..25.0);
    let rho_min = [0.0, 1.0, 2.0, 5.0][rng.random_range(0..4)];
    let delta_min = rng.random_range(5.0..60.0);
    Instance {
        seed,
        points,
        params: DpcParams::new(d_cut, rho_min, delta_min).unwrap(),
    }
}

/// Relabels clusters by order of first appearance, keeping noise as -1.
pub fn canonical_partition<T: Copy + Eq + std::hash::Hash>(labels: &[Option<T>]) -> Vec<i64> {
    let mut seen = HashMap::new();
    labels
        .iter()
        .map(|l| match l {
            None => -1,
            Some(k) => {
                let next = seen.len() as i64;
                *seen.entry(*k).or_insert(next)
            }
        })
        .collect()
}

pub fn partition_of_labels(labels: &[i64]) -> Vec<i64> {
    let opt: Vec<Option<i64>> = labels.iter().map(|&l| (l >= 0).then_some(l)).collect();
    canonical_partition(&opt)
}

/// Oracle partition of an instance, computed without any index or union-find.
pub fn oracle_partition(inst: &Instance) -> Vec<i64> {
    let rho = rho_as_f64(&oracle_densities(&inst.points, inst.params.d_cut));
    let dep = oracle_dependent(&inst.points, &rho, inst.params.rho_min).unwrap();
    let centers = oracle_cluster_centers(&rho, &dep, inst.params.rho_min, inst.params.delta_min);
    canonical_partition(&centers)
}

pub fn labels_file(labels: &[i64]) -> Vec<u8> {
    let mut out = b"id,label\n".to_vec();
    for (i, l) in labels.iter().enumerate() {
        out.extend_from_slice(format!("{},{}\n", i + 1, l).as_bytes());
    }
    out
}

//! Quadratic brute-force reference for densities, dependent points, priority
//! range queries and cluster labels.
//!
//! Shares [`sq_dist`] and the [`PriorityKey`] order with the indexed code so
//! that floating-point behavior is identical.

use rayon::prelude::*;

use crate::dependent::{check_densities, DependentAssignment};
use crate::error::Result;
use crate::geometry::{priority_keys, sq_dist, BoundingBox, Neighbor, PointId, PointSet, PriorityKey};

/// Number of points within closed distance `d_cut` of each point, itself
/// included.
pub fn oracle_densities(points: &PointSet, d_cut: f64) -> Vec<u64> {
    let r2 = d_cut * d_cut;
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            points.iter().filter(|q| sq_dist(p, q) <= r2).count() as u64
        })
        .collect()
}

/// Linear scan over all higher-priority points for every non-noise point.
pub fn oracle_dependent(points: &PointSet, rho: &[f64], rho_min: f64) -> Result<DependentAssignment> {
    check_densities(points, rho)?;
    let keys = priority_keys(rho);
    let mut by_priority: Vec<PointId> = (0..points.len()).collect();
    by_priority.sort_unstable_by(|a, b| keys[*b].cmp(&keys[*a]));
    let mut rank = vec![0; points.len()];
    for (r, &id) in by_priority.iter().enumerate() {
        rank[id] = r;
    }
    let found = (0..points.len())
        .into_par_iter()
        .map(|i| {
            if rho[i] < rho_min {
                return None;
            }
            let p = points.point(i);
            let mut best: Option<Neighbor> = None;
            for &j in &by_priority[..rank[i]] {
                let cand = Neighbor {
                    id: j,
                    sq_dist: sq_dist(p, points.point(j)),
                };
                if best.is_none_or(|b| cand.beats(&b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .collect();
    Ok(DependentAssignment::from_neighbors(found))
}

/// Ids inside the closed box whose priority exceeds `gamma_q`, ascending.
pub fn oracle_priority_range(
    points: &PointSet,
    gamma: &[PriorityKey],
    bb: &BoundingBox,
    gamma_q: &PriorityKey,
) -> Vec<PointId> {
    (0..points.len())
        .filter(|&i| gamma[i] > *gamma_q && bb.contains(points.point(i)))
        .collect()
}

/// Cluster labels by walking dependent chains to their centers; no
/// union-find involved. Returns the center id of every clustered point and
/// `None` for noise.
pub fn oracle_cluster_centers(
    rho: &[f64],
    dep: &DependentAssignment,
    rho_min: f64,
    delta_min: f64,
) -> Vec<Option<PointId>> {
    let n = rho.len();
    let mut center = vec![None; n];
    for start in 0..n {
        if rho[start] < rho_min {
            continue;
        }
        let mut x = start;
        for _ in 0..=n {
            match dep.lambda[x] {
                Some(next) if dep.delta[x] < delta_min => x = next,
                _ => break,
            }
        }
        center[start] = Some(x);
    }
    center
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> PointSet {
        PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]]).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(oracle_densities(&canonical(), 1.0), vec![3, 2, 2, 2, 2]);
        let one = PointSet::from_rows(&[[4.0]]).unwrap();
        assert_eq!(oracle_densities(&one, 0.5), vec![1]);
        let two = PointSet::from_rows(&[[4.0, 1.0], [4.0, 1.0]]).unwrap();
        assert_eq!(oracle_densities(&two, 1e-9), vec![2, 2]);
    }

    #[test]
    fn dependent_examples() {
        let rho = [3.0, 2.0, 2.0, 2.0, 2.0];
        let dep = oracle_dependent(&canonical(), &rho, 0.0).unwrap();
        assert_eq!(dep.lambda, vec![None, Some(0), Some(0), Some(1), Some(3)]);
        assert_eq!(dep.delta, vec![f64::INFINITY, 1.0, 1.0, 181f64.sqrt(), 1.0]);

        let two = PointSet::from_rows(&[[0.0], [3.0]]).unwrap();
        let dep = oracle_dependent(&two, &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(dep.lambda, vec![None, Some(0)]);

        let one = PointSet::from_rows(&[[0.0]]).unwrap();
        assert_eq!(oracle_dependent(&one, &[1.0], 0.0).unwrap().lambda, vec![None]);
    }

    #[test]
    fn range_examples() {
        let ps = canonical();
        let gamma = priority_keys(&[3.0, 2.0, 2.0, 2.0, 2.0]);
        let all = ps.bounding_box();
        assert_eq!(oracle_priority_range(&ps, &gamma, &all, &PriorityKey::BOTTOM), vec![0, 1, 2, 3, 4]);
        let far = BoundingBox::new(vec![-5.0, -5.0], vec![-4.0, -4.0]).unwrap();
        assert!(oracle_priority_range(&ps, &gamma, &far, &PriorityKey::BOTTOM).is_empty());
    }

    #[test]
    fn cluster_walk() {
        let rho = [3.0, 2.0, 2.0, 2.0, 2.0];
        let dep = oracle_dependent(&canonical(), &rho, 0.0).unwrap();
        let centers = oracle_cluster_centers(&rho, &dep, 0.0, 5.0);
        assert_eq!(centers, vec![Some(0), Some(0), Some(0), Some(3), Some(3)]);
        let centers = oracle_cluster_centers(&rho, &dep, 2.5, 5.0);
        assert_eq!(centers, vec![Some(0), None, None, None, None]);
    }
}

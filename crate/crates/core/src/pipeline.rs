//! End-to-end clustering: densities, dependent points, then single-linkage
//! over the dependent links.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependent::DependentAssignment;
use crate::error::{DpcError, Result};
use crate::fenwick::fenwick_dependent_point;
use crate::geometry::{DpcParams, PointId, PointSet};
use crate::incomplete::incomplete_dependent_point;
use crate::kdtree::{KdTree, KdTreeOptions};
use crate::oracle::{oracle_densities, oracle_dependent};
use crate::priority::priority_dependent_point;
use crate::union_find::UnionFind;

/// Label of points that belong to no cluster.
pub const NOISE: i64 = -1;

/// Queries per worker task in the density loop.
const DENSITY_GRAIN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Priority,
    Fenwick,
    Incomplete,
    #[serde(rename = "bruteforce")]
    BruteForce,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Priority,
        Strategy::Fenwick,
        Strategy::Incomplete,
        Strategy::BruteForce,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Priority => "priority",
            Strategy::Fenwick => "fenwick",
            Strategy::Incomplete => "incomplete",
            Strategy::BruteForce => "bruteforce",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = DpcError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| DpcError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpcResult {
    pub rho: Vec<u64>,
    pub lambda: Vec<Option<PointId>>,
    /// `inf` wherever `lambda` is `None`.
    pub delta: Vec<f64>,
    /// External id (1-based) of the smallest member of the point's cluster,
    /// or [`NOISE`].
    pub labels: Vec<i64>,
    /// Center ids, ascending.
    pub centers: Vec<PointId>,
    pub params: DpcParams,
    pub strategy: Strategy,
}

impl DpcResult {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn num_noise(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

/// Cluster membership produced by [`single_linkage_cluster`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub labels: Vec<i64>,
    pub centers: Vec<PointId>,
}

/// Wall-clock seconds per pipeline step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTimes {
    /// Building the shared kd-tree used for density queries.
    pub build: f64,
    pub density: f64,
    /// Dependent-point step, including the finder's own index build.
    pub dependent: f64,
    pub linkage: f64,
}

impl StepTimes {
    pub fn total(&self) -> f64 {
        self.build + self.density + self.dependent + self.linkage
    }
}

/// Closed-ball neighbor counts, self included, from one shared kd-tree.
pub fn compute_densities(points: &PointSet, d_cut: f64) -> Result<Vec<u64>> {
    check_d_cut(d_cut)?;
    let tree = KdTree::build(points, KdTreeOptions::default())?;
    Ok(densities_with_tree(&tree, points, d_cut))
}

pub fn densities_with_tree(tree: &KdTree, points: &PointSet, d_cut: f64) -> Vec<u64> {
    (0..points.len())
        .into_par_iter()
        .with_min_len(DENSITY_GRAIN)
        .map(|i| tree.range_count(points.point(i), d_cut) as u64)
        .collect()
}

fn check_d_cut(d_cut: f64) -> Result<()> {
    if d_cut.is_finite() && d_cut > 0.0 {
        Ok(())
    } else {
        Err(DpcError::InvalidParams(format!("d_cut must be finite and > 0, got {d_cut}")))
    }
}

pub fn rho_as_f64(rho: &[u64]) -> Vec<f64> {
    rho.iter().map(|&r| r as f64).collect()
}

pub fn find_dependent_points(
    points: &PointSet,
    rho: &[u64],
    rho_min: f64,
    strategy: Strategy,
) -> Result<DependentAssignment> {
    let rho = rho_as_f64(rho);
    match strategy {
        Strategy::Priority => priority_dependent_point(points, &rho, rho_min),
        Strategy::Fenwick => fenwick_dependent_point(points, &rho, rho_min),
        Strategy::Incomplete => incomplete_dependent_point(points, &rho, rho_min),
        Strategy::BruteForce => oracle_dependent(points, &rho, rho_min),
    }
}

/// Unions every non-noise point whose dependent distance is below
/// `delta_min` with its dependent point. Noise is never unioned; centers
/// are the remaining non-noise points.
pub fn single_linkage_cluster(rho: &[u64], dep: &DependentAssignment, params: &DpcParams) -> Clustering {
    let n = rho.len();
    let noise = |i: usize| (rho[i] as f64) < params.rho_min;
    let uf = UnionFind::new(n);
    (0..n).into_par_iter().with_min_len(1024).for_each(|i| {
        if noise(i) {
            return;
        }
        if let Some(l) = dep.lambda[i] {
            if dep.delta[i] < params.delta_min {
                uf.union(i, l);
            }
        }
    });
    let roots = uf.roots();
    let labels = roots
        .par_iter()
        .enumerate()
        .map(|(i, &r)| if noise(i) { NOISE } else { r as i64 + 1 })
        .collect();
    let centers = (0..n)
        .filter(|&i| !noise(i) && dep.delta[i] >= params.delta_min)
        .collect();
    Clustering { labels, centers }
}

pub fn run_dpc(points: &PointSet, params: &DpcParams, strategy: Strategy) -> Result<DpcResult> {
    run_dpc_timed(points, params, strategy).map(|(r, _)| r)
}

/// [`run_dpc`] with per-step wall times. The brute-force strategy also
/// computes densities by brute force.
pub fn run_dpc_timed(points: &PointSet, params: &DpcParams, strategy: Strategy) -> Result<(DpcResult, StepTimes)> {
    params.validate()?;
    let mut times = StepTimes::default();

    let rho = if strategy == Strategy::BruteForce {
        let t = Instant::now();
        let rho = oracle_densities(points, params.d_cut);
        times.density = t.elapsed().as_secs_f64();
        rho
    } else {
        let t = Instant::now();
        let tree = KdTree::build(points, KdTreeOptions::default())?;
        times.build = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let rho = densities_with_tree(&tree, points, params.d_cut);
        times.density = t.elapsed().as_secs_f64();
        rho
    };

    let t = Instant::now();
    let dep = find_dependent_points(points, &rho, params.rho_min, strategy)?;
    times.dependent = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let Clustering { labels, centers } = single_linkage_cluster(&rho, &dep, params);
    times.linkage = t.elapsed().as_secs_f64();

    Ok((
        DpcResult {
            rho,
            lambda: dep.lambda,
            delta: dep.delta,
            labels,
            centers,
            params: *params,
            strategy,
        },
        times,
    ))
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = one per core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

//! Parallel exact density peaks clustering.
//!
//! Clustering runs in three steps:
//!
//! 1. **Density**: `rho(x)` is the number of points within the closed ball
//!    of radius `d_cut` around `x` (itself included), counted on a kd-tree
//!    that skips whole cells lying inside the ball.
//! 2. **Dependent points**: `lambda(x)` is the nearest point of strictly
//!    higher priority, where priority orders by density and then by smaller
//!    id. Three interchangeable finders are provided: a priority search
//!    kd-tree ([`priority`]), a Fenwick decomposition over kd-trees
//!    ([`fenwick`]) and a sequential incomplete kd-tree ([`incomplete`]).
//!    A quadratic reference lives in [`oracle`].
//! 3. **Linkage**: every non-noise point closer than `delta_min` to its
//!    dependent point is joined to it with a concurrent union-find; the
//!    remaining non-noise points are the cluster centers.
//!
//! ```
//! use dpc_core::{run_dpc, DpcParams, PointSet, Strategy};
//!
//! let points = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]])?;
//! let params = DpcParams::new(1.0, 0.0, 5.0)?;
//! let result = run_dpc(&points, &params, Strategy::Priority)?;
//! assert_eq!(result.centers, vec![0, 3]);
//! assert_eq!(result.labels, vec![1, 1, 1, 4, 4]);
//! # Ok::<(), dpc_core::DpcError>(())
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod dependent;
pub mod error;
pub mod fenwick;
pub mod geometry;
pub mod incomplete;
pub mod io;
pub mod kdtree;
pub mod oracle;
pub mod pipeline;
pub mod priority;
pub mod union_find;

pub use dependent::DependentAssignment;
pub use error::{DpcError, Result};
pub use geometry::{dist, farthest_corner, priority_gt, BoundingBox, DpcParams, Neighbor, PointId, PointSet, PriorityKey};
pub use kdtree::{KdTree, KdTreeOptions};
pub use pipeline::{
    compute_densities, find_dependent_points, run_dpc, run_dpc_timed, single_linkage_cluster, with_threads,
    Clustering, DpcResult, StepTimes, Strategy, NOISE,
};

//! Sequential dependent-point finder over a fully built kd-tree whose points
//! start inactive and are switched on in priority order.

use crate::dependent::DependentAssignment;
use crate::error::Result;
use crate::geometry::{priority_keys, Neighbor, PointId, PointSet};
use crate::kdtree::{KdTree, KdTreeOptions};

#[derive(Debug, Clone)]
pub struct IncompleteKdTree {
    base: KdTree,
    node_active: Vec<bool>,
    /// Indexed by leaf-order position.
    point_active: Vec<bool>,
    leaf_of: Vec<u32>,
    pos_of: Vec<u32>,
}

impl IncompleteKdTree {
    /// Builds the tree over all points with nothing active.
    pub fn build(points: &PointSet, opts: KdTreeOptions) -> Result<Self> {
        let base = KdTree::build(points, opts)?;
        let n = points.len();
        let mut leaf_of = vec![0u32; n];
        let mut pos_of = vec![0u32; n];
        for node in 0..base.num_nodes() {
            if base.is_leaf(node) {
                for pos in base.node_span(node) {
                    let id = base.ids()[pos];
                    leaf_of[id] = node as u32;
                    pos_of[id] = pos as u32;
                }
            }
        }
        Ok(IncompleteKdTree {
            node_active: vec![false; base.num_nodes()],
            point_active: vec![false; n],
            base,
            leaf_of,
            pos_of,
        })
    }

    pub fn tree(&self) -> &KdTree {
        &self.base
    }

    pub fn is_node_active(&self, node: usize) -> bool {
        self.node_active[node]
    }

    pub fn is_point_active(&self, id: PointId) -> bool {
        self.point_active[self.pos_of[id] as usize]
    }

    pub fn leaf_of(&self, id: PointId) -> usize {
        self.leaf_of[id] as usize
    }

    /// Marks `id` active and flags its leaf-to-root path. Returns how many
    /// node flags changed; activating an active point is a no-op.
    pub fn activate(&mut self, id: PointId) -> usize {
        let pos = self.pos_of[id] as usize;
        if self.point_active[pos] {
            return 0;
        }
        self.point_active[pos] = true;
        let mut flipped = 0;
        let mut node = Some(self.leaf_of[id] as usize);
        while let Some(v) = node {
            if self.node_active[v] {
                // ancestors of an active node are already active
                break;
            }
            self.node_active[v] = true;
            flipped += 1;
            node = self.base.parent(v);
        }
        flipped
    }

    /// Nearest active point to `q`, ties broken by smaller id.
    pub fn nearest_active(&self, q: &[f64]) -> Option<Neighbor> {
        let mut visits = 0;
        self.nearest_active_counted(q, &mut visits)
    }

    pub fn nearest_active_counted(&self, q: &[f64], visits: &mut usize) -> Option<Neighbor> {
        self.base.nearest_filtered(
            q,
            |node| self.node_active[node],
            |pos, _| self.point_active[pos],
            visits,
        )
    }
}

/// Visits points in decreasing priority; each non-noise point queries the
/// already-active (higher priority) points, then every point is activated.
pub fn incomplete_dependent_point(points: &PointSet, rho: &[f64], rho_min: f64) -> Result<DependentAssignment> {
    incomplete_dependent_point_with(points, rho, rho_min, KdTreeOptions::default())
}

pub fn incomplete_dependent_point_with(
    points: &PointSet,
    rho: &[f64],
    rho_min: f64,
    opts: KdTreeOptions,
) -> Result<DependentAssignment> {
    let n = points.len();
    crate::dependent::check_densities(points, rho)?;
    let mut tree = IncompleteKdTree::build(points, opts)?;
    let mut order: Vec<PointId> = (0..n).collect();
    let keys = priority_keys(rho);
    order.sort_unstable_by(|&a, &b| keys[b].cmp(&keys[a]));

    let mut out = DependentAssignment::unassigned(n);
    for &id in &order {
        if rho[id] >= rho_min {
            if let Some(nb) = tree.nearest_active(points.point(id)) {
                out.set(id, nb);
            }
        }
        tree.activate(id);
    }
    Ok(out)
}

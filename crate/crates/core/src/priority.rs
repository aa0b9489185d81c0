//! Priority search kd-tree: every node stores the highest-priority point of
//! its subtree, so priorities form a max-heap along every root-to-leaf path.
//!
//! The tree holds exactly one point per node. Nodes are laid out in preorder
//! and node `i` stores `ids[i]`; its subtree occupies positions
//! `i..end[i]`, its left child (if any) is `i + 1` and its right child (if
//! any) starts at `end[i + 1]`.

use rayon::prelude::*;

use crate::dependent::{check_densities, DependentAssignment};
use crate::error::{DpcError, Result};
use crate::geometry::{
    box_min_sq_dist, boxes_intersect, contains, priority_keys, sq_dist, BoundingBox, Neighbor, PointId, PointSet,
    PriorityKey,
};
use crate::kdtree::{widest_dim, DEFAULT_GRAIN};

/// Minimum number of queries handed to one worker.
pub const QUERY_GRAIN: usize = 64;

#[derive(Debug, Clone)]
pub struct PrioritySearchKdTree {
    dim: usize,
    ids: Vec<PointId>,
    coords: Vec<f64>,
    gamma: Vec<PriorityKey>,
    end: Vec<u32>,
    split_dim: Vec<u32>,
    boxes: Vec<f64>,
}

struct BuildCtx<'a> {
    points: &'a PointSet,
    gamma: &'a [PriorityKey],
    grain: usize,
}

struct Slots<'a> {
    ids: &'a mut [PointId],
    end: &'a mut [u32],
    split_dim: &'a mut [u32],
    boxes: &'a mut [f64],
}

impl PrioritySearchKdTree {
    /// Builds the tree; `gamma[id]` is the priority of point `id`.
    pub fn build(points: &PointSet, gamma: &[PriorityKey]) -> Result<Self> {
        Self::build_with_grain(points, gamma, DEFAULT_GRAIN)
    }

    pub fn build_with_grain(points: &PointSet, gamma: &[PriorityKey], grain: usize) -> Result<Self> {
        let n = points.len();
        if gamma.len() != n {
            return Err(DpcError::InvalidParams(format!("{} priorities for {} points", gamma.len(), n)));
        }
        if n >= u32::MAX as usize {
            return Err(DpcError::InvalidParams("too many points for one tree".into()));
        }
        let dim = points.dim();
        let mut ids: Vec<PointId> = (0..n).collect();
        let mut end = vec![0u32; n];
        let mut split_dim = vec![u32::MAX; n];
        let mut boxes = vec![0.0; n * 2 * dim];
        let ctx = BuildCtx { points, gamma, grain };
        build_rec(
            &ctx,
            Slots {
                ids: &mut ids,
                end: &mut end,
                split_dim: &mut split_dim,
                boxes: &mut boxes,
            },
            0,
        );
        let mut coords = vec![0.0; n * dim];
        coords
            .par_chunks_mut(dim)
            .zip(ids.par_iter())
            .with_min_len(grain)
            .for_each(|(dst, &id)| dst.copy_from_slice(points.point(id)));
        let node_gamma = ids.iter().map(|&id| gamma[id]).collect();
        Ok(PrioritySearchKdTree {
            dim,
            ids,
            coords,
            gamma: node_gamma,
            end,
            split_dim,
            boxes,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Id of the point stored at `node`.
    pub fn stored_id(&self, node: usize) -> PointId {
        self.ids[node]
    }

    pub fn gamma(&self, node: usize) -> PriorityKey {
        self.gamma[node]
    }

    /// Number of points (and nodes) in the subtree of `node`.
    pub fn subtree_size(&self, node: usize) -> usize {
        self.end[node] as usize - node
    }

    /// Ids of every point in the subtree of `node`.
    pub fn subtree_ids(&self, node: usize) -> &[PointId] {
        &self.ids[node..self.end[node] as usize]
    }

    pub fn node_box(&self, node: usize) -> (&[f64], &[f64]) {
        self.boxes[node * 2 * self.dim..(node + 1) * 2 * self.dim].split_at(self.dim)
    }

    pub fn split_dim(&self, node: usize) -> Option<usize> {
        let s = self.split_dim[node];
        (s != u32::MAX).then_some(s as usize)
    }

    #[inline]
    pub fn left(&self, node: usize) -> Option<usize> {
        (self.end[node] as usize > node + 1).then_some(node + 1)
    }

    #[inline]
    pub fn right(&self, node: usize) -> Option<usize> {
        let l = self.left(node)?;
        let r = self.end[l] as usize;
        (r < self.end[node] as usize).then_some(r)
    }

    pub fn children(&self, node: usize) -> impl Iterator<Item = usize> {
        self.left(node).into_iter().chain(self.right(node))
    }

    #[inline]
    fn coords_at(&self, node: usize) -> &[f64] {
        &self.coords[node * self.dim..(node + 1) * self.dim]
    }

    /// Nearest point whose priority is strictly above `gamma_q`, ties broken
    /// by smaller id.
    pub fn nearest_higher(&self, q: &[f64], gamma_q: &PriorityKey) -> Option<Neighbor> {
        let mut visits = 0;
        self.nearest_higher_counted(q, gamma_q, true, &mut visits)
    }

    /// As [`nearest_higher`](Self::nearest_higher), counting visited nodes.
    /// With `prune_priority` unset, subtrees are only pruned by distance and
    /// low-priority points are filtered one by one.
    pub fn nearest_higher_counted(
        &self,
        q: &[f64],
        gamma_q: &PriorityKey,
        prune_priority: bool,
        visits: &mut usize,
    ) -> Option<Neighbor> {
        debug_assert_eq!(q.len(), self.dim);
        let mut best = None;
        if !self.is_empty() {
            self.nn_rec(0, q, gamma_q, prune_priority, &mut best, visits);
        }
        best
    }

    fn nn_rec(
        &self,
        node: usize,
        q: &[f64],
        gamma_q: &PriorityKey,
        prune_priority: bool,
        best: &mut Option<Neighbor>,
        visits: &mut usize,
    ) {
        let higher = self.gamma[node] > *gamma_q;
        if prune_priority && !higher {
            return;
        }
        let bound = best.map_or(f64::INFINITY, |b| b.sq_dist);
        let (lo, hi) = self.node_box(node);
        if box_min_sq_dist(lo, hi, q) > bound {
            return;
        }
        *visits += 1;
        if higher {
            let cand = Neighbor {
                id: self.ids[node],
                sq_dist: sq_dist(self.coords_at(node), q),
            };
            if best.is_none_or(|b| cand.beats(&b)) {
                *best = Some(cand);
            }
        }
        match (self.left(node), self.right(node)) {
            (None, _) => {}
            (Some(l), None) => self.nn_rec(l, q, gamma_q, prune_priority, best, visits),
            (Some(l), Some(r)) => {
                let dl = {
                    let (lo, hi) = self.node_box(l);
                    box_min_sq_dist(lo, hi, q)
                };
                let dr = {
                    let (lo, hi) = self.node_box(r);
                    box_min_sq_dist(lo, hi, q)
                };
                let (first, second) = if dr < dl { (r, l) } else { (l, r) };
                self.nn_rec(first, q, gamma_q, prune_priority, best, visits);
                self.nn_rec(second, q, gamma_q, prune_priority, best, visits);
            }
        }
    }

    /// Ids of all points inside the closed box with priority above
    /// `gamma_q`, in tree order.
    pub fn range_higher(&self, bb: &BoundingBox, gamma_q: &PriorityKey) -> Vec<PointId> {
        let mut out = Vec::new();
        let mut visits = 0;
        if !self.is_empty() {
            self.range_rec(0, bb, gamma_q, &mut out, &mut visits);
        }
        out
    }

    pub fn range_higher_counted(&self, bb: &BoundingBox, gamma_q: &PriorityKey, visits: &mut usize) -> Vec<PointId> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.range_rec(0, bb, gamma_q, &mut out, visits);
        }
        out
    }

    fn range_rec(&self, node: usize, bb: &BoundingBox, gamma_q: &PriorityKey, out: &mut Vec<PointId>, visits: &mut usize) {
        if self.gamma[node] <= *gamma_q {
            return;
        }
        let (lo, hi) = self.node_box(node);
        if !boxes_intersect(lo, hi, &bb.lo, &bb.hi) {
            return;
        }
        *visits += 1;
        if contains(&bb.lo, &bb.hi, self.coords_at(node)) {
            out.push(self.ids[node]);
        }
        for c in self.children(node) {
            self.range_rec(c, bb, gamma_q, out, visits);
        }
    }
}

fn build_rec(ctx: &BuildCtx<'_>, slots: Slots<'_>, offset: usize) {
    let dim = ctx.points.dim();
    let Slots {
        ids,
        end,
        split_dim,
        boxes,
    } = slots;
    let m = ids.len();
    if m == 0 {
        return;
    }
    let (my_box, rest_boxes) = boxes.split_at_mut(2 * dim);
    {
        let (lo, hi) = my_box.split_at_mut(dim);
        lo.fill(f64::INFINITY);
        hi.fill(f64::NEG_INFINITY);
        for &id in ids.iter() {
            for ((l, h), &x) in lo.iter_mut().zip(hi.iter_mut()).zip(ctx.points.point(id)) {
                *l = l.min(x);
                *h = h.max(x);
            }
        }
    }
    let top = (0..m).max_by_key(|&i| ctx.gamma[ids[i]]).expect("non-empty");
    ids.swap(0, top);
    end[0] = (offset + m) as u32;
    if m == 1 {
        return;
    }

    let sd = widest_dim(my_box, dim);
    split_dim[0] = sd as u32;
    let (_, rest) = ids.split_at_mut(1);
    let mid = (m - 1).div_ceil(2);
    if mid < rest.len() {
        let points = ctx.points;
        rest.select_nth_unstable_by(mid, |&a, &b| {
            points.point(a)[sd].total_cmp(&points.point(b)[sd]).then(a.cmp(&b))
        });
    }
    let (left_ids, right_ids) = rest.split_at_mut(mid);
    let (left_end, right_end) = end[1..].split_at_mut(mid);
    let (left_sd, right_sd) = split_dim[1..].split_at_mut(mid);
    let (left_b, right_b) = rest_boxes.split_at_mut(mid * 2 * dim);
    let left = Slots {
        ids: left_ids,
        end: left_end,
        split_dim: left_sd,
        boxes: left_b,
    };
    let right = Slots {
        ids: right_ids,
        end: right_end,
        split_dim: right_sd,
        boxes: right_b,
    };
    if m > ctx.grain {
        rayon::join(
            || build_rec(ctx, left, offset + 1),
            || build_rec(ctx, right, offset + 1 + mid),
        );
    } else {
        build_rec(ctx, left, offset + 1);
        build_rec(ctx, right, offset + 1 + mid);
    }
}

/// Dependent points of every non-noise point via parallel priority
/// nearest-neighbor queries, each point using its own key as threshold.
pub fn priority_dependent_point(points: &PointSet, rho: &[f64], rho_min: f64) -> Result<DependentAssignment> {
    check_densities(points, rho)?;
    let keys = priority_keys(rho);
    let tree = PrioritySearchKdTree::build(points, &keys)?;
    Ok(priority_dependent_with_tree(&tree, points, rho, rho_min))
}

pub fn priority_dependent_with_tree(
    tree: &PrioritySearchKdTree,
    points: &PointSet,
    rho: &[f64],
    rho_min: f64,
) -> DependentAssignment {
    let found: Vec<Option<Neighbor>> = (0..points.len())
        .into_par_iter()
        .with_min_len(QUERY_GRAIN)
        .map(|id| {
            if rho[id] >= rho_min {
                tree.nearest_higher(points.point(id), &PriorityKey::new(rho[id], id))
            } else {
                None
            }
        })
        .collect();
    DependentAssignment::from_neighbors(found)
}

//! Balanced, immutable kd-tree with tight node boxes.
//!
//! Nodes live in one preallocated vector in preorder: the left child of node
//! `i` is `i + 1` and the right child follows the whole left subtree. Because
//! the shape depends only on the subtree size, both halves of the node and
//! point arrays can be handed to the two recursive builds as disjoint slices.

use crate::error::{DpcError, Result};
use crate::geometry::{box_max_sq_dist, box_min_sq_dist, sq_dist, Neighbor, PointId, PointSet};

pub const DEFAULT_LEAF_CAP: usize = 16;
pub const DEFAULT_GRAIN: usize = 1024;

pub(crate) const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub struct KdTreeOptions {
    /// Maximum number of points stored in a leaf.
    pub leaf_cap: usize,
    /// Subtrees larger than this build their two children concurrently.
    pub grain: usize,
}

impl Default for KdTreeOptions {
    fn default() -> Self {
        KdTreeOptions {
            leaf_cap: DEFAULT_LEAF_CAP,
            grain: DEFAULT_GRAIN,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    parent: u32,
    split_dim: u32,
    split_val: f64,
}

impl Node {
    const EMPTY: Node = Node {
        start: 0,
        end: 0,
        left: NO_NODE,
        right: NO_NODE,
        parent: NO_NODE,
        split_dim: 0,
        split_val: 0.0,
    };
}

/// Result of a range count together with the number of nodes it touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeCount {
    pub count: usize,
    pub visits: usize,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    leaf_cap: usize,
    /// Point ids in leaf order.
    ids: Vec<PointId>,
    /// Coordinates in leaf order.
    coords: Vec<f64>,
    nodes: Vec<Node>,
    /// `2 * dim` values per node: lo then hi.
    boxes: Vec<f64>,
}

/// Number of nodes in a tree over `m` points with the given leaf capacity.
fn subtree_nodes(m: usize, leaf_cap: usize) -> usize {
    if m <= leaf_cap {
        1
    } else {
        let left = m.div_ceil(2);
        1 + subtree_nodes(left, leaf_cap) + subtree_nodes(m - left, leaf_cap)
    }
}

struct BuildCtx<'a> {
    points: &'a PointSet,
    opts: KdTreeOptions,
}

impl KdTree {
    /// Builds a tree over every point of `points`.
    pub fn build(points: &PointSet, opts: KdTreeOptions) -> Result<Self> {
        KdTree::build_subset(points, (0..points.len()).collect(), opts)
    }

    /// Builds a tree over the given ids of `points`.
    pub fn build_subset(points: &PointSet, mut ids: Vec<PointId>, opts: KdTreeOptions) -> Result<Self> {
        if ids.is_empty() {
            return Err(DpcError::EmptyInput);
        }
        if opts.leaf_cap == 0 {
            return Err(DpcError::InvalidParams("leaf_cap must be at least 1".into()));
        }
        if ids.len() >= NO_NODE as usize {
            return Err(DpcError::InvalidParams("too many points for one tree".into()));
        }
        let dim = points.dim();
        let n_nodes = subtree_nodes(ids.len(), opts.leaf_cap);
        let mut nodes = vec![Node::EMPTY; n_nodes];
        let mut boxes = vec![0.0; n_nodes * 2 * dim];
        let ctx = BuildCtx { points, opts };
        build_rec(&ctx, &mut ids, &mut nodes, &mut boxes, 0, 0, NO_NODE);

        let mut coords = vec![0.0; ids.len() * dim];
        let gather = |(dst, &id): (&mut [f64], &PointId)| dst.copy_from_slice(points.point(id));
        if ids.len() > opts.grain {
            use rayon::prelude::*;
            coords.par_chunks_mut(dim).zip(ids.par_iter()).for_each(gather);
        } else {
            coords.chunks_mut(dim).zip(ids.iter()).for_each(gather);
        }
        Ok(KdTree {
            dim,
            leaf_cap: opts.leaf_cap,
            ids,
            coords,
            nodes,
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

    pub fn leaf_cap(&self) -> usize {
        self.leaf_cap
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.nodes[node].left == NO_NODE
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let n = &self.nodes[node];
        (n.left != NO_NODE).then_some((n.left as usize, n.right as usize))
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        let p = self.nodes[node].parent;
        (p != NO_NODE).then_some(p as usize)
    }

    /// Number of points in the subtree of `node`.
    pub fn count(&self, node: usize) -> usize {
        let n = &self.nodes[node];
        (n.end - n.start) as usize
    }

    /// Ids of every point in the subtree of `node`.
    pub fn node_ids(&self, node: usize) -> &[PointId] {
        let n = &self.nodes[node];
        &self.ids[n.start as usize..n.end as usize]
    }

    /// Range of leaf-order positions covered by `node`.
    pub fn node_span(&self, node: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[node];
        n.start as usize..n.end as usize
    }

    /// Splitting dimension and value of an internal node. Left points have
    /// coordinates `<= value`, right points `>= value`.
    pub fn split(&self, node: usize) -> Option<(usize, f64)> {
        let n = &self.nodes[node];
        (n.left != NO_NODE).then_some((n.split_dim as usize, n.split_val))
    }

    pub fn node_box(&self, node: usize) -> (&[f64], &[f64]) {
        let b = &self.boxes[node * 2 * self.dim..(node + 1) * 2 * self.dim];
        b.split_at(self.dim)
    }

    /// Ids in leaf order.
    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    /// Coordinates of the point at leaf-order position `pos`.
    #[inline]
    pub fn coords_at(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &KdTree, node: usize) -> usize {
            match t.children(node) {
                None => 0,
                Some((l, r)) => 1 + rec(t, l).max(rec(t, r)),
            }
        }
        rec(self, 0)
    }

    /// Number of points within closed distance `r` of `center`.
    pub fn range_count(&self, center: &[f64], r: f64) -> usize {
        self.range_count_with(center, r, true).count
    }

    /// Range count with a node-visit counter. With `containment` set, a node
    /// whose farthest corner lies inside the ball contributes its whole count
    /// without being descended.
    pub fn range_count_with(&self, center: &[f64], r: f64, containment: bool) -> RangeCount {
        debug_assert_eq!(center.len(), self.dim);
        let mut out = RangeCount { count: 0, visits: 0 };
        self.range_rec(0, center, r * r, containment, &mut out);
        out
    }

    fn range_rec(&self, node: usize, center: &[f64], r2: f64, containment: bool, out: &mut RangeCount) {
        out.visits += 1;
        let (lo, hi) = self.node_box(node);
        if box_min_sq_dist(lo, hi, center) > r2 {
            return;
        }
        if containment && box_max_sq_dist(lo, hi, center) <= r2 {
            out.count += self.count(node);
            return;
        }
        let n = self.nodes[node];
        if n.left == NO_NODE {
            out.count += (n.start as usize..n.end as usize)
                .filter(|&pos| sq_dist(self.coords_at(pos), center) <= r2)
                .count();
        } else {
            self.range_rec(n.left as usize, center, r2, containment, out);
            self.range_rec(n.right as usize, center, r2, containment, out);
        }
    }

    /// Exact nearest neighbor of `q`, ties broken by smaller id, optionally
    /// skipping one id. `None` only when every stored point is excluded.
    pub fn nearest(&self, q: &[f64], exclude: Option<PointId>) -> Option<Neighbor> {
        let mut visits = 0;
        match exclude {
            Some(x) => self.nearest_filtered(q, |_| true, |_, id| id != x, &mut visits),
            None => self.nearest_filtered(q, |_| true, |_, _| true, &mut visits),
        }
    }

    /// Nearest-neighbor search restricted by a node predicate (prunes whole
    /// subtrees) and a point predicate taking `(leaf position, id)`.
    pub(crate) fn nearest_filtered<N, P>(&self, q: &[f64], node_ok: N, point_ok: P, visits: &mut usize) -> Option<Neighbor>
    where
        N: Fn(usize) -> bool,
        P: Fn(usize, PointId) -> bool,
    {
        debug_assert_eq!(q.len(), self.dim);
        let mut best = None;
        self.nn_rec(0, q, &node_ok, &point_ok, &mut best, visits);
        best
    }

    fn nn_rec<N, P>(&self, node: usize, q: &[f64], node_ok: &N, point_ok: &P, best: &mut Option<Neighbor>, visits: &mut usize)
    where
        N: Fn(usize) -> bool,
        P: Fn(usize, PointId) -> bool,
    {
        if !node_ok(node) {
            return;
        }
        let (lo, hi) = self.node_box(node);
        let bound = best.map_or(f64::INFINITY, |b| b.sq_dist);
        if box_min_sq_dist(lo, hi, q) > bound {
            return;
        }
        *visits += 1;
        let n = self.nodes[node];
        if n.left == NO_NODE {
            for pos in n.start as usize..n.end as usize {
                let id = self.ids[pos];
                if !point_ok(pos, id) {
                    continue;
                }
                let cand = Neighbor {
                    id,
                    sq_dist: sq_dist(self.coords_at(pos), q),
                };
                if best.is_none_or(|b| cand.beats(&b)) {
                    *best = Some(cand);
                }
            }
            return;
        }
        let (l, r) = (n.left as usize, n.right as usize);
        let dl = {
            let (lo, hi) = self.node_box(l);
            box_min_sq_dist(lo, hi, q)
        };
        let dr = {
            let (lo, hi) = self.node_box(r);
            box_min_sq_dist(lo, hi, q)
        };
        let (first, second) = if dr < dl { (r, l) } else { (l, r) };
        self.nn_rec(first, q, node_ok, point_ok, best, visits);
        self.nn_rec(second, q, node_ok, point_ok, best, visits);
    }
}

fn build_rec(ctx: &BuildCtx<'_>, ids: &mut [PointId], nodes: &mut [Node], boxes: &mut [f64], start: usize, node_idx: usize, parent: u32) {
    let dim = ctx.points.dim();
    let m = ids.len();
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
    let (me, rest_nodes) = nodes.split_first_mut().expect("node slot");
    *me = Node {
        start: start as u32,
        end: (start + m) as u32,
        parent,
        ..Node::EMPTY
    };
    if m <= ctx.opts.leaf_cap {
        return;
    }

    let split_dim = widest_dim(my_box, dim);
    let mid = m.div_ceil(2);
    let points = ctx.points;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        points.point(a)[split_dim]
            .total_cmp(&points.point(b)[split_dim])
            .then(a.cmp(&b))
    });
    let left_nodes = subtree_nodes(mid, ctx.opts.leaf_cap);
    let left_idx = node_idx + 1;
    let right_idx = left_idx + left_nodes;
    me.left = left_idx as u32;
    me.right = right_idx as u32;
    me.split_dim = split_dim as u32;
    me.split_val = points.point(ids[mid])[split_dim];

    let (left_ids, right_ids) = ids.split_at_mut(mid);
    let (left_n, right_n) = rest_nodes.split_at_mut(left_nodes);
    let (left_b, right_b) = rest_boxes.split_at_mut(left_nodes * 2 * dim);
    let me_idx = node_idx as u32;
    if m > ctx.opts.grain {
        rayon::join(
            || build_rec(ctx, left_ids, left_n, left_b, start, left_idx, me_idx),
            || build_rec(ctx, right_ids, right_n, right_b, start + mid, right_idx, me_idx),
        );
    } else {
        build_rec(ctx, left_ids, left_n, left_b, start, left_idx, me_idx);
        build_rec(ctx, right_ids, right_n, right_b, start + mid, right_idx, me_idx);
    }
}

/// Dimension with the widest extent in a `lo ++ hi` box; lowest index wins ties.
pub(crate) fn widest_dim(lohi: &[f64], dim: usize) -> usize {
    let (lo, hi) = lohi.split_at(dim);
    let mut best = 0;
    let mut best_w = f64::NEG_INFINITY;
    for k in 0..dim {
        let w = hi[k] - lo[k];
        if w > best_w {
            best = k;
            best_w = w;
        }
    }
    best
}

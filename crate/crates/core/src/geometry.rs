//! Shared domain types: point tables, clustering parameters, the priority
//! order and axis-aligned boxes.
//!
//! All distance comparisons in the crate go through [`sq_dist`] and compare
//! squared distances directly. Every index structure and the brute-force
//! oracle therefore see bit-identical values, and ties are broken by the
//! smaller point id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{DpcError, Result};

/// Index of a point in its [`PointSet`]. Files and the C interface use
/// `id + 1` so that external ids run from 1 to n.
pub type PointId = usize;

/// An immutable n x d table of finite coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    dim: usize,
}

impl PointSet {
    /// Wraps a row-major coordinate buffer of `coords.len() / dim` points.
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(DpcError::InvalidParams("dimension must be at least 1".into()));
        }
        if coords.is_empty() {
            return Err(DpcError::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(DpcError::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(DpcError::NonFinite {
                point: pos / dim,
                dim: pos % dim,
            });
        }
        Ok(PointSet { coords, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(DpcError::EmptyInput)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(DpcError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        PointSet::new(coords, dim)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: a point set holds at least one point.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, id: PointId) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Tight bounding box of every point in the set.
    pub fn bounding_box(&self) -> BoundingBox {
        let mut bb = BoundingBox::empty(self.dim);
        for p in self.iter() {
            bb.expand(p);
        }
        bb
    }
}

/// The three clustering hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcParams {
    /// Radius of the closed density ball.
    pub d_cut: f64,
    /// Points with density below this are noise.
    pub rho_min: f64,
    /// Non-noise points with dependent distance at least this are centers.
    pub delta_min: f64,
}

impl DpcParams {
    pub fn new(d_cut: f64, rho_min: f64, delta_min: f64) -> Result<Self> {
        let params = DpcParams {
            d_cut,
            rho_min,
            delta_min,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_cut.is_finite() && self.d_cut > 0.0) {
            return Err(DpcError::InvalidParams(format!(
                "d_cut must be finite and > 0, got {}",
                self.d_cut
            )));
        }
        if !(self.rho_min.is_finite() && self.rho_min >= 0.0) {
            return Err(DpcError::InvalidParams(format!(
                "rho_min must be finite and >= 0, got {}",
                self.rho_min
            )));
        }
        if !(self.delta_min.is_finite() && self.delta_min > 0.0) {
            return Err(DpcError::InvalidParams(format!(
                "delta_min must be finite and > 0, got {}",
                self.delta_min
            )));
        }
        Ok(())
    }
}

/// Priority of a point: higher density first, then smaller id.
///
/// `Ord` is oriented so that `a > b` means `a` has the higher priority.
#[derive(Debug, Clone, Copy)]
pub struct PriorityKey {
    pub rho: f64,
    pub id: PointId,
}

impl PriorityKey {
    /// Sentinel below every real key.
    pub const BOTTOM: PriorityKey = PriorityKey {
        rho: f64::NEG_INFINITY,
        id: PointId::MAX,
    };

    #[inline]
    pub fn new(rho: f64, id: PointId) -> Self {
        PriorityKey { rho, id }
    }
}

impl Ord for PriorityKey {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.rho
            .total_cmp(&other.rho)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for PriorityKey {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for PriorityKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PriorityKey {}

#[inline]
pub fn priority_gt(a: &PriorityKey, b: &PriorityKey) -> bool {
    a > b
}

/// Priority keys for every point given a density per point.
pub fn priority_keys(rho: &[f64]) -> Vec<PriorityKey> {
    rho.iter()
        .enumerate()
        .map(|(id, &r)| PriorityKey::new(r, id))
        .collect()
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(DpcError::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
            return Err(DpcError::InvalidParams("box has lo > hi".into()));
        }
        Ok(BoundingBox { lo, hi })
    }

    /// An inverted box that any call to [`expand`](Self::expand) fixes up.
    pub fn empty(dim: usize) -> Self {
        BoundingBox {
            lo: vec![f64::INFINITY; dim],
            hi: vec![f64::NEG_INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn expand(&mut self, p: &[f64]) {
        for ((l, h), &x) in self.lo.iter_mut().zip(self.hi.iter_mut()).zip(p) {
            *l = l.min(x);
            *h = h.max(x);
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        contains(&self.lo, &self.hi, p)
    }
}

/// Squared Euclidean distance, summed in dimension order.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// Euclidean distance between two points of equal dimension.
pub fn dist(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DpcError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(sq_dist(a, b).sqrt())
}

/// Corner of the box farthest from `center`: per dimension, `hi` when the
/// center is strictly below the midpoint, otherwise `lo`.
pub fn farthest_corner(bb: &BoundingBox, center: &[f64]) -> Vec<f64> {
    bb.lo
        .iter()
        .zip(&bb.hi)
        .zip(center)
        .map(|((&l, &h), &c)| if c < (l + h) / 2.0 { h } else { l })
        .collect()
}

#[inline]
pub(crate) fn contains(lo: &[f64], hi: &[f64], p: &[f64]) -> bool {
    lo.iter()
        .zip(hi)
        .zip(p)
        .all(|((&l, &h), &x)| l <= x && x <= h)
}

/// Squared distance from `q` to the nearest point of the box. Never exceeds
/// `sq_dist(q, p)` for any `p` inside the box, in floating point as well.
#[inline]
pub(crate) fn box_min_sq_dist(lo: &[f64], hi: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((&l, &h), &x) in lo.iter().zip(hi).zip(q) {
        let t = if x < l {
            l - x
        } else if x > h {
            x - h
        } else {
            0.0
        };
        s += t * t;
    }
    s
}

/// Squared distance from `q` to [`farthest_corner`]. Never below
/// `sq_dist(q, p)` for any `p` inside the box.
#[inline]
pub(crate) fn box_max_sq_dist(lo: &[f64], hi: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((&l, &h), &x) in lo.iter().zip(hi).zip(q) {
        let far = if x < (l + h) / 2.0 { h } else { l };
        let t = x - far;
        s += t * t;
    }
    s
}

#[inline]
pub(crate) fn boxes_intersect(lo_a: &[f64], hi_a: &[f64], lo_b: &[f64], hi_b: &[f64]) -> bool {
    lo_a.iter()
        .zip(hi_a)
        .zip(lo_b.iter().zip(hi_b))
        .all(|((&la, &ha), (&lb, &hb))| la <= hb && lb <= ha)
}

/// Lexicographic `(squared distance, id)` candidate used by every
/// nearest-neighbor search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: PointId,
    pub sq_dist: f64,
}

impl Neighbor {
    #[inline]
    pub fn dist(&self) -> f64 {
        self.sq_dist.sqrt()
    }

    /// Strictly better under `(distance, id)` order.
    #[inline]
    pub fn beats(&self, other: &Neighbor) -> bool {
        self.sq_dist < other.sq_dist || (self.sq_dist == other.sq_dist && self.id < other.id)
    }

    /// The better of two optional candidates.
    #[inline]
    pub fn min(a: Option<Neighbor>, b: Option<Neighbor>) -> Option<Neighbor> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.beats(&x) { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

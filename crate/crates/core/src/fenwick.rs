//! Dependent points through a Fenwick decomposition of the priority order.
//!
//! Points are ranked by descending priority (rank 1 is the top point) and
//! tree `i` holds ranks `i - lsb(i) + 1 ..= i`. The ranks `1..=i` are covered
//! by the trees listed by [`fenwick_cover`], so the dependent point of the
//! rank-`i` point is the best answer among the trees covering `1..i`.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::dependent::{check_densities, DependentAssignment};
use crate::error::Result;
use crate::geometry::{priority_keys, sq_dist, Neighbor, PointId, PointSet};
use crate::kdtree::{KdTree, KdTreeOptions};
use crate::priority::QUERY_GRAIN;

#[inline]
pub fn lsb(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Indices of the trees whose rank ranges tile `1..=i`, largest index first.
pub fn fenwick_cover(i: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(usize::BITS as usize);
    let mut j = i;
    while j > 0 {
        out.push(j);
        j -= lsb(j);
    }
    out
}

/// Inclusive rank range held by tree `i`.
#[inline]
pub fn tree_range(i: usize) -> (usize, usize) {
    (i - lsb(i) + 1, i)
}

#[derive(Debug, Clone)]
pub struct FenwickIndex {
    /// `order[r - 1]` is the id with rank `r`.
    order: Vec<PointId>,
    rank_of: Vec<usize>,
    /// `trees[i - 1]` holds ranks `tree_range(i)`.
    trees: Vec<KdTree>,
}

impl FenwickIndex {
    pub fn build(points: &PointSet, rho: &[f64]) -> Result<Self> {
        Self::build_with(points, rho, KdTreeOptions::default())
    }

    pub fn build_with(points: &PointSet, rho: &[f64], opts: KdTreeOptions) -> Result<Self> {
        check_densities(points, rho)?;
        let n = points.len();
        let keys = priority_keys(rho);
        let mut order: Vec<PointId> = (0..n).collect();
        order.par_sort_unstable_by(|&a, &b| keys[b].cmp(&keys[a]));
        let mut rank_of = vec![0; n];
        for (r, &id) in order.iter().enumerate() {
            rank_of[id] = r + 1;
        }

        // Largest trees first so the big builds start early.
        let mut schedule: Vec<usize> = (1..=n).collect();
        schedule.sort_by_key(|&i| std::cmp::Reverse(lsb(i)));
        let built: Vec<(usize, KdTree)> = schedule
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = tree_range(i);
                let ids = order[lo - 1..hi].to_vec();
                KdTree::build_subset(points, ids, opts).map(|t| (i, t))
            })
            .collect::<Result<_>>()?;
        let mut slots: Vec<Option<KdTree>> = vec![None; n];
        for (i, t) in built {
            slots[i - 1] = Some(t);
        }
        let trees = slots.into_iter().map(|t| t.expect("every tree built")).collect();
        Ok(FenwickIndex { order, rank_of, trees })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[PointId] {
        &self.order
    }

    /// 1-based rank of `id`.
    pub fn rank(&self, id: PointId) -> usize {
        self.rank_of[id]
    }

    /// Tree `i` (1-based).
    pub fn tree(&self, i: usize) -> &KdTree {
        &self.trees[i - 1]
    }

    pub fn total_stored(&self) -> usize {
        self.trees.iter().map(KdTree::len).sum()
    }

    /// Nearest point to `q` among ranks `1..=i`, combining the covering
    /// trees by `(distance, id)` minimum.
    pub fn query(&self, i: usize, q: &[f64]) -> Option<Neighbor> {
        fenwick_cover(i)
            .into_iter()
            .map(|j| self.trees[j - 1].nearest(q, None))
            .fold(None, Neighbor::min)
    }

    /// Same result as [`query`](Self::query), with the covering trees
    /// searched concurrently and combined through a shared [`WriteMin`].
    /// `points` must be the set the index was built from.
    pub fn query_concurrent(&self, points: &PointSet, i: usize, q: &[f64]) -> Option<Neighbor> {
        let cell = WriteMin::new(|id| sq_dist(points.point(id), q));
        fenwick_cover(i).into_par_iter().for_each(|j| {
            if let Some(nb) = self.trees[j - 1].nearest(q, None) {
                cell.write(nb.id);
            }
        });
        cell.get()
    }
}

/// Lock-free minimum cell over candidate ids ordered by `(key(id), id)`.
///
/// Only the id is stored; the key (a squared distance) is recomputed from
/// the candidate, so the comparison and the swap act on one machine word.
pub struct WriteMin<K> {
    cell: AtomicUsize,
    key: K,
}

impl<K: Fn(PointId) -> f64> WriteMin<K> {
    const EMPTY: usize = usize::MAX;

    pub fn new(key: K) -> Self {
        WriteMin {
            cell: AtomicUsize::new(Self::EMPTY),
            key,
        }
    }

    /// Replaces the stored id when `id` is strictly smaller under
    /// `(key, id)`. The final value is independent of arrival order.
    pub fn write(&self, id: PointId) {
        let k = (self.key)(id);
        let mut cur = self.cell.load(Ordering::Acquire);
        loop {
            if cur != Self::EMPTY {
                let ck = (self.key)(cur);
                if !(k < ck || (k == ck && id < cur)) {
                    return;
                }
            }
            match self.cell.compare_exchange_weak(cur, id, Ordering::AcqRel, Ordering::Acquire) {
                Ok(_) => return,
                Err(seen) => cur = seen,
            }
        }
    }

    pub fn get(&self) -> Option<Neighbor> {
        let id = self.cell.load(Ordering::Acquire);
        (id != Self::EMPTY).then(|| Neighbor {
            id,
            sq_dist: (self.key)(id),
        })
    }
}

/// Dependent point of each non-noise point at rank `i > 1`: the answer of
/// [`FenwickIndex::query`] over ranks `1..i`.
pub fn fenwick_dependent_point(points: &PointSet, rho: &[f64], rho_min: f64) -> Result<DependentAssignment> {
    let index = FenwickIndex::build(points, rho)?;
    Ok(fenwick_dependent_with_index(&index, points, rho, rho_min))
}

pub fn fenwick_dependent_with_index(
    index: &FenwickIndex,
    points: &PointSet,
    rho: &[f64],
    rho_min: f64,
) -> DependentAssignment {
    let found: Vec<Option<Neighbor>> = (0..points.len())
        .into_par_iter()
        .with_min_len(QUERY_GRAIN)
        .map(|id| {
            let rank = index.rank(id);
            if rank > 1 && rho[id] >= rho_min {
                index.query(rank - 1, points.point(id))
            } else {
                None
            }
        })
        .collect();
    DependentAssignment::from_neighbors(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canonical() -> (PointSet, Vec<f64>) {
        let ps = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]]).unwrap();
        (ps, vec![3.0, 2.0, 2.0, 2.0, 2.0])
    }

    #[test]
    fn cover_examples() {
        assert_eq!(fenwick_cover(6), vec![6, 4]);
        assert_eq!(fenwick_cover(4), vec![4]);
        assert_eq!(fenwick_cover(3), vec![3, 2]);
        assert!(fenwick_cover(0).is_empty());
    }

    #[test]
    fn cover_tiles_prefix_exhaustively() {
        for i in 0..=4096usize {
            let cover = fenwick_cover(i);
            let mut seen = vec![0u8; i + 1];
            for &j in &cover {
                let (lo, hi) = tree_range(j);
                for r in lo..=hi {
                    seen[r] += 1;
                }
            }
            assert!(seen[1..].iter().all(|&c| c == 1), "cover of {i}");
            let bound = if i == 0 { 0 } else { i.ilog2() as usize + 1 };
            assert!(cover.len() <= bound);
        }
    }

    #[test]
    fn tree_sizes_follow_lsb() {
        let (ps, rho) = canonical();
        let idx = FenwickIndex::build(&ps, &rho).unwrap();
        let sizes: Vec<usize> = (1..=5).map(|i| idx.tree(i).len()).collect();
        assert_eq!(sizes, vec![1, 2, 1, 4, 1]);
        let one = PointSet::from_rows(&[[1.0]]).unwrap();
        let idx = FenwickIndex::build(&one, &[1.0]).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.tree(1).len(), 1);
    }

    #[test]
    fn membership_by_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 500;
        let coords = (0..n * 2).map(|_| rng.random_range(0.0..1.0)).collect();
        let ps = PointSet::new(coords, 2).unwrap();
        let rho: Vec<f64> = (0..n).map(|_| rng.random_range(1..20) as f64).collect();
        let idx = FenwickIndex::build(&ps, &rho).unwrap();
        let keys = priority_keys(&rho);
        for w in idx.order().windows(2) {
            assert!(keys[w[0]] > keys[w[1]]);
        }
        for i in 1..=n {
            let mut held: Vec<usize> = idx.tree(i).ids().iter().map(|&id| idx.rank(id)).collect();
            held.sort_unstable();
            let want: Vec<usize> = (1..=n).filter(|&r| i - lsb(i) < r && r <= i).collect();
            assert_eq!(held, want);
        }
        let log = n.ilog2() as usize + 1;
        assert!(idx.total_stored() <= n * log);
    }

    #[test]
    fn query_examples() {
        let (ps, rho) = canonical();
        let idx = FenwickIndex::build(&ps, &rho).unwrap();
        assert!(idx.query(0, &[0.0, 0.0]).is_none());
        assert_eq!(idx.query(1, &[50.0, 50.0]).unwrap().id, 0);
        assert_eq!(idx.rank(3), 4);
        let nb = idx.query(3, ps.point(3)).unwrap();
        assert_eq!(nb.id, 1);
        assert_eq!(nb.dist(), 181f64.sqrt());
        assert_eq!(idx.query_concurrent(&ps, 3, ps.point(3)), Some(nb));
    }

    #[test]
    fn combination_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let table: Vec<f64> = (0..20).map(|_| rng.random_range(0..5) as f64).collect();
            let mut cands: Vec<Neighbor> = (0..12)
                .map(|_| {
                    let id = rng.random_range(0..20);
                    Neighbor { id, sq_dist: table[id] }
                })
                .collect();
            let want = cands.iter().copied().map(Some).fold(None, Neighbor::min);
            for _ in 0..5 {
                cands.shuffle(&mut rng);
                let got = cands.iter().copied().map(Some).fold(None, Neighbor::min);
                assert_eq!(got, want);
                let cell = WriteMin::new(|id| table[id]);
                cands.par_iter().for_each(|nb| cell.write(nb.id));
                assert_eq!(cell.get(), want);
            }
        }
    }

    #[test]
    fn dependent_examples() {
        let (ps, rho) = canonical();
        let dep = fenwick_dependent_point(&ps, &rho, 0.0).unwrap();
        assert_eq!(dep.lambda, vec![None, Some(0), Some(0), Some(1), Some(3)]);

        let same = PointSet::from_rows(&vec![[1.0, 1.0]; 7]).unwrap();
        let dep = fenwick_dependent_point(&same, &[7.0; 7], 0.0).unwrap();
        assert_eq!(dep.lambda[0], None);
        assert!(dep.lambda[1..].iter().all(|&l| l == Some(0)));
        assert!(dep.delta[1..].iter().all(|&d| d == 0.0));

        // only the top point survives the noise filter
        let dep = fenwick_dependent_point(&ps, &rho, 3.0).unwrap();
        assert!(dep.lambda.iter().all(Option::is_none));
    }
}

//! Lock-free concurrent union-find.
//!
//! Roots are linked by id, the larger root pointing at the smaller one, and
//! `find` performs path splitting with compare-and-swap. Parent ids strictly
//! decrease along every path, so the structure can never form a cycle and
//! each set's root is its smallest element.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

pub struct UnionFind {
    parent: Vec<AtomicUsize>,
}

impl std::fmt::Debug for UnionFind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnionFind").field("len", &self.parent.len()).finish()
    }
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).map(AtomicUsize::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, a: usize) -> usize {
        let mut x = a;
        // parent ids strictly decrease, so a path has at most len() links
        for _ in 0..=self.parent.len() {
            let p = self.parent[x].load(Ordering::Acquire);
            if p == x {
                return x;
            }
            let gp = self.parent[p].load(Ordering::Acquire);
            if gp != p {
                // Path splitting; losing the race only skips a shortcut.
                let _ = self.parent[x].compare_exchange(p, gp, Ordering::AcqRel, Ordering::Relaxed);
            }
            x = p;
        }
        unreachable!("union-find parent chain from {a} did not terminate");
    }

    pub fn union(&self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        loop {
            if ra == rb {
                return;
            }
            let (hi, lo) = if ra > rb { (ra, rb) } else { (rb, ra) };
            match self.parent[hi].compare_exchange(hi, lo, Ordering::AcqRel, Ordering::Acquire) {
                Ok(_) => return,
                Err(_) => {
                    // `hi` was linked by someone else; re-resolve both roots.
                    ra = self.find(hi);
                    rb = self.find(lo);
                }
            }
        }
    }

    pub fn same_set(&self, a: usize, b: usize) -> bool {
        loop {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                return true;
            }
            // ra may have been linked after we read it
            if self.parent[ra].load(Ordering::Acquire) == ra {
                return false;
            }
        }
    }

    /// Root (smallest element) of every element's set, computed in parallel.
    /// Meant to be called once all unions have finished.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len())
            .into_par_iter()
            .with_min_len(1024)
            .map(|i| self.find(i))
            .collect()
    }
}

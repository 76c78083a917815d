//! Lock-free union-find over vertex ids.
//!
//! Union always links the larger root under the smaller, so the final
//! representative of every component is its minimum member no matter how the
//! operations interleave — the structure is deterministic under parallelism
//! by construction. Roots only change through a CAS that requires them to
//! still be roots, which makes unions linearizable; finds compress paths by
//! grandparent swinging, which only ever shortens chains.

use std::sync::atomic::{AtomicU32, Ordering};

pub struct UnionFind {
    parent: Vec<AtomicU32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).map(AtomicU32::new).collect() }
    }

    pub fn find(&self, mut x: u32) -> u32 {
        loop {
            let p = self.parent[x as usize].load(Ordering::Acquire);
            if p == x {
                return x;
            }
            let gp = self.parent[p as usize].load(Ordering::Acquire);
            if gp != p {
                let _ = self.parent[x as usize].compare_exchange(
                    p,
                    gp,
                    Ordering::AcqRel,
                    Ordering::Acquire,
                );
            }
            x = p;
        }
    }

    pub fn union(&self, a: u32, b: u32) {
        let (mut ra, mut rb) = (a, b);
        loop {
            ra = self.find(ra);
            rb = self.find(rb);
            if ra == rb {
                return;
            }
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            match self.parent[hi as usize].compare_exchange(
                hi,
                lo,
                Ordering::AcqRel,
                Ordering::Acquire,
            ) {
                Ok(_) => return,
                Err(_) => {
                    // hi stopped being a root underneath us; retry from the
                    // new roots.
                    ra = lo;
                    rb = hi;
                }
            }
        }
    }
}

//! Exact per-edge similarity.
//!
//! The unweighted measures need `|N̄(u) ∩ N̄(v)|` per edge, which is shared
//! triangle counting: every common neighbor of u and v closes a triangle over
//! the edge {u,v}. We enumerate each triangle exactly once by merging sorted
//! out-lists of the degree-oriented view and credit all three edges of the
//! triangle atomically. Integer credits commute, so the parallel result is
//! exact regardless of schedule.
//!
//! The weighted measure accumulates floating-point products, where order
//! matters for bitwise reproducibility. Those numerators are instead computed
//! with one private merge per edge over the closed neighborhoods in ascending
//! vertex-id order, making parallel output bit-identical to sequential.

use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::Result;
use crate::graph::{DegreeOrientedView, Graph, VertexId};
use crate::par;
use crate::similarity::{ensure_exact_measure, Measure, SimilarityTable, VertexNorms};

/// Iterates the closed neighborhood of `v` in ascending id order as
/// `(vertex, weight)`, with the implicit self entry carrying weight 1.
struct ClosedIter<'a> {
    v: VertexId,
    emitted_self: bool,
    nbrs: &'a [VertexId],
    wts: &'a [f64],
    i: usize,
}

impl<'a> ClosedIter<'a> {
    fn new(g: &'a Graph, v: VertexId) -> Self {
        ClosedIter { v, emitted_self: false, nbrs: g.neighbors_of(v), wts: g.weights_of(v), i: 0 }
    }
}

impl<'a> Iterator for ClosedIter<'a> {
    type Item = (VertexId, f64);

    fn next(&mut self) -> Option<(VertexId, f64)> {
        if !self.emitted_self && (self.i >= self.nbrs.len() || self.v < self.nbrs[self.i]) {
            self.emitted_self = true;
            return Some((self.v, 1.0));
        }
        if self.i < self.nbrs.len() {
            let out = (self.nbrs[self.i], self.wts[self.i]);
            self.i += 1;
            return Some(out);
        }
        None
    }
}

/// `|N(u) ∩ N(v)|` for the endpoints of an edge, via one sorted merge.
pub(crate) fn open_intersection_size(g: &Graph, u: VertexId, v: VertexId) -> usize {
    let a = g.neighbors_of(u);
    let b = g.neighbors_of(v);
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    c
}

/// `Σ w(u,x)·w(v,x)` over `x ∈ N̄(u) ∩ N̄(v)` with `w(·,·) = 1` on the self
/// entries, accumulated in ascending x order.
pub(crate) fn closed_dot(g: &Graph, u: VertexId, v: VertexId) -> f64 {
    let mut a = ClosedIter::new(g, u).peekable();
    let mut b = ClosedIter::new(g, v).peekable();
    let mut sum = 0.0;
    while let (Some(&(xa, wa)), Some(&(xb, wb))) = (a.peek(), b.peek()) {
        match xa.cmp(&xb) {
            std::cmp::Ordering::Equal => {
                sum += wa * wb;
                a.next();
                b.next();
            }
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
        }
    }
    sum
}

/// Final unweighted score from exact integer inputs. Shared by the bulk path
/// and the hybrid fallback so the two agree bit-for-bit.
pub(crate) fn finish_unweighted(
    measure: Measure,
    closed_inter: usize,
    closed_u: usize,
    closed_v: usize,
) -> f64 {
    let num = closed_inter as f64;
    match measure {
        Measure::Cosine => {
            let s = num / ((closed_u as f64) * (closed_v as f64)).sqrt();
            s.min(1.0)
        }
        Measure::Jaccard => {
            let union = (closed_u + closed_v - closed_inter) as f64;
            num / union
        }
        _ => unreachable!("finish_unweighted called with {measure}"),
    }
}

pub(crate) fn weighted_cosine_score(num: f64, norm_u: f64, norm_v: f64) -> f64 {
    (num / (norm_u * norm_v)).min(1.0)
}

/// Exact score of one existing edge {u,v}. `norms` is required for
/// [`Measure::WeightedCosine`].
pub(crate) fn exact_edge_score(
    g: &Graph,
    norms: Option<&VertexNorms>,
    u: VertexId,
    v: VertexId,
    measure: Measure,
) -> f64 {
    match measure {
        Measure::Cosine | Measure::Jaccard => {
            let inter = open_intersection_size(g, u, v) + 2;
            finish_unweighted(measure, inter, g.closed_size(u), g.closed_size(v))
        }
        Measure::WeightedCosine => {
            let norms = norms.expect("weighted-cosine needs vertex norms");
            weighted_cosine_score(closed_dot(g, u, v), norms.get(u), norms.get(v))
        }
        _ => unreachable!("exact_edge_score called with {measure}"),
    }
}

/// Triangle-merge counts per view edge: `counts[e] = |N(u) ∩ N(v)|` for the
/// undirected edge behind view edge `e`.
fn view_edge_counts(view: &DegreeOrientedView) -> Vec<u32> {
    let m = view.num_edges();
    let counts: Vec<AtomicU32> = (0..m).map(|_| AtomicU32::new(0)).collect();
    par::for_each(m, |e| {
        let u = view.source(e);
        let v = view.target(e);
        let ur = view.out_range(u);
        let vr = view.out_range(v);
        let ut = view.out_targets(u);
        let vt = view.out_targets(v);
        let (mut i, mut j) = (0, 0);
        while i < ut.len() && j < vt.len() {
            match ut[i].cmp(&vt[j]) {
                std::cmp::Ordering::Equal => {
                    // Triangle {u, v, x}: credit all three of its edges.
                    counts[e].fetch_add(1, Ordering::Relaxed);
                    counts[ur.start + i].fetch_add(1, Ordering::Relaxed);
                    counts[vr.start + j].fetch_add(1, Ordering::Relaxed);
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
    });
    counts.into_iter().map(AtomicU32::into_inner).collect()
}

/// Writes one value per view edge into both half-edge slots.
fn expand_to_half_edges<T: Copy + Default>(
    g: &Graph,
    view: &DegreeOrientedView,
    per_edge: &[T],
) -> Vec<T> {
    let mut out = vec![T::default(); 2 * g.m()];
    for (e, &x) in per_edge.iter().enumerate() {
        let p = view.half_edge(e);
        out[p.0] = x;
        out[g.twin(p).0] = x;
    }
    out
}

/// Shared-neighbor counts per half-edge: `counts[p] = |N(u) ∩ N(v)|` where
/// p = (u, v). Closed-neighborhood intersections are these counts plus 2.
pub fn shared_neighbor_counts(g: &Graph) -> Vec<u32> {
    let view = g.degree_oriented_view();
    let per_edge = view_edge_counts(&view);
    expand_to_half_edges(g, &view, &per_edge)
}

/// Weighted analogue of [`shared_neighbor_counts`] over open neighborhoods:
/// `Σ_{x ∈ N(u) ∩ N(v)} w(u,x)·w(v,x)` per half-edge, summed in ascending
/// x order.
pub fn shared_weight_products(g: &Graph) -> Vec<f64> {
    let view = g.degree_oriented_view();
    let per_edge: Vec<f64> = par::map_collect(view.num_edges(), |e| {
        let u = view.source(e);
        let v = view.target(e);
        let a = g.neighbors_of(u);
        let wa = g.weights_of(u);
        let b = g.neighbors_of(v);
        let wb = g.weights_of(v);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Equal => {
                    sum += wa[i] * wb[j];
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        sum
    });
    expand_to_half_edges(g, &view, &per_edge)
}

/// `norms[v] = sqrt(Σ_{x ∈ N̄(v)} w(v,x)²)`, self entry weighing 1.
pub fn vertex_norms(g: &Graph) -> VertexNorms {
    let norms = par::map_collect(g.n(), |v| {
        let mut sum = 0.0;
        for (_, w) in ClosedIter::new(g, v as VertexId) {
            sum += w * w;
        }
        sum.sqrt()
    });
    VertexNorms(norms)
}

/// Exact similarity for every edge. Errors if `measure` is not exact or is
/// `weighted-cosine` on an unweighted graph.
pub fn compute_similarities(g: &Graph, measure: Measure) -> Result<SimilarityTable> {
    ensure_exact_measure(measure, g)?;
    let view = g.degree_oriented_view();
    let per_edge: Vec<f64> = match measure {
        Measure::Cosine | Measure::Jaccard => {
            let counts = view_edge_counts(&view);
            par::map_collect(view.num_edges(), |e| {
                let u = view.source(e);
                let v = view.target(e);
                finish_unweighted(
                    measure,
                    counts[e] as usize + 2,
                    g.closed_size(u),
                    g.closed_size(v),
                )
            })
        }
        Measure::WeightedCosine => {
            let norms = vertex_norms(g);
            par::map_collect(view.num_edges(), |e| {
                let u = view.source(e);
                let v = view.target(e);
                weighted_cosine_score(closed_dot(g, u, v), norms.get(u), norms.get(v))
            })
        }
        _ => unreachable!(),
    };
    Ok(SimilarityTable::new(measure, expand_to_half_edges(g, &view, &per_edge)))
}

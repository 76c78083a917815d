//! Brute-force reference clustering.
//!
//! Everything here is an independent derivation used to check the indexed
//! pipeline: similarities come from hash-set intersections instead of sorted
//! merges, cores from direct recounting, clusters from a sequential BFS
//! instead of union-find. Border ties are broken deterministically (highest
//! similarity, then lowest core id), matching the indexed query's
//! deterministic mode. Only exact measures are supported, and the entry point
//! refuses graphs above a size guard — it is quadratic-ish on purpose.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Result, ScanError};
use crate::graph::{Graph, HalfEdgeId, VertexId};
use crate::query::{Clustering, Label, Labels, QueryParams};
use crate::similarity::Measure;

const MAX_ORACLE_VERTICES: usize = 10_000;

fn closed_set(g: &Graph, v: VertexId) -> HashSet<VertexId> {
    let mut s: HashSet<VertexId> = g.neighbors_of(v).iter().copied().collect();
    s.insert(v);
    s
}

fn closed_sorted(g: &Graph, v: VertexId) -> Vec<VertexId> {
    let mut c = g.neighbors_of(v).to_vec();
    c.push(v);
    c.sort_unstable();
    c
}

fn weight_of(g: &Graph, a: VertexId, b: VertexId) -> f64 {
    if a == b {
        1.0
    } else {
        g.weight(g.position_of(a, b).expect("weight_of on a non-edge"))
    }
}

fn naive_edge_similarity(g: &Graph, measure: Measure, u: VertexId, v: VertexId) -> f64 {
    match measure {
        Measure::Cosine | Measure::Jaccard => {
            let cu = closed_set(g, u);
            let cv = closed_set(g, v);
            let inter = cu.intersection(&cv).count();
            if measure == Measure::Cosine {
                let s = inter as f64 / ((cu.len() as f64) * (cv.len() as f64)).sqrt();
                s.min(1.0)
            } else {
                inter as f64 / (cu.len() + cv.len() - inter) as f64
            }
        }
        Measure::WeightedCosine => {
            let cv: HashSet<VertexId> = closed_set(g, v);
            let mut num = 0.0;
            for x in closed_sorted(g, u) {
                if cv.contains(&x) {
                    num += weight_of(g, u, x) * weight_of(g, v, x);
                }
            }
            let norm = |a: VertexId| -> f64 {
                let mut sum = 0.0;
                for x in closed_sorted(g, a) {
                    let w = weight_of(g, a, x);
                    sum += w * w;
                }
                sum.sqrt()
            };
            (num / (norm(u) * norm(v))).min(1.0)
        }
        other => unreachable!("naive similarity asked for {other}"),
    }
}

/// Clusters `g` by exhaustive recomputation: per-edge similarities from
/// scratch, cores by counting, clusters by BFS over ε-similar core–core
/// edges, then deterministic border attachment and hub/outlier labels.
/// Cluster ids are canonical (ascending minimum member).
pub fn naive_scan(
    g: &Graph,
    measure: Measure,
    params: &QueryParams,
) -> Result<(Clustering, Labels)> {
    if g.n() > MAX_ORACLE_VERTICES {
        return Err(ScanError::SizeGuard(format!(
            "brute-force checker accepts at most {MAX_ORACLE_VERTICES} vertices, got {}",
            g.n()
        )));
    }
    if !measure.is_exact() {
        return Err(ScanError::Config(format!(
            "brute-force checker only handles exact measures, got {measure}"
        )));
    }
    if measure == Measure::WeightedCosine && !g.is_weighted() {
        return Err(ScanError::Config(
            "weighted-cosine requires a weighted graph".into(),
        ));
    }

    let n = g.n();
    let eps = params.epsilon;

    // σ per half-edge, each recomputed independently.
    let mut sigma = vec![0.0f64; 2 * g.m()];
    for u in 0..n as VertexId {
        for p in g.neighbor_range(u) {
            let v = g.target(HalfEdgeId(p));
            sigma[p] = naive_edge_similarity(g, measure, u, v);
        }
    }
    let eps_similar = |p: usize| sigma[p] >= eps;

    let is_core: Vec<bool> = (0..n)
        .map(|v| {
            let similar = g.neighbor_range(v as VertexId).filter(|&p| eps_similar(p)).count();
            1 + similar >= params.mu
        })
        .collect();

    // BFS over ε-similar core–core edges, seeds in ascending id order.
    let mut component = vec![u32::MAX; n];
    let mut num_components = 0u32;
    for seed in 0..n {
        if !is_core[seed] || component[seed] != u32::MAX {
            continue;
        }
        let id = num_components;
        num_components += 1;
        component[seed] = id;
        let mut queue = VecDeque::from([seed as VertexId]);
        while let Some(u) = queue.pop_front() {
            for p in g.neighbor_range(u) {
                let v = g.target(HalfEdgeId(p));
                if is_core[v as usize] && component[v as usize] == u32::MAX && eps_similar(p) {
                    component[v as usize] = id;
                    queue.push_back(v);
                }
            }
        }
    }

    // Borders: best (highest σ, then lowest core id) ε-similar core neighbor.
    for v in 0..n as VertexId {
        if is_core[v as usize] {
            continue;
        }
        let mut best: Option<(f64, VertexId)> = None;
        for p in g.neighbor_range(v) {
            let u = g.target(HalfEdgeId(p));
            if is_core[u as usize] && eps_similar(p) {
                let better = match best {
                    None => true,
                    Some((bs, _)) => sigma[p] > bs,
                };
                if better {
                    best = Some((sigma[p], u));
                }
            }
        }
        if let Some((_, u)) = best {
            component[v as usize] = component[u as usize];
        }
    }

    // Canonical relabel by ascending minimum member.
    let mut min_member: HashMap<u32, VertexId> = HashMap::new();
    for (v, &c) in component.iter().enumerate() {
        if c != u32::MAX {
            min_member.entry(c).and_modify(|m| *m = (*m).min(v as VertexId)).or_insert(v as VertexId);
        }
    }
    let mut order: Vec<(VertexId, u32)> = min_member.iter().map(|(&c, &m)| (m, c)).collect();
    order.sort_unstable();
    let canonical: HashMap<u32, u32> =
        order.iter().enumerate().map(|(i, &(_, c))| (c, i as u32)).collect();
    let assignment: Vec<Option<u32>> = component
        .iter()
        .map(|&c| if c == u32::MAX { None } else { Some(canonical[&c]) })
        .collect();

    // Hubs bridge two or more clusters among their neighbors.
    let mut labels = vec![None; n];
    for v in 0..n as VertexId {
        if assignment[v as usize].is_some() {
            continue;
        }
        let distinct: HashSet<u32> = g
            .neighbors_of(v)
            .iter()
            .filter_map(|&u| assignment[u as usize])
            .collect();
        labels[v as usize] = Some(if distinct.len() >= 2 { Label::Hub } else { Label::Outlier });
    }

    let clustering = Clustering::from_parts(
        params.mu,
        eps,
        assignment,
        is_core,
        order.len() as u32,
    );
    Ok((clustering, Labels::from_parts(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::query::{cluster, label_hubs_outliers};
    use crate::similarity::exact::compute_similarities;
    use crate::testutil::{hub_fixture, random_graph, random_weighted_graph};

    #[test]
    fn refuses_oversized_and_inexact() {
        let g = random_graph(1, 10, 0.3);
        let params = QueryParams::new(2, 0.5).unwrap();
        assert!(naive_scan(&g, Measure::ApproxCosine, &params).is_err());
        assert!(naive_scan(&g, Measure::WeightedCosine, &params).is_err());
    }

    #[test]
    fn fixture_reference_clustering() {
        let g = hub_fixture();
        let params = QueryParams::new(3, 0.6).unwrap();
        let (c, labels) = naive_scan(&g, Measure::Cosine, &params).unwrap();
        assert_eq!(c.clusters(), vec![vec![1, 2, 3, 4], vec![6, 7, 8, 11]]);
        assert_eq!(labels.hubs(), vec![5]);
        assert_eq!(labels.outliers(), vec![0, 9, 10]);
    }

    #[test]
    fn matches_indexed_pipeline_on_random_graphs() {
        for seed in 0..6u64 {
            let g = random_graph(seed * 7 + 1, 45, 0.18);
            for measure in [Measure::Cosine, Measure::Jaccard] {
                let idx =
                    build_index(&g, compute_similarities(&g, measure).unwrap()).unwrap();
                for (mu, eps) in [(2, 0.3), (2, 0.62), (3, 0.5), (4, 0.7), (5, 0.35)] {
                    let params = QueryParams::new(mu, eps).unwrap();
                    let fast = cluster(&idx, &params);
                    let fast_labels = label_hubs_outliers(&g, &fast);
                    let (slow, slow_labels) = naive_scan(&g, measure, &params).unwrap();
                    assert_eq!(fast, slow, "seed {seed} {measure} mu={mu} eps={eps}");
                    assert_eq!(fast_labels, slow_labels);
                }
            }
        }
    }

    #[test]
    fn matches_indexed_pipeline_weighted() {
        for seed in [2u64, 8, 21] {
            let g = random_weighted_graph(seed, 40, 0.2);
            let idx = build_index(
                &g,
                compute_similarities(&g, Measure::WeightedCosine).unwrap(),
            )
            .unwrap();
            for (mu, eps) in [(2, 0.45), (3, 0.3), (3, 0.75)] {
                let params = QueryParams::new(mu, eps).unwrap();
                let fast = cluster(&idx, &params);
                let (slow, _) = naive_scan(&g, Measure::WeightedCosine, &params).unwrap();
                assert_eq!(fast, slow, "seed {seed} mu={mu} eps={eps}");
            }
        }
    }
}

//! Deterministic graph generators shared by the test and bench suites. Kept dependency-free
//! (small LCG) so test inputs are stable across platforms.

use crate::graph::Graph;

/// 11-vertex demo graph (1-based ids; 0 stays isolated): a near-clique
/// {1,2,3,4}, a second community {6,7,8} with pendant 11, a bridge vertex 5,
/// and a tail 8–9–10. Used across index/query/quality tests.
pub fn hub_fixture_edges() -> Vec<(u32, u32, f64)> {
    [
        (1, 2),
        (1, 3),
        (1, 4),
        (2, 3),
        (2, 4),
        (3, 4),
        (4, 5),
        (5, 6),
        (6, 7),
        (6, 8),
        (7, 8),
        (7, 11),
        (8, 9),
        (9, 10),
    ]
    .into_iter()
    .map(|(u, v)| (u, v, 1.0))
    .collect()
}

pub fn hub_fixture() -> Graph {
    Graph::from_edges(&hub_fixture_edges(), false).unwrap()
}

pub fn random_graph_edges(seed: u64, n: u32, p: f64) -> Vec<(u32, u32)> {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if next() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_graph(seed: u64, n: u32, p: f64) -> Graph {
    let edges: Vec<(u32, u32, f64)> =
        random_graph_edges(seed, n, p).into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    Graph::from_edges(&edges, false).unwrap()
}

pub fn random_weighted_graph(seed: u64, n: u32, p: f64) -> Graph {
    let mut state = seed.wrapping_mul(0xD1B54A32D192ED03).wrapping_add(7);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let edges: Vec<(u32, u32, f64)> = random_graph_edges(seed, n, p)
        .into_iter()
        .map(|(u, v)| (u, v, 0.25 + 2.0 * next()))
        .collect();
    Graph::from_edges(&edges, true).unwrap()
}

//! Undirected graph storage in CSR form plus the degree-oriented edge view
//! used by triangle-merge similarity counting.
//!
//! Conventions enforced everywhere:
//! * no self-loops, no duplicate edges, every weight finite and `> 0`;
//! * adjacency lists sorted by ascending vertex id;
//! * each undirected edge {u,v} is two half-edges: position `p` in u's list
//!   with `neighbors[p] == v`, and its twin in v's list.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Result, ScanError};
use crate::par;

pub type VertexId = u32;

/// Index into the flat `neighbors`/`weights` arrays; identifies one directed
/// copy of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfEdgeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    weights: Vec<f64>,
    /// twins[p] is the position of the opposite half-edge of p.
    twins: Vec<usize>,
    weighted: bool,
}

/// Counters reported by the loader for input oddities that are tolerated
/// rather than fatal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph from unique undirected edges. `edges` must not contain
    /// self-loops or repeated pairs (in either orientation); weights must be
    /// finite and positive. Vertex ids are used as given, so `n` is one more
    /// than the largest id mentioned.
    pub fn from_edges(edges: &[(VertexId, VertexId, f64)], weighted: bool) -> Result<Self> {
        let mut n: usize = 0;
        for &(u, v, w) in edges {
            if u == v {
                return Err(ScanError::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(ScanError::InvalidGraph(format!(
                    "edge {{{u},{v}}} has non-positive weight {w}"
                )));
            }
            n = n.max(u as usize + 1).max(v as usize + 1);
        }

        // Both directed copies, sorted by (source, target): yields CSR with
        // ascending adjacency lists in one pass.
        let mut directed: Vec<(VertexId, VertexId, f64)> = Vec::with_capacity(edges.len() * 2);
        for &(u, v, w) in edges {
            directed.push((u, v, w));
            directed.push((v, u, w));
        }
        par::sort_unstable_by(&mut directed, |a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in directed.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(ScanError::InvalidGraph(format!(
                    "duplicate edge {{{},{}}}",
                    pair[0].0, pair[0].1
                )));
            }
        }

        let mut offsets = vec![0usize; n + 1];
        for &(u, _, _) in &directed {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors: Vec<VertexId> = directed.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = directed.iter().map(|e| e.2).collect();

        let twins = par::flat_map_collect(n, |u| {
            let lo = offsets[u];
            let hi = offsets[u + 1];
            (lo..hi)
                .map(|p| {
                    let v = neighbors[p] as usize;
                    let vlist = &neighbors[offsets[v]..offsets[v + 1]];
                    let r = vlist
                        .binary_search(&(u as VertexId))
                        .expect("symmetric edge missing");
                    offsets[v] + r
                })
                .collect()
        });

        Ok(Graph { offsets, neighbors, weights, twins, weighted })
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// |N̄(v)| = deg(v) + 1; the closed neighborhood includes v itself.
    pub fn closed_size(&self, v: VertexId) -> usize {
        self.degree(v) + 1
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v as VertexId)).max().unwrap_or(0)
    }

    pub fn neighbor_range(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    pub fn neighbors_of(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.neighbor_range(v)]
    }

    pub fn weights_of(&self, v: VertexId) -> &[f64] {
        &self.weights[self.neighbor_range(v)]
    }

    pub fn target(&self, p: HalfEdgeId) -> VertexId {
        self.neighbors[p.0]
    }

    pub fn weight(&self, p: HalfEdgeId) -> f64 {
        self.weights[p.0]
    }

    /// The opposite half-edge; an involution without fixed points.
    pub fn twin(&self, p: HalfEdgeId) -> HalfEdgeId {
        HalfEdgeId(self.twins[p.0])
    }

    /// Source vertex of a half-edge (binary search over offsets).
    pub fn source(&self, p: HalfEdgeId) -> VertexId {
        debug_assert!(p.0 < self.neighbors.len());
        (self.offsets.partition_point(|&o| o <= p.0) - 1) as VertexId
    }

    /// Position of v in u's adjacency list, if the edge exists.
    pub fn position_of(&self, u: VertexId, v: VertexId) -> Option<HalfEdgeId> {
        let lo = self.offsets[u as usize];
        self.neighbors_of(u)
            .binary_search(&v)
            .ok()
            .map(|r| HalfEdgeId(lo + r))
    }

    /// SHA-256 over the full structure (sizes, adjacency, weights). Two graphs
    /// digest equal iff they are identical, which is what index files store to
    /// tie an index back to its build input.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"parscan-graph");
        h.update([self.weighted as u8]);
        h.update((self.n() as u64).to_le_bytes());
        h.update((self.m() as u64).to_le_bytes());
        for &v in &self.neighbors {
            h.update(v.to_le_bytes());
        }
        if self.weighted {
            for &w in &self.weights {
                h.update(w.to_bits().to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// Orients every undirected edge from its lower-degree endpoint to its
    /// higher-degree endpoint (ties toward the higher id), preserving
    /// ascending id order inside each out-list.
    pub fn degree_oriented_view(&self) -> DegreeOrientedView {
        let n = self.n();
        let rank = |v: VertexId| (self.degree(v), v);
        let mut offsets = vec![0usize; n + 1];
        for u in 0..n {
            let u = u as VertexId;
            offsets[u as usize + 1] = self
                .neighbors_of(u)
                .iter()
                .filter(|&&v| rank(v) > rank(u))
                .count();
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let m = offsets[n];
        debug_assert_eq!(m, self.m());

        struct Out {
            sources: Vec<VertexId>,
            targets: Vec<VertexId>,
            pos: Vec<usize>,
        }
        let per_vertex: Vec<Out> = par::map_collect(n, |u| {
            let u = u as VertexId;
            let lo = self.offsets[u as usize];
            let mut out = Out { sources: Vec::new(), targets: Vec::new(), pos: Vec::new() };
            for (i, &v) in self.neighbors_of(u).iter().enumerate() {
                if rank(v) > rank(u) {
                    out.sources.push(u);
                    out.targets.push(v);
                    out.pos.push(lo + i);
                }
            }
            out
        });
        let mut sources = Vec::with_capacity(m);
        let mut targets = Vec::with_capacity(m);
        let mut pos = Vec::with_capacity(m);
        for o in per_vertex {
            sources.extend_from_slice(&o.sources);
            targets.extend_from_slice(&o.targets);
            pos.extend_from_slice(&o.pos);
        }
        DegreeOrientedView { offsets, sources, targets, pos }
    }
}

/// Each undirected edge appears exactly once, oriented by (degree, id) rank.
/// `pos[e]` maps directed edge `e` back to the half-edge stored at its source.
#[derive(Debug, Clone)]
pub struct DegreeOrientedView {
    offsets: Vec<usize>,
    sources: Vec<VertexId>,
    targets: Vec<VertexId>,
    pos: Vec<usize>,
}

impl DegreeOrientedView {
    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn source(&self, e: usize) -> VertexId {
        self.sources[e]
    }

    pub fn target(&self, e: usize) -> VertexId {
        self.targets[e]
    }

    /// Half-edge (source → target) in the underlying graph.
    pub fn half_edge(&self, e: usize) -> HalfEdgeId {
        HalfEdgeId(self.pos[e])
    }

    pub fn out_range(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    pub fn out_targets(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.out_range(v)]
    }
}

/// Parses whitespace-separated edge-list text. Lines starting with `#` and
/// blank lines are skipped. Unweighted mode expects `u v`, weighted mode
/// `u v w`. Self-loops are dropped and repeated edges keep their first
/// occurrence; both are tallied in [`LoadStats`]. A repeated edge whose weight
/// disagrees with the kept one is an error.
pub fn load_edge_list<R: BufRead>(reader: R, weighted: bool) -> Result<(Graph, LoadStats)> {
    let mut stats = LoadStats::default();
    let mut edges: Vec<(VertexId, VertexId, f64)> = Vec::new();
    let mut seen: HashMap<(VertexId, VertexId), f64> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let parse_id = |s: Option<&str>| -> Result<VertexId> {
            let s = s.ok_or_else(|| ScanError::Parse {
                line: lineno,
                msg: "missing vertex id".into(),
            })?;
            s.parse().map_err(|_| ScanError::Parse {
                line: lineno,
                msg: format!("bad vertex id {s:?}"),
            })
        };
        let u = parse_id(tok.next())?;
        let v = parse_id(tok.next())?;
        let w = if weighted {
            let s = tok.next().ok_or_else(|| ScanError::Parse {
                line: lineno,
                msg: "missing edge weight".into(),
            })?;
            let w: f64 = s.parse().map_err(|_| ScanError::Parse {
                line: lineno,
                msg: format!("bad edge weight {s:?}"),
            })?;
            if !(w.is_finite() && w > 0.0) {
                return Err(ScanError::Parse {
                    line: lineno,
                    msg: format!("edge weight must be finite and positive, got {s}"),
                });
            }
            w
        } else {
            1.0
        };
        if tok.next().is_some() {
            return Err(ScanError::Parse {
                line: lineno,
                msg: format!(
                    "expected '{}', got extra tokens",
                    if weighted { "u v w" } else { "u v" }
                ),
            });
        }

        if u == v {
            stats.self_loops += 1;
            continue;
        }
        let key = (u.min(v), u.max(v));
        match seen.get(&key) {
            Some(&prev) => {
                if prev == w {
                    stats.duplicate_edges += 1;
                } else {
                    return Err(ScanError::Parse {
                        line: lineno,
                        msg: format!(
                            "edge {{{},{}}} repeated with conflicting weight ({prev} vs {w})",
                            key.0, key.1
                        ),
                    });
                }
            }
            None => {
                seen.insert(key, w);
                edges.push((key.0, key.1, w));
            }
        }
    }

    Ok((Graph::from_edges(&edges, weighted)?, stats))
}

pub fn load_edge_list_file<P: AsRef<Path>>(path: P, weighted: bool) -> Result<(Graph, LoadStats)> {
    let f = std::fs::File::open(path)?;
    load_edge_list(std::io::BufReader::new(f), weighted)
}

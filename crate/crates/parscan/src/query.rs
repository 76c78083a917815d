//! (μ, ε) clustering queries against a built [`ScanIndex`].
//!
//! Work is proportional to the answer, not the graph: the ε-qualifying cores
//! are read off a prefix of the core order (located by doubling search), each
//! core's ε-similar neighbors off a prefix of its neighbor order, and the
//! clusters come from uniting core–core similar edges. Border vertices attach
//! to an adjacent cluster afterwards, hubs/outliers are a separate labeling
//! pass over the unclustered rest.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Result, ScanError};
use crate::graph::{Graph, VertexId};
use crate::index::ScanIndex;
use crate::par;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub mu: usize,
    pub epsilon: f64,
    /// With deterministic borders every border vertex joins its most similar
    /// ε-similar core neighbor (ties to the lowest id) — reproducible across
    /// runs and thread counts. Without it, the first worker to claim a border
    /// wins, which is faster but schedule-dependent. Defaults to
    /// deterministic.
    pub deterministic_borders: bool,
}

impl QueryParams {
    pub fn new(mu: usize, epsilon: f64) -> Result<Self> {
        if mu < 2 {
            return Err(ScanError::Config(format!("μ must be at least 2, got {mu}")));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ScanError::Config(format!("ε must lie in [0, 1], got {epsilon}")));
        }
        Ok(QueryParams { mu, epsilon, deterministic_borders: true })
    }

    pub fn with_deterministic_borders(mut self, deterministic: bool) -> Self {
        self.deterministic_borders = deterministic;
        self
    }
}

/// Instrumentation of one clustering query. `visits` counts index-array
/// probes (doubling + binary search), prefix entries read, union-find
/// operations, border candidates processed, and relabeled vertices — it is a
/// deterministic model count, identical across thread counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub cores: usize,
    pub similar_edges: usize,
    pub visits: usize,
}

/// A clustered graph: canonical cluster ids (0..num_clusters, ordered by each
/// cluster's minimum member id) for clustered vertices, `None` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub mu: usize,
    pub epsilon: f64,
    assignment: Vec<Option<u32>>,
    core_flags: Vec<bool>,
    num_clusters: u32,
}

impl Clustering {
    pub(crate) fn from_parts(
        mu: usize,
        epsilon: f64,
        assignment: Vec<Option<u32>>,
        core_flags: Vec<bool>,
        num_clusters: u32,
    ) -> Self {
        Clustering { mu, epsilon, assignment, core_flags, num_clusters }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn cluster_of(&self, v: VertexId) -> Option<u32> {
        self.assignment[v as usize]
    }

    pub fn is_core(&self, v: VertexId) -> bool {
        self.core_flags[v as usize]
    }

    pub fn num_clusters(&self) -> u32 {
        self.num_clusters
    }

    pub fn assignment(&self) -> &[Option<u32>] {
        &self.assignment
    }

    pub fn core_flags(&self) -> &[bool] {
        &self.core_flags
    }

    /// Extends the clustering to `n` vertices, the added ones unclustered —
    /// a clustering file only names vertices up to the largest it mentions,
    /// while the graph may end in isolated ones.
    pub fn padded_to(mut self, n: usize) -> Self {
        if n > self.assignment.len() {
            self.assignment.resize(n, None);
            self.core_flags.resize(n, false);
        }
        self
    }

    /// Members of each cluster, ascending within and across clusters.
    pub fn clusters(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.num_clusters as usize];
        for (v, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                out[*c as usize].push(v as VertexId);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Hub,
    Outlier,
}

/// Hub/outlier classification of unclustered vertices (`None` = clustered).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels(Vec<Option<Label>>);

impl Labels {
    pub(crate) fn from_parts(labels: Vec<Option<Label>>) -> Self {
        Labels(labels)
    }

    pub fn get(&self, v: VertexId) -> Option<Label> {
        self.0[v as usize]
    }

    pub fn hubs(&self) -> Vec<VertexId> {
        self.collect(Label::Hub)
    }

    pub fn outliers(&self) -> Vec<VertexId> {
        self.collect(Label::Outlier)
    }

    fn collect(&self, want: Label) -> Vec<VertexId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(want))
            .map(|(v, _)| v as VertexId)
            .collect()
    }
}

/// Length of the maximal prefix of a non-increasing array with values ≥ eps,
/// found by doubling + binary search. Returns (length, probes).
fn sorted_prefix_len(sims: &[f64], eps: f64) -> (usize, usize) {
    let n = sims.len();
    if n == 0 {
        return (0, 0);
    }
    let mut probes = 1;
    if sims[0] < eps {
        return (0, probes);
    }
    let mut last_good = 0usize;
    let mut first_bad = n;
    let mut i = 1usize;
    while i < n {
        probes += 1;
        if sims[i] >= eps {
            last_good = i;
            i <<= 1;
        } else {
            first_bad = i;
            break;
        }
    }
    let (mut lo, mut hi) = (last_good + 1, first_bad);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        probes += 1;
        if sims[mid] >= eps {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo, probes)
}

fn get_cores_counted(index: &ScanIndex, params: &QueryParams) -> (Vec<VertexId>, usize) {
    let (verts, thresholds) = index.core_order().segment(params.mu);
    let (len, probes) = sorted_prefix_len(thresholds, params.epsilon);
    (verts[..len].to_vec(), probes + len)
}

/// Vertices that are cores under (μ, ε): the maximal prefix of the μ-th core
/// order whose thresholds are ≥ ε. Empty when μ exceeds every closed
/// neighborhood.
pub fn get_cores(index: &ScanIndex, params: &QueryParams) -> Vec<VertexId> {
    get_cores_counted(index, params).0
}

/// One ε-similar half-edge discovered from a core's neighbor order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarEdge {
    pub core: VertexId,
    pub neighbor: VertexId,
    pub similarity: f64,
}

fn similar_edges_counted(
    index: &ScanIndex,
    cores: &[VertexId],
    epsilon: f64,
) -> (Vec<SimilarEdge>, usize) {
    let per_core: Vec<(Vec<SimilarEdge>, usize)> = par::map_collect(cores.len(), |i| {
        let u = cores[i];
        let (verts, sims) = index.neighbor_order().segment(u);
        // Entry 0 is u itself; ε-similar neighbors are a prefix of the rest.
        let (len, probes) = sorted_prefix_len(&sims[1..], epsilon);
        let edges = (0..len)
            .map(|j| SimilarEdge { core: u, neighbor: verts[1 + j], similarity: sims[1 + j] })
            .collect();
        (edges, probes + len)
    });
    let mut edges = Vec::new();
    let mut visits = 0;
    for (mut e, v) in per_core {
        edges.append(&mut e);
        visits += v;
    }
    (edges, visits)
}

/// ε-similar neighbors of each given core, in core order then neighbor-order
/// position. A core pair appears once per direction.
pub fn similar_edges(index: &ScanIndex, cores: &[VertexId], epsilon: f64) -> Vec<SimilarEdge> {
    similar_edges_counted(index, cores, epsilon).0
}

/// Runs the full clustering query. See [`cluster_with_stats`] for the
/// instrumented variant.
pub fn cluster(index: &ScanIndex, params: &QueryParams) -> Clustering {
    cluster_with_stats(index, params).0
}

pub fn cluster_with_stats(index: &ScanIndex, params: &QueryParams) -> (Clustering, QueryStats) {
    let n = index.n();
    let (cores, visits_cores) = get_cores_counted(index, params);
    let mut core_flags = vec![false; n];
    for &c in &cores {
        core_flags[c as usize] = true;
    }

    let (edges, visits_edges) = similar_edges_counted(index, &cores, params.epsilon);

    // Core clusters: union over core–core ε-similar edges.
    let uf = UnionFind::new(n);
    par::for_each(edges.len(), |i| {
        let e = edges[i];
        if core_flags[e.neighbor as usize] {
            uf.union(e.core, e.neighbor);
        }
    });
    let core_core_edges = edges.iter().filter(|e| core_flags[e.neighbor as usize]).count();

    // Border assignment: candidates are (non-core neighbor, σ, core).
    let mut border_assign: Vec<(VertexId, u32)> = Vec::new();
    if params.deterministic_borders {
        let mut cands: Vec<(VertexId, f64, VertexId)> = edges
            .iter()
            .filter(|e| !core_flags[e.neighbor as usize])
            .map(|e| (e.neighbor, e.similarity, e.core))
            .collect();
        par::sort_unstable_by(&mut cands, |a, b| {
            a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2))
        });
        let mut i = 0;
        while i < cands.len() {
            let (border, _, core) = cands[i];
            border_assign.push((border, uf.find(core)));
            while i < cands.len() && cands[i].0 == border {
                i += 1;
            }
        }
    } else {
        let slots: Vec<AtomicU32> = (0..n).map(|_| AtomicU32::new(u32::MAX)).collect();
        par::for_each(edges.len(), |i| {
            let e = edges[i];
            if !core_flags[e.neighbor as usize] {
                let root = uf.find(e.core);
                let _ = slots[e.neighbor as usize].compare_exchange(
                    u32::MAX,
                    root,
                    Ordering::AcqRel,
                    Ordering::Acquire,
                );
            }
        });
        let mut borders: Vec<VertexId> = edges
            .iter()
            .filter(|e| !core_flags[e.neighbor as usize])
            .map(|e| e.neighbor)
            .collect();
        borders.sort_unstable();
        borders.dedup();
        for b in borders {
            let root = slots[b as usize].load(Ordering::Acquire);
            debug_assert_ne!(root, u32::MAX);
            border_assign.push((b, root));
        }
    }
    let border_candidates = edges.len() - core_core_edges;

    // Canonical labels: clusters numbered by ascending minimum member id.
    let mut min_member: HashMap<u32, VertexId> = HashMap::new();
    let mut touch = |root: u32, v: VertexId| {
        min_member.entry(root).and_modify(|m| *m = (*m).min(v)).or_insert(v);
    };
    for &c in &cores {
        touch(uf.find(c), c);
    }
    for &(b, root) in &border_assign {
        touch(root, b);
    }
    let mut order: Vec<(VertexId, u32)> = min_member.iter().map(|(&r, &m)| (m, r)).collect();
    order.sort_unstable();
    let canonical: HashMap<u32, u32> =
        order.iter().enumerate().map(|(i, &(_, r))| (r, i as u32)).collect();

    let mut assignment = vec![None; n];
    for &c in &cores {
        assignment[c as usize] = Some(canonical[&uf.find(c)]);
    }
    for &(b, root) in &border_assign {
        assignment[b as usize] = Some(canonical[&root]);
    }

    let clustered = cores.len() + border_assign.len();
    let stats = QueryStats {
        cores: cores.len(),
        similar_edges: edges.len(),
        visits: visits_cores
            + visits_edges
            + core_core_edges
            + border_candidates
            + clustered,
    };
    let clustering = Clustering {
        mu: params.mu,
        epsilon: params.epsilon,
        assignment,
        core_flags,
        num_clusters: order.len() as u32,
    };
    (clustering, stats)
}

/// Classifies every unclustered vertex: a hub neighbors at least two distinct
/// clusters, an outlier fewer.
pub fn label_hubs_outliers(g: &Graph, clustering: &Clustering) -> Labels {
    let labels = par::map_collect(g.n(), |v| {
        let v = v as VertexId;
        if clustering.cluster_of(v).is_some() {
            return None;
        }
        let mut first = None;
        for &x in g.neighbors_of(v) {
            if let Some(c) = clustering.cluster_of(x) {
                match first {
                    None => first = Some(c),
                    Some(f) if f != c => return Some(Label::Hub),
                    _ => {}
                }
            }
        }
        Some(Label::Outlier)
    });
    Labels(labels)
}

// ---------------------------------------------------------------------------
// Clustering file format:
//   # mu=<μ> epsilon=<ε> clusters=<C>
//   <vertex id>\t<cluster id | hub | outlier>
// ---------------------------------------------------------------------------

pub fn write_clustering(clustering: &Clustering, labels: &Labels) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# mu={} epsilon={} clusters={}\n",
        clustering.mu, clustering.epsilon, clustering.num_clusters
    ));
    for v in 0..clustering.n() as VertexId {
        match clustering.cluster_of(v) {
            Some(c) => out.push_str(&format!("{v}\t{c}\n")),
            None => {
                let tag = match labels.get(v) {
                    Some(Label::Hub) => "hub",
                    Some(Label::Outlier) => "outlier",
                    None => "outlier",
                };
                out.push_str(&format!("{v}\t{tag}\n"));
            }
        }
    }
    out
}

/// Parses the clustering file format back. The header is optional (absent in
/// foreign ground-truth files); when present its cluster count is validated.
pub fn parse_clustering<R: BufRead>(reader: R) -> Result<(Clustering, Labels)> {
    let mut mu = 0usize;
    let mut epsilon = 0.0f64;
    let mut header_clusters: Option<u32> = None;
    let mut rows: Vec<(VertexId, std::result::Result<u32, Label>)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            for tok in line.trim_start_matches('#').split_whitespace() {
                if let Some(v) = tok.strip_prefix("mu=") {
                    mu = v.parse().map_err(|_| ScanError::Parse {
                        line: lineno,
                        msg: "bad mu in header".into(),
                    })?;
                } else if let Some(v) = tok.strip_prefix("epsilon=") {
                    epsilon = v.parse().map_err(|_| ScanError::Parse {
                        line: lineno,
                        msg: "bad epsilon in header".into(),
                    })?;
                } else if let Some(v) = tok.strip_prefix("clusters=") {
                    header_clusters = Some(v.parse().map_err(|_| ScanError::Parse {
                        line: lineno,
                        msg: "bad cluster count in header".into(),
                    })?);
                }
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        let (Some(id), Some(what), None) = (tok.next(), tok.next(), tok.next()) else {
            return Err(ScanError::Parse {
                line: lineno,
                msg: "expected '<vertex>\\t<cluster|hub|outlier>'".into(),
            });
        };
        let id: VertexId = id.parse().map_err(|_| ScanError::Parse {
            line: lineno,
            msg: format!("bad vertex id {id:?}"),
        })?;
        let what = match what {
            "hub" => Err(Label::Hub),
            "outlier" => Err(Label::Outlier),
            c => Ok(c.parse::<u32>().map_err(|_| ScanError::Parse {
                line: lineno,
                msg: format!("bad cluster id {c:?}"),
            })?),
        };
        rows.push((id, what));
    }

    let n = rows.iter().map(|&(v, _)| v as usize + 1).max().unwrap_or(0);
    let mut assignment = vec![None; n];
    let mut labels = vec![None; n];
    let mut distinct = std::collections::HashSet::new();
    for (v, what) in rows {
        match what {
            Ok(c) => {
                assignment[v as usize] = Some(c);
                distinct.insert(c);
            }
            Err(l) => labels[v as usize] = Some(l),
        }
    }
    if let Some(h) = header_clusters {
        if h as usize != distinct.len() {
            return Err(ScanError::Parse {
                line: 1,
                msg: format!(
                    "header claims {h} clusters, file contains {}",
                    distinct.len()
                ),
            });
        }
    }
    let clustering = Clustering {
        mu,
        epsilon,
        assignment,
        core_flags: vec![false; n],
        num_clusters: distinct.len() as u32,
    };
    Ok((clustering, Labels(labels)))
}

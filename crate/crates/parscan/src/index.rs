//! The query index: per-vertex neighbor orders plus per-μ core orders.
//!
//! * `NeighborOrder` — each vertex's closed neighborhood, the vertex itself
//!   pinned first (similarity 1), its neighbors following by non-increasing
//!   similarity with ties broken by ascending id. Storage: n + 2m entries.
//! * `CoreOrder` — for every μ from 2 to the largest closed-neighborhood
//!   size, the vertices with |N̄(v)| ≥ μ ordered by non-increasing core
//!   threshold t_μ(v) (ties by ascending id), where t_μ(v) is the similarity
//!   between v and the μ-th entry of its neighbor order. Storage: 2m entries.
//!
//! A query (μ, ε) never rescans the graph: the ε-satisfying cores are a
//! prefix of the μ-th core order, and each core's ε-similar neighbors are a
//! prefix of its neighbor order.

use sha2::{Digest, Sha256};

use crate::error::{Result, ScanError};
use crate::graph::{Graph, VertexId};
use crate::par;
use crate::similarity::{Measure, SimilarityTable};

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborOrder {
    /// Segment v occupies `offsets[v]..offsets[v+1]`, length deg(v) + 1.
    offsets: Vec<usize>,
    vertices: Vec<VertexId>,
    sims: Vec<f64>,
}

impl NeighborOrder {
    pub fn build(g: &Graph, table: &SimilarityTable) -> Result<Self> {
        if table.len() != 2 * g.m() {
            return Err(ScanError::Config(format!(
                "similarity table has {} entries, graph has {} half-edges",
                table.len(),
                2 * g.m()
            )));
        }
        let n = g.n();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for v in 0..n {
            offsets.push(offsets[v] + g.closed_size(v as VertexId));
        }

        let entries: Vec<(VertexId, f64)> = par::flat_map_collect(n, |v| {
            let vid = v as VertexId;
            let range = g.neighbor_range(vid);
            let mut nbrs: Vec<(VertexId, f64)> = g
                .neighbors_of(vid)
                .iter()
                .zip(&table.scores()[range])
                .map(|(&x, &s)| (x, s))
                .collect();
            nbrs.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut seg = Vec::with_capacity(nbrs.len() + 1);
            seg.push((vid, 1.0));
            seg.extend(nbrs);
            seg
        });
        let vertices = entries.iter().map(|e| e.0).collect();
        let sims = entries.iter().map(|e| e.1).collect();
        Ok(NeighborOrder { offsets, vertices, sims })
    }

    pub fn segment(&self, v: VertexId) -> (&[VertexId], &[f64]) {
        let r = self.offsets[v as usize]..self.offsets[v as usize + 1];
        (&self.vertices[r.clone()], &self.sims[r])
    }

    /// Core threshold t_μ(v): similarity between v and the μ-th entry
    /// (1-based) of its neighbor order. `None` when |N̄(v)| < μ.
    pub fn core_threshold(&self, v: VertexId, mu: usize) -> Option<f64> {
        let (_, sims) = self.segment(v);
        sims.get(mu - 1).copied()
    }

    pub fn num_entries(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreOrder {
    /// Largest closed-neighborhood size; μ ranges over 2..=max_closed.
    max_closed: usize,
    /// Segment for μ occupies `offsets[μ-2]..offsets[μ-1]`.
    offsets: Vec<usize>,
    vertices: Vec<VertexId>,
    thresholds: Vec<f64>,
}

impl CoreOrder {
    pub fn build(g: &Graph, no: &NeighborOrder) -> Self {
        let n = g.n();
        let max_closed = (0..n).map(|v| g.closed_size(v as VertexId)).max().unwrap_or(0);
        if max_closed < 2 {
            return CoreOrder {
                max_closed,
                offsets: vec![0],
                vertices: Vec::new(),
                thresholds: Vec::new(),
            };
        }
        let num_mu = max_closed - 1;

        // candidates[..count(μ)] lists the vertices with |N̄| ≥ μ when sorted
        // by descending closed size.
        let mut candidates: Vec<VertexId> = (0..n as VertexId).collect();
        par::sort_unstable_by(&mut candidates, |&a, &b| {
            g.closed_size(b).cmp(&g.closed_size(a)).then(a.cmp(&b))
        });
        let count_at = |mu: usize| candidates.partition_point(|&v| g.closed_size(v) >= mu);

        let mut offsets = Vec::with_capacity(num_mu + 1);
        offsets.push(0usize);
        for i in 0..num_mu {
            offsets.push(offsets[i] + count_at(i + 2));
        }

        let entries: Vec<(VertexId, f64)> = par::flat_map_collect(num_mu, |i| {
            let mu = i + 2;
            let mut seg: Vec<(VertexId, f64)> = candidates[..count_at(mu)]
                .iter()
                .map(|&v| (v, no.core_threshold(v, mu).expect("candidate has |N̄| ≥ μ")))
                .collect();
            seg.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            seg
        });
        let vertices = entries.iter().map(|e| e.0).collect();
        let thresholds = entries.iter().map(|e| e.1).collect();
        CoreOrder { max_closed, offsets, vertices, thresholds }
    }

    pub fn max_closed(&self) -> usize {
        self.max_closed
    }

    /// Vertices with |N̄| ≥ μ by non-increasing threshold; empty when μ is
    /// out of range.
    pub fn segment(&self, mu: usize) -> (&[VertexId], &[f64]) {
        if mu < 2 || mu > self.max_closed {
            return (&[], &[]);
        }
        let r = self.offsets[mu - 2]..self.offsets[mu - 1];
        (&self.vertices[r.clone()], &self.thresholds[r])
    }

    pub fn num_entries(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanIndex {
    measure: Measure,
    config_digest: [u8; 32],
    degrees: Vec<u32>,
    similarity: SimilarityTable,
    neighbor_order: NeighborOrder,
    core_order: CoreOrder,
}

impl ScanIndex {
    /// Assembles an index from prebuilt parts. `config_note` is extra build
    /// configuration (sketch scheme, sample count, seed) folded into the
    /// digest so indexes built with different settings don't impersonate each
    /// other.
    pub fn assemble(
        g: &Graph,
        similarity: SimilarityTable,
        neighbor_order: NeighborOrder,
        core_order: CoreOrder,
        config_note: &[u8],
    ) -> Self {
        let mut h = Sha256::new();
        h.update(g.digest());
        h.update([similarity.measure().tag()]);
        h.update((config_note.len() as u64).to_le_bytes());
        h.update(config_note);
        let config_digest = h.finalize().into();
        let degrees = (0..g.n()).map(|v| g.degree(v as VertexId) as u32).collect();
        ScanIndex { measure: similarity.measure(), config_digest, degrees, similarity, neighbor_order, core_order }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn m(&self) -> usize {
        self.similarity.len() / 2
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn config_digest(&self) -> &[u8; 32] {
        &self.config_digest
    }

    pub fn similarity(&self) -> &SimilarityTable {
        &self.similarity
    }

    pub fn neighbor_order(&self) -> &NeighborOrder {
        &self.neighbor_order
    }

    pub fn core_order(&self) -> &CoreOrder {
        &self.core_order
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.degrees[v as usize] as usize
    }

    /// Rebuilds the adjacency structure recorded in the neighbor order.
    /// Weights are not stored in an index, so the result is unweighted; it is
    /// exactly the topology of the build graph.
    pub fn rebuild_graph_topology(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.m());
        for v in 0..self.n() as VertexId {
            let (verts, _) = self.neighbor_order.segment(v);
            for &x in verts {
                if v < x {
                    edges.push((v, x, 1.0));
                }
            }
        }
        Graph::from_edges(&edges, false).expect("index adjacency is a valid graph")
    }

    /// Structural self-check against the build graph and its similarity
    /// table; returns the first violated invariant. Exercised heavily by the
    /// test suite.
    pub fn validate_against(&self, g: &Graph) -> std::result::Result<(), String> {
        let n = g.n();
        let m = g.m();
        if self.n() != n {
            return Err(format!("index has {} vertices, graph has {n}", self.n()));
        }
        if self.similarity.len() != 2 * m {
            return Err(format!(
                "similarity table has {} entries, expected {}",
                self.similarity.len(),
                2 * m
            ));
        }
        if self.neighbor_order.num_entries() != n + 2 * m {
            return Err(format!(
                "neighbor order holds {} entries, expected n + 2m = {}",
                self.neighbor_order.num_entries(),
                n + 2 * m
            ));
        }
        if self.core_order.num_entries() != 2 * m {
            return Err(format!(
                "core order holds {} entries, expected 2m = {}",
                self.core_order.num_entries(),
                2 * m
            ));
        }

        for v in 0..n as VertexId {
            let (verts, sims) = self.neighbor_order.segment(v);
            if verts.len() != g.closed_size(v) {
                return Err(format!("neighbor order of {v} has wrong length"));
            }
            if verts[0] != v || sims[0] != 1.0 {
                return Err(format!("neighbor order of {v} does not start with itself at 1"));
            }
            let mut expected: Vec<VertexId> = g.neighbors_of(v).to_vec();
            expected.push(v);
            expected.sort_unstable();
            let mut actual: Vec<VertexId> = verts.to_vec();
            actual.sort_unstable();
            if actual != expected {
                return Err(format!("neighbor order of {v} is not its closed neighborhood"));
            }
            for i in 1..verts.len() {
                if sims[i] > sims[i - 1] {
                    return Err(format!("neighbor order of {v} is not non-increasing"));
                }
                if i >= 2 && sims[i] == sims[i - 1] && verts[i] < verts[i - 1] {
                    return Err(format!("neighbor order of {v} breaks ties out of id order"));
                }
                let p = g.position_of(v, verts[i]).ok_or_else(|| {
                    format!("neighbor order of {v} lists non-neighbor {}", verts[i])
                })?;
                if self.similarity.score(p).to_bits() != sims[i].to_bits() {
                    return Err(format!("neighbor order of {v} caches a stale similarity"));
                }
            }
        }

        let max_closed = (0..n).map(|v| g.closed_size(v as VertexId)).max().unwrap_or(0);
        if self.core_order.max_closed() != max_closed {
            return Err("core order covers the wrong μ range".into());
        }
        for mu in 2..=max_closed {
            let (verts, ts) = self.core_order.segment(mu);
            let expected: usize = (0..n).filter(|&v| g.closed_size(v as VertexId) >= mu).count();
            if verts.len() != expected {
                return Err(format!("core order for μ={mu} has wrong membership count"));
            }
            let mut seen = std::collections::HashSet::new();
            for (i, (&v, &t)) in verts.iter().zip(ts).enumerate() {
                if g.closed_size(v) < mu {
                    return Err(format!("core order for μ={mu} lists under-degree vertex {v}"));
                }
                if !seen.insert(v) {
                    return Err(format!("core order for μ={mu} repeats vertex {v}"));
                }
                let expect_t = self
                    .neighbor_order
                    .core_threshold(v, mu)
                    .expect("membership implies threshold");
                if t.to_bits() != expect_t.to_bits() {
                    return Err(format!("core order for μ={mu} caches a stale threshold"));
                }
                if i > 0 {
                    let (pv, pt) = (verts[i - 1], ts[i - 1]);
                    if t > pt || (t == pt && v < pv) {
                        return Err(format!("core order for μ={mu} is out of order at {v}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the full index for a graph whose similarities are already computed.
pub fn build_index(g: &Graph, table: SimilarityTable) -> Result<ScanIndex> {
    build_index_with_config(g, table, &[])
}

pub fn build_index_with_config(
    g: &Graph,
    table: SimilarityTable,
    config_note: &[u8],
) -> Result<ScanIndex> {
    let no = NeighborOrder::build(g, &table)?;
    let co = CoreOrder::build(g, &no);
    Ok(ScanIndex::assemble(g, table, no, co, config_note))
}

// ---------------------------------------------------------------------------
// Binary format, version 1.
//
//   magic "PSCANIX1" | version u32 | measure u8 | config digest [32]
//   | n u64 | m u64 | max_closed u64
//   | degrees: len u64, u32×len
//   | scores: len u64, f64×len          (half-edge order)
//   | neighbor-order vertices: len u64, u32×len
//   | neighbor-order sims: len u64, f64×len
//   | core-order offsets: len u64, u64×len
//   | core-order vertices: len u64, u32×len
//   | core-order thresholds: len u64, f64×len
//   | sha256 of every preceding byte [32]
//
// Everything little-endian. Serialization is deterministic: equal indexes
// produce equal bytes.
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 8] = b"PSCANIX1";
const VERSION: u32 = 1;

pub fn serialize_index(idx: &ScanIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(idx.measure.tag());
    out.extend_from_slice(&idx.config_digest);
    out.extend_from_slice(&(idx.n() as u64).to_le_bytes());
    out.extend_from_slice(&(idx.m() as u64).to_le_bytes());
    out.extend_from_slice(&(idx.core_order.max_closed as u64).to_le_bytes());

    let put_u32s = |out: &mut Vec<u8>, xs: &[u32]| {
        out.extend_from_slice(&(xs.len() as u64).to_le_bytes());
        for &x in xs {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    let put_u64s = |out: &mut Vec<u8>, xs: &[u64]| {
        out.extend_from_slice(&(xs.len() as u64).to_le_bytes());
        for &x in xs {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    let put_f64s = |out: &mut Vec<u8>, xs: &[f64]| {
        out.extend_from_slice(&(xs.len() as u64).to_le_bytes());
        for &x in xs {
            out.extend_from_slice(&x.to_bits().to_le_bytes());
        }
    };

    put_u32s(&mut out, &idx.degrees);
    put_f64s(&mut out, idx.similarity.scores());
    put_u32s(&mut out, &idx.neighbor_order.vertices);
    put_f64s(&mut out, &idx.neighbor_order.sims);
    let co_offsets: Vec<u64> = idx.core_order.offsets.iter().map(|&o| o as u64).collect();
    put_u64s(&mut out, &co_offsets);
    put_u32s(&mut out, &idx.core_order.vertices);
    put_f64s(&mut out, &idx.core_order.thresholds);

    let digest: [u8; 32] = Sha256::digest(&out).into();
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(ScanError::IndexTruncated);
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32s(&mut self, expect: usize) -> Result<Vec<u32>> {
        let len = self.u64()? as usize;
        if len != expect {
            return Err(ScanError::IndexMalformed(format!(
                "array length {len}, expected {expect}"
            )));
        }
        let raw = self.take(len * 4)?;
        Ok(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u64s(&mut self, expect: usize) -> Result<Vec<u64>> {
        let len = self.u64()? as usize;
        if len != expect {
            return Err(ScanError::IndexMalformed(format!(
                "array length {len}, expected {expect}"
            )));
        }
        let raw = self.take(len * 8)?;
        Ok(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn f64s(&mut self, expect: usize) -> Result<Vec<f64>> {
        Ok(self.u64s(expect)?.into_iter().map(f64::from_bits).collect())
    }
}

pub fn deserialize_index(bytes: &[u8]) -> Result<ScanIndex> {
    if bytes.len() < MAGIC.len() + 4 {
        return Err(ScanError::IndexTruncated);
    }
    if &bytes[..8] != MAGIC {
        return Err(ScanError::IndexMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(ScanError::IndexVersion { found: version });
    }
    if bytes.len() < 32 {
        return Err(ScanError::IndexTruncated);
    }
    let (payload, trailer) = bytes.split_at(bytes.len() - 32);
    let digest: [u8; 32] = Sha256::digest(payload).into();
    if digest != trailer {
        return Err(ScanError::IndexChecksum);
    }

    let mut c = Cursor { buf: payload, at: 12 };
    let measure = Measure::from_tag(c.take(1)?[0])
        .ok_or_else(|| ScanError::IndexMalformed("unknown measure tag".into()))?;
    let config_digest: [u8; 32] = c.take(32)?.try_into().unwrap();
    let n = c.u64()? as usize;
    let m = c.u64()? as usize;
    let max_closed = c.u64()? as usize;

    let degrees = c.u32s(n)?;
    let degree_sum: u64 = degrees.iter().map(|&d| d as u64).sum();
    if degree_sum != 2 * m as u64 {
        return Err(ScanError::IndexMalformed("degree sum does not match edge count".into()));
    }
    let scores = c.f64s(2 * m)?;
    let no_vertices = c.u32s(n + 2 * m)?;
    let no_sims = c.f64s(n + 2 * m)?;
    let num_mu = if max_closed < 2 { 0 } else { max_closed - 1 };
    let co_offsets: Vec<usize> =
        c.u64s(num_mu + 1)?.into_iter().map(|o| o as usize).collect();
    let co_vertices = c.u32s(2 * m)?;
    let co_thresholds = c.f64s(2 * m)?;
    if c.at != payload.len() {
        return Err(ScanError::IndexMalformed("trailing bytes after payload".into()));
    }
    if co_offsets[0] != 0
        || co_offsets.windows(2).any(|w| w[0] > w[1])
        || *co_offsets.last().unwrap() != 2 * m
    {
        return Err(ScanError::IndexMalformed("core order offsets are inconsistent".into()));
    }

    let mut no_offsets = Vec::with_capacity(n + 1);
    no_offsets.push(0usize);
    for v in 0..n {
        no_offsets.push(no_offsets[v] + degrees[v] as usize + 1);
    }

    Ok(ScanIndex {
        measure,
        config_digest,
        degrees,
        similarity: SimilarityTable::new(measure, scores),
        neighbor_order: NeighborOrder { offsets: no_offsets, vertices: no_vertices, sims: no_sims },
        core_order: CoreOrder {
            max_closed,
            offsets: co_offsets,
            vertices: co_vertices,
            thresholds: co_thresholds,
        },
    })
}

//! Sketch-based approximate similarity and the hybrid exact/approximate path.
//!
//! Two sketch families are supported:
//! * SimHash — k signed projections onto random normal hyperplanes; the
//!   Hamming distance between two sketches estimates the angle between the
//!   neighborhood vectors, hence the cosine score.
//! * MinHash — estimates the Jaccard score of closed neighborhoods, either
//!   with k independent hash functions ("standard") or with a single hash
//!   whose value range is split into k buckets ("k-partition"). The
//!   k-partition variant fills empty buckets by circular rightward borrowing;
//!   borrowed (densified) coordinates never count when both sides borrowed.
//!
//! The hybrid driver only approximates an edge when both endpoints have
//! degree above a cutoff; everything else is computed exactly with the same
//! scalar kernel as the bulk exact path, so disabling approximation (cutoff
//! above the max degree) reproduces the exact table bit-for-bit.

use crate::error::{Result, ScanError};
use crate::graph::{Graph, VertexId};
use crate::par;
use crate::similarity::exact::{exact_edge_score, vertex_norms};
use crate::similarity::rng::{keyed_normal, keyed_u64};
use crate::similarity::{Measure, SimilarityTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchScheme {
    SimHash,
    MinHashStandard,
    MinHashKPartition,
}

impl SketchScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            SketchScheme::SimHash => "simhash",
            SketchScheme::MinHashStandard => "minhash-standard",
            SketchScheme::MinHashKPartition => "minhash-kpartition",
        }
    }
}

impl std::fmt::Display for SketchScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sketching parameters. `threshold` is the degree cutoff of the hybrid
/// heuristic; the constructor derives the default (k for SimHash, 3k/2 for
/// MinHash — sketches only pay off past those degrees).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxConfig {
    pub scheme: SketchScheme,
    pub samples: usize,
    pub seed: u64,
    pub threshold: usize,
}

impl ApproxConfig {
    pub fn new(scheme: SketchScheme, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(ScanError::Config("sample count must be at least 1".into()));
        }
        let threshold = match scheme {
            SketchScheme::SimHash => samples,
            SketchScheme::MinHashStandard | SketchScheme::MinHashKPartition => {
                samples.saturating_mul(3) / 2
            }
        };
        Ok(ApproxConfig { scheme, samples, seed, threshold })
    }

    /// Overrides the degree cutoff (0 approximates every edge).
    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.threshold = threshold;
        self
    }
}

/// Sample-count lower bound for classifying every edge outside the blurred
/// threshold band correctly with high probability, given accuracy δ:
/// `π²·ln(nm) / (2δ²)` for SimHash and `ln(nm) / (2δ²)` for MinHash. The
/// guarantee is proven for the standard MinHash variant; for k-partition
/// sketches the same value is returned as a heuristic without a formal bound.
pub fn required_samples(n: f64, m: f64, delta: f64, scheme: SketchScheme) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ScanError::Config(format!(
            "accuracy parameter must lie in (0, 1), got {delta}"
        )));
    }
    if !(n >= 1.0 && m >= 1.0) {
        return Err(ScanError::Config("graph sizes must be at least 1".into()));
    }
    let base = (n * m).ln() / (2.0 * delta * delta);
    let raw = match scheme {
        SketchScheme::SimHash => std::f64::consts::PI.powi(2) * base,
        SketchScheme::MinHashStandard | SketchScheme::MinHashKPartition => base,
    };
    Ok((raw.ceil() as usize).max(1))
}

/// k sign bits of random hyperplane projections of the closed neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimHashSketch {
    k: usize,
    bits: Vec<u64>,
}

impl SimHashSketch {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits[i / 64] >> (i % 64)) & 1 == 1
    }
}

fn simhash_sketch_vertex(g: &Graph, v: VertexId, k: usize, seed: u64, weighted: bool) -> SimHashSketch {
    let mut dots = vec![0.0f64; k];
    let mut accumulate = |x: VertexId, w: f64| {
        for (i, d) in dots.iter_mut().enumerate() {
            *d += w * keyed_normal(seed, i as u64, x as u64);
        }
    };
    // Ascending order with the self entry in place, same as the exact path.
    let nbrs = g.neighbors_of(v);
    let wts = g.weights_of(v);
    let mut emitted_self = false;
    for (i, &x) in nbrs.iter().enumerate() {
        if !emitted_self && v < x {
            accumulate(v, 1.0);
            emitted_self = true;
        }
        accumulate(x, if weighted { wts[i] } else { 1.0 });
    }
    if !emitted_self {
        accumulate(v, 1.0);
    }
    let mut bits = vec![0u64; k.div_ceil(64)];
    for (i, &d) in dots.iter().enumerate() {
        if d >= 0.0 {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    SimHashSketch { k, bits }
}

/// SimHash sketches for every vertex. `weighted` selects weighted
/// neighborhood vectors and requires a weighted graph.
pub fn simhash_sketch_all(g: &Graph, cfg: &ApproxConfig, weighted: bool) -> Result<Vec<SimHashSketch>> {
    if cfg.scheme != SketchScheme::SimHash {
        return Err(ScanError::Config(format!("expected simhash config, got {}", cfg.scheme)));
    }
    if weighted && !g.is_weighted() {
        return Err(ScanError::Config("weighted sketches require a weighted graph".into()));
    }
    Ok(par::map_collect(g.n(), |v| {
        simhash_sketch_vertex(g, v as VertexId, cfg.samples, cfg.seed, weighted)
    }))
}

/// Cosine estimate from two SimHash sketches: `cos(π·d/k)` clamped to [0, 1],
/// where d is the Hamming distance.
pub fn simhash_similarity(a: &SimHashSketch, b: &SimHashSketch) -> Result<f64> {
    if a.k != b.k {
        return Err(ScanError::Config(format!(
            "sketch sample counts differ: {} vs {}",
            a.k, b.k
        )));
    }
    let d: u32 = a.bits.iter().zip(&b.bits).map(|(x, y)| (x ^ y).count_ones()).sum();
    let est = (std::f64::consts::PI * d as f64 / a.k as f64).cos();
    Ok(est.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinHashVariant {
    Standard,
    KPartition,
}

/// Minimum hash values of the closed neighborhood. For the k-partition
/// variant, `densified[j]` marks buckets filled by borrowing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashSketch {
    variant: MinHashVariant,
    values: Vec<u64>,
    densified: Vec<bool>,
}

impl MinHashSketch {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn variant(&self) -> MinHashVariant {
        self.variant
    }
}

fn minhash_sketch_vertex(g: &Graph, v: VertexId, cfg: &ApproxConfig) -> MinHashSketch {
    let k = cfg.samples;
    let closed = || {
        g.neighbors_of(v)
            .iter()
            .copied()
            .chain(std::iter::once(v))
    };
    match cfg.scheme {
        SketchScheme::MinHashStandard => {
            let values = (0..k)
                .map(|i| {
                    closed()
                        .map(|x| keyed_u64(cfg.seed, i as u64, x as u64))
                        .min()
                        .expect("closed neighborhood is never empty")
                })
                .collect();
            MinHashSketch { variant: MinHashVariant::Standard, values, densified: Vec::new() }
        }
        SketchScheme::MinHashKPartition => {
            let mut values = vec![u64::MAX; k];
            let mut filled = vec![false; k];
            for x in closed() {
                let h = keyed_u64(cfg.seed, 0, x as u64);
                let bucket = ((h as u128 * k as u128) >> 64) as usize;
                if h < values[bucket] || !filled[bucket] {
                    values[bucket] = h;
                }
                filled[bucket] = true;
            }
            let mut densified = vec![false; k];
            for j in 0..k {
                if !filled[j] {
                    let mut s = (j + 1) % k;
                    while !filled[s] {
                        s = (s + 1) % k;
                    }
                    values[j] = values[s];
                    densified[j] = true;
                }
            }
            MinHashSketch { variant: MinHashVariant::KPartition, values, densified }
        }
        SketchScheme::SimHash => unreachable!("minhash sketch with simhash scheme"),
    }
}

/// MinHash sketches for every vertex. Only unweighted graphs are supported:
/// minimum hashing has no faithful reading of edge weights.
pub fn minhash_sketch_all(g: &Graph, cfg: &ApproxConfig) -> Result<Vec<MinHashSketch>> {
    if cfg.scheme == SketchScheme::SimHash {
        return Err(ScanError::Config("expected a minhash config, got simhash".into()));
    }
    if g.is_weighted() {
        return Err(ScanError::Config("minhash sketches are unsupported on weighted graphs".into()));
    }
    Ok(par::map_collect(g.n(), |v| minhash_sketch_vertex(g, v as VertexId, cfg)))
}

/// Jaccard estimate: fraction of matching coordinates. Coordinates where both
/// sketches were densified are excluded from numerator and denominator; if
/// every coordinate is excluded the estimate is 0.
pub fn minhash_similarity(a: &MinHashSketch, b: &MinHashSketch) -> Result<f64> {
    if a.variant != b.variant {
        return Err(ScanError::Config("minhash sketch variants differ".into()));
    }
    if a.values.len() != b.values.len() {
        return Err(ScanError::Config(format!(
            "sketch sample counts differ: {} vs {}",
            a.values.len(),
            b.values.len()
        )));
    }
    let k = a.values.len();
    let (mut num, mut den) = (0usize, 0usize);
    for j in 0..k {
        let both_densified = a.variant == MinHashVariant::KPartition
            && a.densified[j]
            && b.densified[j];
        if both_densified {
            continue;
        }
        den += 1;
        if a.values[j] == b.values[j] {
            num += 1;
        }
    }
    if den == 0 {
        return Ok(0.0);
    }
    Ok(num as f64 / den as f64)
}

/// Tallies from a hybrid run, mostly interesting in tests and reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HybridStats {
    pub sketched_vertices: usize,
    pub approx_edges: usize,
    pub exact_edges: usize,
}

enum Sketches {
    Sim(Vec<Option<SimHashSketch>>),
    Min(Vec<Option<MinHashSketch>>),
}

/// Hybrid similarity: edges whose endpoints both have degree above
/// `cfg.threshold` are estimated from sketches, all other edges are computed
/// exactly with `exact_measure`. Sketches are only built for high-degree
/// vertices that actually have a high-degree neighbor.
///
/// Valid pairings: SimHash with cosine or weighted-cosine, MinHash with
/// jaccard on an unweighted graph.
pub fn compute_similarities_hybrid(
    g: &Graph,
    cfg: &ApproxConfig,
    exact_measure: Measure,
) -> Result<SimilarityTable> {
    compute_similarities_hybrid_with_stats(g, cfg, exact_measure).map(|(t, _)| t)
}

pub fn compute_similarities_hybrid_with_stats(
    g: &Graph,
    cfg: &ApproxConfig,
    exact_measure: Measure,
) -> Result<(SimilarityTable, HybridStats)> {
    let out_measure = match (cfg.scheme, exact_measure) {
        (SketchScheme::SimHash, Measure::Cosine | Measure::WeightedCosine) => Measure::ApproxCosine,
        (SketchScheme::MinHashStandard | SketchScheme::MinHashKPartition, Measure::Jaccard) => {
            Measure::ApproxJaccard
        }
        _ => {
            return Err(ScanError::Config(format!(
                "sketch scheme {} cannot approximate measure {exact_measure}",
                cfg.scheme
            )))
        }
    };
    crate::similarity::ensure_exact_measure(exact_measure, g)?;
    if matches!(cfg.scheme, SketchScheme::MinHashStandard | SketchScheme::MinHashKPartition)
        && g.is_weighted()
    {
        return Err(ScanError::Config("minhash sketches are unsupported on weighted graphs".into()));
    }

    let n = g.n();
    let high = |v: VertexId| g.degree(v) > cfg.threshold;
    let needs_sketch: Vec<bool> = par::map_collect(n, |v| {
        let v = v as VertexId;
        high(v) && g.neighbors_of(v).iter().any(|&u| high(u))
    });

    let weighted_vectors = exact_measure == Measure::WeightedCosine;
    let sketches = match cfg.scheme {
        SketchScheme::SimHash => Sketches::Sim(par::map_collect(n, |v| {
            needs_sketch[v].then(|| {
                simhash_sketch_vertex(g, v as VertexId, cfg.samples, cfg.seed, weighted_vectors)
            })
        })),
        _ => Sketches::Min(par::map_collect(n, |v| {
            needs_sketch[v].then(|| minhash_sketch_vertex(g, v as VertexId, cfg))
        })),
    };

    let norms = (exact_measure == Measure::WeightedCosine).then(|| vertex_norms(g));
    let view = g.degree_oriented_view();
    let m = view.num_edges();
    let per_edge: Vec<(f64, bool)> = par::map_collect(m, |e| {
        let u = view.source(e);
        let v = view.target(e);
        if high(u) && high(v) {
            let s = match &sketches {
                Sketches::Sim(sk) => simhash_similarity(
                    sk[u as usize].as_ref().expect("sketch present for high-degree endpoint"),
                    sk[v as usize].as_ref().expect("sketch present for high-degree endpoint"),
                ),
                Sketches::Min(sk) => minhash_similarity(
                    sk[u as usize].as_ref().expect("sketch present for high-degree endpoint"),
                    sk[v as usize].as_ref().expect("sketch present for high-degree endpoint"),
                ),
            };
            (s.expect("matching sketch shapes by construction"), true)
        } else {
            (exact_edge_score(g, norms.as_ref(), u, v, exact_measure), false)
        }
    });

    let stats = HybridStats {
        sketched_vertices: needs_sketch.iter().filter(|&&b| b).count(),
        approx_edges: per_edge.iter().filter(|(_, a)| *a).count(),
        exact_edges: per_edge.iter().filter(|(_, a)| !*a).count(),
    };
    let mut scores = vec![0.0f64; 2 * g.m()];
    for (e, &(s, _)) in per_edge.iter().enumerate() {
        let p = view.half_edge(e);
        scores[p.0] = s;
        scores[g.twin(p).0] = s;
    }
    Ok((SimilarityTable::new(out_measure, scores), stats))
}

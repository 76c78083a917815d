//! Clustering quality scores and parameter sweeps.
//!
//! Both scores treat unclustered vertices (hubs, outliers) as singleton
//! groups, so every vertex participates. Modularity uses edge weights;
//! on unweighted graphs every weight is 1 and the value matches the
//! combinatorial definition. All accumulation is sequential in fixed order —
//! sweeps parallelize across grid points, never inside a score.

use std::collections::HashMap;

use crate::error::{Result, ScanError};
use crate::graph::{Graph, HalfEdgeId};
use crate::index::ScanIndex;
use crate::par;
use crate::query::{cluster, Clustering, QueryParams};

/// Dense group id per vertex: cluster ids stay, unclustered vertices get
/// fresh singleton ids after them. Returns (groups, group count).
fn effective_groups(c: &Clustering) -> (Vec<u32>, usize) {
    let mut next = c.num_clusters();
    let groups = c
        .assignment()
        .iter()
        .map(|a| match a {
            Some(k) => *k,
            None => {
                let g = next;
                next += 1;
                g
            }
        })
        .collect();
    (groups, next as usize)
}

/// Weighted Newman modularity of the clustering, unclustered vertices as
/// singletons. Errors on an edgeless graph or a vertex-count mismatch.
pub fn modularity(g: &Graph, clustering: &Clustering) -> Result<f64> {
    if clustering.n() != g.n() {
        return Err(ScanError::Config(format!(
            "clustering covers {} vertices, graph has {}",
            clustering.n(),
            g.n()
        )));
    }
    if g.m() == 0 {
        return Err(ScanError::Config("modularity needs at least one edge".into()));
    }
    let (groups, num_groups) = effective_groups(clustering);
    let mut strength = vec![0.0f64; num_groups];
    let mut internal = vec![0.0f64; num_groups];
    let mut total = 0.0f64;
    for v in 0..g.n() {
        let gv = groups[v] as usize;
        for p in g.neighbor_range(v as u32) {
            let w = g.weight(HalfEdgeId(p));
            let u = g.target(HalfEdgeId(p));
            strength[gv] += w;
            total += w;
            if groups[u as usize] as usize == gv {
                internal[gv] += w;
            }
        }
    }
    let mut q = 0.0;
    for c in 0..num_groups {
        let frac = strength[c] / total;
        q += internal[c] / total - frac * frac;
    }
    Ok(q)
}

/// Pair-count contingency table between two clusterings, unclustered
/// vertices as singleton groups.
#[derive(Debug, Clone)]
pub struct ContingencyCounts {
    pub cells: HashMap<(u32, u32), u64>,
    pub row_sums: HashMap<u32, u64>,
    pub col_sums: HashMap<u32, u64>,
    pub n: u64,
}

impl ContingencyCounts {
    pub fn build(a: &Clustering, b: &Clustering) -> Result<Self> {
        if a.n() != b.n() {
            return Err(ScanError::Config(format!(
                "clusterings cover different vertex counts: {} vs {}",
                a.n(),
                b.n()
            )));
        }
        let (ga, _) = effective_groups(a);
        let (gb, _) = effective_groups(b);
        let mut cells: HashMap<(u32, u32), u64> = HashMap::new();
        let mut row_sums: HashMap<u32, u64> = HashMap::new();
        let mut col_sums: HashMap<u32, u64> = HashMap::new();
        for v in 0..a.n() {
            *cells.entry((ga[v], gb[v])).or_insert(0) += 1;
            *row_sums.entry(ga[v]).or_insert(0) += 1;
            *col_sums.entry(gb[v]).or_insert(0) += 1;
        }
        Ok(ContingencyCounts { cells, row_sums, col_sums, n: a.n() as u64 })
    }
}

/// First-occurrence canonical labels; two clusterings are the same partition
/// iff these are equal.
fn canonical_partition(c: &Clustering) -> Vec<u32> {
    let (groups, _) = effective_groups(c);
    let mut seen: HashMap<u32, u32> = HashMap::new();
    groups
        .iter()
        .map(|&g| {
            let next = seen.len() as u32;
            *seen.entry(g).or_insert(next)
        })
        .collect()
}

/// Adjusted Rand index between two clusterings of the same vertex set. When
/// the correction denominator degenerates to zero the value is 1 for
/// identical partitions and 0 otherwise.
pub fn adjusted_rand_index(a: &Clustering, b: &Clustering) -> Result<f64> {
    let counts = ContingencyCounts::build(a, b)?;
    if counts.n < 2 {
        return Ok(1.0);
    }
    let comb2 = |x: u64| (x.saturating_sub(1) * x / 2) as f64;
    let index: f64 = counts.cells.values().map(|&x| comb2(x)).sum();
    let sum_a: f64 = counts.row_sums.values().map(|&x| comb2(x)).sum();
    let sum_b: f64 = counts.col_sums.values().map(|&x| comb2(x)).sum();
    let expected = sum_a * sum_b / comb2(counts.n);
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(if canonical_partition(a) == canonical_partition(b) { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityMetric {
    Modularity,
    AdjustedRand,
}

impl QualityMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityMetric::Modularity => "modularity",
            QualityMetric::AdjustedRand => "ari",
        }
    }

    pub fn from_str_tag(s: &str) -> Option<Self> {
        Some(match s {
            "modularity" => QualityMetric::Modularity,
            "ari" => QualityMetric::AdjustedRand,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mu: usize,
    pub epsilon: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub best: SweepRow,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,epsilon,score\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.mu, r.epsilon, r.score));
        }
        out
    }
}

/// μ grid 2, 4, …, 2^18.
pub fn default_mu_grid() -> Vec<usize> {
    (1..=18).map(|k| 1usize << k).collect()
}

/// ε grid 0.01, 0.02, …, 0.99.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Scores a deterministic clustering per (μ, ε) grid point, parallel across
/// points. Ties for the best score go to the smaller μ, then the smaller ε.
pub fn sweep(
    g: &Graph,
    index: &ScanIndex,
    mus: &[usize],
    epsilons: &[f64],
    metric: QualityMetric,
    ground_truth: Option<&Clustering>,
) -> Result<SweepResult> {
    if mus.is_empty() || epsilons.is_empty() {
        return Err(ScanError::Config("sweep grids must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(mus.len() * epsilons.len());
    for &mu in mus {
        for &eps in epsilons {
            points.push(QueryParams::new(mu, eps)?);
        }
    }
    match metric {
        QualityMetric::Modularity => {
            if g.m() == 0 {
                return Err(ScanError::Config("modularity needs at least one edge".into()));
            }
        }
        QualityMetric::AdjustedRand => {
            let gt = ground_truth.ok_or_else(|| {
                ScanError::Config("ari sweep needs a ground-truth clustering".into())
            })?;
            if gt.n() != g.n() {
                return Err(ScanError::Config(format!(
                    "ground truth covers {} vertices, graph has {}",
                    gt.n(),
                    g.n()
                )));
            }
        }
    }

    let scored: Vec<Result<SweepRow>> = par::map_collect(points.len(), |i| {
        let params = points[i];
        let c = cluster(index, &params);
        let score = match metric {
            QualityMetric::Modularity => modularity(g, &c)?,
            QualityMetric::AdjustedRand => {
                adjusted_rand_index(&c, ground_truth.expect("validated above"))?
            }
        };
        Ok(SweepRow { mu: params.mu, epsilon: params.epsilon, score })
    });
    let mut rows = Vec::with_capacity(scored.len());
    for r in scored {
        rows.push(r?);
    }
    let mut best = rows[0];
    for r in &rows[1..] {
        if r.score > best.score {
            best = *r;
        }
    }
    Ok(SweepResult { rows, best })
}

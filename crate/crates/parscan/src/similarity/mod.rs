//! Per-edge structural similarity, exact and sketch-based.
//!
//! Scores are stored per half-edge; both copies of an undirected edge always
//! carry the same bits. Comparisons against a threshold ε are exact `>=` on
//! the stored value — no tolerance anywhere downstream.

pub mod approx;
pub mod exact;
mod rng;

use crate::error::{Result, ScanError};
use crate::graph::{Graph, HalfEdgeId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Cosine,
    Jaccard,
    WeightedCosine,
    ApproxCosine,
    ApproxJaccard,
}

impl Measure {
    pub fn is_exact(self) -> bool {
        matches!(self, Measure::Cosine | Measure::Jaccard | Measure::WeightedCosine)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Cosine => "cosine",
            Measure::Jaccard => "jaccard",
            Measure::WeightedCosine => "weighted-cosine",
            Measure::ApproxCosine => "approx-cosine",
            Measure::ApproxJaccard => "approx-jaccard",
        }
    }

    pub fn from_str_tag(s: &str) -> Option<Self> {
        Some(match s {
            "cosine" => Measure::Cosine,
            "jaccard" => Measure::Jaccard,
            "weighted-cosine" => Measure::WeightedCosine,
            "approx-cosine" => Measure::ApproxCosine,
            "approx-jaccard" => Measure::ApproxJaccard,
            _ => return None,
        })
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Measure::Cosine => 0,
            Measure::Jaccard => 1,
            Measure::WeightedCosine => 2,
            Measure::ApproxCosine => 3,
            Measure::ApproxJaccard => 4,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Option<Self> {
        Some(match t {
            0 => Measure::Cosine,
            1 => Measure::Jaccard,
            2 => Measure::WeightedCosine,
            3 => Measure::ApproxCosine,
            4 => Measure::ApproxJaccard,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One f64 score per half-edge, indexed by [`HalfEdgeId`]. Scores lie in
/// [0, 1] and twin half-edges hold bit-identical values.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    measure: Measure,
    scores: Vec<f64>,
}

impl SimilarityTable {
    pub(crate) fn new(measure: Measure, scores: Vec<f64>) -> Self {
        SimilarityTable { measure, scores }
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, p: HalfEdgeId) -> f64 {
        self.scores[p.0]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Convenience lookup by endpoints; `None` if {u,v} is not an edge.
    pub fn score_of(&self, g: &Graph, u: VertexId, v: VertexId) -> Option<f64> {
        g.position_of(u, v).map(|p| self.score(p))
    }
}

/// Per-vertex weighted neighborhood norms: `norms[v] = sqrt(Σ w(v,x)²)` over
/// the closed neighborhood with `w(v,v) = 1`, so every entry is ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexNorms(pub(crate) Vec<f64>);

impl VertexNorms {
    pub fn get(&self, v: VertexId) -> f64 {
        self.0[v as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn ensure_exact_measure(measure: Measure, g: &Graph) -> Result<()> {
    if !measure.is_exact() {
        return Err(ScanError::Config(format!(
            "measure {measure} is not an exact measure"
        )));
    }
    if measure == Measure::WeightedCosine && !g.is_weighted() {
        return Err(ScanError::Config(
            "weighted-cosine requires a weighted graph".into(),
        ));
    }
    Ok(())
}

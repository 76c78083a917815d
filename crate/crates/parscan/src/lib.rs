//! Structural graph clustering behind a reusable index.
//!
//! The pipeline: load an undirected graph, compute a per-edge structural
//! similarity (exactly, or sketch-approximated for high-degree regions),
//! build the neighbor-order/core-order index once, then answer (μ, ε)
//! clustering queries in output-sensitive time. Cluster quality can be
//! scored by modularity or against a reference partition, and a brute-force
//! reference implementation cross-checks the whole stack on small inputs.
//!
//! With the default `parallel` feature all heavy phases run on rayon and
//! produce bit-identical results to the sequential fallback.

pub mod error;
pub mod graph;
pub mod index;
pub mod oracle;
pub mod par;
pub mod quality;
pub mod query;
pub mod similarity;
mod unionfind;

pub mod testutil;

pub use error::{Result, ScanError};
pub use graph::{load_edge_list, load_edge_list_file, Graph, HalfEdgeId, LoadStats, VertexId};
pub use index::{build_index, build_index_with_config, deserialize_index, serialize_index, ScanIndex};
pub use query::{cluster, get_cores, label_hubs_outliers, similar_edges, Clustering, Labels, QueryParams};
pub use similarity::{Measure, SimilarityTable};

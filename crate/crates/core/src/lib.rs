//! Community structure validation for networks.
//!
//! A partition of a graph's nodes is scored by testing every pair of
//! communities for link over- or under-enrichment against a hypergeometric
//! null, correcting the family with Benjamini-Hochberg, and summarising the
//! rejections. The crate also ships a degree-corrected block model
//! generator, Louvain and fast-greedy clustering, complete linkage, and the
//! cross-graph comparison built on the indices.

pub mod clustering;
pub mod compare;
pub mod dcsbm;
pub mod enrichment;
pub mod error;
pub mod graph;
pub mod indices;
pub mod partition;
pub mod rng;
pub mod simharness;
pub mod stats;

pub use clustering::{Dendrogram, DistanceMatrix};
pub use compare::{CompareOptions, ComparisonResult};
pub use enrichment::{EnrichmentMatrix, EnrichmentResult};
pub use error::{Error, Result};
pub use graph::Graph;
pub use indices::{Alpha, CsvReport};
pub use partition::Partition;
pub use simharness::SimResultRow;

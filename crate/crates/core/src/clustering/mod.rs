//! Community detection and hierarchical clustering.

mod fast_greedy;
mod linkage;
mod louvain;
mod modularity;

pub use fast_greedy::fast_greedy;
pub use linkage::{
    complete_linkage, cut_dendrogram, parse_newick, to_newick, write_labeled_matrix, Dendrogram, DistanceMatrix, Merge,
};
pub use louvain::{louvain, louvain_levels, LouvainLevel};
pub use modularity::modularity;

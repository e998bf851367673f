//! kNN hypergraph and pairwise-graph construction, and the propagation
//! operators built from them.
//!
//! For a hypergraph with incidence `H`, hyperedge weights `W`, vertex degrees
//! `Dv` and hyperedge degrees `De`:
//!
//! ```text
//! Θ_sym = Dv^{-1/2} H W De^{-1} Hᵀ Dv^{-1/2}
//! Θ_rw  = Dv^{-1}   H W De^{-1} Hᵀ
//! ```
//!
//! The corresponding Laplacians are `I − Θ` and are never formed explicitly.

mod cache;
mod graph;
mod incidence;
mod knn;
mod operator;

pub use cache::{load_operator, read_operator, save_operator, write_operator, CACHE_MAGIC, CACHE_VERSION};
pub use graph::{build_knn_graph, gcn_operator, gcn_operator_from_neighbors, knn_graph_from_neighbors, Bandwidth};
pub use incidence::{build_knn_hypergraph, hypergraph_from_neighbors, Hypergraph};
pub use knn::{knn_indices, NeighborTable};
pub use operator::{hypergraph_operator, Normalization, PropagationOperator};

//! Library for partitioning dense, highly connected digraphs into parts
//! whose induced and crossing subgraphs stay strongly k-connected, with
//! independently re-verifiable certificates, plus the tournament cycle
//! tools built on the same machinery.

pub mod connectivity;
pub mod dominating;
pub mod engine;
pub mod digraph;
pub mod instances;
pub mod tournament;
pub mod verify;

pub use digraph::{Digraph, DigraphError, SubDigraph, Vertex, VertexSet};

//! Walk-based algorithms: centrality, spatial search, isomorphism
//! certificates and chiral topological probes.

pub mod centrality;
pub mod isomorphism;
pub mod search;
pub mod topology;

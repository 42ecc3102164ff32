//! Continuous-time quantum walk simulation on graphs.
//!
//! Two-particle walks are mapped onto single-particle walks on extended
//! graphs ([`multiparticle`]); [`evolution`] supplies the spectral
//! propagators; [`dynamics`] and [`applications`] build the hitting,
//! mixing, centrality, search, isomorphism and topology experiments on top.

pub mod applications;
pub mod dynamics;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod graph;
pub mod multiparticle;
pub mod optimize;
pub mod seed;

/// Library version, echoed into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use evolution::{HermitianOperator, ProbabilityDistribution, QuantumState, Spectrum};
pub use graph::Graph;
pub use multiparticle::{ExtendedBasis, ParticleKind};

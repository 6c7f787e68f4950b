//! Exact censuses of p-close periodic orbits of the baker's map.
//!
//! Two binary cyclic words are p-close when every length-`p` subword occurs
//! in both equally often; the classes (clusters) are labelled by edge-count
//! vectors on the de Bruijn graph `G_p`. The crate counts clusters exactly,
//! evaluates the large-`n` estimates for their moments and size distribution,
//! and checks the matrix identities behind those estimates.

pub mod asymptotics;
pub mod baker;
pub mod census;
pub mod error;
pub mod graph;
mod numeric;
pub mod spectral;
pub mod words;

pub use asymptotics::AsymptoticEstimate;
pub use baker::{PeriodicOrbit, PhasePointRational};
pub use census::{CensusTable, ClusterRecord, DistributionSample, Engine, Level};
pub use error::{Error, Result};
pub use graph::{DeBruijnGraph, EdgeCountVector};
pub use numeric::log2_big;
pub use spectral::{ComplexMatrix, PhasePoint, RealMatrix, ValidationRecord};
pub use words::{BinaryWord, ClusterTreeLevel, Necklace, PWord};

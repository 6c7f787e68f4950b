//! Shared fixtures for the criterion benchmarks.

use orbit_census::graph::{enumerate_admissible_vectors, EdgeCountVector};

/// Admissible vectors of a census, sorted so benchmark inputs are stable.
pub fn admissible(n: u32, p: u32) -> Vec<EdgeCountVector> {
    let mut v = enumerate_admissible_vectors(n, p).expect("supported size");
    v.sort();
    v
}

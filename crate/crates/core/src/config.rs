//! Numerical tolerances.

/// Tolerance pair used throughout the crate.
///
/// `rank` is the relative threshold for numerical rank decisions: a singular
/// or eigenvalue counts as zero when it is below `rank` times the largest
/// value (or below `rank` itself when everything is tiny). `eq` is the
/// threshold for equality of matrices, unitality and isometry checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: f64,
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            eq: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank: f64, eq: f64) -> Self {
        Tolerances { rank, eq }
    }
}

//! Error values shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "map is not completely positive: Choi block ({block_row},{block_col}) has eigenvalue {eigenvalue:.6e}"
    )]
    NotCompletelyPositive {
        block_row: usize,
        block_col: usize,
        eigenvalue: f64,
    },

    #[error("map is not unital: ||f(1) - 1|| = {deviation:.6e}")]
    NotUnital { deviation: f64 },

    #[error("representation must be minimal: environment mult {found:?}, minimal mult {minimal:?}")]
    MustBeMinimal {
        found: Vec<Vec<usize>>,
        minimal: Vec<Vec<usize>>,
    },

    #[error("representations do not represent the same CP map (Choi distance {distance:.6e})")]
    RepresentationsInequivalent { distance: f64 },

    #[error("map is extremal: no convex decomposition exists")]
    NoDecomposition,

    #[error("the zero bimodule has no endomorphism algebra")]
    ZeroBimodule,

    #[error("random generator failed after {attempts} resampling attempts")]
    GeneratorFailure { attempts: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal numerical failure: {0}")]
    NumericalFailure(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

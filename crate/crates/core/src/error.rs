use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A wavevector `k + G` landed on the light shell `|k + G| = k0`.
    #[error("resonant wavevector: ||k+G| - k0| = {distance:.3e} is below the pole tolerance")]
    ResonantWavevector { distance: f64 },

    #[error("{masked} of {total} mesh points are resonant, above the allowed fraction")]
    ResonantMesh { masked: usize, total: usize },

    /// A Bloch matrix that should be Hermitian is not.
    #[error("Bloch matrix is not Hermitian: anti-Hermitian part {residual:.3e}")]
    NonHermitian { residual: f64 },

    #[error("eigensolver failed to converge for a {dimension}x{dimension} matrix")]
    ConvergenceFailure { dimension: usize },

    #[error("broadening extrapolation did not converge: successive estimates differ by {difference:.3e}")]
    NonConvergedExtrapolation { difference: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no oscillation found in trajectory: {0}")]
    NoOscillation(String),

    #[error("duplicate site position at index {0}")]
    DuplicatePosition(usize),

    #[error("impurity {index} coincides with array site {site}")]
    ImpurityOnSite { index: usize, site: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no states with {particles} particles on {rungs} rungs at occupation cap {n_cap}")]
    EmptyBasis { rungs: usize, particles: usize, n_cap: u8 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("spectrum is defective; {0} requires a biorthonormal eigenbasis")]
    DefectiveSpectrum(&'static str),

    #[error("singular manifold: intermediate state {state} is degenerate with the reference energy")]
    SingularManifold { state: usize },

    #[error("projected manifold is not degenerate under H0 (spread {spread:e})")]
    NonDegenerateManifold { spread: f64 },

    #[error("broken path: vertex {vertex} does not start where the previous one ended")]
    BrokenPath { vertex: usize },

    #[error("path vertex {vertex} has no matrix element (transition not generated by its term)")]
    ZeroVertex { vertex: usize },

    #[error("zero energy denominator at path vertex {vertex}")]
    ZeroDenominator { vertex: usize },

    #[error("undefined: {0}")]
    Undefined(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

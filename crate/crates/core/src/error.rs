use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("map is not well defined: {0}")]
    IllDefined(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("not a free summand: {0}")]
    NotSummand(String),
    #[error("pairing is not unimodular")]
    PairingNotUnimodular,
    #[error("contraction does not factor: {0}")]
    ContractionNotFactoring(String),
    #[error("not cartesian: {0}")]
    NotCartesian(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("richness insufficient: {0}")]
    Richness(String),
    #[error("sheaf is not locally cyclic: {0}")]
    NotLocallyCyclic(String),
    #[error("monodromy is not trivial: {0}")]
    NontrivialMonodromy(String),
    #[error("bad input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

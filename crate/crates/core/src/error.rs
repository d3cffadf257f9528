use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown directed edge {0}")]
    UnknownEdge(usize),

    #[error("vertex {0} out of range")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("current is not sourceless (vertex {vertex} has divergence {divergence})")]
    NotSourceless { vertex: usize, divergence: i64 },

    #[error("height integration inconsistent across dual edge {edge}")]
    HeightInconsistent { edge: usize },

    #[error("duplicate Poisson edge (edge {edge}, time {time})")]
    DuplicatePoint { edge: usize, time: f64 },

    #[error("Poisson edge set invalid: {0}")]
    InvalidPoissonSet(String),

    #[error("not a disjoint cycle cover: {0}")]
    NotACycleCover(String),

    #[error("enumeration bound exceeded: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("rejection sampler gave up after {attempts} attempts; use the MCMC sampler")]
    RejectionExhausted { attempts: u64 },

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("fit needs at least 3 usable points, got {0}")]
    InsufficientData(usize),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

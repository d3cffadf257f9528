//! Samplers for Poisson edge sets and currents: exact unconditioned and
//! rejection-conditioned draws, a Metropolis chain on sourceless currents,
//! and worm chains for two-point ratios and sourceless currents.

mod checkpoint;
mod mcmc;
mod poisson;
mod worm;

pub use checkpoint::Checkpoint;
pub use mcmc::{mcmc_sweep, run_chain, McmcConfig, MoveSet};
pub use poisson::{
    assign_times, sample_counts, sample_sourceless_counts, sample_sourceless_rejection, sample_unconditioned,
    LocalTimeField, PoissonEdgeSet, PoissonPoint, RejectionSample,
};
pub use worm::{
    run_sourceless_worm, worm_sweep, worm_two_point, worm_visit_batches, WormEstimate, WormState,
};

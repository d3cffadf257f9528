//! Current representation of the XY model on finite graphs, the cycle
//! decomposition of Poisson edge processes, and the dual integer height
//! function on square-lattice boxes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cycles;
pub mod error;
pub mod estimators;
pub mod graphs;
pub mod heights;
pub mod oracle;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};

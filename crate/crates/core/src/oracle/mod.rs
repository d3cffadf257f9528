//! Exact (up to a rigorous truncation bound) computations on small graphs:
//! partition functions, two-point functions, the height potential, simplex
//! masses, walk expansions and the inequality checkers built on them.

mod checks;
mod currents;
mod haar;
mod series;
mod walks;

pub use checks::{gauge_check, ginibre_check, mono_check, CheckRecord};
pub use currents::{current_sum, TruncatedSum};
pub use haar::{haar_two_point, haar_two_point_matrix};
pub use series::{pair_weight, phi_potential, poisson_upper_tail, simplex_cdf};
pub use walks::{enumerate_walks, walk_expansion_two_point, walk_visit_classes, Walk, WalkExpansion};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;

/// Per-vertex radius `r`; the model has couplings `r_x r_y` and local time
/// budgets `T = r^2 / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusField(Vec<f64>);

impl RadiusField {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain("radii must be finite and nonnegative".into()));
        }
        Ok(RadiusField(r))
    }

    /// `r ≡ sqrt(β)`, the homogeneous model at inverse temperature β.
    pub fn constant(n_vertices: usize, beta: f64) -> Self {
        RadiusField(vec![beta.max(0.0).sqrt(); n_vertices])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `R = r^2`.
    pub fn squared(&self) -> Vec<f64> {
        self.0.iter().map(|r| r * r).collect()
    }

    /// `T = r^2 / 2`.
    pub fn local_time(&self) -> Vec<f64> {
        self.0.iter().map(|r| r * r / 2.0).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Cap on the per-edge net flow enumerated on cotree edges.
    pub max_edge_mass: u64,
    /// Target for the reported remainder bound.
    pub tail_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            max_edge_mass: 40,
            tail_tolerance: 1e-10,
        }
    }
}

/// `Z_{G,R}`, zero when `R` is negative anywhere.
pub fn partition_function(
    graph: &FiniteGraph,
    squared_radius: &[f64],
    policy: &TruncationPolicy,
) -> TruncatedSum {
    if squared_radius.iter().any(|&r| r < 0.0) {
        return TruncatedSum {
            value: 0.0,
            tail_bound: 0.0,
            edge_cap: 0,
            converged: true,
        };
    }
    let budget: Vec<f64> = squared_radius.iter().map(|r| r / 2.0).collect();
    current_sum(graph, &budget, &vec![0; graph.vertex_count()], policy)
}

/// A ratio of two truncated sums with a guaranteed enclosing interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RatioEstimate {
    fn from_sums(num: TruncatedSum, den: TruncatedSum, prefactor: f64) -> Self {
        if num.value == 0.0 && num.tail_bound == 0.0 {
            return RatioEstimate {
                value: 0.0,
                lower: 0.0,
                upper: 0.0,
            };
        }
        let value = prefactor * num.value / den.value;
        let lower = prefactor * num.value / (den.value + den.tail_bound);
        let upper = prefactor * (num.value + num.tail_bound) / den.value;
        RatioEstimate { value, lower, upper }
    }

    /// Half-width of the enclosing interval.
    pub fn error_bound(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

/// `z_{G,R}(τ) = Z_{G,R-2τ} / Z_{G,R}`.
pub fn normalized_ratio(
    graph: &FiniteGraph,
    squared_radius: &[f64],
    tau: &[f64],
    policy: &TruncationPolicy,
) -> Result<RatioEstimate> {
    if tau.iter().any(|&t| t < 0.0) {
        return Err(Error::Domain("tau must be nonnegative".into()));
    }
    let reduced: Vec<f64> = squared_radius.iter().zip(tau).map(|(r, t)| r - 2.0 * t).collect();
    let num = partition_function(graph, &reduced, policy);
    let den = partition_function(graph, squared_radius, policy);
    Ok(RatioEstimate::from_sums(num, den, 1.0))
}

/// `<σ_x σ̄_y>` from the current expansion:
/// `(r_x / r_y) M_{r²/2}[∂n = 1_y - 1_x] / M_{r²/2}[∂n = 0]`.
pub fn two_point_current(
    graph: &FiniteGraph,
    radius: &RadiusField,
    x: usize,
    y: usize,
    policy: &TruncationPolicy,
) -> Result<RatioEstimate> {
    let n = graph.vertex_count();
    if x >= n || y >= n {
        return Err(Error::UnknownVertex(x.max(y)));
    }
    if radius.len() != n {
        return Err(Error::Domain("radius field size mismatch".into()));
    }
    if x == y {
        return Ok(RatioEstimate {
            value: 1.0,
            lower: 1.0,
            upper: 1.0,
        });
    }
    let budget = radius.local_time();
    let mut target = vec![0i64; n];
    target[y] += 1;
    target[x] -= 1;
    let num = current_sum(graph, &budget, &target, policy);
    let den = current_sum(graph, &budget, &vec![0; n], policy);
    let r = radius.values();
    let prefactor = if num.value == 0.0 { 0.0 } else { r[x] / r[y] };
    Ok(RatioEstimate::from_sums(num, den, prefactor))
}

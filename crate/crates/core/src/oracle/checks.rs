//! Numeric checkers for the gauge lemma and the correlation inequalities.
//!
//! Each checker returns a [`CheckRecord`]; `pass` already accounts for the
//! slack, so callers only aggregate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{normalized_ratio, RadiusField, RatioEstimate, TruncationPolicy};
use crate::error::{Error, Result};
use crate::graphs::{source_function, Current, FiniteGraph};

pub const GAUGE_RELATIVE_TOLERANCE: f64 = 1e-12;
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// One verification outcome, serialised as a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: &str, lhs: f64, rhs: f64, slack: f64, pass: bool) -> Self {
        CheckRecord {
            check: check.to_string(),
            instance: String::new(),
            lhs,
            rhs,
            slack,
            pass,
        }
    }

    pub fn with_instance(mut self, instance: impl Into<String>) -> Self {
        self.instance = instance.into();
        self
    }
}

/// Compares `prod J_xy^{n_xy}` with `g^{-∂n} prod ((g_x/g_y) J_xy)^{n_xy}`.
///
/// `lhs`/`rhs` hold the moduli of the two products; `pass` is decided on the
/// complex difference relative to the larger modulus.
pub fn gauge_check(
    graph: &FiniteGraph,
    coupling: &[Complex64],
    current: &Current,
    gauge: &[Complex64],
) -> Result<CheckRecord> {
    if coupling.len() != graph.directed_edge_count() || current.len() != coupling.len() {
        return Err(Error::Domain("coupling/current size mismatch".into()));
    }
    if gauge.len() != graph.vertex_count() {
        return Err(Error::Domain("gauge size mismatch".into()));
    }
    if let Some(x) = gauge.iter().position(|g| g.norm() == 0.0) {
        return Err(Error::Domain(format!("gauge vanishes at vertex {x}")));
    }
    let mut plain = Complex64::new(1.0, 0.0);
    let mut gauged = Complex64::new(1.0, 0.0);
    for d in graph.directed_edges() {
        let k = current.get(d) as i32;
        if k == 0 {
            continue;
        }
        let (x, y) = graph.endpoints(d);
        let j = coupling[d.0];
        plain *= j.powi(k);
        gauged *= (gauge[x] / gauge[y] * j).powi(k);
    }
    for (x, &div) in source_function(graph, current).iter().enumerate() {
        if div != 0 {
            gauged *= gauge[x].powi(-(div as i32));
        }
    }
    let scale = plain.norm().max(gauged.norm());
    let diff = (plain - gauged).norm();
    let slack = GAUGE_RELATIVE_TOLERANCE * scale;
    Ok(CheckRecord::new(
        "gauge",
        plain.norm(),
        gauged.norm(),
        slack,
        diff <= slack,
    ))
}

fn require_converged(estimates: &[RatioEstimate]) -> Result<f64> {
    let mut width = 0.0;
    for e in estimates {
        if !e.lower.is_finite() || !e.upper.is_finite() {
            return Err(Error::Domain("oracle truncation failed".into()));
        }
        width += e.error_bound();
    }
    Ok(width)
}

/// `z(τ1 + τ2) >= z(τ1) z(τ2)` for `τ1`, `τ2` with disjoint supports.
pub fn ginibre_check(
    graph: &FiniteGraph,
    radius: &RadiusField,
    tau1: &[f64],
    tau2: &[f64],
    policy: &TruncationPolicy,
) -> Result<CheckRecord> {
    let n = graph.vertex_count();
    if tau1.len() != n || tau2.len() != n || radius.len() != n {
        return Err(Error::Domain("field size mismatch".into()));
    }
    if tau1.iter().zip(tau2).any(|(&a, &b)| a != 0.0 && b != 0.0) {
        return Err(Error::Domain("τ1 and τ2 must have disjoint supports".into()));
    }
    let squared = radius.squared();
    let both: Vec<f64> = tau1.iter().zip(tau2).map(|(a, b)| a + b).collect();
    let z12 = normalized_ratio(graph, &squared, &both, policy)?;
    let z1 = normalized_ratio(graph, &squared, tau1, policy)?;
    let z2 = normalized_ratio(graph, &squared, tau2, policy)?;
    let slack = INEQUALITY_SLACK + require_converged(&[z12, z1, z2])?;
    let rhs = z1.value * z2.value;
    Ok(CheckRecord::new(
        "ginibre",
        z12.value,
        rhs,
        slack,
        z12.value >= rhs - slack,
    ))
}

/// `z_sub(τ) >= z_full(τ̃)` where the subgraph is induced by `subset` and
/// `τ̃` extends `τ` (indexed like `subset`) by zero.
pub fn mono_check(
    full: &FiniteGraph,
    radius: &RadiusField,
    subset: &[usize],
    tau: &[f64],
    policy: &TruncationPolicy,
) -> Result<CheckRecord> {
    let n = full.vertex_count();
    if radius.len() != n || tau.len() != subset.len() {
        return Err(Error::Domain("field size mismatch".into()));
    }
    let sub = full.induced_subgraph(subset)?;
    let squared = radius.squared();
    let sub_squared: Vec<f64> = subset.iter().map(|&v| squared[v]).collect();
    let mut extended = vec![0.0; n];
    for (&v, &t) in subset.iter().zip(tau) {
        extended[v] = t;
    }
    let z_sub = normalized_ratio(&sub, &sub_squared, tau, policy)?;
    let z_full = normalized_ratio(full, &squared, &extended, policy)?;
    let slack = INEQUALITY_SLACK + require_converged(&[z_sub, z_full])?;
    Ok(CheckRecord::new(
        "mono",
        z_sub.value,
        z_full.value,
        slack,
        z_sub.value >= z_full.value - slack,
    ))
}

//! Exploration of a Poisson edge set from a vertex: always leave the
//! current vertex along its unused outgoing point of largest time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;
use crate::sampler::{LocalTimeField, PoissonEdgeSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Stop on the first arrival at the given vertex.
    FirstHit(usize),
    /// Spend local time `s` at the start: only points leaving the start
    /// with time above `T_start - s` may be used there.
    Budget(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationTrace {
    pub start: usize,
    pub rule: StopRule,
    /// Visited vertices, starting with `start`.
    pub walk: Vec<usize>,
    /// Points in the order used.
    pub used: Vec<usize>,
    /// First-hit rule: whether the target was reached. Budget rule: whether
    /// the walk ended back at the start rather than stranding.
    pub completed: bool,
}

pub fn explore(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    pi: &PoissonEdgeSet,
    start: usize,
    rule: StopRule,
) -> Result<ExplorationTrace> {
    let n = graph.vertex_count();
    if start >= n {
        return Err(Error::UnknownVertex(start));
    }
    let cut = match rule {
        StopRule::FirstHit(y) if y >= n => return Err(Error::UnknownVertex(y)),
        StopRule::FirstHit(_) => f64::NEG_INFINITY,
        StopRule::Budget(s) if !(s >= 0.0) => {
            return Err(Error::Domain(format!("budget {s} must be nonnegative")))
        }
        StopRule::Budget(s) => budget.get(start) - s,
    };
    let pts = pi.points();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in pts.iter().enumerate() {
        out[graph.source(p.edge)].push(i);
    }
    let mut walk = vec![start];
    let mut used = Vec::new();
    let mut v = start;
    loop {
        if let StopRule::FirstHit(y) = rule {
            if v == y {
                break;
            }
        }
        let Some(&top) = out[v].last() else { break };
        if v == start && pts[top].time <= cut {
            break;
        }
        out[v].pop();
        used.push(top);
        v = graph.target(pts[top].edge);
        walk.push(v);
    }
    let completed = match rule {
        StopRule::FirstHit(y) => v == y,
        StopRule::Budget(_) => v == start,
    };
    Ok(ExplorationTrace {
        start,
        rule,
        walk,
        used,
        completed,
    })
}

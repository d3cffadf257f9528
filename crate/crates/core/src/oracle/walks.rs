//! Walks, their visit counts, and the integrated walk expansion of the
//! two-point function
//!
//! `<σ_x σ̄_y> = 2/(r_x r_y) * sum_{ω: y -> x} ∫ z(τ) dρ_{k(ω)}(τ)`.
//!
//! The integral only depends on the visit counts `k(ω)`, so walks are
//! grouped by count vector before integrating. Each simplex integral is
//! restricted to `τ <= r²/2` (where `z` vanishes outside); there `ρ_k` has
//! mass `T^k / k!` and normalised law `T * U^{1/k}` per coordinate.

use std::collections::BTreeMap;

use rand::Rng;

use super::series::simplex_cdf;
use super::{partition_function, RadiusField, TruncationPolicy};
use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;
use crate::rng::{chain_rng, stream_id};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    vertices: Vec<usize>,
}

impl Walk {
    pub fn new(graph: &FiniteGraph, vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Domain("a walk visits at least one vertex".into()));
        }
        for w in vertices.windows(2) {
            if graph.find_edge(w[0], w[1]).is_none() {
                return Err(Error::Domain(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        Ok(Walk { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn visit_counts(&self, n_vertices: usize) -> Vec<u32> {
        let mut k = vec![0; n_vertices];
        for &v in &self.vertices {
            k[v] += 1;
        }
        k
    }

    /// The walk with its last vertex removed; `None` for a zero-length walk.
    pub fn truncated(&self) -> Option<Walk> {
        if self.vertices.len() < 2 {
            return None;
        }
        Some(Walk {
            vertices: self.vertices[..self.vertices.len() - 1].to_vec(),
        })
    }
}

/// All walks from `from` to `to` with at most `max_len` steps.
pub fn enumerate_walks(graph: &FiniteGraph, from: usize, to: usize, max_len: usize) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut frontier = vec![vec![from]];
    for len in 0..=max_len {
        for w in &frontier {
            if *w.last().unwrap() == to {
                out.push(Walk { vertices: w.clone() });
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for w in &frontier {
            for &(y, _) in graph.neighbors(*w.last().unwrap()) {
                let mut e = w.clone();
                e.push(y);
                next.push(e);
            }
        }
        frontier = next;
    }
    out
}

/// Walks from `from` to `to` of length `<= max_len`, grouped by visit
/// counts: `(k(ω), number of walks)`.
pub fn walk_visit_classes(
    graph: &FiniteGraph,
    from: usize,
    to: usize,
    max_len: usize,
) -> BTreeMap<Vec<u32>, u64> {
    let n = graph.vertex_count();
    let mut classes = BTreeMap::new();
    let mut start = vec![0u32; n];
    start[from] = 1;
    let mut frontier: BTreeMap<(usize, Vec<u32>), u64> = BTreeMap::new();
    frontier.insert((from, start), 1);
    for len in 0..=max_len {
        for ((end, counts), &mult) in &frontier {
            if *end == to {
                *classes.entry(counts.clone()).or_insert(0) += mult;
            }
        }
        if len == max_len {
            break;
        }
        let mut next: BTreeMap<(usize, Vec<u32>), u64> = BTreeMap::new();
        for ((end, counts), &mult) in &frontier {
            for &(y, _) in graph.neighbors(*end) {
                let mut k = counts.clone();
                k[y] += 1;
                *next.entry((y, k)).or_insert(0) += mult;
            }
        }
        frontier = next;
    }
    classes
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkExpansion {
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    pub std_error: f64,
    /// Number of distinct visit-count classes summed.
    pub classes: usize,
}

/// Partial sum of the integrated walk expansion over walks from `y` to `x`
/// of length at most `max_len`.
///
/// Each class integral uses its own random stream keyed by
/// `(seed, visit counts)`, so partial sums at increasing `max_len` share
/// their common terms exactly and are non-decreasing.
pub fn walk_expansion_two_point(
    graph: &FiniteGraph,
    radius: &RadiusField,
    x: usize,
    y: usize,
    max_len: usize,
    mc_samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<WalkExpansion> {
    let n = graph.vertex_count();
    if x >= n || y >= n {
        return Err(Error::UnknownVertex(x.max(y)));
    }
    let r = radius.values();
    if r[x] <= 0.0 || r[y] <= 0.0 {
        return Err(Error::Domain("endpoint radii must be positive".into()));
    }
    if mc_samples == 0 {
        return Err(Error::Domain("need at least one sample per term".into()));
    }
    let squared = radius.squared();
    let budget = radius.local_time();
    let z_full = partition_function(graph, &squared, policy).value;

    let classes = walk_visit_classes(graph, y, x, max_len);
    let mut total = 0.0;
    let mut var = 0.0;
    let mut reduced = vec![0.0; n];
    for (counts, &mult) in &classes {
        let mass: f64 = counts
            .iter()
            .zip(&budget)
            .map(|(&k, &t)| simplex_cdf(k, t))
            .product();
        if mass == 0.0 {
            continue;
        }
        let mut key: Vec<u64> = vec![seed];
        key.extend(counts.iter().map(|&k| k as u64));
        let mut rng = chain_rng(seed, stream_id(&key));
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..mc_samples {
            for u in 0..n {
                let tau = if counts[u] == 0 {
                    0.0
                } else {
                    let uni: f64 = rng.random();
                    budget[u] * uni.powf(1.0 / counts[u] as f64)
                };
                reduced[u] = (squared[u] - 2.0 * tau).max(0.0);
            }
            let z = partition_function(graph, &reduced, policy).value / z_full;
            sum += z;
            sum2 += z * z;
        }
        let m = mc_samples as f64;
        let mean = sum / m;
        let sample_var = if mc_samples > 1 {
            ((sum2 - m * mean * mean) / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        let scale = mult as f64 * mass;
        total += scale * mean;
        var += scale * scale * sample_var / m;
    }
    let pre = 2.0 / (r[x] * r[y]);
    Ok(WalkExpansion {
        value: pre * total,
        std_error: pre * var.sqrt(),
        classes: classes.len(),
    })
}

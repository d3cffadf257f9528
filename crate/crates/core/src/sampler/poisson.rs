//! Poisson edge sets: points `(xy, τ)` with `τ < T_x`, their counts, and
//! the exact samplers (unconditioned and rejection-conditioned).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Current, DirEdge, FiniteGraph};
use crate::rng::ChainRng;

/// Per-vertex time budget `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeField(Vec<f64>);

impl LocalTimeField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Domain(
                "time budgets must be finite and nonnegative".into(),
            ));
        }
        Ok(LocalTimeField(values))
    }

    /// `T ≡ β/2`.
    pub fn constant(n_vertices: usize, beta: f64) -> Result<Self> {
        LocalTimeField::new(vec![beta / 2.0; n_vertices])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, x: usize) -> f64 {
        self.0[x]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `||T|| = sum_x deg(x) T_x`, the mean number of points.
    pub fn norm(&self, graph: &FiniteGraph) -> f64 {
        (0..graph.vertex_count())
            .map(|x| graph.degree(x) as f64 * self.0[x])
            .sum()
    }

    fn check(&self, graph: &FiniteGraph) -> Result<()> {
        if self.0.len() != graph.vertex_count() {
            return Err(Error::Domain("time field size mismatch".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonPoint {
    pub edge: DirEdge,
    pub time: f64,
}

impl PoissonPoint {
    /// Total order `(time, edge)`.
    pub fn cmp_order(&self, other: &PoissonPoint) -> std::cmp::Ordering {
        self.time.total_cmp(&other.time).then(self.edge.cmp(&other.edge))
    }
}

/// A finite Poisson edge set. Points are kept sorted by `(time, edge)`;
/// indices into [`points`](Self::points) are stable identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonEdgeSet {
    points: Vec<PoissonPoint>,
    counts: Current,
}

impl PoissonEdgeSet {
    pub fn empty(graph: &FiniteGraph) -> Self {
        PoissonEdgeSet {
            points: Vec::new(),
            counts: Current::zeros(graph),
        }
    }

    /// Validates and sorts `points`.
    pub fn new(graph: &FiniteGraph, budget: &LocalTimeField, mut points: Vec<PoissonPoint>) -> Result<Self> {
        budget.check(graph)?;
        let mut counts = Current::zeros(graph);
        for p in &points {
            graph.check_edge(p.edge)?;
            let limit = budget.get(graph.source(p.edge));
            if !(p.time >= 0.0 && p.time < limit) {
                return Err(Error::InvalidPoissonSet(format!(
                    "time {} on edge {} outside [0, {limit})",
                    p.time, p.edge.0
                )));
            }
            counts.increment(p.edge);
        }
        points.sort_by(PoissonPoint::cmp_order);
        for w in points.windows(2) {
            if w[0].edge == w[1].edge && w[0].time == w[1].time {
                return Err(Error::DuplicatePoint {
                    edge: w[0].edge.0,
                    time: w[0].time,
                });
            }
        }
        Ok(PoissonEdgeSet { points, counts })
    }

    pub fn points(&self) -> &[PoissonPoint] {
        &self.points
    }

    /// `n(Π)`.
    pub fn counts(&self) -> &Current {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of `point` in the sorted point list.
    pub fn index_of(&self, point: &PoissonPoint) -> Option<usize> {
        self.points.binary_search_by(|p| p.cmp_order(point)).ok()
    }

    /// Largest time in the set.
    pub fn max_time(&self) -> Option<f64> {
        self.points.last().map(|p| p.time)
    }

    /// Re-checks every invariant against the graph and budgets.
    pub fn validate(&self, graph: &FiniteGraph, budget: &LocalTimeField) -> Result<()> {
        let rebuilt = PoissonEdgeSet::new(graph, budget, self.points.clone())?;
        if rebuilt.counts != self.counts || rebuilt.points != self.points {
            return Err(Error::InvalidPoissonSet("stored counts out of sync".into()));
        }
        Ok(())
    }
}

fn poisson_count(rng: &mut ChainRng, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u32
}

/// Independent `Poisson(T_x)` counts on every directed edge `xy`.
pub fn sample_counts(graph: &FiniteGraph, budget: &LocalTimeField, rng: &mut ChainRng) -> Current {
    let counts = graph
        .directed_edges()
        .map(|d| poisson_count(rng, budget.get(graph.source(d))))
        .collect();
    Current::from_counts(counts)
}

/// Given counts, i.i.d. uniform times on `[0, T_source)`.
pub fn assign_times(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    counts: &Current,
    rng: &mut ChainRng,
) -> Result<PoissonEdgeSet> {
    budget.check(graph)?;
    if counts.len() != graph.directed_edge_count() {
        return Err(Error::Domain("current size mismatch".into()));
    }
    let mut points = Vec::with_capacity(counts.total() as usize);
    for d in graph.directed_edges() {
        let t = budget.get(graph.source(d));
        let k = counts.get(d);
        if k > 0 && t <= 0.0 {
            return Err(Error::InvalidPoissonSet(format!(
                "edge {} carries {k} points but has zero budget",
                d.0
            )));
        }
        for _ in 0..k {
            let u: f64 = rng.random();
            points.push(PoissonPoint { edge: d, time: u * t });
        }
    }
    loop {
        match PoissonEdgeSet::new(graph, budget, points.clone()) {
            Ok(set) => return Ok(set),
            // a repeated 53-bit draw: redraw that point
            Err(Error::DuplicatePoint { edge, time }) => {
                let i = points
                    .iter()
                    .position(|p| p.edge.0 == edge && p.time == time)
                    .expect("duplicate present");
                let u: f64 = rng.random();
                points[i].time = u * budget.get(graph.source(DirEdge(edge)));
            }
            Err(e) => return Err(e),
        }
    }
}

/// The normalised Poisson edge process with intensity `T_x` on each `xy`.
pub fn sample_unconditioned(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    rng: &mut ChainRng,
) -> Result<PoissonEdgeSet> {
    budget.check(graph)?;
    let counts = sample_counts(graph, budget, rng);
    assign_times(graph, budget, &counts, rng)
}

#[derive(Clone, Debug)]
pub struct RejectionSample {
    pub set: PoissonEdgeSet,
    pub attempts: u64,
}

/// Counts conditioned on `∂n = 0` by rejection; returns the counts and the
/// number of attempts used.
pub fn sample_sourceless_counts(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    rng: &mut ChainRng,
    max_attempts: u64,
) -> Result<(Current, u64)> {
    budget.check(graph)?;
    for attempt in 1..=max_attempts {
        let c = sample_counts(graph, budget, rng);
        if c.is_sourceless(graph) {
            return Ok((c, attempt));
        }
    }
    Err(Error::RejectionExhausted {
        attempts: max_attempts,
    })
}

/// An exact sample of the Poisson edge process conditioned on `∂n(Π) = 0`.
pub fn sample_sourceless_rejection(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    rng: &mut ChainRng,
    max_attempts: u64,
) -> Result<RejectionSample> {
    let (counts, attempts) = sample_sourceless_counts(graph, budget, rng, max_attempts)?;
    let set = assign_times(graph, budget, &counts, rng)?;
    Ok(RejectionSample { set, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::LatticeBox;
    use crate::rng::chain_rng;

    #[test]
    fn zero_budget_is_empty() {
        let g = FiniteGraph::complete(4);
        let t = LocalTimeField::constant(4, 0.0).unwrap();
        let mut rng = chain_rng(1, 0);
        assert!(sample_unconditioned(&g, &t, &mut rng).unwrap().is_empty());
        let r = sample_sourceless_rejection(&g, &t, &mut rng, 10).unwrap();
        assert_eq!(r.attempts, 1);
        assert!(r.set.is_empty());
    }

    #[test]
    fn norm_counts_degrees() {
        let l = LatticeBox::new(1);
        let t = LocalTimeField::constant(9, 0.5).unwrap();
        assert!((t.norm(l.graph()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn void_probability_single_edge() {
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::constant(2, 1.0).unwrap();
        let mut rng = chain_rng(11, 0);
        let n = 100_000;
        let empty = (0..n)
            .filter(|_| sample_counts(&g, &t, &mut rng).is_zero())
            .count() as f64
            / n as f64;
        let p = (-1.0f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((empty - p).abs() < 3.0 * se, "{empty} vs {p}");
    }

    #[test]
    fn invariants_rejected() {
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::constant(2, 1.0).unwrap();
        let pt = |e, time| PoissonPoint {
            edge: DirEdge(e),
            time,
        };
        assert!(PoissonEdgeSet::new(&g, &t, vec![pt(0, 0.5)]).is_err());
        assert!(PoissonEdgeSet::new(&g, &t, vec![pt(0, -0.1)]).is_err());
        assert!(PoissonEdgeSet::new(&g, &t, vec![pt(7, 0.1)]).is_err());
        assert!(matches!(
            PoissonEdgeSet::new(&g, &t, vec![pt(0, 0.1), pt(0, 0.1)]),
            Err(Error::DuplicatePoint { .. })
        ));
        // equal times on different edges are ordered by edge index
        let s = PoissonEdgeSet::new(&g, &t, vec![pt(1, 0.1), pt(0, 0.1)]).unwrap();
        assert_eq!(s.points()[0].edge, DirEdge(0));
        assert_eq!(s.counts().counts(), &[1, 1]);
    }

    #[test]
    fn assigned_times_stay_in_budget() {
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::new(vec![2.0, 0.1]).unwrap();
        let counts = Current::from_counts(vec![3, 2]);
        let mut rng = chain_rng(5, 0);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let s = assign_times(&g, &t, &counts, &mut rng).unwrap();
            s.validate(&g, &t).unwrap();
            let m = s
                .points()
                .iter()
                .filter(|p| p.edge == DirEdge(0))
                .map(|p| p.time)
                .fold(0.0, f64::max);
            sum += m;
            sum2 += m * m;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        // max of 3 uniforms on [0, 2] has mean 2 * 3/4
        assert!((mean - 1.5).abs() < 3.0 * se, "{mean}");
        let bad = Current::from_counts(vec![0, 1]);
        let t0 = LocalTimeField::new(vec![1.0, 0.0]).unwrap();
        assert!(assign_times(&g, &t0, &bad, &mut rng).is_err());
    }
}

//! Cycle decomposition of sourceless Poisson edge sets.
//!
//! A cycle is a set of points whose edges form a simple directed cycle; its
//! activation time at a visited vertex `x` is the time of its point leaving
//! `x`. Cycles sharing `x` are compared by activation time at `x`, and a
//! partition into cycles is proper when these comparisons generate a
//! partial order. The proper partition is unique and is obtained by peeling
//! the functional graph "highest outgoing point at each vertex".
//!
//! Point indices into [`PoissonEdgeSet::points`] serve as identifiers, and
//! since points are sorted by `(time, edge)`, index order is the tie-broken
//! time order used by every comparison here.

mod dump;
mod explore;
mod symmetry;

pub use dump::{CycleDump, PartitionDump};
pub use explore::{explore, ExplorationTrace, StopRule};
pub use symmetry::{flip_cycles, resample_orientations, time_invert, Relabelled};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graphs::{source_function, FiniteGraph};
use crate::sampler::PoissonEdgeSet;

/// Point-set bound for [`brute_force_proper_partitions`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Points of one cycle in traversal order, rotated to start at the smallest
/// index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cycle {
    points: Vec<usize>,
}

impl Cycle {
    /// Orders an unordered point set into a cycle, or explains why it is
    /// not a simple directed cycle.
    pub fn from_points(graph: &FiniteGraph, pi: &PoissonEdgeSet, set: &[usize]) -> Result<Cycle> {
        if set.is_empty() {
            return Err(Error::NotACycleCover("empty cycle".into()));
        }
        let pts = pi.points();
        let mut by_source = std::collections::HashMap::new();
        for &i in set {
            let p = pts
                .get(i)
                .ok_or_else(|| Error::NotACycleCover(format!("point {i} not in the set")))?;
            if by_source.insert(graph.source(p.edge), i).is_some() {
                return Err(Error::NotACycleCover(format!(
                    "two points leave vertex {}",
                    graph.source(p.edge)
                )));
            }
        }
        let start = *set.iter().min().unwrap();
        let mut order = vec![start];
        let mut v = graph.target(pts[start].edge);
        while v != graph.source(pts[start].edge) {
            let &i = by_source
                .get(&v)
                .ok_or_else(|| Error::NotACycleCover(format!("cycle broken at vertex {v}")))?;
            if order.len() >= set.len() {
                return Err(Error::NotACycleCover("points do not close up".into()));
            }
            order.push(i);
            v = graph.target(pts[i].edge);
        }
        if order.len() != set.len() {
            return Err(Error::NotACycleCover("points form more than one cycle".into()));
        }
        Ok(Cycle { points: order })
    }

    fn from_traversal(mut points: Vec<usize>) -> Cycle {
        let k = points
            .iter()
            .enumerate()
            .min_by_key(|(_, &p)| p)
            .map(|(i, _)| i)
            .unwrap();
        points.rotate_left(k);
        Cycle { points }
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Visited vertices in traversal order.
    pub fn vertices(&self, graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Vec<usize> {
        self.points
            .iter()
            .map(|&i| graph.source(pi.points()[i].edge))
            .collect()
    }

    /// `(x, a_x(η))` for every visited vertex.
    pub fn activation_times(&self, graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .map(|&i| {
                let p = pi.points()[i];
                (graph.source(p.edge), p.time)
            })
            .collect()
    }
}

/// A partition of a Poisson edge set into cycles, with the peeling layer of
/// each cycle when it came from [`decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct CyclePartition {
    cycles: Vec<Cycle>,
    layers: Vec<usize>,
}

impl CyclePartition {
    /// A candidate partition without layer information (layers are 0).
    pub fn from_cycles(cycles: Vec<Cycle>) -> Self {
        let layers = vec![0; cycles.len()];
        CyclePartition { cycles, layers }
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    /// Peeling depth of each cycle, starting at 1.
    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// The partition as sorted point sets, for comparing partitions.
    pub fn point_sets(&self) -> Vec<Vec<usize>> {
        self.mapped_point_sets(None)
    }

    /// [`point_sets`](Self::point_sets) after renaming points through `map`.
    pub fn mapped_point_sets(&self, map: Option<&[usize]>) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = self
            .cycles
            .iter()
            .map(|c| {
                let mut s: Vec<usize> = c.points.iter().map(|&i| map.map_or(i, |m| m[i])).collect();
                s.sort_unstable();
                s
            })
            .collect();
        sets.sort();
        sets
    }

    /// Index of the cycle containing each point.
    pub fn cycle_of_point(&self, n_points: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n_points];
        for (c, cy) in self.cycles.iter().enumerate() {
            for &p in &cy.points {
                owner[p] = c;
            }
        }
        owner
    }

    /// Direct comparisons `(lower, higher)`: consecutive cycles in
    /// activation order at each shared vertex. Their reflexive-transitive
    /// closure is the relation `⪯`.
    pub fn relation_pairs(&self, graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Vec<(usize, usize)> {
        let mut at_vertex: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph.vertex_count()];
        for (c, cy) in self.cycles.iter().enumerate() {
            for &p in &cy.points {
                at_vertex[graph.source(pi.points()[p].edge)].push((p, c));
            }
        }
        let mut pairs = Vec::new();
        for list in &mut at_vertex {
            list.sort_unstable();
            for w in list.windows(2) {
                pairs.push((w[0].1, w[1].1));
            }
        }
        pairs
    }

    /// Cycles `η'` with `η ⪯ η'`, including `η`, in increasing index order.
    pub fn up_set(&self, graph: &FiniteGraph, pi: &PoissonEdgeSet, cycle: usize) -> Vec<usize> {
        let mut succ = vec![Vec::new(); self.cycles.len()];
        for (a, b) in self.relation_pairs(graph, pi) {
            succ[a].push(b);
        }
        let mut seen = vec![false; self.cycles.len()];
        seen[cycle] = true;
        let mut queue = VecDeque::from([cycle]);
        while let Some(c) = queue.pop_front() {
            for &d in &succ[c] {
                if !std::mem::replace(&mut seen[d], true) {
                    queue.push_back(d);
                }
            }
        }
        (0..self.cycles.len()).filter(|&c| seen[c]).collect()
    }
}

fn require_sourceless(graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Result<()> {
    let div = source_function(graph, pi.counts());
    if let Some((vertex, &divergence)) = div.iter().enumerate().find(|(_, &d)| d != 0) {
        return Err(Error::NotSourceless { vertex, divergence });
    }
    Ok(())
}

/// The peeling decomposition: extract the cycles of the functional graph
/// "highest remaining outgoing point", remove them, repeat.
pub fn decompose(graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Result<CyclePartition> {
    if pi.counts().len() != graph.directed_edge_count() {
        return Err(Error::Domain("edge set does not belong to this graph".into()));
    }
    require_sourceless(graph, pi)?;
    let n = graph.vertex_count();
    let pts = pi.points();
    // outgoing points per vertex, ascending; the top is the last element
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in pts.iter().enumerate() {
        out[graph.source(p.edge)].push(i);
    }
    let next = |out: &Vec<Vec<usize>>, v: usize| graph.target(pts[*out[v].last().unwrap()].edge);

    let mut active: Vec<usize> = (0..n).filter(|&v| !out[v].is_empty()).collect();
    let mut walk_of = vec![0usize; n];
    let mut walk_id = 0usize;
    let mut cycles = Vec::new();
    let mut layers = Vec::new();
    let mut layer = 0;
    while !active.is_empty() {
        layer += 1;
        let layer_start = walk_id;
        let mut found: Vec<Vec<usize>> = Vec::new();
        for &s in &active {
            if walk_of[s] > layer_start {
                continue;
            }
            walk_id += 1;
            let mut path = Vec::new();
            let mut v = s;
            while walk_of[v] <= layer_start {
                walk_of[v] = walk_id;
                path.push(v);
                v = next(&out, v);
            }
            if walk_of[v] == walk_id {
                let k = path.iter().position(|&u| u == v).unwrap();
                found.push(path[k..].to_vec());
            }
        }
        for verts in found {
            let points: Vec<usize> = verts.iter().map(|&v| out[v].pop().unwrap()).collect();
            cycles.push(Cycle::from_traversal(points));
            layers.push(layer);
        }
        active.retain(|&v| !out[v].is_empty());
    }
    Ok(CyclePartition { cycles, layers })
}

/// Checks that `partition` covers `pi` disjointly by simple cycles.
pub fn check_cover(graph: &FiniteGraph, pi: &PoissonEdgeSet, partition: &CyclePartition) -> Result<()> {
    let mut used = vec![false; pi.len()];
    for c in &partition.cycles {
        let rebuilt = Cycle::from_points(graph, pi, &c.points)?;
        let mut a = rebuilt.points.clone();
        let mut b = c.points.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::NotACycleCover("cycle points repeated".into()));
        }
        for &p in &c.points {
            if std::mem::replace(&mut used[p], true) {
                return Err(Error::NotACycleCover(format!("point {p} used twice")));
            }
        }
    }
    if let Some(p) = used.iter().position(|&u| !u) {
        return Err(Error::NotACycleCover(format!("point {p} not covered")));
    }
    Ok(())
}

/// Whether the strict part of the relation induced by `partition` is
/// acyclic. Errors if `partition` is not a disjoint cycle cover.
pub fn is_proper_partition(
    graph: &FiniteGraph,
    pi: &PoissonEdgeSet,
    partition: &CyclePartition,
) -> Result<bool> {
    check_cover(graph, pi, partition)?;
    let m = partition.cycles.len();
    let mut indeg = vec![0usize; m];
    let mut succ = vec![Vec::new(); m];
    for (a, b) in partition.relation_pairs(graph, pi) {
        if a == b {
            // a simple cycle visits each vertex once
            continue;
        }
        succ[a].push(b);
        indeg[b] += 1;
    }
    let mut queue: VecDeque<usize> = (0..m).filter(|&c| indeg[c] == 0).collect();
    let mut seen = 0;
    while let Some(c) = queue.pop_front() {
        seen += 1;
        for &d in &succ[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                queue.push_back(d);
            }
        }
    }
    Ok(seen == m)
}

/// Every partition of `pi` into simple cycles (canonical enumeration by the
/// lowest remaining point).
pub fn all_cycle_covers(graph: &FiniteGraph, pi: &PoissonEdgeSet) -> Result<Vec<CyclePartition>> {
    if pi.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            size: pi.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let pts = pi.points();
    let src: Vec<usize> = pts.iter().map(|p| graph.source(p.edge)).collect();
    let dst: Vec<usize> = pts.iter().map(|p| graph.target(p.edge)).collect();

    fn extend(
        src: &[usize],
        dst: &[usize],
        remaining: &mut Vec<bool>,
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let start = src[path[0]];
        let v = dst[*path.last().unwrap()];
        for q in 0..src.len() {
            if !remaining[q] || src[q] != v {
                continue;
            }
            if dst[q] == start {
                let mut c = path.clone();
                c.push(q);
                out.push(c);
            } else if !on_path[dst[q]] {
                remaining[q] = false;
                on_path[dst[q]] = true;
                path.push(q);
                extend(src, dst, remaining, path, on_path, out);
                path.pop();
                on_path[dst[q]] = false;
                remaining[q] = true;
            }
        }
    }

    fn cover(
        src: &[usize],
        dst: &[usize],
        n_vertices: usize,
        remaining: &mut Vec<bool>,
        acc: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let Some(p) = remaining.iter().position(|&r| r) else {
            out.push(acc.clone());
            return;
        };
        remaining[p] = false;
        let mut on_path = vec![false; n_vertices];
        on_path[src[p]] = true;
        on_path[dst[p]] = true;
        let mut cycles = Vec::new();
        extend(src, dst, remaining, &mut vec![p], &mut on_path, &mut cycles);
        for c in cycles {
            for &q in &c[1..] {
                remaining[q] = false;
            }
            acc.push(c.clone());
            cover(src, dst, n_vertices, remaining, acc, out);
            acc.pop();
            for &q in &c[1..] {
                remaining[q] = true;
            }
        }
        remaining[p] = true;
    }

    let mut remaining = vec![true; pts.len()];
    let mut raw = Vec::new();
    cover(
        &src,
        &dst,
        graph.vertex_count(),
        &mut remaining,
        &mut Vec::new(),
        &mut raw,
    );
    Ok(raw
        .into_iter()
        .map(|cs| CyclePartition::from_cycles(cs.into_iter().map(Cycle::from_traversal).collect()))
        .collect())
}

/// The proper partitions among [`all_cycle_covers`].
pub fn brute_force_proper_partitions(
    graph: &FiniteGraph,
    pi: &PoissonEdgeSet,
) -> Result<Vec<CyclePartition>> {
    let mut proper = Vec::new();
    for p in all_cycle_covers(graph, pi)? {
        if is_proper_partition(graph, pi, &p)? {
            proper.push(p);
        }
    }
    Ok(proper)
}

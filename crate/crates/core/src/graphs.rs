//! Finite simple graphs, currents on their directed edges, and the
//! square-lattice boxes `[-n, n]^2` with their face geometry.
//!
//! Directed edges live in `2 * |E|` contiguous slots: undirected edge `e`
//! (stored as `(u, v)` with `u < v`) owns slot `2e` for `u -> v` and slot
//! `2e + 1` for `v -> u`, so reversal is `d ^ 1`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed edge slot. See the module docs for the layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirEdge(pub usize);

impl DirEdge {
    #[inline]
    pub fn reverse(self) -> DirEdge {
        DirEdge(self.0 ^ 1)
    }

    /// Index of the underlying undirected edge.
    #[inline]
    pub fn undirected(self) -> usize {
        self.0 >> 1
    }

    /// True for the `u -> v` orientation of an edge stored as `(u, v)`, `u < v`.
    #[inline]
    pub fn is_forward(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub fn forward(edge: usize) -> DirEdge {
        DirEdge(2 * edge)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, DirEdge)>>,
}

impl FiniteGraph {
    /// Builds a simple graph. Edge order is preserved; each pair is stored
    /// with its smaller endpoint first.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut stored = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n_vertices];
        for &(a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::UnknownVertex(a.max(b)));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if adjacency[u].iter().any(|&(w, _)| w == v) {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{u}, {v}}}")));
            }
            let e = stored.len();
            stored.push((u, v));
            adjacency[u].push((v, DirEdge(2 * e)));
            adjacency[v].push((u, DirEdge(2 * e + 1)));
        }
        Ok(FiniteGraph {
            n_vertices,
            edges: stored,
            adjacency,
        })
    }

    pub fn single_edge() -> Self {
        Self::new(2, &[(0, 1)]).expect("valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle graph needs at least 3 vertices");
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Self::new(n, &edges).expect("valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges).expect("valid")
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn directed_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = DirEdge> {
        (0..self.directed_edge_count()).map(DirEdge)
    }

    /// `(source, target)` of a directed edge.
    #[inline]
    pub fn endpoints(&self, d: DirEdge) -> (usize, usize) {
        let (u, v) = self.edges[d.undirected()];
        if d.is_forward() {
            (u, v)
        } else {
            (v, u)
        }
    }

    #[inline]
    pub fn source(&self, d: DirEdge) -> usize {
        self.endpoints(d).0
    }

    #[inline]
    pub fn target(&self, d: DirEdge) -> usize {
        self.endpoints(d).1
    }

    pub fn check_edge(&self, d: DirEdge) -> Result<()> {
        if d.0 < self.directed_edge_count() {
            Ok(())
        } else {
            Err(Error::UnknownEdge(d.0))
        }
    }

    /// Neighbours of `x` paired with the directed edge pointing out of `x`.
    #[inline]
    pub fn neighbors(&self, x: usize) -> &[(usize, DirEdge)] {
        &self.adjacency[x]
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn find_edge(&self, x: usize, y: usize) -> Option<DirEdge> {
        self.adjacency
            .get(x)?
            .iter()
            .find(|&&(w, _)| w == y)
            .map(|&(_, d)| d)
    }

    /// Connected component label per vertex, labels `0..k` in order of
    /// first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n_vertices];
        let mut next = 0;
        for s in 0..self.n_vertices {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adjacency[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Subgraph induced by `keep` (vertices renumbered in the given order).
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<FiniteGraph> {
        let mut new_index = vec![usize::MAX; self.n_vertices];
        for (i, &v) in keep.iter().enumerate() {
            if v >= self.n_vertices {
                return Err(Error::UnknownVertex(v));
            }
            new_index[v] = i;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(u, v)| new_index[u] != usize::MAX && new_index[v] != usize::MAX)
            .map(|&(u, v)| (new_index[u], new_index[v]))
            .collect();
        FiniteGraph::new(keep.len(), &edges)
    }
}

/// Nonnegative integer flow on the directed edges of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Current {
    counts: Vec<u32>,
}

impl Current {
    pub fn zeros(graph: &FiniteGraph) -> Self {
        Current {
            counts: vec![0; graph.directed_edge_count()],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Current { counts }
    }

    #[inline]
    pub fn get(&self, d: DirEdge) -> u32 {
        self.counts[d.0]
    }

    #[inline]
    pub fn set(&mut self, d: DirEdge, k: u32) {
        self.counts[d.0] = k;
    }

    #[inline]
    pub fn increment(&mut self, d: DirEdge) {
        self.counts[d.0] += 1;
    }

    #[inline]
    pub fn decrement(&mut self, d: DirEdge) {
        self.counts[d.0] -= 1;
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&k| k as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&k| k == 0)
    }

    /// `n_{uv} - n_{vu}` for undirected edge `e = (u, v)`.
    #[inline]
    pub fn net_flow(&self, edge: usize) -> i64 {
        self.counts[2 * edge] as i64 - self.counts[2 * edge + 1] as i64
    }

    pub fn is_sourceless(&self, graph: &FiniteGraph) -> bool {
        source_function(graph, self).iter().all(|&s| s == 0)
    }

    /// Sparse `(edge, count)` list of the nonzero entries.
    pub fn to_sparse(&self) -> Vec<(usize, u32)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(d, &k)| (d, k))
            .collect()
    }
}

/// `x -> sum_{y ~ x} (n_xy - n_yx)`.
pub fn source_function(graph: &FiniteGraph, current: &Current) -> Vec<i64> {
    assert_eq!(current.len(), graph.directed_edge_count());
    let mut div = vec![0i64; graph.vertex_count()];
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let f = current.net_flow(e);
        div[u] += f;
        div[v] -= f;
    }
    div
}

/// JSON dump used by golden-file tests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub vertices: Vec<[i64; 2]>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphDump {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn to_graph(&self) -> Result<FiniteGraph> {
        let edges: Vec<_> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        FiniteGraph::new(self.vertices.len(), &edges)
    }
}

/// One step of the dual spanning tree used to integrate heights.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DualTreeStep {
    pub face: usize,
    pub parent: usize,
    pub edge: usize,
    /// `+1` when `face` lies on the right of the forward orientation of `edge`.
    pub sign: i64,
}

/// The box `Λ_n = [-n, n]^2 ∩ Z^2` with its planar faces.
///
/// Interior faces are indexed by their lower-left corner `(a, b)` with
/// `a, b ∈ [-n, n)`; every other face is merged into the outer face, whose
/// index is `interior_face_count()`.
#[derive(Clone, Debug)]
pub struct LatticeBox {
    n: usize,
    graph: FiniteGraph,
    coords: Vec<(i64, i64)>,
    /// `(right face, left face)` of the forward orientation of each edge.
    edge_faces: Vec<(usize, usize)>,
    face_neighbors: Vec<[usize; 4]>,
    plaquettes: Vec<[DirEdge; 4]>,
    dual_tree: Vec<DualTreeStep>,
    dual_non_tree: Vec<usize>,
}

impl LatticeBox {
    pub fn new(n: usize) -> Self {
        let side = 2 * n + 1;
        let ni = n as i64;
        let mut coords = Vec::with_capacity(side * side);
        for y in -ni..=ni {
            for x in -ni..=ni {
                coords.push((x, y));
            }
        }
        let vindex = |x: i64, y: i64| ((y + ni) as usize) * side + (x + ni) as usize;
        let mut edges = Vec::with_capacity(4 * n * side);
        for y in -ni..=ni {
            for x in -ni..=ni {
                if x < ni {
                    edges.push((vindex(x, y), vindex(x + 1, y)));
                }
                if y < ni {
                    edges.push((vindex(x, y), vindex(x, y + 1)));
                }
            }
        }
        let graph = FiniteGraph::new(side * side, &edges).expect("lattice is simple");

        let mut lattice = LatticeBox {
            n,
            graph,
            coords,
            edge_faces: Vec::new(),
            face_neighbors: Vec::new(),
            plaquettes: Vec::new(),
            dual_tree: Vec::new(),
            dual_non_tree: Vec::new(),
        };

        lattice.edge_faces = (0..lattice.graph.edge_count())
            .map(|e| {
                let (u, v) = lattice.graph.edges()[e];
                let (x, y) = lattice.coords[u];
                let (x2, _) = lattice.coords[v];
                if x2 == x + 1 {
                    (lattice.face_index(x, y - 1), lattice.face_index(x, y))
                } else {
                    (lattice.face_index(x, y), lattice.face_index(x - 1, y))
                }
            })
            .collect();

        let nf = lattice.interior_face_count();
        let mut neighbors = vec![Vec::with_capacity(4); nf];
        for &(r, l) in &lattice.edge_faces {
            if r < nf {
                neighbors[r].push(l);
            }
            if l < nf {
                neighbors[l].push(r);
            }
        }
        lattice.face_neighbors = neighbors
            .into_iter()
            .map(|v| <[usize; 4]>::try_from(v).expect("each face has four sides"))
            .collect();

        lattice.plaquettes = (0..nf)
            .map(|f| {
                let (a, b) = lattice.face_corner(f).expect("interior");
                let up = lattice.directed(vindex(a, b), vindex(a, b + 1));
                let right = lattice.directed(vindex(a, b + 1), vindex(a + 1, b + 1));
                let down = lattice.directed(vindex(a + 1, b + 1), vindex(a + 1, b));
                let left = lattice.directed(vindex(a + 1, b), vindex(a, b));
                [up, right, down, left]
            })
            .collect();

        lattice.build_dual_tree();
        lattice
    }

    fn directed(&self, x: usize, y: usize) -> DirEdge {
        self.graph.find_edge(x, y).expect("adjacent lattice vertices")
    }

    fn build_dual_tree(&mut self) {
        let nf = self.interior_face_count();
        let outer = nf;
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nf + 1];
        for (e, &(r, l)) in self.edge_faces.iter().enumerate() {
            incident[r].push(e);
            incident[l].push(e);
        }
        let mut seen = vec![false; nf + 1];
        let mut used = vec![false; self.edge_faces.len()];
        seen[outer] = true;
        let mut queue = VecDeque::from([outer]);
        while let Some(f) = queue.pop_front() {
            for &e in &incident[f] {
                let (r, l) = self.edge_faces[e];
                let (other, sign) = if r == f { (l, -1) } else { (r, 1) };
                if !seen[other] {
                    seen[other] = true;
                    used[e] = true;
                    self.dual_tree.push(DualTreeStep {
                        face: other,
                        parent: f,
                        edge: e,
                        sign,
                    });
                    queue.push_back(other);
                }
            }
        }
        self.dual_non_tree = (0..self.edge_faces.len()).filter(|&e| !used[e]).collect();
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn vertex_coords(&self, v: usize) -> (i64, i64) {
        self.coords[v]
    }

    pub fn vertex_index(&self, x: i64, y: i64) -> Option<usize> {
        let ni = self.n as i64;
        if x.abs() > ni || y.abs() > ni {
            return None;
        }
        Some(((y + ni) as usize) * (2 * self.n + 1) + (x + ni) as usize)
    }

    #[inline]
    pub fn interior_face_count(&self) -> usize {
        4 * self.n * self.n
    }

    /// Interior faces plus the outer face.
    #[inline]
    pub fn face_count(&self) -> usize {
        self.interior_face_count() + 1
    }

    #[inline]
    pub fn outer_face(&self) -> usize {
        self.interior_face_count()
    }

    /// Face with lower-left corner `(a, b)`; the outer face when outside
    /// `[-n, n)^2`.
    pub fn face_index(&self, a: i64, b: i64) -> usize {
        let ni = self.n as i64;
        if a < -ni || a >= ni || b < -ni || b >= ni {
            return self.outer_face();
        }
        ((b + ni) as usize) * (2 * self.n) + (a + ni) as usize
    }

    pub fn face_corner(&self, f: usize) -> Option<(i64, i64)> {
        if f >= self.interior_face_count() {
            return None;
        }
        let w = 2 * self.n;
        let ni = self.n as i64;
        Some(((f % w) as i64 - ni, (f / w) as i64 - ni))
    }

    /// `(right face, left face)` when walking along `d`.
    pub fn faces_of_edge(&self, d: DirEdge) -> Result<(usize, usize)> {
        self.graph.check_edge(d)?;
        let (r, l) = self.edge_faces[d.undirected()];
        Ok(if d.is_forward() { (r, l) } else { (l, r) })
    }

    /// `(right, left)` faces of the forward orientation of undirected edge `e`.
    #[inline]
    pub fn edge_faces(&self, e: usize) -> (usize, usize) {
        self.edge_faces[e]
    }

    /// The four dual neighbours of an interior face (outer face repeated
    /// once per shared boundary edge).
    #[inline]
    pub fn face_neighbors(&self, f: usize) -> &[usize; 4] {
        &self.face_neighbors[f]
    }

    /// Clockwise directed boundary of interior face `f`, starting with the
    /// upward edge on its left side.
    #[inline]
    pub fn plaquette(&self, f: usize) -> &[DirEdge; 4] {
        &self.plaquettes[f]
    }

    pub fn plaquettes(&self) -> &[[DirEdge; 4]] {
        &self.plaquettes
    }

    pub(crate) fn dual_tree(&self) -> &[DualTreeStep] {
        &self.dual_tree
    }

    pub(crate) fn dual_non_tree(&self) -> &[usize] {
        &self.dual_non_tree
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            n: self.n,
            vertices: self.coords.iter().map(|&(x, y)| [x, y]).collect(),
            edges: self.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    /// Rebuilds a box from a dump, rejecting dumps that disagree with the
    /// canonical construction.
    pub fn from_dump(dump: &GraphDump) -> Result<Self> {
        if dump.n > 512 {
            return Err(Error::InvalidGraph(format!("box radius {} too large", dump.n)));
        }
        let lattice = LatticeBox::new(dump.n);
        if lattice.dump() != *dump {
            return Err(Error::InvalidGraph(
                "dump does not match the canonical box".into(),
            ));
        }
        Ok(lattice)
    }
}

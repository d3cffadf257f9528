//! Given `H = |h|`, the signs of `h` form a ferromagnetic Ising model on the
//! faces with `H > 0`, with couplings `K = (Φ_β(H_x + H_y) - Φ_β(H_x - H_y))/2`
//! on interior dual edges. The Edwards-Sokal bonds `α` open each
//! equal-sign edge with probability `1 - e^{-2K}`.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PhiTable, SignField};
use crate::error::{Error, Result};
use crate::graphs::LatticeBox;
use crate::rng::ChainRng;

/// Couplings on the dual edges joining two interior faces.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingCoupling {
    pairs: Vec<(usize, usize)>,
    k: Vec<f64>,
}

impl IsingCoupling {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }
}

/// Couplings from `|h|` (indexed by face, outer face last).
pub fn ising_couplings(lattice: &LatticeBox, abs_h: &[i64], phi: &mut PhiTable) -> Result<IsingCoupling> {
    if abs_h.len() != lattice.face_count() {
        return Err(Error::Domain("one value per face required".into()));
    }
    if abs_h.iter().any(|&a| a < 0) || abs_h[lattice.outer_face()] != 0 {
        return Err(Error::Domain("|h| must be nonnegative and vanish outside".into()));
    }
    let outer = lattice.outer_face();
    let mut pairs = Vec::new();
    let mut k = Vec::new();
    for e in 0..lattice.graph().edge_count() {
        let (r, l) = lattice.edge_faces(e);
        if r == outer || l == outer {
            continue;
        }
        let (a, b) = (abs_h[r], abs_h[l]);
        pairs.push((r.min(l), r.max(l)));
        k.push(0.5 * (phi.get(a + b) - phi.get(a - b)));
    }
    Ok(IsingCoupling { pairs, k })
}

/// Open dual edges, with the face components they generate.
#[derive(Clone, Debug)]
pub struct FkEdgeSet {
    open: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    components: UnionFind<usize>,
}

impl FkEdgeSet {
    /// No open edges.
    pub fn empty(lattice: &LatticeBox, coupling: &IsingCoupling) -> Self {
        FkEdgeSet {
            open: vec![false; coupling.pairs.len()],
            pairs: coupling.pairs.clone(),
            components: UnionFind::new(lattice.face_count()),
        }
    }

    /// Opens the `i`-th coupling edge.
    pub fn open_edge(&mut self, i: usize) {
        self.open[i] = true;
        let (a, b) = self.pairs[i];
        self.components.union(a, b);
    }

    pub fn open_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs
            .iter()
            .zip(&self.open)
            .filter(|(_, &o)| o)
            .map(|(&p, _)| p)
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// JSON-ready adjacency lists and components of interior faces.
    pub fn components(&self, lattice: &LatticeBox) -> FkComponents {
        let nf = lattice.interior_face_count();
        let mut adjacency = vec![Vec::new(); nf];
        for (a, b) in self.open_pairs() {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let labels = self.components.clone().into_labeling();
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for f in 0..nf {
            by_root.entry(labels[f]).or_default().push(f);
        }
        let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
        components.sort();
        FkComponents {
            adjacency,
            components,
        }
    }
}

/// `{"adjacency": [[face, ...], ...], "components": [[face, ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkComponents {
    pub adjacency: Vec<Vec<usize>>,
    pub components: Vec<Vec<usize>>,
}

/// Opens each coupling edge between equal nonzero signs with probability
/// `1 - e^{-2K}`.
pub fn fk_edges(
    lattice: &LatticeBox,
    signs: &SignField,
    coupling: &IsingCoupling,
    rng: &mut ChainRng,
) -> FkEdgeSet {
    let mut set = FkEdgeSet::empty(lattice, coupling);
    for (i, (&(a, b), &k)) in coupling.pairs.iter().zip(&coupling.k).enumerate() {
        let (sa, sb) = (signs.get(a), signs.get(b));
        if sa != 0 && sa == sb && k > 0.0 && rng.random::<f64>() < -(-2.0 * k).exp_m1() {
            set.open_edge(i);
        }
    }
    set
}

/// Whether faces `a` and `b` lie in the same `α`-component.
pub fn connectivity(alpha: &FkEdgeSet, a: usize, b: usize) -> bool {
    alpha.components.equiv(a, b)
}

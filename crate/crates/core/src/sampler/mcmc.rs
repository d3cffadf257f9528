//! Metropolis chain on sourceless currents with weight
//! `prod_{xy} T_x^{n_xy} / n_xy!`.
//!
//! Two symmetric move families: a pair move adds or removes one step in
//! both directions of an edge, and a cycle move adds or removes one unit
//! around an oriented cycle. On a box the cycles are the plaquettes; on
//! other graphs they are the fundamental cycles of a BFS spanning forest.
//! Both families span the integer cycle space, so the chain is irreducible
//! on the sourceless sector.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poisson::LocalTimeField;
use crate::error::{Error, Result};
use crate::graphs::{Current, DirEdge, FiniteGraph, LatticeBox};
use crate::rng::{chain_rng, ChainRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub sweeps: u64,
    /// Moves per sweep; `None` means one per undirected edge.
    pub moves_per_sweep: Option<usize>,
    /// Probability of a pair move; cycle moves get the rest.
    pub pair_probability: f64,
    pub thin: u64,
    pub burnin: u64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            sweeps: 10_000,
            moves_per_sweep: None,
            pair_probability: 0.5,
            thin: 1,
            burnin: 1_000,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pair_probability) {
            return Err(Error::Domain("pair_probability must lie in [0, 1]".into()));
        }
        if self.thin == 0 {
            return Err(Error::Domain("thin must be positive".into()));
        }
        if self.burnin >= self.sweeps {
            return Err(Error::Domain(format!(
                "burn-in {} must be below the sweep count {}",
                self.burnin, self.sweeps
            )));
        }
        Ok(())
    }

    pub fn moves_for(&self, graph: &FiniteGraph) -> usize {
        self.moves_per_sweep.unwrap_or(graph.edge_count()).max(1)
    }
}

/// Oriented cycles used by cycle moves.
#[derive(Clone, Debug, Default)]
pub struct MoveSet {
    cycles: Vec<Vec<DirEdge>>,
}

impl MoveSet {
    /// The clockwise plaquettes of a box.
    pub fn plaquettes(lattice: &LatticeBox) -> Self {
        MoveSet {
            cycles: lattice.plaquettes().iter().map(|p| p.to_vec()).collect(),
        }
    }

    /// Fundamental cycles of a BFS spanning forest.
    pub fn fundamental_cycles(graph: &FiniteGraph) -> Self {
        let n = graph.vertex_count();
        let mut parent: Vec<Option<(usize, DirEdge)>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut tree = vec![false; graph.edge_count()];
        for s in 0..n {
            if depth[s] != usize::MAX {
                continue;
            }
            depth[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &(y, d) in graph.neighbors(x) {
                    if depth[y] == usize::MAX {
                        depth[y] = depth[x] + 1;
                        // edge from parent to child
                        parent[y] = Some((x, d));
                        tree[d.undirected()] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        let mut cycles = Vec::new();
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            if tree[e] {
                continue;
            }
            // u -> v, then tree path v -> lca -> u
            let mut up = Vec::new();
            let mut down = Vec::new();
            let (mut a, mut b) = (v, u);
            while a != b {
                if depth[a] >= depth[b] {
                    let (p, d) = parent[a].expect("non-root");
                    up.push(d.reverse());
                    a = p;
                } else {
                    let (p, d) = parent[b].expect("non-root");
                    down.push(d);
                    b = p;
                }
            }
            let mut cycle = vec![DirEdge::forward(e)];
            cycle.extend(up);
            cycle.extend(down.into_iter().rev());
            cycles.push(cycle);
        }
        MoveSet { cycles }
    }

    pub fn for_graph(graph: &FiniteGraph, lattice: Option<&LatticeBox>) -> Self {
        match lattice {
            Some(l) => MoveSet::plaquettes(l),
            None => MoveSet::fundamental_cycles(graph),
        }
    }

    pub fn cycles(&self) -> &[Vec<DirEdge>] {
        &self.cycles
    }
}

/// Adds or removes one unit on every listed directed edge (reversed when
/// `reversed`) if the Metropolis test passes. Edges must be distinct.
fn try_shift(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    state: &mut Current,
    edges: &[DirEdge],
    reversed: bool,
    add: bool,
    rng: &mut ChainRng,
) -> bool {
    let orient = |d: &DirEdge| if reversed { d.reverse() } else { *d };
    let mut ratio = 1.0;
    for d in edges.iter().map(orient) {
        let k = state.get(d);
        let t = budget.get(graph.source(d));
        if add {
            ratio *= t / (k + 1) as f64;
        } else {
            if k == 0 {
                return false;
            }
            ratio *= k as f64 / t;
        }
    }
    if ratio >= 1.0 || rng.random::<f64>() < ratio {
        for d in edges.iter().map(orient) {
            if add {
                state.increment(d);
            } else {
                state.decrement(d);
            }
        }
        true
    } else {
        false
    }
}

/// One sweep of pair and cycle moves; returns the number accepted.
pub fn mcmc_sweep(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    state: &mut Current,
    moves: &MoveSet,
    cfg: &McmcConfig,
    rng: &mut ChainRng,
) -> usize {
    let m = graph.edge_count();
    if m == 0 {
        return 0;
    }
    let mut accepted = 0;
    for _ in 0..cfg.moves_for(graph) {
        let add = rng.random_bool(0.5);
        let pair = moves.cycles.is_empty() || rng.random::<f64>() < cfg.pair_probability;
        let ok = if pair {
            let e = rng.random_range(0..m);
            let d = DirEdge::forward(e);
            try_shift(graph, budget, state, &[d, d.reverse()], false, add, rng)
        } else {
            let c = &moves.cycles[rng.random_range(0..moves.cycles.len())];
            let reversed = rng.random_bool(0.5);
            try_shift(graph, budget, state, c, reversed, add, rng)
        };
        accepted += ok as usize;
    }
    accepted
}

/// Runs a chain from `initial` (or the empty current), calling `observe`
/// on every retained sample after burn-in and thinning. Returns the final
/// state.
pub fn run_chain<F: FnMut(&Current)>(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    moves: &MoveSet,
    cfg: &McmcConfig,
    stream: u64,
    initial: Option<Current>,
    mut observe: F,
) -> Result<Current> {
    cfg.validate()?;
    let mut state = initial.unwrap_or_else(|| Current::zeros(graph));
    if state.len() != graph.directed_edge_count() {
        return Err(Error::Domain("initial current size mismatch".into()));
    }
    if !state.is_sourceless(graph) {
        let div = crate::graphs::source_function(graph, &state);
        let (vertex, &divergence) = div.iter().enumerate().find(|(_, &d)| d != 0).unwrap();
        return Err(Error::NotSourceless { vertex, divergence });
    }
    let mut rng = chain_rng(cfg.seed, stream);
    for sweep in 0..cfg.sweeps {
        mcmc_sweep(graph, budget, &mut state, moves, cfg, &mut rng);
        if sweep >= cfg.burnin && (sweep - cfg.burnin).is_multiple_of(cfg.thin) {
            observe(&state);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{pair_weight, partition_function, TruncationPolicy};

    #[test]
    fn removing_from_zero_rejected() {
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::constant(2, 1.0).unwrap();
        let mut s = Current::zeros(&g);
        let mut rng = chain_rng(0, 0);
        for _ in 0..100 {
            assert!(!try_shift(
                &g,
                &t,
                &mut s,
                &[DirEdge(0), DirEdge(1)],
                false,
                false,
                &mut rng
            ));
        }
    }

    #[test]
    fn fundamental_cycles_are_closed() {
        let g = FiniteGraph::complete(5);
        let ms = MoveSet::fundamental_cycles(&g);
        assert_eq!(ms.cycles().len(), 10 - 4);
        for c in ms.cycles() {
            let mut n = Current::zeros(&g);
            for &d in c {
                n.increment(d);
            }
            assert!(n.is_sourceless(&g));
            for w in c.windows(2) {
                assert_eq!(g.target(w[0]), g.source(w[1]));
            }
        }
    }

    #[test]
    fn plaquettes_are_closed() {
        let l = LatticeBox::new(2);
        for c in MoveSet::plaquettes(&l).cycles() {
            let mut n = Current::zeros(l.graph());
            for &d in c {
                n.increment(d);
            }
            assert!(n.is_sourceless(l.graph()));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = McmcConfig::default();
        assert!(c.validate().is_ok());
        c.burnin = c.sweeps;
        assert!(c.validate().is_err());
        let c = McmcConfig {
            pair_probability: 1.5,
            ..McmcConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn stays_sourceless_on_cycle_graph() {
        let g = FiniteGraph::cycle(4);
        let t = LocalTimeField::constant(4, 1.0).unwrap();
        let cfg = McmcConfig {
            sweeps: 2000,
            burnin: 0,
            ..McmcConfig::default()
        };
        let mut seen_circulation = false;
        run_chain(&g, &t, &MoveSet::fundamental_cycles(&g), &cfg, 0, None, |c| {
            assert!(c.is_sourceless(&g));
            seen_circulation |= (0..4).any(|e| c.net_flow(e) != 0);
        })
        .unwrap();
        assert!(seen_circulation);
    }

    #[test]
    fn single_edge_stationary_law() {
        // P[k] ∝ (T²)^k / (k!)², T = 1/2
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::constant(2, 1.0).unwrap();
        let z = partition_function(&g, &[1.0, 1.0], &TruncationPolicy::default()).value;
        assert!((z - pair_weight(0.5, 0.5, 0)).abs() < 1e-14);
        let cfg = McmcConfig {
            sweeps: 501_000,
            burnin: 1000,
            thin: 5,
            moves_per_sweep: Some(4),
            ..McmcConfig::default()
        };
        let mut hist = [0u64; 4];
        run_chain(&g, &t, &MoveSet::default(), &cfg, 3, None, |c| {
            hist[(c.get(DirEdge(0)) as usize).min(3)] += 1;
        })
        .unwrap();
        let n: u64 = hist.iter().sum();
        let fact = |k: u32| (1..=k).map(|j| j as f64).product::<f64>();
        let mut stat = 0.0;
        let mut tail = 1.0;
        for k in 0..3 {
            let p = 0.25f64.powi(k as i32) / fact(k).powi(2) / z;
            tail -= p;
            let e = p * n as f64;
            stat += (hist[k as usize] as f64 - e).powi(2) / e;
        }
        let e = tail * n as f64;
        stat += (hist[3] as f64 - e).powi(2) / e;
        // χ²_3 at 0.999 is 16.27
        assert!(stat < 16.27, "χ² = {stat}, {hist:?}");
    }
}

//! Worm chain with a pinned tail.
//!
//! The state is a current with `∂n = 1_head - 1_tail`; the head moves by
//! appending a step `j -> head` or erasing a step `head -> j`. With the tail
//! fixed at `x`, the chain is reversible for the weight
//! `prod T_x^{n_xy}/n_xy!` on the union over `a` of the sectors
//! `∂n = 1_a - 1_x`, so the head occupation ratio at `y` versus `x` is
//! `M[∂n = 1_y - 1_x] / M[∂n = 0]`.

use rand::Rng;

use super::mcmc::McmcConfig;
use super::poisson::LocalTimeField;
use crate::error::{Error, Result};
use crate::graphs::{source_function, Current, FiniteGraph};
use crate::rng::{chain_rng, ChainRng};

#[derive(Clone, Debug, PartialEq)]
pub struct WormState {
    counts: Current,
    tail: usize,
    head: usize,
}

impl WormState {
    /// Empty current with head and tail at `tail`.
    pub fn new(graph: &FiniteGraph, tail: usize) -> Result<Self> {
        if tail >= graph.vertex_count() {
            return Err(Error::UnknownVertex(tail));
        }
        Ok(WormState {
            counts: Current::zeros(graph),
            tail,
            head: tail,
        })
    }

    pub fn from_parts(graph: &FiniteGraph, counts: Current, tail: usize, head: usize) -> Result<Self> {
        let n = graph.vertex_count();
        if tail >= n || head >= n {
            return Err(Error::UnknownVertex(tail.max(head)));
        }
        if counts.len() != graph.directed_edge_count() {
            return Err(Error::Domain("current size mismatch".into()));
        }
        let div = source_function(graph, &counts);
        for (v, &d) in div.iter().enumerate() {
            let want = (v == head) as i64 - (v == tail) as i64;
            if d != want {
                return Err(Error::NotSourceless {
                    vertex: v,
                    divergence: d - want,
                });
            }
        }
        Ok(WormState { counts, tail, head })
    }

    pub fn counts(&self) -> &Current {
        &self.counts
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    /// True when head and tail coincide, i.e. `∂n = 0`.
    pub fn is_sourceless(&self) -> bool {
        self.head == self.tail
    }
}

fn head_move(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    state: &mut WormState,
    rng: &mut ChainRng,
) -> bool {
    let a = state.head;
    let nbrs = graph.neighbors(a);
    if nbrs.is_empty() {
        return false;
    }
    let (j, out) = nbrs[rng.random_range(0..nbrs.len())];
    let proposal = graph.degree(a) as f64 / graph.degree(j) as f64;
    if rng.random_bool(0.5) {
        // append j -> a
        let into = out.reverse();
        let ratio = budget.get(j) / (state.counts.get(into) + 1) as f64 * proposal;
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            state.counts.increment(into);
            state.head = j;
            return true;
        }
    } else {
        // erase a -> j
        let k = state.counts.get(out);
        if k == 0 {
            return false;
        }
        let ratio = k as f64 / budget.get(a) * proposal;
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            state.counts.decrement(out);
            state.head = j;
            return true;
        }
    }
    false
}

/// `moves` head moves; after each one the head position is tallied into
/// `visits`. Returns the number accepted.
pub fn worm_sweep(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    state: &mut WormState,
    moves: usize,
    visits: &mut [u64],
    rng: &mut ChainRng,
) -> usize {
    let mut accepted = 0;
    for _ in 0..moves {
        accepted += head_move(graph, budget, state, rng) as usize;
        visits[state.head] += 1;
    }
    accepted
}

/// Head occupation counts of a worm chain with tail at `tail`, collected
/// in batches of `batch_sweeps` sweeps after burn-in.
pub fn worm_visit_batches(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    tail: usize,
    cfg: &McmcConfig,
    stream: u64,
    batch_sweeps: u64,
) -> Result<Vec<Vec<u64>>> {
    cfg.validate()?;
    if batch_sweeps == 0 {
        return Err(Error::Domain("batch size must be positive".into()));
    }
    let mut state = WormState::new(graph, tail)?;
    let mut rng = chain_rng(cfg.seed, stream);
    let moves = cfg.moves_for(graph);
    let n = graph.vertex_count();
    let mut scratch = vec![0u64; n];
    for _ in 0..cfg.burnin {
        worm_sweep(graph, budget, &mut state, moves, &mut scratch, &mut rng);
    }
    let mut batches = Vec::new();
    let mut current = vec![0u64; n];
    let mut in_batch = 0;
    for _ in cfg.burnin..cfg.sweeps {
        worm_sweep(graph, budget, &mut state, moves, &mut current, &mut rng);
        in_batch += 1;
        if in_batch == batch_sweeps {
            batches.push(std::mem::replace(&mut current, vec![0u64; n]));
            in_batch = 0;
        }
    }
    Ok(batches)
}

/// Sourceless currents from a worm whose tail is moved to a uniform vertex
/// whenever the head returns to it. At every retained sweep end (after
/// burn-in, every `thin` sweeps) at which the worm is closed, `observe`
/// receives the current and the sweep index. Returns the number of
/// observations.
pub fn run_sourceless_worm<F: FnMut(&Current, u64)>(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    cfg: &McmcConfig,
    stream: u64,
    mut observe: F,
) -> Result<u64> {
    cfg.validate()?;
    let n = graph.vertex_count();
    let mut state = WormState::new(graph, 0)?;
    let mut rng = chain_rng(cfg.seed, stream);
    let moves = cfg.moves_for(graph);
    let mut seen = 0;
    for sweep in 0..cfg.sweeps {
        for _ in 0..moves {
            head_move(graph, budget, &mut state, &mut rng);
            if state.head == state.tail {
                let v = rng.random_range(0..n);
                state.head = v;
                state.tail = v;
            }
        }
        if sweep >= cfg.burnin && (sweep - cfg.burnin).is_multiple_of(cfg.thin) && state.head == state.tail {
            observe(&state.counts, sweep);
            seen += 1;
        }
    }
    Ok(seen)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WormEstimate {
    /// `M[∂n = 1_y - 1_x] / M[∂n = 0]`.
    pub sector_ratio: f64,
    /// `(r_x / r_y) * sector_ratio`.
    pub two_point: f64,
    pub visits_x: u64,
    pub visits_y: u64,
}

/// Two-point function from head occupation; `x == y` is 1 by definition.
pub fn worm_two_point(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    x: usize,
    y: usize,
    cfg: &McmcConfig,
    stream: u64,
) -> Result<WormEstimate> {
    if x >= graph.vertex_count() || y >= graph.vertex_count() {
        return Err(Error::UnknownVertex(x.max(y)));
    }
    if x == y {
        return Ok(WormEstimate {
            sector_ratio: 1.0,
            two_point: 1.0,
            visits_x: 0,
            visits_y: 0,
        });
    }
    let batches = worm_visit_batches(graph, budget, x, cfg, stream, cfg.sweeps)?;
    let mut visits = vec![0u64; graph.vertex_count()];
    for b in &batches {
        for (v, c) in visits.iter_mut().zip(b) {
            *v += c;
        }
    }
    let ratio = visits[y] as f64 / visits[x].max(1) as f64;
    let scale = (budget.get(x) / budget.get(y)).sqrt();
    Ok(WormEstimate {
        sector_ratio: ratio,
        two_point: scale * ratio,
        visits_x: visits[x],
        visits_y: visits[y],
    })
}

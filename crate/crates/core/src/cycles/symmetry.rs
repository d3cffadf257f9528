//! Time inversion, direction inversion of chosen cycles, and orientation
//! resampling.

use rand::Rng;

use super::{decompose, CyclePartition};
use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;
use crate::rng::ChainRng;
use crate::sampler::{LocalTimeField, PoissonEdgeSet, PoissonPoint};

/// A transformed edge set with `index_map[old] = new` point indices.
#[derive(Clone, Debug)]
pub struct Relabelled {
    pub set: PoissonEdgeSet,
    pub index_map: Vec<usize>,
}

fn relabel(graph: &FiniteGraph, budget: &LocalTimeField, images: Vec<PoissonPoint>) -> Result<Relabelled> {
    let set = PoissonEdgeSet::new(graph, budget, images.clone())?;
    let index_map = images
        .iter()
        .map(|p| set.index_of(p).expect("image present"))
        .collect();
    Ok(Relabelled { set, index_map })
}

/// `(xy, τ) -> (xy, T_x - τ)`.
pub fn time_invert(graph: &FiniteGraph, budget: &LocalTimeField, pi: &PoissonEdgeSet) -> Result<Relabelled> {
    let images = pi
        .points()
        .iter()
        .map(|p| PoissonPoint {
            edge: p.edge,
            time: budget.get(graph.source(p.edge)) - p.time,
        })
        .collect();
    relabel(graph, budget, images).map_err(|e| match e {
        Error::InvalidPoissonSet(msg) => {
            Error::InvalidPoissonSet(format!("time inversion hit the budget boundary: {msg}"))
        }
        other => other,
    })
}

/// Replaces each chosen cycle `η` by `η^{-1} = {(yx, a_y(η)) : (xy, τ) ∈ η}`.
pub fn flip_cycles(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    pi: &PoissonEdgeSet,
    partition: &CyclePartition,
    chosen: &[usize],
) -> Result<Relabelled> {
    let pts = pi.points();
    let mut images: Vec<PoissonPoint> = pts.to_vec();
    for &c in chosen {
        let cycle = partition
            .cycles()
            .get(c)
            .ok_or_else(|| Error::Domain(format!("no cycle {c}")))?;
        let order = cycle.points();
        for (k, &i) in order.iter().enumerate() {
            // the point leaving the head of `i` carries a_y(η)
            let succ = order[(k + 1) % order.len()];
            images[i] = PoissonPoint {
                edge: pts[i].edge.reverse(),
                time: pts[succ].time,
            };
        }
    }
    relabel(graph, budget, images)
}

/// Flips every cycle of the decomposition with probability 1/2, except
/// two-point cycles, which are their own inverse.
pub fn resample_orientations(
    graph: &FiniteGraph,
    budget: &LocalTimeField,
    pi: &PoissonEdgeSet,
    rng: &mut ChainRng,
) -> Result<PoissonEdgeSet> {
    let partition = decompose(graph, pi)?;
    let chosen: Vec<usize> = partition
        .cycles()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 2)
        .filter(|_| rng.random_bool(0.5))
        .map(|(i, _)| i)
        .collect();
    Ok(flip_cycles(graph, budget, pi, &partition, &chosen)?.set)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::graphs::LatticeBox;
    use crate::rng::chain_rng;
    use crate::sampler::{assign_times, run_chain, McmcConfig, MoveSet};

    #[test]
    fn time_inversion_is_involution_and_swaps_layers() {
        let (g, t, pi) = figure_eight();
        let inv = time_invert(&g, &t, &pi).unwrap();
        let back = time_invert(&g, &t, &inv.set).unwrap();
        for (a, b) in pi.points().iter().zip(back.set.points()) {
            assert_eq!(a.edge, b.edge);
            assert!((a.time - b.time).abs() < 1e-15);
        }
        let p = decompose(&g, &pi).unwrap();
        let q = decompose(&g, &inv.set).unwrap();
        assert_eq!(q.point_sets(), p.mapped_point_sets(Some(&inv.index_map)));
        // the cycle through 1 moves from layer 1 to layer 2
        let layer_of_1 = |part: &CyclePartition, s: &PoissonEdgeSet| {
            let c = part
                .cycles()
                .iter()
                .position(|c| c.vertices(&g, s).contains(&1))
                .unwrap();
            part.layers()[c]
        };
        assert_eq!(layer_of_1(&p, &pi), 1);
        assert_eq!(layer_of_1(&q, &inv.set), 2);
        let empty = PoissonEdgeSet::empty(&g);
        assert!(time_invert(&g, &t, &empty).unwrap().set.is_empty());
    }

    #[test]
    fn direction_inversion_preserves_activation() {
        let l = LatticeBox::new(1);
        let g = l.graph();
        let t = LocalTimeField::constant(9, 2.0).unwrap();
        let pts: Vec<PoissonPoint> = l
            .plaquette(2)
            .iter()
            .enumerate()
            .map(|(i, &d)| PoissonPoint {
                edge: d,
                time: 0.1 * (i + 1) as f64,
            })
            .collect();
        let pi = PoissonEdgeSet::new(g, &t, pts).unwrap();
        let p = decompose(g, &pi).unwrap();
        let f = flip_cycles(g, &t, &pi, &p, &[0]).unwrap();
        let q = decompose(g, &f.set).unwrap();
        let mut a = p.cycles()[0].activation_times(g, &pi);
        let mut b = q.cycles()[0].activation_times(g, &f.set);
        a.sort_by_key(|x| x.0);
        b.sort_by_key(|x| x.0);
        assert_eq!(a, b);
        for (x, y) in pi.points().iter().zip(f.set.points()) {
            assert_ne!(x.edge, y.edge);
        }
        let qq = decompose(g, &f.set).unwrap();
        let ff = flip_cycles(g, &t, &f.set, &qq, &[0]).unwrap();
        assert_eq!(ff.set, pi);
    }

    #[test]
    fn two_cycles_are_self_inverse() {
        let g = FiniteGraph::single_edge();
        let t = LocalTimeField::constant(2, 2.0).unwrap();
        let pi = PoissonEdgeSet::new(&g, &t, vec![point(&g, 0, 1, 0.3), point(&g, 1, 0, 0.6)]).unwrap();
        let p = decompose(&g, &pi).unwrap();
        assert_eq!(flip_cycles(&g, &t, &pi, &p, &[0]).unwrap().set, pi);
    }

    #[test]
    fn equivariance_on_sampled_sets() {
        let l = LatticeBox::new(2);
        let g = l.graph();
        let beta = 0.8;
        let t = LocalTimeField::constant(g.vertex_count(), beta).unwrap();
        let cfg = McmcConfig {
            sweeps: 2200,
            burnin: 200,
            thin: 20,
            ..McmcConfig::default()
        };
        let mut rng = chain_rng(8, 1);
        let mut n_checked = 0;
        run_chain(g, &t, &MoveSet::plaquettes(&l), &cfg, 0, None, |c| {
            let pi = assign_times(g, &t, c, &mut rng).unwrap();
            let p = decompose(g, &pi).unwrap();
            let inv = time_invert(g, &t, &pi).unwrap();
            let q = decompose(g, &inv.set).unwrap();
            assert_eq!(q.point_sets(), p.mapped_point_sets(Some(&inv.index_map)));
            let chosen: Vec<usize> = (0..p.len()).filter(|_| rng.random_bool(0.5)).collect();
            let f = flip_cycles(g, &t, &pi, &p, &chosen).unwrap();
            let r = decompose(g, &f.set).unwrap();
            assert_eq!(r.point_sets(), p.mapped_point_sets(Some(&f.index_map)));
            n_checked += 1;
        })
        .unwrap();
        assert_eq!(n_checked, 100);
    }
}

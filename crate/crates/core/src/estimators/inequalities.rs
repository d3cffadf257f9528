//! Monte Carlo checks of the two cycle inequalities:
//! `2 <σ_x σ̄_y>² >= P[some cycle visits x and y]` and
//! `P[some cycle surrounds a and b] >= SigCov[a, b]`.

use super::series::{SamplerKind, SeriesConfig};
use super::stats::{Accumulator, BatchMeans};
use crate::cycles::decompose;
use crate::error::{Error, Result};
use crate::graphs::{FiniteGraph, LatticeBox};
use crate::heights::{height_from_current, surrounding_count};
use crate::oracle::{two_point_current, CheckRecord, RadiusField, TruncationPolicy};
use crate::rng::chain_rng;
use crate::sampler::{assign_times, run_chain, sample_sourceless_rejection, LocalTimeField, MoveSet};

/// Standard errors of Monte Carlo slack.
pub const INEQUALITY_SIGMAS: f64 = 3.0;

/// `2 <σ_x σ̄_y>² >= P[∃ η ∋ x, y]`, the left side from the oracle and the
/// right side from `samples` exact rejection samples.
pub fn cycle_two_point_inequality(
    graph: &FiniteGraph,
    beta: f64,
    x: usize,
    y: usize,
    samples: u64,
    seed: u64,
    max_attempts: u64,
) -> Result<CheckRecord> {
    let n = graph.vertex_count();
    if x >= n || y >= n {
        return Err(Error::UnknownVertex(x.max(y)));
    }
    let g2 = two_point_current(
        graph,
        &RadiusField::constant(n, beta),
        x,
        y,
        &TruncationPolicy::default(),
    )?;
    let budget = LocalTimeField::constant(n, beta)?;
    let mut rng = chain_rng(seed, 0);
    let mut hit = Accumulator::new();
    for _ in 0..samples {
        let s = sample_sourceless_rejection(graph, &budget, &mut rng, max_attempts)?;
        let p = decompose(graph, &s.set)?;
        let both = p.cycles().iter().any(|c| {
            let v = c.vertices(graph, &s.set);
            v.contains(&x) && v.contains(&y)
        });
        hit.push(both as u8 as f64);
    }
    let lhs = 2.0 * g2.value * g2.value;
    let slack = INEQUALITY_SIGMAS * hit.std_error() + 4.0 * g2.upper * g2.error_bound();
    Ok(CheckRecord::new(
        "cycle-two-point",
        lhs,
        hit.mean(),
        slack,
        lhs >= hit.mean() - slack,
    ))
}

/// `P[∃ η surrounding a and b] >= SigCov[a, b]` on a box, estimated on the
/// same samples and compared through the paired difference.
pub fn surrounding_sign_inequality(
    lattice: &LatticeBox,
    beta: f64,
    a: (i64, i64),
    b: (i64, i64),
    cfg: &SeriesConfig,
) -> Result<CheckRecord> {
    cfg.validate()?;
    let (fa, fb) = (lattice.face_index(a.0, a.1), lattice.face_index(b.0, b.1));
    if fa == lattice.outer_face() || fb == lattice.outer_face() {
        return Err(Error::Domain("faces must be interior".into()));
    }
    if cfg.sampler != SamplerKind::Mcmc {
        return Err(Error::Domain(
            "the surrounding inequality uses the MCMC sampler".into(),
        ));
    }
    let g = lattice.graph();
    let budget = LocalTimeField::constant(g.vertex_count(), beta)?;
    let size = (cfg.retained() * cfg.chains / cfg.batches).max(1);
    let (mut lhs, mut rhs, mut diff) = (
        BatchMeans::new(size),
        BatchMeans::new(size),
        BatchMeans::new(size),
    );
    let mut failure = None;
    for c in 0..cfg.chains {
        let mut aux = chain_rng(cfg.chain.seed, crate::rng::stream_id(&[cfg.chain.seed, c, 2]));
        run_chain(
            g,
            &budget,
            &MoveSet::plaquettes(lattice),
            &cfg.chain,
            c,
            None,
            |cur| {
                if failure.is_some() {
                    return;
                }
                let mut step = || -> Result<(f64, f64)> {
                    let pi = assign_times(g, &budget, cur, &mut aux)?;
                    let p = decompose(g, &pi)?;
                    let h = height_from_current(lattice, cur)?;
                    let s = h.signs();
                    Ok((
                        (surrounding_count(lattice, &pi, &p, fa, fb) > 0) as u8 as f64,
                        (s.get(fa) * s.get(fb)) as f64,
                    ))
                };
                match step() {
                    Ok((i, s)) => {
                        lhs.push(i);
                        rhs.push(s);
                        diff.push(i - s);
                    }
                    Err(e) => failure = Some(e),
                }
            },
        )?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let slack = INEQUALITY_SIGMAS * diff.std_error();
    Ok(CheckRecord::new(
        "surrounding-sign",
        lhs.mean(),
        rhs.mean(),
        slack,
        diff.mean() >= -slack,
    ))
}

/// The standard battery: the two-point inequality on the 4-cycle and on
/// `Λ_1` at `β ∈ {0.1, 0.5}` for a pair of neighbours, and the surrounding
/// inequality on `Λ_2` at `β = 0.8` for two adjacent faces.
pub fn inequality_checks(samples: u64, seed: u64) -> Result<Vec<CheckRecord>> {
    let c4 = FiniteGraph::cycle(4);
    let l1 = LatticeBox::new(1);
    let o = l1.vertex_index(0, 0).expect("origin");
    let e = l1.vertex_index(1, 0).expect("in box");
    let mut out = Vec::new();
    for beta in [0.1, 0.5] {
        out.push(
            cycle_two_point_inequality(&c4, beta, 0, 1, samples, seed, 1_000_000)?
                .with_instance(format!("C4 beta={beta} x=0 y=1")),
        );
        out.push(
            cycle_two_point_inequality(l1.graph(), beta, o, e, samples, seed, 1_000_000)?
                .with_instance(format!("box n=1 beta={beta} x=(0,0) y=(1,0)")),
        );
    }
    let l2 = LatticeBox::new(2);
    let cfg = SeriesConfig {
        chain: crate::sampler::McmcConfig {
            sweeps: 2 * samples + 1_000,
            burnin: 1_000,
            thin: 2,
            seed,
            ..Default::default()
        },
        ..SeriesConfig::default()
    };
    out.push(
        surrounding_sign_inequality(&l2, 0.8, (0, 0), (0, 1), &cfg)?
            .with_instance("box n=2 beta=0.8 a=(0,0) b=(0,1)".to_string()),
    );
    Ok(out)
}

//! The tiered verification suite.
//!
//! Tier 1 runs exact per-sample identities, tier 2 adds the oracle
//! equivalences and tier 3 the statistical paired tests. Per-sample
//! families are reported as one record each with `lhs` the number of
//! failing samples and `rhs = 0`.

use num_complex::Complex64;
use rand::Rng;
use xylab::cycles::{brute_force_proper_partitions, decompose, explore, flip_cycles, time_invert, StopRule};
use xylab::estimators::{
    chi_square_two_sample, estimate_cov_series, estimate_sign_cov_series, estimate_two_point_series,
    inequality_checks, SamplerKind, SeriesConfig,
};
use xylab::graphs::{Current, FiniteGraph, LatticeBox};
use xylab::heights::{
    gibbs_height_sweep, gradient_violation, integrate_heights, winding_height, HeightField, HeightGibbs,
};
use xylab::oracle::{
    gauge_check, ginibre_check, haar_two_point, mono_check, two_point_current, walk_expansion_two_point,
    CheckRecord, RadiusField, TruncationPolicy,
};
use xylab::rng::{chain_rng, stream_id, ChainRng};
use xylab::sampler::{
    assign_times, run_chain, sample_sourceless_rejection, LocalTimeField, McmcConfig, MoveSet, PoissonEdgeSet,
};
use xylab::Result;

/// Single-edge two-point function at `β = 1`.
pub const SINGLE_EDGE_REFERENCE: f64 = 0.446384;

pub struct SuiteOptions {
    pub tier: u8,
    pub seed: u64,
    pub policy: TruncationPolicy,
    /// Integrate heights with the mirrored face convention.
    pub inject_fault: bool,
}

pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = tier_one(opts)?;
    if opts.tier >= 2 {
        out.extend(tier_two(opts)?);
    }
    if opts.tier >= 3 {
        out.extend(tier_three(opts)?);
    }
    Ok(out)
}

fn tally(check: &str, instance: String, failures: usize) -> CheckRecord {
    CheckRecord::new(check, failures as f64, 0.0, 0.0, failures == 0).with_instance(instance)
}

fn rng(opts: &SuiteOptions, tag: u64) -> ChainRng {
    chain_rng(opts.seed, stream_id(&[opts.seed, tag]))
}

fn random_connected(n: usize, extra: usize, rng: &mut ChainRng) -> FiniteGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    FiniteGraph::new(n, &edges).expect("valid by construction")
}

/// Connected graphs on two to four vertices, one per isomorphism class.
pub fn small_connected_graphs() -> Vec<(&'static str, FiniteGraph)> {
    let g = |n, e: &[(usize, usize)]| FiniteGraph::new(n, e).expect("valid");
    vec![
        ("K2", g(2, &[(0, 1)])),
        ("P3", g(3, &[(0, 1), (1, 2)])),
        ("K3", g(3, &[(0, 1), (1, 2), (0, 2)])),
        ("P4", g(4, &[(0, 1), (1, 2), (2, 3)])),
        ("star", g(4, &[(0, 1), (0, 2), (0, 3)])),
        ("C4", g(4, &[(0, 1), (1, 2), (2, 3), (0, 3)])),
        ("paw", g(4, &[(0, 1), (1, 2), (0, 2), (2, 3)])),
        ("diamond", g(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])),
        ("K4", FiniteGraph::complete(4)),
    ]
}

/// Thinned plaquette-chain samples on `Λ_n`, each with fresh times.
fn box_samples(
    l: &LatticeBox,
    beta: f64,
    count: u64,
    seed: u64,
    mut f: impl FnMut(&Current, &PoissonEdgeSet, &mut ChainRng) -> Result<()>,
) -> Result<()> {
    let g = l.graph();
    let t = LocalTimeField::constant(g.vertex_count(), beta)?;
    let cfg = McmcConfig {
        sweeps: 500 + 10 * count,
        burnin: 500,
        thin: 10,
        seed,
        ..McmcConfig::default()
    };
    let mut aux = chain_rng(seed, stream_id(&[seed, 1]));
    let mut failure = None;
    run_chain(g, &t, &MoveSet::plaquettes(l), &cfg, 0, None, |c| {
        if failure.is_some() {
            return;
        }
        let r = assign_times(g, &t, c, &mut aux).and_then(|pi| f(c, &pi, &mut aux));
        if let Err(e) = r {
            failure = Some(e);
        }
    })?;
    failure.map_or(Ok(()), Err)
}

fn tier_one(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();

    let mut r = rng(opts, 1);
    let phase = |r: &mut ChainRng| Complex64::from_polar(r.random_range(0.2..3.0), r.random_range(0.0..6.3));
    for i in 0..50 {
        let n = r.random_range(2..=8);
        let g = random_connected(n, r.random_range(0..6), &mut r);
        let j: Vec<Complex64> = (0..g.directed_edge_count()).map(|_| phase(&mut r)).collect();
        let counts: Vec<u32> = (0..g.directed_edge_count())
            .map(|_| r.random_range(0..4))
            .collect();
        let gauge: Vec<Complex64> = (0..n).map(|_| phase(&mut r)).collect();
        out.push(
            gauge_check(&g, &j, &Current::from_counts(counts), &gauge)?
                .with_instance(format!("random graph #{i}, {n} vertices")),
        );
    }

    let k4 = FiniteGraph::complete(4);
    let t4 = LocalTimeField::constant(4, 1.0)?;
    let mut r = rng(opts, 2);
    let (mut seen, mut bad) = (0, 0);
    while seen < 100 {
        let s = sample_sourceless_rejection(&k4, &t4, &mut r, 1_000_000)?.set;
        if s.is_empty() || s.len() > 10 {
            continue;
        }
        let all = brute_force_proper_partitions(&k4, &s)?;
        let d = decompose(&k4, &s)?;
        bad += (all.len() != 1 || all[0].point_sets() != d.point_sets()) as usize;
        seen += 1;
    }
    out.push(tally(
        "unique-proper-partition",
        "K4 beta=1, 100 sets".into(),
        bad,
    ));

    let l2 = LatticeBox::new(2);
    let g2 = l2.graph();
    let t2 = LocalTimeField::constant(g2.vertex_count(), 0.8)?;
    let (mut inv_bad, mut flip_bad, mut up_bad) = (0, 0, 0);
    box_samples(&l2, 0.8, 200, opts.seed, |_, pi, r| {
        let p = decompose(g2, pi)?;
        let inv = time_invert(g2, &t2, pi)?;
        inv_bad +=
            (decompose(g2, &inv.set)?.point_sets() != p.mapped_point_sets(Some(&inv.index_map))) as usize;
        let chosen: Vec<usize> = (0..p.len()).filter(|_| r.random_bool(0.5)).collect();
        let f = flip_cycles(g2, &t2, pi, &p, &chosen)?;
        flip_bad += (decompose(g2, &f.set)?.point_sets() != p.mapped_point_sets(Some(&f.index_map))) as usize;

        let x = l2
            .vertex_index(r.random_range(-1..=1), r.random_range(-1..=1))
            .expect("in box");
        let s = r.random_range(0.0..t2.get(x));
        let tr = explore(g2, &t2, pi, x, StopRule::Budget(s))?;
        let owner = p.cycle_of_point(pi.len());
        let mut cycles: Vec<usize> = (0..pi.len())
            .filter(|&i| {
                let q = pi.points()[i];
                g2.source(q.edge) == x && q.time >= t2.get(x) - s
            })
            .flat_map(|i| p.up_set(g2, pi, owner[i]))
            .collect();
        cycles.sort_unstable();
        cycles.dedup();
        let mut expected: Vec<usize> = cycles
            .iter()
            .flat_map(|&c| p.cycles()[c].points().to_vec())
            .collect();
        expected.sort_unstable();
        let mut used = tr.used.clone();
        used.sort_unstable();
        up_bad += (used != expected || !tr.completed) as usize;
        Ok(())
    })?;
    out.push(tally(
        "time-inversion-equivariance",
        "box n=2 beta=0.8, 200 samples".into(),
        inv_bad,
    ));
    out.push(tally(
        "orientation-flip-equivariance",
        "box n=2 beta=0.8, 200 samples".into(),
        flip_bad,
    ));
    out.push(tally(
        "exploration-up-set",
        "box n=2 beta=0.8, 200 samples".into(),
        up_bad,
    ));

    let orientation = if opts.inject_fault { -1 } else { 1 };
    for n in [2, 3] {
        let l = LatticeBox::new(n);
        let g = l.graph();
        let (mut grad_bad, mut wind_bad) = (0, 0);
        box_samples(&l, 0.8, 200, opts.seed.wrapping_add(n as u64), |c, pi, _| {
            let h = integrate_heights(&l, c, orientation)?;
            grad_bad += gradient_violation(&l, c, &h).is_some() as usize;
            let p = decompose(g, pi)?;
            wind_bad +=
                (0..l.interior_face_count()).any(|f| winding_height(&l, pi, &p, f) != h.get(f)) as usize;
            Ok(())
        })?;
        out.push(tally(
            "height-gradient",
            format!("box n={n} beta=0.8, 200 samples"),
            grad_bad,
        ));
        out.push(tally(
            "height-winding",
            format!("box n={n} beta=0.8, 200 samples"),
            wind_bad,
        ));
    }
    Ok(out)
}

fn tier_two(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let policy = &opts.policy;
    for (name, g) in small_connected_graphs() {
        let n = g.vertex_count();
        for beta in [0.25, 0.5, 1.0] {
            let r = RadiusField::constant(n, beta);
            let mut worst: f64 = 0.0;
            let mut pair = (0, 0);
            for x in 0..n {
                for y in x + 1..n {
                    let a = two_point_current(&g, &r, x, y, policy)?.value;
                    let b = haar_two_point(&g, &r, x, y, 96)?;
                    if (a - b).abs() >= worst {
                        worst = (a - b).abs();
                        pair = (x, y);
                    }
                }
            }
            let a = two_point_current(&g, &r, pair.0, pair.1, policy)?.value;
            let b = haar_two_point(&g, &r, pair.0, pair.1, 96)?;
            out.push(
                CheckRecord::new("current-vs-haar", a, b, 1e-5, worst <= 1e-5)
                    .with_instance(format!("{name} beta={beta} worst pair {pair:?}")),
            );
        }
    }
    let edge = FiniteGraph::single_edge();
    let r1 = RadiusField::constant(2, 1.0);
    let v = two_point_current(&edge, &r1, 0, 1, policy)?.value;
    out.push(
        CheckRecord::new(
            "single-edge-reference",
            v,
            SINGLE_EDGE_REFERENCE,
            1e-5,
            (v - SINGLE_EDGE_REFERENCE).abs() <= 1e-5,
        )
        .with_instance("K2 beta=1"),
    );

    let mut r = rng(opts, 3);
    let radius = |n: usize, r: &mut ChainRng| {
        RadiusField::new((0..n).map(|_| r.random_range(0.5..1.2)).collect()).expect("positive")
    };
    for i in 0..40 {
        let n = r.random_range(2..=6);
        let g = random_connected(n, r.random_range(0..3), &mut r);
        let rad = radius(n, &mut r);
        let sq = rad.squared();
        let (mut t1, mut t2) = (vec![0.0; n], vec![0.0; n]);
        for v in 0..n {
            let t = r.random_range(0.0..sq[v] / 2.0);
            match r.random_range(0..3) {
                0 => t1[v] = t,
                1 => t2[v] = t,
                _ => {}
            }
        }
        out.push(
            ginibre_check(&g, &rad, &t1, &t2, policy)?
                .with_instance(format!("random graph #{i}, {n} vertices")),
        );
    }
    for i in 0..20 {
        let n = r.random_range(2..=6);
        let g = random_connected(n, r.random_range(0..3), &mut r);
        let rad = radius(n, &mut r);
        let sq = rad.squared();
        let mut subset: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
        if subset.is_empty() {
            subset.push(0);
        }
        let tau: Vec<f64> = subset.iter().map(|&v| r.random_range(0.0..sq[v] / 2.0)).collect();
        out.push(
            mono_check(&g, &rad, &subset, &tau, policy)?
                .with_instance(format!("random graph #{i}, {n} vertices")),
        );
    }

    let r05 = RadiusField::constant(2, 0.5);
    let exact = two_point_current(&edge, &r05, 0, 1, policy)?.value;
    let w = walk_expansion_two_point(&edge, &r05, 0, 1, 12, 100_000, opts.seed, policy)?;
    out.push(
        CheckRecord::new(
            "walk-expansion",
            w.value,
            exact,
            0.02 * exact,
            (w.value - exact).abs() <= 0.02 * exact,
        )
        .with_instance("K2 beta=0.5 L=12"),
    );
    Ok(out)
}

fn tier_three(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let chain = |sweeps: u64, thin: u64| McmcConfig {
        sweeps,
        burnin: 2_000,
        thin,
        seed: opts.seed,
        ..McmcConfig::default()
    };
    let paired = |check: &str, instance: String, lhs: f64, rhs: f64, diff: f64, se: f64| {
        CheckRecord::new(check, lhs, rhs, 3.0 * se, diff.abs() <= 3.0 * se).with_instance(instance)
    };

    let l2 = LatticeBox::new(2);
    let cfg = SeriesConfig {
        chain: chain(62_000, 2),
        base_face: (0, -1),
        surrounding: true,
        ..SeriesConfig::default()
    };
    let cov = estimate_cov_series(&l2, 0.8, 2, &cfg)?;
    let (s, d) = (
        cov.surrounding.expect("requested"),
        cov.difference.expect("requested"),
    );
    for k in 0..=2 {
        out.push(paired(
            "covariance-identity",
            format!("box n=2 beta=0.8 faces (0,-1),(0,{})", k as i64 - 1),
            cov.height.entries[k].estimate,
            s.entries[k].estimate,
            d.entries[k].estimate,
            d.entries[k].se,
        ));
    }

    let sc = estimate_sign_cov_series(&l2, 0.8, 2, &cfg)?;
    for k in 1..=2 {
        out.push(paired(
            "sign-vs-fk",
            format!("box n=2 beta=0.8 faces (0,-1),(0,{})", k as i64 - 1),
            sc.sign.entries[k].estimate,
            sc.connectivity.entries[k].estimate,
            sc.difference.entries[k].estimate,
            sc.difference.entries[k].se,
        ));
    }

    let l1 = LatticeBox::new(1);
    let beta = 0.7;
    let samples = 20_000u64;
    let nf = l1.interior_face_count();
    let bin = |h: i64| (h + 6).clamp(0, 12) as usize;
    let mut from_current = vec![vec![0u64; 13]; nf];
    let t1 = LocalTimeField::constant(l1.graph().vertex_count(), beta)?;
    let mut failure = None;
    run_chain(
        l1.graph(),
        &t1,
        &MoveSet::plaquettes(&l1),
        &chain(2_000 + 10 * samples, 10),
        0,
        None,
        |c| match integrate_heights(&l1, c, if opts.inject_fault { -1 } else { 1 }) {
            Ok(h) => (0..nf).for_each(|f| from_current[f][bin(h.get(f))] += 1),
            Err(e) => failure = Some(e),
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut st = HeightGibbs::new(beta)?;
    let mut h = HeightField::zeros(&l1);
    let mut r = rng(opts, 4);
    let mut from_gibbs = vec![vec![0u64; 13]; nf];
    for i in 0..1_000 + 5 * samples {
        gibbs_height_sweep(&l1, &mut st, &mut h, &mut r);
        if i >= 1_000 && i % 5 == 0 {
            (0..nf).for_each(|f| from_gibbs[f][bin(h.get(f))] += 1);
        }
    }
    for f in 0..nf {
        let t = chi_square_two_sample(&from_current[f], &from_gibbs[f], 1e-3, 20)?;
        out.push(
            CheckRecord::new("height-law-chi-square", t.statistic, t.critical, 0.0, t.pass)
                .with_instance(format!("box n=1 beta=0.7 face {f}, dof {}", t.dof)),
        );
    }

    out.extend(inequality_checks(20_000, opts.seed)?);

    let lattice = LatticeBox::new(1);
    let g = lattice.graph();
    let o = lattice.vertex_index(0, 0).expect("origin");
    let e = lattice.vertex_index(1, 0).expect("in box");
    let exact = two_point_current(
        g,
        &RadiusField::constant(g.vertex_count(), 0.5),
        o,
        e,
        &opts.policy,
    )?
    .value;
    for sampler in [SamplerKind::Worm, SamplerKind::Rejection] {
        let cfg = SeriesConfig {
            sampler,
            chain: chain(42_000, 1),
            ..SeriesConfig::default()
        };
        let s = estimate_two_point_series(&lattice, 0.5, 1, &cfg)?;
        let est = s.entries[1];
        out.push(paired(
            "two-point-sampler",
            format!("box n=1 beta=0.5 k=1 {sampler:?}"),
            est.estimate,
            exact,
            est.estimate - exact,
            est.se,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(inject_fault: bool) -> SuiteOptions {
        SuiteOptions {
            tier: 1,
            seed: 5,
            policy: TruncationPolicy::default(),
            inject_fault,
        }
    }

    #[test]
    fn tier_one_passes() {
        let recs = run_suite(&opts(false)).unwrap();
        assert!(recs.iter().all(|r| r.pass), "{recs:?}");
    }

    #[test]
    fn mirrored_heights_are_caught() {
        let recs = run_suite(&opts(true)).unwrap();
        let failed: Vec<&str> = recs
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.check.as_str())
            .collect();
        assert!(
            failed.contains(&"height-gradient") && failed.contains(&"height-winding"),
            "{failed:?}"
        );
    }
}

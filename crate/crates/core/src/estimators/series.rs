//! Distance series of the two-point function, the height covariance and the
//! sign covariance, each with its alternative estimator run on the same
//! samples.

use serde::{Deserialize, Serialize};

use super::stats::jackknife_ratio;
use crate::cycles::decompose;
use crate::error::{Error, Result};
use crate::graphs::{source_function, Current, LatticeBox};
use crate::heights::{
    connectivity, fk_edges, height_from_current, ising_couplings, surrounded_faces, HeightField, PhiTable,
};
use crate::rng::{chain_rng, stream_id, ChainRng};
use crate::sampler::{
    assign_times, run_chain, run_sourceless_worm, sample_counts, sample_sourceless_counts,
    worm_visit_batches, LocalTimeField, McmcConfig, MoveSet,
};

/// Sampler used to produce the series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Rejection,
    Mcmc,
    Worm,
}

/// Sampling settings shared by the series estimators.
///
/// For the rejection sampler, the retained sample count is the one the MCMC
/// settings would give: `ceil((sweeps - burnin) / thin)` per chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub sampler: SamplerKind,
    pub chain: McmcConfig,
    pub chains: u64,
    pub batches: u64,
    /// Attempts per rejection sample before giving up.
    pub max_attempts: u64,
    /// Lower-left corner of the first face of each pinned face pair.
    pub base_face: (i64, i64),
    /// Average face pairs over all translates at least this far from the
    /// boundary instead of pinning them.
    pub bulk_margin: Option<usize>,
    /// Also estimate the cycle-surrounding variant of the covariance.
    pub surrounding: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            sampler: SamplerKind::Mcmc,
            chain: McmcConfig::default(),
            chains: 1,
            batches: 32,
            max_attempts: 1_000_000,
            base_face: (0, 0),
            bulk_margin: None,
            surrounding: true,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.chains == 0 || self.batches < 2 {
            return Err(Error::Domain("need at least one chain and two batches".into()));
        }
        Ok(())
    }

    /// Retained samples per chain.
    pub fn retained(&self) -> u64 {
        (self.chain.sweeps - self.chain.burnin).div_ceil(self.chain.thin)
    }

    fn batch_size(&self) -> u64 {
        (self.retained() * self.chains / self.batches).max(1)
    }

    fn total_batches(&self) -> usize {
        ((self.batches / self.chains).max(1) * self.chains) as usize
    }
}

/// One row of a series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub k: usize,
    pub estimate: f64,
    pub se: f64,
    pub n_samples: u64,
}

/// A named series indexed by distance `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesEstimate {
    pub name: String,
    pub entries: Vec<SeriesEntry>,
}

impl SeriesEstimate {
    pub fn new(name: &str, entries: Vec<SeriesEntry>) -> Self {
        SeriesEstimate {
            name: name.to_string(),
            entries,
        }
    }

    pub fn get(&self, k: usize) -> Option<&SeriesEntry> {
        self.entries.iter().find(|e| e.k == k)
    }

    /// CSV with header `k,estimate,se,n_samples`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(name: &str, text: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text);
        let mut entries = Vec::new();
        for rec in r.deserialize() {
            let e: SeriesEntry = rec?;
            if !e.estimate.is_finite() || !(e.se >= 0.0) || !e.se.is_finite() {
                return Err(Error::Domain(format!("row k = {} is not finite", e.k)));
            }
            entries.push(e);
        }
        Ok(SeriesEstimate::new(name, entries))
    }
}

/// The face pairs `((a, b), (a, b + k))` a covariance averages over: one
/// pinned pair, or all translates inside the bulk square `[lo, hi)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairRegion {
    Pinned(i64, i64),
    Bulk { lo: i64, hi: i64 },
}

impl PairRegion {
    fn new(lattice: &LatticeBox, cfg: &SeriesConfig, k_max: usize) -> Result<Self> {
        let n = lattice.radius() as i64;
        let k = k_max as i64;
        let region = match cfg.bulk_margin {
            None => {
                let (a, b) = cfg.base_face;
                if a < -n || a >= n || b < -n || b + k >= n {
                    return Err(Error::Domain(format!(
                        "faces ({a}, {b}) to ({a}, {}) do not fit in the box",
                        b + k
                    )));
                }
                PairRegion::Pinned(a, b)
            }
            Some(m) => {
                let (lo, hi) = (-n + m as i64, n - m as i64);
                if hi - k <= lo {
                    return Err(Error::Domain(format!("no bulk face pairs at distance {k}")));
                }
                PairRegion::Bulk { lo, hi }
            }
        };
        Ok(region)
    }

    fn contains(&self, a: i64, b: i64, k: usize) -> bool {
        match *self {
            PairRegion::Pinned(a0, b0) => (a, b) == (a0, b0),
            PairRegion::Bulk { lo, hi } => a >= lo && a < hi && b >= lo && b < hi - k as i64,
        }
    }

    fn pairs(&self, lattice: &LatticeBox, k: usize) -> Vec<(usize, usize)> {
        let k = k as i64;
        match *self {
            PairRegion::Pinned(a, b) => vec![(lattice.face_index(a, b), lattice.face_index(a, b + k))],
            PairRegion::Bulk { lo, hi } => {
                let mut out = Vec::new();
                for b in lo..hi - k {
                    for a in lo..hi {
                        out.push((lattice.face_index(a, b), lattice.face_index(a, b + k)));
                    }
                }
                out
            }
        }
    }
}

/// Per-batch sums and counts; the estimate is the pooled mean with a
/// jackknife error over batches.
#[derive(Clone, Debug)]
struct Batched {
    sums: Vec<f64>,
    counts: Vec<f64>,
}

impl Batched {
    fn new(batches: usize) -> Self {
        Batched {
            sums: vec![0.0; batches],
            counts: vec![0.0; batches],
        }
    }

    fn push(&mut self, batch: usize, x: f64) {
        self.sums[batch] += x;
        self.counts[batch] += 1.0;
    }

    fn entry(&self, k: usize) -> SeriesEntry {
        let (estimate, se) = jackknife_ratio(&self.sums, &self.counts);
        SeriesEntry {
            k,
            estimate,
            se,
            n_samples: self.counts.iter().sum::<f64>() as u64,
        }
    }
}

fn finish(name: &str, acc: &[Batched]) -> SeriesEstimate {
    SeriesEstimate::new(name, acc.iter().enumerate().map(|(k, b)| b.entry(k)).collect())
}

/// Calls `observe(current, aux, batch)` on every retained sourceless
/// current. `aux` is a per-chain stream for per-sample randomness; batches
/// are contiguous stretches of one chain.
fn for_each_sourceless<F: FnMut(&Current, &mut ChainRng, usize) -> Result<()>>(
    lattice: &LatticeBox,
    budget: &LocalTimeField,
    cfg: &SeriesConfig,
    mut observe: F,
) -> Result<()> {
    cfg.validate()?;
    let g = lattice.graph();
    let per_chain = (cfg.batches / cfg.chains).max(1) as usize;
    let retained = cfg.retained();
    let span = cfg.chain.sweeps - cfg.chain.burnin;
    for c in 0..cfg.chains {
        let offset = c as usize * per_chain;
        let mut aux = chain_rng(cfg.chain.seed, stream_id(&[cfg.chain.seed, c, 1]));
        let mut failure = None;
        let mut seen = 0u64;
        match cfg.sampler {
            SamplerKind::Mcmc => {
                run_chain(
                    g,
                    budget,
                    &MoveSet::plaquettes(lattice),
                    &cfg.chain,
                    c,
                    None,
                    |cur| {
                        let batch = offset + (seen * per_chain as u64 / retained) as usize;
                        seen += 1;
                        if failure.is_none() {
                            failure = observe(cur, &mut aux, batch).err();
                        }
                    },
                )?;
            }
            SamplerKind::Worm => {
                run_sourceless_worm(g, budget, &cfg.chain, c, |cur, sweep| {
                    let batch = offset + ((sweep - cfg.chain.burnin) * per_chain as u64 / span) as usize;
                    if failure.is_none() {
                        failure = observe(cur, &mut aux, batch).err();
                    }
                })?;
            }
            SamplerKind::Rejection => {
                let mut rng = chain_rng(cfg.chain.seed, c);
                for i in 0..retained {
                    let (cur, _) = sample_sourceless_counts(g, budget, &mut rng, cfg.max_attempts)?;
                    observe(
                        &cur,
                        &mut aux,
                        offset + (i * per_chain as u64 / retained) as usize,
                    )?;
                }
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(())
}

/// `<σ_0 σ̄_{(k,0)}>` for `k = 0..=k_max`, averaged over the four axis
/// directions from the origin.
///
/// The worm sampler pins its tail at the origin and reads head occupation
/// ratios; `n_samples` counts head visits at distance `k`. The rejection
/// sampler draws unconditioned currents and compares how often `∂n` equals
/// `0` and `1_y - 1_0`; `n_samples` counts the latter draws.
pub fn estimate_two_point_series(
    lattice: &LatticeBox,
    beta: f64,
    k_max: usize,
    cfg: &SeriesConfig,
) -> Result<SeriesEstimate> {
    cfg.validate()?;
    if k_max > lattice.radius() {
        return Err(Error::Domain(format!("k_max {k_max} exceeds the box radius")));
    }
    let g = lattice.graph();
    let budget = LocalTimeField::constant(g.vertex_count(), beta)?;
    let origin = lattice.vertex_index(0, 0).expect("origin");
    let ring: Vec<[usize; 4]> = (0..=k_max as i64)
        .map(|k| [(k, 0), (0, k), (-k, 0), (0, -k)].map(|(x, y)| lattice.vertex_index(x, y).expect("in box")))
        .collect();

    // per-batch visit (or hit) counts by vertex
    let batches: Vec<Vec<u64>> = match cfg.sampler {
        SamplerKind::Worm => {
            let per_chain = (cfg.batches / cfg.chains).max(2);
            let batch_sweeps = ((cfg.chain.sweeps - cfg.chain.burnin) / per_chain).max(1);
            let mut all = Vec::new();
            for c in 0..cfg.chains {
                all.extend(worm_visit_batches(
                    g,
                    &budget,
                    origin,
                    &cfg.chain,
                    c,
                    batch_sweeps,
                )?);
            }
            all
        }
        SamplerKind::Rejection => {
            let mut all = Vec::new();
            let size = cfg.batch_size();
            let mut hits = vec![0u64; g.vertex_count()];
            let mut in_batch = 0;
            for c in 0..cfg.chains {
                let mut rng = chain_rng(cfg.chain.seed, c);
                for _ in 0..cfg.retained() {
                    let cur = sample_counts(g, &budget, &mut rng);
                    if let Some(v) = single_sink(&source_function(g, &cur), origin) {
                        hits[v] += 1;
                    }
                    in_batch += 1;
                    if in_batch == size {
                        all.push(std::mem::replace(&mut hits, vec![0; g.vertex_count()]));
                        in_batch = 0;
                    }
                }
            }
            all
        }
        SamplerKind::Mcmc => {
            return Err(Error::Domain(
                "the two-point series needs the worm or rejection sampler".into(),
            ))
        }
    };

    let den: Vec<f64> = batches.iter().map(|b| b[origin] as f64).collect();
    let mut entries = Vec::with_capacity(k_max + 1);
    for (k, r) in ring.iter().enumerate() {
        let seen: u64 = batches.iter().map(|b| r.iter().map(|&v| b[v]).sum::<u64>()).sum();
        if k == 0 {
            entries.push(SeriesEntry {
                k,
                estimate: 1.0,
                se: 0.0,
                n_samples: seen / 4,
            });
            continue;
        }
        let num: Vec<f64> = batches
            .iter()
            .map(|b| r.iter().map(|&v| b[v] as f64).sum::<f64>() / 4.0)
            .collect();
        let (estimate, se) = jackknife_ratio(&num, &den);
        entries.push(SeriesEntry {
            k,
            estimate,
            se,
            n_samples: seen,
        });
    }
    Ok(SeriesEstimate::new("two-point", entries))
}

/// `Some(y)` when `div = 1_y - 1_x` (including `y = x` for `div = 0`).
fn single_sink(div: &[i64], x: usize) -> Option<usize> {
    let mut plus = None;
    for (v, &d) in div.iter().enumerate() {
        match (d, v == x) {
            (0, _) | (-1, true) => {}
            (1, false) if plus.is_none() => plus = Some(v),
            _ => return None,
        }
    }
    match (plus, div[x]) {
        (None, 0) => Some(x),
        (Some(y), -1) => Some(y),
        _ => None,
    }
}

/// Height covariance series with its cycle-surrounding counterpart.
#[derive(Clone, Debug, PartialEq)]
pub struct CovSeries {
    /// `E[h(a) h(b)]`; the mean height vanishes by symmetry.
    pub height: SeriesEstimate,
    /// `E[#cycles surrounding a and b]`, when requested.
    pub surrounding: Option<SeriesEstimate>,
    /// Per-sample difference of the two, when requested.
    pub difference: Option<SeriesEstimate>,
}

/// `Cov[h(a), h(a + (0, k))]` for `k = 0..=k_max`.
pub fn estimate_cov_series(
    lattice: &LatticeBox,
    beta: f64,
    k_max: usize,
    cfg: &SeriesConfig,
) -> Result<CovSeries> {
    let region = PairRegion::new(lattice, cfg, k_max)?;
    let pairs: Vec<Vec<(usize, usize)>> = (0..=k_max).map(|k| region.pairs(lattice, k)).collect();
    let g = lattice.graph();
    let budget = LocalTimeField::constant(g.vertex_count(), beta)?;
    let nb = cfg.total_batches();
    let mut height = vec![Batched::new(nb); k_max + 1];
    let mut surround = vec![Batched::new(nb); k_max + 1];
    let mut diff = vec![Batched::new(nb); k_max + 1];
    let mut counts = vec![0usize; k_max + 1];
    for_each_sourceless(lattice, &budget, cfg, |cur, aux, batch| {
        let h = height_from_current(lattice, cur)?;
        if cfg.surrounding {
            let pi = assign_times(g, &budget, cur, aux)?;
            let p = decompose(g, &pi)?;
            counts.iter_mut().for_each(|c| *c = 0);
            for c in p.cycles() {
                let inside = surrounded_faces(lattice, &c.vertices(g, &pi));
                for &(a, b) in &inside {
                    for (k, count) in counts.iter_mut().enumerate() {
                        if region.contains(a, b, k) && inside.binary_search(&(a, b + k as i64)).is_ok() {
                            *count += 1;
                        }
                    }
                }
            }
        }
        for (k, ps) in pairs.iter().enumerate() {
            let hh = mean_over(ps, |a, b| (h.get(a) * h.get(b)) as f64);
            height[k].push(batch, hh);
            if cfg.surrounding {
                let s = counts[k] as f64 / ps.len() as f64;
                surround[k].push(batch, s);
                diff[k].push(batch, hh - s);
            }
        }
        Ok(())
    })?;
    Ok(CovSeries {
        height: finish("cov", &height),
        surrounding: cfg.surrounding.then(|| finish("cov-surrounding", &surround)),
        difference: cfg.surrounding.then(|| finish("cov-difference", &diff)),
    })
}

/// Sign covariance series with its FK-connectivity counterpart.
#[derive(Clone, Debug, PartialEq)]
pub struct SignCovSeries {
    /// `E[sign h(a) sign h(b)]`.
    pub sign: SeriesEstimate,
    /// `P[a and b connected in the FK bonds]`.
    pub connectivity: SeriesEstimate,
    pub difference: SeriesEstimate,
}

/// `SigCov[a, a + (0, k)]` for `k = 0..=k_max`.
pub fn estimate_sign_cov_series(
    lattice: &LatticeBox,
    beta: f64,
    k_max: usize,
    cfg: &SeriesConfig,
) -> Result<SignCovSeries> {
    let region = PairRegion::new(lattice, cfg, k_max)?;
    let pairs: Vec<Vec<(usize, usize)>> = (0..=k_max).map(|k| region.pairs(lattice, k)).collect();
    let g = lattice.graph();
    let budget = LocalTimeField::constant(g.vertex_count(), beta)?;
    let mut phi = PhiTable::new(beta)?;
    let nb = cfg.total_batches();
    let mut sign = vec![Batched::new(nb); k_max + 1];
    let mut conn = vec![Batched::new(nb); k_max + 1];
    let mut diff = vec![Batched::new(nb); k_max + 1];
    for_each_sourceless(lattice, &budget, cfg, |cur, aux, batch| {
        let h: HeightField = height_from_current(lattice, cur)?;
        let signs = h.signs();
        let coupling = ising_couplings(lattice, &h.abs(), &mut phi)?;
        let alpha = fk_edges(lattice, &signs, &coupling, aux);
        for (k, ps) in pairs.iter().enumerate() {
            let s = mean_over(ps, |a, b| (signs.get(a) * signs.get(b)) as f64);
            let c = mean_over(ps, |a, b| {
                (signs.get(a) != 0 && signs.get(b) != 0 && connectivity(&alpha, a, b)) as u8 as f64
            });
            sign[k].push(batch, s);
            conn[k].push(batch, c);
            diff[k].push(batch, s - c);
        }
        Ok(())
    })?;
    Ok(SignCovSeries {
        sign: finish("sign-cov", &sign),
        connectivity: finish("fk-connectivity", &conn),
        difference: finish("sign-cov-difference", &diff),
    })
}

fn mean_over(pairs: &[(usize, usize)], f: impl Fn(usize, usize) -> f64) -> f64 {
    pairs.iter().map(|&(a, b)| f(a, b)).sum::<f64>() / pairs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{two_point_current, RadiusField, TruncationPolicy};

    fn cfg(sampler: SamplerKind, sweeps: u64, seed: u64) -> SeriesConfig {
        SeriesConfig {
            sampler,
            chain: McmcConfig {
                sweeps,
                burnin: sweeps / 10,
                seed,
                ..McmcConfig::default()
            },
            ..SeriesConfig::default()
        }
    }

    #[test]
    fn single_sink_cases() {
        assert_eq!(single_sink(&[0, 0, 0], 1), Some(1));
        assert_eq!(single_sink(&[1, -1, 0], 1), Some(0));
        assert_eq!(single_sink(&[1, 0, -1], 1), None);
        assert_eq!(single_sink(&[2, -2, 0], 1), None);
        assert_eq!(single_sink(&[1, -1, 1], 1), None);
    }

    #[test]
    fn csv_roundtrip() {
        let s = SeriesEstimate::new(
            "cov",
            vec![
                SeriesEntry {
                    k: 0,
                    estimate: 0.5,
                    se: 0.01,
                    n_samples: 10,
                },
                SeriesEntry {
                    k: 1,
                    estimate: 0.25,
                    se: 0.02,
                    n_samples: 10,
                },
            ],
        );
        let text = s.to_csv().unwrap();
        assert!(text.starts_with("k,estimate,se,n_samples\n0,0.5,0.01,10\n"));
        assert_eq!(SeriesEstimate::from_csv("cov", text.as_bytes()).unwrap(), s);
        assert!(SeriesEstimate::from_csv("cov", b"k,estimate,se,n_samples\n0,NaN,0,1\n").is_err());
    }

    #[test]
    fn zero_beta_two_point_is_a_delta() {
        let l = LatticeBox::new(3);
        let s = estimate_two_point_series(&l, 0.0, 3, &cfg(SamplerKind::Worm, 200, 1)).unwrap();
        assert_eq!(s.entries[0].estimate, 1.0);
        for e in &s.entries[1..] {
            assert_eq!((e.estimate, e.se), (0.0, 0.0));
        }
    }

    #[test]
    fn worm_and_rejection_match_oracle_on_small_box() {
        let l = LatticeBox::new(1);
        let g = l.graph();
        let beta = 0.5;
        let o = l.vertex_index(0, 0).unwrap();
        let y = l.vertex_index(1, 0).unwrap();
        let exact = two_point_current(
            g,
            &RadiusField::constant(9, beta),
            o,
            y,
            &TruncationPolicy::default(),
        )
        .unwrap()
        .value;
        for sampler in [SamplerKind::Worm, SamplerKind::Rejection] {
            let sweeps = if sampler == SamplerKind::Worm {
                40_000
            } else {
                400_000
            };
            let s = estimate_two_point_series(&l, beta, 1, &cfg(sampler, sweeps, 5)).unwrap();
            let e = s.entries[1];
            assert!(
                (e.estimate - exact).abs() < 4.0 * e.se,
                "{sampler:?} {e:?} vs {exact}"
            );
        }
        assert!(estimate_two_point_series(&l, beta, 1, &cfg(SamplerKind::Mcmc, 100, 0)).is_err());
    }

    #[test]
    fn covariance_identity_on_small_box() {
        let l = LatticeBox::new(2);
        let mut c = cfg(SamplerKind::Mcmc, 20_000, 9);
        c.base_face = (0, -1);
        let s = estimate_cov_series(&l, 0.8, 1, &c).unwrap();
        let d = s.difference.unwrap();
        for e in &d.entries {
            assert!(e.estimate.abs() < 4.0 * e.se + 1e-12, "{e:?}");
        }
        assert!(s.height.entries[0].estimate > s.height.entries[1].estimate);
    }

    #[test]
    fn sign_cov_matches_fk_on_small_box() {
        let l = LatticeBox::new(2);
        let mut c = cfg(SamplerKind::Mcmc, 20_000, 11);
        c.base_face = (0, -1);
        let s = estimate_sign_cov_series(&l, 0.8, 2, &c).unwrap();
        for e in &s.difference.entries {
            assert!(e.estimate.abs() < 4.0 * e.se + 1e-12, "{e:?}");
        }
        assert!(s.sign.entries[0].estimate > 0.0);
    }

    #[test]
    fn bulk_pairs_and_bounds() {
        let l = LatticeBox::new(3);
        let mut c = SeriesConfig::default();
        assert!(PairRegion::new(&l, &c, 3).is_err());
        c.bulk_margin = Some(1);
        let r = PairRegion::new(&l, &c, 2).unwrap();
        assert_eq!(r.pairs(&l, 0).len(), 16);
        assert_eq!(r.pairs(&l, 2).len(), 8);
        for k in 0..=2 {
            let n = (-3..3)
                .flat_map(|a| (-3..3).map(move |b| (a, b)))
                .filter(|&(a, b)| r.contains(a, b, k))
                .count();
            assert_eq!(n, r.pairs(&l, k).len());
        }
        c.bulk_margin = Some(3);
        assert!(PairRegion::new(&l, &c, 0).is_err());
    }

    #[test]
    fn bulk_covariance_identity() {
        let l = LatticeBox::new(4);
        let mut c = cfg(SamplerKind::Mcmc, 6_000, 13);
        c.bulk_margin = Some(1);
        let s = estimate_cov_series(&l, 0.8, 3, &c).unwrap();
        for e in &s.difference.unwrap().entries {
            assert!(e.estimate.abs() < 4.0 * e.se + 1e-12, "{e:?}");
        }
        let sur = s.surrounding.unwrap();
        assert!(sur.entries[0].estimate > sur.entries[1].estimate);
    }
}

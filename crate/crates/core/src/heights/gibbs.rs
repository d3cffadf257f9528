//! Heat-bath sampler for `P[h] ∝ 1{h(outer) = 0} exp(-sum_{dual edges} Φ_β(∇h))`.

use log::warn;
use rand::Rng;

use super::HeightField;
use crate::error::{Error, Result};
use crate::graphs::LatticeBox;
use crate::oracle::phi_potential;
use crate::rng::ChainRng;

/// Lazily extended table of `Φ_β(a)`, `a >= 0`.
#[derive(Clone, Debug)]
pub struct PhiTable {
    beta: f64,
    values: Vec<f64>,
}

impl PhiTable {
    pub fn new(beta: f64) -> Result<Self> {
        phi_potential(beta, 0)?;
        Ok(PhiTable {
            beta,
            values: Vec::new(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn get(&mut self, a: i64) -> f64 {
        let a = a.unsigned_abs() as usize;
        while self.values.len() <= a {
            let k = self.values.len() as i64;
            self.values
                .push(phi_potential(self.beta, k).expect("β validated at construction"));
        }
        self.values[a]
    }
}

/// Gibbs chain state: the potential table and the heat-bath half-width.
#[derive(Clone, Debug)]
pub struct HeightGibbs {
    pub phi: PhiTable,
    pub window: i64,
}

impl HeightGibbs {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Domain(format!("β = {beta} must be positive")));
        }
        Ok(HeightGibbs {
            phi: PhiTable::new(beta)?,
            window: 6 + beta.ceil() as i64,
        })
    }
}

const TAIL_TOLERANCE: f64 = 1e-12;

/// One heat-bath pass over the interior faces in index order.
pub fn gibbs_height_sweep(
    lattice: &LatticeBox,
    state: &mut HeightGibbs,
    h: &mut HeightField,
    rng: &mut ChainRng,
) {
    let mut logw: Vec<f64> = Vec::new();
    for f in 0..lattice.interior_face_count() {
        let nbrs = *lattice.face_neighbors(f);
        let centre = h.get(f);
        loop {
            let w = state.window;
            logw.clear();
            for k in centre - w..=centre + w {
                let e: f64 = nbrs.iter().map(|&g| state.phi.get(k - h.get(g))).sum();
                logw.push(-e);
            }
            let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = logw.iter().map(|l| (l - top).exp()).sum();
            let edge = (logw[0] - top).exp().max((logw[logw.len() - 1] - top).exp());
            if edge / total > TAIL_TOLERANCE {
                state.window *= 2;
                warn!("height heat-bath window widened to {}", state.window);
                continue;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = logw.len() - 1;
            for (i, l) in logw.iter().enumerate() {
                u -= (l - top).exp();
                if u <= 0.0 {
                    pick = i;
                    break;
                }
            }
            h.set(f, centre - w + pick as i64);
            break;
        }
    }
}

//! The mass-identity demonstration: fit the decay rates of the two-point
//! function and of the height covariance on one box and compare their
//! ratio with 2.

use serde::{Deserialize, Serialize};

use super::fit::{fit_mass, is_usable, mass_ratio, FitWindow, MassFit, MassRatio};
use super::series::{
    estimate_cov_series, estimate_sign_cov_series, estimate_two_point_series, SamplerKind, SeriesConfig,
    SeriesEstimate,
};
use crate::error::{Error, Result};
use crate::graphs::LatticeBox;
use crate::sampler::McmcConfig;

/// Band the ratio must fall in for the demonstration to succeed.
pub const RATIO_BAND: (f64, f64) = (1.6, 2.4);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub beta: f64,
    pub n: usize,
    pub window: FitWindow,
    pub two_point: SeriesConfig,
    pub cov: SeriesConfig,
    /// Also estimate the sign covariance on an independent chain.
    pub sign_cov: bool,
}

impl DemoConfig {
    /// `β = 0.5` on `Λ_24`, fitting the usable window with bulk-averaged
    /// covariances.
    pub fn standard(seed: u64) -> Self {
        DemoConfig::new(0.5, 24, seed)
    }

    pub fn new(beta: f64, n: usize, seed: u64) -> Self {
        let margin = (n / 4).max(1);
        DemoConfig {
            beta,
            n,
            window: FitWindow::usable(n),
            two_point: SeriesConfig {
                sampler: SamplerKind::Worm,
                chain: McmcConfig {
                    sweeps: 10_000,
                    burnin: 500,
                    seed,
                    ..McmcConfig::default()
                },
                ..SeriesConfig::default()
            },
            cov: SeriesConfig {
                sampler: SamplerKind::Worm,
                chain: McmcConfig {
                    sweeps: 200_000,
                    burnin: 2_000,
                    seed,
                    ..McmcConfig::default()
                },
                bulk_margin: Some(margin),
                surrounding: true,
                ..SeriesConfig::default()
            },
            sign_cov: false,
        }
    }

    fn k_max(&self) -> usize {
        let k = match self.window {
            FitWindow::Fixed { k_max, .. } | FitWindow::Usable { k_max, .. } => k_max,
        };
        k.min(self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub beta: f64,
    pub n: usize,
    pub window: FitWindow,
    pub two_point: SeriesEstimate,
    /// Covariance from the number of cycles surrounding both faces; this is
    /// the fitted series.
    pub cov: SeriesEstimate,
    /// Covariance from the product of heights on the same samples.
    pub cov_height: SeriesEstimate,
    pub sign_cov: Option<SeriesEstimate>,
    pub fit_two_point: Option<MassFit>,
    pub fit_cov: Option<MassFit>,
    pub ratio: Option<MassRatio>,
    /// Why a fit or the ratio is missing.
    pub notes: Vec<String>,
}

impl DemoReport {
    /// Whether the ratio was computed and falls in [`RATIO_BAND`].
    pub fn in_band(&self) -> bool {
        self.ratio
            .is_some_and(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(&r.value))
    }
}

/// Fits both series and forms `m_H / m_XY`. A fixed window is used as
/// given; a usable window is cut to the range usable in both series, so the
/// two rates are fitted over the same distances. Failed fits are reported
/// in the notes rather than extrapolated.
pub fn ratio_from_series(
    two_point: &SeriesEstimate,
    cov: &SeriesEstimate,
    window: FitWindow,
) -> (Option<MassFit>, Option<MassFit>, Option<MassRatio>, Vec<String>) {
    let window = match window {
        FitWindow::Usable { k_min, k_max } => {
            let extent = |s: &SeriesEstimate| {
                (k_min..=k_max)
                    .take_while(|&k| s.get(k).is_some_and(is_usable))
                    .last()
            };
            match (extent(two_point), extent(cov)) {
                (Some(a), Some(b)) => FitWindow::Fixed {
                    k_min,
                    k_max: a.min(b),
                },
                _ => window,
            }
        }
        fixed => fixed,
    };
    let mut notes = Vec::new();
    let mut fit = |s: &SeriesEstimate| match fit_mass(s, window) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("{}: {e}", s.name));
            None
        }
    };
    let fx = fit(two_point);
    let fh = fit(cov);
    let ratio = match (&fh, &fx) {
        (Some(h), Some(x)) if x.mass > 0.0 => Some(mass_ratio(h, x)),
        (Some(_), Some(_)) => {
            notes.push("two-point mass is not positive".into());
            None
        }
        _ => None,
    };
    (fx, fh, ratio, notes)
}

pub fn main_theorem_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    if !(cfg.beta >= 0.0) || !cfg.beta.is_finite() {
        return Err(Error::Domain(format!(
            "β = {} must be finite and nonnegative",
            cfg.beta
        )));
    }
    let lattice = LatticeBox::new(cfg.n);
    let k_max = cfg.k_max();
    let two_point = estimate_two_point_series(&lattice, cfg.beta, k_max, &cfg.two_point)?;
    let mut cov_cfg = cfg.cov.clone();
    cov_cfg.surrounding = true;
    let both = estimate_cov_series(&lattice, cfg.beta, k_max, &cov_cfg)?;
    let mut cov = both.surrounding.expect("requested");
    cov.name = "cov".into();
    let sign_cov = if cfg.sign_cov {
        let mut c = cfg.cov.clone();
        c.chain.seed = c.chain.seed.wrapping_add(1);
        Some(estimate_sign_cov_series(&lattice, cfg.beta, k_max, &c)?.sign)
    } else {
        None
    };
    let (fit_two_point, fit_cov, ratio, notes) = ratio_from_series(&two_point, &cov, cfg.window);
    Ok(DemoReport {
        beta: cfg.beta,
        n: cfg.n,
        window: cfg.window,
        two_point,
        cov,
        cov_height: both.height,
        sign_cov,
        fit_two_point,
        fit_cov,
        ratio,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::SeriesEntry;

    fn exp_series(name: &str, m: f64) -> SeriesEstimate {
        SeriesEstimate::new(
            name,
            (0..=12)
                .map(|k| {
                    let v = (-m * k as f64).exp();
                    SeriesEntry {
                        k,
                        estimate: v,
                        se: 1e-4 * v,
                        n_samples: 1,
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn synthetic_rates_give_two() {
        let (fx, fh, r, notes) = ratio_from_series(
            &exp_series("xy", 0.2),
            &exp_series("h", 0.4),
            FitWindow::asymptotic(24),
        );
        assert!(notes.is_empty());
        assert!((fx.unwrap().mass - 0.2).abs() < 1e-9);
        assert!((fh.unwrap().mass - 0.4).abs() < 1e-9);
        assert!((r.unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn window_outside_usable_range_is_reported() {
        let mut h = exp_series("h", 0.4);
        for e in &mut h.entries[4..] {
            e.se = e.estimate;
        }
        let (_, fh, r, notes) = ratio_from_series(&exp_series("xy", 0.2), &h, FitWindow::asymptotic(24));
        assert!(fh.is_none() && r.is_none());
        assert_eq!(notes.len(), 1);
        assert!(notes[0].starts_with("h:"));
    }

    #[test]
    fn usable_window_is_common_to_both() {
        let mut h = exp_series("h", 0.4);
        for e in &mut h.entries[5..] {
            e.se = e.estimate;
        }
        let (fx, fh, _, _) = ratio_from_series(&exp_series("xy", 0.2), &h, FitWindow::usable(24));
        assert_eq!(fx.unwrap().used, vec![1, 2, 3, 4]);
        assert_eq!(fh.unwrap().used, vec![1, 2, 3, 4]);
    }

    #[test]
    fn small_box_demo_runs() {
        let mut cfg = DemoConfig::new(0.5, 6, 4);
        cfg.two_point.chain.sweeps = 4_000;
        cfg.cov.chain.sweeps = 4_000;
        cfg.sign_cov = true;
        let r = main_theorem_demo(&cfg).unwrap();
        assert_eq!(r.two_point.entries.len(), 4);
        assert_eq!(r.cov.entries.len(), 4);
        assert!(r.sign_cov.is_some());
        assert!(r.two_point.entries[1].estimate > r.two_point.entries[2].estimate);
    }
}

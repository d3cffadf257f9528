//! Exponential-decay fits `log f(k) = c - m k` and the mass ratio.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::series::{SeriesEntry, SeriesEstimate};
use crate::error::{Error, Result};

/// Minimum signal-to-noise ratio for a point to enter a fit.
pub const USABLE_SNR: f64 = 5.0;
/// Two-sided confidence level of the reported intervals.
pub const CONFIDENCE: f64 = 0.95;

/// Which entries a fit may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FitWindow {
    /// Every usable entry with `k_min <= k <= k_max`.
    Fixed { k_min: usize, k_max: usize },
    /// Entries from `k_min` upwards while they stay usable, up to `k_max`.
    Usable { k_min: usize, k_max: usize },
}

impl FitWindow {
    /// `[ceil(n/4), ceil(n/2)]`.
    pub fn asymptotic(n: usize) -> Self {
        FitWindow::Fixed {
            k_min: n.div_ceil(4),
            k_max: n.div_ceil(2),
        }
    }

    /// Contiguous usable entries from `k = 1`, capped at `ceil(n/2)`.
    pub fn usable(n: usize) -> Self {
        FitWindow::Usable {
            k_min: 1,
            k_max: n.div_ceil(2),
        }
    }

    fn select<'a>(&self, series: &'a SeriesEstimate) -> Vec<&'a SeriesEntry> {
        match *self {
            FitWindow::Fixed { k_min, k_max } => series
                .entries
                .iter()
                .filter(|e| (k_min..=k_max).contains(&e.k) && is_usable(e))
                .collect(),
            FitWindow::Usable { k_min, k_max } => {
                let mut out = Vec::new();
                for k in k_min..=k_max {
                    match series.get(k) {
                        Some(e) if is_usable(e) => out.push(e),
                        _ => break,
                    }
                }
                out
            }
        }
    }
}

/// Positive and at least [`USABLE_SNR`] standard errors from zero.
pub fn is_usable(e: &SeriesEntry) -> bool {
    e.estimate > 0.0 && e.estimate.is_finite() && e.estimate > USABLE_SNR * e.se
}

/// Result of a log-linear fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassFit {
    pub mass: f64,
    pub mass_se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub intercept: f64,
    /// Distances that entered the fit.
    pub used: Vec<usize>,
    /// Residual `χ²` per degree of freedom (weighted fits only).
    pub chi2_per_dof: Option<f64>,
}

impl MassFit {
    pub fn window(&self) -> (usize, usize) {
        (self.used[0], *self.used.last().expect("non-empty"))
    }
}

/// Fits `log estimate = c - m k` over the window.
///
/// With standard errors on every point the fit is weighted by
/// `(estimate / se)²` and the slope error is scaled up by the residual
/// `χ²/dof` when that exceeds one. With any exact point (zero error) the
/// fit is unweighted and the interval comes from the residuals.
pub fn fit_mass(series: &SeriesEstimate, window: FitWindow) -> Result<MassFit> {
    let pts = window.select(series);
    if pts.len() < 3 {
        return Err(Error::InsufficientData(pts.len()));
    }
    let k: Vec<f64> = pts.iter().map(|e| e.k as f64).collect();
    let y: Vec<f64> = pts.iter().map(|e| e.estimate.ln()).collect();
    let weighted = pts.iter().all(|e| e.se > 0.0);
    let w: Vec<f64> = if weighted {
        pts.iter().map(|e| (e.estimate / e.se).powi(2)).collect()
    } else {
        vec![1.0; pts.len()]
    };
    let sw: f64 = w.iter().sum();
    let kbar = w.iter().zip(&k).map(|(w, k)| w * k).sum::<f64>() / sw;
    let ybar = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&k).map(|(w, k)| w * (k - kbar).powi(2)).sum();
    let sxy: f64 = (0..k.len()).map(|i| w[i] * (k[i] - kbar) * (y[i] - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * kbar;
    let rss: f64 = (0..k.len())
        .map(|i| w[i] * (y[i] - intercept - slope * k[i]).powi(2))
        .sum();
    let dof = (k.len() - 2) as f64;
    let (mass_se, quantile, chi2_per_dof) = if weighted {
        let chi2 = rss / dof;
        let z = Normal::standard().inverse_cdf(0.5 + CONFIDENCE / 2.0);
        ((chi2.max(1.0) / sxx).sqrt(), z, Some(chi2))
    } else {
        let t = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::Domain(e.to_string()))?
            .inverse_cdf(0.5 + CONFIDENCE / 2.0);
        ((rss / dof / sxx).sqrt(), t, None)
    };
    let mass = -slope;
    Ok(MassFit {
        mass,
        mass_se,
        ci_lo: mass - quantile * mass_se,
        ci_hi: mass + quantile * mass_se,
        intercept,
        used: pts.iter().map(|e| e.k).collect(),
        chi2_per_dof,
    })
}

/// `m_H / m_XY` with a delta-method interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassRatio {
    pub value: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn mass_ratio(height: &MassFit, spin: &MassFit) -> MassRatio {
    let value = height.mass / spin.mass;
    let se =
        value.abs() * ((height.mass_se / height.mass).powi(2) + (spin.mass_se / spin.mass).powi(2)).sqrt();
    let z = Normal::standard().inverse_cdf(0.5 + CONFIDENCE / 2.0);
    MassRatio {
        value,
        se,
        ci_lo: value - z * se,
        ci_hi: value + z * se,
    }
}

/// `{mass, ci_lo, ci_hi, window, n, beta, seed}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRecord {
    pub mass: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub window: [usize; 2],
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
}

impl FitRecord {
    pub fn new(fit: &MassFit, n: usize, beta: f64, seed: u64) -> Self {
        let (a, b) = fit.window();
        FitRecord {
            mass: fit.mass,
            ci_lo: fit.ci_lo,
            ci_hi: fit.ci_hi,
            window: [a, b],
            n,
            beta,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;
    use rand_distr::{Distribution, Normal as Gaussian};

    fn series(f: impl Fn(usize) -> (f64, f64), k_max: usize) -> SeriesEstimate {
        SeriesEstimate::new(
            "synthetic",
            (0..=k_max)
                .map(|k| {
                    let (estimate, se) = f(k);
                    SeriesEntry {
                        k,
                        estimate,
                        se,
                        n_samples: 1,
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn exact_exponential() {
        let s = series(|k| ((-0.3 * k as f64).exp(), 0.0), 12);
        let f = fit_mass(&s, FitWindow::asymptotic(24)).unwrap();
        assert!((f.mass - 0.3).abs() < 1e-12);
        assert!(f.ci_hi - f.ci_lo < 1e-10);
        assert_eq!(f.window(), (6, 12));
    }

    #[test]
    fn constant_series_has_zero_mass() {
        let s = series(|_| (0.5, 0.0), 12);
        let f = fit_mass(&s, FitWindow::asymptotic(24)).unwrap();
        assert!(f.mass.abs() < 1e-12);
        assert!(f.ci_lo <= 0.0 && f.ci_hi >= 0.0);
    }

    #[test]
    fn noisy_exponential_coverage() {
        let mut rng = chain_rng(21, 0);
        let noise = Gaussian::new(0.0, 0.01).unwrap();
        let mut covered = 0;
        for _ in 0..100 {
            let mut s = series(|k| ((-0.3 * k as f64).exp(), 0.01 * (-0.3 * k as f64).exp()), 12);
            for e in &mut s.entries {
                e.estimate *= 1.0 + noise.sample(&mut rng);
            }
            let f = fit_mass(&s, FitWindow::asymptotic(24)).unwrap();
            covered += (f.ci_lo <= 0.3 && 0.3 <= f.ci_hi) as u32;
        }
        assert!(covered >= 88, "{covered}/100");
    }

    #[test]
    fn too_few_points() {
        let s = series(|k| if k == 0 { (1.0, 0.0) } else { (0.0, 0.0) }, 12);
        assert!(matches!(
            fit_mass(&s, FitWindow::usable(24)),
            Err(Error::InsufficientData(0))
        ));
        let s = series(|k| ((-(k as f64)).exp(), 0.3 * (-(k as f64)).exp()), 12);
        assert!(matches!(
            fit_mass(&s, FitWindow::usable(24)),
            Err(Error::InsufficientData(0))
        ));
    }

    #[test]
    fn usable_window_stops_at_first_noisy_point() {
        let s = series(
            |k| {
                let v = (-0.5 * k as f64).exp();
                (v, if k < 5 { 0.01 * v } else { v })
            },
            12,
        );
        let f = fit_mass(&s, FitWindow::usable(24)).unwrap();
        assert_eq!(f.used, vec![1, 2, 3, 4]);
        assert!((f.mass - 0.5).abs() < 1e-9);
    }

    #[test]
    fn synthetic_ratio_is_two() {
        let a = series(|k| ((-0.2 * k as f64).exp(), 1e-3 * (-0.2 * k as f64).exp()), 12);
        let b = series(|k| ((-0.4 * k as f64).exp(), 1e-3 * (-0.4 * k as f64).exp()), 12);
        let w = FitWindow::asymptotic(24);
        let r = mass_ratio(&fit_mass(&b, w).unwrap(), &fit_mass(&a, w).unwrap());
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!(r.ci_lo < 2.0 && r.ci_hi > 2.0);
    }

    #[test]
    fn record_json() {
        let s = series(|k| ((-0.3 * k as f64).exp(), 0.0), 12);
        let f = fit_mass(&s, FitWindow::asymptotic(24)).unwrap();
        let rec = FitRecord::new(&f, 24, 0.5, 7);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"window\":[6,12]"));
        assert_eq!(serde_json::from_str::<FitRecord>(&json).unwrap(), rec);
    }
}

//! Distance series, decay-rate fits, the cycle inequalities and the
//! mass-identity demonstration.

mod demo;
mod fit;
mod inequalities;
mod series;
mod stats;

pub use demo::{main_theorem_demo, ratio_from_series, DemoConfig, DemoReport, RATIO_BAND};
pub use fit::{
    fit_mass, is_usable, mass_ratio, FitRecord, FitWindow, MassFit, MassRatio, CONFIDENCE, USABLE_SNR,
};
pub use inequalities::{
    cycle_two_point_inequality, inequality_checks, surrounding_sign_inequality, INEQUALITY_SIGMAS,
};
pub use series::{
    estimate_cov_series, estimate_sign_cov_series, estimate_two_point_series, CovSeries, SamplerKind,
    SeriesConfig, SeriesEntry, SeriesEstimate, SignCovSeries,
};
pub use stats::{chi_square_two_sample, jackknife_ratio, Accumulator, BatchMeans, ChiSquareTest};

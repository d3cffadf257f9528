//! The run configuration: one JSON document, overridable from flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xylab::estimators::{FitWindow, SamplerKind};
use xylab::oracle::TruncationPolicy;

use crate::CliError;

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "XYLAB_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    TwoPoint,
    Cov,
    SignCov,
}

impl Observable {
    pub fn file_stem(self) -> &'static str {
        match self {
            Observable::TwoPoint => "two_point",
            Observable::Cov => "cov",
            Observable::SignCov => "sign_cov",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Contiguous usable distances from `k = 1`.
    #[default]
    Usable,
    /// `[ceil(n/4), ceil(n/2)]`.
    Asymptotic,
}

impl WindowKind {
    pub fn window(self, n: usize) -> FitWindow {
        match self {
            WindowKind::Usable => FitWindow::usable(n),
            WindowKind::Asymptotic => FitWindow::asymptotic(n),
        }
    }
}

/// Every parameter a run depends on. Unset chain parameters fall back to
/// per-command defaults, which are written back before the config is
/// echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub n: usize,
    /// Largest distance in a series; defaults to `ceil(n/2)`.
    pub k_max: Option<usize>,
    pub observable: Option<Observable>,
    pub sampler: Option<SamplerKind>,
    pub sweeps: Option<u64>,
    pub burnin: Option<u64>,
    pub thin: Option<u64>,
    pub seed: u64,
    pub chains: u64,
    pub batches: u64,
    pub max_attempts: u64,
    /// Average covariance pairs over the bulk at this distance from the
    /// boundary.
    pub bulk_margin: Option<usize>,
    pub window: WindowKind,
    pub truncation: TruncationPolicy,
    pub tier: u8,
    pub inject_fault: bool,
    /// Demo on exact exponential series instead of sampled ones.
    pub synthetic: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta: 0.5,
            n: 8,
            k_max: None,
            observable: None,
            sampler: None,
            sweeps: None,
            burnin: None,
            thin: None,
            seed: 0,
            chains: 1,
            batches: 32,
            max_attempts: 1_000_000,
            bulk_margin: None,
            window: WindowKind::Usable,
            truncation: TruncationPolicy::default(),
            tier: 1,
            inject_fault: false,
            synthetic: false,
            out_dir: PathBuf::from("xylab-out"),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config document. An empty document is a usage error, as is
    /// any unknown key.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Usage("config document is empty".into()));
        }
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(self.n.div_ceil(2))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !self.beta.is_finite() || self.beta < 0.0 {
            return bad(format!("beta = {} must be finite and nonnegative", self.beta));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.k_max() > self.n {
            return bad(format!("k_max = {} exceeds n = {}", self.k_max(), self.n));
        }
        if let (Some(s), Some(b)) = (self.sweeps, self.burnin) {
            if s <= b {
                return bad(format!("sweeps = {s} must exceed burnin = {b}"));
            }
        }
        if self.thin == Some(0) {
            return bad("thin must be positive".into());
        }
        if self.chains == 0 || self.batches < 2 {
            return bad("need at least one chain and two batches".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        if !(1..=3).contains(&self.tier) {
            return bad(format!("tier {} is not 1, 2 or 3", self.tier));
        }
        if self.truncation.max_edge_mass == 0 || !(self.truncation.tail_tolerance > 0.0) {
            return bad("truncation policy must be positive".into());
        }
        Ok(())
    }

    /// The output directory after the environment override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.out_dir.clone(),
        }
    }
}

//! Streaming moments, batch means, jackknife ratios and a two-sample χ².

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Welford mean/variance accumulator; [`merge`](Self::merge) is exact up to
/// rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Accumulator) -> Accumulator {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Accumulator { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two values).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error assuming independent values.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Mean with a batch-means standard error for correlated streams. Values
/// are grouped into consecutive batches of fixed size; a trailing partial
/// batch contributes to the mean but not to the error.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    batch_size: u64,
    current: Accumulator,
    batches: Accumulator,
    all: Accumulator,
}

impl BatchMeans {
    pub fn new(batch_size: u64) -> Self {
        BatchMeans {
            batch_size: batch_size.max(1),
            current: Accumulator::new(),
            batches: Accumulator::new(),
            all: Accumulator::new(),
        }
    }

    /// Batch size giving `n_batches` batches for `n_values` values.
    pub fn for_total(n_values: u64, n_batches: u64) -> Self {
        BatchMeans::new((n_values / n_batches.max(1)).max(1))
    }

    pub fn push(&mut self, x: f64) {
        self.all.push(x);
        self.current.push(x);
        if self.current.count() == self.batch_size {
            self.batches.push(self.current.mean());
            self.current = Accumulator::new();
        }
    }

    pub fn count(&self) -> u64 {
        self.all.count()
    }

    pub fn mean(&self) -> f64 {
        self.all.mean()
    }

    pub fn batch_count(&self) -> u64 {
        self.batches.count()
    }

    pub fn std_error(&self) -> f64 {
        if self.batches.count() < 2 {
            return self.all.std_error();
        }
        self.batches.std_error()
    }
}

/// Ratio `sum(num) / sum(den)` over batches with its jackknife standard
/// error.
pub fn jackknife_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let (sn, sd): (f64, f64) = (num.iter().sum(), den.iter().sum());
    let full = if sd > 0.0 { sn / sd } else { 0.0 };
    let b = num.len();
    if b < 2 {
        return (full, 0.0);
    }
    let loo: Vec<f64> = (0..b)
        .map(|i| {
            let d = sd - den[i];
            if d > 0.0 {
                (sn - num[i]) / d
            } else {
                0.0
            }
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / b as f64;
    let var = loo.iter().map(|r| (r - mean).powi(2)).sum::<f64>() * (b - 1) as f64 / b as f64;
    (full, var.sqrt())
}

/// Outcome of a two-sample χ² homogeneity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Two-sample χ² test of equal distributions from histograms over the same
/// bins. Bins are pooled from both ends until each holds at least
/// `min_count` combined observations.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], alpha: f64, min_count: u64) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(Error::Domain("histograms must share bins".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InsufficientData(0));
    }
    // pool sparse bins into their neighbours
    let mut pooled: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        acc.0 += x;
        acc.1 += y;
        if acc.0 + acc.1 >= min_count {
            pooled.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let k1 = (nb / na).sqrt();
    let k2 = (na / nb).sqrt();
    let statistic: f64 = pooled
        .iter()
        .map(|&(x, y)| (k1 * x as f64 - k2 * y as f64).powi(2) / (x + y) as f64)
        .sum();
    let dof = pooled.len().saturating_sub(1);
    if dof == 0 {
        return Ok(ChiSquareTest {
            statistic,
            dof,
            critical: 0.0,
            pass: true,
        });
    }
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .inverse_cdf(1.0 - alpha);
    Ok(ChiSquareTest {
        statistic,
        dof,
        critical,
        pass: statistic <= critical,
    })
}

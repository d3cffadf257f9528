//! Scalar series: the per-edge current weights, the height potential,
//! Poisson tails and simplex masses.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

const REL_EPS: f64 = 1e-17;

/// Total weight of the pair `(n_uv, n_vu)` with fixed net flow
/// `d = n_uv - n_vu`, each orientation weighted by its source budget:
/// `sum_m t_u^{m+d+}/(m+d+)! * t_v^{m+d-}/(m+d-)!`.
pub fn pair_weight(t_u: f64, t_v: f64, d: i64) -> f64 {
    let (a, b, k) = if d >= 0 {
        (t_u, t_v, d as u64)
    } else {
        (t_v, t_u, (-d) as u64)
    };
    if k > 0 && a == 0.0 {
        return 0.0;
    }
    let first = if k == 0 {
        1.0
    } else {
        (k as f64 * a.ln() - ln_factorial(k)).exp()
    };
    if first == 0.0 {
        return 0.0;
    }
    let ab = a * b;
    let mut term = first;
    let mut sum = first;
    let mut m = 0u64;
    if ab > 0.0 {
        loop {
            term *= ab / (((m + k + 1) * (m + 1)) as f64);
            sum += term;
            m += 1;
            if term < REL_EPS * sum {
                break;
            }
        }
    }
    sum
}

/// `-log sum_k (β/2)^{|a|+2k} / ((|a|+k)! k!)`, i.e. `-log I_|a|(β)`,
/// summed directly until the relative increment drops below 1e-15.
pub fn phi_potential(beta: f64, a: i64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("phi_potential needs beta > 0, got {beta}")));
    }
    let k0 = a.unsigned_abs();
    let half = beta / 2.0;
    let log_first = k0 as f64 * half.ln() - ln_factorial(k0);
    // sum of term ratios relative to the first term
    let q = half * half;
    let mut ratio = 1.0;
    let mut sum = 1.0;
    let mut k = 0u64;
    loop {
        ratio *= q / (((k0 + k + 1) * (k + 1)) as f64);
        sum += ratio;
        k += 1;
        if ratio < REL_EPS * sum {
            break;
        }
    }
    Ok(-(log_first + sum.ln()))
}

/// `P[Poisson(λ) > d]`, summed from the tail side.
pub fn poisson_upper_tail(lambda: f64, d: u64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let k = d + 1;
    let mut term = (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp();
    let mut sum = term;
    let mut j = k;
    while term > REL_EPS * sum && term > 0.0 {
        j += 1;
        term *= lambda / j as f64;
        sum += term;
    }
    sum
}

/// `ρ_k([0, λ]) = λ^k / k!`; the Dirac mass at 0 for `k = 0`.
pub fn simplex_cdf(k: u32, lambda: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    (k as f64 * lambda.ln() - ln_factorial(k as u64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // I_0(1), I_1(1), I_2(1): mpmath besseli to 20 digits.
    const I0_1: f64 = 1.266_065_877_752_008_4;
    const I1_1: f64 = 0.565_159_103_992_485;

    #[test]
    fn phi_at_beta_one() {
        assert!((phi_potential(1.0, 0).unwrap() + I0_1.ln()).abs() < 1e-14);
        assert!((phi_potential(1.0, 1).unwrap() + I1_1.ln()).abs() < 1e-14);
        assert!((phi_potential(1.0, 0).unwrap() - (-0.235_914_358_507_178_6)).abs() < 1e-13);
        assert!((phi_potential(1.0, 1).unwrap() - 0.570_647_987_490_831_3).abs() < 1e-13);
        assert!((phi_potential(1.0, 2).unwrap() - 1.996_957_485_935_767_3).abs() < 1e-13);
    }

    #[test]
    fn phi_symmetric_and_convex() {
        for beta in [0.5, 1.0, 2.0] {
            assert_eq!(phi_potential(beta, 2).unwrap(), phi_potential(beta, -2).unwrap());
            let mut last = f64::NEG_INFINITY;
            for a in 0..=10 {
                let inc = phi_potential(beta, a + 1).unwrap() - phi_potential(beta, a).unwrap();
                assert!(inc > last, "beta={beta} a={a}");
                last = inc;
            }
        }
        assert!(phi_potential(0.0, 1).is_err());
        assert!(phi_potential(-1.0, 0).is_err());
    }

    #[test]
    fn pair_weight_is_bessel_at_symmetric_budgets() {
        // T_u = T_v = 1/2: sum_m (1/2)^{2m+|d|}/((m+|d|)! m!) = I_|d|(1)
        assert!((pair_weight(0.5, 0.5, 0) - I0_1).abs() < 1e-15);
        assert!((pair_weight(0.5, 0.5, 1) - I1_1).abs() < 1e-15);
        assert!((pair_weight(0.5, 0.5, -1) - I1_1).abs() < 1e-15);
        assert_eq!(pair_weight(0.0, 0.7, 1), 0.0);
        assert!((pair_weight(0.0, 0.7, -2) - 0.49 / 2.0).abs() < 1e-15);
        assert_eq!(pair_weight(0.0, 0.0, 0), 1.0);
    }

    #[test]
    fn pair_weights_sum_to_exponential() {
        let (a, b) = (0.3, 0.8);
        let total: f64 = (-40..=40).map(|d| pair_weight(a, b, d)).sum();
        assert!((total - (a + b).exp()).abs() < 1e-13);
    }

    #[test]
    fn poisson_tail() {
        assert!((poisson_upper_tail(1.0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let direct: f64 = 1.0
            - (0..=3)
                .map(|k| (-2.0f64).exp() * 2f64.powi(k) / [1.0, 1.0, 2.0, 6.0][k as usize])
                .sum::<f64>();
        assert!((poisson_upper_tail(2.0, 3) - direct).abs() < 1e-14);
        assert_eq!(poisson_upper_tail(0.0, 3), 0.0);
    }

    #[test]
    fn simplex_cdf_examples() {
        assert!((simplex_cdf(2, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(simplex_cdf(0, 7.0), 1.0);
        assert!((simplex_cdf(1, 0.3) - 0.3).abs() < 1e-15);
    }
}

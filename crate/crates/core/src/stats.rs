//! Shared statistical utilities: normal and chi-squared distribution
//! functions, empirical quantiles, Kolmogorov-Smirnov distances, and the
//! binomial confidence arithmetic used by the risk estimators.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile function.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Chi-squared CDF with `k` degrees of freedom.
pub fn chi_squared_cdf(x: f64, k: f64) -> f64 {
    ChiSquared::new(k).expect("degrees of freedom must be positive").cdf(x)
}

/// Chi-squared quantile with `k` degrees of freedom.
pub fn chi_squared_quantile(p: f64, k: f64) -> f64 {
    ChiSquared::new(k)
        .expect("degrees of freedom must be positive")
        .inverse_cdf(p)
}

/// Sample mean and (population) standard deviation.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Empirical quantile with the "higher" order statistic convention:
/// the value at index `ceil(p * (len - 1))` of the sorted sample, so the
/// realized exceedance level never undershoots the nominal one.
pub fn quantile_higher(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let idx = (p * (sorted.len() - 1) as f64).ceil() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// One-sample Kolmogorov-Smirnov statistic of `sorted` against `cdf`.
pub fn ks_statistic_one_sample(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic; both inputs must be sorted.
pub fn ks_statistic_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // Step past all copies of the smaller value (ties advance both).
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic one-sample KS critical value at significance `alpha`.
pub fn ks_one_sample_critical(alpha: f64, n: usize) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_two_sample_critical(alpha: f64, n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    ks_coefficient(alpha) * ((n1 + n2) / (n1 * n2)).sqrt()
}

/// Standard error of a binomial proportion with `k` successes out of `n`,
/// with a half-count continuity correction at the boundaries so the error
/// never degenerates to zero.
pub fn binomial_se(k: u64, n: u64) -> f64 {
    let n_f = n as f64;
    let k_adj = (k as f64).clamp(0.5, n_f - 0.5);
    let p = k_adj / n_f;
    (p * (1.0 - p) / n_f).sqrt()
}

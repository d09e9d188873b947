//! Goodness-of-fit metrics shared by the measure and open-system layers.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and
/// `cdf`. Sorts `sample` in place.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> Result<f64, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    sample.sort_by(f64::total_cmp);
    Ok(ks_sorted(sample, sample.len(), f64::INFINITY, cdf))
}

/// KS distance over `[0, horizon]` for a sample of size `n` of which only
/// the `sorted` values fell inside the horizon.
pub fn ks_sorted(sorted: &[f64], n: usize, horizon: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let n_f = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // collapse ties so the empirical CDF is evaluated at its jumps
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max(f - i as f64 / n_f).max(j as f64 / n_f - f);
        i = j;
    }
    if sorted.len() < n {
        // the ECDF stays at m/n up to the horizon
        d = d.max(cdf(horizon) - sorted.len() as f64 / n_f);
    }
    d
}

pub fn exp1_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -(-t).exp_m1()
    }
}

/// Poisson(λ) probabilities for `k = 0..lump`, with the last entry holding
/// `P(K ≥ lump)`.
pub fn poisson_pmf_lumped(lambda: f64, lump: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(lump + 1);
    let mut term = (-lambda).exp();
    let mut acc = 0.0;
    for k in 0..lump {
        p.push(term);
        acc += term;
        term *= lambda / (k + 1) as f64;
    }
    p.push((1.0 - acc).max(0.0));
    p
}

/// Total variation distance between the empirical law of `counts` and
/// Poisson(λ), lumping `k ≥ lump` into one cell.
pub fn tv_poisson(counts: &[u64], lambda: f64, lump: usize) -> Result<f64, StatsError> {
    if counts.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut hist = vec![0u64; lump + 1];
    for &c in counts {
        hist[(c as usize).min(lump)] += 1;
    }
    let n = counts.len() as f64;
    let emp: Vec<f64> = hist.iter().map(|&h| h as f64 / n).collect();
    Ok(tv_poisson_pmf(&emp, lambda))
}

/// Total variation distance between a lumped pmf and Poisson(λ) lumped at
/// the same cell.
pub fn tv_poisson_pmf(pmf: &[f64], lambda: f64) -> f64 {
    let poisson = poisson_pmf_lumped(lambda, pmf.len() - 1);
    0.5 * pmf.iter().zip(&poisson).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Pearson correlation; `None` when either series is constant or the inputs
/// are shorter than two.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

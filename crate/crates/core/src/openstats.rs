//! Hitting-time statistics for a hole on the boundary: the rescaled point
//! process of hits, first-hitting law, counts on intervals, short returns and
//! the quasi-section defect.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{orbit, PhasePoint, Terminal};
use crate::geometry::{CurvatureKind, Hole, Table};
use crate::inducing::{base_rule, in_base, ExtendedPhasePoint};
use crate::measure::{hole_measure, par_chunks, SrbSampler};
use crate::stats::{exp1_cdf, ks_sorted, pearson, tv_poisson, StatsError};

/// Default normalized-time horizon.
pub const DEFAULT_T_MAX: f64 = 50.0;

/// Poisson cells beyond this count are lumped.
pub const TV_LUMP: usize = 20;

/// Default exponent slack in the short-return window `μ^{-(1-ε)}`.
pub const DEFAULT_SHORT_EPS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpenStatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("no hole hits to evaluate")]
    NoHits,
    #[error("intervals must be bounded, non-negative, non-empty and disjoint: {0:?}")]
    InvalidIntervals(Vec<(f64, f64)>),
}

impl From<StatsError> for OpenStatsError {
    fn from(_: StatsError) -> Self {
        OpenStatsError::EmptySample
    }
}

/// Rescaled hit times of one orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingSeries {
    /// Orbit index, also its RNG stream.
    pub orbit: u64,
    pub initial: PhasePoint,
    /// Iterates `i ≥ 1` with `f^i x ∈ hole`.
    pub hits: Vec<u64>,
    /// `i · μ(hole)` for each hit.
    pub times: Vec<f64>,
    pub terminal: Terminal,
    /// Normalized time up to which the orbit was followed.
    pub observed_until: f64,
}

impl HittingSeries {
    pub fn first_hit(&self) -> Option<f64> {
        self.times.first().copied()
    }

    /// Orbit stopped by a singularity before its first hit.
    pub fn censored_before_first_hit(&self) -> bool {
        self.times.is_empty() && matches!(self.terminal, Terminal::CensoredSingular { .. } | Terminal::CensoredHorizon { .. })
    }
}

pub fn horizon_collisions(t_max: f64, mu: f64) -> u64 {
    (t_max / mu).ceil() as u64
}

/// Follow `n_orbits` SRB orbits for `ceil(t_max / μ)` collisions, orbit `k`
/// drawing its initial condition from stream `k`.
pub fn collect_hitting(t: &Table, h: &Hole, n_orbits: usize, t_max: f64, seed: u64) -> Vec<HittingSeries> {
    let mu = hole_measure(t, h);
    let horizon = horizon_collisions(t_max, mu);
    (0..n_orbits as u64)
        .into_par_iter()
        .map(|k| {
            let x0 = SrbSampler::new(t, seed, k).sample();
            let rec = orbit(t, x0, horizon, Some(h));
            HittingSeries {
                orbit: k,
                initial: x0,
                times: rec.hits.iter().map(|&i| i as f64 * mu).collect(),
                hits: rec.hits,
                terminal: rec.terminal,
                observed_until: rec.steps as f64 * mu,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub t: f64,
    pub empirical: f64,
    pub exponential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub rows: Vec<SurvivalRow>,
    pub used: usize,
    /// Orbits censored before their first hit.
    pub excluded: usize,
}

/// Empirical `P(τ μ > t)` on `t_grid`, dropping orbits censored before their
/// first hit.
pub fn survival_curve(series: &[HittingSeries], t_grid: &[f64]) -> SurvivalCurve {
    let mut firsts: Vec<f64> = Vec::new();
    let mut excluded = 0;
    for s in series {
        if s.censored_before_first_hit() {
            excluded += 1;
        } else {
            firsts.push(s.first_hit().unwrap_or(f64::INFINITY));
        }
    }
    firsts.sort_by(f64::total_cmp);
    let n = firsts.len();
    let rows = t_grid
        .iter()
        .map(|&t| {
            let at_or_below = firsts.partition_point(|&x| x <= t);
            SurvivalRow {
                t,
                empirical: if n == 0 { 0.0 } else { (n - at_or_below) as f64 / n as f64 },
                exponential: (-t).exp(),
            }
        })
        .collect();
    SurvivalCurve {
        rows,
        used: n,
        excluded,
    }
}

/// KS distance of a fully observed sample to Exp(1).
pub fn ks_exp1(first_hits: &[f64]) -> Result<f64, OpenStatsError> {
    if first_hits.is_empty() {
        return Err(OpenStatsError::EmptySample);
    }
    let mut v = first_hits.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(ks_sorted(&v, v.len(), f64::INFINITY, exp1_cdf))
}

/// KS distance to Exp(1) of the first hits over `[0, t_max]`, orbits
/// without a hit inside the horizon counting as survivors.
pub fn first_hit_ks(series: &[HittingSeries], t_max: f64) -> Result<f64, OpenStatsError> {
    let used: Vec<&HittingSeries> = series.iter().filter(|s| !s.censored_before_first_hit()).collect();
    if used.is_empty() {
        return Err(OpenStatsError::EmptySample);
    }
    let mut firsts: Vec<f64> = used.iter().filter_map(|s| s.first_hit()).filter(|&x| x <= t_max).collect();
    firsts.sort_by(f64::total_cmp);
    Ok(ks_sorted(&firsts, used.len(), t_max, exp1_cdf))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalStats {
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
    pub tv_poisson: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub first: usize,
    pub second: usize,
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTable {
    pub intervals: Vec<(f64, f64)>,
    /// `(orbit, per-interval counts)` for orbits observed past every interval.
    pub counts: Vec<(u64, Vec<u64>)>,
    pub excluded: usize,
    pub per_interval: Vec<IntervalStats>,
    pub correlations: Vec<PairCorrelation>,
}

fn check_intervals(iv: &[(f64, f64)]) -> Result<(), OpenStatsError> {
    let mut sorted = iv.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ok = !iv.is_empty()
        && iv.iter().all(|&(a, b)| a >= 0.0 && a < b && b.is_finite())
        && sorted.windows(2).all(|w| w[0].1 <= w[1].0);
    if ok {
        Ok(())
    } else {
        Err(OpenStatsError::InvalidIntervals(iv.to_vec()))
    }
}

/// Counts of rescaled hits in each `(lo, hi]`, with their Poisson distance and
/// pairwise correlations.
pub fn count_statistics(series: &[HittingSeries], intervals: &[(f64, f64)]) -> Result<CountTable, OpenStatsError> {
    check_intervals(intervals)?;
    let end = intervals.iter().map(|iv| iv.1).fold(0.0, f64::max);
    let mut counts = Vec::new();
    let mut excluded = 0;
    for s in series {
        if s.observed_until < end {
            excluded += 1;
            continue;
        }
        let c: Vec<u64> = intervals
            .iter()
            .map(|&(a, b)| s.times.iter().filter(|&&x| x > a && x <= b).count() as u64)
            .collect();
        counts.push((s.orbit, c));
    }
    if counts.is_empty() {
        return Err(OpenStatsError::EmptySample);
    }
    let column = |j: usize| counts.iter().map(|(_, c)| c[j]).collect::<Vec<u64>>();
    let mut per_interval = Vec::new();
    for (j, &(a, b)) in intervals.iter().enumerate() {
        let col = column(j);
        per_interval.push(IntervalStats {
            lo: a,
            hi: b,
            mean: col.iter().sum::<u64>() as f64 / col.len() as f64,
            tv_poisson: tv_poisson(&col, b - a, TV_LUMP)?,
        });
    }
    let mut correlations = Vec::new();
    for i in 0..intervals.len() {
        for j in i + 1..intervals.len() {
            let x: Vec<f64> = column(i).into_iter().map(|v| v as f64).collect();
            let y: Vec<f64> = column(j).into_iter().map(|v| v as f64).collect();
            correlations.push(PairCorrelation {
                first: i,
                second: j,
                pearson: pearson(&x, &y),
            });
        }
    }
    Ok(CountTable {
        intervals: intervals.to_vec(),
        counts,
        excluded,
        per_interval,
        correlations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShortReturnReport {
    pub fraction: f64,
    /// Window in induced steps.
    pub p: u64,
    pub samples: usize,
    pub short: usize,
    pub censored: usize,
}

pub fn short_return_window(mu: f64, eps: f64) -> u64 {
    mu.powf(-(1.0 - eps)).ceil() as u64
}

/// Fraction of hole points whose forward orbit meets the hole again before
/// `p` further base entries have been completed, `p = ceil(μ^{-(1-ε)})`.
/// Hits inside the current excursion count as short returns.
pub fn short_return_fraction(t: &Table, h: &Hole, eps: f64, n_hits: usize, seed: u64) -> Result<ShortReturnReport, OpenStatsError> {
    if n_hits == 0 {
        return Err(OpenStatsError::NoHits);
    }
    let p = short_return_window(hole_measure(t, h), eps);
    let cap = 100 * p + 100_000;
    let parts = par_chunks(n_hits, |chunk, len| {
        let mut sampler = SrbSampler::new(t, seed, chunk);
        let (mut short, mut censored) = (0usize, 0usize);
        for _ in 0..len {
            let mut x = ExtendedPhasePoint::start(t, sampler.sample_in_hole(h));
            let mut entries = 0;
            let mut outcome = None;
            for _ in 0..cap {
                match x.advance(t) {
                    Ok(y) => x = y,
                    Err(_) => break,
                }
                if in_base(t, &x) {
                    entries += 1;
                    if entries > p {
                        outcome = Some(false);
                        break;
                    }
                }
                if h.contains(x.point.s) {
                    outcome = Some(true);
                    break;
                }
            }
            match outcome {
                Some(true) => short += 1,
                Some(false) => {}
                None => censored += 1,
            }
        }
        vec![(short, censored)]
    });
    let short: usize = parts.iter().map(|p| p.0).sum();
    let censored: usize = parts.iter().map(|p| p.1).sum();
    let used = n_hits - censored;
    if used == 0 {
        return Err(OpenStatsError::NoHits);
    }
    Ok(ShortReturnReport {
        fraction: short as f64 / used as f64,
        p,
        samples: used,
        short,
        censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiSectionReport {
    pub host: CurvatureKind,
    /// `P(excursion through x hits the hole ≥ 2 times | x ∈ hole)`.
    pub relative: f64,
    /// `relative · μ(hole)`.
    pub absolute: f64,
    /// Fraction of hole-hitting excursions with at least two hits.
    pub excursion_fraction: f64,
    pub samples: usize,
    pub censored: usize,
}

/// Number of hole visits in the excursion containing `x`, or `None` when the
/// excursion runs into a singularity or past `cap` collisions either way.
pub fn excursion_hits(t: &Table, h: &Hole, x: PhasePoint, cap: u64) -> Option<u64> {
    let mut hits = 1;
    // backward: y_k = f^k(Ix) sits where f^{-k}x does
    let mut y = ExtendedPhasePoint::start(t, x.reversed());
    let mut k = 0;
    loop {
        let next = y.advance(t).ok()?;
        if k > 0 && h.contains(y.point.s) {
            hits += 1;
        }
        if base_rule(t, y.current, Some(next.current)) {
            break;
        }
        y = next;
        k += 1;
        if k > cap {
            return None;
        }
    }
    // forward until the next base entry
    let mut z = ExtendedPhasePoint::start(t, x);
    for _ in 0..cap {
        z = z.advance(t).ok()?;
        if in_base(t, &z) {
            return Some(hits);
        }
        if h.contains(z.point.s) {
            hits += 1;
        }
    }
    None
}

/// Non-injectivity of the hole onto the base: how often the excursion
/// through a hole point visits the hole more than once.
pub fn quasi_section_defect(t: &Table, h: &Hole, n_samples: usize, seed: u64) -> QuasiSectionReport {
    let cap = 100_000;
    let parts = par_chunks(n_samples, |chunk, len| {
        let mut sampler = SrbSampler::new(t, seed, chunk);
        (0..len)
            .map(|_| excursion_hits(t, h, sampler.sample_in_hole(h), cap))
            .collect()
    });
    let ks: Vec<u64> = parts.iter().flatten().copied().collect();
    let censored = parts.len() - ks.len();
    let n = ks.len().max(1) as f64;
    let multi = ks.iter().filter(|&&k| k >= 2).count() as f64;
    let relative = multi / n;
    // each excursion with k hits is sampled k times as often
    let inv: f64 = ks.iter().map(|&k| 1.0 / k as f64).sum();
    let inv_multi: f64 = ks.iter().filter(|&&k| k >= 2).map(|&k| 1.0 / k as f64).sum();
    QuasiSectionReport {
        host: h.kind(t),
        relative,
        absolute: relative * hole_measure(t, h),
        excursion_fraction: if inv > 0.0 { inv_multi / inv } else { 0.0 },
        samples: ks.len(),
        censored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_table, make_hole, TableSpec, Vec2};
    use approx::assert_abs_diff_eq;

    fn sinai() -> Table {
        build_table(&TableSpec::SinaiTorus {
            centers: vec![Vec2::new(0.5, 0.5)],
            radii: vec![0.2],
        })
        .unwrap()
    }

    fn series(times: &[f64], observed: f64) -> HittingSeries {
        HittingSeries {
            orbit: 0,
            initial: PhasePoint::default(),
            hits: (1..=times.len() as u64).collect(),
            times: times.to_vec(),
            terminal: Terminal::Completed,
            observed_until: observed,
        }
    }

    #[test]
    fn hit_times_are_multiples_of_the_measure() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        let mu = hole_measure(&t, &h);
        for s in collect_hitting(&t, &h, 50, 5.0, 9) {
            for (i, x) in s.hits.iter().zip(&s.times) {
                assert_eq!(*x, *i as f64 * mu);
            }
            assert!(s.hits.windows(2).all(|w| w[0] < w[1]));
            assert!(s.times.iter().all(|&x| x >= mu));
        }
    }

    #[test]
    fn zero_horizon_gives_empty_series() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        assert!(collect_hitting(&t, &h, 10, 0.0, 1).iter().all(|s| s.times.is_empty()));
    }

    #[test]
    fn hit_at_iterate_250_of_a_one_percent_hole() {
        assert_eq!(250.0 * 0.01, 2.5);
        assert_eq!(horizon_collisions(5.0, 0.01), 500);
    }

    #[test]
    fn collection_does_not_depend_on_thread_count() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        let a = collect_hitting(&t, &h, 64, 5.0, 3);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| collect_hitting(&t, &h, 64, 5.0, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn survival_edges() {
        let s = vec![series(&[0.5], 5.0), series(&[0.7, 2.0], 5.0)];
        let c = survival_curve(&s, &[0.0, 1.0]);
        assert_eq!(c.rows[0].empirical, 1.0);
        assert_eq!(c.rows[1].empirical, 0.0);
        assert_eq!(c.rows[0].exponential, 1.0);
    }

    #[test]
    fn survivors_and_censored_orbits() {
        let mut censored = series(&[], 0.3);
        censored.terminal = Terminal::CensoredHorizon { step: 3 };
        let s = vec![series(&[0.5], 5.0), series(&[], 5.0), censored];
        let c = survival_curve(&s, &[1.0]);
        assert_eq!((c.used, c.excluded), (2, 1));
        assert_eq!(c.rows[0].empirical, 0.5);
    }

    #[test]
    fn ks_examples() {
        assert_abs_diff_eq!(ks_exp1(&[2f64.ln()]).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(ks_exp1(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ks_exp1(&[]), Err(OpenStatsError::EmptySample));
    }

    #[test]
    fn counts_all_zero_against_poisson() {
        let s: Vec<_> = (0..10).map(|_| series(&[3.0], 5.0)).collect();
        let ct = count_statistics(&s, &[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_abs_diff_eq!(ct.per_interval[0].tv_poisson, 1.0 - (-1f64).exp(), epsilon = 1e-12);
        assert_eq!(ct.correlations[0].pearson, None);
    }

    #[test]
    fn counts_exclude_short_orbits() {
        let s = vec![series(&[0.5, 1.5], 5.0), series(&[0.2], 1.5)];
        let ct = count_statistics(&s, &[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(ct.excluded, 1);
        assert_eq!(ct.counts, vec![(0, vec![1, 1])]);
    }

    #[test]
    fn overlapping_intervals_rejected() {
        let s = vec![series(&[0.5], 5.0)];
        assert!(count_statistics(&s, &[(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(count_statistics(&s, &[(1.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn short_returns_need_samples() {
        let t = sinai();
        let h = make_hole(&t, 0.0, 0.05).unwrap();
        assert_eq!(short_return_fraction(&t, &h, 0.1, 0, 1), Err(OpenStatsError::NoHits));
    }

    #[test]
    fn window_formula() {
        assert_eq!(short_return_window(0.01, 0.1), 64);
        assert_eq!(short_return_window(0.5, 0.0), 2);
    }

    #[test]
    fn stadium_bouncing_hole_returns_immediately() {
        // huge hole centred on the bottom flat: bouncing orbits come straight back
        let t = build_table(&TableSpec::Stadium {
            flat_length: 2.0,
            half_height: None,
        })
        .unwrap();
        let h = make_hole(&t, 1.0, 0.99).unwrap();
        let r = short_return_fraction(&t, &h, 0.1, 2000, 4).unwrap();
        assert!(r.fraction > 0.8, "{r:?}");
    }

    #[test]
    fn sinai_quasi_section_defect_is_zero() {
        let t = sinai();
        let h = make_hole(&t, 0.3, 0.05).unwrap();
        let q = quasi_section_defect(&t, &h, 2000, 5);
        assert_eq!(q.relative, 0.0);
        assert_eq!(q.absolute, 0.0);
        assert_eq!(q.censored, 0);
        assert_eq!(q.host, CurvatureKind::Dispersing);
    }
}

//! Hitting experiments and diagnostics driven by one config.

use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use billiards_core::cones::ConeScanReport;
use billiards_core::inducing::{sample_returns, tail_slope, KacReport, TailRow};
use billiards_core::measure::InvarianceReport;
use billiards_core::openstats::{
    first_hit_ks, survival_curve, IntervalStats, PairCorrelation, QuasiSectionReport,
    ShortReturnReport,
};
use billiards_core::{
    collect_hitting, cone_invariance_scan, count_statistics, invariance_defect, quasi_section_defect,
    short_return_fraction, Hole, Table, Terminal,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, Thresholds, Validated};
use crate::output;

/// Independent seed per task, all derived from the config seed.
pub fn task_seed(seed: u64, task: Task) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add((task as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
pub enum Task {
    Hitting,
    Cones,
    Kac,
    Invariance,
    ShortReturns,
    QuasiSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct Censoring {
    pub orbits: usize,
    pub singular: usize,
    pub horizon: usize,
    /// Singular or horizon-censored before the first hit.
    pub before_first_hit: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSummary {
    pub radius: f64,
    pub measure: f64,
    pub dir: String,
    pub ks: Option<f64>,
    pub survival_at_1: Option<f64>,
    pub tv: Vec<IntervalStats>,
    pub correlations: Vec<PairCorrelation>,
    pub count_orbits_excluded: usize,
    pub censoring: Censoring,
    pub short_returns: Option<ShortReturnReport>,
    pub quasi_section: Option<QuasiSectionReport>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InducingSummary {
    pub kac: KacReport,
    pub tail_slope_10_1000: Option<f64>,
    pub max_return: u64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub version: u32,
    pub table: &'static str,
    pub seed: u64,
    /// First-hit KS at the smallest radius.
    pub ks: Option<f64>,
    /// Count TV on the first interval at the smallest radius.
    pub tv: Option<f64>,
    pub kac_defect: Option<f64>,
    pub cone_violations: Option<usize>,
    pub radii: Vec<RadiusSummary>,
    pub cones: Option<ConeScanReport>,
    pub inducing: Option<InducingSummary>,
    pub invariance: Option<InvarianceReport>,
    pub breaches: Vec<String>,
    pub runtime_s: f64,
}

/// Run everything the config asks for and write all artifacts under `out`.
pub fn run(cfg: &ExperimentConfig, v: &Validated, out: &Path) -> Result<Summary> {
    let start = Instant::now();
    output::prepare_dir(out)?;
    output::write_json(&out.join("manifest.json"), &output::Manifest::new(cfg))?;

    let mut radii = Vec::new();
    for (i, h) in v.holes.iter().enumerate() {
        radii.push(run_radius(cfg, &v.table, h, &out.join(radius_dir(i, h.radius)))?);
    }
    let cones = cfg.checks.cones.then(|| cones(cfg, &v.table));
    let inducing = if cfg.checks.kac {
        Some(inducing(cfg, &v.table, out)?)
    } else {
        None
    };
    let invariance = cfg.checks.invariance.then(|| invariance(cfg, &v.table));

    let smallest = radii.last();
    let mut summary = Summary {
        version: crate::config::SCHEMA_VERSION,
        table: v.table.class().name(),
        seed: cfg.run.seed,
        ks: smallest.and_then(|r| r.ks),
        tv: smallest.and_then(|r| r.tv.first()).map(|s| s.tv_poisson),
        kac_defect: inducing.as_ref().map(|i| i.kac.defect),
        cone_violations: cones.as_ref().map(ConeScanReport::violations),
        radii,
        cones,
        inducing,
        invariance,
        breaches: Vec::new(),
        runtime_s: 0.0,
    };
    summary.breaches = breaches(&summary, &cfg.thresholds);
    summary.runtime_s = start.elapsed().as_secs_f64();
    output::write_json(&out.join("diagnostics.json"), &output::Diagnostics::from(&summary))?;
    output::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn radius_dir(index: usize, r: f64) -> String {
    format!("r{index}_{r}")
}

fn run_radius(cfg: &ExperimentConfig, t: &Table, h: &Hole, dir: &Path) -> Result<RadiusSummary> {
    let start = Instant::now();
    let run = &cfg.run;
    let series = collect_hitting(t, h, run.n_orbits, run.t_max, task_seed(run.seed, Task::Hitting));
    let grid = survival_grid(run.t_max);
    let survival = survival_curve(&series, &grid);
    let intervals: Vec<(f64, f64)> = run.intervals.iter().map(|[a, b]| (*a, *b)).collect();
    let counts = if intervals.is_empty() {
        None
    } else {
        count_statistics(&series, &intervals).ok()
    };

    output::prepare_dir(dir)?;
    output::write_hits(&dir.join("hits.csv"), &series)?;
    output::write_survival(&dir.join("survival.csv"), &survival.rows)?;
    if let Some(c) = &counts {
        output::write_counts(&dir.join("counts.csv"), c)?;
    }

    let mut censoring = Censoring {
        orbits: series.len(),
        singular: 0,
        horizon: 0,
        before_first_hit: 0,
    };
    for s in &series {
        match s.terminal {
            Terminal::CensoredSingular { .. } => censoring.singular += 1,
            Terminal::CensoredHorizon { .. } => censoring.horizon += 1,
            Terminal::Completed => {}
        }
        censoring.before_first_hit += usize::from(s.censored_before_first_hit());
    }
    let short_returns = if cfg.checks.short_returns {
        short_return_fraction(
            t,
            h,
            cfg.checks.short_return_eps,
            cfg.checks.short_return_hits,
            task_seed(run.seed, Task::ShortReturns),
        )
        .ok()
    } else {
        None
    };
    let quasi_section = cfg.checks.quasi_section.then(|| {
        quasi_section_defect(t, h, cfg.checks.quasi_section_samples, task_seed(run.seed, Task::QuasiSection))
    });
    Ok(RadiusSummary {
        radius: h.radius,
        measure: h.measure,
        dir: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        ks: first_hit_ks(&series, run.t_max).ok(),
        survival_at_1: (run.t_max >= 1.0).then(|| survival_curve(&series, &[1.0]).rows[0].empirical),
        tv: counts.as_ref().map(|c| c.per_interval.clone()).unwrap_or_default(),
        correlations: counts.as_ref().map(|c| c.correlations.clone()).unwrap_or_default(),
        count_orbits_excluded: counts.as_ref().map_or(0, |c| c.excluded),
        censoring,
        short_returns,
        quasi_section,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Grid of step 0.05 over `[0, t_max]`.
fn survival_grid(t_max: f64) -> Vec<f64> {
    let n = (t_max / 0.05).floor() as usize;
    (0..=n).map(|k| k as f64 * 0.05).collect()
}

pub fn cones(cfg: &ExperimentConfig, t: &Table) -> ConeScanReport {
    cone_invariance_scan(
        t,
        cfg.checks.cone_points,
        cfg.checks.cone_vectors,
        task_seed(cfg.run.seed, Task::Cones),
    )
}

pub fn invariance(cfg: &ExperimentConfig, t: &Table) -> InvarianceReport {
    invariance_defect(t, cfg.checks.invariance_samples, task_seed(cfg.run.seed, Task::Invariance))
}

/// Kac defect plus the return-time tail, written to `tail.csv`.
pub fn inducing(cfg: &ExperimentConfig, t: &Table, out: &Path) -> Result<InducingSummary> {
    let start = Instant::now();
    let st = sample_returns(
        t,
        cfg.checks.kac_samples,
        cfg.checks.return_cap,
        task_seed(cfg.run.seed, Task::Kac),
    );
    let tail: Vec<TailRow> = st.tail();
    output::write_tail(&out.join("tail.csv"), &tail)?;
    Ok(InducingSummary {
        kac: KacReport {
            defect: st.kac_defect(),
            mean_return: st.mean_return(),
            base_fraction: st.base_fraction(),
            censored_fraction: st.censored_fraction(),
            base_hits: st.base_hits,
        },
        tail_slope_10_1000: tail_slope(&tail, 10, 1000),
        max_return: tail.last().map_or(0, |r| r.n),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Threshold breaches, one line each; a missing statistic never breaches.
pub fn breaches(s: &Summary, th: &Thresholds) -> Vec<String> {
    let mut out = Vec::new();
    let mut above = |name: &str, value: Option<f64>, limit: Option<f64>| {
        if let (Some(v), Some(l)) = (value, limit) {
            if !(v < l) {
                out.push(format!("{name} {v} >= {l}"));
            }
        }
    };
    above("ks", s.ks, th.ks);
    above("tv", s.tv, th.tv);
    above("kac_defect", s.kac_defect, th.kac_defect);
    if let Some(inv) = &s.invariance {
        above("invariance_ks", Some(inv.ks_phi.max(inv.ks_s)), th.invariance_ks);
    }
    let short = s.radii.last().and_then(|r| r.short_returns).map(|r| r.fraction);
    above("short_return_fraction", short, th.short_return_fraction);
    if let (Some(v), Some(l)) = (s.cone_violations, th.cone_violations) {
        if v > l {
            out.push(format!("cone_violations {v} > {l}"));
        }
    }
    out
}

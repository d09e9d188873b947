//! CSV and JSON artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use billiards_core::inducing::TailRow;
use billiards_core::openstats::{CountTable, HittingSeries, SurvivalRow};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::Summary;

pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writer that emits `header` even when no rows follow.
fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    Ok(w)
}

#[derive(Serialize)]
struct HitRow {
    orbit: u64,
    index: u64,
    normalized_time: f64,
}

pub fn write_hits(path: &Path, series: &[HittingSeries]) -> Result<()> {
    let mut w = csv_writer(path, &["orbit", "index", "normalized_time"])?;
    for s in series {
        for (&index, &normalized_time) in s.hits.iter().zip(&s.times) {
            w.serialize(HitRow {
                orbit: s.orbit,
                index,
                normalized_time,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_survival(path: &Path, rows: &[SurvivalRow]) -> Result<()> {
    let mut w = csv_writer(path, &["t", "empirical", "exponential"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CountRow {
    orbit: u64,
    interval: usize,
    count: u64,
}

pub fn write_counts(path: &Path, table: &CountTable) -> Result<()> {
    let mut w = csv_writer(path, &["orbit", "interval", "count"])?;
    for (orbit, counts) in &table.counts {
        for (interval, &count) in counts.iter().enumerate() {
            w.serialize(CountRow {
                orbit: *orbit,
                interval,
                count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_tail(path: &Path, rows: &[TailRow]) -> Result<()> {
    let mut w = csv_writer(path, &["n", "survival", "count"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Resolved config echoed next to every run.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config: &'a ExperimentConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
        }
    }
}

#[derive(Serialize)]
struct RadiusDiagnostics<'a> {
    radius: f64,
    censoring: &'a crate::experiment::Censoring,
    count_orbits_excluded: usize,
    short_return_fraction: Option<f64>,
    quasi_section_relative: Option<f64>,
}

/// Censoring, defects and short-return fractions in one place.
#[derive(Serialize)]
pub struct Diagnostics<'a> {
    radii: Vec<RadiusDiagnostics<'a>>,
    kac_defect: Option<f64>,
    return_censored_fraction: Option<f64>,
    cone_violations: Option<usize>,
    invariance_censored_fraction: Option<f64>,
}

impl<'a> From<&'a Summary> for Diagnostics<'a> {
    fn from(s: &'a Summary) -> Self {
        Self {
            radii: s
                .radii
                .iter()
                .map(|r| RadiusDiagnostics {
                    radius: r.radius,
                    censoring: &r.censoring,
                    count_orbits_excluded: r.count_orbits_excluded,
                    short_return_fraction: r.short_returns.map(|x| x.fraction),
                    quasi_section_relative: r.quasi_section.map(|x| x.relative),
                })
                .collect(),
            kac_defect: s.kac_defect,
            return_censored_fraction: s.inducing.as_ref().map(|i| i.kac.censored_fraction),
            cone_violations: s.cone_violations,
            invariance_censored_fraction: s.invariance.map(|i| i.censored_fraction),
        }
    }
}

//! Experiment configuration (TOML, `version = 1`) and its validation.

use std::fmt;
use std::path::Path;

use billiards_core::{build_table, make_hole, validate_table, Hole, Table, TableSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub table: TableSpec,
    pub hole: HoleConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub center_s: f64,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_orbits: usize,
    /// Horizon in normalized time units.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Required: there is no clock-derived default.
    pub seed: u64,
    /// Count intervals `(a, b]` in normalized time.
    #[serde(default = "default_intervals")]
    pub intervals: Vec<[f64; 2]>,
}

fn default_t_max() -> f64 {
    billiards_core::openstats::DEFAULT_T_MAX
}

fn default_intervals() -> Vec<[f64; 2]> {
    vec![[0.0, 1.0], [1.0, 2.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub cones: bool,
    pub kac: bool,
    pub invariance: bool,
    pub short_returns: bool,
    pub quasi_section: bool,
    pub cone_points: usize,
    pub cone_vectors: usize,
    pub kac_samples: usize,
    pub return_cap: u64,
    pub invariance_samples: usize,
    pub short_return_hits: usize,
    pub short_return_eps: f64,
    pub quasi_section_samples: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            cones: false,
            kac: false,
            invariance: false,
            short_returns: false,
            quasi_section: false,
            cone_points: 100_000,
            cone_vectors: 10,
            kac_samples: 1_000_000,
            return_cap: billiards_core::inducing::DEFAULT_RETURN_CAP,
            invariance_samples: 1_000_000,
            short_return_hits: 20_000,
            short_return_eps: billiards_core::openstats::DEFAULT_SHORT_EPS,
            quasi_section_samples: 200_000,
        }
    }
}

/// Limits applied with `--enforce`; an absent limit is not checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// First-hit KS at the smallest radius.
    pub ks: Option<f64>,
    /// Count TV on the first interval at the smallest radius.
    pub tv: Option<f64>,
    pub kac_defect: Option<f64>,
    pub cone_violations: Option<usize>,
    pub invariance_ks: Option<f64>,
    pub short_return_fraction: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ks: Some(0.05),
            tv: Some(0.05),
            kac_defect: Some(0.01),
            cone_violations: Some(0),
            invariance_ks: Some(0.005),
            short_return_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Schema,
    Geometry,
    Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
}

impl Issue {
    fn new(kind: IssueKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            IssueKind::Schema => "schema",
            IssueKind::Geometry => "geometry",
            IssueKind::Placement => "placement",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(Issue),
}

/// Read and parse; shape problems come back as a schema issue.
pub fn load(path: &Path) -> Result<ExperimentConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text).map_err(LoadError::Invalid)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, Issue> {
    toml::from_str(text).map_err(|e| Issue::new(IssueKind::Schema, e.message().to_string()))
}

/// Everything checkable without running dynamics.
#[derive(Debug, Clone)]
pub struct Validated {
    pub table: Table,
    pub holes: Vec<Hole>,
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Validated, Vec<Issue>> {
    let mut issues = schema_issues(cfg);
    let table = match build_table(&cfg.table) {
        Ok(t) => Some(t),
        Err(e) => {
            issues.push(Issue::new(IssueKind::Geometry, e.to_string()));
            None
        }
    };
    let mut holes = Vec::new();
    if let Some(t) = &table {
        issues.extend(
            validate_table(t)
                .into_iter()
                .map(|v| Issue::new(IssueKind::Geometry, v.to_string())),
        );
        // radii already flagged as schema errors are not placed
        for &r in cfg.hole.radii.iter().filter(|r| **r > 0.0 && r.is_finite()) {
            match make_hole(t, cfg.hole.center_s, r) {
                Ok(h) => holes.push(h),
                Err(e) => issues.push(Issue::new(IssueKind::Placement, format!("radius {r}: {e}"))),
            }
        }
    }
    match table {
        Some(table) if issues.is_empty() => Ok(Validated { table, holes }),
        _ => Err(issues),
    }
}

fn schema_issues(cfg: &ExperimentConfig) -> Vec<Issue> {
    let mut out = Vec::new();
    let mut schema = |m: String| out.push(Issue::new(IssueKind::Schema, m));
    if cfg.version != SCHEMA_VERSION {
        schema(format!("version {} is not supported (expected {SCHEMA_VERSION})", cfg.version));
    }
    if cfg.hole.radii.is_empty() {
        schema("hole.radii is empty".into());
    }
    for (i, r) in cfg.hole.radii.iter().enumerate() {
        if !(*r > 0.0 && r.is_finite()) {
            schema(format!("hole.radii[{i}] = {r} must be positive"));
        }
    }
    if cfg.hole.radii.windows(2).any(|w| w[1] >= w[0]) {
        schema("hole.radii must be strictly decreasing".into());
    }
    if !cfg.hole.center_s.is_finite() {
        schema("hole.center_s must be finite".into());
    }
    if cfg.run.n_orbits == 0 {
        schema("run.n_orbits must be positive".into());
    }
    if !(cfg.run.t_max > 0.0 && cfg.run.t_max.is_finite()) {
        schema(format!("run.t_max = {} must be positive", cfg.run.t_max));
    }
    for (i, [a, b]) in cfg.run.intervals.iter().enumerate() {
        if !(0.0 <= *a && a < b && *b <= cfg.run.t_max) {
            schema(format!("run.intervals[{i}] = ({a}, {b}] must satisfy 0 <= a < b <= t_max"));
        }
    }
    let c = &cfg.checks;
    if c.cones && (c.cone_points == 0 || c.cone_vectors == 0) {
        schema("checks.cone_points and checks.cone_vectors must be positive".into());
    }
    if c.kac && (c.kac_samples == 0 || c.return_cap == 0) {
        schema("checks.kac_samples and checks.return_cap must be positive".into());
    }
    if c.invariance && c.invariance_samples == 0 {
        schema("checks.invariance_samples must be positive".into());
    }
    if c.short_returns && (c.short_return_hits == 0 || !(0.0..1.0).contains(&c.short_return_eps)) {
        schema("checks.short_return_hits must be positive and checks.short_return_eps in [0, 1)".into());
    }
    if c.quasi_section && c.quasi_section_samples == 0 {
        schema("checks.quasi_section_samples must be positive".into());
    }
    out
}

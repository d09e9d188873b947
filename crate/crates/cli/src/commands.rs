//! Subcommands and their exit codes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, ExperimentConfig, Issue, LoadError, Validated};
use crate::experiment::{self, Summary};
use crate::output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BREACH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "billiards", version, about = "Open billiard experiments: hitting statistics and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check config shape, table geometry and hole placement without running dynamics.
    Validate(Common),
    /// Hitting experiments per radius plus the checks enabled in the config.
    Run(Common),
    /// A single diagnostic.
    #[command(subcommand)]
    Check(Check),
    /// Kac defect and return-time tail of the inducing base.
    Inducing(Common),
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Cone invariance scan.
    Cones(Common),
    /// One-step invariance of the collision measure.
    Invariants(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML experiment config.
    pub config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (overrides `run.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exit with status 3 when a threshold is breached.
    #[arg(long)]
    pub enforce: bool,
}

impl Common {
    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

pub fn execute(cli: Cli) -> ExitCode {
    let code = match cli.command {
        Command::Validate(c) => validate(&c),
        Command::Run(c) => with_config(&c, run),
        Command::Check(Check::Cones(c)) => with_config(&c, check_cones),
        Command::Check(Check::Invariants(c)) => with_config(&c, check_invariants),
        Command::Inducing(c) => with_config(&c, inducing),
    };
    ExitCode::from(code)
}

/// Load, apply overrides, validate; problems map to exit 1 or 2.
fn prepare(c: &Common) -> Result<(ExperimentConfig, Validated), u8> {
    let mut cfg = match config::load(&c.config) {
        Ok(cfg) => cfg,
        Err(LoadError::Io { path, source }) => {
            eprintln!("error: cannot read {path}: {source}");
            return Err(EXIT_IO);
        }
        Err(LoadError::Invalid(issue)) => {
            report(&[issue]);
            return Err(EXIT_INVALID);
        }
    };
    if let Some(seed) = c.seed {
        cfg.run.seed = seed;
    }
    match config::validate(&cfg) {
        Ok(v) => Ok((cfg, v)),
        Err(issues) => {
            report(&issues);
            Err(EXIT_INVALID)
        }
    }
}

fn report(issues: &[Issue]) {
    for i in issues {
        eprintln!("{i}");
    }
}

type Action = fn(&Common, &ExperimentConfig, &Validated, &Path) -> Result<Vec<String>>;

fn with_config(c: &Common, action: Action) -> u8 {
    let (cfg, v) = match prepare(c) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let out = c.out_dir(&cfg);
    match action(c, &cfg, &v, &out) {
        Ok(breaches) if c.enforce && !breaches.is_empty() => {
            for b in &breaches {
                eprintln!("threshold breached: {b}");
            }
            EXIT_BREACH
        }
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_IO
        }
    }
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    valid: bool,
    issues: &'a [Issue],
}

fn validate(c: &Common) -> u8 {
    let issues = match prepare(c) {
        Ok(_) => Vec::new(),
        Err(EXIT_IO) => return EXIT_IO,
        Err(_) => {
            // re-derive the list for the report file; it was already printed
            match config::load(&c.config) {
                Ok(cfg) => config::validate(&cfg).err().unwrap_or_default(),
                Err(LoadError::Invalid(i)) => vec![i],
                Err(LoadError::Io { .. }) => return EXIT_IO,
            }
        }
    };
    if let Some(dir) = &c.out {
        let written = output::prepare_dir(dir).and_then(|_| {
            output::write_json(
                &dir.join("validation.json"),
                &ValidationReport {
                    valid: issues.is_empty(),
                    issues: &issues,
                },
            )
        });
        if let Err(e) = written {
            eprintln!("error: {e:#}");
            return EXIT_IO;
        }
    }
    if issues.is_empty() {
        println!("ok");
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

fn run(_: &Common, cfg: &ExperimentConfig, v: &Validated, out: &Path) -> Result<Vec<String>> {
    let summary: Summary = experiment::run(cfg, v, out)?;
    print_headline(&summary, out);
    Ok(summary.breaches)
}

fn print_headline(s: &Summary, out: &Path) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: ks {} tv {} kac_defect {} cone_violations {} -> {}",
        s.table,
        fmt(s.ks),
        fmt(s.tv),
        fmt(s.kac_defect),
        s.cone_violations.map_or_else(|| "-".to_string(), |v| v.to_string()),
        out.join("summary.json").display()
    );
}

fn check_cones(_: &Common, cfg: &ExperimentConfig, v: &Validated, out: &Path) -> Result<Vec<String>> {
    output::prepare_dir(out)?;
    output::write_json(&out.join("manifest.json"), &output::Manifest::new(cfg))?;
    let r = experiment::cones(cfg, &v.table);
    output::write_json(&out.join("cones.json"), &r)?;
    println!("{}: {} cone violations over {} pairs", v.table.class().name(), r.violations(), r.pairs);
    Ok(match cfg.thresholds.cone_violations {
        Some(l) if r.violations() > l => vec![format!("cone_violations {} > {l}", r.violations())],
        _ => Vec::new(),
    })
}

fn check_invariants(_: &Common, cfg: &ExperimentConfig, v: &Validated, out: &Path) -> Result<Vec<String>> {
    output::prepare_dir(out)?;
    output::write_json(&out.join("manifest.json"), &output::Manifest::new(cfg))?;
    let r = experiment::invariance(cfg, &v.table);
    output::write_json(&out.join("invariants.json"), &r)?;
    let ks = r.ks_phi.max(r.ks_s);
    println!(
        "{}: pushforward ks phi {:.4} s {:.4}, censored {:.1e}",
        v.table.class().name(),
        r.ks_phi,
        r.ks_s,
        r.censored_fraction
    );
    Ok(match cfg.thresholds.invariance_ks {
        Some(l) if !(ks < l) => vec![format!("invariance_ks {ks} >= {l}")],
        _ => Vec::new(),
    })
}

fn inducing(_: &Common, cfg: &ExperimentConfig, v: &Validated, out: &Path) -> Result<Vec<String>> {
    output::prepare_dir(out)?;
    output::write_json(&out.join("manifest.json"), &output::Manifest::new(cfg))?;
    let r = experiment::inducing(cfg, &v.table, out)?;
    output::write_json(&out.join("inducing.json"), &r)?;
    println!(
        "{}: kac defect {:.4}, mean return {:.3}, tail slope {}",
        v.table.class().name(),
        r.kac.defect,
        r.kac.mean_return,
        r.tail_slope_10_1000.map_or_else(|| "-".to_string(), |s| format!("{s:.3}"))
    );
    Ok(match cfg.thresholds.kac_defect {
        Some(l) if !(r.kac.defect < l) => vec![format!("kac_defect {} >= {l}", r.kac.defect)],
        _ => Vec::new(),
    })
}

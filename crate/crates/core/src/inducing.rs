//! First-return structures: the inducing base `X`, return times `R`,
//! their tail and the Kac identity `E_X[R] μ(X) = 1`.

use serde::Serialize;

use crate::dynamics::{next_collision, CollisionFlag, PhasePoint, Singularity};
use crate::geometry::{CurvatureKind, Shape, Table, TableClass};
use crate::measure::{par_chunks, SrbSampler};
use crate::stats::ols_slope;

/// Default cap on a single return time, in collisions.
pub const DEFAULT_RETURN_CAP: u64 = 100_000;

/// Phase point together with the component it sits on and the component of
/// the collision before it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedPhasePoint {
    pub point: PhasePoint,
    pub current: usize,
    pub previous: Option<usize>,
}

impl ExtendedPhasePoint {
    /// Fresh point with no history.
    pub fn start(t: &Table, point: PhasePoint) -> Self {
        Self {
            point,
            current: t.locate(point.s).component,
            previous: None,
        }
    }

    /// Apply the billiard map, shifting the history.
    pub fn advance(&self, t: &Table) -> Result<Self, Singularity> {
        let r = next_collision(t, self.point);
        match r.flag {
            CollisionFlag::Ok => Ok(Self {
                point: r.next,
                current: r.component,
                previous: Some(self.current),
            }),
            CollisionFlag::Grazing => Err(Singularity::Grazing),
            CollisionFlag::Corner => Err(Singularity::Corner),
            CollisionFlag::UnfoldOverflow => Err(Singularity::UnfoldOverflow),
        }
    }
}

/// Whether every collision belongs to the base (`R ≡ 1`).
pub fn trivial_base(class: TableClass) -> bool {
    matches!(class, TableClass::SinaiTorus | TableClass::Diamond)
}

/// Base membership from the current and previous component ids.
pub fn base_rule(t: &Table, current: usize, previous: Option<usize>) -> bool {
    let shape = &t.component(current).shape;
    let first_on_arc = || matches!(shape, Shape::Arc(_)) && previous.is_some_and(|p| p != current);
    match t.class() {
        TableClass::SinaiTorus | TableClass::Diamond => true,
        TableClass::Stadium | TableClass::Squash => first_on_arc(),
        TableClass::Flower => match shape.kind() {
            CurvatureKind::Dispersing => true,
            CurvatureKind::Focusing => first_on_arc(),
            CurvatureKind::Flat => false,
        },
        TableClass::SemiDispersing => matches!(shape, Shape::Scatterer { .. }),
    }
}

pub fn in_base(t: &Table, x: &ExtendedPhasePoint) -> bool {
    base_rule(t, x.current, x.previous)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Censor {
    Cap,
    Singular(Singularity),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSample {
    pub base: ExtendedPhasePoint,
    /// Return time, or the number of collisions completed when censored.
    pub r: u64,
    pub censored: Option<Censor>,
}

/// Excursion from a base point to its next base entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Excursion {
    pub sample: ReturnSample,
    /// `f^j(base)` for `j = 0..=R` (or up to censoring).
    pub points: Vec<ExtendedPhasePoint>,
}

fn walk(t: &Table, x: ExtendedPhasePoint, cap: u64, mut record: Option<&mut Vec<ExtendedPhasePoint>>) -> ReturnSample {
    let mut y = x;
    for j in 1..=cap {
        match y.advance(t) {
            Ok(next) => {
                y = next;
                if let Some(rec) = record.as_deref_mut() {
                    rec.push(y);
                }
                if in_base(t, &y) {
                    return ReturnSample {
                        base: x,
                        r: j,
                        censored: None,
                    };
                }
            }
            Err(s) => {
                return ReturnSample {
                    base: x,
                    r: j - 1,
                    censored: Some(Censor::Singular(s)),
                }
            }
        }
    }
    ReturnSample {
        base: x,
        r: cap,
        censored: Some(Censor::Cap),
    }
}

/// First return of a base point to `X`, censored at `cap` collisions or at
/// a singular collision.
pub fn return_time(t: &Table, x: &ExtendedPhasePoint, cap: u64) -> ReturnSample {
    debug_assert!(in_base(t, x));
    walk(t, *x, cap, None)
}

pub fn excursion(t: &Table, x: &ExtendedPhasePoint, cap: u64) -> Excursion {
    let mut points = vec![*x];
    let sample = walk(t, *x, cap, Some(&mut points));
    Excursion { sample, points }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub n: u64,
    /// Empirical `μ_X(R > n)` among uncensored samples.
    pub survival: f64,
    /// Samples with `R = n`.
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnStats {
    /// SRB draws whose burn-in collision was regular.
    pub draws: u64,
    pub base_hits: u64,
    pub censored: u64,
    /// Return times of uncensored samples.
    #[serde(skip)]
    pub returns: Vec<u64>,
}

impl ReturnStats {
    pub fn base_fraction(&self) -> f64 {
        self.base_hits as f64 / self.draws as f64
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.base_hits.max(1) as f64
    }

    pub fn mean_return(&self) -> f64 {
        self.returns.iter().sum::<u64>() as f64 / self.returns.len().max(1) as f64
    }

    /// `|E_X[R] μ̂(X) - 1|`.
    pub fn kac_defect(&self) -> f64 {
        (self.mean_return() * self.base_fraction() - 1.0).abs()
    }

    /// Rows `n = 1..=max R`, the survival reaching zero on the last one.
    pub fn tail(&self) -> Vec<TailRow> {
        let max = self.returns.iter().copied().max().unwrap_or(0);
        let mut hist = vec![0u64; max as usize + 1];
        for &r in &self.returns {
            hist[r as usize] += 1;
        }
        let total = self.returns.len() as f64;
        let mut above = self.returns.len() as u64;
        (1..=max)
            .map(|n| {
                let count = hist[n as usize];
                above -= count;
                TailRow {
                    n,
                    survival: above as f64 / total,
                    count,
                }
            })
            .collect()
    }
}

/// Draw `n_samples` SRB points, apply one burn-in collision and keep those
/// landing in `X`; each kept point is followed to its next base entry.
pub fn sample_returns(t: &Table, n_samples: usize, cap: u64, seed: u64) -> ReturnStats {
    let parts = par_chunks(n_samples, |chunk, len| {
        let mut sampler = SrbSampler::new(t, seed, chunk);
        let mut st = ReturnStats {
            draws: 0,
            base_hits: 0,
            censored: 0,
            returns: Vec::new(),
        };
        for _ in 0..len {
            let x0 = ExtendedPhasePoint::start(t, sampler.sample());
            let Ok(x1) = x0.advance(t) else { continue };
            st.draws += 1;
            if !in_base(t, &x1) {
                continue;
            }
            st.base_hits += 1;
            let rs = return_time(t, &x1, cap);
            match rs.censored {
                None => st.returns.push(rs.r),
                Some(_) => st.censored += 1,
            }
        }
        vec![st]
    });
    let mut out = ReturnStats {
        draws: 0,
        base_hits: 0,
        censored: 0,
        returns: Vec::new(),
    };
    for p in parts {
        out.draws += p.draws;
        out.base_hits += p.base_hits;
        out.censored += p.censored;
        out.returns.extend(p.returns);
    }
    out
}

pub fn return_tail(t: &Table, n_samples: usize, cap: u64, seed: u64) -> (Vec<TailRow>, f64) {
    let st = sample_returns(t, n_samples, cap, seed);
    (st.tail(), st.censored_fraction())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KacReport {
    pub defect: f64,
    pub mean_return: f64,
    pub base_fraction: f64,
    pub censored_fraction: f64,
    pub base_hits: u64,
}

pub fn kac_defect(t: &Table, n_samples: usize, cap: u64, seed: u64) -> KacReport {
    let st = sample_returns(t, n_samples, cap, seed);
    KacReport {
        defect: st.kac_defect(),
        mean_return: st.mean_return(),
        base_fraction: st.base_fraction(),
        censored_fraction: st.censored_fraction(),
        base_hits: st.base_hits,
    }
}

/// Log-log slope of the empirical tail over `[n_lo, n_hi]`, fitted on a
/// logarithmic grid of 20 points per decade with positive survival.
pub fn tail_slope(tail: &[TailRow], n_lo: u64, n_hi: u64) -> Option<f64> {
    let decades = (n_hi as f64 / n_lo as f64).log10();
    let steps = (20.0 * decades).ceil() as usize;
    let mut grid: Vec<u64> = (0..=steps)
        .map(|k| (n_lo as f64 * 10f64.powf(k as f64 / 20.0)).round() as u64)
        .filter(|&n| n <= n_hi)
        .collect();
    grid.dedup();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for n in grid {
        let Some(row) = tail.get(n as usize - 1) else { break };
        if row.survival > 0.0 {
            x.push((n as f64).ln());
            y.push(row.survival.ln());
        }
    }
    ols_slope(&x, &y)
}

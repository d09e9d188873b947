//! Unstable and stable cone fields and a numerical invariance scan.
//!
//! Cones are closed arcs of directions in the projective line of `(dq, dφ)`,
//! described by slope intervals `[lo, hi]` traversed in increasing slope,
//! with `±∞` the vertical direction.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::dynamics::{derivative, step, Mat2, PhasePoint, TangentVector};
use crate::geometry::{CurvatureKind, Table};
use crate::measure::{par_chunks, SrbSampler};

/// Tolerance on cone margins, in radians of direction angle.
pub const MARGIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cone {
    pub lo: f64,
    pub hi: f64,
    pub kind: ConeKind,
    pub curvature: f64,
}

/// Direction angle of a slope in `[0, π)`.
fn slope_angle(m: f64) -> f64 {
    if m.is_infinite() {
        FRAC_PI_2
    } else {
        m.atan().rem_euclid(PI)
    }
}

fn direction_angle(v: &TangentVector) -> f64 {
    v.dphi.atan2(v.dq).rem_euclid(PI)
}

impl Cone {
    pub fn new(kind: ConeKind, curvature: f64) -> Self {
        let k = curvature;
        let (lo, hi) = match (kind, k < 0.0) {
            (ConeKind::Unstable, false) => (k, f64::INFINITY),
            (ConeKind::Unstable, true) => (k, 0.0),
            (ConeKind::Stable, false) => (f64::NEG_INFINITY, -k),
            (ConeKind::Stable, true) => (0.0, -k),
        };
        Self {
            lo,
            hi,
            kind,
            curvature,
        }
    }

    fn start(&self) -> f64 {
        slope_angle(self.lo)
    }

    /// Angular width of the arc.
    pub fn width(&self) -> f64 {
        let w = (slope_angle(self.hi) - self.start()).rem_euclid(PI);
        if w == 0.0 && self.lo != self.hi {
            PI
        } else {
            w
        }
    }

    /// Signed angular distance to the boundary: positive inside.
    pub fn margin(&self, v: &TangentVector) -> f64 {
        let d = (direction_angle(v) - self.start()).rem_euclid(PI);
        let w = self.width();
        if d <= w {
            d.min(w - d)
        } else {
            -(d - w).min(PI - d)
        }
    }

    pub fn contains(&self, v: &TangentVector) -> bool {
        self.margin(v) >= 0.0
    }

    /// Vector of the cone at relative position `u ∈ [0, 1]` across its arc.
    pub fn vector_at(&self, u: f64) -> TangentVector {
        let a = self.start() + u * self.width();
        TangentVector::new(a.cos(), a.sin())
    }

    /// True when the interiors of the two cones share no direction.
    pub fn interiors_disjoint(&self, other: &Cone) -> bool {
        let (w1, w2) = (self.width(), other.width());
        let d = (other.start() - self.start()).rem_euclid(PI);
        d >= w1 - MARGIN_TOL && d + w2 <= PI + MARGIN_TOL
    }
}

pub fn cone_at(t: &Table, x: PhasePoint, kind: ConeKind) -> Cone {
    Cone::new(kind, t.locate(x.s).curvature)
}

pub fn in_cone(c: &Cone, v: &TangentVector) -> bool {
    c.contains(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeScanReport {
    pub points: usize,
    /// Points whose forward or backward image is singular.
    pub skipped: usize,
    pub pairs: usize,
    pub unstable_violations: usize,
    pub stable_violations: usize,
    /// Smallest margin seen for mapped vectors (negative on violation).
    pub worst_unstable_margin: f64,
    pub worst_stable_margin: f64,
    /// Images of the vertical fiber not strictly inside the unstable cone.
    pub vertical_violations: usize,
    pub min_vertical_margin: f64,
    pub transversality_violations: usize,
}

impl ConeScanReport {
    pub fn violations(&self) -> usize {
        self.unstable_violations
            + self.stable_violations
            + self.vertical_violations
            + self.transversality_violations
    }
}

#[derive(Default)]
struct Tally {
    skipped: usize,
    pairs: usize,
    uv: usize,
    sv: usize,
    wu: f64,
    ws: f64,
    vv: usize,
    vm: f64,
    tv: usize,
}

const J: Mat2 = Mat2([[1.0, 0.0], [0.0, -1.0]]);

/// Check `Df C^u ⊆ C^u` and `Df⁻¹ C^s ⊆ C^s` over `n_points` sampled points
/// and `n_vectors` vectors per cone (both boundary rays plus random interior
/// ones), the strict vertical-fiber condition and transversality.
pub fn cone_invariance_scan(t: &Table, n_points: usize, n_vectors: usize, seed: u64) -> ConeScanReport {
    let n_vectors = n_vectors.max(2);
    let tallies = par_chunks(n_points, |chunk, len| {
        let mut sampler = SrbSampler::new(t, seed, chunk);
        let mut tl = Tally {
            wu: f64::INFINITY,
            ws: f64::INFINITY,
            vm: f64::INFINITY,
            ..Tally::default()
        };
        for _ in 0..len {
            let x = sampler.sample();
            let us: Vec<f64> = (0..n_vectors)
                .map(|i| match i {
                    0 => 0.0,
                    1 => 1.0,
                    _ => sampler.rng().random(),
                })
                .collect();
            let (Ok(fw), Ok(bw)) = (step(t, x), step(t, x.reversed())) else {
                tl.skipped += 1;
                continue;
            };

            let cu = cone_at(t, x, ConeKind::Unstable);
            let cs = cone_at(t, x, ConeKind::Stable);
            if !cu.interiors_disjoint(&cs) {
                tl.tv += 1;
            }

            // forward: Df(x) C^u(x) against C^u(f x)
            let df = derivative(&fw);
            let target_u = cone_at(t, fw.to, ConeKind::Unstable);
            for &u in &us {
                let m = target_u.margin(&cu.vector_at(u).mapped(&df));
                tl.wu = tl.wu.min(m);
                tl.uv += usize::from(m < -MARGIN_TOL);
            }
            let vm = target_u.margin(&TangentVector::new(0.0, 1.0).mapped(&df));
            tl.vm = tl.vm.min(vm);
            tl.vv += usize::from(vm <= 0.0);

            // backward: Df⁻¹(x) = J Df(Ix) J, landing at f⁻¹ x = I f(Ix)
            let dinv = J * derivative(&bw) * J;
            let target_s = cone_at(t, bw.to.reversed(), ConeKind::Stable);
            for &u in &us {
                let m = target_s.margin(&cs.vector_at(u).mapped(&dinv));
                tl.ws = tl.ws.min(m);
                tl.sv += usize::from(m < -MARGIN_TOL);
            }
            tl.pairs += 2 * n_vectors;
        }
        vec![tl]
    });
    let mut r = ConeScanReport {
        points: n_points,
        skipped: 0,
        pairs: 0,
        unstable_violations: 0,
        stable_violations: 0,
        worst_unstable_margin: f64::INFINITY,
        worst_stable_margin: f64::INFINITY,
        vertical_violations: 0,
        min_vertical_margin: f64::INFINITY,
        transversality_violations: 0,
    };
    for tl in tallies {
        r.skipped += tl.skipped;
        r.pairs += tl.pairs;
        r.unstable_violations += tl.uv;
        r.stable_violations += tl.sv;
        r.worst_unstable_margin = r.worst_unstable_margin.min(tl.wu);
        r.worst_stable_margin = r.worst_stable_margin.min(tl.ws);
        r.vertical_violations += tl.vv;
        r.min_vertical_margin = r.min_vertical_margin.min(tl.vm);
        r.transversality_violations += tl.tv;
    }
    r
}

/// Curvature class of the cone host, for reporting.
pub fn host_kind(t: &Table, x: PhasePoint) -> CurvatureKind {
    t.component(t.locate(x.s).component).kind()
}

//! Billiard map on the collision space, its derivative and the wavefront
//! curvature recursion.
//!
//! A phase point `(s, φ)` carries the post-collisional velocity
//! `v = cos φ · n + sin φ · T`, with `n` the inward normal and `T` the unit
//! tangent at arclength `s`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Hole, Shape, Table, Torus, Vec2};

/// Collisions closer than this to tangency censor the orbit.
pub const GRAZING_EPS: f64 = 1e-6;

/// Default cap on the unfolded free path, in lattice cells.
pub const DEFAULT_UNFOLD_RADIUS: f64 = 1e3;

/// Re-hit guard relative to the table diameter.
const REHIT_GUARD: f64 = 1e-12;

/// Slack, relative to the diameter, when matching a ray hit to an arc span.
const SPAN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub grazing_eps: f64,
    pub unfold_radius: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            grazing_eps: GRAZING_EPS,
            unfold_radius: DEFAULT_UNFOLD_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub const fn new(s: f64, phi: f64) -> Self {
        Self { s, phi }
    }

    /// Time reversal `(s, φ) ↦ (s, -φ)`.
    pub fn reversed(self) -> Self {
        Self::new(self.s, -self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Error)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    #[error("grazing collision")]
    Grazing,
    #[error("collision at a corner")]
    Corner,
    #[error("free path exceeds the unfolding radius")]
    UnfoldOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionFlag {
    Ok,
    Grazing,
    Corner,
    UnfoldOverflow,
}

impl From<Singularity> for CollisionFlag {
    fn from(s: Singularity) -> Self {
        match s {
            Singularity::Grazing => CollisionFlag::Grazing,
            Singularity::Corner => CollisionFlag::Corner,
            Singularity::UnfoldOverflow => CollisionFlag::UnfoldOverflow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionResult {
    pub next: PhasePoint,
    pub tau: f64,
    /// Component hit; meaningless unless `flag` is `Ok`, `Grazing` or `Corner`.
    pub component: usize,
    pub flag: CollisionFlag,
}

/// One accepted step of the billiard map with the data needed by `Df`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub from: PhasePoint,
    pub to: PhasePoint,
    pub tau: f64,
    pub from_component: usize,
    pub to_component: usize,
    pub k_from: f64,
    pub k_to: f64,
}

struct RayHit {
    tau: f64,
    component: usize,
    local: f64,
}

fn circle_roots(p: Vec2, v: Vec2, center: Vec2, radius: f64) -> Option<(f64, f64)> {
    let w = p - center;
    let b = w.dot(v);
    // ρ² - d⊥² in factored form: b² - |w|² + ρ² cancels badly for far images
    let perp = w.cross(v).abs();
    if perp > radius {
        return None;
    }
    let disc = (radius - perp) * (radius + perp);
    let q = -b - b.signum() * disc.sqrt();
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let c = (w.norm() - radius) * (w.norm() + radius);
    Some((q, c / q))
}

fn cast_bounded(t: &Table, p: Vec2, v: Vec2) -> Option<RayHit> {
    let guard = REHIT_GUARD * t.diameter();
    let slack = SPAN_SLACK * t.diameter();
    let mut best: Option<RayHit> = None;
    let mut offer = |tau: f64, component: usize, local: f64| {
        if tau > guard && best.as_ref().is_none_or(|b| tau < b.tau) {
            best = Some(RayHit {
                tau,
                component,
                local,
            });
        }
    };
    for (id, comp) in t.components().iter().enumerate() {
        match comp.shape {
            Shape::Segment { start, end } => {
                let u = (end - start) * (1.0 / comp.length);
                let den = v.cross(u);
                if den.abs() < 1e-15 {
                    continue;
                }
                let d = start - p;
                let tau = d.cross(u) / den;
                let local = d.cross(v) / den;
                if (-slack..=comp.length + slack).contains(&local) {
                    offer(tau, id, local);
                }
            }
            shape => {
                let c = shape.circular().unwrap();
                let Some((r1, r2)) = circle_roots(p, v, c.center, c.radius) else {
                    continue;
                };
                for tau in [r1, r2] {
                    if tau <= guard {
                        continue;
                    }
                    let hit = p + v * tau;
                    let mut local = c.param_of_angle((hit - c.center).angle());
                    if !shape.is_closed() {
                        let full = std::f64::consts::TAU * c.radius;
                        if local > comp.length + slack {
                            if full - local <= slack {
                                local -= full;
                            } else {
                                continue;
                            }
                        }
                    }
                    offer(tau, id, local);
                }
            }
        }
    }
    best
}

fn cast_torus(
    t: &Table,
    torus: &Torus,
    p: Vec2,
    v: Vec2,
    cap: f64,
) -> Result<RayHit, Singularity> {
    let guard = REHIT_GUARD * t.diameter();
    let (w, h) = (torus.cell.x, torus.cell.y);
    let mut ci = (p.x / w).floor() as i64;
    let mut cj = (p.y / h).floor() as i64;
    let step_i = if v.x > 0.0 { 1 } else { -1 };
    let step_j = if v.y > 0.0 { 1 } else { -1 };
    let delta_x = if v.x != 0.0 { w / v.x.abs() } else { f64::INFINITY };
    let delta_y = if v.y != 0.0 { h / v.y.abs() } else { f64::INFINITY };
    let mut next_x = if v.x > 0.0 {
        ((ci + 1) as f64 * w - p.x) / v.x
    } else if v.x < 0.0 {
        (p.x - ci as f64 * w) / -v.x
    } else {
        f64::INFINITY
    };
    let mut next_y = if v.y > 0.0 {
        ((cj + 1) as f64 * h - p.y) / v.y
    } else if v.y < 0.0 {
        (p.y - cj as f64 * h) / -v.y
    } else {
        f64::INFINITY
    };
    let limit = cap * w.max(h);

    let mut best: Option<(f64, usize, Vec2)> = None;
    loop {
        for (k, comp) in t.components().iter().enumerate() {
            let Shape::Scatterer { center, radius } = comp.shape else {
                unreachable!("torus tables hold scatterers only");
            };
            for &(a, b) in &torus.image_offsets[k] {
                let img = center + Vec2::new((ci + a) as f64 * w, (cj + b) as f64 * h);
                let Some((r1, r2)) = circle_roots(p, v, img, radius) else {
                    continue;
                };
                let tau = match (r1 > guard, r2 > guard) {
                    (true, true) => r1.min(r2),
                    (true, false) => r1,
                    (false, true) => r2,
                    _ => continue,
                };
                if best.is_none_or(|(bt, _, _)| tau < bt) {
                    best = Some((tau, k, img));
                }
            }
        }
        let exit = next_x.min(next_y);
        if let Some((tau, k, img)) = best {
            if tau <= exit {
                let comp = t.component(k);
                let c = comp.shape.circular().unwrap();
                let hit = p + v * tau;
                let local = c.param_of_angle((hit - img).angle());
                return Ok(RayHit {
                    tau,
                    component: k,
                    local,
                });
            }
        }
        if exit > limit {
            return Err(Singularity::UnfoldOverflow);
        }
        if next_x < next_y {
            ci += step_i;
            next_x += delta_x;
        } else {
            cj += step_j;
            next_y += delta_y;
        }
    }
}

/// Full step with the geometric data of both collisions.
pub fn step_with(t: &Table, x: PhasePoint, cfg: &DynamicsConfig) -> Result<Step, Singularity> {
    let r = next_collision_with(t, x, cfg);
    match r.flag {
        CollisionFlag::Ok => {
            let from = t.locate(x.s);
            Ok(Step {
                from: x,
                to: r.next,
                tau: r.tau,
                from_component: from.component,
                to_component: r.component,
                k_from: from.curvature,
                k_to: t.component(r.component).curvature(),
            })
        }
        CollisionFlag::Grazing => Err(Singularity::Grazing),
        CollisionFlag::Corner => Err(Singularity::Corner),
        CollisionFlag::UnfoldOverflow => Err(Singularity::UnfoldOverflow),
    }
}

pub fn step(t: &Table, x: PhasePoint) -> Result<Step, Singularity> {
    step_with(t, x, &DynamicsConfig::default())
}

/// First boundary collision of the ray leaving `x`.
pub fn next_collision_with(t: &Table, x: PhasePoint, cfg: &DynamicsConfig) -> CollisionResult {
    let loc = t.locate(x.s);
    let (sn, cs) = x.phi.sin_cos();
    let v = loc.normal * cs + loc.tangent * sn;
    let hit = match t.torus() {
        Some(torus) => cast_torus(t, torus, loc.position, v, cfg.unfold_radius),
        None => cast_bounded(t, loc.position, v).ok_or(Singularity::Corner),
    };
    let hit = match hit {
        Ok(h) => h,
        Err(flag) => {
            return CollisionResult {
                next: x,
                tau: f64::INFINITY,
                component: loc.component,
                flag: flag.into(),
            }
        }
    };
    let comp = t.component(hit.component);
    let local = if comp.shape.is_closed() {
        hit.local.rem_euclid(comp.length)
    } else {
        hit.local
    };
    let clamped = local.clamp(0.0, comp.length);
    let at = t.locate_local(hit.component, clamped);
    let vn = v.dot(at.normal);
    let phi = v.dot(at.tangent).atan2(-vn);
    let next = PhasePoint::new(t.global_s(hit.component, clamped), phi);
    let tol = t.corner_tolerance();
    let corner = !comp.shape.is_closed() && (local < tol || local > comp.length - tol);
    let flag = if corner || vn >= 0.0 {
        CollisionFlag::Corner
    } else if phi.abs() > FRAC_PI_2 - cfg.grazing_eps {
        CollisionFlag::Grazing
    } else {
        CollisionFlag::Ok
    };
    CollisionResult {
        next,
        tau: hit.tau,
        component: hit.component,
        flag,
    }
}

pub fn next_collision(t: &Table, x: PhasePoint) -> CollisionResult {
    next_collision_with(t, x, &DynamicsConfig::default())
}

/// The billiard map `f`.
pub fn billiard_map(t: &Table, x: PhasePoint) -> Result<PhasePoint, Singularity> {
    step(t, x).map(|s| s.to)
}

/// 2×2 matrix acting on `(dq, dφ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    /// Determinant by Kahan's fused-multiply-add scheme.
    pub fn det(&self) -> f64 {
        let m = &self.0;
        let bc = m[0][1] * m[1][0];
        let err = (-m[0][1]).mul_add(m[1][0], bc);
        m[0][0].mul_add(m[1][1], -bc) + err
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Conjugation by the time reversal `diag(1, -1)`.
    pub fn reversed(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], -m[0][1]], [-m[1][0], m[1][1]]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

/// `Df` from the collision data of one step.
pub fn derivative(step: &Step) -> Mat2 {
    let (c0, c1) = (step.from.phi.cos(), step.to.phi.cos());
    let (k0, k1, tau) = (step.k_from, step.k_to, step.tau);
    let scale = -1.0 / c1;
    let a = tau.mul_add(k0, c0);
    let d = tau.mul_add(k1, c1);
    // τK₀K₁ + K₀c₁ + K₁c₀ = K₁(τK₀ + c₀) + K₀c₁
    let c = k1.mul_add(a, k0 * c1);
    Mat2([[scale * a, scale * tau], [scale * c, scale * d]])
}

/// Derivative of the billiard map at `x`.
pub fn tangent_map(t: &Table, x: PhasePoint) -> Result<Mat2, Singularity> {
    step(t, x).map(|s| derivative(&s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("conjugate point at the collision: tau + 1/B+ = 0")]
pub struct FocusingPathology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavefront {
    pub b_minus: f64,
    pub b_plus: f64,
}

/// Propagate the post-collisional wavefront curvature across one free flight
/// of length `tau` and one reflection at curvature `k_next`, angle `phi_next`.
/// `b_plus = ±∞` encodes a wavefront focused at the departure point.
pub fn curvature_evolve(
    b_plus: f64,
    tau: f64,
    k_next: f64,
    phi_next: f64,
) -> Result<Wavefront, FocusingPathology> {
    let inv = if b_plus.is_infinite() { 0.0 } else { b_plus.recip() };
    let denom = tau + inv;
    if denom == 0.0 {
        return Err(FocusingPathology);
    }
    let b_minus = denom.recip();
    Ok(Wavefront {
        b_minus,
        b_plus: b_minus + 2.0 * k_next / phi_next.cos(),
    })
}

/// Expansion `|1 + τ B⁺|` of the p-metric over one free flight.
pub fn expansion_factor(b_plus: f64, tau: f64) -> f64 {
    (1.0 + tau * b_plus).abs()
}

/// Tangent vector in collision coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub dq: f64,
    pub dphi: f64,
    pub b_plus: Option<f64>,
}

impl TangentVector {
    pub fn new(dq: f64, dphi: f64) -> Self {
        Self {
            dq,
            dphi,
            b_plus: None,
        }
    }

    /// Vector of unit `dq` whose slope encodes the post-collisional
    /// curvature `b_plus`: `dφ/dq = B⁺ cos φ − K`.
    pub fn from_wavefront(b_plus: f64, phi: f64, k: f64) -> Self {
        if b_plus.is_infinite() {
            return Self {
                dq: 0.0,
                dphi: 1.0,
                b_plus: Some(b_plus),
            };
        }
        Self {
            dq: 1.0,
            dphi: b_plus * phi.cos() - k,
            b_plus: Some(b_plus),
        }
    }

    /// `dφ/dq`, infinite for vertical vectors.
    pub fn slope(&self) -> f64 {
        if self.dq == 0.0 {
            f64::INFINITY
        } else {
            self.dphi / self.dq
        }
    }

    /// p-norm `cos φ |dq|`.
    pub fn p_norm(&self, phi: f64) -> f64 {
        phi.cos() * self.dq.abs()
    }

    pub fn mapped(&self, m: &Mat2) -> Self {
        let [dq, dphi] = m.apply([self.dq, self.dphi]);
        Self {
            dq,
            dphi,
            b_plus: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Terminal {
    Completed,
    CensoredSingular { step: u64, flag: Singularity },
    CensoredHorizon { step: u64 },
}

impl Terminal {
    pub fn is_censored(&self) -> bool {
        !matches!(self, Terminal::Completed)
    }

    /// Index of the last iterate that was computed.
    pub fn censor_step(&self) -> Option<u64> {
        match *self {
            Terminal::Completed => None,
            Terminal::CensoredSingular { step, .. } | Terminal::CensoredHorizon { step } => {
                Some(step)
            }
        }
    }
}

/// Iteration log of one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    /// Iterates `i ≥ 1` whose base point lies in the hole.
    pub hits: Vec<u64>,
    /// Number of iterates computed.
    pub steps: u64,
    pub terminal: Terminal,
    /// `(s_i, φ_i)` for `i = 0..=steps` when requested.
    pub path: Option<Vec<PhasePoint>>,
}

/// Iterate `f` up to `max_steps` times, logging hole hits at `i ≥ 1`.
pub fn orbit(
    t: &Table,
    x0: PhasePoint,
    max_steps: u64,
    hole: Option<&Hole>,
) -> OrbitRecord {
    orbit_with(t, x0, max_steps, hole, false, &DynamicsConfig::default())
}

pub fn orbit_with(
    t: &Table,
    x0: PhasePoint,
    max_steps: u64,
    hole: Option<&Hole>,
    record_path: bool,
    cfg: &DynamicsConfig,
) -> OrbitRecord {
    let mut hits = Vec::new();
    let mut path = record_path.then(|| vec![x0]);
    let mut x = x0;
    let mut terminal = Terminal::Completed;
    let mut steps = 0;
    for i in 1..=max_steps {
        let r = next_collision_with(t, x, cfg);
        if r.flag != CollisionFlag::Ok {
            let flag = match r.flag {
                CollisionFlag::Grazing => Singularity::Grazing,
                CollisionFlag::Corner => Singularity::Corner,
                _ => Singularity::UnfoldOverflow,
            };
            terminal = if flag == Singularity::UnfoldOverflow {
                Terminal::CensoredHorizon { step: i - 1 }
            } else {
                Terminal::CensoredSingular { step: i - 1, flag }
            };
            break;
        }
        x = r.next;
        steps = i;
        if let Some(p) = path.as_mut() {
            p.push(x);
        }
        if hole.is_some_and(|h| h.contains(x.s)) {
            hits.push(i);
        }
    }
    OrbitRecord {
        hits,
        steps,
        terminal,
        path,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_table, make_hole, TableSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn sinai() -> Table {
        build_table(&TableSpec::SinaiTorus {
            centers: vec![Vec2::new(0.5, 0.5)],
            radii: vec![0.2],
        })
        .unwrap()
    }

    fn stadium() -> Table {
        build_table(&TableSpec::Stadium {
            flat_length: 2.0,
            half_height: None,
        })
        .unwrap()
    }

    #[test]
    fn sinai_symmetry_axis_orbit() {
        let t = sinai();
        // (0.3, 0.5) moving in -x
        let x = PhasePoint::new(PI * 0.2, 0.0);
        let r = next_collision(&t, x);
        assert_eq!(r.flag, CollisionFlag::Ok);
        assert_abs_diff_eq!(r.tau, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(r.next.s, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.next.phi, 0.0, epsilon = 1e-12);
        let p = t.locate(r.next.s).position;
        assert_abs_diff_eq!(p.x, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn stadium_bouncing_orbit_has_period_two() {
        let t = stadium();
        let x = PhasePoint::new(1.0, 0.0);
        let r = next_collision(&t, x);
        assert_eq!(r.flag, CollisionFlag::Ok);
        assert_abs_diff_eq!(r.tau, 2.0, epsilon = 1e-12);
        // top flat starts at s = 2 + π, midpoint at 3 + π
        assert_abs_diff_eq!(r.next.s, 3.0 + PI, epsilon = 1e-12);
        let back = billiard_map(&t, r.next).unwrap();
        assert_abs_diff_eq!(back.s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.phi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sinai_symmetry_derivative() {
        let t = sinai();
        let m = tangent_map(&t, PhasePoint::new(PI * 0.2, 0.0)).unwrap();
        let expected = [[-4.0, -0.6], [-25.0, -4.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m.0[i][j], expected[i][j], epsilon = 1e-9);
            }
        }
        assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_bounce_is_a_shear() {
        let t = stadium();
        let m = tangent_map(&t, PhasePoint::new(1.0, 0.0)).unwrap();
        assert_eq!(m.0, [[-1.0, -2.0], [-0.0, -1.0]]);
    }

    #[test]
    fn curvature_recursion_examples() {
        let w = curvature_evolve(f64::INFINITY, 0.5, 5.0, 0.0).unwrap();
        assert_abs_diff_eq!(w.b_minus, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.b_plus, 12.0, epsilon = 1e-15);
        let w = curvature_evolve(f64::INFINITY, 0.6, 5.0, 0.0).unwrap();
        assert_abs_diff_eq!(w.b_plus, 1.0 / 0.6 + 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.b_plus, 11.6667, epsilon = 1e-4);
        assert_eq!(curvature_evolve(-2.0, 0.5, 0.0, 0.0), Err(FocusingPathology));
    }

    #[test]
    fn expansion_examples() {
        assert_relative_eq!(expansion_factor(12.0, 0.6), 8.2, max_relative = 1e-15);
        for tau in [0.1, 1.0, 7.0] {
            assert_eq!(expansion_factor(0.0, tau), 1.0);
        }
    }

    #[test]
    fn tangent_vector_slope_encodes_wavefront() {
        let v = TangentVector::from_wavefront(3.0, 0.4, 5.0);
        assert_abs_diff_eq!(v.slope(), 3.0 * 0.4f64.cos() - 5.0, epsilon = 1e-15);
        assert!(TangentVector::from_wavefront(f64::INFINITY, 0.4, 5.0)
            .slope()
            .is_infinite());
    }

    #[test]
    fn orbit_on_bouncing_orbit_misses_side_hole() {
        let t = stadium();
        // hole on the bottom flat away from the bouncing point
        let hole = make_hole(&t, 0.4, 0.1).unwrap();
        let rec = orbit(&t, PhasePoint::new(1.0, 0.0), 100, Some(&hole));
        assert!(rec.hits.is_empty());
        assert_eq!(rec.terminal, Terminal::Completed);
        assert_eq!(rec.steps, 100);
        assert!(rec.path.is_none());
    }

    #[test]
    fn orbit_excludes_iterate_zero() {
        let t = stadium();
        let hole = make_hole(&t, 1.0, 0.1).unwrap();
        let rec = orbit(&t, PhasePoint::new(1.0, 0.0), 6, Some(&hole));
        assert_eq!(rec.hits, vec![2, 4, 6]);
    }

    #[test]
    fn corner_hit_censors() {
        let t = stadium();
        // from the bottom flat midpoint aim exactly at the junction (1, 1)
        let dir = Vec2::new(1.0, 2.0);
        let phi = dir.x.atan2(dir.y);
        let r = next_collision(&t, PhasePoint::new(1.0, phi));
        assert_eq!(r.flag, CollisionFlag::Corner);
        let rec = orbit(&t, PhasePoint::new(1.0, phi), 10, None);
        assert!(matches!(
            rec.terminal,
            Terminal::CensoredSingular {
                step: 0,
                flag: Singularity::Corner
            }
        ));
    }

    #[test]
    fn corridor_flight_overflows_small_cap() {
        let t = sinai();
        // nearly tangential launch from the top point of the scatterer
        let top = PhasePoint::new(1.5 * PI * 0.2, -(FRAC_PI_2 - 1e-3));
        let cfg = DynamicsConfig {
            grazing_eps: GRAZING_EPS,
            unfold_radius: 0.5,
        };
        let r = next_collision_with(&t, top, &cfg);
        assert_eq!(r.flag, CollisionFlag::UnfoldOverflow);
    }
}

//! Billiard tables built from flat segments and circular arcs, boundary
//! parametrization by arclength, and holes on the boundary.
//!
//! Orientation: every boundary loop is traversed with the table interior on
//! the left, so the inward normal is the tangent rotated by +90 degrees. The
//! outer boundary runs counterclockwise, scatterers clockwise. Signed
//! curvature is positive on dispersing pieces, negative on focusing arcs and
//! zero on flats.

mod build;
mod validate;
mod vec2;

use std::f64::consts::TAU;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{
    build_table, reference_flower, ComponentSpec, ScattererSpec, TableSpec,
};
pub use validate::{validate_table, Violation};
pub use vec2::Vec2;

/// Closure tolerance for head-to-tail component junctions, relative to the
/// table diameter.
pub const JUNCTION_TOL: f64 = 1e-12;

/// Corner tolerance relative to the perimeter.
pub const CORNER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scatterers {0} and {1} overlap")]
    OverlappingScatterers(usize, usize),
    #[error("squash construction infeasible: center distance {distance} must exceed r2 - r1 = {gap}")]
    SquashInfeasible { distance: f64, gap: f64 },
    #[error("focusing arc {component} spans {span:.6} rad, longer than half a circle")]
    ArcLongerThanHalfCircle { component: usize, span: f64 },
    #[error("component {0} does not connect to the next one (gap {1:e})")]
    OpenBoundary(usize, f64),
    #[error("boundary loop starting at component {0} is not oriented with the interior on the left")]
    WrongOrientation(usize),
    #[error("hole [{lo:.6}, {hi:.6}] crosses an endpoint of component {component} (local length {length:.6}){}", hint.map(|h| format!("; nearest admissible center_s = {h:.12}")).unwrap_or_default())]
    HoleCrossesJunction {
        component: usize,
        lo: f64,
        hi: f64,
        length: f64,
        hint: Option<f64>,
    },
    #[error("hole radius must be positive, got {0}")]
    NonPositiveHoleRadius(f64),
    #[error("hole of radius {radius} does not fit on closed component {component} of length {length}")]
    HoleTooLarge {
        component: usize,
        radius: f64,
        length: f64,
    },
    #[error("arclength {0} outside [0, {1})")]
    OutOfRange(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableClass {
    SinaiTorus,
    Diamond,
    Stadium,
    Squash,
    Flower,
    SemiDispersing,
}

impl TableClass {
    pub fn name(self) -> &'static str {
        match self {
            TableClass::SinaiTorus => "sinai_torus",
            TableClass::Diamond => "diamond",
            TableClass::Stadium => "stadium",
            TableClass::Squash => "squash",
            TableClass::Flower => "flower",
            TableClass::SemiDispersing => "semi_dispersing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureKind {
    Flat,
    Dispersing,
    Focusing,
}

/// A circle traversed from `start_angle`, counterclockwise when `ccw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularPiece {
    pub center: Vec2,
    pub radius: f64,
    pub start_angle: f64,
    /// Angular extent, in (0, 2π] (2π only for closed scatterers).
    pub span: f64,
    pub ccw: bool,
}

impl CircularPiece {
    fn dir(&self) -> f64 {
        if self.ccw {
            1.0
        } else {
            -1.0
        }
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.start_angle + self.dir() * t / self.radius
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        self.center + Vec2::from_angle(self.angle_at(t)) * self.radius
    }

    pub fn tangent_at(&self, t: f64) -> Vec2 {
        Vec2::from_angle(self.angle_at(t)).perp() * self.dir()
    }

    /// Counterclockwise-traversed arcs keep the table inside their circle.
    pub fn curvature(&self) -> f64 {
        -self.dir() / self.radius
    }

    /// Local arclength of the point on the circle at polar angle `angle`,
    /// measured from the start in the direction of travel, in [0, 2πρ).
    pub fn param_of_angle(&self, angle: f64) -> f64 {
        ((angle - self.start_angle) * self.dir()).rem_euclid(TAU) * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Segment { start: Vec2, end: Vec2 },
    /// Proper arc: span < 2π.
    Arc(CircularPiece),
    /// Closed circular scatterer, clockwise from polar angle 0.
    Scatterer { center: Vec2, radius: f64 },
}

impl Shape {
    pub fn circular(&self) -> Option<CircularPiece> {
        match *self {
            Shape::Segment { .. } => None,
            Shape::Arc(c) => Some(c),
            Shape::Scatterer { center, radius } => Some(CircularPiece {
                center,
                radius,
                start_angle: 0.0,
                span: TAU,
                ccw: false,
            }),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Shape::Segment { start, end } => start.distance(*end),
            Shape::Arc(c) => c.radius * c.span,
            Shape::Scatterer { radius, .. } => TAU * radius,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Shape::Scatterer { .. })
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        match self {
            Shape::Segment { start, end } => {
                let len = start.distance(*end);
                *start + (*end - *start) * (t / len)
            }
            _ => self.circular().unwrap().point_at(t),
        }
    }

    pub fn tangent_at(&self, t: f64) -> Vec2 {
        match self {
            Shape::Segment { start, end } => (*end - *start).normalized(),
            _ => self.circular().unwrap().tangent_at(t),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            Shape::Segment { .. } => 0.0,
            _ => self.circular().unwrap().curvature(),
        }
    }

    pub fn kind(&self) -> CurvatureKind {
        let k = self.curvature();
        if k > 0.0 {
            CurvatureKind::Dispersing
        } else if k < 0.0 {
            CurvatureKind::Focusing
        } else {
            CurvatureKind::Flat
        }
    }

    pub fn start_point(&self) -> Vec2 {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> Vec2 {
        self.point_at(self.length())
    }

    /// Nearest point parameter (clamped to the piece) and its distance.
    pub fn nearest(&self, p: Vec2) -> (f64, f64) {
        match self {
            Shape::Segment { start, end } => {
                let d = *end - *start;
                let len = d.norm();
                let t = ((p - *start).dot(d) / len).clamp(0.0, len);
                (t, self.point_at(t).distance(p))
            }
            _ => {
                let c = self.circular().unwrap();
                let len = self.length();
                let rel = p - c.center;
                let t = if rel.norm_sq() == 0.0 {
                    0.0
                } else {
                    c.param_of_angle(rel.angle())
                };
                if self.is_closed() || t <= len {
                    return (t, (rel.norm() - c.radius).abs());
                }
                let d0 = c.point_at(0.0).distance(p);
                let d1 = c.point_at(len).distance(p);
                if d0 <= d1 {
                    (0.0, d0)
                } else {
                    (len, d1)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    pub shape: Shape,
    pub length: f64,
    /// Global arclength where this component starts.
    pub offset: f64,
    pub loop_id: usize,
}

impl BoundaryComponent {
    pub fn curvature(&self) -> f64 {
        self.shape.curvature()
    }

    pub fn kind(&self) -> CurvatureKind {
        self.shape.kind()
    }
}

/// Periodic cell data for the torus class.
#[derive(Debug, Clone, PartialEq)]
pub struct Torus {
    pub cell: Vec2,
    /// Per scatterer, the lattice offsets of the images that overlap the
    /// fundamental cell.
    pub image_offsets: Vec<Vec<(i64, i64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub position: Vec2,
    /// Unit inward normal.
    pub normal: Vec2,
    /// Unit tangent in the direction of increasing arclength.
    pub tangent: Vec2,
    pub curvature: f64,
    pub component: usize,
    /// Arclength from the start of the component.
    pub local: f64,
    /// Within the corner tolerance of a junction.
    pub corner: bool,
}

/// Immutable billiard table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    class: TableClass,
    components: Vec<BoundaryComponent>,
    perimeter: f64,
    loops: Vec<Range<usize>>,
    torus: Option<Torus>,
    diameter: f64,
}

impl Table {
    /// Assemble a table from loops of shapes, each loop listed head-to-tail.
    /// Closure and orientation of every loop are checked.
    pub fn from_loops(
        class: TableClass,
        loops: Vec<Vec<Shape>>,
        torus: Option<Torus>,
    ) -> Result<Table, GeometryError> {
        let mut components = Vec::new();
        let mut ranges = Vec::new();
        let mut offset = 0.0;
        for (loop_id, shapes) in loops.into_iter().enumerate() {
            if shapes.is_empty() {
                return Err(GeometryError::InvalidParameter("empty boundary loop".into()));
            }
            let first = components.len();
            for shape in shapes {
                let length = shape.length();
                if !(length > 0.0) || !length.is_finite() {
                    return Err(GeometryError::InvalidParameter(format!(
                        "component {} has non-positive length",
                        components.len()
                    )));
                }
                if let Shape::Arc(c) = shape {
                    if !(c.span < TAU) || !(c.radius > 0.0) {
                        return Err(GeometryError::InvalidParameter(format!(
                            "arc {} must have positive radius and span < 2π",
                            components.len()
                        )));
                    }
                }
                components.push(BoundaryComponent {
                    shape,
                    length,
                    offset,
                    loop_id,
                });
                offset += length;
            }
            ranges.push(first..components.len());
        }
        let perimeter = offset;

        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &components {
            for p in sample_points(&c.shape, 16) {
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        let diameter = match &torus {
            Some(t) => t.cell.norm(),
            None => (hi - lo).norm(),
        };

        let table = Table {
            class,
            components,
            perimeter,
            loops: ranges,
            torus,
            diameter,
        };
        table.check_closure()?;
        table.check_orientation()?;
        Ok(table)
    }

    fn check_closure(&self) -> Result<(), GeometryError> {
        let tol = JUNCTION_TOL * self.diameter.max(1.0);
        for range in &self.loops {
            if range.len() == 1 && self.components[range.start].shape.is_closed() {
                continue;
            }
            for i in range.clone() {
                let next = self.next_in_loop(i);
                let gap = self.components[i]
                    .shape
                    .end_point()
                    .distance(self.components[next].shape.start_point());
                if gap > tol {
                    return Err(GeometryError::OpenBoundary(i, gap));
                }
            }
        }
        Ok(())
    }

    fn check_orientation(&self) -> Result<(), GeometryError> {
        if self.torus.is_some() {
            return Ok(());
        }
        // The first loop is the outer boundary: counterclockwise. Any further
        // loops are scatterers inside it: clockwise.
        for (idx, range) in self.loops.iter().enumerate() {
            let area = self.signed_area(range.clone());
            let ok = if idx == 0 { area > 0.0 } else { area < 0.0 };
            if !ok {
                return Err(GeometryError::WrongOrientation(range.start));
            }
        }
        Ok(())
    }

    /// Signed area enclosed by a loop (Green's theorem, exact for arcs).
    pub(crate) fn signed_area(&self, range: Range<usize>) -> f64 {
        let mut area = 0.0;
        for i in range {
            match self.components[i].shape {
                Shape::Segment { start, end } => area += 0.5 * start.cross(end),
                shape => {
                    let c = shape.circular().unwrap();
                    let a0 = c.start_angle;
                    let a1 = c.angle_at(shape.length());
                    // ∮ x dy - y dx over a circular arc
                    let r = c.radius;
                    let (cx, cy) = (c.center.x, c.center.y);
                    let term = r * r * (a1 - a0)
                        + cx * r * (a1.sin() - a0.sin())
                        - cy * r * (a1.cos() - a0.cos());
                    area += 0.5 * term;
                }
            }
        }
        area
    }

    pub fn class(&self) -> TableClass {
        self.class
    }

    pub fn components(&self) -> &[BoundaryComponent] {
        &self.components
    }

    pub fn component(&self, id: usize) -> &BoundaryComponent {
        &self.components[id]
    }

    pub fn loops(&self) -> &[Range<usize>] {
        &self.loops
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn torus(&self) -> Option<&Torus> {
        self.torus.as_ref()
    }

    pub fn corner_tolerance(&self) -> f64 {
        CORNER_TOL * self.perimeter
    }

    pub(crate) fn next_in_loop(&self, i: usize) -> usize {
        let r = &self.loops[self.components[i].loop_id];
        if i + 1 < r.end {
            i + 1
        } else {
            r.start
        }
    }

    pub(crate) fn prev_in_loop(&self, i: usize) -> usize {
        let r = &self.loops[self.components[i].loop_id];
        if i > r.start {
            i - 1
        } else {
            r.end - 1
        }
    }

    /// Components sharing a junction with `i`.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        if i == j || self.components[i].loop_id != self.components[j].loop_id {
            return false;
        }
        if self.components[i].shape.is_closed() {
            return false;
        }
        self.next_in_loop(i) == j || self.prev_in_loop(i) == j
    }

    /// Component containing global arclength `s` (wrapped into [0, perimeter)).
    pub fn component_at(&self, s: f64) -> (usize, f64) {
        let s = self.wrap(s);
        let idx = self
            .components
            .partition_point(|c| c.offset <= s)
            .saturating_sub(1);
        let c = &self.components[idx];
        (idx, (s - c.offset).min(c.length))
    }

    pub fn wrap(&self, s: f64) -> f64 {
        let w = s.rem_euclid(self.perimeter);
        if w >= self.perimeter {
            0.0
        } else {
            w
        }
    }

    /// Boundary frame at global arclength `s`.
    pub fn locate(&self, s: f64) -> Location {
        let (id, local) = self.component_at(s);
        self.locate_local(id, local)
    }

    pub fn locate_local(&self, id: usize, local: f64) -> Location {
        let c = &self.components[id];
        let tangent = c.shape.tangent_at(local);
        let tol = self.corner_tolerance();
        let corner = !c.shape.is_closed() && (local < tol || c.length - local < tol);
        Location {
            position: c.shape.point_at(local),
            normal: tangent.perp(),
            tangent,
            curvature: c.curvature(),
            component: id,
            local,
            corner,
        }
    }

    /// Checked variant of [`Table::locate`] that rejects `s` outside
    /// `[0, perimeter)`.
    pub fn try_locate(&self, s: f64) -> Result<Location, GeometryError> {
        if !(0.0..self.perimeter).contains(&s) {
            return Err(GeometryError::OutOfRange(s, self.perimeter));
        }
        Ok(self.locate(s))
    }

    /// Global arclength of the boundary point nearest to `p`.
    pub fn project(&self, p: Vec2) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for c in &self.components {
            let (t, d) = c.shape.nearest(p);
            if d < best.0 {
                best = (d, c.offset + t);
            }
        }
        self.wrap(best.1)
    }

    pub fn global_s(&self, component: usize, local: f64) -> f64 {
        let c = &self.components[component];
        if c.shape.is_closed() {
            c.offset + local.rem_euclid(c.length)
        } else {
            c.offset + local.clamp(0.0, c.length)
        }
    }
}

fn sample_points(shape: &Shape, n: usize) -> Vec<Vec2> {
    let len = shape.length();
    (0..=n)
        .map(|k| shape.point_at(len * k as f64 / n as f64))
        .collect()
}

/// Boundary hole `B_r(q)`: an arclength interval inside one smooth component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hole {
    pub component: usize,
    pub center_s: f64,
    pub radius: f64,
    pub local_center: f64,
    /// SRB measure of `B_r(q) × S¹`.
    pub measure: f64,
    component_offset: f64,
    component_length: f64,
    closed: bool,
}

impl Hole {
    /// Membership of a global arclength coordinate.
    pub fn contains(&self, s: f64) -> bool {
        let local = s - self.component_offset;
        if !(0.0..=self.component_length).contains(&local) {
            return false;
        }
        let mut d = (local - self.local_center).abs();
        if self.closed {
            d = d.min(self.component_length - d);
        }
        d <= self.radius
    }

    /// Global arclength intervals covered by the hole (two pieces when it
    /// wraps around the origin of a closed scatterer).
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let lo = self.local_center - self.radius;
        let hi = self.local_center + self.radius;
        let off = self.component_offset;
        let len = self.component_length;
        if self.closed && lo < 0.0 {
            vec![(off, off + hi), (off + len + lo, off + len)]
        } else if self.closed && hi > len {
            vec![(off, off + hi - len), (off + lo, off + len)]
        } else {
            vec![(off + lo, off + hi)]
        }
    }

    pub fn kind(&self, table: &Table) -> CurvatureKind {
        table.component(self.component).kind()
    }
}

/// Place a hole of geodesic radius `r` centered at global arclength `center_s`.
pub fn make_hole(table: &Table, center_s: f64, r: f64) -> Result<Hole, GeometryError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(GeometryError::NonPositiveHoleRadius(r));
    }
    let (id, local) = table.component_at(center_s);
    let c = table.component(id);
    let closed = c.shape.is_closed();
    if closed {
        if 2.0 * r >= c.length {
            return Err(GeometryError::HoleTooLarge {
                component: id,
                radius: r,
                length: c.length,
            });
        }
    } else if local - r < 0.0 || local + r > c.length {
        let hint = (c.length > 2.0 * r).then(|| c.offset + local.clamp(r, c.length - r));
        return Err(GeometryError::HoleCrossesJunction {
            component: id,
            lo: c.offset + local - r,
            hi: c.offset + local + r,
            length: c.length,
            hint,
        });
    }
    Ok(Hole {
        component: id,
        center_s: table.wrap(center_s),
        radius: r,
        local_center: local,
        measure: 2.0 * r / table.perimeter(),
        component_offset: c.offset,
        component_length: c.length,
        closed,
    })
}

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::{CurvatureKind, Shape, Table, TableClass, Vec2};

/// One failed geometric hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The full circle of focusing arc `arc` meets component `other`.
    FocusingCircle { arc: usize, other: usize },
    /// Two dispersing components meet tangentially.
    Cusp { first: usize, second: usize },
    /// Two components cross away from their shared junction.
    ComponentsIntersect { first: usize, second: usize },
    /// Focusing arc longer than a half circle on a flower table.
    ArcLongerThanHalfCircle { component: usize },
    /// A squash must have exactly one arc longer than a half circle.
    SquashLongArcs { count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FocusingCircle { arc, other } => write!(
                f,
                "focusing condition violated: circle of arc {arc} meets component {other}"
            ),
            Violation::Cusp { first, second } => {
                write!(f, "cusp: dispersing components {first} and {second} meet tangentially")
            }
            Violation::ComponentsIntersect { first, second } => {
                write!(f, "components {first} and {second} intersect")
            }
            Violation::ArcLongerThanHalfCircle { component } => {
                write!(f, "focusing arc {component} is longer than a half circle")
            }
            Violation::SquashLongArcs { count } => write!(
                f,
                "squash must have exactly one arc longer than a half circle, found {count}"
            ),
        }
    }
}

/// Report every violated hypothesis; an empty report means the table is
/// admissible.
pub fn validate_table(t: &Table) -> Vec<Violation> {
    let tol = 1e-9 * t.diameter().max(1.0);
    let mut out = Vec::new();
    let comps = t.components();

    // Focusing arcs: no other boundary point on or inside the full circle,
    // apart from the junctions the arc shares with its neighbours.
    for (i, ci) in comps.iter().enumerate() {
        if ci.kind() != CurvatureKind::Focusing {
            continue;
        }
        let circle = ci.shape.circular().unwrap();
        for (j, cj) in comps.iter().enumerate() {
            if i == j {
                continue;
            }
            let (_, d) = cj.shape.nearest(circle.center);
            let inside = d < circle.radius - tol;
            let touches = !t.adjacent(i, j) && d <= circle.radius + tol;
            if inside || touches {
                out.push(Violation::FocusingCircle { arc: i, other: j });
            }
        }
    }

    for range in t.loops() {
        if range.len() == 1 && comps[range.start].shape.is_closed() {
            continue;
        }
        for i in range.clone() {
            let j = t.next_in_loop(i);
            if comps[i].kind() == CurvatureKind::Dispersing
                && comps[j].kind() == CurvatureKind::Dispersing
            {
                let t_in = comps[i].shape.tangent_at(comps[i].length);
                let t_out = comps[j].shape.tangent_at(0.0);
                // zero interior angle: outgoing tangent reverses the incoming one
                if (t_out + t_in).norm() < 1e-9 {
                    out.push(Violation::Cusp { first: i, second: j });
                }
            }
        }
    }

    if t.torus().is_none() {
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                let mut pts = intersections(&comps[i].shape, &comps[j].shape, tol);
                if t.adjacent(i, j) {
                    let shared = [
                        comps[i].shape.start_point(),
                        comps[i].shape.end_point(),
                    ];
                    pts.retain(|p| shared.iter().all(|q| p.distance(*q) > 1e3 * tol));
                }
                if !pts.is_empty() {
                    out.push(Violation::ComponentsIntersect {
                        first: i,
                        second: j,
                    });
                }
            }
        }
    }

    match t.class() {
        TableClass::Flower => {
            for (i, c) in comps.iter().enumerate() {
                if let Shape::Arc(a) = c.shape {
                    if a.ccw && a.span > PI + 1e-12 {
                        out.push(Violation::ArcLongerThanHalfCircle { component: i });
                    }
                }
            }
        }
        TableClass::Squash => {
            let count = comps
                .iter()
                .filter(|c| matches!(c.shape, Shape::Arc(a) if a.span > PI))
                .count();
            if count != 1 {
                out.push(Violation::SquashLongArcs { count });
            }
        }
        _ => {}
    }
    out
}

fn on_piece(shape: &Shape, p: Vec2, tol: f64) -> bool {
    shape.nearest(p).1 <= tol
}

/// Points where two pieces meet.
fn intersections(a: &Shape, b: &Shape, tol: f64) -> Vec<Vec2> {
    let cands = match (a, b) {
        (Shape::Segment { start: p, end: q }, Shape::Segment { start: r, end: s }) => {
            let d1 = *q - *p;
            let d2 = *s - *r;
            let den = d1.cross(d2);
            if den.abs() < 1e-15 * d1.norm() * d2.norm() {
                // parallel: report collinear overlap
                if (*r - *p).cross(d1).abs() > tol * d1.norm() {
                    vec![]
                } else {
                    [*p, *q, *r, *s]
                        .into_iter()
                        .filter(|x| on_piece(a, *x, tol) && on_piece(b, *x, tol))
                        .collect()
                }
            } else {
                let u = (*r - *p).cross(d2) / den;
                vec![*p + d1 * u]
            }
        }
        (Shape::Segment { start, end }, other) | (other, Shape::Segment { start, end }) => {
            let c = other.circular().unwrap();
            let d = (*end - *start).normalized();
            let w = *start - c.center;
            let b = w.dot(d);
            let disc = b * b - (w.norm_sq() - c.radius * c.radius);
            if disc < 0.0 {
                vec![]
            } else {
                let sq = disc.sqrt();
                vec![*start + d * (-b - sq), *start + d * (-b + sq)]
            }
        }
        _ => {
            let (c1, c2) = (a.circular().unwrap(), b.circular().unwrap());
            let dvec = c2.center - c1.center;
            let d = dvec.norm();
            if d == 0.0 || d > c1.radius + c2.radius + tol || d < (c1.radius - c2.radius).abs() - tol
            {
                vec![]
            } else {
                let x = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2.0 * d);
                let h = (c1.radius * c1.radius - x * x).max(0.0).sqrt();
                let e = dvec * (1.0 / d);
                let base = c1.center + e * x;
                vec![base + e.perp() * h, base - e.perp() * h]
            }
        }
    };
    cands
        .into_iter()
        .filter(|p| on_piece(a, *p, tol) && on_piece(b, *p, tol))
        .collect()
}

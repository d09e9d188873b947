//! Named table constructors.
//!
//! Arclength origins:
//! - `sinai_torus`: scatterer k occupies `[Σ_{j<k} 2πρ_j, …)`; each starts at
//!   polar angle 0 (rightmost point) and runs clockwise.
//! - `diamond`: square `[0,a]²`; component k is the arc around corner k in the
//!   order (0,0), (a,0), (a,a), (0,a); s = 0 at the junction left of the
//!   square center.
//! - `stadium`: s = 0 at the left end of the bottom flat, counterclockwise.
//! - `squash`: large circle centered at the origin, small circle at
//!   `(d, 0)`; s = 0 at the large-circle end of the lower flat.
//! - `flower`: components in the listed order, s = 0 at the first start point.
//! - `semi_dispersing`: rectangle `[0,W]×[0,H]` from the origin
//!   counterclockwise, then scatterers in the listed order.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{CircularPiece, GeometryError, Shape, Table, TableClass, Torus, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcOrientation {
    /// Table inside the circle; traversed counterclockwise.
    Focusing,
    /// Table outside the circle; traversed clockwise.
    Dispersing,
}

/// One boundary piece of an explicitly listed (flower) table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentSpec {
    Segment {
        start: Vec2,
        end: Vec2,
    },
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        orientation: ArcOrientation,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSpec {
    pub center: Vec2,
    pub radius: f64,
}

/// Class tag plus class parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    SinaiTorus {
        centers: Vec<Vec2>,
        radii: Vec<f64>,
    },
    Diamond {
        square_side: f64,
        corner_radius: f64,
    },
    Stadium {
        flat_length: f64,
        /// Half distance between the flats; 1 (the default) gives the
        /// standard stadium, smaller values cut the arcs short of a half
        /// circle.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_height: Option<f64>,
    },
    Squash {
        r1: f64,
        r2: f64,
        center_distance: f64,
    },
    Flower {
        components: Vec<ComponentSpec>,
    },
    SemiDispersing {
        rect_width: f64,
        rect_height: f64,
        scatterers: Vec<ScattererSpec>,
    },
}

impl TableSpec {
    pub fn class(&self) -> TableClass {
        match self {
            TableSpec::SinaiTorus { .. } => TableClass::SinaiTorus,
            TableSpec::Diamond { .. } => TableClass::Diamond,
            TableSpec::Stadium { .. } => TableClass::Stadium,
            TableSpec::Squash { .. } => TableClass::Squash,
            TableSpec::Flower { .. } => TableClass::Flower,
            TableSpec::SemiDispersing { .. } => TableClass::SemiDispersing,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn arc(center: Vec2, radius: f64, start_angle: f64, span: f64, ccw: bool) -> Shape {
    Shape::Arc(CircularPiece {
        center,
        radius,
        start_angle,
        span,
        ccw,
    })
}

pub fn build_table(spec: &TableSpec) -> Result<Table, GeometryError> {
    match spec {
        TableSpec::SinaiTorus { centers, radii } => sinai_torus(centers, radii),
        TableSpec::Diamond {
            square_side,
            corner_radius,
        } => diamond(*square_side, *corner_radius),
        TableSpec::Stadium {
            flat_length,
            half_height,
        } => stadium(*flat_length, half_height.unwrap_or(1.0)),
        TableSpec::Squash {
            r1,
            r2,
            center_distance,
        } => squash(*r1, *r2, *center_distance),
        TableSpec::Flower { components } => flower(components),
        TableSpec::SemiDispersing {
            rect_width,
            rect_height,
            scatterers,
        } => semi_dispersing(*rect_width, *rect_height, scatterers),
    }
}

fn torus_distance(a: Vec2, b: Vec2) -> f64 {
    let d = a - b;
    let wrap = |x: f64| x - x.round();
    Vec2::new(wrap(d.x), wrap(d.y)).norm()
}

fn sinai_torus(centers: &[Vec2], radii: &[f64]) -> Result<Table, GeometryError> {
    if centers.is_empty() || centers.len() != radii.len() {
        return Err(GeometryError::InvalidParameter(
            "sinai_torus needs one radius per center and at least one scatterer".into(),
        ));
    }
    for (k, (&c, &r)) in centers.iter().zip(radii).enumerate() {
        positive("scatterer radius", r)?;
        if !(0.0..1.0).contains(&c.x) || !(0.0..1.0).contains(&c.y) {
            return Err(GeometryError::InvalidParameter(format!(
                "scatterer {k} center must lie in the unit cell [0,1)²"
            )));
        }
        if 2.0 * r >= 1.0 {
            return Err(GeometryError::OverlappingScatterers(k, k));
        }
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if torus_distance(centers[i], centers[j]) <= radii[i] + radii[j] {
                return Err(GeometryError::OverlappingScatterers(i, j));
            }
        }
    }
    let image_offsets = centers
        .iter()
        .zip(radii)
        .map(|(&c, &r)| {
            let mut offs = Vec::new();
            for a in -1i64..=1 {
                for b in -1i64..=1 {
                    let cx = c.x + a as f64;
                    let cy = c.y + b as f64;
                    if cx + r > 0.0 && cx - r < 1.0 && cy + r > 0.0 && cy - r < 1.0 {
                        offs.push((a, b));
                    }
                }
            }
            offs
        })
        .collect();
    let loops = centers
        .iter()
        .zip(radii)
        .map(|(&center, &radius)| vec![Shape::Scatterer { center, radius }])
        .collect();
    Table::from_loops(
        TableClass::SinaiTorus,
        loops,
        Some(Torus {
            cell: Vec2::new(1.0, 1.0),
            image_offsets,
        }),
    )
}

fn diamond(side: f64, radius: f64) -> Result<Table, GeometryError> {
    positive("square_side", side)?;
    positive("corner_radius", radius)?;
    if radius <= 0.5 * side {
        return Err(GeometryError::InvalidParameter(format!(
            "corner_radius {radius} must exceed half the side {} for the arcs to meet",
            0.5 * side
        )));
    }
    if radius >= side * FRAC_1_SQRT_2 {
        return Err(GeometryError::InvalidParameter(format!(
            "corner_radius {radius} must be below half the diagonal {} or the table is empty",
            side * FRAC_1_SQRT_2
        )));
    }
    let h = (radius * radius - 0.25 * side * side).sqrt();
    let lo = h.atan2(0.5 * side);
    let hi = (0.5 * side).atan2(h);
    let corners = [
        Vec2::new(0.0, 0.0),
        Vec2::new(side, 0.0),
        Vec2::new(side, side),
        Vec2::new(0.0, side),
    ];
    let shapes = corners
        .iter()
        .enumerate()
        .map(|(k, &c)| arc(c, radius, hi + k as f64 * PI / 2.0, hi - lo, false))
        .collect();
    Table::from_loops(TableClass::Diamond, vec![shapes], None)
}

fn stadium(flat_length: f64, half_height: f64) -> Result<Table, GeometryError> {
    positive("flat_length", flat_length)?;
    positive("half_height", half_height)?;
    if half_height > 1.0 {
        return Err(GeometryError::InvalidParameter(
            "half_height cannot exceed the arc radius 1".into(),
        ));
    }
    let half = 0.5 * flat_length;
    let (theta, overhang) = if half_height == 1.0 {
        (PI / 2.0, 0.0)
    } else {
        let t = half_height.asin();
        (t, t.cos())
    };
    let h = half_height;
    let shapes = vec![
        Shape::Segment {
            start: Vec2::new(-half - overhang, -h),
            end: Vec2::new(half + overhang, -h),
        },
        arc(Vec2::new(half, 0.0), 1.0, -theta, 2.0 * theta, true),
        Shape::Segment {
            start: Vec2::new(half + overhang, h),
            end: Vec2::new(-half - overhang, h),
        },
        arc(Vec2::new(-half, 0.0), 1.0, PI - theta, 2.0 * theta, true),
    ];
    Table::from_loops(TableClass::Stadium, vec![shapes], None)
}

fn squash(r1: f64, r2: f64, d: f64) -> Result<Table, GeometryError> {
    positive("r1", r1)?;
    positive("r2", r2)?;
    positive("center_distance", d)?;
    if r1 >= r2 {
        return Err(GeometryError::InvalidParameter(format!(
            "squash requires r1 < r2, got r1 = {r1}, r2 = {r2}"
        )));
    }
    if d <= r2 - r1 {
        return Err(GeometryError::SquashInfeasible {
            distance: d,
            gap: r2 - r1,
        });
    }
    // Common external tangents touch both circles where the normal makes
    // angle ±β with the center line, cos β = (r2 - r1)/d.
    let beta = ((r2 - r1) / d).acos();
    let small = Vec2::new(d, 0.0);
    let up = Vec2::from_angle(beta);
    let down = Vec2::from_angle(-beta);
    let shapes = vec![
        Shape::Segment {
            start: down * r2,
            end: small + down * r1,
        },
        arc(small, r1, -beta, 2.0 * beta, true),
        Shape::Segment {
            start: small + up * r1,
            end: up * r2,
        },
        arc(Vec2::new(0.0, 0.0), r2, beta, TAU - 2.0 * beta, true),
    ];
    Table::from_loops(TableClass::Squash, vec![shapes], None)
}

fn flower(components: &[ComponentSpec]) -> Result<Table, GeometryError> {
    if components.is_empty() {
        return Err(GeometryError::InvalidParameter(
            "flower needs at least one component".into(),
        ));
    }
    let mut shapes = Vec::with_capacity(components.len());
    for (k, spec) in components.iter().enumerate() {
        match *spec {
            ComponentSpec::Segment { start, end } => shapes.push(Shape::Segment { start, end }),
            ComponentSpec::Arc {
                center,
                radius,
                start_angle,
                end_angle,
                orientation,
            } => {
                positive("arc radius", radius)?;
                let ccw = orientation == ArcOrientation::Focusing;
                let span = if ccw {
                    (end_angle - start_angle).rem_euclid(TAU)
                } else {
                    (start_angle - end_angle).rem_euclid(TAU)
                };
                if ccw && span > PI + 1e-12 {
                    return Err(GeometryError::ArcLongerThanHalfCircle { component: k, span });
                }
                shapes.push(arc(center, radius, start_angle, span, ccw));
            }
        }
    }
    Table::from_loops(TableClass::Flower, vec![shapes], None)
}

fn semi_dispersing(
    width: f64,
    height: f64,
    scatterers: &[ScattererSpec],
) -> Result<Table, GeometryError> {
    positive("rect_width", width)?;
    positive("rect_height", height)?;
    for (k, sc) in scatterers.iter().enumerate() {
        positive("scatterer radius", sc.radius)?;
        let c = sc.center;
        let r = sc.radius;
        if c.x - r <= 0.0 || c.x + r >= width || c.y - r <= 0.0 || c.y + r >= height {
            return Err(GeometryError::InvalidParameter(format!(
                "scatterer {k} must lie strictly inside the rectangle"
            )));
        }
    }
    for i in 0..scatterers.len() {
        for j in i + 1..scatterers.len() {
            let (a, b) = (&scatterers[i], &scatterers[j]);
            if a.center.distance(b.center) <= a.radius + b.radius {
                return Err(GeometryError::OverlappingScatterers(i, j));
            }
        }
    }
    let corners = [
        Vec2::new(0.0, 0.0),
        Vec2::new(width, 0.0),
        Vec2::new(width, height),
        Vec2::new(0.0, height),
    ];
    let rect = (0..4)
        .map(|k| Shape::Segment {
            start: corners[k],
            end: corners[(k + 1) % 4],
        })
        .collect();
    let mut loops = vec![rect];
    loops.extend(scatterers.iter().map(|sc| {
        vec![Shape::Scatterer {
            center: sc.center,
            radius: sc.radius,
        }]
    }));
    Table::from_loops(TableClass::SemiDispersing, loops, None)
}

/// Four focusing half circles of radius 1 centered at `(±2, 0)`, `(0, ±2)`,
/// joined by dispersing arcs of radius √5 centered at `(±3, ±3)`. Satisfies
/// the focusing-circle clearance condition with transversal corners.
pub fn reference_flower() -> Vec<ComponentSpec> {
    let focus = [
        Vec2::new(2.0, 0.0),
        Vec2::new(0.0, 2.0),
        Vec2::new(-2.0, 0.0),
        Vec2::new(0.0, -2.0),
    ];
    let disp = [
        Vec2::new(3.0, 3.0),
        Vec2::new(-3.0, 3.0),
        Vec2::new(-3.0, -3.0),
        Vec2::new(3.0, -3.0),
    ];
    let mut out = Vec::new();
    for k in 0..4 {
        let start_angle = -PI / 2.0 + k as f64 * PI / 2.0;
        let end_angle = start_angle + PI;
        out.push(ComponentSpec::Arc {
            center: focus[k],
            radius: 1.0,
            start_angle,
            end_angle,
            orientation: ArcOrientation::Focusing,
        });
        let from = focus[k] + Vec2::from_angle(end_angle);
        let to = focus[(k + 1) % 4] + Vec2::from_angle(start_angle + PI / 2.0);
        out.push(ComponentSpec::Arc {
            center: disp[k],
            radius: 5f64.sqrt(),
            start_angle: (from - disp[k]).angle(),
            end_angle: (to - disp[k]).angle(),
            orientation: ArcOrientation::Dispersing,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurvatureKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinai_perimeter_is_circumference() {
        let t = build_table(&TableSpec::SinaiTorus {
            centers: vec![Vec2::new(0.5, 0.5)],
            radii: vec![0.2],
        })
        .unwrap();
        assert_eq!(t.components().len(), 1);
        assert_eq!(t.component(0).kind(), CurvatureKind::Dispersing);
        assert_abs_diff_eq!(t.perimeter(), 1.2566371, epsilon = 1e-7);
        assert_eq!(t.torus().unwrap().image_offsets[0], vec![(0, 0)]);
    }

    #[test]
    fn sinai_rejects_overlap_through_the_cell_wall() {
        let err = build_table(&TableSpec::SinaiTorus {
            centers: vec![Vec2::new(0.05, 0.5), Vec2::new(0.9, 0.5)],
            radii: vec![0.1, 0.1],
        })
        .unwrap_err();
        assert_eq!(err, GeometryError::OverlappingScatterers(0, 1));
    }

    #[test]
    fn stadium_perimeter() {
        let t = build_table(&TableSpec::Stadium {
            flat_length: 2.0,
            half_height: None,
        })
        .unwrap();
        assert_abs_diff_eq!(t.perimeter(), 4.0 + TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(t.perimeter(), 10.2831853, epsilon = 1e-7);
        let kinds: Vec<_> = t.components().iter().map(|c| c.kind()).collect();
        assert_eq!(
            kinds,
            vec![
                CurvatureKind::Flat,
                CurvatureKind::Focusing,
                CurvatureKind::Flat,
                CurvatureKind::Focusing
            ]
        );
    }

    #[test]
    fn squash_flat_length_matches_tangent_formula() {
        let t = build_table(&TableSpec::Squash {
            r1: 0.6,
            r2: 1.0,
            center_distance: 2.0,
        })
        .unwrap();
        let expected = (4.0f64 - 0.16).sqrt();
        assert_abs_diff_eq!(t.component(0).length, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(t.component(2).length, 1.9595918, epsilon = 1e-7);
        // exactly one arc longer than a half circle
        let long = t
            .components()
            .iter()
            .filter(|c| c.kind() == CurvatureKind::Focusing && c.length * c.curvature().abs() > PI)
            .count();
        assert_eq!(long, 1);
    }

    #[test]
    fn squash_rejects_nested_circles() {
        let err = build_table(&TableSpec::Squash {
            r1: 0.2,
            r2: 1.0,
            center_distance: 0.5,
        })
        .unwrap_err();
        assert!(matches!(err, GeometryError::SquashInfeasible { .. }));
    }

    #[test]
    fn diamond_radius_bounds() {
        assert!(build_table(&TableSpec::Diamond {
            square_side: 2.0,
            corner_radius: 1.2
        })
        .is_ok());
        assert!(build_table(&TableSpec::Diamond {
            square_side: 2.0,
            corner_radius: 0.9
        })
        .is_err());
        assert!(build_table(&TableSpec::Diamond {
            square_side: 2.0,
            corner_radius: 1.5
        })
        .is_err());
    }

    #[test]
    fn flower_rejects_long_focusing_arc() {
        let spec = vec![
            ComponentSpec::Arc {
                center: Vec2::new(0.0, 0.0),
                radius: 1.0,
                start_angle: -2.0,
                end_angle: 2.0,
                orientation: ArcOrientation::Focusing,
            },
            ComponentSpec::Segment {
                start: Vec2::from_angle(2.0),
                end: Vec2::from_angle(-2.0),
            },
        ];
        assert!(matches!(
            build_table(&TableSpec::Flower { components: spec }),
            Err(GeometryError::ArcLongerThanHalfCircle { component: 0, .. })
        ));
    }

    #[test]
    fn reference_flower_closes() {
        let t = build_table(&TableSpec::Flower {
            components: reference_flower(),
        })
        .unwrap();
        assert_eq!(t.components().len(), 8);
        let focusing = t
            .components()
            .iter()
            .filter(|c| c.kind() == CurvatureKind::Focusing)
            .count();
        assert_eq!(focusing, 4);
    }

    #[test]
    fn semi_dispersing_layout() {
        let t = build_table(&TableSpec::SemiDispersing {
            rect_width: 2.0,
            rect_height: 1.0,
            scatterers: vec![ScattererSpec {
                center: Vec2::new(1.0, 0.5),
                radius: 0.2,
            }],
        })
        .unwrap();
        assert_eq!(t.loops().len(), 2);
        assert_abs_diff_eq!(t.perimeter(), 6.0 + 0.4 * PI, epsilon = 1e-12);
        assert!(build_table(&TableSpec::SemiDispersing {
            rect_width: 2.0,
            rect_height: 1.0,
            scatterers: vec![ScattererSpec {
                center: Vec2::new(1.0, 0.1),
                radius: 0.2,
            }],
        })
        .is_err());
    }
}

//! Open planar billiards laboratory.
//!
//! Tables made of flat segments and circular arcs, the billiard map on the
//! collision space with its derivative cocycle, SRB sampling, cone fields,
//! first-return (inducing) structures and hitting-time statistics for holes
//! on the boundary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod dynamics;
pub mod geometry;
pub mod inducing;
pub mod measure;
pub mod openstats;
pub mod stats;

pub use geometry::{
    build_table, make_hole, validate_table, CurvatureKind, GeometryError, Hole, Table,
    TableClass, TableSpec, Vec2, Violation,
};
pub use dynamics::{
    billiard_map, curvature_evolve, expansion_factor, next_collision, orbit, tangent_map,
    CollisionFlag, CollisionResult, Mat2, OrbitRecord, PhasePoint, Singularity, TangentVector,
    Terminal,
};
pub use measure::{hole_measure, invariance_defect, sample_srb, SrbSampler};
pub use cones::{cone_at, cone_invariance_scan, in_cone, Cone, ConeKind, ConeScanReport};
pub use inducing::{in_base, kac_defect, return_tail, return_time, ExtendedPhasePoint, ReturnSample};
pub use openstats::{
    collect_hitting, count_statistics, ks_exp1, quasi_section_defect, short_return_fraction,
    survival_curve, CountTable, HittingSeries,
};

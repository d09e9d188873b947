#![allow(dead_code)]

use billiards_core::geometry::{reference_flower, ScattererSpec};
use billiards_core::{build_table, Table, TableSpec, Vec2};

pub fn sinai() -> Table {
    build_table(&TableSpec::SinaiTorus {
        centers: vec![Vec2::new(0.5, 0.5)],
        radii: vec![0.2],
    })
    .unwrap()
}

pub fn stadium() -> Table {
    build_table(&TableSpec::Stadium {
        flat_length: 2.0,
        half_height: None,
    })
    .unwrap()
}

/// Stadium with flats 1.5 apart: the full circles of its caps cross the flats.
pub fn squeezed_stadium() -> Table {
    build_table(&TableSpec::Stadium {
        flat_length: 2.0,
        half_height: Some(0.75),
    })
    .unwrap()
}

pub fn diamond() -> Table {
    build_table(&TableSpec::Diamond {
        square_side: 2.0,
        corner_radius: 1.2,
    })
    .unwrap()
}

pub fn squash() -> Table {
    build_table(&TableSpec::Squash {
        r1: 0.6,
        r2: 1.0,
        center_distance: 2.0,
    })
    .unwrap()
}

pub fn flower() -> Table {
    build_table(&TableSpec::Flower {
        components: reference_flower(),
    })
    .unwrap()
}

pub fn semi_dispersing() -> Table {
    build_table(&TableSpec::SemiDispersing {
        rect_width: 2.0,
        rect_height: 1.0,
        scatterers: vec![ScattererSpec {
            center: Vec2::new(1.0, 0.5),
            radius: 0.2,
        }],
    })
    .unwrap()
}

pub fn all_tables() -> Vec<Table> {
    vec![
        sinai(),
        diamond(),
        stadium(),
        squash(),
        flower(),
        semi_dispersing(),
    ]
}

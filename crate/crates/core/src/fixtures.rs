//! Small bundled instances.
//!
//! Lake ids follow the county lake order: for `fig2`, A1..A3 are 0..2 and
//! B1..B3 are 3..5; for `k1ce`, A1..A6 are 0..5 and B1..B3 are 6..8; for
//! `k2ce`, A1, A2, B1, B2 are 0..3.

use crate::game::{Arc, County, Instance, Lake};
use crate::instance_io;

pub const FIG2_JSON: &str = include_str!("../fixtures/fig2.json");
pub const K1CE_JSON: &str = include_str!("../fixtures/k1ce.json");
pub const K2CE_JSON: &str = include_str!("../fixtures/k2ce.json");

/// Two counties of three lakes, two AIS types, budgets 1/1.
pub fn fig2() -> Instance {
    instance_io::from_json_str(FIG2_JSON).expect("bundled fig2 instance is valid")
}

/// Nine lakes, single AIS type, budgets 2/1.
pub fn k1ce() -> Instance {
    instance_io::from_json_str(K1CE_JSON).expect("bundled k1ce instance is valid")
}

/// Four lakes, two AIS types, budgets 1/1.
pub fn k2ce() -> Instance {
    instance_io::from_json_str(K2CE_JSON).expect("bundled k2ce instance is valid")
}

/// Single-AIS instance whose non-game profile selects only uninfested lakes.
pub fn theorem2_all_uninfested() -> Instance {
    Instance::new(
        1,
        vec![
            Lake::new(vec![0]),
            Lake::uninfested(),
            Lake::new(vec![0]),
            Lake::uninfested(),
        ],
        vec![
            County { budget: 1, lakes: vec![0, 1] },
            County { budget: 1, lakes: vec![2, 3] },
        ],
        vec![
            Arc { from: 0, to: 1, weight: 1 },
            Arc { from: 0, to: 3, weight: 5 },
            Arc { from: 2, to: 1, weight: 5 },
            Arc { from: 2, to: 3, weight: 1 },
        ],
    )
    .expect("valid instance")
}

/// Single-AIS instance whose non-game profile selects only infested lakes.
pub fn theorem2_all_infested() -> Instance {
    Instance::new(
        1,
        vec![
            Lake::new(vec![0]),
            Lake::uninfested(),
            Lake::uninfested(),
            Lake::new(vec![0]),
            Lake::uninfested(),
            Lake::uninfested(),
        ],
        vec![
            County { budget: 1, lakes: vec![0, 1, 2] },
            County { budget: 1, lakes: vec![3, 4, 5] },
        ],
        vec![
            Arc { from: 0, to: 1, weight: 2 },
            Arc { from: 0, to: 2, weight: 2 },
            Arc { from: 0, to: 4, weight: 1 },
            Arc { from: 3, to: 1, weight: 1 },
            Arc { from: 3, to: 4, weight: 2 },
            Arc { from: 3, to: 5, weight: 2 },
        ],
    )
    .expect("valid instance")
}

/// Looks up a bundled instance by name (`fig2`, `k1ce`, `k2ce`).
pub fn by_name(name: &str) -> Option<Instance> {
    match name.to_ascii_lowercase().as_str() {
        "fig2" => Some(fig2()),
        "k1ce" => Some(k1ce()),
        "k2ce" => Some(k2ce()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_match_the_drawn_graphs() {
        let k2 = Instance::new(
            2,
            vec![Lake::new(vec![0]), Lake::new(vec![0]), Lake::new(vec![1]), Lake::new(vec![1])],
            vec![County { budget: 1, lakes: vec![0, 1] }, County { budget: 1, lakes: vec![2, 3] }],
            vec![
                Arc { from: 0, to: 2, weight: 1 },
                Arc { from: 1, to: 3, weight: 2 },
                Arc { from: 2, to: 1, weight: 2 },
                Arc { from: 3, to: 0, weight: 1 },
            ],
        )
        .unwrap();
        assert_eq!(k2ce(), k2);

        let k1 = k1ce();
        assert_eq!(k1.num_lakes(), 9);
        assert_eq!(k1.num_arcs(), 12);
        assert_eq!(k1.county(0).budget, 2);
        assert_eq!(k1.county(1).budget, 1);
        let heavy: Vec<_> = k1.arcs().iter().filter(|a| a.weight == 10).collect();
        assert_eq!(heavy.len(), 1);
        assert_eq!((heavy[0].from, heavy[0].to), (6, 3));
        assert_eq!(k1.total_weight(), 38);

        let f = fig2();
        assert_eq!(f.total_weight(), 17);
        assert_eq!(f.num_arcs(), 8);
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("FIG2").is_some());
        assert!(by_name("nope").is_none());
    }
}

//! Shipped example instances.

use crate::io::{parse_instance, Instance};
use crate::topology::{CostModel, DemandMatrix, Topology};

pub const TOY2X5_JSON: &str = include_str!("../fixtures/toy2x5.json");
pub const GRID3X3_JSON: &str = include_str!("../fixtures/grid3x3.json");

/// Two IP nodes joined by a short top path and a long bottom path, two
/// routers per IP node, 0.8 units from N1 to N2.
pub fn toy2x5_instance() -> Instance {
    parse_instance(TOY2X5_JSON).expect("toy2x5 fixture is valid")
}

pub fn toy2x5() -> (Topology, DemandMatrix, CostModel) {
    let i = toy2x5_instance();
    (i.topology, i.demands, i.costs)
}

/// 3x3 grid of 600-mile spans.
pub fn grid3x3_instance() -> Instance {
    parse_instance(GRID3X3_JSON).expect("grid3x3 fixture is valid")
}

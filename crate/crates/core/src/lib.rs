//! Robust tail and regenerator placement for IP-over-optical networks.
//!
//! A [`Topology`] describes the optical layer and the routers housed at IP
//! nodes. The design algorithms in [`design`] place tails, regens and
//! ports so that, under no failure, any single span cut or any single
//! router failure, IP links can be remapped onto the surviving fiber and
//! every demand routed. [`operation`] runs a fixed design per scenario and
//! evaluates routing-only recovery; [`verify`] holds independent checkers.

pub mod design;
pub mod error;
pub mod fixtures;
mod flow;
pub mod io;
pub mod lp;
pub mod operation;
pub mod par;
pub mod paths;
pub mod topology;
pub mod verify;

pub use design::{
    design_greedy, design_legacy, design_optimal, design_simple, run_algorithm, Algorithm, Design,
    DesignDoc, DesignProblem, Link, Placement,
};
pub use error::{DesignError, ModelError};
pub use io::{parse_instance, InputError, Instance};
pub use operation::{
    evaluate_transient, expand_link_path, operate, OperationPlan, TransientReport,
};
pub use par::Exec;
pub use topology::{
    enumerate_failures, CostModel, DemandMatrix, FailureScenario, NodeId, RouterId, SpanId,
    Topology,
};

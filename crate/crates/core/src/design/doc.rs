//! JSON form of a [`Design`] and its operation plans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::lp::SolveStatus;
use crate::operation::{FlowEntry, OperationPlan, PlannedLink, Strand};
use crate::topology::{CostModel, FailureScenario, NodeId, RouterId, SpanId, Topology};

use super::{Algorithm, Design, LegacyLink, Link, Placement, SolveRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsDoc {
    pub tail: f64,
    pub regen: f64,
    pub port: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDoc {
    pub label: String,
    pub status: String,
    pub objective: f64,
    pub best_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrandDoc {
    pub units: u32,
    /// Regen nodes in order.
    pub regens: Vec<String>,
    /// Spans as node-id pairs.
    pub spans: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub a: String,
    pub b: String,
    pub capacity: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strands: Vec<StrandDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDoc {
    pub src: String,
    pub dst: String,
    pub from: String,
    pub to: String,
    pub units: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub kind: String,
    #[serde(default)]
    pub element: String,
    pub links: Vec<LinkDoc>,
    #[serde(default)]
    pub flows: Vec<FlowDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDoc {
    pub algorithm: String,
    pub tails: BTreeMap<String, u32>,
    pub regens_raw: BTreeMap<String, u32>,
    pub regens_reported: BTreeMap<String, u32>,
    pub ports: BTreeMap<String, u32>,
    pub costs: CostsDoc,
    pub total_cost_raw: f64,
    pub total_cost_reported: f64,
    #[serde(default)]
    pub solves: Vec<SolveDoc>,
    pub scenarios: Vec<ScenarioDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub legacy_links: Vec<LinkDoc>,
}

fn strand_doc(topo: &Topology, regens: &[NodeId], spans: &[SpanId], units: u32) -> StrandDoc {
    StrandDoc {
        units,
        regens: regens.iter().map(|&n| topo.node(n).name.clone()).collect(),
        spans: spans
            .iter()
            .map(|&s| {
                let sp = topo.span(s);
                [topo.node(sp.a).name.clone(), topo.node(sp.b).name.clone()]
            })
            .collect(),
    }
}

impl DesignDoc {
    pub fn from_design(topo: &Topology, design: &Design) -> Self {
        let by_router = |v: &[u32]| -> BTreeMap<String, u32> {
            topo.router_ids()
                .map(|r| (topo.router(r).name.clone(), v[r.0]))
                .collect()
        };
        let by_node = |v: &[u32]| -> BTreeMap<String, u32> {
            topo.node_ids()
                .map(|n| (topo.node(n).name.clone(), v[n.0]))
                .collect()
        };
        let rname = |r: RouterId| topo.router(r).name.clone();
        let nname = |n: NodeId| topo.node(n).name.clone();
        let scenarios = design
            .plans
            .iter()
            .map(|p| ScenarioDoc {
                kind: p.scenario.kind().into(),
                element: p.scenario.element(topo),
                links: p
                    .links
                    .iter()
                    .map(|l| LinkDoc {
                        a: rname(l.link.a),
                        b: rname(l.link.b),
                        capacity: l.capacity,
                        strands: l
                            .strands
                            .iter()
                            .map(|s| strand_doc(topo, &s.regens, &s.spans, s.units))
                            .collect(),
                    })
                    .collect(),
                flows: p
                    .flows
                    .iter()
                    .map(|e| FlowDoc {
                        src: nname(e.src),
                        dst: nname(e.dst),
                        from: rname(e.from),
                        to: rname(e.to),
                        units: e.units,
                    })
                    .collect(),
            })
            .collect();
        DesignDoc {
            algorithm: design.algorithm.as_str().into(),
            tails: by_router(&design.placement.tails),
            regens_raw: by_node(&design.regens_raw),
            regens_reported: by_node(&design.placement.regens),
            ports: by_router(&design.placement.ports),
            costs: CostsDoc {
                tail: design.costs.tail,
                regen: design.costs.regen,
                port: design.costs.port,
            },
            total_cost_raw: design.total_cost_raw(),
            total_cost_reported: design.total_cost_reported(),
            solves: design
                .solves
                .iter()
                .map(|s| SolveDoc {
                    label: s.label.clone(),
                    status: s.status.as_str().into(),
                    objective: s.objective,
                    best_bound: s.best_bound,
                })
                .collect(),
            scenarios,
            legacy_links: design
                .legacy_links
                .iter()
                .map(|l| LinkDoc {
                    a: rname(l.link.a),
                    b: rname(l.link.b),
                    capacity: l.capacity,
                    strands: if l.spans.is_empty() {
                        Vec::new()
                    } else {
                        vec![strand_doc(topo, &l.regens, &l.spans, l.capacity)]
                    },
                })
                .collect(),
        }
    }

    /// Rebuilds the design against `topo`, rejecting unknown ids.
    pub fn to_design(&self, topo: &Topology) -> Result<Design, ModelError> {
        let router = |name: &str| {
            topo.router_id(name)
                .ok_or_else(|| ModelError::invalid(format!("design names unknown router `{name}`")))
        };
        let node = |name: &str| {
            topo.node_id(name)
                .ok_or_else(|| ModelError::invalid(format!("design names unknown node `{name}`")))
        };
        let span = |pair: &[String; 2]| -> Result<SpanId, ModelError> {
            topo.span_between(node(&pair[0])?, node(&pair[1])?)
                .ok_or_else(|| {
                    ModelError::invalid(format!(
                        "design names unknown span {}-{}",
                        pair[0], pair[1]
                    ))
                })
        };
        let routers = |m: &BTreeMap<String, u32>| -> Result<Vec<u32>, ModelError> {
            let mut v = vec![0; topo.routers().len()];
            for (k, &x) in m {
                v[router(k)?.0] = x;
            }
            Ok(v)
        };
        let nodes = |m: &BTreeMap<String, u32>| -> Result<Vec<u32>, ModelError> {
            let mut v = vec![0; topo.nodes().len()];
            for (k, &x) in m {
                v[node(k)?.0] = x;
            }
            Ok(v)
        };
        let link = |a: &str, b: &str| -> Result<Link, ModelError> {
            let (a, b) = (router(a)?, router(b)?);
            if a == b {
                return Err(ModelError::invalid("design link joins a router to itself"));
            }
            Ok(Link::new(a, b))
        };
        let strand = |s: &StrandDoc| -> Result<Strand, ModelError> {
            Ok(Strand {
                units: s.units,
                regens: s.regens.iter().map(|n| node(n)).collect::<Result<_, _>>()?,
                spans: s.spans.iter().map(span).collect::<Result<_, _>>()?,
            })
        };

        let algorithm = Algorithm::parse(&self.algorithm).ok_or_else(|| {
            ModelError::invalid(format!("unknown algorithm `{}`", self.algorithm))
        })?;
        let placement = Placement {
            tails: routers(&self.tails)?,
            regens: nodes(&self.regens_reported)?,
            ports: routers(&self.ports)?,
        };
        placement.check_shape(topo)?;
        let regens_raw = nodes(&self.regens_raw)?;
        if regens_raw.iter().zip(&placement.regens).any(|(r, p)| r < p) {
            return Err(ModelError::invalid("reported regens exceed raw regens"));
        }
        let costs = CostModel::new(self.costs.tail, self.costs.regen, self.costs.port)?;
        let solves = self
            .solves
            .iter()
            .map(|s| {
                Ok(SolveRecord {
                    label: s.label.clone(),
                    status: SolveStatus::parse(&s.status).ok_or_else(|| {
                        ModelError::invalid(format!("unknown status `{}`", s.status))
                    })?,
                    objective: s.objective,
                    best_bound: s.best_bound,
                    seconds: 0.0,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let plans = self
            .scenarios
            .iter()
            .map(|sc| {
                let scenario = FailureScenario::parse(topo, &sc.kind, &sc.element)?;
                let links = sc
                    .links
                    .iter()
                    .map(|l| {
                        Ok(PlannedLink {
                            link: link(&l.a, &l.b)?,
                            capacity: l.capacity,
                            strands: l.strands.iter().map(strand).collect::<Result<_, _>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                let flows = sc
                    .flows
                    .iter()
                    .map(|e| {
                        Ok(FlowEntry {
                            src: node(&e.src)?,
                            dst: node(&e.dst)?,
                            from: router(&e.from)?,
                            to: router(&e.to)?,
                            units: e.units,
                        })
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                Ok(OperationPlan {
                    scenario,
                    links,
                    flows,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let legacy_links = self
            .legacy_links
            .iter()
            .map(|l| {
                let s = l.strands.first().map(strand).transpose()?;
                Ok(LegacyLink {
                    link: link(&l.a, &l.b)?,
                    capacity: l.capacity,
                    regens: s.as_ref().map(|s| s.regens.clone()).unwrap_or_default(),
                    spans: s.map(|s| s.spans).unwrap_or_default(),
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Design {
            algorithm,
            placement,
            regens_raw,
            costs,
            solves,
            plans,
            legacy_links,
        })
    }
}

//! JSON input documents: topology, demands and costs in one file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::topology::{CostModel, DemandMatrix, Topology, DEFAULT_REGEN_DIST};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterDoc {
    pub id: String,
    pub home: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanDoc {
    pub u: String,
    pub v: String,
    pub miles: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDoc {
    pub src: String,
    pub dst: String,
    pub units: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostDoc {
    pub tail: f64,
    pub regen: f64,
    #[serde(default)]
    pub port: f64,
}

impl Default for CostDoc {
    fn default() -> Self {
        CostDoc {
            tail: 1.0,
            regen: 1.0,
            port: 1.0,
        }
    }
}

fn default_regen_dist() -> f64 {
    DEFAULT_REGEN_DIST
}

/// On-disk shape of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub ip_nodes: Vec<String>,
    #[serde(default)]
    pub optical_nodes: Vec<String>,
    pub routers: Vec<RouterDoc>,
    #[serde(default)]
    pub spans: Vec<SpanDoc>,
    #[serde(default = "default_regen_dist")]
    pub regen_dist: f64,
    #[serde(default)]
    pub demands: Vec<DemandDoc>,
    #[serde(default)]
    pub costs: CostDoc,
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A validated problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub topology: Topology,
    pub demands: DemandMatrix,
    pub costs: CostModel,
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance, ModelError> {
        let routers: Vec<(&str, &str)> = self
            .routers
            .iter()
            .map(|r| (r.id.as_str(), r.home.as_str()))
            .collect();
        let spans: Vec<(&str, &str, f64)> = self
            .spans
            .iter()
            .map(|s| (s.u.as_str(), s.v.as_str(), s.miles))
            .collect();
        let ip: Vec<&str> = self.ip_nodes.iter().map(String::as_str).collect();
        let optical: Vec<&str> = self.optical_nodes.iter().map(String::as_str).collect();
        let topology = Topology::new(&ip, &optical, &routers, &spans, self.regen_dist)?;
        let mut demands = DemandMatrix::new();
        for d in &self.demands {
            let lookup = |n: &str| {
                topology.node_id(n).ok_or_else(|| {
                    ModelError::invalid(format!("demand endpoint `{n}` is not a node"))
                })
            };
            demands.add(&topology, lookup(&d.src)?, lookup(&d.dst)?, d.units)?;
        }
        let costs = CostModel::new(self.costs.tail, self.costs.regen, self.costs.port)?;
        Ok(Instance {
            topology,
            demands,
            costs,
        })
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, InputError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| InputError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(doc.into_instance()?)
}

impl Instance {
    /// Document form, suitable for writing back to disk.
    pub fn to_doc(&self) -> InstanceDoc {
        let t = &self.topology;
        let names = |kind| {
            t.nodes()
                .iter()
                .filter(|n| n.kind == kind)
                .map(|n| n.name.clone())
                .collect()
        };
        InstanceDoc {
            ip_nodes: names(crate::topology::NodeKind::Ip),
            optical_nodes: names(crate::topology::NodeKind::Optical),
            routers: t
                .routers()
                .iter()
                .map(|r| RouterDoc {
                    id: r.name.clone(),
                    home: t.node(r.home).name.clone(),
                })
                .collect(),
            spans: t
                .spans()
                .iter()
                .map(|s| SpanDoc {
                    u: t.node(s.a).name.clone(),
                    v: t.node(s.b).name.clone(),
                    miles: s.miles,
                })
                .collect(),
            regen_dist: t.regen_dist(),
            demands: self
                .demands
                .iter()
                .map(|(s, d, units)| DemandDoc {
                    src: t.node(s).name.clone(),
                    dst: t.node(d).name.clone(),
                    units,
                })
                .collect(),
            costs: CostDoc {
                tail: self.costs.tail,
                regen: self.costs.regen,
                port: self.costs.port,
            },
        }
    }
}

//! The JSON instance file: lines, a partitioned graph and an optional
//! placement, under `"format": 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linegeom::{GeomError, LineSet, LineSpec};
use crate::pgraph::PartitionedGraph;
use crate::rigidity::{self, Framework, RigidityError};
use crate::scalar::{self, Rational};

pub const FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {0}, expected {FORMAT}")]
    Format(u32),
    #[error("declared dimension {declared} but line {line} has dimension {actual}")]
    Dimension { declared: usize, line: usize, actual: usize },
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Lines(#[from] RigidityError),
    #[error("placement has {got} parameters for {n} vertices")]
    PlacementLength { n: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    #[serde(with = "scalar::vec")]
    pub t: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: u32,
    dim: usize,
    lines: Vec<LineSpec>,
    graph: PartitionedGraph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    placement: Option<Placement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub lines: LineSet,
    pub graph: PartitionedGraph,
    pub placement: Option<Placement>,
}

impl Instance {
    pub fn new(lines: LineSet, graph: PartitionedGraph, placement: Option<Placement>) -> Result<Instance, InstanceError> {
        rigidity::check_lines(&graph, &lines)?;
        if let Some(p) = &placement {
            if p.t.len() != graph.n() {
                return Err(InstanceError::PlacementLength { n: graph.n(), got: p.t.len() });
            }
        }
        Ok(Instance { lines, graph, placement })
    }

    pub fn from_json(s: &str) -> Result<Instance, InstanceError> {
        let f: InstanceFile = serde_json::from_str(s)?;
        if f.format != FORMAT {
            return Err(InstanceError::Format(f.format));
        }
        for (i, l) in f.lines.iter().enumerate() {
            if l.base.len() != f.dim || l.direction.len() != f.dim {
                let actual = if l.base.len() != f.dim { l.base.len() } else { l.direction.len() };
                return Err(InstanceError::Dimension { declared: f.dim, line: i, actual });
            }
        }
        if f.dim < 2 {
            return Err(GeomError::DimensionTooSmall(f.dim).into());
        }
        Instance::new(LineSet::from_specs(&f.lines)?, f.graph, f.placement)
    }

    pub fn to_json(&self) -> String {
        let f = InstanceFile {
            format: FORMAT,
            dim: self.lines.dim(),
            lines: self.lines.specs(),
            graph: self.graph.clone(),
            placement: self.placement.clone(),
        };
        serde_json::to_string_pretty(&f).expect("serialisable")
    }

    /// The stored placement, if any, else a fresh one from `seed`.
    pub fn framework(&self, seed: u64, mode: crate::linalg::RankMode) -> Result<Framework<'_>, RigidityError> {
        match &self.placement {
            Some(p) => Framework::new(&self.graph, &self.lines, p.t.clone()),
            None => rigidity::nondegenerate_framework(&self.graph, &self.lines, seed, mode),
        }
    }
}

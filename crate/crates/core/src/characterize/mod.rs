//! Combinatorial deciders: L-rigidity, redundant L-rigidity,
//! P-connectivity and generic global L-rigidity, with witnesses.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linegeom::{GeomError, LineSet, Violation};
use crate::pgraph::{Edge, GraphError, PartitionedGraph, Subgraph};
use crate::rigidity::{self, RigidityError};

mod certificate;
mod invariance;
mod replay;

pub use certificate::{
    certify_global, find_type3, Construction, ComponentConstruction, GlueRule, GlueStep, Piece,
    PieceKind, TypeWitness,
};
pub use invariance::{
    glue_disjoint, glue_shared_vertex, subdivision_checks, verdict_invariance_suite,
    InvarianceReport, SubdivisionCheck,
};
pub use replay::{replay_certificate, replay_construction, validate_witness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterizeError {
    #[error(transparent)]
    MissingLine(#[from] RigidityError),
    #[error("lines of the graph are not in general position: {0:?}")]
    NotGeneralPosition(Violation),
    #[error("graph is not crossing")]
    NotCrossing,
    #[error("no type-3 subgraph found although the hypotheses were checked")]
    HypothesesViolated,
    #[error("certificate failed to replay: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Parallel,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentWitness {
    /// A cycle (as a vertex sequence) through `edge`, whose lines are not
    /// parallel.
    CrossingCycle { cycle: Vec<usize>, edge: Edge },
    /// Connectivity of the single component in the parallel regime.
    SpanningTree { edges: Vec<Edge> },
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityVerdict {
    pub rigid: bool,
    pub regime: Regime,
    /// One entry per component, in component order.
    pub witnesses: Vec<ComponentWitness>,
    pub failing_component: Option<Vec<usize>>,
}

pub fn regime(g: &PartitionedGraph, lines: &LineSet) -> Regime {
    if rigidity::parallel_regime(g, lines) {
        Regime::Parallel
    } else {
        Regime::General
    }
}

fn spanning_tree(s: &Subgraph, root: usize) -> Vec<Edge> {
    let adj = s.adjacency();
    let mut seen = BTreeSet::from([root]);
    let mut queue = std::collections::VecDeque::from([root]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &w in &adj[&u] {
            if seen.insert(w) {
                out.push(crate::pgraph::edge(u, w));
                queue.push_back(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Smallest non-bridge edge of `comp` whose endpoints lie on non-parallel
/// lines, with a shortest cycle through it.
pub(crate) fn crossing_cycle(
    g: &PartitionedGraph,
    lines: &LineSet,
    comp: &Subgraph,
) -> Option<(Vec<usize>, Edge)> {
    let bridges = comp.bridges();
    let &e = comp
        .edges
        .iter()
        .find(|&&(u, v)| !lines.parallel(g.part(u), g.part(v)) && !bridges.contains(&(u, v)))?;
    let path = comp.shortest_path_avoiding(e.1, &BTreeSet::from([e.0]), &BTreeSet::new(), Some(e))?;
    Some((path, e))
}

/// Rigidity in the sense of the generic rank of `R`: in the parallel regime
/// the graph must be connected; otherwise every component needs a cycle
/// through an edge on non-parallel lines.
#[allow(non_snake_case)]
pub fn is_L_rigid(g: &PartitionedGraph, lines: &LineSet) -> Result<RigidityVerdict, CharacterizeError> {
    rigidity::check_lines(g, lines)?;
    let whole = g.whole();
    let comps = whole.components();
    let regime = regime(g, lines);
    let mut witnesses = Vec::new();
    let mut failing = None;
    match regime {
        Regime::Parallel => {
            for (i, c) in comps.iter().enumerate() {
                let sub = whole.induced_by(&c.iter().copied().collect());
                witnesses.push(ComponentWitness::SpanningTree { edges: spanning_tree(&sub, c[0]) });
                if i == 1 {
                    failing = Some(c.clone());
                }
            }
        }
        Regime::General => {
            for c in &comps {
                let sub = whole.induced_by(&c.iter().copied().collect());
                match crossing_cycle(g, lines, &sub) {
                    Some((cycle, edge)) => witnesses.push(ComponentWitness::CrossingCycle { cycle, edge }),
                    None => {
                        witnesses.push(ComponentWitness::Missing);
                        failing.get_or_insert_with(|| c.clone());
                    }
                }
            }
        }
    }
    let rigid = !comps.is_empty() && failing.is_none();
    Ok(RigidityVerdict { rigid, regime, witnesses, failing_component: failing })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyVerdict {
    pub redundant: bool,
    pub failing_edge: Option<Edge>,
    /// A component of `G - e` left without a certificate of rigidity.
    pub failing_component: Option<Vec<usize>>,
}

/// `G - e` is L-rigid for every edge `e`. Vacuously true without edges.
#[allow(non_snake_case)]
pub fn is_redundantly_L_rigid(
    g: &PartitionedGraph,
    lines: &LineSet,
) -> Result<RedundancyVerdict, CharacterizeError> {
    rigidity::check_lines(g, lines)?;
    let results: Vec<Option<(Edge, Option<Vec<usize>>)>> = g
        .edges()
        .par_iter()
        .map(|&e| {
            let h = g.without_edge(e).expect("edge of g");
            let v = is_L_rigid(&h, lines).expect("lines checked");
            if v.rigid {
                None
            } else {
                Some((e, v.failing_component))
            }
        })
        .collect();
    match results.into_iter().flatten().next() {
        Some((e, comp)) => Ok(RedundancyVerdict {
            redundant: false,
            failing_edge: Some(e),
            failing_component: comp,
        }),
        None => Ok(RedundancyVerdict { redundant: true, failing_edge: None, failing_component: None }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PViolation {
    /// A component of a disconnected graph meeting fewer than three lines.
    ProperComponent { component: Vec<usize>, lines: Vec<usize> },
    /// A component of `G - vertex` meeting fewer than two lines.
    VertexCut { vertex: usize, component: Vec<usize>, lines: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PConnectivity {
    pub p_connected: bool,
    pub violation: Option<PViolation>,
}

#[allow(non_snake_case)]
pub fn is_P_connected(g: &PartitionedGraph) -> PConnectivity {
    let whole = g.whole();
    let comps = whole.components();
    let bad = |violation| PConnectivity { p_connected: false, violation: Some(violation) };
    if comps.len() > 1 {
        for c in &comps {
            let ls = g.lines_of(c);
            if ls.len() < 3 {
                return bad(PViolation::ProperComponent {
                    component: c.clone(),
                    lines: ls.into_iter().collect(),
                });
            }
        }
    }
    for v in 0..g.n() {
        for c in whole.without_vertex(v).components() {
            let ls = g.lines_of(&c);
            if ls.len() < 2 {
                return bad(PViolation::VertexCut {
                    vertex: v,
                    component: c,
                    lines: ls.into_iter().collect(),
                });
            }
        }
    }
    PConnectivity { p_connected: true, violation: None }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NecessityViolation {
    NotPConnected { violation: PViolation },
    NotRedundant { edge: Edge, component: Option<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCertificate {
    pub decision: bool,
    pub necessity_violation: Option<NecessityViolation>,
    pub construction: Option<Construction>,
}

/// The standing assumptions: lines met by `g` in general position and `g`
/// crossing.
pub fn check_standing_assumptions(g: &PartitionedGraph, lines: &LineSet) -> Result<(), CharacterizeError> {
    rigidity::check_lines(g, lines)?;
    let used = g.used_lines();
    if let Some(v) = lines.general_position_violation_among(&used) {
        return Err(CharacterizeError::NotGeneralPosition(v));
    }
    if !g.is_crossing_graph() {
        return Err(CharacterizeError::NotCrossing);
    }
    Ok(())
}

/// Decision only, without building a construction.
pub fn decide_global(g: &PartitionedGraph, lines: &LineSet) -> Result<GlobalCertificate, CharacterizeError> {
    check_standing_assumptions(g, lines)?;
    let pc = is_P_connected(g);
    if let Some(violation) = pc.violation {
        return Ok(GlobalCertificate {
            decision: false,
            necessity_violation: Some(NecessityViolation::NotPConnected { violation }),
            construction: None,
        });
    }
    let rr = is_redundantly_L_rigid(g, lines)?;
    if let Some(edge) = rr.failing_edge {
        return Ok(GlobalCertificate {
            decision: false,
            necessity_violation: Some(NecessityViolation::NotRedundant { edge, component: rr.failing_component }),
            construction: None,
        });
    }
    Ok(GlobalCertificate { decision: true, necessity_violation: None, construction: None })
}

/// Generic global L-rigidity: P-connected and redundantly L-rigid. A YES
/// answer carries a construction that has already been replayed.
pub fn is_generically_globally_rigid(
    g: &PartitionedGraph,
    lines: &LineSet,
) -> Result<GlobalCertificate, CharacterizeError> {
    let mut cert = decide_global(g, lines)?;
    if cert.decision {
        cert.construction = Some(certify_global(g, lines)?);
    }
    Ok(cert)
}

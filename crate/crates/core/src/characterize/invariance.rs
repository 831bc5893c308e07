//! Checks that the decision behaves as the operations on YES instances
//! predict: subdivision keeps YES, and so does gluing two YES graphs at a
//! vertex or along disjoint sets of at least three lines each.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{decide_global, CharacterizeError};
use crate::linegeom::{extend_general_position, LineSet};
use crate::pgraph::{Edge, GraphError, PartitionedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionCheck {
    pub edge: Edge,
    /// Line carrying the new vertex.
    pub part: usize,
    pub decision: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub decision: bool,
    pub subdivisions: Vec<SubdivisionCheck>,
    /// `None` when the check does not apply: `g` is NO, or its lines cannot
    /// be extended by a fresh general-position copy.
    pub shared_vertex_glue: Option<bool>,
    pub disjoint_glue: Option<bool>,
    pub holds: bool,
}

/// Decision after subdividing each edge once, with the new vertex on the
/// line of either endpoint.
pub fn subdivision_checks(
    g: &PartitionedGraph,
    lines: &LineSet,
) -> Result<Vec<SubdivisionCheck>, CharacterizeError> {
    let mut out = Vec::new();
    for &e in g.edges() {
        let parts: BTreeSet<usize> = [g.part(e.0), g.part(e.1)].into();
        for part in parts {
            let (s, _) = g.subdivide(e, part)?;
            let decision = decide_global(&s, lines)?.decision;
            out.push(SubdivisionCheck { edge: e, part, decision });
        }
    }
    Ok(out)
}

fn append(
    h: &PartitionedGraph,
    k: &PartitionedGraph,
    k_parts: &[usize],
    rename: impl Fn(usize) -> usize,
    extra: usize,
) -> Result<PartitionedGraph, GraphError> {
    let mut part = h.parts().to_vec();
    part.extend((0..extra).map(|_| 0));
    for v in 0..k.n() {
        let w = rename(v);
        if w >= h.n() {
            part[w] = k_parts[k.part(v)];
        }
    }
    let edges = h.edges().iter().copied().chain(k.edges().iter().map(|&(a, b)| (rename(a), rename(b))));
    PartitionedGraph::new(h.n() + extra, part, edges)
}

/// Union of `h` and `k` with `kv` identified with `hv`. `k_parts[i]` is the
/// combined line index for line `i` of `k`; the shared vertex keeps the line
/// of `hv`.
pub fn glue_shared_vertex(
    h: &PartitionedGraph,
    k: &PartitionedGraph,
    hv: usize,
    kv: usize,
    k_parts: &[usize],
) -> Result<PartitionedGraph, GraphError> {
    let base = h.n();
    let rename = |v: usize| match v.cmp(&kv) {
        std::cmp::Ordering::Equal => hv,
        std::cmp::Ordering::Less => base + v,
        std::cmp::Ordering::Greater => base + v - 1,
    };
    append(h, k, k_parts, rename, k.n() - 1)
}

/// Disjoint union of `h` and `k`, with `k`'s lines renamed by `k_parts`.
pub fn glue_disjoint(
    h: &PartitionedGraph,
    k: &PartitionedGraph,
    k_parts: &[usize],
) -> Result<PartitionedGraph, GraphError> {
    let base = h.n();
    append(h, k, k_parts, |v| base + v, k.n())
}

/// Runs every check on `g` and a copy of it placed on fresh random lines.
pub fn verdict_invariance_suite(
    g: &PartitionedGraph,
    lines: &LineSet,
    seed: u64,
) -> Result<InvarianceReport, CharacterizeError> {
    let decision = decide_global(g, lines)?.decision;
    if !decision {
        return Ok(InvarianceReport {
            decision,
            subdivisions: Vec::new(),
            shared_vertex_glue: None,
            disjoint_glue: None,
            holds: true,
        });
    }
    let subdivisions = subdivision_checks(g, lines)?;

    let used: Vec<usize> = g.used_lines().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (shared_vertex_glue, disjoint_glue) = match extend_general_position(lines, used.len(), &mut rng) {
        Ok(ext) => {
            let mut fresh = vec![0; lines.len()];
            for (j, &i) in used.iter().enumerate() {
                fresh[i] = lines.len() + j;
            }
            let hv = g.edges()[0].0;
            let mut keep = fresh.clone();
            keep[g.part(hv)] = g.part(hv);
            let shared = glue_shared_vertex(g, g, hv, hv, &keep)?;
            let sv = decide_global(&shared, &ext)?.decision;
            let dj = if used.len() >= 3 {
                Some(decide_global(&glue_disjoint(g, g, &fresh)?, &ext)?.decision)
            } else {
                None
            };
            (Some(sv), dj)
        }
        Err(_) => (None, None),
    };
    let holds = subdivisions.iter().all(|c| c.decision)
        && shared_vertex_glue.unwrap_or(true)
        && disjoint_glue.unwrap_or(true);
    Ok(InvarianceReport { decision, subdivisions, shared_vertex_glue, disjoint_glue, holds })
}

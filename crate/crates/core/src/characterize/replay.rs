//! Independent replay of constructions: every step is checked against the
//! graph alone, without reusing the builder's intermediate state.

use std::collections::BTreeSet;

use super::certificate::{Construction, GlueRule, GlueStep, Piece, PieceKind, TypeWitness};
use super::GlobalCertificate;
use crate::pgraph::{check_open_ear, edge, Edge, PartitionedGraph, Subgraph};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_cycle(s: &Subgraph, cyc: &[usize]) -> Check {
    ensure(cyc.len() >= 3, || format!("cycle {cyc:?} is too short"))?;
    let distinct: BTreeSet<_> = cyc.iter().collect();
    ensure(distinct.len() == cyc.len(), || format!("cycle {cyc:?} repeats a vertex"))?;
    for i in 0..cyc.len() {
        let e = edge(cyc[i], cyc[(i + 1) % cyc.len()]);
        ensure(s.edges.contains(&e), || format!("cycle edge {e:?} is not in the graph"))?;
    }
    Ok(())
}

fn check_path(s: &Subgraph, p: &[usize]) -> Check {
    ensure(!p.is_empty(), || "empty path".into())?;
    let distinct: BTreeSet<_> = p.iter().collect();
    ensure(distinct.len() == p.len(), || format!("path {p:?} repeats a vertex"))?;
    ensure(s.vertices.contains(&p[0]), || format!("path vertex {} is not in the graph", p[0]))?;
    for w in p.windows(2) {
        let e = edge(w[0], w[1]);
        ensure(s.edges.contains(&e), || format!("path edge {e:?} is not in the graph"))?;
    }
    Ok(())
}

fn cycle_edges(cyc: &[usize]) -> BTreeSet<Edge> {
    (0..cyc.len()).map(|i| edge(cyc[i], cyc[(i + 1) % cyc.len()])).collect()
}

fn touches(e: Edge, v: usize) -> bool {
    e.0 == v || e.1 == v
}

/// Checks the defining properties of a type 1, 2 or 3 subgraph of `s`.
pub fn validate_witness(g: &PartitionedGraph, s: &Subgraph, w: &TypeWitness) -> Check {
    for c in &w.cycles {
        check_cycle(s, c)?;
    }
    check_path(s, &w.path)?;
    for &e in &w.crossing_edges {
        ensure(g.is_crossing_edge(e), || format!("edge {e:?} is not crossing"))?;
    }
    let [e, f] = w.crossing_edges;
    let path_set: BTreeSet<usize> = w.path.iter().copied().collect();
    let (first, last) = (w.path[0], w.path[w.path.len() - 1]);
    match w.kind {
        1 | 2 => {
            ensure(w.cycles.len() == 2, || "expected two cycles".into())?;
            let c1: BTreeSet<usize> = w.cycles[0].iter().copied().collect();
            let c2: BTreeSet<usize> = w.cycles[1].iter().copied().collect();
            let (v1, v2) = (first, last);
            if w.kind == 1 {
                ensure(w.path.len() == 1, || "type 1 path must be the shared vertex".into())?;
                let common: Vec<_> = c1.intersection(&c2).copied().collect();
                ensure(common == vec![v1], || format!("cycles share {common:?}, expected [{v1}]"))?;
            } else {
                ensure(w.path.len() >= 2, || "type 2 path needs an edge".into())?;
                ensure(c1.is_disjoint(&c2), || "type 2 cycles intersect".into())?;
                let m1: Vec<_> = path_set.intersection(&c1).copied().collect();
                let m2: Vec<_> = path_set.intersection(&c2).copied().collect();
                ensure(m1 == vec![v1] && m2 == vec![v2], || "path meets the cycles beyond its ends".into())?;
            }
            ensure(cycle_edges(&w.cycles[0]).contains(&e), || "first crossing edge is not on the first cycle".into())?;
            ensure(cycle_edges(&w.cycles[1]).contains(&f), || "second crossing edge is not on the second cycle".into())?;
            ensure(!touches(e, v1), || format!("crossing edge {e:?} meets {v1}"))?;
            ensure(!touches(f, v2), || format!("crossing edge {f:?} meets {v2}"))?;
        }
        3 => {
            ensure(w.cycles.len() == 1, || "expected one cycle".into())?;
            ensure(w.path.len() >= 2 && first != last, || "type 3 path needs distinct ends".into())?;
            let c = &w.cycles[0];
            let cset: BTreeSet<usize> = c.iter().copied().collect();
            let meet: BTreeSet<usize> = path_set.intersection(&cset).copied().collect();
            ensure(meet == BTreeSet::from([first, last]), || "path meets the cycle beyond its ends".into())?;
            let ce = cycle_edges(c);
            let pe: BTreeSet<Edge> = w.path.windows(2).map(|x| edge(x[0], x[1])).collect();
            ensure(ce.is_disjoint(&pe), || "path reuses a cycle edge".into())?;
            ensure(
                e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1,
                || "crossing edges are adjacent".into(),
            )?;
            // Walk the cycle from one path end to the other, both ways.
            let k = c.len();
            let start = c.iter().position(|&x| x == first).unwrap();
            for step in [1, k - 1] {
                let mut i = start;
                let mut arc = BTreeSet::new();
                while c[i] != last {
                    let j = (i + step) % k;
                    arc.insert(edge(c[i], c[j]));
                    i = j;
                }
                ensure(arc.contains(&e) != arc.contains(&f), || {
                    "an arc between the path ends misses both or holds both crossing edges".into()
                })?;
            }
        }
        k => return Err(format!("unknown witness kind {k}")),
    }
    Ok(())
}

fn replay_piece(g: &PartitionedGraph, whole: &Subgraph, p: &Piece) -> Check {
    validate_witness(g, whole, &p.base)?;
    match (p.kind, p.base.kind) {
        (PieceKind::TwoConnected, 3) | (PieceKind::BlockPath, 1 | 2) => {}
        (k, t) => return Err(format!("{k:?} piece with a type {t} base")),
    }
    let mut acc = p.base.subgraph();
    for (i, ear) in p.ears.iter().enumerate() {
        check_path(whole, ear).map_err(|m| format!("ear {i}: {m}"))?;
        check_open_ear(&acc, ear).map_err(|m| format!("ear {i}: {m}"))?;
        acc = acc.union(&Subgraph::path(ear));
    }
    ensure(acc == p.target, || "base and ears do not rebuild the piece".into())
}

fn replay_glue(
    g: &PartitionedGraph,
    steps: &[GlueStep],
    parts: &[Subgraph],
) -> Result<Subgraph, String> {
    ensure(steps.len() + 1 == parts.len() || parts.is_empty() && steps.is_empty(), || {
        format!("{} glue steps for {} parts", steps.len(), parts.len())
    })?;
    let mut acc = parts.first().cloned().unwrap_or_default();
    for (i, step) in steps.iter().enumerate() {
        ensure(step.index == i + 1, || format!("glue step {i} refers to part {}", step.index))?;
        let next = &parts[step.index];
        for side in [&acc, next] {
            ensure(g.is_crossing(&side.vertices), || "glued part is not crossing".into())?;
        }
        match &step.rule {
            GlueRule::SharedVertex { vertex } => {
                ensure(acc.vertices.contains(vertex) && next.vertices.contains(vertex), || {
                    format!("vertex {vertex} is not shared")
                })?;
            }
            GlueRule::ThreeLinesEach { left_lines, right_lines } => {
                let l: Vec<usize> = g.lines_of(&acc.vertices).into_iter().collect();
                let r: Vec<usize> = g.lines_of(&next.vertices).into_iter().collect();
                ensure(&l == left_lines && &r == right_lines, || "recorded line sets are wrong".into())?;
                ensure(l.len() >= 3 && r.len() >= 3, || "a side meets fewer than three lines".into())?;
            }
        }
        acc = acc.union(next);
    }
    Ok(acc)
}

/// Replays every piece, every gluing step, and checks the result is `g`.
pub fn replay_construction(g: &PartitionedGraph, c: &Construction) -> Check {
    let whole = g.whole();
    let mut comps = Vec::new();
    for (ci, cc) in c.components.iter().enumerate() {
        for (pi, p) in cc.pieces.iter().enumerate() {
            replay_piece(g, &whole, p).map_err(|m| format!("component {ci}, piece {pi}: {m}"))?;
        }
        let targets: Vec<Subgraph> = cc.pieces.iter().map(|p| p.target.clone()).collect();
        let built = replay_glue(g, &cc.glue, &targets).map_err(|m| format!("component {ci}: {m}"))?;
        let expected: Vec<usize> = built.vertices.iter().copied().collect();
        ensure(expected == cc.vertices, || format!("component {ci} has the wrong vertex set"))?;
        comps.push(built);
    }
    let built = replay_glue(g, &c.glue, &comps)?;
    ensure(built == whole, || "construction does not rebuild the graph".into())
}

/// Replays a YES certificate; a NO certificate is checked for a construction
/// being absent.
pub fn replay_certificate(g: &PartitionedGraph, cert: &GlobalCertificate) -> Check {
    match (&cert.decision, &cert.construction) {
        (true, Some(c)) => replay_construction(g, c),
        (true, None) => Err("YES certificate without a construction".into()),
        (false, None) => ensure(cert.necessity_violation.is_some(), || "NO certificate without a violation".into()),
        (false, Some(_)) => Err("NO certificate with a construction".into()),
    }
}

//! Constructive certificates of generic global L-rigidity: a type 1, 2 or 3
//! base subgraph, open ears that grow it, and gluing steps that assemble
//! the pieces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{replay, CharacterizeError};
use crate::linegeom::LineSet;
use crate::pgraph::{edge, open_ear_decomposition, Edge, PartitionedGraph, Subgraph};

/// A type 1, 2 or 3 subgraph.
///
/// * type 1: `cycles = [C1, C2]` sharing exactly the vertex `path = [v]`.
/// * type 2: disjoint `cycles = [C1, C2]` joined by `path` from `C1` to `C2`.
/// * type 3: `cycles = [C]` and a `path` whose ends are its only common
///   vertices with `C`; the crossing edges lie on different arcs of `C`.
///
/// `crossing_edges[i]` belongs to `cycles[i]` for types 1 and 2, and both
/// belong to `cycles[0]` for type 3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeWitness {
    pub kind: u8,
    pub cycles: Vec<Vec<usize>>,
    pub path: Vec<usize>,
    pub crossing_edges: [Edge; 2],
}

impl TypeWitness {
    pub fn subgraph(&self) -> Subgraph {
        self.cycles
            .iter()
            .fold(Subgraph::path(&self.path), |acc, c| acc.union(&Subgraph::cycle(c)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    /// A whole 2-connected component grown from a type 3 base.
    TwoConnected,
    /// The union of the blocks on a block-tree path between two leaves,
    /// grown from a type 1 or type 2 base.
    BlockPath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub kind: PieceKind,
    pub base: TypeWitness,
    /// Open ears, applied in order on top of the base.
    pub ears: Vec<Vec<usize>>,
    /// Block-path pieces only: the two leaf blocks, by block index.
    pub leaves: Option<[usize; 2]>,
    pub target: Subgraph,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GlueRule {
    /// The new part shares `vertex` with what has been built so far.
    SharedVertex { vertex: usize },
    /// Both sides meet at least three lines.
    ThreeLinesEach { left_lines: Vec<usize>, right_lines: Vec<usize> },
}

/// Glues item `index` onto the union of all earlier items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueStep {
    pub index: usize,
    #[serde(flatten)]
    pub rule: GlueRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentConstruction {
    pub vertices: Vec<usize>,
    pub pieces: Vec<Piece>,
    pub glue: Vec<GlueStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Construction {
    pub components: Vec<ComponentConstruction>,
    pub glue: Vec<GlueStep>,
}

fn crossing_edges(g: &PartitionedGraph, s: &Subgraph) -> Vec<Edge> {
    s.edges.iter().copied().filter(|&e| g.is_crossing_edge(e)).collect()
}

fn disjoint(e: Edge, f: Edge) -> bool {
    e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1
}

/// The two arcs of the cycle `cyc` between its vertices `a` and `b`, each as
/// a vertex sequence from `a` to `b`.
fn arcs(cyc: &[usize], a: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
    let k = cyc.len();
    let ia = cyc.iter().position(|&x| x == a).expect("a on cycle");
    let mut fwd = vec![a];
    let mut i = ia;
    while cyc[i] != b {
        i = (i + 1) % k;
        fwd.push(cyc[i]);
    }
    let mut bwd = vec![a];
    let mut i = ia;
    while cyc[i] != b {
        i = (i + k - 1) % k;
        bwd.push(cyc[i]);
    }
    (fwd, bwd)
}

fn path_has_edge(p: &[usize], e: Edge) -> bool {
    p.windows(2).any(|w| edge(w[0], w[1]) == e)
}

/// A type 3 subgraph of the 2-connected, P-connected, redundantly rigid
/// `s`, following the case analysis on a pair of vertex-disjoint crossing
/// edges `e`, `f` and a cycle `D` through `f` avoiding `e`.
pub fn find_type3(g: &PartitionedGraph, s: &Subgraph) -> Result<TypeWitness, CharacterizeError> {
    let xs = crossing_edges(g, s);
    for &e in &xs {
        let without_e = s.without_edge(e);
        for &f in xs.iter().filter(|&&f| disjoint(e, f)) {
            let Some(back) =
                without_e.shortest_path_avoiding(f.1, &BTreeSet::from([f.0]), &BTreeSet::new(), Some(f))
            else {
                continue;
            };
            // D as the vertex cycle f.0, f.1, .. back to f.0
            let d: Vec<usize> = std::iter::once(f.0).chain(back[..back.len() - 1].iter().copied()).collect();
            let dv: BTreeSet<usize> = d.iter().copied().collect();
            let (a, b) = e;
            let q: Option<Vec<usize>> = match (dv.contains(&a), dv.contains(&b)) {
                (true, true) => Some(vec![a, b]),
                (false, false) => s
                    .disjoint_paths(&[a, b], &dv, 1, &BTreeSet::from([e]))
                    .map(|p| p[0].iter().rev().chain(p[1].iter()).copied().collect()),
                (on_a, _) => {
                    let (v, u) = if on_a { (a, b) } else { (b, a) };
                    let targets: BTreeSet<usize> = dv.iter().copied().filter(|&x| x != v).collect();
                    s.shortest_path(u, &targets, &BTreeSet::from([v]))
                        .map(|r| std::iter::once(v).chain(r).collect())
                }
            };
            let Some(q) = q else { continue };
            let (q0, qe) = (q[0], q[q.len() - 1]);
            let (a1, a2) = arcs(&d, q0, qe);
            let (with_f, other) = if path_has_edge(&a1, f) { (a1, a2) } else { (a2, a1) };
            // C runs along Q from q0 to qe and back along the arc holding f.
            let mut cycle = q.clone();
            cycle.extend(with_f.iter().rev().skip(1).take(with_f.len() - 2));
            let w = TypeWitness { kind: 3, cycles: vec![cycle], path: other, crossing_edges: [e, f] };
            if replay::validate_witness(g, s, &w).is_ok() {
                return Ok(w);
            }
        }
    }
    Err(CharacterizeError::HypothesesViolated)
}

/// A cycle in `block` through the edge `e` and the vertex `c`.
fn cycle_through(block: &Subgraph, e: Edge, c: usize) -> Option<Vec<usize>> {
    let p = block.disjoint_paths(&[e.0, e.1], &BTreeSet::from([c]), 2, &BTreeSet::from([e]))?;
    let mut cyc = p[0].clone();
    cyc.extend(p[1].iter().rev().skip(1));
    Some(cyc)
}

/// Cycle in a leaf block through its cutvertex `c` and a crossing edge of
/// the block that avoids `c`.
fn leaf_cycle(g: &PartitionedGraph, block: &Subgraph, c: usize) -> Option<(Vec<usize>, Edge)> {
    crossing_edges(g, block)
        .into_iter()
        .filter(|&(a, b)| a != c && b != c)
        .find_map(|e| cycle_through(block, e, c).map(|cyc| (cyc, e)))
}

fn internal(msg: impl Into<String>) -> CharacterizeError {
    CharacterizeError::InternalInconsistency(msg.into())
}

fn two_connected_piece(g: &PartitionedGraph, comp: &Subgraph) -> Result<Piece, CharacterizeError> {
    let base = find_type3(g, comp)?;
    let seq = open_ear_decomposition(comp, &base.subgraph()).map_err(|e| internal(e.to_string()))?;
    Ok(Piece { kind: PieceKind::TwoConnected, base, ears: seq.ears, leaves: None, target: comp.clone() })
}

fn block_path_piece(
    g: &PartitionedGraph,
    comp: &Subgraph,
    l: usize,
    k: usize,
) -> Result<Piece, CharacterizeError> {
    let forest = comp.blocks();
    let (blocks, cuts) = forest.tree_path(l, k).ok_or_else(|| internal("leaves not connected"))?;
    let first = forest.blocks[l].subgraph();
    let last = forest.blocks[k].subgraph();
    let (c_first, c_last) = (cuts[0], cuts[cuts.len() - 1]);
    let (cl, el) = leaf_cycle(g, &first, c_first).ok_or_else(|| internal("no leaf cycle in first block"))?;
    let (ck, ek) = leaf_cycle(g, &last, c_last).ok_or_else(|| internal("no leaf cycle in last block"))?;
    let base = if blocks.len() == 2 {
        TypeWitness { kind: 1, cycles: vec![cl, ck], path: vec![c_first], crossing_edges: [el, ek] }
    } else {
        let mut path = vec![c_first];
        for (i, &b) in blocks[1..blocks.len() - 1].iter().enumerate() {
            let sub = forest.blocks[b].subgraph();
            let seg = sub
                .shortest_path(cuts[i], &BTreeSet::from([cuts[i + 1]]), &BTreeSet::new())
                .ok_or_else(|| internal("middle block does not join its cutvertices"))?;
            path.extend(seg.into_iter().skip(1));
        }
        TypeWitness { kind: 2, cycles: vec![cl, ck], path, crossing_edges: [el, ek] }
    };
    let mut acc = base.subgraph();
    let mut ears = Vec::new();
    for &b in &blocks {
        let block = forest.blocks[b].subgraph();
        let start = block.induced_by(&acc.vertices);
        // edges of acc inside the block are exactly the block's share
        let start = Subgraph {
            vertices: start.vertices,
            edges: start.edges.intersection(&acc.edges).copied().collect(),
        };
        if start == block {
            continue;
        }
        let seq = open_ear_decomposition(&block, &start).map_err(|e| internal(e.to_string()))?;
        ears.extend(seq.ears);
        acc = acc.union(&block);
    }
    Ok(Piece { kind: PieceKind::BlockPath, base, ears, leaves: Some([l, k]), target: acc })
}

fn component_construction(
    g: &PartitionedGraph,
    comp: &Subgraph,
) -> Result<ComponentConstruction, CharacterizeError> {
    let vertices: Vec<usize> = comp.vertices.iter().copied().collect();
    if comp.is_two_connected() {
        let piece = two_connected_piece(g, comp)?;
        return Ok(ComponentConstruction { vertices, pieces: vec![piece], glue: Vec::new() });
    }
    let forest = comp.blocks();
    let leaves = forest.leaves();
    if leaves.len() < 2 {
        return Err(internal("component is neither 2-connected nor has two leaf blocks"));
    }
    let mut pieces = Vec::new();
    let mut glue = Vec::new();
    let mut acc = Subgraph::default();
    for &k in &leaves[1..] {
        let piece = block_path_piece(g, comp, leaves[0], k)?;
        if !pieces.is_empty() {
            let &vertex = piece
                .target
                .vertices
                .intersection(&acc.vertices)
                .next()
                .ok_or_else(|| internal("block paths do not overlap"))?;
            glue.push(GlueStep { index: pieces.len(), rule: GlueRule::SharedVertex { vertex } });
        }
        acc = acc.union(&piece.target);
        pieces.push(piece);
    }
    Ok(ComponentConstruction { vertices, pieces, glue })
}

/// Builds and replays the construction for a graph already decided YES.
pub fn certify_global(g: &PartitionedGraph, lines: &LineSet) -> Result<Construction, CharacterizeError> {
    crate::rigidity::check_lines(g, lines)?;
    let whole = g.whole();
    let mut components = Vec::new();
    let mut glue = Vec::new();
    let mut acc_lines: BTreeSet<usize> = BTreeSet::new();
    for c in whole.components() {
        let sub = whole.induced_by(&c.iter().copied().collect());
        let cc = component_construction(g, &sub)?;
        let right: BTreeSet<usize> = g.lines_of(&c);
        if !components.is_empty() {
            glue.push(GlueStep {
                index: components.len(),
                rule: GlueRule::ThreeLinesEach {
                    left_lines: acc_lines.iter().copied().collect(),
                    right_lines: right.iter().copied().collect(),
                },
            });
        }
        acc_lines.extend(right);
        components.push(cc);
    }
    let cons = Construction { components, glue };
    replay::replay_construction(g, &cons).map_err(CharacterizeError::InternalInconsistency)?;
    Ok(cons)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;
    use crate::pgraph::tests::random_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn construction(gr: &PartitionedGraph, ls: &LineSet) -> Construction {
        is_generically_globally_rigid(gr, ls).unwrap().construction.unwrap()
    }

    #[test]
    fn type3_minimal_graph_is_its_own_witness() {
        let gr = type3();
        let w = find_type3(&gr, &gr.whole()).unwrap();
        assert_eq!(w.kind, 3);
        assert_eq!(w.subgraph(), gr.whole());
        let c = construction(&gr, &three_lines());
        assert!(c.components[0].pieces[0].ears.is_empty());
    }

    #[test]
    fn type1_minimal_graph_gives_type1_base_without_ears() {
        let c = construction(&type1(), &three_lines());
        assert_eq!(c.components.len(), 1);
        let pieces = &c.components[0].pieces;
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].base.kind, 1);
        assert_eq!(pieces[0].base.subgraph(), type1().whole());
        assert!(pieces[0].ears.is_empty());
    }

    #[test]
    fn type2_minimal_graph_gives_type2_base() {
        let c = construction(&type2(), &three_lines());
        let p = &c.components[0].pieces[0];
        assert_eq!(p.base.kind, 2);
        assert_eq!(p.base.subgraph(), type2().whole());
        assert!(p.ears.is_empty());
    }

    #[test]
    fn larger_two_connected_graph_needs_ears() {
        // wheel on a 5-cycle with hub 5
        let gr = g(
            6,
            &[0, 1, 2, 0, 1, 2],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 5), (1, 5), (2, 5), (3, 5), (4, 5)],
        );
        let c = construction(&gr, &three_lines());
        let p = &c.components[0].pieces[0];
        assert_eq!(p.base.kind, 3);
        assert!(!p.ears.is_empty());
        assert!(validate_witness(&gr, &gr.whole(), &p.base).is_ok());
        assert!(replay_construction(&gr, &c).is_ok());
    }

    #[test]
    fn disconnected_yes_instance_glues_by_lines() {
        // two type 3 graphs on disjoint line triples
        let gr = g(
            8,
            &[0, 1, 2, 1, 2, 3, 4, 3],
            &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (4, 5), (5, 6), (6, 7), (4, 7), (4, 6)],
        );
        let c = construction(&gr, &five_lines());
        assert_eq!(c.components.len(), 2);
        assert!(matches!(c.glue[0].rule, GlueRule::ThreeLinesEach { .. }));
    }

    #[test]
    fn block_paths_glued_at_shared_vertices() {
        // three triangles hung off vertex 0, each crossing away from 0
        let gr = g(
            7,
            &[0, 1, 2, 2, 1, 1, 2],
            &[(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4), (0, 5), (5, 6), (0, 6)],
        );
        let c = construction(&gr, &three_lines());
        let cc = &c.components[0];
        assert_eq!(cc.pieces.len(), 2);
        assert!(matches!(cc.glue[0].rule, GlueRule::SharedVertex { vertex: 0 }));
    }

    #[test]
    fn find_type3_on_random_qualifying_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ls = five_lines();
        let mut found = 0;
        while found < 100 {
            let n = rng.gen_range(4..10);
            let gr = random_graph(&mut rng, n, 0.6, 4);
            let whole = gr.whole();
            if !whole.is_two_connected() {
                continue;
            }
            let Ok(c) = decide_global(&gr, &ls) else { continue };
            if !c.decision {
                continue;
            }
            let w = find_type3(&gr, &whole).expect("hypotheses hold");
            validate_witness(&gr, &whole, &w).unwrap();
            found += 1;
        }
    }
}

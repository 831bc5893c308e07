//! Partitioned graphs and the graph algorithms behind the deciders:
//! components, bridges, blocks and the block-cutvertex forest, block paths,
//! open ear decompositions, vertex-disjoint paths and subdivision.
//!
//! Vertices are dense ids `0..n`. Every iteration order is ascending, so all
//! outputs are reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An undirected edge, always stored with `0 < 1`.
pub type Edge = (usize, usize);

pub fn edge(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("part has {got} entries but n = {n}")]
    PartLength { n: usize, got: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("repeated edge {0}-{1}")]
    MultiEdge(usize, usize),
    #[error("edge {0}-{1} is not in the graph")]
    EdgeAbsent(usize, usize),
    #[error("vertex {0} does not have degree 2")]
    NotDegreeTwo(usize),
    #[error("smoothing vertex {0} would create a repeated edge")]
    MultiEdgeCreated(usize),
    #[error("block {0} is not a leaf of the block-cutvertex tree")]
    NotLeafBlock(usize),
    #[error("blocks {0} and {1} lie in different components")]
    Disconnected(usize, usize),
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("base subgraph needs at least two vertices")]
    BaseTooSmall,
    #[error("base is not a subgraph of the target")]
    BaseNotSubgraph,
}

/// Canonical JSON shape: `{"n": .., "part": [..], "edges": [[u, v], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub part: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct PartitionedGraph {
    part: Vec<usize>,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl TryFrom<GraphSpec> for PartitionedGraph {
    type Error = GraphError;

    fn try_from(s: GraphSpec) -> Result<Self, GraphError> {
        PartitionedGraph::new(s.n, s.part, s.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<PartitionedGraph> for GraphSpec {
    fn from(g: PartitionedGraph) -> GraphSpec {
        GraphSpec { n: g.n(), part: g.part, edges: g.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl PartitionedGraph {
    pub fn new(
        n: usize,
        part: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if part.len() != n {
            return Err(GraphError::PartLength { n, got: part.len() });
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if let Some(&w) = [u, v].iter().find(|&&w| w >= n) {
                return Err(GraphError::VertexOutOfRange(w));
            }
            if !set.insert(edge(u, v)) {
                let (a, b) = edge(u, v);
                return Err(GraphError::MultiEdge(a, b));
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(PartitionedGraph { part, edges, adj })
    }

    /// Each vertex on a uniform line among `k`, each pair joined with
    /// probability `p`.
    pub fn random<R: rand::Rng>(rng: &mut R, n: usize, k: usize, p: f64) -> PartitionedGraph {
        let part = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        PartitionedGraph::new(n, part, edges).expect("simple by construction")
    }

    pub fn n(&self) -> usize {
        self.part.len()
    }

    pub fn part(&self, v: usize) -> usize {
        self.part[v]
    }

    pub fn parts(&self) -> &[usize] {
        &self.part
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Largest part index plus one.
    pub fn parts_used(&self) -> usize {
        self.part.iter().map(|&p| p + 1).max().unwrap_or(0)
    }

    /// Lines carrying at least one vertex.
    pub fn used_lines(&self) -> BTreeSet<usize> {
        self.part.iter().copied().collect()
    }

    pub fn is_crossing_edge(&self, e: Edge) -> bool {
        self.part[e.0] != self.part[e.1]
    }

    pub fn is_crossing<'a>(&self, w: impl IntoIterator<Item = &'a usize>) -> bool {
        let mut first = None;
        for &v in w {
            match first {
                None => first = Some(self.part[v]),
                Some(p) if p != self.part[v] => return true,
                _ => {}
            }
        }
        false
    }

    pub fn is_crossing_graph(&self) -> bool {
        self.is_crossing(&(0..self.n()).collect::<Vec<_>>())
    }

    pub fn lines_of<'a>(&self, h: impl IntoIterator<Item = &'a usize>) -> BTreeSet<usize> {
        h.into_iter().map(|&v| self.part[v]).collect()
    }

    pub fn whole(&self) -> Subgraph {
        Subgraph {
            vertices: (0..self.n()).collect(),
            edges: self.edges.iter().copied().collect(),
        }
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.whole().components()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn bridges(&self) -> BTreeSet<Edge> {
        self.whole().bridges()
    }

    pub fn blocks(&self) -> BlockForest {
        self.whole().blocks()
    }

    pub fn without_edge(&self, e: Edge) -> Result<PartitionedGraph, GraphError> {
        if !self.has_edge(e.0, e.1) {
            return Err(GraphError::EdgeAbsent(e.0, e.1));
        }
        PartitionedGraph::new(self.n(), self.part.clone(), self.edges.iter().copied().filter(|&f| f != e))
    }

    pub fn with_edge(&self, e: Edge) -> Result<PartitionedGraph, GraphError> {
        PartitionedGraph::new(self.n(), self.part.clone(), self.edges.iter().copied().chain([e]))
    }

    /// Replaces `e = uv` with `uw, wv` for a new vertex `w = n` on `part`.
    pub fn subdivide(&self, e: Edge, part: usize) -> Result<(PartitionedGraph, usize), GraphError> {
        let e = edge(e.0, e.1);
        if !self.has_edge(e.0, e.1) {
            return Err(GraphError::EdgeAbsent(e.0, e.1));
        }
        let w = self.n();
        let mut parts = self.part.clone();
        parts.push(part);
        let edges = self.edges.iter().copied().filter(|&f| f != e).chain([(e.0, w), (e.1, w)]);
        Ok((PartitionedGraph::new(w + 1, parts, edges)?, w))
    }

    /// Inverse of [`subdivide`](Self::subdivide): removes the degree-2 vertex
    /// `w` and joins its neighbours. Vertices above `w` shift down by one.
    pub fn smooth(&self, w: usize) -> Result<PartitionedGraph, GraphError> {
        if w >= self.n() {
            return Err(GraphError::VertexOutOfRange(w));
        }
        if self.degree(w) != 2 {
            return Err(GraphError::NotDegreeTwo(w));
        }
        let (a, b) = (self.adj[w][0], self.adj[w][1]);
        if self.has_edge(a, b) {
            return Err(GraphError::MultiEdgeCreated(w));
        }
        let relabel = |v: usize| if v > w { v - 1 } else { v };
        let mut parts = self.part.clone();
        parts.remove(w);
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| u != w && v != w)
            .map(|&(u, v)| (relabel(u), relabel(v)))
            .chain([(relabel(a), relabel(b))]);
        PartitionedGraph::new(self.n() - 1, parts, edges)
    }

    /// Induced graph on `vertices`, relabelled densely in ascending order.
    /// Returns the graph and the old id of each new vertex.
    pub fn induced(&self, vertices: &[usize]) -> (PartitionedGraph, Vec<usize>) {
        let old: Vec<usize> = vertices.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let new_of: BTreeMap<usize, usize> = old.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| Some((*new_of.get(&u)?, *new_of.get(&v)?)))
            .collect();
        let parts = old.iter().map(|&v| self.part[v]).collect();
        (PartitionedGraph::new(old.len(), parts, edges).expect("induced subgraph"), old)
    }
}

/// A subgraph given by explicit vertex and edge sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<Edge>,
}

impl Subgraph {
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Subgraph {
        let edges: BTreeSet<Edge> = edges.into_iter().map(|(u, v)| edge(u, v)).collect();
        let vertices = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        Subgraph { vertices, edges }
    }

    /// The closed walk `path[0], .., path[last], path[0]` as a subgraph.
    pub fn cycle(path: &[usize]) -> Subgraph {
        let k = path.len();
        Subgraph::from_edges((0..k).map(|i| (path[i], path[(i + 1) % k])))
    }

    pub fn path(path: &[usize]) -> Subgraph {
        let mut s = Subgraph::from_edges(path.windows(2).map(|w| (w[0], w[1])));
        s.vertices.extend(path.iter().copied());
        s
    }

    pub fn union(&self, other: &Subgraph) -> Subgraph {
        Subgraph {
            vertices: self.vertices.union(&other.vertices).copied().collect(),
            edges: self.edges.union(&other.edges).copied().collect(),
        }
    }

    pub fn is_subgraph_of(&self, other: &Subgraph) -> bool {
        self.vertices.is_subset(&other.vertices) && self.edges.is_subset(&other.edges)
    }

    /// Vertex and edge sets are consistent.
    pub fn is_well_formed(&self) -> bool {
        self.edges
            .iter()
            .all(|&(u, v)| u < v && self.vertices.contains(&u) && self.vertices.contains(&v))
    }

    pub fn adjacency(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> =
            self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for &(u, v) in &self.edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        for a in adj.values_mut() {
            a.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn without_vertex(&self, v: usize) -> Subgraph {
        let mut s = self.clone();
        s.vertices.remove(&v);
        s.edges.retain(|&(a, b)| a != v && b != v);
        s
    }

    pub fn without_edge(&self, e: Edge) -> Subgraph {
        let mut s = self.clone();
        s.edges.remove(&edge(e.0, e.1));
        s
    }

    pub fn induced_by(&self, vertices: &BTreeSet<usize>) -> Subgraph {
        Subgraph {
            vertices: self.vertices.intersection(vertices).copied().collect(),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|(u, v)| vertices.contains(u) && vertices.contains(v))
                .collect(),
        }
    }

    /// Connected components ordered by least vertex, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in &self.vertices {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[&u] {
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Connected with a single block. `K2` counts as 2-connected here,
    /// matching its role as a bridge block.
    pub fn is_two_connected(&self) -> bool {
        if !self.is_connected() || self.vertices.len() < 2 {
            return false;
        }
        if self.vertices.len() == 2 {
            return self.edges.len() == 1;
        }
        self.blocks().blocks.len() == 1
    }

    pub fn bridges(&self) -> BTreeSet<Edge> {
        self.blocks()
            .blocks
            .iter()
            .filter(|b| b.edges.len() == 1)
            .map(|b| b.edges[0])
            .collect()
    }

    pub fn blocks(&self) -> BlockForest {
        BlockFinder::run(self)
    }

    /// Shortest path (fewest edges) from `from` to the nearest vertex of
    /// `targets`, never entering `avoid`. Ties go to the smallest
    /// neighbour. `from` itself counts as a target.
    pub fn shortest_path(
        &self,
        from: usize,
        targets: &BTreeSet<usize>,
        avoid: &BTreeSet<usize>,
    ) -> Option<Vec<usize>> {
        self.shortest_path_avoiding(from, targets, avoid, None)
    }

    pub fn shortest_path_avoiding(
        &self,
        from: usize,
        targets: &BTreeSet<usize>,
        avoid: &BTreeSet<usize>,
        skip_edge: Option<Edge>,
    ) -> Option<Vec<usize>> {
        if !self.vertices.contains(&from) || avoid.contains(&from) {
            return None;
        }
        let adj = self.adjacency();
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(u) = queue.pop_front() {
            if targets.contains(&u) {
                let mut path = vec![u];
                let mut x = u;
                while let Some(&p) = prev.get(&x) {
                    path.push(p);
                    x = p;
                }
                path.reverse();
                return Some(path);
            }
            for &w in &adj[&u] {
                if avoid.contains(&w) || skip_edge == Some(edge(u, w)) || !seen.insert(w) {
                    continue;
                }
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
        None
    }

    /// Vertex-disjoint paths, one from each source to a vertex of `targets`,
    /// each stopping at its first target vertex. A target vertex may end up
    /// to `target_capacity` paths; no other vertex is shared. Edges in
    /// `skip` are not used. Returns `None` when no such system exists.
    pub fn disjoint_paths(
        &self,
        sources: &[usize],
        targets: &BTreeSet<usize>,
        target_capacity: usize,
        skip: &BTreeSet<Edge>,
    ) -> Option<Vec<Vec<usize>>> {
        let src_set: BTreeSet<usize> = sources.iter().copied().collect();
        if src_set.len() != sources.len() || !src_set.is_subset(&self.vertices) {
            return None;
        }
        let mut out = vec![Vec::new(); sources.len()];
        let mut remaining = Vec::new();
        for (i, &s) in sources.iter().enumerate() {
            if targets.contains(&s) {
                out[i] = vec![s];
            } else {
                remaining.push(i);
            }
        }
        // Split every vertex into in/out nodes and run unit augmenting paths.
        let verts: Vec<usize> = self.vertices.iter().copied().collect();
        let idx: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = verts.len();
        let (source, sink) = (2 * m, 2 * m + 1);
        let mut flow = FlowNet::new(2 * m + 2);
        for (i, &v) in verts.iter().enumerate() {
            let cap = if targets.contains(&v) { target_capacity } else { 1 };
            flow.add(2 * i, 2 * i + 1, cap as i64);
            if targets.contains(&v) {
                flow.add(2 * i + 1, sink, cap as i64);
            }
        }
        for &(u, v) in self.edges.iter().filter(|e| !skip.contains(e)) {
            let (iu, iv) = (idx[&u], idx[&v]);
            // no path continues past a target vertex
            if !targets.contains(&u) {
                flow.add(2 * iu + 1, 2 * iv, 1);
            }
            if !targets.contains(&v) {
                flow.add(2 * iv + 1, 2 * iu, 1);
            }
        }
        // Targets that are also sources already used a unit of capacity.
        for &s in sources.iter().filter(|s| targets.contains(s)) {
            let i = idx[&s];
            flow.reduce(2 * i, 2 * i + 1);
        }
        for &i in &remaining {
            flow.add(source, 2 * idx[&sources[i]], 1);
        }
        if flow.max_flow(source, sink) < remaining.len() as i64 {
            return None;
        }
        for &i in &remaining {
            let s = sources[i];
            let mut path = vec![s];
            let mut node = 2 * idx[&s] + 1;
            let mut guard = 0;
            while !targets.contains(path.last().unwrap()) {
                let next = flow.take_unit(node)?;
                let v = verts[next / 2];
                path.push(v);
                node = next + 1;
                guard += 1;
                if guard > m {
                    return None;
                }
            }
            out[i] = path;
        }
        Some(out)
    }
}

struct FlowArc {
    to: usize,
    cap: i64,
    rev: usize,
    original: i64,
}

struct FlowNet {
    g: Vec<Vec<FlowArc>>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { g: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, a: usize, b: usize, cap: i64) {
        let ra = self.g[b].len();
        let rb = self.g[a].len();
        self.g[a].push(FlowArc { to: b, cap, rev: ra, original: cap });
        self.g[b].push(FlowArc { to: a, cap: 0, rev: rb, original: 0 });
    }

    fn reduce(&mut self, a: usize, b: usize) {
        if let Some(arc) = self.g[a].iter_mut().find(|x| x.to == b && x.original > 0) {
            arc.cap -= 1;
            arc.original -= 1;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.g.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.g.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for (k, arc) in self.g[u].iter().enumerate() {
                    if arc.cap > 0 && !seen[arc.to] {
                        seen[arc.to] = true;
                        prev[arc.to] = Some((u, k));
                        queue.push_back(arc.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut x = t;
            while let Some((u, k)) = prev[x] {
                self.g[u][k].cap -= 1;
                let r = self.g[u][k].rev;
                self.g[x][r].cap += 1;
                x = u;
            }
            total += 1;
        }
    }

    /// Follows one unit of flow out of `node`, consuming it.
    fn take_unit(&mut self, node: usize) -> Option<usize> {
        let arc = self.g[node].iter_mut().find(|a| a.original > 0 && a.cap < a.original)?;
        arc.cap += 1;
        Some(arc.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl Block {
    pub fn subgraph(&self) -> Subgraph {
        Subgraph { vertices: self.vertices.iter().copied().collect(), edges: self.edges.iter().copied().collect() }
    }

    pub fn is_bridge(&self) -> bool {
        self.edges.len() == 1
    }
}

/// Blocks (maximal 2-connected subgraphs and bridges), cutvertices, and the
/// bipartite block-cutvertex incidence. Blocks are ordered by least edge.
/// Isolated vertices belong to no block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockForest {
    pub blocks: Vec<Block>,
    pub cutvertices: Vec<usize>,
    /// `(block index, cutvertex)` pairs.
    pub incidence: Vec<(usize, usize)>,
}

impl BlockForest {
    pub fn cutvertices_of(&self, b: usize) -> Vec<usize> {
        self.incidence.iter().filter(|&&(x, _)| x == b).map(|&(_, c)| c).collect()
    }

    pub fn blocks_at(&self, c: usize) -> Vec<usize> {
        self.incidence.iter().filter(|&&(_, x)| x == c).map(|&(b, _)| b).collect()
    }

    /// Blocks with at most one cutvertex in a tree that has two or more
    /// blocks.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&b| self.cutvertices_of(b).len() == 1)
            .collect()
    }

    pub fn is_leaf(&self, b: usize) -> bool {
        b < self.blocks.len() && self.cutvertices_of(b).len() == 1
    }

    /// Alternating block/cutvertex sequence `D1, v1, D2, .., Dk` between two
    /// blocks of the same component.
    pub fn tree_path(&self, from: usize, to: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        // nodes: blocks as (0, b), cutvertices as (1, c)
        let mut prev: BTreeMap<(u8, usize), (u8, usize)> = BTreeMap::new();
        let start = (0u8, from);
        let mut queue = VecDeque::from([start]);
        let mut seen = BTreeSet::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == (0, to) {
                let mut nodes = vec![node];
                let mut x = node;
                while let Some(&p) = prev.get(&x) {
                    nodes.push(p);
                    x = p;
                }
                nodes.reverse();
                let blocks = nodes.iter().filter(|n| n.0 == 0).map(|n| n.1).collect();
                let cuts = nodes.iter().filter(|n| n.0 == 1).map(|n| n.1).collect();
                return Some((blocks, cuts));
            }
            let next: Vec<(u8, usize)> = match node {
                (0, b) => self.cutvertices_of(b).into_iter().map(|c| (1, c)).collect(),
                (_, c) => self.blocks_at(c).into_iter().map(|b| (0, b)).collect(),
            };
            for n in next {
                if seen.insert(n) {
                    prev.insert(n, node);
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// `[L, K]`: the union of the blocks on the tree path between two
    /// distinct leaf blocks.
    pub fn block_path(&self, l: usize, k: usize) -> Result<Subgraph, GraphError> {
        for b in [l, k] {
            if !self.is_leaf(b) {
                return Err(GraphError::NotLeafBlock(b));
            }
        }
        if l == k {
            return Err(GraphError::NotLeafBlock(k));
        }
        let (blocks, _) = self.tree_path(l, k).ok_or(GraphError::Disconnected(l, k))?;
        Ok(blocks
            .iter()
            .fold(Subgraph::default(), |acc, &b| acc.union(&self.blocks[b].subgraph())))
    }
}

struct BlockFinder {
    adj: BTreeMap<usize, Vec<usize>>,
    disc: BTreeMap<usize, usize>,
    low: BTreeMap<usize, usize>,
    time: usize,
    stack: Vec<Edge>,
    blocks: Vec<Block>,
    cuts: BTreeSet<usize>,
}

impl BlockFinder {
    fn run(g: &Subgraph) -> BlockForest {
        let mut f = BlockFinder {
            adj: g.adjacency(),
            disc: BTreeMap::new(),
            low: BTreeMap::new(),
            time: 0,
            stack: Vec::new(),
            blocks: Vec::new(),
            cuts: BTreeSet::new(),
        };
        for &root in &g.vertices {
            if f.disc.contains_key(&root) {
                continue;
            }
            f.visit(root);
        }
        let mut blocks = f.blocks;
        for b in &mut blocks {
            b.edges.sort_unstable();
            b.vertices.sort_unstable();
            b.vertices.dedup();
        }
        blocks.sort_by(|a, b| a.edges[0].cmp(&b.edges[0]));
        let cutvertices: Vec<usize> = f.cuts.into_iter().collect();
        let mut incidence = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            for &c in &cutvertices {
                if b.vertices.binary_search(&c).is_ok() {
                    incidence.push((i, c));
                }
            }
        }
        BlockForest { blocks, cutvertices, incidence }
    }

    /// Iterative lowpoint DFS from `root`.
    fn visit(&mut self, root: usize) {
        self.time += 1;
        self.disc.insert(root, self.time);
        self.low.insert(root, self.time);
        let mut root_children = 0;
        // (vertex, parent, next neighbour index)
        let mut frames: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        while let Some(&mut (u, parent, ref mut next)) = frames.last_mut() {
            let nbrs = &self.adj[&u];
            if *next < nbrs.len() {
                let w = nbrs[*next];
                *next += 1;
                if Some(w) == parent {
                    continue;
                }
                if let Some(&dw) = self.disc.get(&w) {
                    if dw < self.disc[&u] {
                        self.stack.push(edge(u, w));
                        let lu = self.low[&u].min(dw);
                        self.low.insert(u, lu);
                    }
                } else {
                    self.stack.push(edge(u, w));
                    self.time += 1;
                    self.disc.insert(w, self.time);
                    self.low.insert(w, self.time);
                    if u == root {
                        root_children += 1;
                    }
                    frames.push((w, Some(u), 0));
                }
            } else {
                frames.pop();
                let Some(p) = parent else { continue };
                let lu = self.low[&u];
                let lp = self.low[&p].min(lu);
                self.low.insert(p, lp);
                if lu >= self.disc[&p] {
                    if p != root {
                        self.cuts.insert(p);
                    }
                    let mut block = Block { vertices: Vec::new(), edges: Vec::new() };
                    while let Some(e) = self.stack.pop() {
                        block.edges.push(e);
                        block.vertices.extend([e.0, e.1]);
                        if e == edge(p, u) {
                            break;
                        }
                    }
                    self.blocks.push(block);
                }
            }
        }
        if root_children >= 2 {
            self.cuts.insert(root);
        }
    }
}

/// The base subgraph and the ordered open ears that rebuild the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarSequence {
    pub base: Subgraph,
    /// Each ear as its vertex sequence; both ends lie in the graph built so
    /// far and the interior is new.
    pub ears: Vec<Vec<usize>>,
}

impl EarSequence {
    /// Replays the ears over the base, checking each one is open.
    pub fn replay(&self) -> Result<Subgraph, String> {
        let mut acc = self.base.clone();
        for (i, ear) in self.ears.iter().enumerate() {
            check_open_ear(&acc, ear).map_err(|m| format!("ear {i}: {m}"))?;
            acc = acc.union(&Subgraph::path(ear));
        }
        Ok(acc)
    }
}

/// An open ear: a simple path with at least one edge, distinct endpoints in
/// `acc`, interior outside `acc`, and no edge already in `acc`.
pub fn check_open_ear(acc: &Subgraph, ear: &[usize]) -> Result<(), String> {
    if ear.len() < 2 {
        return Err("ear has no edge".into());
    }
    let (a, b) = (ear[0], ear[ear.len() - 1]);
    if a == b {
        return Err("ear endpoints coincide".into());
    }
    if !acc.vertices.contains(&a) || !acc.vertices.contains(&b) {
        return Err("ear endpoint outside the current graph".into());
    }
    let interior = &ear[1..ear.len() - 1];
    let distinct: BTreeSet<_> = ear.iter().collect();
    if distinct.len() != ear.len() {
        return Err("ear repeats a vertex".into());
    }
    if interior.iter().any(|v| acc.vertices.contains(v)) {
        return Err("ear interior meets the current graph".into());
    }
    if ear.windows(2).any(|w| acc.edges.contains(&edge(w[0], w[1]))) {
        return Err("ear reuses an edge".into());
    }
    Ok(())
}

/// Open ear decomposition of the 2-connected `d` starting from `base`.
/// Follows the constructive argument: when every vertex is covered add the
/// least missing edge; otherwise take the least edge `uv` leaving the
/// current graph and close it with a shortest path from `v` back that
/// avoids `u`.
pub fn open_ear_decomposition(d: &Subgraph, base: &Subgraph) -> Result<EarSequence, GraphError> {
    if base.vertices.len() < 2 {
        return Err(GraphError::BaseTooSmall);
    }
    if !base.is_subgraph_of(d) {
        return Err(GraphError::BaseNotSubgraph);
    }
    if !d.is_two_connected() {
        return Err(GraphError::NotTwoConnected);
    }
    let mut acc = base.clone();
    let mut ears = Vec::new();
    while acc != *d {
        let ear = if acc.vertices == d.vertices {
            let &(u, v) = d.edges.difference(&acc.edges).next().expect("missing edge");
            vec![u, v]
        } else {
            let (u, v) = d
                .edges
                .iter()
                .find_map(|&(a, b)| match (acc.vertices.contains(&a), acc.vertices.contains(&b)) {
                    (true, false) => Some((a, b)),
                    (false, true) => Some((b, a)),
                    _ => None,
                })
                .ok_or(GraphError::NotTwoConnected)?;
            let targets: BTreeSet<usize> = acc.vertices.iter().copied().filter(|&x| x != u).collect();
            let r = d
                .shortest_path(v, &targets, &BTreeSet::from([u]))
                .ok_or(GraphError::NotTwoConnected)?;
            std::iter::once(u).chain(r).collect()
        };
        acc = acc.union(&Subgraph::path(&ear));
        ears.push(ear);
    }
    Ok(EarSequence { base: base.clone(), ears })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn graph(n: usize, part: &[usize], edges: &[(usize, usize)]) -> PartitionedGraph {
        PartitionedGraph::new(n, part.to_vec(), edges.iter().copied()).unwrap()
    }

    fn triangle() -> PartitionedGraph {
        graph(3, &[0, 0, 1], &[(0, 1), (1, 2), (0, 2)])
    }

    // a b c d e f g h i j k l
    // 0 1 2 3 4 5 6 7 8 9 10 11
    fn block_figure() -> PartitionedGraph {
        let e = [
            (0, 1), (0, 2), (1, 2), (0, 3), (3, 4), (4, 5), (0, 5), (0, 6),
            (6, 7), (7, 8), (6, 8), (4, 9), (5, 10), (10, 11),
        ];
        graph(12, &[0; 12], &e)
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert_eq!(PartitionedGraph::new(2, vec![0, 0], [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            PartitionedGraph::new(2, vec![0, 0], [(0, 1), (1, 0)]),
            Err(GraphError::MultiEdge(0, 1))
        );
        assert_eq!(
            PartitionedGraph::new(2, vec![0, 0], [(0, 2)]),
            Err(GraphError::VertexOutOfRange(2))
        );
        assert!(PartitionedGraph::new(2, vec![0], []).is_err());
    }

    #[test]
    fn json_shape() {
        let g = triangle();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":3,"part":[0,0,1],"edges":[[0,1],[0,2],[1,2]]}"#);
        let back: PartitionedGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<PartitionedGraph>(r#"{"n":2,"part":[0,0],"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn crossing_sets() {
        let g = graph(3, &[0, 1, 2], &[]);
        assert!(!g.is_crossing(&[0]));
        assert!(g.is_crossing(&[1, 2]));
        assert!(!g.is_crossing(&[]));
    }

    #[test]
    fn components_and_lines() {
        assert_eq!(graph(3, &[0, 0, 0], &[]).components(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(triangle().components().len(), 1);
        let two = graph(6, &[0; 6], &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        assert_eq!(two.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let t1 = graph(5, &[0, 1, 2, 0, 1], &[]);
        assert_eq!(t1.lines_of(&[0, 1, 2, 3, 4]).len(), 3);
        assert!(t1.lines_of(&[]).is_empty());
        assert_eq!(t1.lines_of(&[0, 3]), BTreeSet::from([0]));
    }

    #[test]
    fn block_figure_has_seven_blocks_and_five_cutvertices() {
        let f = block_figure().blocks();
        assert_eq!(f.blocks.len(), 7);
        assert_eq!(f.cutvertices, vec![0, 4, 5, 6, 10]);
        let find = |vs: &[usize]| f.blocks.iter().position(|b| b.vertices == vs).unwrap();
        let d1 = find(&[6, 7, 8]);
        let d7 = find(&[10, 11]);
        let path = f.block_path(d1, d7).unwrap();
        let expected = [find(&[6, 7, 8]), find(&[0, 6]), find(&[0, 3, 4, 5]), find(&[5, 10]), d7];
        let union = expected
            .iter()
            .fold(Subgraph::default(), |acc, &b| acc.union(&f.blocks[b].subgraph()));
        assert_eq!(path, union);
        assert_eq!(f.leaves().len(), 4);
    }

    #[test]
    fn small_block_structures() {
        let c4 = graph(4, &[0; 4], &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let f = c4.blocks();
        assert_eq!((f.blocks.len(), f.cutvertices.len()), (1, 0));
        assert_eq!(f.block_path(0, 0), Err(GraphError::NotLeafBlock(0)));

        let p3 = graph(3, &[0; 3], &[(0, 1), (1, 2)]);
        let f = p3.blocks();
        assert_eq!((f.blocks.len(), f.cutvertices.clone()), (2, vec![1]));
        assert_eq!(f.block_path(0, 1).unwrap(), p3.whole());

        let split = graph(4, &[0; 4], &[(0, 1), (2, 3)]);
        assert_eq!(split.blocks().block_path(0, 1), Err(GraphError::NotLeafBlock(0)));
    }

    #[test]
    fn ear_decomposition_of_c4_from_an_edge() {
        let c4 = graph(4, &[0; 4], &[(0, 1), (1, 2), (2, 3), (0, 3)]).whole();
        let base = Subgraph::from_edges([(0, 1)]);
        let seq = open_ear_decomposition(&c4, &base).unwrap();
        assert_eq!(seq.ears, vec![vec![0, 3, 2, 1]]);
        assert_eq!(seq.replay().unwrap(), c4);
    }

    #[test]
    fn ear_decomposition_of_k4_from_a_triangle() {
        let k4 = graph(4, &[0; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).whole();
        let base = Subgraph::cycle(&[0, 1, 2]);
        let seq = open_ear_decomposition(&k4, &base).unwrap();
        assert_eq!(seq.ears, vec![vec![0, 3, 1], vec![2, 3]]);
        assert_eq!(seq.replay().unwrap(), k4);
        assert!(open_ear_decomposition(&k4, &k4).unwrap().ears.is_empty());
    }

    #[test]
    fn ear_decomposition_errors() {
        let k4 = graph(4, &[0; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).whole();
        let single = Subgraph { vertices: BTreeSet::from([0]), edges: BTreeSet::new() };
        assert_eq!(open_ear_decomposition(&k4, &single), Err(GraphError::BaseTooSmall));
        let p3 = graph(3, &[0; 3], &[(0, 1), (1, 2)]).whole();
        assert_eq!(
            open_ear_decomposition(&p3, &Subgraph::from_edges([(0, 1)])),
            Err(GraphError::NotTwoConnected)
        );
    }

    #[test]
    fn subdivide_and_smooth() {
        let t = triangle();
        let (c4, w) = t.subdivide((0, 1), 1).unwrap();
        assert_eq!(w, 3);
        assert_eq!(c4.edges(), &[(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(c4.smooth(w).unwrap(), t);
        assert_eq!(t.smooth(0), Err(GraphError::MultiEdgeCreated(0)));
        assert_eq!(t.subdivide((0, 5), 0), Err(GraphError::EdgeAbsent(0, 5)));
        assert_eq!(c4.without_edge((0, 3)).unwrap().smooth(3), Err(GraphError::NotDegreeTwo(3)));
    }

    #[test]
    fn disjoint_paths_fan() {
        // C6 with a chord: two disjoint paths from {0, 1} to {3, 4}
        let g = graph(6, &[0; 6], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]).whole();
        let t = BTreeSet::from([3, 4]);
        let p = g.disjoint_paths(&[0, 1], &t, 1, &BTreeSet::from([(0, 1)])).unwrap();
        assert_eq!(p.len(), 2);
        let all: Vec<usize> = p.iter().flatten().copied().collect();
        let set: BTreeSet<usize> = all.iter().copied().collect();
        assert_eq!(set.len(), all.len());
        for path in &p {
            assert!(t.contains(path.last().unwrap()));
            assert!(path[..path.len() - 1].iter().all(|v| !t.contains(v)));
            for w in path.windows(2) {
                assert!(g.edges.contains(&edge(w[0], w[1])));
            }
        }
        // through a single target with capacity 2: a cycle through 0-1 and 3
        let p = g.disjoint_paths(&[0, 1], &BTreeSet::from([3]), 2, &BTreeSet::from([(0, 1)])).unwrap();
        assert_eq!(p.iter().map(|x| *x.last().unwrap()).collect::<Vec<_>>(), vec![3, 3]);
        // P3: no two disjoint paths from {0, 2} avoiding the middle twice
        let p3 = graph(4, &[0; 4], &[(0, 1), (1, 2), (1, 3)]).whole();
        assert!(p3.disjoint_paths(&[0, 2], &BTreeSet::from([3]), 1, &BTreeSet::new()).is_none());
    }

    pub(crate) fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, k: usize) -> PartitionedGraph {
        PartitionedGraph::random(rng, n, k, p)
    }

    #[test]
    fn cutvertices_match_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..10);
            let p = rng.gen_range(0.1..0.7);
            let g = random_graph(&mut rng, n, p, 1);
            let f = g.blocks();
            let mut count = BTreeMap::new();
            for b in &f.blocks {
                for &e in &b.edges {
                    *count.entry(e).or_insert(0) += 1;
                }
            }
            assert_eq!(count.len(), g.edges().len());
            assert!(count.values().all(|&c| c == 1));
            let whole = g.whole();
            let base = whole.components().len();
            let brute: Vec<usize> = (0..n)
                .filter(|&v| {
                    let isolated = g.degree(v) == 0;
                    !isolated && whole.without_vertex(v).components().len() > base
                })
                .collect();
            assert_eq!(f.cutvertices, brute);
            for b in &f.blocks {
                assert!(b.subgraph().is_two_connected());
            }
        }
    }

    #[test]
    fn block_paths_contain_their_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(3..11);
            let g = random_graph(&mut rng, n, 0.3, 1);
            if !g.is_connected() {
                continue;
            }
            let f = g.blocks();
            let leaves = f.leaves();
            for (i, &l) in leaves.iter().enumerate() {
                for &k in &leaves[i + 1..] {
                    let path = f.block_path(l, k).unwrap();
                    assert!(f.blocks[l].subgraph().is_subgraph_of(&path));
                    assert!(f.blocks[k].subgraph().is_subgraph_of(&path));
                    let (blocks, cuts) = f.tree_path(l, k).unwrap();
                    for &b in &blocks[1..blocks.len() - 1] {
                        let on_path = f.cutvertices_of(b).iter().filter(|c| cuts.contains(c)).count();
                        assert!(on_path >= 1);
                    }
                }
            }
        }
    }

    fn arb_two_connected() -> impl Strategy<Value = (PartitionedGraph, Subgraph)> {
        (3usize..9, any::<u64>()).prop_filter_map("2-connected", |(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 0.55, 1);
            let w = g.whole();
            if !w.is_two_connected() {
                return None;
            }
            let &e = w.edges.iter().nth(rng.gen_range(0..w.edges.len()))?;
            Some((g, Subgraph::from_edges([e])))
        })
    }

    proptest! {
        #[test]
        fn ear_replay_stays_connected((g, base) in arb_two_connected()) {
            let d = g.whole();
            let seq = open_ear_decomposition(&d, &base).unwrap();
            let mut acc = seq.base.clone();
            for ear in &seq.ears {
                prop_assert!(check_open_ear(&acc, ear).is_ok());
                acc = acc.union(&Subgraph::path(ear));
                prop_assert!(acc.is_connected());
            }
            prop_assert_eq!(acc, d);
        }

        #[test]
        fn smoothing_undoes_subdivision(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 0.5, 3);
            prop_assume!(!g.edges().is_empty());
            let e = g.edges()[rng.gen_range(0..g.edges().len())];
            let (s, w) = g.subdivide(e, g.part(e.0)).unwrap();
            prop_assert_eq!(s.smooth(w).unwrap(), g);
        }
    }
}

//! Line-constrained frameworks, the rigidity matrix `R`, the reduced
//! matrix `R'` (one column per vertex), pseudo-generic placements and the
//! infinitesimal rigidity test.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, RankMode, RationalMatrix};
use crate::linegeom::LineSet;
use crate::pgraph::{edge, Edge, PartitionedGraph};
use crate::scalar::{self, Rational};

/// Exact placements draw integer parameters from `[-T, T]`.
pub const EXACT_PARAM_RANGE: i64 = 1_000_000;
/// Float placements draw uniform parameters from `[-F, F]`.
pub const FLOAT_PARAM_RANGE: f64 = 10.0;
/// Redraws allowed when a placement puts both ends of an edge together.
pub const DEGENERATE_REDRAWS: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RigidityError {
    #[error("vertex {vertex} uses line {line} but only {available} lines are given")]
    MissingLine { vertex: usize, line: usize, available: usize },
    #[error("edge {0}-{1} has zero length")]
    DegenerateEdge(usize, usize),
    #[error("graph is not connected and unicyclic")]
    NotUnicyclic,
    #[error("parameter vector has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("no non-degenerate placement found for seed {0}")]
    NoPlacement(u64),
}

pub fn check_lines(g: &PartitionedGraph, lines: &LineSet) -> Result<(), RigidityError> {
    match (0..g.n()).find(|&v| g.part(v) >= lines.len()) {
        Some(v) => Err(RigidityError::MissingLine {
            vertex: v,
            line: g.part(v),
            available: lines.len(),
        }),
        None => Ok(()),
    }
}

/// All lines met by the graph are mutually parallel.
pub fn parallel_regime(g: &PartitionedGraph, lines: &LineSet) -> bool {
    let used = g.used_lines();
    lines.all_parallel(&used)
}

/// A placement `p(v) = base + t_v * direction` on the line of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Framework<'a> {
    pub graph: &'a PartitionedGraph,
    pub lines: &'a LineSet,
    pub t: Vec<Rational>,
}

impl<'a> Framework<'a> {
    pub fn new(
        graph: &'a PartitionedGraph,
        lines: &'a LineSet,
        t: Vec<Rational>,
    ) -> Result<Self, RigidityError> {
        check_lines(graph, lines)?;
        if t.len() != graph.n() {
            return Err(RigidityError::WrongLength { expected: graph.n(), got: t.len() });
        }
        Ok(Framework { graph, lines, t })
    }

    pub fn position(&self, v: usize) -> Vec<Rational> {
        self.lines.line(self.graph.part(v)).point_at(&self.t[v])
    }

    pub fn positions(&self) -> Vec<Vec<Rational>> {
        (0..self.graph.n()).map(|v| self.position(v)).collect()
    }

    pub fn t_f64(&self) -> Vec<f64> {
        scalar::vec_to_f64(&self.t)
    }

    pub fn degenerate_edge(&self) -> Option<Edge> {
        self.graph.edges().iter().copied().find(|&(u, v)| self.position(u) == self.position(v))
    }
}

/// Independent integer or float parameters per vertex, reproducible from
/// `seed`.
pub fn random_generic_framework<'a>(
    g: &'a PartitionedGraph,
    lines: &'a LineSet,
    seed: u64,
    mode: RankMode,
) -> Result<Framework<'a>, RigidityError> {
    check_lines(g, lines)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = (0..g.n())
        .map(|_| match mode {
            RankMode::Exact => scalar::int(rng.gen_range(-EXACT_PARAM_RANGE..=EXACT_PARAM_RANGE)),
            RankMode::Float => {
                let x: f64 = rng.gen_range(-FLOAT_PARAM_RANGE..FLOAT_PARAM_RANGE);
                scalar::from_f64(x).expect("finite")
            }
        })
        .collect();
    Framework::new(g, lines, t)
}

/// Like [`random_generic_framework`] but redraws, deterministically, while
/// some edge has zero length.
pub fn nondegenerate_framework<'a>(
    g: &'a PartitionedGraph,
    lines: &'a LineSet,
    seed: u64,
    mode: RankMode,
) -> Result<Framework<'a>, RigidityError> {
    for attempt in 0..DEGENERATE_REDRAWS {
        let s = if attempt == 0 { seed } else { redraw_seed(seed, attempt) };
        let fw = random_generic_framework(g, lines, s, mode)?;
        if fw.degenerate_edge().is_none() {
            return Ok(fw);
        }
    }
    Err(RigidityError::NoPlacement(seed))
}

fn redraw_seed(seed: u64, attempt: u64) -> u64 {
    seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Squared edge lengths in edge order.
pub fn measurement(fw: &Framework) -> Vec<Rational> {
    let pos = fw.positions();
    fw.graph
        .edges()
        .iter()
        .map(|&(u, v)| scalar::norm_sq(&scalar::sub(&pos[u], &pos[v])))
        .collect()
}

/// Float measurement at parameters `t`, used by the oracle.
pub fn measurement_f64(g: &PartitionedGraph, lines: &[crate::linegeom::FloatLine], t: &[f64]) -> Vec<f64> {
    let pos: Vec<Vec<f64>> = (0..g.n()).map(|v| lines[g.part(v)].point_at(t[v])).collect();
    g.edges()
        .iter()
        .map(|&(u, v)| pos[u].iter().zip(&pos[v]).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect()
}

/// `R(G, p, L)`: one row per edge, then `d - 1` rows per vertex holding the
/// standard equation of its line; `d` columns per vertex.
pub fn rigidity_matrix_full(fw: &Framework) -> RationalMatrix {
    let d = fw.lines.dim();
    let n = fw.graph.n();
    let pos = fw.positions();
    let mut m = RationalMatrix::zeros(0, d * n);
    for &(u, v) in fw.graph.edges() {
        let mut row = vec![Rational::zero(); d * n];
        for k in 0..d {
            let diff = &pos[u][k] - &pos[v][k];
            row[d * v + k] = -diff.clone();
            row[d * u + k] = diff;
        }
        m.push_row(row);
    }
    for v in 0..n {
        for a in fw.lines.line(fw.graph.part(v)).standard_a() {
            let mut row = vec![Rational::zero(); d * n];
            row[d * v..d * v + d].clone_from_slice(a);
            m.push_row(row);
        }
    }
    m
}

/// `R'(G, p, L)` with every row multiplied by its edge length and every
/// column by the length of its direction vector: row `uv` holds
/// `d_u . (p(v) - p(u))` at `u` and `d_v . (p(u) - p(v))` at `v`.
pub fn rigidity_matrix_reduced(fw: &Framework) -> Result<RationalMatrix, RigidityError> {
    let n = fw.graph.n();
    let pos = fw.positions();
    let mut m = RationalMatrix::zeros(0, n);
    for &(u, v) in fw.graph.edges() {
        let duv = scalar::sub(&pos[v], &pos[u]);
        if scalar::is_zero_vec(&duv) {
            return Err(RigidityError::DegenerateEdge(u, v));
        }
        let mut row = vec![Rational::zero(); n];
        row[u] = scalar::dot(fw.lines.line(fw.graph.part(u)).direction(), &duv);
        row[v] = -scalar::dot(fw.lines.line(fw.graph.part(v)).direction(), &duv);
        m.push_row(row);
    }
    Ok(m)
}

/// `R'` with true cosines: entry `(uv, u)` is the cosine of the angle
/// between the direction of `L_u` and `p(v) - p(u)`.
pub fn rigidity_matrix_cosines(fw: &Framework) -> Result<DMatrix<f64>, RigidityError> {
    let n = fw.graph.n();
    let pos: Vec<Vec<f64>> = fw.positions().iter().map(|p| scalar::vec_to_f64(p)).collect();
    let dirs: Vec<Vec<f64>> = (0..n)
        .map(|v| scalar::vec_to_f64(fw.lines.line(fw.graph.part(v)).direction()))
        .collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut m = DMatrix::zeros(fw.graph.edges().len(), n);
    for (r, &(u, v)) in fw.graph.edges().iter().enumerate() {
        let duv: Vec<f64> = pos[v].iter().zip(&pos[u]).map(|(a, b)| a - b).collect();
        let len = norm(&duv);
        if len == 0.0 {
            return Err(RigidityError::DegenerateEdge(u, v));
        }
        m[(r, u)] = dot(&dirs[u], &duv) / (len * norm(&dirs[u]));
        m[(r, v)] = -dot(&dirs[v], &duv) / (len * norm(&dirs[v]));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    #[serde(rename = "rank_R")]
    pub rank_r: usize,
    pub kernel_dim: usize,
    #[serde(rename = "rank_Rprime")]
    pub rank_rprime: usize,
    pub parallel_regime: bool,
    pub inf_rigid: bool,
    pub placement_seed: u64,
}

/// Ranks of `R` and `R'` at one placement, plus the verdict.
pub fn report_at(fw: &Framework, seed: u64, mode: RankMode) -> Result<RigidityReport, RigidityError> {
    let full = rigidity_matrix_full(fw);
    let reduced = rigidity_matrix_reduced(fw)?;
    let rank_r = full.rank(mode);
    let kernel_dim = full.ncols() - rank_r;
    let parallel = parallel_regime(fw.graph, fw.lines);
    Ok(RigidityReport {
        rank_r,
        kernel_dim,
        rank_rprime: reduced.rank(mode),
        parallel_regime: parallel,
        inf_rigid: kernel_dim == usize::from(parallel),
        placement_seed: seed,
    })
}

/// Generic rank estimated as the maximum over placements seeded
/// `seed, seed + 1, .., seed + trials - 1`; ties go to the smallest seed.
pub fn infinitesimally_rigid(
    g: &PartitionedGraph,
    lines: &LineSet,
    trials: usize,
    seed: u64,
) -> Result<RigidityReport, RigidityError> {
    infinitesimally_rigid_mode(g, lines, trials, seed, RankMode::Exact)
}

pub fn infinitesimally_rigid_mode(
    g: &PartitionedGraph,
    lines: &LineSet,
    trials: usize,
    seed: u64,
    mode: RankMode,
) -> Result<RigidityReport, RigidityError> {
    check_lines(g, lines)?;
    let reports: Vec<Result<RigidityReport, RigidityError>> = (0..trials.max(1) as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let fw = nondegenerate_framework(g, lines, s, mode)?;
            report_at(&fw, s, mode)
        })
        .collect();
    let mut best: Option<RigidityReport> = None;
    let mut last_err = None;
    for r in reports {
        match r {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.rank_r > b.rank_r) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(RigidityError::NoPlacement(seed)))
}

/// Both sides of the determinant expansion of `R'` for a connected
/// unicyclic graph, in `f64` with true cosines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetExpansion {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetExpansionExact {
    #[serde(with = "scalar::one")]
    pub lhs: Rational,
    #[serde(with = "scalar::one")]
    pub rhs: Rational,
}

/// Orientation with every vertex of in-degree one: the cycle is directed
/// cyclically and tree edges point away from it. Returns, for each vertex,
/// the edge index entering it and that edge's tail, plus the cycle's edges.
struct InDegreeOne {
    incoming: Vec<(usize, usize)>,
    cycle: Vec<usize>,
}

fn in_degree_one(g: &PartitionedGraph) -> Result<InDegreeOne, RigidityError> {
    let n = g.n();
    if n == 0 || g.edges().len() != n || !g.is_connected() {
        return Err(RigidityError::NotUnicyclic);
    }
    let index: BTreeMap<Edge, usize> = g.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    // Peel leaves until only the cycle remains.
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut on_cycle = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = queue.pop_front() {
        on_cycle[v] = false;
        for &w in g.neighbours(v) {
            if on_cycle[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
    }
    let start = (0..n).find(|&v| on_cycle[v]).ok_or(RigidityError::NotUnicyclic)?;
    let mut order = vec![start];
    loop {
        let cur = *order.last().unwrap();
        let prev = if order.len() >= 2 { Some(order[order.len() - 2]) } else { None };
        let next = g
            .neighbours(cur)
            .iter()
            .copied()
            .find(|&w| on_cycle[w] && Some(w) != prev)
            .ok_or(RigidityError::NotUnicyclic)?;
        if next == start {
            break;
        }
        order.push(next);
    }
    let mut incoming = vec![(usize::MAX, usize::MAX); n];
    let mut cycle = Vec::new();
    for i in 0..order.len() {
        let (tail, head) = (order[i], order[(i + 1) % order.len()]);
        let e = index[&edge(tail, head)];
        incoming[head] = (e, tail);
        cycle.push(e);
    }
    let mut queue: VecDeque<usize> = order.iter().copied().collect();
    let mut seen: Vec<bool> = on_cycle.clone();
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbours(u) {
            if !seen[w] {
                seen[w] = true;
                incoming[w] = (index[&edge(u, w)], u);
                queue.push_back(w);
            }
        }
    }
    Ok(InDegreeOne { incoming, cycle })
}

fn expansion<T, F>(o: &InDegreeOne, entry: F, one: T) -> T
where
    T: Clone + std::ops::Mul<Output = T> + std::ops::Add<Output = T> + std::ops::Neg<Output = T>,
    F: Fn(usize, usize) -> T,
{
    let on_cycle: BTreeSet<usize> = o.cycle.iter().copied().collect();
    let mut tree = one.clone();
    let mut heads = one.clone();
    let mut tails = one;
    for (h, &(e, t)) in o.incoming.iter().enumerate() {
        if on_cycle.contains(&e) {
            heads = heads * entry(e, h);
            tails = tails * entry(e, t);
        } else {
            tree = tree * entry(e, h);
        }
    }
    let closing = if o.cycle.len() % 2 == 1 { tails } else { -tails };
    tree * (heads + closing)
}

/// Determinant of `R'` with rows ordered by head vertex, against the
/// closed-form product expansion over the in-degree-one orientation.
pub fn det_expansion_check(fw: &Framework) -> Result<DetExpansion, RigidityError> {
    let o = in_degree_one(fw.graph)?;
    let m = rigidity_matrix_cosines(fw)?;
    let n = fw.graph.n();
    let ordered = DMatrix::from_fn(n, n, |r, c| m[(o.incoming[r].0, c)]);
    let lhs = linalg::float_det(&ordered);
    let rhs = expansion(&o, |e, v| m[(e, v)], 1.0);
    Ok(DetExpansion { lhs, rhs })
}

/// Exact form of [`det_expansion_check`] over the length-scaled `R'`.
pub fn det_expansion_check_exact(fw: &Framework) -> Result<DetExpansionExact, RigidityError> {
    let o = in_degree_one(fw.graph)?;
    let m = rigidity_matrix_reduced(fw)?;
    let rows = o.incoming.iter().map(|&(e, _)| m.rows()[e].clone()).collect();
    let ordered = RationalMatrix::from_rows(fw.graph.n(), rows);
    let lhs = ordered.determinant();
    let rhs = expansion(&o, |e, v| m.get(e, v).clone(), Rational::one());
    Ok(DetExpansionExact { lhs, rhs })
}

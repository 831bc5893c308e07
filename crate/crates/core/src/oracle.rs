//! Numeric global-flex oracle. Random-restart damped least squares over the
//! per-vertex line parameters finds points of the fiber of the measurement
//! map; solutions are merged up to the isometries of the lines in use.
//!
//! A single class is evidence of global rigidity, never proof.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::RankMode;
use crate::linegeom::{FloatLine, GeomError, IsomGroup, Isometry, LineSet};
use crate::pgraph::PartitionedGraph;
use crate::rigidity::{self, measurement_f64, Framework, RigidityError};
use crate::scalar;

pub const MAX_VERTICES: usize = 12;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const DEDUP_TOL: f64 = 1e-6;
const LM_ITERATIONS: usize = 300;
const POLISH_ITERATIONS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} vertices exceeds the oracle limit of {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("lines in use are neither in general position nor all parallel")]
    UnsupportedLineSet,
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSearchResult {
    /// One parameter vector per congruence class, sorted; the reference
    /// placement's class is always present.
    pub classes: Vec<Vec<f64>>,
    pub restarts_used: usize,
    /// Restarts that met the residual tolerance. Zero means the search
    /// found nothing beyond the reference.
    pub converged: usize,
    pub residual_tol: f64,
    pub quotient_group: IsomGroup,
}

impl FiberSearchResult {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Float form of the group action on a parameter vector.
#[derive(Clone, Debug)]
enum Action {
    Trivial,
    /// `t_v -> 2 c_v - t_v`.
    HalfTurn(Vec<f64>),
    /// Axis coordinate `x_v = offset_v + scale_v t_v`.
    Euclidean { offset: Vec<f64>, scale: Vec<f64> },
}

impl Action {
    fn new(g: &PartitionedGraph, lines: &LineSet, group: &IsomGroup) -> Action {
        match group {
            IsomGroup::Trivial => Action::Trivial,
            IsomGroup::Cyclic2 { generator } => {
                let Isometry::HalfTurn { lines: ids, fixed } = generator else {
                    return Action::Trivial;
                };
                let c = (0..g.n())
                    .map(|v| {
                        let on = g.part(v);
                        let k = if ids[0] == on { 0 } else { 1 };
                        scalar::to_f64(&lines.line(on).project_param(&fixed[k]))
                    })
                    .collect();
                Action::HalfTurn(c)
            }
            IsomGroup::Euclidean1d { axis } => {
                let a = scalar::vec_to_f64(axis);
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let u: Vec<f64> = a.iter().map(|x| x / na).collect();
                let fl = lines.to_f64();
                let dot = |x: &[f64]| x.iter().zip(&u).map(|(p, q)| p * q).sum::<f64>();
                let offset = (0..g.n()).map(|v| dot(&fl[g.part(v)].base)).collect();
                let scale = (0..g.n()).map(|v| dot(&fl[g.part(v)].direction)).collect();
                Action::Euclidean { offset, scale }
            }
        }
    }

    /// Largest vertexwise parameter gap between `q2` and the best image of
    /// `q1`.
    fn distance(&self, q1: &[f64], q2: &[f64]) -> f64 {
        let direct = max_gap(q1.iter().zip(q2).map(|(a, b)| a - b));
        match self {
            Action::Trivial => direct,
            Action::HalfTurn(c) => {
                let flipped = max_gap(q1.iter().zip(q2).zip(c).map(|((a, b), c)| 2.0 * c - a - b));
                direct.min(flipped)
            }
            Action::Euclidean { offset, scale } => {
                let x = |q: &[f64]| -> Vec<f64> {
                    q.iter().zip(offset).zip(scale).map(|((t, o), s)| o + s * t).collect()
                };
                let (x1, x2) = (x(q1), x(q2));
                let n = x1.len().max(1) as f64;
                let shift = x1.iter().zip(&x2).map(|(a, b)| b - a).sum::<f64>() / n;
                let center = x1.iter().zip(&x2).map(|(a, b)| a + b).sum::<f64>() / n;
                let tr = max_gap(x1.iter().zip(&x2).zip(scale).map(|((a, b), s)| (a + shift - b) / s));
                let rf = max_gap(x1.iter().zip(&x2).zip(scale).map(|((a, b), s)| (center - a - b) / s));
                tr.min(rf)
            }
        }
    }
}

fn max_gap(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, x| m.max(x.abs()))
}

/// Whether some element of `group` carries `q1` to within `tol` of `q2` at
/// every vertex.
pub fn congruent(
    g: &PartitionedGraph,
    lines: &LineSet,
    q1: &[f64],
    q2: &[f64],
    group: &IsomGroup,
    tol: f64,
) -> bool {
    Action::new(g, lines, group).distance(q1, q2) <= tol
}

struct Problem<'a> {
    g: &'a PartitionedGraph,
    lines: Vec<FloatLine>,
    target: Vec<f64>,
}

impl Problem<'_> {
    fn residual(&self, t: &[f64]) -> DVector<f64> {
        let m = measurement_f64(self.g, &self.lines, t);
        DVector::from_iterator(m.len(), m.iter().zip(&self.target).map(|(a, b)| a - b))
    }

    fn jacobian(&self, t: &[f64]) -> DMatrix<f64> {
        let edges = self.g.edges();
        let mut j = DMatrix::zeros(edges.len(), t.len());
        for (r, &(u, v)) in edges.iter().enumerate() {
            let (lu, lv) = (&self.lines[self.g.part(u)], &self.lines[self.g.part(v)]);
            let diff: Vec<f64> = lu.point_at(t[u]).iter().zip(lv.point_at(t[v])).map(|(a, b)| a - b).collect();
            let dot = |d: &[f64]| 2.0 * d.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>();
            j[(r, u)] += dot(&lu.direction);
            j[(r, v)] -= dot(&lv.direction);
        }
        j
    }

    fn solve(&self, start: Vec<f64>, abs_tol: f64) -> Option<Vec<f64>> {
        let mut t = start;
        let mut r = self.residual(&t);
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..LM_ITERATIONS {
            if r.amax() <= abs_tol * 1e-3 {
                break;
            }
            let j = self.jacobian(&t);
            let jt = j.transpose();
            let a = &jt * &j;
            let grad = &jt * &r;
            let mut improved = false;
            for _ in 0..20 {
                let mut damped = a.clone();
                for i in 0..t.len() {
                    damped[(i, i)] += lambda * (a[(i, i)] + 1e-12);
                }
                let Some(ch) = damped.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let step = ch.solve(&grad);
                let cand: Vec<f64> = t.iter().zip(step.iter()).map(|(x, s)| x - s).collect();
                let rc = self.residual(&cand);
                let c = rc.norm_squared();
                if c < cost {
                    t = cand;
                    r = rc;
                    cost = c;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        // Gauss-Newton polish with a minimum-norm step.
        for _ in 0..POLISH_ITERATIONS {
            if r.is_empty() {
                break;
            }
            let j = self.jacobian(&t);
            let Ok(step) = j.svd(true, true).solve(&r, 1e-12) else { break };
            let cand: Vec<f64> = t.iter().zip(step.iter()).map(|(x, s)| x - s).collect();
            let rc = self.residual(&cand);
            if rc.amax() >= r.amax() {
                break;
            }
            t = cand;
            r = rc;
        }
        (r.amax() <= abs_tol && t.iter().all(|x| x.is_finite())).then_some(t)
    }
}

/// Searches the fiber through `fw` from `restarts` random starts. Restart
/// `i` draws from its own generator seeded with `seed + i`, so the result
/// does not depend on scheduling.
pub fn fiber_search(fw: &Framework, restarts: usize, seed: u64) -> Result<FiberSearchResult, OracleError> {
    let g = fw.graph;
    if g.n() > MAX_VERTICES {
        return Err(OracleError::TooLarge(g.n()));
    }
    rigidity::check_lines(g, fw.lines)?;
    let used = g.used_lines();
    let group = fw.lines.isometry_group_of(&used).map_err(|e| match e {
        GeomError::UnsupportedLineSet => OracleError::UnsupportedLineSet,
        e => OracleError::Geometry(e),
    })?;
    let action = Action::new(g, fw.lines, &group);
    let t0 = fw.t_f64();
    let lines = fw.lines.to_f64();
    let target = measurement_f64(g, &lines, &t0);
    let abs_tol = RESIDUAL_TOL * target.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let problem = Problem { g, lines, target };

    let lo = t0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = if t0.is_empty() { 0.0 } else { (lo + hi) / 2.0 };
    let half = 3.0 * (hi - lo).max(1.0);

    let found: Vec<Option<Vec<f64>>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let start = (0..g.n()).map(|_| rng.gen_range(mid - half..=mid + half)).collect();
            problem.solve(start, abs_tol)
        })
        .collect();

    let converged = found.iter().flatten().count();
    let mut classes: Vec<Vec<f64>> = vec![t0];
    for q in found.into_iter().flatten() {
        let scale = q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if classes.iter().all(|c| action.distance(c, &q) > DEDUP_TOL * scale) {
            classes.push(q);
        }
    }
    classes.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(FiberSearchResult { classes, restarts_used: restarts, converged, residual_tol: RESIDUAL_TOL, quotient_group: group })
}

/// Restarts used by [`triangle_flex_check`].
pub const TRIANGLE_RESTARTS: usize = 200;

/// Triangle with `u, v` on the first line and `w` on the second: every
/// solution found keeps `w` at `p(w)` or at its image under the half-turn.
pub fn triangle_flex_check(lines: &LineSet, seed: u64) -> Result<bool, OracleError> {
    if lines.len() != 2 {
        return Err(OracleError::Precondition(format!("expected 2 lines, got {}", lines.len())));
    }
    if let Some(v) = lines.general_position_violation() {
        return Err(OracleError::Precondition(format!("lines not in general position: {:?}", v.kind)));
    }
    let g = PartitionedGraph::new(3, vec![0, 0, 1], [(0, 1), (1, 2), (0, 2)])
        .map_err(|e| OracleError::Precondition(e.to_string()))?;
    let fw = rigidity::random_generic_framework(&g, lines, seed, RankMode::Float)?;
    let res = fiber_search(&fw, TRIANGLE_RESTARTS, seed)?;
    let Action::HalfTurn(c) = Action::new(&g, lines, &res.quotient_group) else {
        return Err(OracleError::UnsupportedLineSet);
    };
    let pw = fw.t_f64()[2];
    let flipped = 2.0 * c[2] - pw;
    let tol = DEDUP_TOL * pw.abs().max(1.0);
    Ok(res.classes.iter().all(|q| (q[2] - pw).abs() <= tol || (q[2] - flipped).abs() <= tol))
}

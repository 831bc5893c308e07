//! Whole-instance reports behind the command line and the C interface.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterize::{
    self, is_L_rigid, is_P_connected, is_redundantly_L_rigid, GlobalCertificate, NecessityViolation,
    PConnectivity, RedundancyVerdict, Regime, RigidityVerdict,
};
use crate::instance::Instance;
use crate::linalg::RankMode;
use crate::linegeom::{random_general_position, GeomError, Violation};
use crate::oracle::{self, OracleError};
use crate::pgraph::PartitionedGraph;
use crate::rigidity::{self, RigidityReport};

/// Placements tried for the generic rank.
pub const RANK_TRIALS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub edges: usize,
    pub general_position: bool,
    pub general_position_violation: Option<Violation>,
    pub crossing: bool,
    pub regime: Regime,
    pub rigidity: RigidityVerdict,
    pub redundancy: RedundancyVerdict,
    pub p_connectivity: PConnectivity,
    /// `None` when the lines in use are not in general position or the
    /// graph is not crossing.
    pub globally_rigid: Option<bool>,
    pub necessity_violation: Option<NecessityViolation>,
    pub global_error: Option<String>,
}

pub fn analyze(inst: &Instance) -> AnalysisReport {
    let (g, ls) = (&inst.graph, &inst.lines);
    let used = g.used_lines();
    let violation = ls.general_position_violation_among(&used);
    let rigidity = is_L_rigid(g, ls).expect("instance lines validated");
    let redundancy = is_redundantly_L_rigid(g, ls).expect("instance lines validated");
    let (globally_rigid, necessity_violation, global_error) = match characterize::decide_global(g, ls) {
        Ok(c) => (Some(c.decision), c.necessity_violation, None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    AnalysisReport {
        n: g.n(),
        edges: g.edges().len(),
        general_position: violation.is_none(),
        general_position_violation: violation,
        crossing: g.is_crossing_graph(),
        regime: characterize::regime(g, ls),
        rigidity,
        redundancy,
        p_connectivity: is_P_connected(g),
        globally_rigid,
        necessity_violation,
        global_error,
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut s = format!("vertices {}, edges {}\n", self.n, self.edges);
        s += &format!("general position: {}", yn(self.general_position));
        if let Some(v) = &self.general_position_violation {
            s += &format!(" ({:?} lines {:?})", v.kind, v.lines);
        }
        s += &format!("\ncrossing: {}\nregime: {:?}\n", yn(self.crossing), self.regime);
        s += &format!("rigid: {}\n", yn(self.rigidity.rigid));
        s += &format!("redundantly rigid: {}", yn(self.redundancy.redundant));
        if let Some(e) = self.redundancy.failing_edge {
            s += &format!(" (fails without edge {e:?})");
        }
        s += &format!("\nP-connected: {}\n", yn(self.p_connectivity.p_connected));
        match (self.globally_rigid, &self.global_error) {
            (Some(b), _) => s += &format!("globally rigid: {}\n", yn(b)),
            (None, Some(e)) => s += &format!("globally rigid: undecided ({e})\n"),
            (None, None) => s += "globally rigid: undecided\n",
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("instance is not generically globally rigid: {0:?}")]
    VerdictIsNo(Option<NecessityViolation>),
    #[error(transparent)]
    Characterize(#[from] characterize::CharacterizeError),
}

pub fn certify(inst: &Instance) -> Result<GlobalCertificate, CertifyError> {
    let cert = characterize::is_generically_globally_rigid(&inst.graph, &inst.lines)?;
    if !cert.decision {
        return Err(CertifyError::VerdictIsNo(cert.necessity_violation));
    }
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensure {
    Yes,
    No,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub seed: u64,
    pub ensure: Option<Ensure>,
    /// Edge probability; drawn per attempt from [0.3, 0.9] when `None`.
    pub edge_prob: Option<f64>,
    pub max_attempts: usize,
}

impl RandomSpec {
    pub fn new(n: usize, k: usize, dim: usize, seed: u64) -> RandomSpec {
        RandomSpec { n, k, dim, seed, ensure: None, edge_prob: None, max_attempts: 10_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("need n >= 1 and k >= 1")]
    Empty,
    #[error("no instance matched after {0} attempts")]
    SamplingBudgetExceeded(usize),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Random partitioned graph on random general-position lines, resampled
/// until the verdict matches `spec.ensure`.
pub fn random_instance(spec: &RandomSpec) -> Result<Instance, SamplingError> {
    if spec.n == 0 || spec.k == 0 {
        return Err(SamplingError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.max_attempts {
        let lines = random_general_position(spec.dim, spec.k, &mut rng)?;
        let p = spec.edge_prob.unwrap_or_else(|| rng.gen_range(0.3..0.9));
        let g = PartitionedGraph::random(&mut rng, spec.n, spec.k, p);
        let ok = match spec.ensure {
            None => true,
            Some(want) => match characterize::decide_global(&g, &lines) {
                Ok(c) => c.decision == (want == Ensure::Yes),
                Err(_) => false,
            },
        };
        if ok {
            return Ok(Instance::new(lines, g, None).expect("parts drawn below k"));
        }
    }
    Err(SamplingError::SamplingBudgetExceeded(spec.max_attempts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleLeg {
    Skipped { reason: String },
    Ran {
        classes: usize,
        converged: usize,
        /// One class for a YES verdict, more than one for NO. A mismatch is
        /// a warning only: the search is heuristic.
        consistent: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub combinatorial_rigid: bool,
    pub rank: RigidityReport,
    pub rigidity_agree: bool,
    pub globally_rigid: Option<bool>,
    pub oracle: OracleLeg,
}

impl VerifyReport {
    pub fn warning(&self) -> Option<String> {
        match &self.oracle {
            OracleLeg::Ran { consistent: false, classes, .. } => Some(format!(
                "oracle found {classes} class(es) against a verdict of {:?}",
                self.globally_rigid
            )),
            _ => None,
        }
    }
}

/// Combinatorial rigidity against exact generic rank, and the global
/// verdict against the fiber search.
pub fn verify(inst: &Instance, restarts: usize, seed: u64) -> Result<VerifyReport, rigidity::RigidityError> {
    let (g, ls) = (&inst.graph, &inst.lines);
    let comb = is_L_rigid(g, ls).expect("instance lines validated").rigid;
    let rank = rigidity::infinitesimally_rigid_mode(g, ls, RANK_TRIALS, seed, RankMode::Exact)?;
    let globally_rigid = characterize::decide_global(g, ls).ok().map(|c| c.decision);
    let oracle = match globally_rigid {
        None => OracleLeg::Skipped { reason: "global verdict undefined".into() },
        Some(_) if g.n() > oracle::MAX_VERTICES => {
            OracleLeg::Skipped { reason: OracleError::TooLarge(g.n()).to_string() }
        }
        Some(yes) => {
            let fw = inst.framework(seed, RankMode::Float)?;
            match oracle::fiber_search(&fw, restarts, seed) {
                Ok(r) => OracleLeg::Ran {
                    classes: r.class_count(),
                    converged: r.converged,
                    consistent: yes == (r.class_count() == 1),
                },
                Err(e) => OracleLeg::Skipped { reason: e.to_string() },
            }
        }
    };
    Ok(VerifyReport {
        n: g.n(),
        combinatorial_rigid: comb,
        rigidity_agree: comb == rank.inf_rigid,
        rank,
        globally_rigid,
        oracle,
    })
}

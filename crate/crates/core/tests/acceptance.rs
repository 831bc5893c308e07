//! Acceptance run: one PASS/FAIL line per criterion, each with its time
//! budget. Runs without the libtest harness so the lines always print.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linerig::analysis::{random_instance, Ensure, RandomSpec};
use linerig::characterize::{
    decide_global, glue_disjoint, glue_shared_vertex, is_L_rigid, is_generically_globally_rigid,
    replay_certificate, subdivision_checks, verdict_invariance_suite, NecessityViolation,
};
use linerig::instance::Instance;
use linerig::linalg::RankMode;
use linerig::linegeom::{
    distance_profile_at, extend_general_position, random_general_position, IsomStructure, Isometry,
    Line, LineSet, ProfileKind,
};
use linerig::oracle::fiber_search;
use linerig::pgraph::PartitionedGraph;
use linerig::rigidity::{
    det_expansion_check, det_expansion_check_exact, infinitesimally_rigid_mode, nondegenerate_framework,
    random_generic_framework, rigidity_matrix_cosines, rigidity_matrix_reduced,
};
use linerig::scalar::{self, int, Rational};

const DET_RTOL: f64 = 1e-8;
const ORACLE_RESTARTS: usize = 1000;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn graph(n: usize, part: &[usize], edges: &[(usize, usize)]) -> PartitionedGraph {
    PartitionedGraph::new(n, part.to_vec(), edges.iter().copied()).unwrap()
}

fn type1() -> PartitionedGraph {
    graph(5, &[0, 1, 2, 0, 1], &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
}

fn type2() -> PartitionedGraph {
    graph(6, &[0, 1, 2, 0, 1, 2], &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3)])
}

fn type3() -> PartitionedGraph {
    graph(4, &[0, 1, 2, 1], &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
}

/// Redundantly rigid; removing vertex 0 leaves {4, 5} on a single line.
fn redundant_not_p_connected() -> PartitionedGraph {
    graph(6, &[0, 1, 2, 1, 0, 0], &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (0, 4), (4, 5), (0, 5)])
}

/// A crossing 4-cycle: P-connected, but rigid only minimally.
fn p_connected_not_redundant() -> PartitionedGraph {
    graph(4, &[0, 1, 2, 1], &[(0, 1), (1, 2), (2, 3), (0, 3)])
}

/// Independent component count by union-find.
fn component_count(g: &PartitionedGraph) -> usize {
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    (0..g.n()).filter(|&v| find(&mut parent, v) == v).count()
}

fn c1_rigidity_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agree = 0;
    for i in 0..200u64 {
        let n = rng.gen_range(1..=10);
        let k = rng.gen_range(1..=4);
        let d = rng.gen_range(2..=3);
        let p = rng.gen_range(0.15..0.7);
        let ls = random_general_position(d, k, &mut rng).unwrap();
        let g = PartitionedGraph::random(&mut rng, n, k, p);
        let comb = is_L_rigid(&g, &ls).unwrap().rigid;
        let rank = infinitesimally_rigid_mode(&g, &ls, 5, i, RankMode::Exact).unwrap();
        agree += usize::from(comb == rank.inf_rigid);
    }
    outcome(agree == 200, format!("{agree}/200 agree"))
}

fn c2_parallel_matroid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut good = 0;
    for i in 0..50u64 {
        let d = rng.gen_range(2..=3);
        let dir: Vec<Rational> = loop {
            let v: Vec<Rational> = (0..d).map(|_| int(rng.gen_range(-4..=4))).collect();
            if !scalar::is_zero_vec(&v) {
                break v;
            }
        };
        let k = rng.gen_range(1..=4);
        let mut lines: Vec<Line> = Vec::new();
        while lines.len() < k {
            let base = (0..d).map(|_| int(rng.gen_range(-10..=10))).collect();
            let l = Line::from_point_direction(base, dir.clone()).unwrap();
            if lines.iter().all(|m| !m.same_line_as(&l)) {
                lines.push(l);
            }
        }
        let ls = LineSet::new(lines).unwrap();
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(0.1..0.6);
        let g = PartitionedGraph::random(&mut rng, n, k, p);
        let r = infinitesimally_rigid_mode(&g, &ls, 5, i, RankMode::Exact).unwrap();
        good += usize::from(r.parallel_regime && r.rank_rprime == n - component_count(&g));
    }
    outcome(good == 50, format!("{good}/50 with rank R' = n - components"))
}

/// Random tree plus one edge, with the cycle meeting at least two lines so
/// that `R'` is generically nonsingular.
fn random_unicyclic(rng: &mut ChaCha8Rng) -> PartitionedGraph {
    loop {
        let n = rng.gen_range(3..=9);
        let parent: Vec<usize> = (0..n).map(|v| if v == 0 { 0 } else { rng.gen_range(0..v) }).collect();
        let mut edges: BTreeSet<(usize, usize)> = (1..n).map(|v| (parent[v], v)).collect();
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b || !edges.insert((a.min(b), a.max(b))) {
            continue;
        }
        let part: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let to_root = |mut v: usize| {
            let mut p = vec![v];
            while v != 0 {
                v = parent[v];
                p.push(v);
            }
            p
        };
        let (pa, pb) = (to_root(a), to_root(b));
        let common: BTreeSet<usize> = pa.iter().copied().filter(|x| pb.contains(x)).collect();
        let top = *pa.iter().find(|x| common.contains(x)).unwrap();
        let cycle: BTreeSet<usize> =
            pa.iter().chain(&pb).copied().filter(|x| !common.contains(x) || *x == top).collect();
        if cycle.iter().map(|&v| part[v]).collect::<BTreeSet<_>>().len() < 2 {
            continue;
        }
        return PartitionedGraph::new(n, part, edges).unwrap();
    }
}

fn c3_det_expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut good = 0;
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let ls = random_general_position(3, 3, &mut rng).unwrap();
        let g = random_unicyclic(&mut rng);

        let fw = nondegenerate_framework(&g, &ls, i, RankMode::Float).unwrap();
        let f = det_expansion_check(&fw).unwrap();
        let own = rigidity_matrix_cosines(&fw).unwrap();
        let own_det = DMatrix::from_iterator(own.nrows(), own.ncols(), own.iter().copied()).determinant();
        let scale = f.lhs.abs().max(f.rhs.abs()).max(f64::MIN_POSITIVE);
        let rel = (f.lhs - f.rhs).abs() / scale;
        let rel_own = (own_det.abs() - f.rhs.abs()).abs() / scale;
        worst = worst.max(rel).max(rel_own);

        let fx = nondegenerate_framework(&g, &ls, i, RankMode::Exact).unwrap();
        let e = det_expansion_check_exact(&fx).unwrap();
        let own_exact = rigidity_matrix_reduced(&fx).unwrap().determinant();
        let exact_ok = e.lhs == e.rhs && scalar::abs(&own_exact) == scalar::abs(&e.rhs) && !e.rhs.is_zero();

        good += usize::from(rel <= DET_RTOL && rel_own <= DET_RTOL && exact_ok);
    }
    outcome(good == 50, format!("{good}/50 match, worst float rel err {worst:.1e}"))
}

fn c4_isometry_groups() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut good = 0;
    for i in 0..50 {
        let k = 1 + i % 4;
        let d = 2 + i % 2;
        let ls = random_general_position(d, k, &mut rng).unwrap();
        let grp = ls.isometry_group().unwrap();
        let want = match k {
            1 => IsomStructure::Euclidean1d,
            2 => IsomStructure::Cyclic2,
            _ => IsomStructure::Trivial,
        };
        let mut ok = grp.structure() == want;
        if let Some(theta @ Isometry::HalfTurn { fixed, .. }) = grp.generator() {
            for (on, f) in fixed.iter().enumerate() {
                ok &= theta.apply(&ls, f, on).unwrap() == *f;
                for _ in 0..10 {
                    let t = scalar::ratio(rng.gen_range(-1000..1000), rng.gen_range(1..50));
                    let p = ls.line(on).point_at(&t);
                    let once = theta.apply(&ls, &p, on).unwrap();
                    ok &= ls.line(on).contains(&once);
                    ok &= theta.apply(&ls, &once, on).unwrap() == p;
                    // distance to a point on the other line is preserved
                    let q = ls.line(1 - on).point_at(&int(rng.gen_range(-20..20)));
                    let q_img = theta.apply(&ls, &q, 1 - on).unwrap();
                    ok &= scalar::norm_sq(&scalar::sub(&p, &q)) == scalar::norm_sq(&scalar::sub(&once, &q_img));
                }
            }
        }
        good += usize::from(ok);
    }
    outcome(good == 50, format!("{good}/50 line sets"))
}

fn c5_minimal_types() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut runs = 0;
    let mut single = 0;
    let mut extra = BTreeSet::new();
    for (name, g) in [("type1", type1()), ("type2", type2()), ("type3", type3())] {
        for j in 0..10u64 {
            let ls = random_general_position(2 + (j as usize % 2), 3, &mut rng).unwrap();
            let fw = random_generic_framework(&g, &ls, j, RankMode::Float).unwrap();
            let r = fiber_search(&fw, ORACLE_RESTARTS, 100 * j).unwrap();
            runs += 1;
            single += usize::from(r.class_count() == 1 && r.converged > 0);
            if r.class_count() != 1 {
                extra.insert(format!("{name}#{j}:{}", r.class_count()));
            }
        }
    }
    let mut detail = format!("{single}/{runs} runs with one class");
    if !extra.is_empty() {
        detail += &format!(", class counts {extra:?}");
    }
    outcome(single == runs, detail)
}

fn c6_counterexamples() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut good = 0;
    let mut total = 0;
    for (g, want_p) in [(redundant_not_p_connected(), true), (p_connected_not_redundant(), false)] {
        for j in 0..3u64 {
            let ls = random_general_position(3, 3, &mut rng).unwrap();
            let c = decide_global(&g, &ls).unwrap();
            let kind_ok = match &c.necessity_violation {
                Some(NecessityViolation::NotPConnected { .. }) => want_p,
                Some(NecessityViolation::NotRedundant { .. }) => !want_p,
                None => false,
            };
            let fw = random_generic_framework(&g, &ls, j, RankMode::Float).unwrap();
            let r = fiber_search(&fw, ORACLE_RESTARTS, j).unwrap();
            total += 1;
            good += usize::from(!c.decision && kind_ok && r.class_count() >= 2);
        }
    }
    outcome(good == total, format!("{good}/{total} refuted"))
}

fn yes_instances() -> Vec<Instance> {
    (0..100u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + i);
            let spec = RandomSpec {
                ensure: Some(Ensure::Yes),
                ..RandomSpec::new(rng.gen_range(4..=12), rng.gen_range(2..=4), rng.gen_range(2..=3), 7000 + i)
            };
            random_instance(&spec).unwrap()
        })
        .collect()
}

fn c7_certificates(insts: &[Instance]) -> Outcome {
    let mut good = 0;
    for inst in insts {
        let g = &inst.graph;
        let cert = is_generically_globally_rigid(g, &inst.lines).unwrap();
        let Some(cons) = &cert.construction else { continue };
        // every ear and base edge is an edge of g, and the pieces cover g
        let edges: BTreeSet<_> = g.edges().iter().copied().collect();
        let mut covered = BTreeSet::new();
        let mut inside = true;
        for p in cons.components.iter().flat_map(|c| &c.pieces) {
            let base = p.base.subgraph();
            inside &= base.edges.is_subset(&edges);
            for ear in &p.ears {
                inside &= ear.windows(2).all(|w| g.has_edge(w[0], w[1]));
            }
            covered.extend(p.target.edges.iter().copied());
        }
        good += usize::from(replay_certificate(g, &cert).is_ok() && inside && covered == edges);
    }
    outcome(good == insts.len(), format!("{good}/{} certificates replay", insts.len()))
}

fn c8_invariance(insts: &[Instance]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sub_ok = 0;
    let mut glue_ok = 0;
    let mut glue_total = 0;
    for (i, inst) in insts.iter().enumerate() {
        let (g, ls) = (&inst.graph, &inst.lines);
        let mut all = true;
        for &e in g.edges() {
            for part in [g.part(e.0), g.part(e.1)] {
                let (s, _) = g.subdivide(e, part).unwrap();
                all &= decide_global(&s, ls).unwrap().decision;
            }
        }
        all &= subdivision_checks(g, ls).unwrap().iter().all(|c| c.decision);
        all &= verdict_invariance_suite(g, ls, i as u64).unwrap().holds;
        sub_ok += usize::from(all);

        // glue with the next instance on fresh lines
        let other = &insts[(i + 1) % insts.len()];
        let (k, kl) = (&other.graph, &other.lines);
        let Ok(ext) = extend_general_position(ls, kl.len(), &mut rng) else { continue };
        let fresh: Vec<usize> = (0..kl.len()).map(|j| ls.len() + j).collect();
        let used_h = g.used_lines().len();
        let used_k = k.used_lines().len();
        if used_h >= 3 && used_k >= 3 {
            glue_total += 1;
            glue_ok += usize::from(decide_global(&glue_disjoint(g, k, &fresh).unwrap(), &ext).unwrap().decision);
        }
        let (hv, kv) = (0, 0);
        let mut keep = fresh.clone();
        keep[k.part(kv)] = g.part(hv);
        // the shared vertex's line is reused, so every other line of k stays fresh
        glue_total += 1;
        glue_ok += usize::from(decide_global(&glue_shared_vertex(g, k, hv, kv, &keep).unwrap(), &ext).unwrap().decision);
    }
    let ok = sub_ok == insts.len() && glue_ok == glue_total;
    outcome(ok, format!("subdivision {sub_ok}/{}, gluing {glue_ok}/{glue_total}", insts.len()))
}

fn c9_profiles() -> Outcome {
    let l = Line::from_point_direction(vec![int(0), int(0)], vec![int(1), int(0)]).unwrap();
    let ts: Vec<Rational> = (-6..=6).map(|i| scalar::ratio(i, 4)).collect();
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());

    let half = distance_profile_at(&l, &[int(0), int(1)], &[int(0), int(-1)], &ts).unwrap();
    let mut ok = half.kind == ProfileKind::HalfLine;
    for s in &half.samples {
        let x = &s.t * &s.t + &one;
        ok &= s.x == x && s.y == x;
    }
    let par = distance_profile_at(&l, &[int(0), int(1)], &[int(1), int(0)], &ts).unwrap();
    ok &= par.kind == ProfileKind::Parabola;
    for s in &par.samples {
        ok &= s.x == &s.t * &s.t + &one && s.y == &s.t * &s.t + &one - &two * &s.t;
    }
    outcome(ok, format!("{} + {} exact samples", half.samples.len(), par.samples.len()))
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (ok, detail) = match res {
        Ok(o) => (o.ok && elapsed <= budget, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!(
        "criterion {id} {name}: {} ({detail}; {:.2}s, budget {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= run(1, "rigidity oracle equivalence", secs(60), c1_rigidity_equivalence);
    ok &= run(2, "parallel-regime graphic matroid", secs(5), c2_parallel_matroid);
    ok &= run(3, "determinant expansion", secs(10), c3_det_expansion);
    ok &= run(4, "isometry group structure", secs(5), c4_isometry_groups);
    ok &= run(5, "minimal types have one class", secs(120), c5_minimal_types);
    ok &= run(6, "counterexamples refuted", secs(30), c6_counterexamples);
    let start = Instant::now();
    let insts = yes_instances();
    let sampling = start.elapsed();
    ok &= run(7, "certificate soundness", secs(60).saturating_sub(sampling), || c7_certificates(&insts));
    ok &= run(8, "verdict invariance", secs(30), || c8_invariance(&insts));
    ok &= run(9, "distance profiles", secs(1), c9_profiles);
    println!("sampling 100 YES instances took {:.2}s (counted against criterion 7)", sampling.as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

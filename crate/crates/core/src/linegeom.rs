//! Lines in R^d: canonical standard equations, pairwise classification,
//! closest-point pairs, general position and the isometry group of a set of
//! lines.
//!
//! All predicates are exact: line data is stored as rationals, and every
//! finite JSON number is a rational, so equality tests such as weak
//! concurrency never depend on a tolerance. [`FloatLine`] is the `f64` view
//! used by the numeric oracle.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::scalar::{self, Rational};

/// Tolerance on |cos| and |sin| used by the float classification.
pub const FLOAT_ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("lines are parallel")]
    ParallelLines,
    #[error("point does not lie on line {0}")]
    PointOffLine(usize),
    #[error("line {0} is not part of this isometry's line set")]
    LineNotInSet(usize),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("isometry group is only characterised for parallel or general-position line sets")]
    UnsupportedLineSet,
    #[error("line index {0} out of range")]
    NoSuchLine(usize),
    #[error("no general-position line found after {0} draws")]
    SamplingFailed(usize),
}

/// JSON shape of a line: the standard form is derived, never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpec {
    #[serde(with = "scalar::vec")]
    pub base: Vec<Rational>,
    #[serde(with = "scalar::vec")]
    pub direction: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    base: Vec<Rational>,
    direction: Vec<Rational>,
    standard_a: Vec<Vec<Rational>>,
    standard_b: Vec<Rational>,
}

impl Line {
    pub fn from_point_direction(
        base: Vec<Rational>,
        direction: Vec<Rational>,
    ) -> Result<Line, GeomError> {
        let d = base.len();
        if direction.len() != d {
            return Err(GeomError::DimensionMismatch(d, direction.len()));
        }
        if d < 2 {
            return Err(GeomError::DimensionTooSmall(d));
        }
        let Some(j) = direction.iter().position(|x| !x.is_zero()) else {
            return Err(GeomError::ZeroDirection);
        };
        // Basis of the orthogonal complement: e_i - (dir_i / dir_j) e_j.
        let mut aug = Vec::with_capacity(d - 1);
        for i in (0..d).filter(|&i| i != j) {
            let mut row = vec![Rational::zero(); d + 1];
            row[i] = Rational::one();
            row[j] = -(&direction[i] / &direction[j]);
            row[d] = scalar::dot(&row[..d], &base);
            aug.push(row);
        }
        let (reduced, pivots) = linalg::rref(&aug, d + 1);
        debug_assert_eq!(pivots.len(), d - 1);
        let standard_a = reduced.iter().map(|r| r[..d].to_vec()).collect();
        let standard_b = reduced.iter().map(|r| r[d].clone()).collect();
        Ok(Line { base, direction, standard_a, standard_b })
    }

    pub fn from_spec(spec: &LineSpec) -> Result<Line, GeomError> {
        Line::from_point_direction(spec.base.clone(), spec.direction.clone())
    }

    pub fn spec(&self) -> LineSpec {
        LineSpec { base: self.base.clone(), direction: self.direction.clone() }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn direction(&self) -> &[Rational] {
        &self.direction
    }

    /// Rows of `A` in the reduced standard equation `A x = b`.
    pub fn standard_a(&self) -> &[Vec<Rational>] {
        &self.standard_a
    }

    pub fn standard_b(&self) -> &[Rational] {
        &self.standard_b
    }

    pub fn point_at(&self, t: &Rational) -> Vec<Rational> {
        scalar::add_scaled(&self.base, t, &self.direction)
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        p.len() == self.dim()
            && self
                .standard_a
                .iter()
                .zip(&self.standard_b)
                .all(|(row, b)| &scalar::dot(row, p) == b)
    }

    /// Parameter of the orthogonal projection of `p` onto the line.
    pub fn project_param(&self, p: &[Rational]) -> Rational {
        let w = scalar::sub(p, &self.base);
        scalar::dot(&w, &self.direction) / scalar::norm_sq(&self.direction)
    }

    pub fn project(&self, p: &[Rational]) -> Vec<Rational> {
        self.point_at(&self.project_param(p))
    }

    /// Same point set, compared through the canonical standard form.
    pub fn same_line_as(&self, other: &Line) -> bool {
        self.standard_a == other.standard_a && self.standard_b == other.standard_b
    }

    pub fn to_f64(&self) -> FloatLine {
        FloatLine {
            base: scalar::vec_to_f64(&self.base),
            direction: scalar::vec_to_f64(&self.direction),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    Parallel,
    Perpendicular,
    Generic,
}

pub fn classify_pair(a: &Line, b: &Line) -> Result<PairClass, GeomError> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch(a.dim(), b.dim()));
    }
    let da = &a.direction;
    let db = &b.direction;
    let dot = scalar::dot(da, db);
    // Cauchy-Schwarz is tight exactly for dependent vectors.
    if &dot * &dot == scalar::norm_sq(da) * scalar::norm_sq(db) {
        Ok(PairClass::Parallel)
    } else if dot.is_zero() {
        Ok(PairClass::Perpendicular)
    } else {
        Ok(PairClass::Generic)
    }
}

/// Closest points `(x1 on a, x2 on b)` together with their parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosestPair {
    #[serde(with = "scalar::vec")]
    pub x1: Vec<Rational>,
    #[serde(with = "scalar::vec")]
    pub x2: Vec<Rational>,
    #[serde(with = "scalar::one")]
    pub t1: Rational,
    #[serde(with = "scalar::one")]
    pub t2: Rational,
}

pub fn closest_pair(a: &Line, b: &Line) -> Result<ClosestPair, GeomError> {
    if classify_pair(a, b)? == PairClass::Parallel {
        return Err(GeomError::ParallelLines);
    }
    // Minimise |w + s da - t db|^2 with w = a0 - b0:
    //   s (da.da) - t (da.db) = -da.w
    //   s (da.db) - t (db.db) = -db.w
    let da = &a.direction;
    let db = &b.direction;
    let w = scalar::sub(&a.base, &b.base);
    let aa = scalar::norm_sq(da);
    let ab = scalar::dot(da, db);
    let bb = scalar::norm_sq(db);
    let rw_a = -scalar::dot(da, &w);
    let rw_b = -scalar::dot(db, &w);
    let det = &ab * &ab - &aa * &bb;
    let s = (&ab * &rw_b - &bb * &rw_a) / &det;
    let t = (&aa * &rw_b - &ab * &rw_a) / &det;
    Ok(ClosestPair { x1: a.point_at(&s), x2: b.point_at(&t), t1: s, t2: t })
}

pub fn weakly_concurrent(a: &Line, b: &Line, c: &Line) -> Result<bool, GeomError> {
    let roles = [(a, b, c), (b, a, c), (c, a, b)];
    for (first, x, y) in roles {
        let p = closest_pair(first, x)?;
        let q = closest_pair(first, y)?;
        if p.x1 == q.x1 {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Parallel,
    Perpendicular,
    WeaklyConcurrent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub lines: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct PairInfo {
    class: PairClass,
    closest: Option<ClosestPair>,
}

/// An ordered set of lines of one ambient dimension, with cached pairwise
/// classification and closest points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSet {
    dim: usize,
    lines: Vec<Line>,
    // pair_cache[i][j] for i < j
    pair_cache: Vec<Vec<PairInfo>>,
}

impl LineSet {
    pub fn new(lines: Vec<Line>) -> Result<LineSet, GeomError> {
        let dim = lines.first().map_or(2, Line::dim);
        if let Some(l) = lines.iter().find(|l| l.dim() != dim) {
            return Err(GeomError::DimensionMismatch(dim, l.dim()));
        }
        let mut pair_cache = Vec::with_capacity(lines.len());
        for i in 0..lines.len() {
            let mut row = Vec::with_capacity(lines.len() - i);
            for j in i + 1..lines.len() {
                let class = classify_pair(&lines[i], &lines[j])?;
                let closest = match class {
                    PairClass::Parallel => None,
                    _ => Some(closest_pair(&lines[i], &lines[j])?),
                };
                row.push(PairInfo { class, closest });
            }
            pair_cache.push(row);
        }
        Ok(LineSet { dim, lines, pair_cache })
    }

    pub fn from_specs(specs: &[LineSpec]) -> Result<LineSet, GeomError> {
        LineSet::new(specs.iter().map(Line::from_spec).collect::<Result<_, _>>()?)
    }

    pub fn specs(&self) -> Vec<LineSpec> {
        self.lines.iter().map(Line::spec).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, i: usize) -> &Line {
        &self.lines[i]
    }

    fn info(&self, i: usize, j: usize) -> &PairInfo {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        &self.pair_cache[a][b - a - 1]
    }

    /// Classification of a pair; a line is parallel to itself.
    pub fn pair_class(&self, i: usize, j: usize) -> PairClass {
        if i == j {
            PairClass::Parallel
        } else {
            self.info(i, j).class
        }
    }

    pub fn parallel(&self, i: usize, j: usize) -> bool {
        self.pair_class(i, j) == PairClass::Parallel
    }

    /// Closest point on line `i` to line `j` (and its parameter on `i`).
    pub fn closest_on(&self, i: usize, j: usize) -> Option<(Vec<Rational>, Rational)> {
        if i == j {
            return None;
        }
        let cp = self.info(i, j).closest.as_ref()?;
        Some(if i < j { (cp.x1.clone(), cp.t1.clone()) } else { (cp.x2.clone(), cp.t2.clone()) })
    }

    /// The set with `other` appended (indices of `other` shift by `self.len()`).
    pub fn concat(&self, other: &LineSet) -> Result<LineSet, GeomError> {
        let mut lines = self.lines.clone();
        lines.extend(other.lines.iter().cloned());
        LineSet::new(lines)
    }

    pub fn all_parallel(&self, members: &BTreeSet<usize>) -> bool {
        let m: Vec<usize> = members.iter().copied().collect();
        m.iter().all(|&i| m.iter().all(|&j| self.parallel(i, j)))
    }

    pub fn general_position_violation(&self) -> Option<Violation> {
        self.general_position_violation_among(&(0..self.len()).collect())
    }

    pub fn general_position_violation_among(&self, members: &BTreeSet<usize>) -> Option<Violation> {
        let m: Vec<usize> = members.iter().copied().collect();
        for (x, &i) in m.iter().enumerate() {
            for &j in &m[x + 1..] {
                match self.pair_class(i, j) {
                    PairClass::Parallel => {
                        return Some(Violation { kind: ViolationKind::Parallel, lines: vec![i, j] })
                    }
                    PairClass::Perpendicular => {
                        return Some(Violation {
                            kind: ViolationKind::Perpendicular,
                            lines: vec![i, j],
                        })
                    }
                    PairClass::Generic => {}
                }
            }
        }
        for (x, &i) in m.iter().enumerate() {
            for (y, &j) in m.iter().enumerate().skip(x + 1) {
                for &k in &m[y + 1..] {
                    if self.weakly_concurrent_idx(i, j, k) {
                        return Some(Violation {
                            kind: ViolationKind::WeaklyConcurrent,
                            lines: vec![i, j, k],
                        });
                    }
                }
            }
        }
        None
    }

    fn weakly_concurrent_idx(&self, i: usize, j: usize, k: usize) -> bool {
        [(i, j, k), (j, i, k), (k, i, j)].iter().any(|&(f, a, b)| {
            match (self.closest_on(f, a), self.closest_on(f, b)) {
                (Some(p), Some(q)) => p.0 == q.0,
                _ => false,
            }
        })
    }

    pub fn is_general_position(&self) -> bool {
        self.general_position_violation().is_none()
    }

    pub fn isometry_group(&self) -> Result<IsomGroup, GeomError> {
        self.isometry_group_of(&(0..self.len()).collect())
    }

    /// Isometry group of the sub-collection `members`, with isometries
    /// referring to the original line indices.
    pub fn isometry_group_of(&self, members: &BTreeSet<usize>) -> Result<IsomGroup, GeomError> {
        if let Some(&bad) = members.iter().find(|&&i| i >= self.len()) {
            return Err(GeomError::NoSuchLine(bad));
        }
        let Some(&first) = members.iter().next() else {
            return Ok(IsomGroup::Trivial);
        };
        if self.all_parallel(members) {
            return Ok(IsomGroup::Euclidean1d { axis: self.lines[first].direction.clone() });
        }
        if self.general_position_violation_among(members).is_some() {
            return Err(GeomError::UnsupportedLineSet);
        }
        if members.len() == 2 {
            let second = *members.iter().nth(1).unwrap();
            let (x1, _) = self.closest_on(first, second).expect("non-parallel");
            let (x2, _) = self.closest_on(second, first).expect("non-parallel");
            return Ok(IsomGroup::Cyclic2 {
                generator: Isometry::HalfTurn { lines: [first, second], fixed: [x1, x2] },
            });
        }
        Ok(IsomGroup::Trivial)
    }

    pub fn to_f64(&self) -> Vec<FloatLine> {
        self.lines.iter().map(Line::to_f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Isometry {
    Identity,
    /// Rotation by pi about the common perpendicular; on each line it is
    /// the point reflection in that line's closest point.
    HalfTurn {
        lines: [usize; 2],
        #[serde(with = "fixed_points")]
        fixed: [Vec<Rational>; 2],
    },
    /// `x -> x + shift * axis`.
    Translation1d {
        #[serde(with = "scalar::vec")]
        axis: Vec<Rational>,
        #[serde(with = "scalar::one")]
        shift: Rational,
    },
    /// Reflection in the hyperplane `x . axis / |axis|^2 = center`.
    Reflection1d {
        #[serde(with = "scalar::vec")]
        axis: Vec<Rational>,
        #[serde(with = "scalar::one")]
        center: Rational,
    },
}

mod fixed_points {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>; 2], s: S) -> Result<S::Ok, S::Error> {
        scalar::vec2::serialize(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Vec<Rational>; 2], D::Error> {
        let v = scalar::vec2::deserialize(d)?;
        let [a, b]: [Vec<Rational>; 2] =
            v.try_into().map_err(|_| serde::de::Error::custom("expected two fixed points"))?;
        Ok([a, b])
    }
}

impl Isometry {
    pub fn apply(&self, ls: &LineSet, p: &[Rational], on: usize) -> Result<Vec<Rational>, GeomError> {
        apply_isometry(self, ls, p, on)
    }

    /// Image of the point with parameter `t` on line `on`, as a parameter.
    pub fn apply_param(&self, ls: &LineSet, t: &Rational, on: usize) -> Result<Rational, GeomError> {
        let line = ls.lines.get(on).ok_or(GeomError::NoSuchLine(on))?;
        let img = self.apply(ls, &line.point_at(t), on)?;
        Ok(line.project_param(&img))
    }
}

pub fn apply_isometry(
    iso: &Isometry,
    ls: &LineSet,
    p: &[Rational],
    on: usize,
) -> Result<Vec<Rational>, GeomError> {
    let line = ls.lines.get(on).ok_or(GeomError::NoSuchLine(on))?;
    if !line.contains(p) {
        return Err(GeomError::PointOffLine(on));
    }
    match iso {
        Isometry::Identity => Ok(p.to_vec()),
        Isometry::HalfTurn { lines, fixed } => {
            let k = lines.iter().position(|&l| l == on).ok_or(GeomError::LineNotInSet(on))?;
            Ok(fixed[k].iter().zip(p).map(|(x, y)| x + x - y).collect())
        }
        Isometry::Translation1d { axis, shift } => {
            if !line_parallel_to(line, axis) {
                return Err(GeomError::LineNotInSet(on));
            }
            Ok(scalar::add_scaled(p, shift, axis))
        }
        Isometry::Reflection1d { axis, center } => {
            if !line_parallel_to(line, axis) {
                return Err(GeomError::LineNotInSet(on));
            }
            let sigma = scalar::dot(p, axis) / scalar::norm_sq(axis);
            let k = (center - sigma) * Rational::from_integer(2.into());
            Ok(scalar::add_scaled(p, &k, axis))
        }
    }
}

fn line_parallel_to(line: &Line, axis: &[Rational]) -> bool {
    let d = scalar::dot(&line.direction, axis);
    &d * &d == scalar::norm_sq(&line.direction) * scalar::norm_sq(axis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsomStructure {
    Euclidean1d,
    Cyclic2,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum IsomGroup {
    Euclidean1d {
        #[serde(with = "scalar::vec")]
        axis: Vec<Rational>,
    },
    Cyclic2 { generator: Isometry },
    Trivial,
}

impl IsomGroup {
    pub fn structure(&self) -> IsomStructure {
        match self {
            IsomGroup::Euclidean1d { .. } => IsomStructure::Euclidean1d,
            IsomGroup::Cyclic2 { .. } => IsomStructure::Cyclic2,
            IsomGroup::Trivial => IsomStructure::Trivial,
        }
    }

    pub fn generator(&self) -> Option<&Isometry> {
        match self {
            IsomGroup::Cyclic2 { generator } => Some(generator),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    HalfLine,
    Parabola,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSample {
    #[serde(with = "scalar::one")]
    pub t: Rational,
    #[serde(with = "scalar::one")]
    pub x: Rational,
    #[serde(with = "scalar::one")]
    pub y: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub kind: ProfileKind,
    pub samples: Vec<ProfileSample>,
}

/// Image of `x -> (|x - p1|^2, |x - p2|^2)` over the line: a half-line when
/// both points project to the same point of `l`, a parabola otherwise.
/// Samples are taken at the parameters `t = i - (samples - 1) / 2`.
pub fn distance_profile(
    l: &Line,
    p1: &[Rational],
    p2: &[Rational],
    samples: usize,
) -> Result<DistanceProfile, GeomError> {
    let offset = Rational::new((samples as i64 - 1).max(0).into(), 2.into());
    let ts: Vec<Rational> = (0..samples).map(|i| scalar::int(i as i64) - &offset).collect();
    distance_profile_at(l, p1, p2, &ts)
}

pub fn distance_profile_at(
    l: &Line,
    p1: &[Rational],
    p2: &[Rational],
    ts: &[Rational],
) -> Result<DistanceProfile, GeomError> {
    for p in [p1, p2] {
        if p.len() != l.dim() {
            return Err(GeomError::DimensionMismatch(l.dim(), p.len()));
        }
    }
    if p1 == p2 {
        return Err(GeomError::CoincidentPoints);
    }
    let kind = if l.project_param(p1) == l.project_param(p2) {
        ProfileKind::HalfLine
    } else {
        ProfileKind::Parabola
    };
    let samples = ts
        .iter()
        .map(|t| {
            let x = l.point_at(t);
            ProfileSample {
                t: t.clone(),
                x: scalar::norm_sq(&scalar::sub(&x, p1)),
                y: scalar::norm_sq(&scalar::sub(&x, p2)),
            }
        })
        .collect();
    Ok(DistanceProfile { kind, samples })
}

/// `f64` view of a line, used by the numeric oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatLine {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

impl FloatLine {
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(b, d)| b + t * d).collect()
    }

    pub fn classify(&self, other: &FloatLine) -> PairClass {
        let dot: f64 = self.direction.iter().zip(&other.direction).map(|(a, b)| a * b).sum();
        let na: f64 = self.direction.iter().map(|a| a * a).sum();
        let nb: f64 = other.direction.iter().map(|b| b * b).sum();
        let cos = dot / (na * nb).sqrt();
        let sin_sq = ((na * nb - dot * dot) / (na * nb)).max(0.0);
        if sin_sq.sqrt() < FLOAT_ANGLE_TOL {
            PairClass::Parallel
        } else if cos.abs() < FLOAT_ANGLE_TOL {
            PairClass::Perpendicular
        } else {
            PairClass::Generic
        }
    }
}

/// Draws per added line before giving up.
pub const SAMPLER_DRAWS: usize = 1000;

fn random_int_vec<R: rand::Rng>(rng: &mut R, dim: usize, bound: i64) -> Vec<Rational> {
    (0..dim).map(|_| scalar::int(rng.gen_range(-bound..=bound))).collect()
}

/// Appends `extra` random lines with integer base in [-10, 10] and direction
/// in [-5, 5], keeping the whole set in general position.
pub fn extend_general_position<R: rand::Rng>(
    ls: &LineSet,
    extra: usize,
    rng: &mut R,
) -> Result<LineSet, GeomError> {
    let dim = ls.dim();
    let mut lines = ls.lines().to_vec();
    for _ in 0..extra {
        let mut placed = false;
        for _ in 0..SAMPLER_DRAWS {
            let dir = random_int_vec(rng, dim, 5);
            if scalar::is_zero_vec(&dir) {
                continue;
            }
            let cand = Line::from_point_direction(random_int_vec(rng, dim, 10), dir)?;
            let mut trial = lines.clone();
            trial.push(cand);
            if LineSet::new(trial.clone())?.is_general_position() {
                lines = trial;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GeomError::SamplingFailed(SAMPLER_DRAWS));
        }
    }
    LineSet::new(lines)
}

/// `k` random lines in R^dim in general position.
pub fn random_general_position<R: rand::Rng>(
    dim: usize,
    k: usize,
    rng: &mut R,
) -> Result<LineSet, GeomError> {
    if dim < 2 {
        return Err(GeomError::DimensionTooSmall(dim));
    }
    let empty = LineSet { dim, lines: Vec::new(), pair_cache: Vec::new() };
    extend_general_position(&empty, k, rng)
}

#[cfg(test)]
mod tests {
    #[test]
    fn sampler_gives_general_position() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for dim in [2, 3, 4] {
            let ls = random_general_position(dim, 5, &mut rng).unwrap();
            assert_eq!(ls.len(), 5);
            assert!(ls.is_general_position());
        }
    }

    use super::*;
    use crate::scalar::{int, ratio};
    use proptest::prelude::*;

    fn line(base: &[i64], dir: &[i64]) -> Line {
        Line::from_point_direction(
            base.iter().map(|&x| int(x)).collect(),
            dir.iter().map(|&x| int(x)).collect(),
        )
        .unwrap()
    }

    fn pt(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn standard_form_of_x_axis() {
        let l = line(&[0, 0], &[1, 0]);
        assert_eq!(l.standard_a(), &[vec![int(0), int(1)]]);
        assert_eq!(l.standard_b(), &[int(0)]);
    }

    #[test]
    fn standard_form_of_diagonal_line() {
        // Row reduction by hand: -x + y = 1  ->  x - y = -1.
        let l = line(&[0, 1], &[1, 1]);
        assert_eq!(l.standard_a(), &[vec![int(1), int(-1)]]);
        assert_eq!(l.standard_b(), &[int(-1)]);
    }

    #[test]
    fn standard_form_is_parameterisation_independent() {
        let a = line(&[1, 2, 3], &[2, -1, 4]);
        let b = Line::from_point_direction(a.point_at(&ratio(7, 3)), pt(&[-4, 2, -8])).unwrap();
        assert!(a.same_line_as(&b));
        assert_eq!(a.standard_a().len(), 2);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Line::from_point_direction(pt(&[0, 0, 0]), pt(&[0, 0, 0])),
            Err(GeomError::ZeroDirection)
        );
        assert_eq!(
            Line::from_point_direction(pt(&[0]), pt(&[1])),
            Err(GeomError::DimensionTooSmall(1))
        );
    }

    #[test]
    fn pair_classes() {
        let x = line(&[0, 0], &[1, 0]);
        assert_eq!(classify_pair(&x, &line(&[0, 1], &[1, 0])).unwrap(), PairClass::Parallel);
        assert_eq!(classify_pair(&x, &line(&[0, 0], &[0, 1])).unwrap(), PairClass::Perpendicular);
        assert_eq!(classify_pair(&x, &line(&[0, 0], &[1, 1])).unwrap(), PairClass::Generic);
        assert_eq!(
            classify_pair(&x, &line(&[0, 0, 0], &[1, 0, 0])),
            Err(GeomError::DimensionMismatch(2, 3))
        );
    }

    #[test]
    fn closest_pair_examples() {
        let x = line(&[0, 0], &[1, 0]);
        let l2 = line(&[1, 0], &[1, 1]); // x - y = 1
        let cp = closest_pair(&x, &l2).unwrap();
        assert_eq!(cp.x1, pt(&[1, 0]));
        assert_eq!(cp.x2, pt(&[1, 0]));

        let a = line(&[0, 0, 0], &[1, 0, 0]);
        let b = line(&[0, 0, 1], &[1, 1, 0]);
        let cp = closest_pair(&a, &b).unwrap();
        assert_eq!(cp.x1, pt(&[0, 0, 0]));
        assert_eq!(cp.x2, pt(&[0, 0, 1]));

        assert_eq!(closest_pair(&x, &line(&[0, 5], &[-2, 0])), Err(GeomError::ParallelLines));
    }

    #[test]
    fn closest_pair_matches_brute_grid() {
        // minimise (t - s)^2 + s^2 + 1 on a grid around the optimum
        let a = line(&[0, 0, 0], &[1, 0, 0]);
        let b = line(&[0, 0, 1], &[1, 1, 0]);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in -40..=40 {
            for j in -40..=40 {
                let (t, s) = (i as f64 * 0.05, j as f64 * 0.05);
                let f = (t - s).powi(2) + s * s + 1.0;
                if f < best.0 {
                    best = (f, t, s);
                }
            }
        }
        let cp = closest_pair(&a, &b).unwrap();
        assert!((scalar::to_f64(&cp.t1) - best.1).abs() < 1e-9);
        assert!((scalar::to_f64(&cp.t2) - best.2).abs() < 1e-9);
    }

    #[test]
    fn weak_concurrency_examples() {
        // three lines through (1, 0)
        let a = line(&[1, 0], &[1, 0]);
        let b = line(&[1, 0], &[1, 1]);
        let c = line(&[1, 0], &[1, 3]);
        assert!(weakly_concurrent(&a, &b, &c).unwrap());

        // x-axis, x - y = 1, x + 2y = -1 meet the axis at (1,0) and (-1,0)
        let x = line(&[0, 0], &[1, 0]);
        let l2 = line(&[1, 0], &[1, 1]);
        let l3 = line(&[-1, 0], &[2, -1]);
        assert!(!weakly_concurrent(&x, &l2, &l3).unwrap());
    }

    #[test]
    fn weak_concurrency_in_three_dimensions_uses_closest_points() {
        // Both b and c have their closest point on `a` at the origin, but the
        // three lines do not share a point.
        let a = line(&[0, 0, 0], &[1, 0, 0]);
        let b = line(&[0, 0, 1], &[1, 1, 0]);
        let c = line(&[0, 0, -2], &[1, -2, 0]);
        assert!(weakly_concurrent(&a, &b, &c).unwrap());
        let ls = LineSet::new(vec![a, b, c]).unwrap();
        assert_eq!(ls.general_position_violation().unwrap().kind, ViolationKind::WeaklyConcurrent);
    }

    #[test]
    fn general_position_examples() {
        let x = line(&[0, 0], &[1, 0]);
        assert!(LineSet::new(vec![x.clone()]).unwrap().is_general_position());
        let xy = LineSet::new(vec![x.clone(), line(&[0, 0], &[0, 1])]).unwrap();
        assert_eq!(
            xy.general_position_violation(),
            Some(Violation { kind: ViolationKind::Perpendicular, lines: vec![0, 1] })
        );
        let conc = LineSet::new(vec![
            line(&[2, 1], &[1, 2]),
            line(&[2, 1], &[3, 1]),
            line(&[2, 1], &[-1, 4]),
        ])
        .unwrap();
        assert_eq!(conc.general_position_violation().unwrap().kind, ViolationKind::WeaklyConcurrent);
    }

    #[test]
    fn isometry_groups_by_size() {
        let l0 = line(&[0, 0, 0], &[1, 0, 0]);
        let l1 = line(&[0, 0, 1], &[1, 2, 0]);
        let l2 = line(&[3, 1, -1], &[1, 1, 1]);
        let one = LineSet::new(vec![l0.clone()]).unwrap();
        assert_eq!(one.isometry_group().unwrap().structure(), IsomStructure::Euclidean1d);
        let two = LineSet::new(vec![l0.clone(), l1.clone()]).unwrap();
        let g = two.isometry_group().unwrap();
        assert_eq!(g.structure(), IsomStructure::Cyclic2);
        let gen = g.generator().unwrap();
        for i in 0..2 {
            let (x, _) = two.closest_on(i, 1 - i).unwrap();
            assert_eq!(gen.apply(&two, &x, i).unwrap(), x);
        }
        let three = LineSet::new(vec![l0, l1, l2]).unwrap();
        assert!(three.is_general_position());
        assert_eq!(three.isometry_group().unwrap(), IsomGroup::Trivial);
    }

    #[test]
    fn mixed_regime_is_unsupported() {
        let ls = LineSet::new(vec![
            line(&[0, 0], &[1, 0]),
            line(&[0, 1], &[1, 0]),
            line(&[0, 0], &[1, 1]),
        ])
        .unwrap();
        assert_eq!(ls.isometry_group(), Err(GeomError::UnsupportedLineSet));
    }

    #[test]
    fn apply_isometry_rejects_points_off_the_line() {
        let ls = LineSet::new(vec![line(&[0, 0], &[1, 0])]).unwrap();
        assert_eq!(
            apply_isometry(&Isometry::Identity, &ls, &pt(&[0, 1]), 0),
            Err(GeomError::PointOffLine(0))
        );
        assert_eq!(apply_isometry(&Isometry::Identity, &ls, &pt(&[5, 0]), 0).unwrap(), pt(&[5, 0]));
    }

    #[test]
    fn one_dimensional_isometries_act_on_parallel_lines() {
        let ls = LineSet::new(vec![line(&[0, 0], &[1, 1]), line(&[0, 3], &[-2, -2])]).unwrap();
        let axis = pt(&[1, 1]);
        let tr = Isometry::Translation1d { axis: axis.clone(), shift: ratio(1, 2) };
        let rf = Isometry::Reflection1d { axis, center: int(1) };
        let pts = [(ls.line(0).point_at(&int(3)), 0), (ls.line(1).point_at(&ratio(-1, 3)), 1)];
        for iso in [tr, rf] {
            let imgs: Vec<_> = pts.iter().map(|(p, on)| iso.apply(&ls, p, *on).unwrap()).collect();
            for (img, (_, on)) in imgs.iter().zip(&pts) {
                assert!(ls.line(*on).contains(img));
            }
            let before = scalar::norm_sq(&scalar::sub(&pts[0].0, &pts[1].0));
            let after = scalar::norm_sq(&scalar::sub(&imgs[0], &imgs[1]));
            assert_eq!(before, after);
        }
    }

    #[test]
    fn distance_profile_worked_examples() {
        let l = line(&[0, 0], &[1, 0]);
        let ts: Vec<Rational> = [-3, -1, 0, 1, 2].iter().map(|&t| ratio(t, 2)).collect();
        let hl = distance_profile_at(&l, &pt(&[0, 1]), &pt(&[0, -1]), &ts).unwrap();
        assert_eq!(hl.kind, ProfileKind::HalfLine);
        for s in &hl.samples {
            let v = &s.t * &s.t + int(1);
            assert_eq!((s.x.clone(), s.y.clone()), (v.clone(), v));
        }
        let pb = distance_profile_at(&l, &pt(&[0, 1]), &pt(&[1, 0]), &ts).unwrap();
        assert_eq!(pb.kind, ProfileKind::Parabola);
        for s in &pb.samples {
            assert_eq!(s.x, &s.t * &s.t + int(1));
            assert_eq!(s.y, &s.t * &s.t + int(1) - int(2) * &s.t);
        }
        assert_eq!(
            distance_profile(&l, &pt(&[1, 1]), &pt(&[1, 1]), 3),
            Err(GeomError::CoincidentPoints)
        );
    }

    fn arb_line(d: usize) -> impl Strategy<Value = Line> {
        (prop::collection::vec(-6i64..7, d), prop::collection::vec(-4i64..5, d))
            .prop_filter("nonzero direction", |(_, v)| v.iter().any(|&x| x != 0))
            .prop_map(|(b, v)| line(&b, &v))
    }

    proptest! {
        #[test]
        fn closest_pair_is_a_strict_minimiser(
            a in arb_line(3), b in arb_line(3),
            perturb in prop::collection::vec((-50i64..51, -50i64..51), 100),
        ) {
            prop_assume!(classify_pair(&a, &b).unwrap() != PairClass::Parallel);
            let cp = closest_pair(&a, &b).unwrap();
            prop_assert!(a.contains(&cp.x1) && b.contains(&cp.x2));
            let best = scalar::norm_sq(&scalar::sub(&cp.x1, &cp.x2));
            for (ds, dt) in perturb {
                prop_assume!(ds != 0 || dt != 0);
                let y1 = a.point_at(&(&cp.t1 + ratio(ds, 10)));
                let y2 = b.point_at(&(&cp.t2 + ratio(dt, 10)));
                prop_assert!(scalar::norm_sq(&scalar::sub(&y1, &y2)) > best);
            }
        }

        #[test]
        fn half_turn_is_an_isometric_involution(
            a in arb_line(3), b in arb_line(3),
            ts in prop::collection::vec((-30i64..31, 0usize..2), 100),
        ) {
            let ls = LineSet::new(vec![a, b]).unwrap();
            prop_assume!(ls.is_general_position());
            let g = ls.isometry_group().unwrap();
            let gen = g.generator().unwrap().clone();
            let pts: Vec<_> = ts.iter().map(|&(t, on)| (ls.line(on).point_at(&ratio(t, 7)), on)).collect();
            let imgs: Vec<_> = pts.iter().map(|(p, on)| gen.apply(&ls, p, *on).unwrap()).collect();
            for ((p, on), img) in pts.iter().zip(&imgs) {
                prop_assert_eq!(&gen.apply(&ls, img, *on).unwrap(), p);
            }
            for i in 0..pts.len().min(20) {
                for j in i + 1..pts.len().min(20) {
                    let before = scalar::norm_sq(&scalar::sub(&pts[i].0, &pts[j].0));
                    let after = scalar::norm_sq(&scalar::sub(&imgs[i], &imgs[j]));
                    prop_assert_eq!(before, after);
                }
            }
        }

        #[test]
        fn profile_kind_matches_projection_test(
            l in arb_line(3),
            p1 in prop::collection::vec(-5i64..6, 3),
            p2 in prop::collection::vec(-5i64..6, 3),
        ) {
            prop_assume!(p1 != p2);
            let (p1, p2) = (pt(&p1), pt(&p2));
            let prof = distance_profile(&l, &p1, &p2, 4).unwrap();
            let same = l.project(&p1) == l.project(&p2);
            prop_assert_eq!(prof.kind == ProfileKind::HalfLine, same);
        }

        #[test]
        fn general_position_is_permutation_invariant(
            lines in prop::collection::vec(arb_line(2), 1..5),
            rot in 0usize..5,
        ) {
            let ls = LineSet::new(lines.clone()).unwrap();
            let mut permuted = lines.clone();
            permuted.reverse();
            let r = rot % permuted.len();
            permuted.rotate_left(r);
            let ps = LineSet::new(permuted).unwrap();
            prop_assert_eq!(ls.is_general_position(), ps.is_general_position());
        }

        #[test]
        fn float_classification_agrees_with_exact(a in arb_line(3), b in arb_line(3)) {
            prop_assert_eq!(a.to_f64().classify(&b.to_f64()), classify_pair(&a, &b).unwrap());
        }
    }
}

//! Finite Stone duality and the limit of a system of finite discrete spaces.
//!
//! The dual of a finite algebra is the discrete space of its atoms, and a
//! complete embedding is dual to a surjection. Threads are coherent choices
//! of one point per index; partial threads live on closed subsets.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::amal::LimitAlgebra;
use crate::balg::{AtomMap, FiniteBA};
use crate::diagram::{validate_system, BASystem, DiagramError, SystemReport};
use crate::order::{closure, AlmostLattice, ClosedSet, Tops};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThreadError {
    #[error("no common lift at {at} for {constraints}")]
    NoLift { at: String, constraints: String },
    #[error("extension is not coherent: {0}")]
    Incoherent(String),
    #[error("partial thread is not coherent: {0}")]
    NotCoherent(String),
    #[error("{0}")]
    Shape(String),
    #[error("product of the spaces has {needed} points, budget is {limit}")]
    Budget { needed: u128, limit: u128 },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A finite discrete space; points stand for the atoms (principal
/// ultrafilters) of the dual algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteSpace {
    points: Vec<String>,
}

impl DiscreteSpace {
    pub fn new(points: Vec<String>) -> Result<Self, ThreadError> {
        if points.is_empty() {
            return Err(ThreadError::Shape(
                "a space needs at least one point".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point(&self, x: usize) -> &str {
        &self.points[x]
    }

    /// The dual algebra: subsets of points.
    pub fn algebra(&self) -> FiniteBA {
        FiniteBA::new(self.points.iter().cloned()).expect("distinct non-empty point ids")
    }
}

/// Continuous surjection between finite discrete spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceMap {
    map: Vec<usize>,
    target_len: usize,
}

impl SpaceMap {
    pub fn from_atom_map(m: &AtomMap) -> Self {
        Self {
            map: m.as_slice().to_vec(),
            target_len: m.target().len(),
        }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_len];
        self.map.iter().for_each(|&y| hit[y] = true);
        hit.into_iter().all(|h| h)
    }

    pub fn image(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().map(|&x| self.map[x]).collect()
    }

    pub fn preimage(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.map.len())
            .filter(|x| set.contains(&self.map[*x]))
            .collect()
    }
}

/// Spaces over an almost-lattice with a surjection `p^j_i` for every `i <= j`.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    index: AlmostLattice,
    spaces: Vec<DiscreteSpace>,
    maps: BTreeMap<(usize, usize), SpaceMap>,
}

/// Points are atoms and the maps are the atom surjections themselves.
pub fn dualize(s: &BASystem) -> DiscreteSystem {
    DiscreteSystem {
        index: s.index().clone(),
        spaces: s
            .algebras()
            .iter()
            .map(|a| DiscreteSpace {
                points: a.atoms().to_vec(),
            })
            .collect(),
        maps: s
            .maps()
            .iter()
            .map(|(&k, m)| (k, SpaceMap::from_atom_map(m)))
            .collect(),
    }
}

impl DiscreteSystem {
    /// The predual system of point-set algebras.
    pub fn to_algebras(&self) -> BASystem {
        let algebras: Vec<FiniteBA> = self.spaces.iter().map(DiscreteSpace::algebra).collect();
        let maps = self
            .maps
            .iter()
            .map(|(&(lo, hi), m)| {
                (
                    (lo, hi),
                    AtomMap::from_fn(algebras[hi].clone(), algebras[lo].clone(), m.map.clone()),
                )
            })
            .collect();
        BASystem::new(self.index.clone(), algebras, maps).expect("shapes mirror the dual system")
    }

    pub fn from_algebras(s: &BASystem) -> Self {
        dualize(s)
    }

    pub fn index(&self) -> &AlmostLattice {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn space(&self, i: usize) -> &DiscreteSpace {
        &self.spaces[i]
    }

    /// `p^upper_lower`.
    pub fn proj(&self, lower: usize, upper: usize) -> &SpaceMap {
        &self.maps[&(lower, upper)]
    }

    #[inline]
    fn p(&self, lower: usize, upper: usize, x: usize) -> usize {
        self.maps[&(lower, upper)].apply(x)
    }

    pub fn product_size(&self) -> u128 {
        self.spaces.iter().map(|s| s.len() as u128).product()
    }

    /// Points of `X_k` projecting onto every `(index, point)` constraint,
    /// in increasing order.
    pub fn lifts(&self, k: usize, constraints: &[(usize, usize)]) -> Vec<usize> {
        (0..self.spaces[k].len())
            .filter(|&z| constraints.iter().all(|&(i, x)| self.p(i, k, z) == x))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologicalCorrectness {
    pub left: String,
    pub right: String,
    pub pairs_checked: usize,
    /// First `(x_i, x_j)` agreeing at the meet with no common lift.
    pub missing_lift: Option<(String, String)>,
}

impl TopologicalCorrectness {
    pub fn holds(&self) -> bool {
        self.missing_lift.is_none()
    }
}

/// Every pair of points agreeing at `i ∧ j` has a common lift to `i ∨ j`.
pub fn check_topological_correctness(
    ds: &DiscreteSystem,
    i: usize,
    j: usize,
) -> Result<TopologicalCorrectness, ThreadError> {
    let l = &ds.index;
    let top = l
        .join(i, j)
        .ok_or_else(|| ThreadError::Shape(format!("{} ∨ {} is undefined", l.id(i), l.id(j))))?;
    let m = l.meet(i, j);
    let mut lifted = BTreeSet::new();
    for z in 0..ds.spaces[top].len() {
        lifted.insert((ds.p(i, top, z), ds.p(j, top, z)));
    }
    let mut pairs_checked = 0;
    let mut missing_lift = None;
    'outer: for xi in 0..ds.spaces[i].len() {
        for xj in 0..ds.spaces[j].len() {
            if ds.p(m, i, xi) != ds.p(m, j, xj) {
                continue;
            }
            pairs_checked += 1;
            if !lifted.contains(&(xi, xj)) {
                missing_lift = Some((
                    ds.spaces[i].point(xi).to_string(),
                    ds.spaces[j].point(xj).to_string(),
                ));
                break 'outer;
            }
        }
    }
    Ok(TopologicalCorrectness {
        left: l.id(i).to_string(),
        right: l.id(j).to_string(),
        pairs_checked,
        missing_lift,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteReport {
    /// Identity, surjectivity and commutativity of the maps.
    pub structure: SystemReport,
    pub squares: Vec<TopologicalCorrectness>,
}

impl DiscreteReport {
    pub fn is_valid(&self) -> bool {
        self.structure
            .violations
            .iter()
            .all(|v| matches!(v, crate::diagram::SystemViolation::IncorrectSquare { .. }))
            && self.squares.iter().all(TopologicalCorrectness::holds)
    }
}

/// Structural checks through the predual system, correctness through lifts.
pub fn validate_discrete(ds: &DiscreteSystem) -> DiscreteReport {
    let structure = validate_system(&ds.to_algebras());
    let structural_ok = structure
        .violations
        .iter()
        .all(|v| matches!(v, crate::diagram::SystemViolation::IncorrectSquare { .. }));
    let squares = if structural_ok {
        ds.index
            .join_squares()
            .into_iter()
            .map(|(i, j)| check_topological_correctness(ds, i, j).expect("join exists"))
            .collect()
    } else {
        Vec::new()
    };
    DiscreteReport { structure, squares }
}

/// A coherent assignment of points on a closed set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialThread {
    values: BTreeMap<usize, usize>,
}

impl PartialThread {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn singleton(i: usize, x: usize) -> Self {
        Self {
            values: BTreeMap::from([(i, x)]),
        }
    }

    /// Checks that the domain is closed and the values coherent.
    pub fn new(ds: &DiscreteSystem, values: BTreeMap<usize, usize>) -> Result<Self, ThreadError> {
        ClosedSet::new(&ds.index, values.keys().copied().collect())
            .map_err(|e| ThreadError::Shape(e.to_string()))?;
        let y = Self { values };
        if let Some(msg) = incoherence(ds, &y.values) {
            return Err(ThreadError::NotCoherent(msg));
        }
        Ok(y)
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.values.keys().copied().collect()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.values.get(&i).copied()
    }

    pub fn values(&self) -> &BTreeMap<usize, usize> {
        &self.values
    }

    /// Values in index order, when the domain is all of `I`.
    pub fn to_thread(&self, n: usize) -> Option<Vec<usize>> {
        (0..n).map(|i| self.get(i)).collect()
    }
}

fn incoherence(ds: &DiscreteSystem, values: &BTreeMap<usize, usize>) -> Option<String> {
    for (&k, &xk) in values {
        for (&j, &xj) in values {
            if k != j && ds.index.leq(k, j) && ds.p(k, j, xj) != xk {
                return Some(format!(
                    "p({} -> {}) of {} is not {}",
                    ds.index.id(j),
                    ds.index.id(k),
                    ds.spaces[j].point(xj),
                    ds.spaces[k].point(xk)
                ));
            }
        }
    }
    None
}

/// Lifts tried at each step: the least one, or all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    Least,
    All,
}

impl DiscreteSystem {
    fn lift_or_fail(
        &self,
        k: usize,
        constraints: &[(usize, usize)],
        choice: Choice,
    ) -> Result<Vec<usize>, ThreadError> {
        let mut zs = self.lifts(k, constraints);
        if zs.is_empty() {
            let constraints = constraints
                .iter()
                .map(|&(i, x)| format!("{}={}", self.index.id(i), self.spaces[i].point(x)))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(ThreadError::NoLift {
                at: self.index.id(k).to_string(),
                constraints,
            });
        }
        if choice == Choice::Least {
            zs.truncate(1);
        }
        Ok(zs)
    }

    /// Fills the closed set `g` by projecting from the assigned values, then
    /// checks that the result is coherent and keeps every assigned value.
    fn project_onto(
        &self,
        g: &ClosedSet,
        assigned: &BTreeMap<usize, usize>,
    ) -> Result<PartialThread, ThreadError> {
        let mut values = BTreeMap::new();
        for &k in g.members() {
            let source = assigned
                .iter()
                .find(|(&t, _)| self.index.leq(k, t))
                .ok_or_else(|| {
                    ThreadError::Shape(format!("{} lies below no assigned index", self.index.id(k)))
                })?;
            values.insert(k, self.p(k, *source.0, *source.1));
        }
        for (&k, &x) in assigned {
            if values.get(&k) != Some(&x) {
                return Err(ThreadError::Incoherent(format!(
                    "value at {} changed by projection",
                    self.index.id(k)
                )));
            }
        }
        if let Some(msg) = incoherence(self, &values) {
            return Err(ThreadError::Incoherent(msg));
        }
        Ok(PartialThread { values })
    }

    fn extend(
        &self,
        y: &PartialThread,
        j: usize,
        choice: Choice,
    ) -> Result<Vec<PartialThread>, ThreadError> {
        let l = &self.index;
        if y.values.contains_key(&j) {
            return Ok(vec![y.clone()]);
        }
        let domain = y.domain();
        let g = closure(l, domain.iter().copied().chain([j]));
        let mut out = Vec::new();
        if domain.is_empty() {
            for z in self.lift_or_fail(j, &[], choice)? {
                out.push(self.project_onto(&g, &BTreeMap::from([(j, z)]))?);
            }
            return Ok(out);
        }
        let f = ClosedSet::new(l, domain).map_err(|e| ThreadError::Shape(e.to_string()))?;
        let x = |k: usize| y.values[&k];
        // the assigned values of y stay fixed; every new value is checked by
        // project_onto against them
        let keep = |extra: &[(usize, usize)]| -> BTreeMap<usize, usize> {
            let mut m = y.values.clone();
            m.extend(extra.iter().copied());
            m
        };
        match f.tops().expect("non-empty") {
            Tops::Single(j0) => match l.join(j0, j) {
                Some(k) => {
                    for z in self.lift_or_fail(k, &[(j0, x(j0))], choice)? {
                        out.push(self.project_onto(&g, &keep(&[(k, z)]))?);
                    }
                }
                None => {
                    let tops = g.tops().expect("non-empty").as_vec();
                    let jp = *tops
                        .iter()
                        .find(|&&t| t != j0 && l.leq(j, t))
                        .ok_or_else(|| {
                            ThreadError::Shape("no second top above the new index".into())
                        })?;
                    let m = l.meet(j0, jp);
                    for z in self.lift_or_fail(jp, &[(m, self.p(m, j0, x(j0)))], choice)? {
                        out.push(self.project_onto(&g, &keep(&[(jp, z)]))?);
                    }
                }
            },
            Tops::Pair(a, b) => match (l.join(a, j), l.join(b, j)) {
                (None, None) => {
                    return Err(ThreadError::Shape(format!(
                        "no two of {}, {}, {} are bounded",
                        l.id(a),
                        l.id(b),
                        l.id(j)
                    )))
                }
                (Some(_), None) | (None, Some(_)) => {
                    let (j0, j1) = if l.join(a, j).is_some() {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    let k = l.join(j0, j).expect("checked");
                    let u = l.meet(k, j1);
                    let yu = self.p(u, j1, x(j1));
                    if l.join(j0, u) != Some(k) {
                        return Err(ThreadError::Shape(format!(
                            "{} ∨ {} is not {}",
                            l.id(j0),
                            l.id(u),
                            l.id(k)
                        )));
                    }
                    for z in self.lift_or_fail(k, &[(j0, x(j0)), (u, yu)], choice)? {
                        out.push(self.project_onto(&g, &keep(&[(u, yu), (k, z)]))?);
                    }
                }
                (Some(k0), Some(k1)) => {
                    let (m0, m1) = (l.meet(a, j), l.meet(b, j));
                    let (y0, y1) = (self.p(m0, a, x(a)), self.p(m1, b, x(b)));
                    if l.join(m0, m1) != Some(j) {
                        return Err(ThreadError::Shape(format!(
                            "{} ∨ {} is not {}",
                            l.id(m0),
                            l.id(m1),
                            l.id(j)
                        )));
                    }
                    for yj in self.lift_or_fail(j, &[(m0, y0), (m1, y1)], choice)? {
                        for z0 in self.lift_or_fail(k0, &[(a, x(a)), (j, yj)], choice)? {
                            for z1 in self.lift_or_fail(k1, &[(b, x(b)), (j, yj)], choice)? {
                                let assigned =
                                    keep(&[(m0, y0), (m1, y1), (j, yj), (k0, z0), (k1, z1)]);
                                out.push(self.project_onto(&g, &assigned)?);
                            }
                        }
                    }
                }
            },
        }
        Ok(out)
    }
}

/// One step of the extension along the case analysis on the tops of the
/// domain, choosing the least lift whenever several exist. The result lives
/// on the closure of the domain and `j`.
pub fn extend_partial_thread(
    ds: &DiscreteSystem,
    y: &PartialThread,
    j: usize,
) -> Result<PartialThread, ThreadError> {
    Ok(ds.extend(y, j, Choice::Least)?.remove(0))
}

/// As [`extend_partial_thread`], branching over every available lift.
pub fn extend_partial_thread_all(
    ds: &DiscreteSystem,
    y: &PartialThread,
    j: usize,
) -> Result<Vec<PartialThread>, ThreadError> {
    ds.extend(y, j, Choice::All)
}

/// Extends `y` to a full thread, adding indices in increasing order.
pub fn extend_to_thread(ds: &DiscreteSystem, y: &PartialThread) -> Result<Vec<usize>, ThreadError> {
    let mut y = y.clone();
    for j in 0..ds.len() {
        y = extend_partial_thread(ds, &y, j)?;
    }
    Ok(y.to_thread(ds.len()).expect("total"))
}

fn check_budget(ds: &DiscreteSystem, budget: u128) -> Result<(), ThreadError> {
    let needed = ds.product_size();
    if needed > budget {
        return Err(ThreadError::Budget {
            needed,
            limit: budget,
        });
    }
    Ok(())
}

/// All coherent elements of the full product, in lexicographic order.
pub fn threads_by_filtration(
    ds: &DiscreteSystem,
    budget: u128,
) -> Result<Vec<Vec<usize>>, ThreadError> {
    check_budget(ds, budget)?;
    let n = ds.len();
    let pairs: Vec<(usize, usize)> = ds
        .index
        .poset()
        .comparable_pairs()
        .filter(|&(a, b)| a != b)
        .collect();
    let mut out = Vec::new();
    let mut x = vec![0usize; n];
    loop {
        if pairs.iter().all(|&(lo, hi)| ds.p(lo, hi, x[hi]) == x[lo]) {
            out.push(x.clone());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            x[k] += 1;
            if x[k] < ds.spaces[k].len() {
                break;
            }
            x[k] = 0;
        }
    }
}

/// All threads reached by extending every singleton partial thread through
/// every available lift, sorted.
pub fn threads_constructive(
    ds: &DiscreteSystem,
    budget: u128,
) -> Result<Vec<Vec<usize>>, ThreadError> {
    check_budget(ds, budget)?;
    let n = ds.len();
    let mut found = BTreeSet::new();
    for i in 0..n {
        let mut level: BTreeSet<PartialThread> = (0..ds.spaces[i].len())
            .map(|x| PartialThread::singleton(i, x))
            .collect();
        for j in 0..n {
            let mut next = BTreeSet::new();
            for y in &level {
                next.extend(extend_partial_thread_all(ds, y, j)?);
            }
            level = next;
        }
        found.extend(level.into_iter().map(|y| y.to_thread(n).expect("total")));
    }
    Ok(found.into_iter().collect())
}

/// The limit space with its projections `p^ℓ_i(x) = x(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadSpace {
    pub threads: Vec<Vec<usize>>,
}

impl ThreadSpace {
    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn projection(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.threads.iter().map(move |t| t[i])
    }

    pub fn position(&self, thread: &[usize]) -> Option<usize> {
        self.threads
            .binary_search_by(|t| t.as_slice().cmp(thread))
            .ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThreadSpaceReport {
    pub threads: usize,
    /// Constructive enumeration equals the filtration of the product.
    pub constructive_matches: bool,
    pub first_difference: Option<Vec<String>>,
    /// Per index, whether `p^ℓ_i` is onto.
    pub surjective: BTreeMap<String, bool>,
    pub commutative: bool,
    /// For all `i, j` and points agreeing at `i ∧ j`, some thread passes
    /// through both.
    pub correct: bool,
    pub correctness_failure: Option<(String, String)>,
}

impl ThreadSpaceReport {
    pub fn holds(&self) -> bool {
        self.constructive_matches
            && self.surjective.values().all(|&b| b)
            && self.commutative
            && self.correct
    }
}

/// Computes the limit both ways and checks the limit projections.
pub fn thread_space(
    ds: &DiscreteSystem,
    budget: u128,
) -> Result<(ThreadSpace, ThreadSpaceReport), ThreadError> {
    let by_filtration = threads_by_filtration(ds, budget)?;
    let constructive = threads_constructive(ds, budget)?;
    let first_difference = by_filtration
        .iter()
        .zip(&constructive)
        .find(|(a, b)| a != b)
        .map(|(a, _)| a)
        .or_else(|| {
            let k = by_filtration.len().min(constructive.len());
            by_filtration.get(k).or(constructive.get(k))
        })
        .map(|t| thread_ids(ds, t));
    let space = ThreadSpace {
        threads: by_filtration,
    };
    let report =
        limit_projection_report(ds, &space, constructive == space.threads, first_difference);
    Ok((space, report))
}

fn thread_ids(ds: &DiscreteSystem, t: &[usize]) -> Vec<String> {
    t.iter()
        .enumerate()
        .map(|(i, &x)| format!("{}={}", ds.index.id(i), ds.spaces[i].point(x)))
        .collect()
}

fn limit_projection_report(
    ds: &DiscreteSystem,
    space: &ThreadSpace,
    constructive_matches: bool,
    first_difference: Option<Vec<String>>,
) -> ThreadSpaceReport {
    let n = ds.len();
    let l = &ds.index;
    let surjective = (0..n)
        .map(|i| {
            let hit: BTreeSet<usize> = space.projection(i).collect();
            (l.id(i).to_string(), hit.len() == ds.spaces[i].len())
        })
        .collect();
    let commutative = space.threads.iter().all(|t| {
        l.poset()
            .comparable_pairs()
            .all(|(lo, hi)| ds.p(lo, hi, t[hi]) == t[lo])
    });
    let mut correctness_failure = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            let m = l.meet(i, j);
            let through: BTreeSet<(usize, usize)> =
                space.threads.iter().map(|t| (t[i], t[j])).collect();
            for xi in 0..ds.spaces[i].len() {
                for xj in 0..ds.spaces[j].len() {
                    if ds.p(m, i, xi) == ds.p(m, j, xj) && !through.contains(&(xi, xj)) {
                        correctness_failure = Some((
                            format!("{}={}", l.id(i), ds.spaces[i].point(xi)),
                            format!("{}={}", l.id(j), ds.spaces[j].point(xj)),
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }
    ThreadSpaceReport {
        threads: space.len(),
        constructive_matches,
        first_difference,
        surjective,
        commutative,
        correct: correctness_failure.is_none(),
        correctness_failure,
    }
}

/// The sets `V_i` for a closed `F` and boxes `U_i ⊆ X_i`, `i ∈ F`.
pub fn box_image(
    ds: &DiscreteSystem,
    f: &ClosedSet,
    boxes: &BTreeMap<usize, BTreeSet<usize>>,
) -> Result<BTreeMap<usize, BTreeSet<usize>>, ThreadError> {
    let l = &ds.index;
    if f.members().iter().any(|k| !boxes.contains_key(k)) || boxes.keys().any(|k| !f.contains(*k)) {
        return Err(ThreadError::Shape(
            "boxes must be given exactly on the closed set".into(),
        ));
    }
    // V'_t: points of X_t whose projections land in every box below t
    let restricted = |t: usize| -> BTreeSet<usize> {
        (0..ds.spaces[t].len())
            .filter(|&z| {
                f.members()
                    .iter()
                    .filter(|&&i| l.leq(i, t))
                    .all(|&i| boxes[&i].contains(&ds.p(i, t, z)))
            })
            .collect()
    };
    let mut v = BTreeMap::new();
    match f.tops() {
        None => return Err(ThreadError::Shape("closed set is empty".into())),
        Some(Tops::Single(i0)) => {
            let top = restricted(i0);
            for &i in f.members() {
                v.insert(i, ds.proj(i, i0).image(&top));
            }
        }
        Some(Tops::Pair(i0, i1)) => {
            let (w0, w1) = (restricted(i0), restricted(i1));
            let m = l.meet(i0, i1);
            let vm: BTreeSet<usize> = ds
                .proj(m, i0)
                .image(&w0)
                .intersection(&ds.proj(m, i1).image(&w1))
                .copied()
                .collect();
            let v0: BTreeSet<usize> = w0
                .intersection(&ds.proj(m, i0).preimage(&vm))
                .copied()
                .collect();
            let v1: BTreeSet<usize> = w1
                .intersection(&ds.proj(m, i1).preimage(&vm))
                .copied()
                .collect();
            for &i in f.members() {
                let from0 = l.leq(i, i0).then(|| ds.proj(i, i0).image(&v0));
                let from1 = l.leq(i, i1).then(|| ds.proj(i, i1).image(&v1));
                let vi = match (from0, from1) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(ThreadError::Incoherent(format!(
                            "V at {} differs through the two tops",
                            l.id(i)
                        )))
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!("every member lies below a top"),
                };
                v.insert(i, vi);
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCheck {
    /// `V_i = p^j_i(V_j)` for `i <= j` in `F`.
    pub images_cohere: bool,
    /// `A = X_ℓ ∩ ∏ V_i`.
    pub same_set: bool,
    /// `p^ℓ_i(A) = V_i` for `i ∈ F`.
    pub image_identity: bool,
    pub members_of_a: usize,
}

impl BoxCheck {
    pub fn holds(&self) -> bool {
        self.images_cohere && self.same_set && self.image_identity
    }
}

/// Compares the recipe against brute-force images over the threads.
pub fn check_box_image(
    ds: &DiscreteSystem,
    space: &ThreadSpace,
    f: &ClosedSet,
    boxes: &BTreeMap<usize, BTreeSet<usize>>,
    v: &BTreeMap<usize, BTreeSet<usize>>,
) -> BoxCheck {
    let l = &ds.index;
    let images_cohere = f.members().iter().all(|&i| {
        f.members()
            .iter()
            .filter(|&&j| l.leq(i, j))
            .all(|&j| ds.proj(i, j).image(&v[&j]) == v[&i])
    });
    let in_boxes = |t: &Vec<usize>, sets: &BTreeMap<usize, BTreeSet<usize>>| {
        f.members().iter().all(|&i| sets[&i].contains(&t[i]))
    };
    let a: Vec<&Vec<usize>> = space
        .threads
        .iter()
        .filter(|t| in_boxes(t, boxes))
        .collect();
    let a_v: Vec<&Vec<usize>> = space.threads.iter().filter(|t| in_boxes(t, v)).collect();
    let image_identity = f.members().iter().all(|&i| {
        let img: BTreeSet<usize> = a.iter().map(|t| t[i]).collect();
        img == v[&i]
    });
    BoxCheck {
        images_cohere,
        same_set: a == a_v,
        image_identity,
        members_of_a: a.len(),
    }
}

/// A random closed set (closure of up to three indices) with random boxes.
pub fn random_box<R: Rng>(
    rng: &mut R,
    ds: &DiscreteSystem,
) -> (ClosedSet, BTreeMap<usize, BTreeSet<usize>>) {
    let n = ds.len();
    let k = rng.gen_range(1..=3.min(n));
    let seed: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    let f = closure(&ds.index, seed);
    let density: f64 = rng.gen_range(0.4..0.95);
    let boxes = f
        .members()
        .iter()
        .map(|&i| {
            (
                i,
                (0..ds.spaces[i].len())
                    .filter(|_| rng.gen_bool(density))
                    .collect(),
            )
        })
        .collect();
    (f, boxes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BridgeReport {
    pub atoms: usize,
    pub threads: usize,
    /// Each atom determines a coherent thread.
    pub well_defined: bool,
    pub injective: bool,
    pub onto: bool,
    pub witness: Option<String>,
}

impl BridgeReport {
    pub fn bijective(&self) -> bool {
        self.well_defined && self.injective && self.onto
    }
}

/// Sends each atom of the limit algebra to the thread of atoms above it.
pub fn duality_bridge(lm: &LimitAlgebra, ds: &DiscreteSystem, space: &ThreadSpace) -> BridgeReport {
    let n = ds.len();
    let atoms = lm.algebra.len();
    let mut hit = vec![false; space.len()];
    let mut well_defined = true;
    let mut injective = true;
    let mut witness = None;
    for t in 0..atoms {
        let thread: Vec<usize> = (0..n).map(|i| lm.limit[i].apply(t)).collect();
        match space.position(&thread) {
            None => {
                well_defined = false;
                witness.get_or_insert_with(|| {
                    format!("atom {} gives an incoherent thread", lm.algebra.atom_id(t))
                });
            }
            Some(k) if hit[k] => {
                injective = false;
                witness.get_or_insert_with(|| {
                    format!(
                        "atom {} repeats thread {:?}",
                        lm.algebra.atom_id(t),
                        thread_ids(ds, &thread)
                    )
                });
            }
            Some(k) => hit[k] = true,
        }
    }
    let onto = hit.iter().all(|&h| h);
    if !onto && witness.is_none() {
        let k = hit.iter().position(|&h| !h).expect("not onto");
        witness = Some(format!(
            "thread {:?} has no atom",
            thread_ids(ds, &space.threads[k])
        ));
    }
    BridgeReport {
        atoms,
        threads: space.len(),
        well_defined,
        injective,
        onto,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amal::amalgamated_limit;
    use crate::diagram::{check_correct, generate_coordinate_system};
    use crate::order::{grid_index_set, validate_poset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vee_system(a: usize, b: usize) -> BASystem {
        let p = validate_poset(&["m", "0", "1"], &[("m", "0"), ("m", "1")]).unwrap();
        let l = AlmostLattice::from_poset(p).unwrap();
        let coords = vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1])];
        generate_coordinate_system(&l, &coords, &[a, b], 5).unwrap()
    }

    fn grid_system() -> BASystem {
        let l = grid_index_set(2, 2).unwrap();
        let coords: Vec<BTreeSet<usize>> = l
            .ids()
            .iter()
            .map(|id| {
                let inner = id.trim_matches(|c| c == '(' || c == ')');
                let (a, g) = inner.split_once(',').unwrap();
                let (a, g): (usize, usize) = (a.parse().unwrap(), g.parse().unwrap());
                (0..a).chain((0..g).map(|k| k + 2)).collect()
            })
            .collect();
        generate_coordinate_system(&l, &coords, &[2; 4], 3).unwrap()
    }

    #[test]
    fn trivial_algebra_has_one_point() {
        let s = crate::diagram::BASystem::new(
            AlmostLattice::from_poset(validate_poset(&["i"], &[]).unwrap()).unwrap(),
            vec![FiniteBA::trivial()],
            BTreeMap::new(),
        )
        .unwrap();
        let ds = dualize(&s);
        assert_eq!(ds.space(0).len(), 1);
        let (space, report) = thread_space(&ds, 10).unwrap();
        assert_eq!(space.len(), 1);
        assert!(report.holds());
    }

    #[test]
    fn vee_system_threads_are_all_pairs() {
        let ds = dualize(&vee_system(2, 3));
        assert!(validate_discrete(&ds).is_valid());
        let (space, report) = thread_space(&ds, 1000).unwrap();
        assert_eq!(space.len(), 6);
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn missing_lift_is_reported() {
        // top {1,2,3} over left {1|23} and right {12|3}; the pair (1, 3)
        // agrees at the trivial bottom but has no lift
        let p = validate_poset(
            &["m", "0", "1", "t"],
            &[("m", "0"), ("m", "1"), ("m", "t"), ("0", "t"), ("1", "t")],
        )
        .unwrap();
        let l = AlmostLattice::from_poset(p).unwrap();
        let bottom = FiniteBA::trivial();
        let left = FiniteBA::new(["1", "23"]).unwrap();
        let right = FiniteBA::new(["12", "3"]).unwrap();
        let top = FiniteBA::new(["x1", "x2", "x3"]).unwrap();
        let maps = BTreeMap::from([
            (
                (0, 1),
                AtomMap::from_fn(left.clone(), bottom.clone(), vec![0, 0]),
            ),
            (
                (0, 2),
                AtomMap::from_fn(right.clone(), bottom.clone(), vec![0, 0]),
            ),
            (
                (0, 3),
                AtomMap::from_fn(top.clone(), bottom.clone(), vec![0, 0, 0]),
            ),
            (
                (1, 3),
                AtomMap::from_fn(top.clone(), left.clone(), vec![0, 1, 1]),
            ),
            (
                (2, 3),
                AtomMap::from_fn(top.clone(), right.clone(), vec![0, 0, 1]),
            ),
        ]);
        let s = BASystem::new(l, vec![bottom, left, right, top], maps).unwrap();
        let ds = dualize(&s);
        let r = check_topological_correctness(&ds, 1, 2).unwrap();
        assert_eq!(r.missing_lift, Some(("1".to_string(), "3".to_string())));
        let sq = s.square(1, 2).unwrap().unwrap();
        assert!(!check_correct(&sq).unwrap().is_correct());
    }

    #[test]
    fn extension_cases_on_the_grid() {
        let s = grid_system();
        let ds = dualize(&s);
        let l = ds.index().clone();
        let id = |s: &str| l.index_of(s).unwrap();
        // free extension
        let y = extend_partial_thread(&ds, &PartialThread::empty(), id("(1,1)")).unwrap();
        assert_eq!(y.domain(), BTreeSet::from([id("(1,1)")]));
        // two tops and their meet, then a fresh index
        let f = closure(&l, [id("(2,1)"), id("(1,2)")]);
        let mut values = BTreeMap::new();
        let seed = extend_to_thread(&ds, &PartialThread::singleton(id("(2,1)"), 1)).unwrap();
        for &k in f.members() {
            values.insert(k, seed[k]);
        }
        let y = PartialThread::new(&ds, values).unwrap();
        for j in 0..l.len() {
            let z = extend_partial_thread(&ds, &y, j).unwrap();
            assert!(z
                .values()
                .iter()
                .all(|(k, v)| y.get(*k).is_none_or(|w| w == *v)));
            PartialThread::new(&ds, z.values().clone()).unwrap();
        }
    }

    #[test]
    fn grid_threads_match_limit_atoms() {
        let s = grid_system();
        let ds = dualize(&s);
        let (space, report) = thread_space(&ds, 1_000_000).unwrap();
        assert!(report.holds(), "{report:?}");
        let lm = amalgamated_limit(&s).unwrap();
        assert_eq!(space.len(), lm.algebra.len());
        assert!(duality_bridge(&lm, &ds, &space).bijective());
    }

    #[test]
    fn box_image_edge_cases_and_random_draws() {
        let ds = dualize(&grid_system());
        let (space, _) = thread_space(&ds, 1_000_000).unwrap();
        let f = closure(ds.index(), [1, 4]);
        let full: BTreeMap<usize, BTreeSet<usize>> = f
            .members()
            .iter()
            .map(|&i| (i, (0..ds.space(i).len()).collect()))
            .collect();
        let v = box_image(&ds, &f, &full).unwrap();
        assert_eq!(v, full);
        let c = check_box_image(&ds, &space, &f, &full, &v);
        assert!(c.holds() && c.members_of_a == space.len());
        let mut empty = full.clone();
        *empty.values_mut().next().unwrap() = BTreeSet::new();
        let v = box_image(&ds, &f, &empty).unwrap();
        assert!(v.values().all(BTreeSet::is_empty));
        assert_eq!(check_box_image(&ds, &space, &f, &empty, &v).members_of_a, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let (f, boxes) = random_box(&mut rng, &ds);
            let v = box_image(&ds, &f, &boxes).unwrap();
            assert!(check_box_image(&ds, &space, &f, &boxes, &v).holds());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let ds = dualize(&grid_system());
        assert!(matches!(
            threads_by_filtration(&ds, 10),
            Err(ThreadError::Budget { .. })
        ));
    }
}

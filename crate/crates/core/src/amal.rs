//! The amalgamated limit of a correct system.
//!
//! An element of `⋃ A_i` is stored once, at its home: the meet of all
//! indices whose algebra contains it. Conditions are unordered pairs of such
//! elements whose projections to the meet of their homes coincide.
//!
//! Every condition has a condition of two atoms below it, so the minimal
//! conditions (the atoms of the completion) are found among atom pairs
//! without materializing the whole condition set.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::balg::{
    completion::{regular_open_completion, Preorder},
    embed, pair_id, project, AtomMap, Element, FiniteBA,
};
use crate::diagram::{direct_limit, validate_system, BASystem, SystemReport};
use crate::order::{ClosedSet, Tops};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalError {
    #[error("system is not valid: {} violation(s)", .0.violations.len())]
    InvalidSystem(SystemReport),
    #[error("{what}: {needed} exceeds the budget {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("{0}")]
    Defect(String),
}

/// Largest algebra whose elements are enumerated.
pub const MAX_ENUMERATED_ATOMS: usize = 16;

/// A nonzero element of `⋃ A_i` at its home index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HomeElement {
    pub home: usize,
    pub element: Element,
}

/// An unordered pair of home elements, stored with `p <= q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition {
    pub p: usize,
    pub q: usize,
}

impl Condition {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            p: a.min(b),
            q: a.max(b),
        }
    }

    pub fn diagonal(a: usize) -> Self {
        Self { p: a, q: a }
    }
}

/// The home elements of a system together with the projections between
/// them.
#[derive(Clone, Debug)]
pub struct Amalgam {
    system: BASystem,
    elements: Vec<HomeElement>,
    lookup: HashMap<HomeElement, usize>,
    /// Per index, its algebra's atoms as home elements.
    atoms: Vec<Vec<usize>>,
}

impl Amalgam {
    /// Enumerates the home elements of a valid system.
    pub fn new(system: &BASystem) -> Result<Self, AmalError> {
        let report = validate_system(system);
        if !report.is_valid() {
            return Err(AmalError::InvalidSystem(report));
        }
        Self::new_unchecked(system)
    }

    /// As [`Amalgam::new`] without re-validating; containment defects are
    /// still reported.
    pub fn new_unchecked(system: &BASystem) -> Result<Self, AmalError> {
        if let Some(a) = system
            .algebras()
            .iter()
            .find(|a| a.len() > MAX_ENUMERATED_ATOMS)
        {
            return Err(AmalError::Budget {
                what: "atoms of a system algebra",
                needed: a.len() as u128,
                limit: MAX_ENUMERATED_ATOMS as u128,
            });
        }
        let mut this = Self {
            system: system.clone(),
            elements: Vec::new(),
            lookup: HashMap::new(),
            atoms: Vec::new(),
        };
        for k in 0..system.len() {
            for e in Element::all(system.algebra(k).len()).filter(|e| !e.is_zero()) {
                let h = this.home_of(k, &e)?;
                if h.home == k {
                    this.lookup.insert(h.clone(), this.elements.len());
                    this.elements.push(h);
                }
            }
        }
        this.atoms = (0..system.len())
            .map(|k| {
                let n = system.algebra(k).len();
                (0..n)
                    .map(|a| this.locate(k, &Element::atom(n, a)))
                    .collect()
            })
            .collect();
        Ok(this)
    }

    fn home_of(&self, k: usize, e: &Element) -> Result<HomeElement, AmalError> {
        let l = self.system.index();
        let holders: Vec<usize> = (0..l.len())
            .filter(|&i| l.leq(i, k) && self.system.map(i, k).in_image(e))
            .collect();
        let home = holders.iter().fold(k, |m, &i| l.meet(m, i));
        if !holders.contains(&home) {
            return Err(AmalError::Defect(format!(
                "element {:?} of A_{} lies in algebras whose meet does not contain it",
                self.system.algebra(k).atom_ids(e),
                l.id(k)
            )));
        }
        let element = project(self.system.map(home, k), e).expect("universe");
        Ok(HomeElement { home, element })
    }

    pub fn system(&self) -> &BASystem {
        &self.system
    }

    pub fn elements(&self) -> &[HomeElement] {
        &self.elements
    }

    pub fn element(&self, x: usize) -> &HomeElement {
        &self.elements[x]
    }

    /// The home element equal to the nonzero `e ∈ A_k`.
    pub fn locate(&self, k: usize, e: &Element) -> usize {
        let h = self.home_of(k, e).expect("checked on construction");
        self.lookup[&h]
    }

    /// The atoms of `A_k` as home elements.
    pub fn atoms_of(&self, k: usize) -> &[usize] {
        &self.atoms[k]
    }

    /// `x` as an element of `A_i`, for `i` above its home.
    pub fn lift(&self, x: usize, i: usize) -> Element {
        let h = &self.elements[x];
        embed(self.system.map(h.home, i), &h.element).expect("universe")
    }

    /// Projection of `x` to `A_m`, for `m` below its home.
    pub fn project_to(&self, x: usize, m: usize) -> Element {
        let h = &self.elements[x];
        project(self.system.map(m, h.home), &h.element).expect("universe")
    }

    /// `h(x) <= y` where `h` projects from `x`'s home to the meet of the
    /// two homes, compared in `y`'s home.
    pub fn le(&self, x: usize, y: usize) -> bool {
        let (hx, hy) = (self.elements[x].home, self.elements[y].home);
        let m = self.system.index().meet(hx, hy);
        let down = self.project_to(x, m);
        embed(self.system.map(m, hy), &down)
            .expect("universe")
            .leq(&self.elements[y].element)
    }

    pub fn is_condition(&self, x: usize, y: usize) -> bool {
        let m = self
            .system
            .index()
            .meet(self.elements[x].home, self.elements[y].home);
        self.project_to(x, m) == self.project_to(y, m)
    }

    /// The four-case order under canonical witnesses.
    pub fn cond_leq(&self, lower: Condition, upper: Condition) -> bool {
        four_cases(|a, b| self.le(a, b), lower, upper)
    }

    /// The four-case order quantified over every witness of both
    /// conditions.
    pub fn cond_leq_existential(&self, lower: Condition, upper: Condition) -> bool {
        let l = self.system.index();
        let above = |x: usize| -> Vec<(usize, Element)> {
            (0..l.len())
                .filter(|&i| l.leq(self.elements[x].home, i))
                .map(|i| (i, self.lift(x, i)))
                .collect()
        };
        let witnesses = |c: Condition| -> Vec<[(usize, Element); 2]> {
            let (ps, qs) = (above(c.p), above(c.q));
            let mut out = Vec::new();
            for (i, p) in &ps {
                for (j, q) in &qs {
                    let m = l.meet(*i, *j);
                    let hp = project(self.system.map(m, *i), p).unwrap();
                    let hq = project(self.system.map(m, *j), q).unwrap();
                    if hp == hq {
                        out.push([(*i, p.clone()), (*j, q.clone())]);
                    }
                }
            }
            out
        };
        let le = |(i1, x): &(usize, Element), (i2, y): &(usize, Element)| {
            let m = l.meet(*i1, *i2);
            let down = project(self.system.map(m, *i1), x).unwrap();
            embed(self.system.map(m, *i2), &down).unwrap().leq(y)
        };
        let lows = witnesses(lower);
        let ups = witnesses(upper);
        lows.iter().any(|[p1, q1]| {
            ups.iter().any(|[p, q]| {
                (le(p1, p) && le(q1, q))
                    || (le(q1, p) && le(p1, q))
                    || (le(p1, p) && le(p1, q))
                    || (le(q1, p) && le(q1, q))
            })
        })
    }

    pub fn label(&self, x: usize) -> String {
        let h = &self.elements[x];
        let ids = self.system.algebra(h.home).atom_ids(&h.element);
        format!("{}[{}]", self.system.index().id(h.home), ids.join(" "))
    }

    pub fn condition_label(&self, c: Condition) -> String {
        if c.p == c.q {
            self.label(c.p)
        } else {
            format!("{} & {}", self.label(c.p), self.label(c.q))
        }
    }

    /// `|D|`, counted by grouping elements by their projections.
    pub fn count_conditions(&self) -> u128 {
        let l = self.system.index();
        let n = l.len();
        let mut by_home: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, h) in self.elements.iter().enumerate() {
            by_home[h.home].push(x);
        }
        let mut total: u128 = 0;
        for a in 0..n {
            total += by_home[a].len() as u128;
            for b in a + 1..n {
                let m = l.meet(a, b);
                let mut counts: HashMap<Element, u128> = HashMap::new();
                for &x in &by_home[a] {
                    *counts.entry(self.project_to(x, m)).or_default() += 1;
                }
                for &y in &by_home[b] {
                    total += counts.get(&self.project_to(y, m)).copied().unwrap_or(0);
                }
            }
        }
        total
    }
}

fn four_cases(le: impl Fn(usize, usize) -> bool, lower: Condition, upper: Condition) -> bool {
    let (p1, q1, p, q) = (lower.p, lower.q, upper.p, upper.q);
    (le(p1, p) && le(q1, q))
        || (le(q1, p) && le(p1, q))
        || (le(p1, p) && le(p1, q))
        || (le(q1, p) && le(q1, q))
}

/// The full condition set with its order, for systems small enough to
/// enumerate.
#[derive(Clone, Debug)]
pub struct ConditionSet {
    pub amalgam: Amalgam,
    pub conditions: Vec<Condition>,
}

impl ConditionSet {
    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn position(&self, c: Condition) -> Option<usize> {
        self.conditions.binary_search(&c).ok()
    }
}

impl Preorder for ConditionSet {
    fn size(&self) -> usize {
        self.conditions.len()
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.amalgam
            .cond_leq(self.conditions[a], self.conditions[b])
    }

    fn label(&self, a: usize) -> String {
        self.amalgam.condition_label(self.conditions[a])
    }
}

/// All conditions, sorted. Refuses when `|D|` exceeds `budget`.
pub fn build_condition_set(s: &BASystem, budget: u128) -> Result<ConditionSet, AmalError> {
    let amalgam = Amalgam::new(s)?;
    let needed = amalgam.count_conditions();
    if needed > budget {
        return Err(AmalError::Budget {
            what: "conditions",
            needed,
            limit: budget,
        });
    }
    let n = amalgam.elements.len();
    let mut conditions = Vec::with_capacity(needed as usize);
    for x in 0..n {
        for y in x..n {
            if amalgam.is_condition(x, y) {
                conditions.push(Condition::new(x, y));
            }
        }
    }
    Ok(ConditionSet {
        amalgam,
        conditions,
    })
}

/// The amalgamated limit: atoms are classes of minimal conditions, and
/// `limit[i]` sends each to the atom of `A_i` above it.
#[derive(Clone, Debug)]
pub struct LimitAlgebra {
    pub amalgam: Amalgam,
    pub algebra: FiniteBA,
    /// Minimal conditions forming each atom, sorted.
    pub classes: Vec<Vec<Condition>>,
    pub limit: Vec<AtomMap>,
}

impl LimitAlgebra {
    /// Image of a condition: the atoms whose minimal conditions lie below it.
    pub fn image(&self, c: Condition) -> Element {
        let n = self.classes.len();
        Element::from_atoms(
            n,
            (0..n).filter(|&t| self.amalgam.cond_leq(self.classes[t][0], c)),
        )
    }

    /// Image of a nonzero `p ∈ A_i` under `p ↦ (p, p)`.
    pub fn image_of(&self, i: usize, p: &Element) -> Element {
        self.image(Condition::diagonal(self.amalgam.locate(i, p)))
    }

    pub fn system(&self) -> &BASystem {
        self.amalgam.system()
    }
}

pub fn amalgamated_limit(s: &BASystem) -> Result<LimitAlgebra, AmalError> {
    limit_of(Amalgam::new(s)?)
}

/// The limit of an amalgam, not re-validating its system.
pub fn limit_of(amalgam: Amalgam) -> Result<LimitAlgebra, AmalError> {
    let s = amalgam.system().clone();
    let mut atom_elems: Vec<usize> = amalgam.atoms.iter().flatten().copied().collect();
    atom_elems.sort_unstable();
    atom_elems.dedup();
    let k = atom_elems.len();
    let le: Vec<bool> = (0..k * k)
        .map(|t| amalgam.le(atom_elems[t / k], atom_elems[t % k]))
        .collect();
    let le_at = |a: usize, b: usize| le[a * k + b];
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for a in 0..k {
        for b in a..k {
            if amalgam.is_condition(atom_elems[a], atom_elems[b]) {
                candidates.push((a, b));
            }
        }
    }
    let cand_leq = |lo: (usize, usize), up: (usize, usize)| {
        four_cases(
            le_at,
            Condition { p: lo.0, q: lo.1 },
            Condition { p: up.0, q: up.1 },
        )
    };
    let minimal: Vec<(usize, usize)> = candidates
        .iter()
        .copied()
        .filter(|&c| {
            candidates
                .iter()
                .all(|&r| !cand_leq(r, c) || cand_leq(c, r))
        })
        .collect();
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    for m in minimal {
        match classes
            .iter_mut()
            .find(|cl| cand_leq(cl[0], m) && cand_leq(m, cl[0]))
        {
            Some(cl) => cl.push(m),
            None => classes.push(vec![m]),
        }
    }
    let classes: Vec<Vec<Condition>> = classes
        .into_iter()
        .map(|cl| {
            cl.into_iter()
                .map(|(a, b)| Condition::new(atom_elems[a], atom_elems[b]))
                .collect()
        })
        .collect();
    let labels: Vec<String> = classes
        .iter()
        .map(|cl| amalgam.condition_label(cl[0]))
        .collect();
    let algebra = FiniteBA::new(labels.clone())
        .or_else(|_| FiniteBA::new((0..classes.len()).map(|t| format!("t{t}"))))
        .map_err(|e| AmalError::Defect(e.to_string()))?;
    let mut this = LimitAlgebra {
        amalgam,
        algebra,
        classes,
        limit: Vec::new(),
    };
    for i in 0..s.len() {
        let n = s.algebra(i).len();
        let mut map = vec![usize::MAX; this.classes.len()];
        for a in 0..n {
            for t in this.image_of(i, &Element::atom(n, a)).atoms() {
                if map[t] != usize::MAX {
                    return Err(AmalError::Defect(format!(
                        "limit atom {} lies below two atoms of A_{}",
                        this.algebra.atom_id(t),
                        s.index().id(i)
                    )));
                }
                map[t] = a;
            }
        }
        if let Some(t) = map.iter().position(|&a| a == usize::MAX) {
            return Err(AmalError::Defect(format!(
                "limit atom {} lies below no atom of A_{}",
                this.algebra.atom_id(t),
                s.index().id(i)
            )));
        }
        this.limit.push(AtomMap::from_fn(
            this.algebra.clone(),
            s.algebra(i).clone(),
            map,
        ));
    }
    Ok(this)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexEmbedding {
    pub index: String,
    /// The limit map is onto the atoms of `A_i`.
    pub complete: bool,
    /// `(p, p)` has the image of `p` under the embedding, for all nonzero `p`.
    pub identification: bool,
    pub first_failure: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddabilityReport {
    pub per_index: Vec<IndexEmbedding>,
    /// `image(p, q) = image(p, p) ∧ image(q, q)` on the conditions examined.
    pub meet_identity: bool,
    pub meet_identity_checked: u128,
    pub meet_identity_failure: Option<String>,
    /// Every atom lies below some condition.
    pub dense: bool,
    pub extended: SystemReport,
}

impl EmbeddabilityReport {
    pub fn holds(&self) -> bool {
        self.per_index
            .iter()
            .all(|e| e.complete && e.identification)
            && self.meet_identity
            && self.dense
            && self.extended.is_valid()
    }
}

/// Conditions examined for the meet identity before falling back to pairs
/// of atoms.
pub const MEET_IDENTITY_BUDGET: u128 = 20_000;

pub fn verify_embeddability(lm: &LimitAlgebra) -> EmbeddabilityReport {
    let s = lm.system();
    let am = &lm.amalgam;
    let mut per_index = Vec::new();
    for i in 0..s.len() {
        let emb = &lm.limit[i];
        let n = s.algebra(i).len();
        let failure = Element::all(n)
            .filter(|p| !p.is_zero())
            .find(|p| lm.image_of(i, p) != embed(emb, p).expect("universe"));
        per_index.push(IndexEmbedding {
            index: s.index().id(i).to_string(),
            complete: emb.is_surjective(),
            identification: failure.is_none(),
            first_failure: failure.map(|p| s.algebra(i).atom_ids(&p)),
        });
    }
    let pairs: Vec<Condition> = if am.count_conditions() <= MEET_IDENTITY_BUDGET {
        let n = am.elements().len();
        (0..n)
            .flat_map(|x| (x..n).map(move |y| (x, y)))
            .filter(|&(x, y)| am.is_condition(x, y))
            .map(|(x, y)| Condition::new(x, y))
            .collect()
    } else {
        let mut atoms: Vec<usize> = am.atoms.iter().flatten().copied().collect();
        atoms.sort_unstable();
        atoms.dedup();
        atoms
            .iter()
            .flat_map(|&x| atoms.iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| x <= y && am.is_condition(x, y))
            .map(|(x, y)| Condition::new(x, y))
            .collect()
    };
    let meet_failure = pairs.iter().find(|&&c| {
        lm.image(c)
            != lm
                .image(Condition::diagonal(c.p))
                .meet(&lm.image(Condition::diagonal(c.q)))
    });
    let mut covered = Element::zero(lm.algebra.len());
    for c in lm.classes.iter().map(|cl| cl[0]) {
        covered = covered.join(&lm.image(c));
    }
    let extended = match s.extend_with_top(lm.algebra.clone(), &lm.limit) {
        Ok(ext) => validate_system(&ext),
        Err(e) => SystemReport {
            violations: vec![crate::diagram::SystemViolation::Index {
                axioms: match e {
                    crate::diagram::DiagramError::Order(
                        crate::order::OrderError::Precondition(v),
                    ) => vec![v],
                    _ => Vec::new(),
                },
            }],
            squares_checked: 0,
        },
    };
    EmbeddabilityReport {
        per_index,
        meet_identity: meet_failure.is_none(),
        meet_identity_checked: pairs.len() as u128,
        meet_identity_failure: meet_failure.map(|&c| am.condition_label(c)),
        dense: covered.is_one(),
        extended,
    }
}

/// A bijection `φ` from the limit's atoms onto those of `target` with
/// `to_index[i] ∘ φ = limit[i]` for every listed `i`, if one exists.
pub fn canonical_isomorphism(
    limit: &[(usize, &AtomMap)],
    target: &FiniteBA,
    to_index: &[(usize, &AtomMap)],
) -> Option<Vec<usize>> {
    let n = limit.first()?.1.source().len();
    if n != target.len() {
        return None;
    }
    let index: BTreeMap<usize, &AtomMap> = to_index.iter().copied().collect();
    let mut phi = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for t in 0..n {
        let matches: Vec<usize> = (0..target.len())
            .filter(|&b| {
                limit
                    .iter()
                    .all(|(i, m)| index.get(i).is_some_and(|g| g.apply(b) == m.apply(t)))
            })
            .collect();
        let [b] = matches[..] else { return None };
        if std::mem::replace(&mut used[b], true) {
            return None;
        }
        phi.push(b);
    }
    Some(phi)
}

fn limit_pairs(lm: &LimitAlgebra) -> Vec<(usize, &AtomMap)> {
    lm.limit.iter().enumerate().collect()
}

/// Degenerate shapes recognized for a system, with the isomorphism verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Degenerate {
    /// The index has a maximum; the limit should be that algebra.
    MaximumIndex { index: String, isomorphic: bool },
    /// A closed sub-index with one top; its limit should be the direct limit.
    LatticeSubIndex {
        members: Vec<String>,
        isomorphic: bool,
    },
    /// Three indices `m < a, b` without a join; the limit should be the
    /// amalgamated free product of `A_a` and `A_b` over `A_m`.
    ThreeElement {
        atoms: usize,
        expected_atoms: usize,
        isomorphic: bool,
    },
}

impl Degenerate {
    pub fn isomorphic(&self) -> bool {
        match self {
            Degenerate::MaximumIndex { isomorphic, .. }
            | Degenerate::LatticeSubIndex { isomorphic, .. }
            | Degenerate::ThreeElement { isomorphic, .. } => *isomorphic,
        }
    }
}

/// The limit is the algebra at the maximum, when there is one.
pub fn maximum_index_check(lm: &LimitAlgebra) -> Option<Degenerate> {
    let s = lm.system();
    let top = s.index().poset().maximum()?;
    let d = direct_limit(s, &(0..s.len()).collect()).ok()?;
    debug_assert_eq!(d.top, top);
    let to_index: Vec<(usize, &AtomMap)> = d.maps.iter().map(|(k, m)| (*k, m)).collect();
    let iso = canonical_isomorphism(&limit_pairs(lm), &d.algebra, &to_index).is_some();
    Some(Degenerate::MaximumIndex {
        index: s.index().id(top).to_string(),
        isomorphic: iso,
    })
}

/// For every closed sub-index with a single top, the limit of the
/// restricted system against its direct limit.
pub fn lattice_sub_index_checks(s: &BASystem) -> Result<Vec<Degenerate>, AmalError> {
    let l = s.index();
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in 0..l.len() {
        for b in 0..l.len() {
            let set = crate::order::closure(l, [a, b]);
            if !matches!(set.tops(), Some(Tops::Single(_))) || !seen.insert(set.members().clone()) {
                continue;
            }
            out.push(sub_index_check(s, &set)?);
        }
    }
    Ok(out)
}

fn sub_index_check(s: &BASystem, set: &ClosedSet) -> Result<Degenerate, AmalError> {
    let (r, members) = s.restrict(set);
    let lm = limit_of(Amalgam::new_unchecked(&r)?)?;
    let all = (0..r.len()).collect();
    let d = direct_limit(&r, &all).map_err(|e| AmalError::Defect(e.to_string()))?;
    let to_index: Vec<(usize, &AtomMap)> = d.maps.iter().map(|(k, m)| (*k, m)).collect();
    Ok(Degenerate::LatticeSubIndex {
        members: members
            .iter()
            .map(|&k| s.index().id(k).to_string())
            .collect(),
        isomorphic: canonical_isomorphism(&limit_pairs(&lm), &d.algebra, &to_index).is_some(),
    })
}

/// The amalgamated free product over a common bottom: atoms are the pairs
/// of atoms with the same image in the bottom.
pub struct FibredProduct {
    pub algebra: FiniteBA,
    pub left: AtomMap,
    pub right: AtomMap,
    pub bottom: AtomMap,
}

pub fn fibred_product(left_to_bottom: &AtomMap, right_to_bottom: &AtomMap) -> FibredProduct {
    let (l, r) = (left_to_bottom.source(), right_to_bottom.source());
    let pairs: Vec<(usize, usize)> = (0..l.len())
        .flat_map(|a| (0..r.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| left_to_bottom.apply(a) == right_to_bottom.apply(b))
        .collect();
    let algebra = FiniteBA::new(
        pairs
            .iter()
            .map(|&(a, b)| pair_id(l.atom_id(a), r.atom_id(b))),
    )
    .expect("distinct pairs");
    let left = AtomMap::from_fn(
        algebra.clone(),
        l.clone(),
        pairs.iter().map(|p| p.0).collect(),
    );
    let right = AtomMap::from_fn(
        algebra.clone(),
        r.clone(),
        pairs.iter().map(|p| p.1).collect(),
    );
    let bottom = AtomMap::from_fn(
        algebra.clone(),
        left_to_bottom.target().clone(),
        pairs.iter().map(|p| left_to_bottom.apply(p.0)).collect(),
    );
    FibredProduct {
        algebra,
        left,
        right,
        bottom,
    }
}

/// Recognizes an index of shape `m < a, b` with `a ∨ b` undefined.
pub fn three_element_check(lm: &LimitAlgebra) -> Option<Degenerate> {
    let s = lm.system();
    let l = s.index();
    if l.len() != 3 {
        return None;
    }
    let m = l.poset().minimum()?;
    let others: Vec<usize> = (0..3).filter(|&k| k != m).collect();
    let (a, b) = (others[0], others[1]);
    if l.join(a, b).is_some() {
        return None;
    }
    let fp = fibred_product(s.map(m, a), s.map(m, b));
    let to_index = [(m, &fp.bottom), (a, &fp.left), (b, &fp.right)];
    Some(Degenerate::ThreeElement {
        atoms: lm.algebra.len(),
        expected_atoms: fp.algebra.len(),
        isomorphic: canonical_isomorphism(&limit_pairs(lm), &fp.algebra, &to_index).is_some(),
    })
}

/// The completion of the full condition set, computed through the generic
/// regular-open construction; agrees with [`LimitAlgebra`] when `D` is
/// small enough to enumerate.
pub fn completion_of_conditions(d: &ConditionSet) -> Result<crate::balg::Completion, AmalError> {
    regular_open_completion(d).map_err(|e| AmalError::Defect(e.to_string()))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::diagram::generate_coordinate_system;
    use crate::order::{validate_poset, AlmostLattice};

    fn vee_system(a: usize, b: usize) -> BASystem {
        let p = validate_poset(&["m", "0", "1"], &[("m", "0"), ("m", "1")]).unwrap();
        let l = AlmostLattice::from_poset(p).unwrap();
        let coords = vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1])];
        generate_coordinate_system(&l, &coords, &[a, b], 5).unwrap()
    }

    #[test]
    fn vee_system_condition_count() {
        let d = build_condition_set(&vee_system(2, 2), 1000).unwrap();
        // three nonzero elements per factor plus the unit at the bottom:
        // 9 mixed pairs and 4 diagonal pairs of home elements
        assert_eq!(d.amalgam.elements().len(), 5);
        assert_eq!(d.len(), 13);
        assert_eq!(d.amalgam.count_conditions(), 13);
    }

    #[test]
    fn vee_system_limit_is_the_product() {
        for (a, b) in [(2, 2), (2, 3), (1, 3)] {
            let lm = amalgamated_limit(&vee_system(a, b)).unwrap();
            assert_eq!(lm.algebra.len(), a * b);
            assert!(verify_embeddability(&lm).holds());
            assert!(three_element_check(&lm).unwrap().isomorphic());
        }
    }

    #[test]
    fn pair_lies_below_its_diagonals() {
        let d = build_condition_set(&vee_system(2, 3), 10_000).unwrap();
        for &c in &d.conditions {
            assert!(d.amalgam.cond_leq(c, Condition::diagonal(c.p)));
            assert!(d.amalgam.cond_leq(c, Condition::diagonal(c.q)));
            assert!(d.amalgam.cond_leq(c, c));
        }
    }

    #[test]
    fn one_point_index_gives_nonzero_elements() {
        let p = validate_poset(&["i"], &[]).unwrap();
        let l = AlmostLattice::from_poset(p).unwrap();
        let s = BASystem::new(l, vec![FiniteBA::with_atoms("a", 3)], BTreeMap::new()).unwrap();
        let d = build_condition_set(&s, 100).unwrap();
        assert_eq!(d.len(), 7);
        assert!(d.conditions.iter().all(|c| c.p == c.q));
        let lm = amalgamated_limit(&s).unwrap();
        assert_eq!(lm.algebra.len(), 3);
        assert!(maximum_index_check(&lm).unwrap().isomorphic());
    }

    #[test]
    fn vee_system_has_equivalent_conditions() {
        let d = build_condition_set(&vee_system(2, 2), 1000).unwrap();
        let q = crate::balg::separative_quotient(&d);
        assert!(q.classes.len() < d.len());
        let c = completion_of_conditions(&d).unwrap();
        assert_eq!(c.algebra.len(), 4);
    }
}

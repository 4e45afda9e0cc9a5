//! Finite posets, distributive almost-lattices, closed subsets and the
//! grid-shaped index sets used by two-dimensional iterations.
//!
//! Elements are addressed by dense indices `0..n`; the string ids are kept
//! for reporting and serialization only. All witnesses are the
//! lexicographically least index tuples violating a law.

pub mod enumerate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("a poset needs at least one element")]
    Empty,
    #[error("duplicate element id `{0}`")]
    DuplicateElement(String),
    #[error("order pair mentions unknown element `{0}`")]
    UnknownElement(String),
    #[error("relation is not a partial order: {0}")]
    NotAPartialOrder(PosetReport),
    #[error("not a distributive almost-lattice: {}", fmt_violations(.0))]
    NotAlmostLattice(Vec<AxiomViolation>),
    #[error("precondition {} fails at {:?}", .0.axiom, .0.witness)]
    Precondition(AxiomViolation),
    #[error("set is not closed: {0}")]
    NotClosed(String),
    #[error("closed set is empty")]
    EmptySet,
    #[error("grid index set is empty (beta = delta = 0)")]
    EmptyGrid,
}

fn fmt_violations(v: &[AxiomViolation]) -> String {
    v.iter()
        .map(|x| format!("{} at {:?}", x.axiom, x.witness))
        .collect::<Vec<_>>()
        .join("; ")
}

/// A law of partial orders broken by a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PosetViolation {
    Antisymmetry { a: String, b: String },
    Transitivity { a: String, b: String, c: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosetReport {
    pub violations: Vec<PosetViolation>,
}

impl fmt::Display for PosetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            match v {
                PosetViolation::Antisymmetry { a, b } => {
                    write!(f, "antisymmetry: {a} <= {b} <= {a}")?
                }
                PosetViolation::Transitivity { a, b, c } => {
                    write!(f, "transitivity: {a} <= {b} <= {c} but not {a} <= {c}")?
                }
            }
        }
        Ok(())
    }
}

/// A finite partial order stored as a dense `n x n` relation matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    ids: Vec<String>,
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Builds a poset from a relation matrix, adding reflexive pairs.
    pub fn from_matrix(ids: Vec<String>, mut leq: Vec<bool>) -> Result<Self, OrderError> {
        let n = ids.len();
        assert_eq!(leq.len(), n * n, "relation matrix has wrong size");
        if n == 0 {
            return Err(OrderError::Empty);
        }
        let mut seen = HashMap::new();
        for (k, id) in ids.iter().enumerate() {
            if seen.insert(id.clone(), k).is_some() {
                return Err(OrderError::DuplicateElement(id.clone()));
            }
        }
        for a in 0..n {
            leq[a * n + a] = true;
        }
        let mut violations = Vec::new();
        'anti: for a in 0..n {
            for b in a + 1..n {
                if leq[a * n + b] && leq[b * n + a] {
                    violations.push(PosetViolation::Antisymmetry {
                        a: ids[a].clone(),
                        b: ids[b].clone(),
                    });
                    break 'anti;
                }
            }
        }
        'trans: for a in 0..n {
            for b in 0..n {
                if !leq[a * n + b] {
                    continue;
                }
                for c in 0..n {
                    if leq[b * n + c] && !leq[a * n + c] {
                        violations.push(PosetViolation::Transitivity {
                            a: ids[a].clone(),
                            b: ids[b].clone(),
                            c: ids[c].clone(),
                        });
                        break 'trans;
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(Self { ids, leq })
        } else {
            Err(OrderError::NotAPartialOrder(PosetReport { violations }))
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, a: usize) -> &str {
        &self.ids[a]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.ids.len() + b]
    }

    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn has_upper_bound(&self, a: usize, b: usize) -> bool {
        (0..self.len()).any(|u| self.leq(a, u) && self.leq(b, u))
    }

    /// The unique greatest element, if any.
    pub fn maximum(&self) -> Option<usize> {
        (0..self.len()).find(|&m| (0..self.len()).all(|a| self.leq(a, m)))
    }

    pub fn minimum(&self) -> Option<usize> {
        (0..self.len()).find(|&m| (0..self.len()).all(|a| self.leq(m, a)))
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&m| !(0..self.len()).any(|a| self.lt(m, a)))
            .collect()
    }

    /// All pairs `(a, b)` with `a <= b`, including the diagonal.
    pub fn comparable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |a| (0..n).filter(move |&b| self.leq(a, b)).map(move |b| (a, b)))
    }

    /// Strict order pairs as `(lower_id, upper_id)`.
    pub fn strict_pairs(&self) -> Vec<(String, String)> {
        self.comparable_pairs()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
            .collect()
    }

    fn glb(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let lower: Vec<usize> = (0..n)
            .filter(|&x| self.leq(x, a) && self.leq(x, b))
            .collect();
        lower
            .iter()
            .copied()
            .find(|&g| lower.iter().all(|&x| self.leq(x, g)))
    }

    fn lub(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let upper: Vec<usize> = (0..n)
            .filter(|&x| self.leq(a, x) && self.leq(b, x))
            .collect();
        upper
            .iter()
            .copied()
            .find(|&g| upper.iter().all(|&x| self.leq(g, x)))
    }

    /// Copy of this poset with an extra element placed above everything.
    pub fn with_top(&self, top_id: &str) -> FinitePoset {
        let n = self.len();
        let m = n + 1;
        let mut leq = vec![false; m * m];
        for a in 0..n {
            for b in 0..n {
                leq[a * m + b] = self.leq(a, b);
            }
            leq[a * m + n] = true;
        }
        leq[n * m + n] = true;
        let mut ids = self.ids.clone();
        ids.push(top_id.to_string());
        FinitePoset { ids, leq }
    }
}

/// Builds a poset from ids and an extensional `leq` pair list.
///
/// Reflexive pairs are implied and need not be listed.
pub fn validate_poset<S: AsRef<str>>(
    elements: &[S],
    leq_pairs: &[(S, S)],
) -> Result<FinitePoset, OrderError> {
    let ids: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
    if ids.is_empty() {
        return Err(OrderError::Empty);
    }
    let mut index = HashMap::new();
    for (k, id) in ids.iter().enumerate() {
        if index.insert(id.as_str(), k).is_some() {
            return Err(OrderError::DuplicateElement(id.clone()));
        }
    }
    let n = ids.len();
    let mut leq = vec![false; n * n];
    for (a, b) in leq_pairs {
        let lookup = |s: &S| {
            index
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| OrderError::UnknownElement(s.as_ref().to_string()))
        };
        let (a, b) = (lookup(a)?, lookup(b)?);
        leq[a * n + b] = true;
    }
    FinitePoset::from_matrix(ids, leq)
}

/// The six axioms of a distributive almost-lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// (i) every pair has a meet.
    Meets,
    /// (ii) bounded pairs have a join.
    Joins,
    /// (iii) of any three elements, two are bounded above.
    BoundedPairs,
    /// (iv) distributive laws wherever both sides exist.
    Distributivity,
    /// (v) joins with an unbounded partner's meet agree.
    JoinTransfer,
    /// (vi) every element splits over an unbounded pair.
    MeetSplitting,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Meets,
        Axiom::Joins,
        Axiom::BoundedPairs,
        Axiom::Distributivity,
        Axiom::JoinTransfer,
        Axiom::MeetSplitting,
    ];

    pub fn numeral(self) -> &'static str {
        match self {
            Axiom::Meets => "(i)",
            Axiom::Joins => "(ii)",
            Axiom::BoundedPairs => "(iii)",
            Axiom::Distributivity => "(iv)",
            Axiom::JoinTransfer => "(v)",
            Axiom::MeetSplitting => "(vi)",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::Meets => "meets",
            Axiom::Joins => "joins",
            Axiom::BoundedPairs => "bounded pairs",
            Axiom::Distributivity => "distributivity",
            Axiom::JoinTransfer => "join transfer",
            Axiom::MeetSplitting => "meet splitting",
        };
        write!(f, "{} {}", self.numeral(), name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// Element indices, least in lexicographic order.
    pub witness: Vec<usize>,
}

/// A poset that passed all six almost-lattice axioms, with its meet table
/// and partial join table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostLattice {
    poset: FinitePoset,
    meet: Vec<usize>,
    join: Vec<Option<usize>>,
}

impl AlmostLattice {
    pub fn from_poset(poset: FinitePoset) -> Result<Self, OrderError> {
        let check = check_almost_lattice(&poset);
        match check.lattice {
            Some(l) => Ok(l),
            None => Err(OrderError::NotAlmostLattice(check.violations)),
        }
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        self.poset.ids()
    }

    pub fn id(&self, a: usize) -> &str {
        self.poset.id(a)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.poset.index_of(id)
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.poset.leq(a, b)
    }

    #[inline]
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b]
    }

    #[inline]
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.join[a * self.len() + b]
    }

    pub fn is_lattice(&self) -> bool {
        self.join.iter().all(Option::is_some)
    }

    /// Pairs `a < b` (index order) whose join exists, i.e. the squares
    /// `(a ∧ b, a, b, a ∨ b)`; comparable pairs give degenerate squares.
    pub fn join_squares(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.join(a, b).is_some() {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Restriction to a closed subset; closed subsets inherit all axioms.
    pub fn restrict(&self, set: &ClosedSet) -> (AlmostLattice, Vec<usize>) {
        let members: Vec<usize> = set.members().iter().copied().collect();
        let m = members.len();
        let ids = members.iter().map(|&a| self.id(a).to_string()).collect();
        let mut leq = vec![false; m * m];
        for (x, &a) in members.iter().enumerate() {
            for (y, &b) in members.iter().enumerate() {
                leq[x * m + y] = self.leq(a, b);
            }
        }
        let poset = FinitePoset::from_matrix(ids, leq).expect("sub-order of a poset");
        let sub = AlmostLattice::from_poset(poset).expect("closed subsets are almost-lattices");
        (sub, members)
    }
}

/// Outcome of [`check_almost_lattice`]: failure is data, not an error.
#[derive(Clone, Debug)]
pub struct AlmostLatticeCheck {
    pub violations: Vec<AxiomViolation>,
    pub lattice: Option<AlmostLattice>,
}

impl AlmostLatticeCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn holds_axiom(&self, axiom: Axiom) -> bool {
        self.violations.iter().all(|v| v.axiom != axiom)
    }
}

struct Tables<'a> {
    p: &'a FinitePoset,
    meet: Vec<Option<usize>>,
    join: Vec<Option<usize>>,
    bounded: Vec<bool>,
}

impl<'a> Tables<'a> {
    fn new(p: &'a FinitePoset) -> Self {
        let n = p.len();
        let mut meet = vec![None; n * n];
        let mut join = vec![None; n * n];
        let mut bounded = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                meet[a * n + b] = p.glb(a, b);
                join[a * n + b] = p.lub(a, b);
                bounded[a * n + b] = p.has_upper_bound(a, b);
            }
        }
        Self {
            p,
            meet,
            join,
            bounded,
        }
    }

    fn n(&self) -> usize {
        self.p.len()
    }
    fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.meet[a * self.n() + b]
    }
    fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.join[a * self.n() + b]
    }
    fn bounded(&self, a: usize, b: usize) -> bool {
        self.bounded[a * self.n() + b]
    }

    fn check(&self, axiom: Axiom) -> Option<Vec<usize>> {
        let n = self.n();
        match axiom {
            Axiom::Meets => {
                for a in 0..n {
                    for b in a..n {
                        if self.meet(a, b).is_none() {
                            return Some(vec![a, b]);
                        }
                    }
                }
            }
            Axiom::Joins => {
                for a in 0..n {
                    for b in a..n {
                        if self.bounded(a, b) && self.join(a, b).is_none() {
                            return Some(vec![a, b]);
                        }
                    }
                }
            }
            Axiom::BoundedPairs => {
                for a in 0..n {
                    for b in a + 1..n {
                        for c in b + 1..n {
                            if !self.bounded(a, b) && !self.bounded(a, c) && !self.bounded(b, c) {
                                return Some(vec![a, b, c]);
                            }
                        }
                    }
                }
            }
            Axiom::Distributivity => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if !self.distributive_at(a, b, c) {
                                return Some(vec![a, b, c]);
                            }
                        }
                    }
                }
            }
            Axiom::JoinTransfer => {
                // (i, j, j'): i, j unbounded.
                for i in 0..n {
                    for j in 0..n {
                        if self.bounded(i, j) {
                            continue;
                        }
                        for jp in 0..n {
                            let Some(m) = self.meet(j, jp) else { continue };
                            if !self.bounded(i, jp) && !self.bounded(i, m) {
                                continue;
                            }
                            match (self.join(i, jp), self.join(i, m)) {
                                (Some(x), Some(y)) if x == y => {}
                                _ => return Some(vec![i, j, jp]),
                            }
                        }
                    }
                }
            }
            Axiom::MeetSplitting => {
                // (i, j, j'): j, j' unbounded.
                for i in 0..n {
                    for j in 0..n {
                        for jp in 0..n {
                            if self.bounded(j, jp) {
                                continue;
                            }
                            let split = match (self.meet(i, j), self.meet(i, jp)) {
                                (Some(x), Some(y)) => self.join(x, y),
                                _ => continue,
                            };
                            if split != Some(i) {
                                return Some(vec![i, j, jp]);
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Both distributive laws at `(a, b, c)`, each only where both sides exist.
    fn distributive_at(&self, a: usize, b: usize, c: usize) -> bool {
        let meet_over_join = (|| {
            let lhs = self.meet(a, self.join(b, c)?)?;
            let rhs = self.join(self.meet(a, b)?, self.meet(a, c)?)?;
            Some(lhs == rhs)
        })();
        let join_over_meet = (|| {
            let lhs = self.join(a, self.meet(b, c)?)?;
            let rhs = self.meet(self.join(a, b)?, self.join(a, c)?)?;
            Some(lhs == rhs)
        })();
        meet_over_join != Some(false) && join_over_meet != Some(false)
    }
}

/// Checks axioms (i)–(vi) and builds the meet/join tables on success.
pub fn check_almost_lattice(p: &FinitePoset) -> AlmostLatticeCheck {
    let t = Tables::new(p);
    let violations: Vec<AxiomViolation> = Axiom::ALL
        .iter()
        .filter_map(|&axiom| {
            t.check(axiom)
                .map(|witness| AxiomViolation { axiom, witness })
        })
        .collect();
    let lattice = violations.is_empty().then(|| AlmostLattice {
        poset: p.clone(),
        meet: t.meet.iter().map(|m| m.expect("axiom (i)")).collect(),
        join: t.join.clone(),
    });
    AlmostLatticeCheck {
        violations,
        lattice,
    }
}

/// Result of adjoining a new greatest element.
#[derive(Clone, Debug)]
pub struct TopExtension {
    pub poset: FinitePoset,
    pub top: usize,
    /// The input already had a maximum.
    pub degenerate: bool,
    /// The extended order is a distributive lattice (checked directly).
    pub distributive_lattice: bool,
    /// The input satisfies axioms (v) and (vi).
    pub axioms_v_vi: bool,
}

impl TopExtension {
    pub fn agrees(&self) -> bool {
        self.distributive_lattice == self.axioms_v_vi
    }
}

pub const TOP_ID: &str = "ℓ";

/// Adjoins a top element to a poset satisfying (i)–(iv) and decides whether
/// the result is a distributive lattice.
pub fn add_top(p: &FinitePoset) -> Result<TopExtension, OrderError> {
    let t = Tables::new(p);
    for axiom in [
        Axiom::Meets,
        Axiom::Joins,
        Axiom::BoundedPairs,
        Axiom::Distributivity,
    ] {
        if let Some(witness) = t.check(axiom) {
            return Err(OrderError::Precondition(AxiomViolation { axiom, witness }));
        }
    }
    let axioms_v_vi =
        t.check(Axiom::JoinTransfer).is_none() && t.check(Axiom::MeetSplitting).is_none();
    let mut top_id = TOP_ID.to_string();
    while p.index_of(&top_id).is_some() {
        top_id.push('\'');
    }
    let poset = p.with_top(&top_id);
    let distributive_lattice = is_distributive_lattice(&poset);
    Ok(TopExtension {
        top: p.len(),
        degenerate: p.maximum().is_some(),
        poset,
        distributive_lattice,
        axioms_v_vi,
    })
}

/// Direct test: every pair has a meet and a join, and meets distribute over
/// joins for every triple.
pub fn is_distributive_lattice(p: &FinitePoset) -> bool {
    let n = p.len();
    let mut meet = vec![0; n * n];
    let mut join = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            match (p.glb(a, b), p.lub(a, b)) {
                (Some(m), Some(j)) => {
                    meet[a * n + b] = m;
                    join[a * n + b] = j;
                }
                _ => return false,
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = meet[a * n + join[b * n + c]];
                let rhs = join[meet[a * n + b] * n + meet[a * n + c]];
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// A subset closed under meets and under joins wherever they exist.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedSet {
    members: BTreeSet<usize>,
    tops: Option<Tops>,
}

/// The one or two top elements of a non-empty closed set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Tops {
    Single(usize),
    /// Two maximal elements without a join, smaller index first.
    Pair(usize, usize),
}

impl Tops {
    pub fn as_vec(&self) -> Vec<usize> {
        match *self {
            Tops::Single(a) => vec![a],
            Tops::Pair(a, b) => vec![a, b],
        }
    }
}

impl ClosedSet {
    /// Validates closedness of `members` in `l`.
    pub fn new(l: &AlmostLattice, members: BTreeSet<usize>) -> Result<Self, OrderError> {
        for &a in &members {
            for &b in &members {
                let m = l.meet(a, b);
                if !members.contains(&m) {
                    return Err(OrderError::NotClosed(format!(
                        "meet of {} and {} is missing",
                        l.id(a),
                        l.id(b)
                    )));
                }
                if let Some(j) = l.join(a, b) {
                    if !members.contains(&j) {
                        return Err(OrderError::NotClosed(format!(
                            "join of {} and {} is missing",
                            l.id(a),
                            l.id(b)
                        )));
                    }
                }
            }
        }
        let tops = compute_tops(l, &members);
        Ok(Self { members, tops })
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members.contains(&a)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `None` only for the empty set.
    pub fn tops(&self) -> Option<Tops> {
        self.tops
    }
}

fn compute_tops(l: &AlmostLattice, members: &BTreeSet<usize>) -> Option<Tops> {
    let maximal: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&a| !members.iter().any(|&b| b != a && l.leq(a, b)))
        .collect();
    match maximal.as_slice() {
        [] => None,
        [a] => Some(Tops::Single(*a)),
        [a, b] => {
            assert!(
                l.join(*a, *b).is_none(),
                "closed set has two maximal elements with a join"
            );
            Some(Tops::Pair(*a, *b))
        }
        _ => panic!(
            "closed set with {} maximal elements violates axiom (iii)",
            maximal.len()
        ),
    }
}

/// Smallest closed superset of `seed`.
pub fn closure(l: &AlmostLattice, seed: impl IntoIterator<Item = usize>) -> ClosedSet {
    let mut members: BTreeSet<usize> = seed.into_iter().collect();
    loop {
        let mut added = Vec::new();
        for &a in &members {
            for &b in &members {
                let m = l.meet(a, b);
                if !members.contains(&m) {
                    added.push(m);
                }
                if let Some(j) = l.join(a, b) {
                    if !members.contains(&j) {
                        added.push(j);
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        members.extend(added);
    }
    let tops = compute_tops(l, &members);
    ClosedSet { members, tops }
}

/// The top element(s) of a non-empty subset, which must be closed.
pub fn top_elements(l: &AlmostLattice, set: &BTreeSet<usize>) -> Result<Tops, OrderError> {
    if set.is_empty() {
        return Err(OrderError::EmptySet);
    }
    let closed = ClosedSet::new(l, set.clone())?;
    Ok(closed.tops.expect("non-empty"))
}

pub fn grid_id(alpha: usize, gamma: usize) -> String {
    format!("({alpha},{gamma})")
}

/// `{(α, γ) : α <= beta, γ <= delta, not both maximal}` under the
/// componentwise order.
pub fn grid_index_set(beta: usize, delta: usize) -> Result<AlmostLattice, OrderError> {
    if beta == 0 && delta == 0 {
        return Err(OrderError::EmptyGrid);
    }
    let pts: Vec<(usize, usize)> = (0..=beta)
        .flat_map(|a| (0..=delta).map(move |g| (a, g)))
        .filter(|&(a, g)| a < beta || g < delta)
        .collect();
    let n = pts.len();
    let mut leq = vec![false; n * n];
    for (x, p) in pts.iter().enumerate() {
        for (y, q) in pts.iter().enumerate() {
            leq[x * n + y] = p.0 <= q.0 && p.1 <= q.1;
        }
    }
    let ids = pts.iter().map(|&(a, g)| grid_id(a, g)).collect();
    AlmostLattice::from_poset(FinitePoset::from_matrix(ids, leq)?)
}

//! Commuting squares of complete embeddings, their correctness, and systems
//! of algebras indexed by a distributive almost-lattice.

pub mod generate;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::balg::{compose, embed, project, AtomMap, BaError, Element, FiniteBA};
use crate::order::{add_top, AlmostLattice, AxiomViolation, ClosedSet, OrderError};

pub use generate::{
    generate_coordinate_system, grid_coordinate_system, prime_filters, random_almost_lattice,
    random_coordinate_system, CoordinateSystem, GeneratorParams,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("square does not commute at top atom `{0}`")]
    NonCommuting(String),
    #[error("square edges do not fit together: {0}")]
    Shape(&'static str),
    #[error("expected {expected} algebras, got {found}")]
    AlgebraCount { expected: usize, found: usize },
    #[error("no map given for {lower} <= {upper}")]
    MissingMap { lower: String, upper: String },
    #[error("map for {lower} <= {upper} has the wrong source or target algebra")]
    MapShape { lower: String, upper: String },
    #[error("map given for incomparable pair {lower}, {upper}")]
    Incomparable { lower: String, upper: String },
    #[error("subset of the index is not directed")]
    NotDirected,
    #[error("coordinate assignment: {0}")]
    Assignment(String),
    #[error("infeasible generator budget: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Algebra(#[from] BaError),
}

/// `bottom <∘ left, right <∘ top`, each edge an atom surjection from the
/// larger algebra onto the smaller.
#[derive(Clone, Debug)]
pub struct EmbeddingSquare {
    left_to_bottom: AtomMap,
    right_to_bottom: AtomMap,
    top_to_left: AtomMap,
    top_to_right: AtomMap,
}

impl EmbeddingSquare {
    pub fn new(
        left_to_bottom: AtomMap,
        right_to_bottom: AtomMap,
        top_to_left: AtomMap,
        top_to_right: AtomMap,
    ) -> Result<Self, DiagramError> {
        if left_to_bottom.target() != right_to_bottom.target() {
            return Err(DiagramError::Shape(
                "left and right sit over different bottoms",
            ));
        }
        if top_to_left.target() != left_to_bottom.source() {
            return Err(DiagramError::Shape(
                "top maps onto an algebra other than left",
            ));
        }
        if top_to_right.target() != right_to_bottom.source() {
            return Err(DiagramError::Shape(
                "top maps onto an algebra other than right",
            ));
        }
        if top_to_left.source() != top_to_right.source() {
            return Err(DiagramError::Shape(
                "left and right sit under different tops",
            ));
        }
        let via_left = compose(&left_to_bottom, &top_to_left)?;
        let via_right = compose(&right_to_bottom, &top_to_right)?;
        if let Some(t) =
            (0..via_left.source().len()).find(|&t| via_left.apply(t) != via_right.apply(t))
        {
            return Err(DiagramError::NonCommuting(
                top_to_left.source().atom_id(t).to_string(),
            ));
        }
        Ok(Self {
            left_to_bottom,
            right_to_bottom,
            top_to_left,
            top_to_right,
        })
    }

    pub fn bottom(&self) -> &FiniteBA {
        self.left_to_bottom.target()
    }
    pub fn left(&self) -> &FiniteBA {
        self.left_to_bottom.source()
    }
    pub fn right(&self) -> &FiniteBA {
        self.right_to_bottom.source()
    }
    pub fn top(&self) -> &FiniteBA {
        self.top_to_left.source()
    }
    pub fn left_to_bottom(&self) -> &AtomMap {
        &self.left_to_bottom
    }
    pub fn right_to_bottom(&self) -> &AtomMap {
        &self.right_to_bottom
    }
    pub fn top_to_left(&self) -> &AtomMap {
        &self.top_to_left
    }
    pub fn top_to_right(&self) -> &AtomMap {
        &self.top_to_right
    }

    /// Embedded copy of `bottom` inside `top`.
    pub fn bottom_in_top(&self) -> AtomMap {
        compose(&self.left_to_bottom, &self.top_to_left).expect("checked shape")
    }

    fn all_complete(&self) -> bool {
        [
            &self.left_to_bottom,
            &self.right_to_bottom,
            &self.top_to_left,
            &self.top_to_right,
        ]
        .iter()
        .all(|m| m.is_surjective())
    }
}

/// The three correctness conditions, each with its first counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectnessReport {
    /// Projecting a left element to `right` through `top` equals its
    /// projection to `bottom`; witness is a left element.
    pub through_top_to_right: Option<Vec<String>>,
    /// The mirror condition; witness is a right element.
    pub through_top_to_left: Option<Vec<String>>,
    /// Elements with equal projections to `bottom` are compatible in `top`;
    /// witness is a (left, right) pair.
    pub compatibility: Option<(Vec<String>, Vec<String>)>,
}

impl CorrectnessReport {
    pub fn conditions(&self) -> [bool; 3] {
        [
            self.through_top_to_right.is_none(),
            self.through_top_to_left.is_none(),
            self.compatibility.is_none(),
        ]
    }

    pub fn agree(&self) -> bool {
        let c = self.conditions();
        c[0] == c[1] && c[1] == c[2]
    }

    /// The common value of the three conditions, or `None` if they disagree.
    pub fn verdict(&self) -> Option<bool> {
        self.agree().then(|| self.conditions()[0])
    }

    pub fn is_correct(&self) -> bool {
        self.verdict() == Some(true)
    }
}

/// First atom `a` of `side` where projecting through `top` onto `other`
/// differs from projecting to `bottom`. Both sides are join-preserving in
/// `a`, so checking atoms decides the condition for all elements.
fn projection_condition(
    side_to_bottom: &AtomMap,
    other_to_bottom: &AtomMap,
    top_to_side: &AtomMap,
    top_to_other: &AtomMap,
) -> Option<Element> {
    let n = side_to_bottom.source().len();
    (0..n).map(|a| Element::atom(n, a)).find(|a| {
        let through_top = project(top_to_other, &embed(top_to_side, a).unwrap()).unwrap();
        let through_bottom = embed(other_to_bottom, &project(side_to_bottom, a).unwrap()).unwrap();
        through_top != through_bottom
    })
}

/// Pairs examined by the literal compatibility check, in closed form.
fn compatibility_pairs(sq: &EmbeddingSquare) -> f64 {
    let fibre = |m: &AtomMap, b: usize| m.fibre(b).count() as i32;
    (0..sq.bottom().len())
        .map(|b| {
            let l = 2f64.powi(fibre(&sq.left_to_bottom, b)) - 1.0;
            let r = 2f64.powi(fibre(&sq.right_to_bottom, b)) - 1.0;
            1.0 + l * r
        })
        .product::<f64>()
        - 1.0
}

const LITERAL_COMPATIBILITY_LIMIT: f64 = 4.0e6;

fn compatibility_condition(sq: &EmbeddingSquare) -> Option<(Element, Element)> {
    if compatibility_pairs(sq) <= LITERAL_COMPATIBILITY_LIMIT
        && sq.left().len() < 24
        && sq.right().len() < 24
    {
        compatibility_literal(sq)
    } else {
        compatibility_by_transversals(sq)
    }
}

/// Every pair of nonzero elements with equal projections, bucketed by the
/// common projection.
fn compatibility_literal(sq: &EmbeddingSquare) -> Option<(Element, Element)> {
    let bucket = |m: &AtomMap| {
        let mut out: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
        for a in Element::all(m.source().len()).filter(|a| !a.is_zero()) {
            out.entry(project(m, &a).unwrap()).or_default().push(a);
        }
        out
    };
    let left = bucket(&sq.left_to_bottom);
    let right = bucket(&sq.right_to_bottom);
    for (c, ls) in &left {
        let Some(rs) = right.get(c) else { continue };
        for a0 in ls {
            let e0 = embed(&sq.top_to_left, a0).unwrap();
            for a1 in rs {
                if !e0.compatible(&embed(&sq.top_to_right, a1).unwrap()) {
                    return Some((a0.clone(), a1.clone()));
                }
            }
        }
    }
    None
}

/// Shrinking both elements to one atom over each bottom atom keeps the
/// projections equal and the embeddings disjoint, so a counterexample exists
/// iff one exists between two atoms over the same bottom atom.
fn compatibility_by_transversals(sq: &EmbeddingSquare) -> Option<(Element, Element)> {
    let (nl, nr) = (sq.left().len(), sq.right().len());
    for x in 0..nl {
        for y in 0..nr {
            if sq.left_to_bottom.apply(x) != sq.right_to_bottom.apply(y) {
                continue;
            }
            let over_both = (0..sq.top().len())
                .any(|t| sq.top_to_left.apply(t) == x && sq.top_to_right.apply(t) == y);
            if !over_both {
                return Some((Element::atom(nl, x), Element::atom(nr, y)));
            }
        }
    }
    None
}

/// Evaluates the three correctness conditions independently.
pub fn check_correct(sq: &EmbeddingSquare) -> Result<CorrectnessReport, DiagramError> {
    if !sq.all_complete() {
        return Err(DiagramError::Shape(
            "square edges must be complete embeddings",
        ));
    }
    let ids = |a: &FiniteBA, e: &Element| a.atom_ids(e);
    let c1 = projection_condition(
        &sq.left_to_bottom,
        &sq.right_to_bottom,
        &sq.top_to_left,
        &sq.top_to_right,
    );
    let c2 = projection_condition(
        &sq.right_to_bottom,
        &sq.left_to_bottom,
        &sq.top_to_right,
        &sq.top_to_left,
    );
    let c3 = compatibility_condition(sq);
    Ok(CorrectnessReport {
        through_top_to_right: c1.map(|e| ids(sq.left(), &e)),
        through_top_to_left: c2.map(|e| ids(sq.right(), &e)),
        compatibility: c3.map(|(a, b)| (ids(sq.left(), &a), ids(sq.right(), &b))),
    })
}

/// Elements of `top` lying in both embedded `left` and embedded `right`
/// that are not in embedded `bottom` (enumerated over `bottom`'s fibres).
pub fn intersection_excess(sq: &EmbeddingSquare) -> Option<Element> {
    let tl = &sq.top_to_left;
    let tr = &sq.top_to_right;
    let tb = sq.bottom_in_top();
    // An element in both images is a union of left fibres and of right
    // fibres; enumerate unions of left fibres.
    Element::all(sq.left().len())
        .map(|a| embed(tl, &a).unwrap())
        .find(|e| tr.in_image(e) && !tb.in_image(e))
}

/// A system of algebras over an almost-lattice with an atom map for every
/// comparable pair `lower <= upper`.
#[derive(Clone, Debug)]
pub struct BASystem {
    index: AlmostLattice,
    algebras: Vec<FiniteBA>,
    maps: BTreeMap<(usize, usize), AtomMap>,
}

impl BASystem {
    /// Checks shapes only: one algebra per index, a map for every strict
    /// comparable pair going from the upper algebra onto the lower one.
    /// Identities are filled in for the diagonal when absent.
    pub fn new(
        index: AlmostLattice,
        algebras: Vec<FiniteBA>,
        mut maps: BTreeMap<(usize, usize), AtomMap>,
    ) -> Result<Self, DiagramError> {
        let n = index.len();
        if algebras.len() != n {
            return Err(DiagramError::AlgebraCount {
                expected: n,
                found: algebras.len(),
            });
        }
        let name = |k: usize| index.id(k).to_string();
        for &(lo, hi) in maps.keys() {
            if !index.leq(lo, hi) {
                return Err(DiagramError::Incomparable {
                    lower: name(lo),
                    upper: name(hi),
                });
            }
        }
        for (i, a) in algebras.iter().enumerate() {
            maps.entry((i, i)).or_insert_with(|| AtomMap::identity(a));
        }
        for (lo, hi) in index.poset().comparable_pairs() {
            let m = maps
                .get(&(lo, hi))
                .ok_or_else(|| DiagramError::MissingMap {
                    lower: name(lo),
                    upper: name(hi),
                })?;
            if *m.source() != algebras[hi] || *m.target() != algebras[lo] {
                return Err(DiagramError::MapShape {
                    lower: name(lo),
                    upper: name(hi),
                });
            }
        }
        Ok(Self {
            index,
            algebras,
            maps,
        })
    }

    pub fn index(&self) -> &AlmostLattice {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.algebras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.algebras.is_empty()
    }

    pub fn algebra(&self, i: usize) -> &FiniteBA {
        &self.algebras[i]
    }

    pub fn algebras(&self) -> &[FiniteBA] {
        &self.algebras
    }

    /// The map from the atoms of `A_upper` onto those of `A_lower`.
    pub fn map(&self, lower: usize, upper: usize) -> &AtomMap {
        &self.maps[&(lower, upper)]
    }

    pub fn maps(&self) -> &BTreeMap<(usize, usize), AtomMap> {
        &self.maps
    }

    /// `∏ |atoms(A_i)|`, the size of the full product of the dual spaces.
    pub fn product_size(&self) -> u128 {
        self.algebras.iter().map(|a| a.len() as u128).product()
    }

    /// The square `(i ∧ j, i, j, i ∨ j)` when the join exists.
    pub fn square(&self, i: usize, j: usize) -> Option<Result<EmbeddingSquare, DiagramError>> {
        let top = self.index.join(i, j)?;
        let bottom = self.index.meet(i, j);
        Some(EmbeddingSquare::new(
            self.map(bottom, i).clone(),
            self.map(bottom, j).clone(),
            self.map(i, top).clone(),
            self.map(j, top).clone(),
        ))
    }

    /// Sub-system on a closed subset; returns it with the original indices.
    pub fn restrict(&self, set: &ClosedSet) -> (BASystem, Vec<usize>) {
        let (index, members) = self.index.restrict(set);
        let algebras = members.iter().map(|&k| self.algebras[k].clone()).collect();
        let mut maps = BTreeMap::new();
        for (x, &a) in members.iter().enumerate() {
            for (y, &b) in members.iter().enumerate() {
                if self.index.leq(a, b) {
                    maps.insert((x, y), self.map(a, b).clone());
                }
            }
        }
        let sys = BASystem::new(index, algebras, maps).expect("restriction keeps shapes");
        (sys, members)
    }

    /// The system extended by a new top index carrying `top`, with
    /// `to_index[i]` mapping `top`'s atoms onto `A_i`'s. Only valid when the
    /// extended index is again an almost-lattice.
    pub fn extend_with_top(
        &self,
        top: FiniteBA,
        to_index: &[AtomMap],
    ) -> Result<BASystem, DiagramError> {
        let ext = add_top(self.index.poset())?;
        let index = AlmostLattice::from_poset(ext.poset)?;
        let n = self.len();
        let mut algebras = self.algebras.clone();
        algebras.push(top.clone());
        let mut maps = self.maps.clone();
        for (i, m) in to_index.iter().enumerate().take(n) {
            maps.insert((i, n), m.clone());
        }
        maps.insert((n, n), AtomMap::identity(&top));
        BASystem::new(index, algebras, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemViolation {
    /// The index fails an almost-lattice axiom.
    Index {
        axioms: Vec<AxiomViolation>,
    },
    NotIdentity {
        index: String,
    },
    NotSurjective {
        lower: String,
        upper: String,
        missing_atom: String,
    },
    NotCommuting {
        lower: String,
        middle: String,
        upper: String,
        atom: String,
    },
    IncorrectSquare {
        left: String,
        right: String,
        report: CorrectnessReport,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SystemReport {
    pub violations: Vec<SystemViolation>,
    pub squares_checked: usize,
}

impl SystemReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Identity, surjectivity, commutativity of every map and correctness of
/// every join square. Square checks are skipped while any structural check
/// fails.
pub fn validate_system(s: &BASystem) -> SystemReport {
    let l = s.index();
    let n = s.len();
    let name = |k: usize| l.id(k).to_string();
    let mut violations = Vec::new();
    for i in 0..n {
        if !s.map(i, i).is_identity() {
            violations.push(SystemViolation::NotIdentity { index: name(i) });
        }
    }
    for (&(lo, hi), m) in s.maps() {
        if let Some(t) = m.missing_target() {
            violations.push(SystemViolation::NotSurjective {
                lower: name(lo),
                upper: name(hi),
                missing_atom: m.target().atom_id(t).to_string(),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !l.leq(i, j) {
                continue;
            }
            for k in 0..n {
                if k == j || !l.leq(j, k) {
                    continue;
                }
                let direct = s.map(i, k);
                let via = compose(s.map(i, j), s.map(j, k)).expect("shapes checked");
                if let Some(t) =
                    (0..direct.source().len()).find(|&t| direct.apply(t) != via.apply(t))
                {
                    violations.push(SystemViolation::NotCommuting {
                        lower: name(i),
                        middle: name(j),
                        upper: name(k),
                        atom: s.algebra(k).atom_id(t).to_string(),
                    });
                }
            }
        }
    }
    if !violations.is_empty() {
        return SystemReport {
            violations,
            squares_checked: 0,
        };
    }
    let squares = l.join_squares();
    let reports = map_squares(&squares, |&(i, j)| {
        let sq = s
            .square(i, j)
            .expect("join exists")
            .expect("structure checked");
        check_correct(&sq).expect("complete embeddings")
    });
    for (&(i, j), report) in squares.iter().zip(reports) {
        if !report.is_correct() {
            violations.push(SystemViolation::IncorrectSquare {
                left: name(i),
                right: name(j),
                report,
            });
        }
    }
    SystemReport {
        violations,
        squares_checked: squares.len(),
    }
}

#[cfg(feature = "parallel")]
fn map_squares<T, F>(squares: &[(usize, usize)], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&(usize, usize)) -> T + Sync + Send,
{
    use rayon::prelude::*;
    squares.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_squares<T, F>(squares: &[(usize, usize)], f: F) -> Vec<T>
where
    F: Fn(&(usize, usize)) -> T,
{
    squares.iter().map(f).collect()
}

/// The direct limit over a finite directed subset: the algebra at its
/// maximum with the system's maps as limit embeddings.
#[derive(Clone, Debug)]
pub struct DirectLimit {
    pub top: usize,
    pub algebra: FiniteBA,
    /// `(k, map from the limit's atoms onto A_k)` for every `k` in the subset.
    pub maps: Vec<(usize, AtomMap)>,
}

pub fn direct_limit(s: &BASystem, subset: &BTreeSet<usize>) -> Result<DirectLimit, DiagramError> {
    let l = s.index();
    let top = subset
        .iter()
        .copied()
        .find(|&m| subset.iter().all(|&k| l.leq(k, m)))
        .ok_or(DiagramError::NotDirected)?;
    Ok(DirectLimit {
        top,
        algebra: s.algebra(top).clone(),
        maps: subset.iter().map(|&k| (k, s.map(k, top).clone())).collect(),
    })
}

//! Finite Boolean algebras as atom universes.
//!
//! Every unital injective homomorphism between finite Boolean algebras is
//! complete, and it is dual to a surjection between the atom sets. An
//! [`AtomMap`] from the larger algebra's atoms onto the smaller one's is
//! therefore the whole data of a complete embedding: [`embed`] is the
//! preimage and [`project`] (the projection to the subalgebra) is the image.

pub mod completion;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use completion::{
    regular_open_completion, separative_quotient, Completion, FinitePreorder, Preorder,
    SeparativeQuotient,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaError {
    #[error("a Boolean algebra needs at least one atom")]
    NoAtoms,
    #[error("duplicate atom id `{0}`")]
    DuplicateAtom(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("element lives over {found} atoms, expected {expected}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("atom map is not total: source atom `{0}` has no image")]
    Partial(String),
    #[error("atom map is not surjective: target atom `{0}` has no preimage")]
    NotSurjective(String),
    #[error("maps do not compose: intermediate algebras differ")]
    CompositionMismatch,
    #[error("preorder is empty")]
    EmptyPreorder,
    #[error("relation is not a preorder: {0}")]
    NotAPreorder(String),
}

/// An element of a finite Boolean algebra: the set of atoms below it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(FixedBitSet);

impl Element {
    pub fn zero(universe: usize) -> Self {
        Element(FixedBitSet::with_capacity(universe))
    }

    pub fn one(universe: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(universe);
        b.insert_range(..);
        Element(b)
    }

    pub fn atom(universe: usize, a: usize) -> Self {
        let mut e = Self::zero(universe);
        e.0.insert(a);
        e
    }

    pub fn from_atoms(universe: usize, atoms: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::zero(universe);
        for a in atoms {
            e.0.insert(a);
        }
        e
    }

    /// Element whose atoms are the set bits of `mask` (universe <= 64).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        Self::from_atoms(universe, (0..universe).filter(|k| mask >> k & 1 == 1))
    }

    /// Every element of the algebra with `universe` atoms, in mask order.
    pub fn all(universe: usize) -> impl Iterator<Item = Element> {
        assert!(
            universe < 32,
            "exhaustive enumeration over {universe} atoms"
        );
        (0u64..1 << universe).map(move |m| Element::from_mask(universe, m))
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: usize) {
        self.0.insert(atom);
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_full()
    }

    pub fn is_atom(&self) -> bool {
        self.count() == 1
    }

    pub fn leq(&self, other: &Element) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn compatible(&self, other: &Element) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn join(&self, other: &Element) -> Element {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        Element(b)
    }

    pub fn meet(&self, other: &Element) -> Element {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        Element(b)
    }

    pub fn complement(&self) -> Element {
        let mut b = self.0.clone();
        b.toggle_range(..);
        Element(b)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

/// A finite Boolean algebra, given by its atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteBA {
    atoms: Vec<String>,
}

impl FiniteBA {
    pub fn new<S: Into<String>>(atoms: impl IntoIterator<Item = S>) -> Result<Self, BaError> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(BaError::NoAtoms);
        }
        let mut seen = HashMap::new();
        for (k, a) in atoms.iter().enumerate() {
            if seen.insert(a.as_str(), k).is_some() {
                return Err(BaError::DuplicateAtom(a.clone()));
            }
        }
        Ok(Self { atoms })
    }

    /// The two-element algebra `{0, 1}`.
    pub fn trivial() -> Self {
        Self {
            atoms: vec!["*".to_string()],
        }
    }

    /// Algebra with atoms `prefix0 .. prefix{n-1}`.
    pub fn with_atoms(prefix: &str, n: usize) -> Self {
        Self::new((0..n).map(|k| format!("{prefix}{k}"))).expect("n > 0 distinct atoms")
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_id(&self, a: usize) -> &str {
        &self.atoms[a]
    }

    pub fn atom_index(&self, id: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == id)
    }

    pub fn zero(&self) -> Element {
        Element::zero(self.len())
    }

    pub fn one(&self) -> Element {
        Element::one(self.len())
    }

    pub fn element<S: AsRef<str>>(&self, ids: &[S]) -> Result<Element, BaError> {
        let mut e = self.zero();
        for id in ids {
            let a = self
                .atom_index(id.as_ref())
                .ok_or_else(|| BaError::UnknownAtom(id.as_ref().to_string()))?;
            e.insert(a);
        }
        Ok(e)
    }

    /// Sorted atom ids of an element, the serialized form.
    pub fn atom_ids(&self, e: &Element) -> Vec<String> {
        let mut ids: Vec<String> = e.atoms().map(|a| self.atoms[a].clone()).collect();
        ids.sort();
        ids
    }

    fn check(&self, e: &Element) -> Result<(), BaError> {
        if e.universe() == self.len() {
            Ok(())
        } else {
            Err(BaError::UniverseMismatch {
                expected: self.len(),
                found: e.universe(),
            })
        }
    }
}

/// A function from the atoms of `source` (the larger algebra) to the atoms of
/// `target` (the smaller one). It represents a complete embedding of
/// `target` into `source` exactly when it is surjective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomMap {
    source: FiniteBA,
    target: FiniteBA,
    map: Vec<usize>,
}

impl AtomMap {
    /// Any total function; surjectivity is checked separately.
    pub fn from_fn(source: FiniteBA, target: FiniteBA, map: Vec<usize>) -> Self {
        assert_eq!(map.len(), source.len(), "one image per source atom");
        assert!(
            map.iter().all(|&t| t < target.len()),
            "image outside target"
        );
        Self {
            source,
            target,
            map,
        }
    }

    /// A surjection, i.e. a complete embedding.
    pub fn surjection(
        source: FiniteBA,
        target: FiniteBA,
        map: Vec<usize>,
    ) -> Result<Self, BaError> {
        let m = Self::from_fn(source, target, map);
        match m.missing_target() {
            Some(t) => Err(BaError::NotSurjective(m.target.atoms[t].clone())),
            None => Ok(m),
        }
    }

    /// Builds a map from atom-id pairs `source_atom -> target_atom`.
    pub fn from_ids<S: AsRef<str>>(
        source: FiniteBA,
        target: FiniteBA,
        pairs: &[(S, S)],
    ) -> Result<Self, BaError> {
        let mut map = vec![usize::MAX; source.len()];
        for (s, t) in pairs {
            let si = source
                .atom_index(s.as_ref())
                .ok_or_else(|| BaError::UnknownAtom(s.as_ref().to_string()))?;
            let ti = target
                .atom_index(t.as_ref())
                .ok_or_else(|| BaError::UnknownAtom(t.as_ref().to_string()))?;
            map[si] = ti;
        }
        if let Some(k) = map.iter().position(|&t| t == usize::MAX) {
            return Err(BaError::Partial(source.atoms[k].clone()));
        }
        Ok(Self {
            source,
            target,
            map,
        })
    }

    pub fn identity(a: &FiniteBA) -> Self {
        Self {
            source: a.clone(),
            target: a.clone(),
            map: (0..a.len()).collect(),
        }
    }

    pub fn source(&self) -> &FiniteBA {
        &self.source
    }

    pub fn target(&self) -> &FiniteBA {
        &self.target
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, source_atom: usize) -> usize {
        self.map[source_atom]
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().enumerate().all(|(k, &t)| k == t)
    }

    /// First target atom without a preimage.
    pub fn missing_target(&self) -> Option<usize> {
        let mut hit = vec![false; self.target.len()];
        for &t in &self.map {
            hit[t] = true;
        }
        hit.iter().position(|h| !h)
    }

    pub fn is_surjective(&self) -> bool {
        self.missing_target().is_none()
    }

    /// The fibre of a target atom: the atoms of `source` below it.
    pub fn fibre(&self, target_atom: usize) -> Element {
        Element::from_atoms(
            self.source.len(),
            self.map
                .iter()
                .enumerate()
                .filter(|(_, &t)| t == target_atom)
                .map(|(s, _)| s),
        )
    }

    /// Whether a source element is (the image of) a target element, i.e. a
    /// union of fibres.
    pub fn in_image(&self, b: &Element) -> bool {
        embed_unchecked(self, &project_unchecked(self, b)) == *b
    }

    /// Serializable `source atom id -> target atom id` pairs.
    pub fn id_pairs(&self) -> Vec<(String, String)> {
        self.map
            .iter()
            .enumerate()
            .map(|(s, &t)| (self.source.atoms[s].clone(), self.target.atoms[t].clone()))
            .collect()
    }
}

fn embed_unchecked(e: &AtomMap, a: &Element) -> Element {
    Element::from_atoms(
        e.source.len(),
        e.map
            .iter()
            .enumerate()
            .filter(|(_, &t)| a.contains(t))
            .map(|(s, _)| s),
    )
}

fn project_unchecked(e: &AtomMap, b: &Element) -> Element {
    Element::from_atoms(e.target.len(), b.atoms().map(|s| e.map[s]))
}

/// The embedding of the smaller algebra into the larger: preimage of atoms.
pub fn embed(e: &AtomMap, a: &Element) -> Result<Element, BaError> {
    e.target.check(a)?;
    Ok(embed_unchecked(e, a))
}

/// The projection onto the smaller algebra: the least element of the
/// subalgebra above `b`, computed as the image of `b`'s atoms.
pub fn project(e: &AtomMap, b: &Element) -> Result<Element, BaError> {
    e.source.check(b)?;
    Ok(project_unchecked(e, b))
}

/// `outer ∘ inner`: `inner` maps `A_k` onto `A_j`, `outer` maps `A_j` onto `A_i`.
pub fn compose(outer: &AtomMap, inner: &AtomMap) -> Result<AtomMap, BaError> {
    if inner.target != outer.source {
        return Err(BaError::CompositionMismatch);
    }
    Ok(AtomMap {
        source: inner.source.clone(),
        target: outer.target.clone(),
        map: inner.map.iter().map(|&j| outer.map[j]).collect(),
    })
}

pub fn pair_id(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// The product algebra with the two coordinate projections.
pub struct FreeProduct {
    pub algebra: FiniteBA,
    pub left: AtomMap,
    pub right: AtomMap,
}

/// Atoms are the pairs `(a, b)`, ordered lexicographically by the factors'
/// atom order.
pub fn free_product(a: &FiniteBA, b: &FiniteBA) -> FreeProduct {
    let mut atoms = Vec::with_capacity(a.len() * b.len());
    let mut lmap = Vec::with_capacity(atoms.capacity());
    let mut rmap = Vec::with_capacity(atoms.capacity());
    for (x, xa) in a.atoms().iter().enumerate() {
        for (y, yb) in b.atoms().iter().enumerate() {
            atoms.push(pair_id(xa, yb));
            lmap.push(x);
            rmap.push(y);
        }
    }
    let algebra = FiniteBA::new(atoms).expect("distinct pairs");
    FreeProduct {
        left: AtomMap {
            source: algebra.clone(),
            target: a.clone(),
            map: lmap,
        },
        right: AtomMap {
            source: algebra.clone(),
            target: b.clone(),
            map: rmap,
        },
        algebra,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_onto_two() -> AtomMap {
        let src = FiniteBA::new(["b1", "b2", "b3"]).unwrap();
        let tgt = FiniteBA::new(["a1", "a2"]).unwrap();
        AtomMap::from_ids(src, tgt, &[("b1", "a1"), ("b2", "a1"), ("b3", "a2")]).unwrap()
    }

    /// `∏ { a in target : embed(a) >= b }`, by enumerating the target.
    fn infimum_projection(e: &AtomMap, b: &Element) -> Element {
        Element::all(e.target().len())
            .filter(|a| b.leq(&embed(e, a).unwrap()))
            .fold(e.target().one(), |acc, a| acc.meet(&a))
    }

    #[test]
    fn embed_preimage() {
        let e = three_onto_two();
        let a1 = e.target().element(&["a1"]).unwrap();
        assert_eq!(e.source().atom_ids(&embed(&e, &a1).unwrap()), ["b1", "b2"]);
        assert_eq!(embed(&e, &e.target().one()).unwrap(), e.source().one());
        assert_eq!(embed(&e, &e.target().zero()).unwrap(), e.source().zero());
    }

    #[test]
    fn project_image_matches_infimum() {
        let e = three_onto_two();
        let b1 = e.source().element(&["b1"]).unwrap();
        let p = project(&e, &b1).unwrap();
        assert_eq!(e.target().atom_ids(&p), ["a1"]);
        assert_eq!(p, infimum_projection(&e, &b1));
        assert_eq!(project(&e, &e.source().one()).unwrap(), e.target().one());
    }

    #[test]
    fn project_to_trivial_is_one_on_nonzero() {
        let src = FiniteBA::with_atoms("s", 3);
        let e = AtomMap::surjection(src.clone(), FiniteBA::trivial(), vec![0; 3]).unwrap();
        for b in Element::all(3) {
            let p = project(&e, &b).unwrap();
            assert_eq!(p.is_one(), !b.is_zero());
        }
    }

    #[test]
    fn universe_mismatch_is_rejected() {
        let e = three_onto_two();
        assert_eq!(
            embed(&e, &Element::zero(3)),
            Err(BaError::UniverseMismatch {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            project(&e, &Element::zero(2)),
            Err(BaError::UniverseMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn surjectivity_is_enforced() {
        let src = FiniteBA::with_atoms("s", 2);
        let tgt = FiniteBA::with_atoms("t", 2);
        assert_eq!(
            AtomMap::surjection(src, tgt, vec![0, 0]),
            Err(BaError::NotSurjective("t1".into()))
        );
    }

    #[test]
    fn compose_with_identity_and_mismatch() {
        let e = three_onto_two();
        let id = AtomMap::identity(e.source());
        assert_eq!(compose(&e, &id).unwrap(), e);
        assert_eq!(compose(&AtomMap::identity(e.target()), &e).unwrap(), e);
        assert_eq!(compose(&e, &e), Err(BaError::CompositionMismatch));
    }

    #[test]
    fn free_product_shape() {
        let a = FiniteBA::with_atoms("a", 2);
        let b = FiniteBA::with_atoms("b", 3);
        let fp = free_product(&a, &b);
        assert_eq!(fp.algebra.len(), 6);
        assert!(fp.left.is_surjective() && fp.right.is_surjective());
        assert_eq!(fp.algebra.atom_id(0), "(a0,b0)");
        let pair = fp.algebra.element(&["(a1,b2)"]).unwrap();
        assert_eq!(a.atom_ids(&project(&fp.left, &pair).unwrap()), ["a1"]);
        assert_eq!(b.atom_ids(&project(&fp.right, &pair).unwrap()), ["b2"]);

        let unit = free_product(&a, &FiniteBA::trivial());
        assert_eq!(unit.algebra.len(), a.len());
        assert!(unit
            .left
            .as_slice()
            .iter()
            .enumerate()
            .all(|(k, &t)| k == t));
    }

    /// Surjections from `n` atoms onto `1..=n` atoms.
    fn arb_surjection(max_src: usize) -> impl Strategy<Value = AtomMap> {
        (1..=max_src)
            .prop_flat_map(|n| (Just(n), 1..=n))
            .prop_flat_map(|(n, m)| {
                (
                    Just(n),
                    Just(m),
                    Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                )
            })
            .prop_flat_map(|(n, m, perm)| {
                (
                    Just(n),
                    Just(m),
                    Just(perm),
                    proptest::collection::vec(0..m, n),
                )
            })
            .prop_map(|(n, m, perm, free)| {
                // the first m atoms in `perm` hit every target atom once
                let mut map = free;
                for (t, &s) in perm.iter().take(m).enumerate() {
                    map[s] = t;
                }
                AtomMap::surjection(
                    FiniteBA::with_atoms("s", n),
                    FiniteBA::with_atoms("t", m),
                    map,
                )
                .unwrap()
            })
    }

    fn arb_element(n: usize) -> impl Strategy<Value = Element> {
        proptest::collection::vec(any::<bool>(), n)
            .prop_map(move |bits| Element::from_atoms(n, (0..n).filter(|&k| bits[k])))
    }

    proptest! {
        #[test]
        fn embed_project_adjunction((e, b, a) in arb_surjection(6).prop_flat_map(|e| {
            let (n, m) = (e.source().len(), e.target().len());
            (Just(e), arb_element(n), arb_element(m))
        })) {
            prop_assert!(b.leq(&embed(&e, &project(&e, &b).unwrap()).unwrap()));
            prop_assert_eq!(project(&e, &embed(&e, &a).unwrap()).unwrap(), a);
            prop_assert_eq!(project(&e, &b).unwrap().is_zero(), b.is_zero());
        }

        #[test]
        fn projections_compose((outer, inner, b) in arb_surjection(4).prop_flat_map(|outer| {
            let j = outer.source().len();
            (Just(outer), 0usize..3).prop_map(move |(outer, extra)| {
                let k = j + extra;
                let map: Vec<usize> = (0..k).map(|s| s % j).collect();
                let inner = AtomMap::surjection(
                    FiniteBA::with_atoms("k", k), outer.source().clone(), map).unwrap();
                (outer, inner)
            })
        }).prop_flat_map(|(o, i)| { let n = i.source().len(); (Just(o), Just(i), arb_element(n)) })) {
            let c = compose(&outer, &inner).unwrap();
            prop_assert!(c.is_surjective());
            prop_assert_eq!(
                project(&c, &b).unwrap(),
                project(&outer, &project(&inner, &b).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn exhaustive_homomorphism_laws_up_to_four_atoms() {
        for n in 1..=4usize {
            for m in 1..=n {
                // every surjection [n] -> [m]
                for code in 0..m.pow(n as u32) {
                    let map: Vec<usize> = (0..n).map(|k| code / m.pow(k as u32) % m).collect();
                    let Ok(e) = AtomMap::surjection(
                        FiniteBA::with_atoms("s", n),
                        FiniteBA::with_atoms("t", m),
                        map,
                    ) else {
                        continue;
                    };
                    for x in Element::all(m) {
                        let ex = embed(&e, &x).unwrap();
                        assert_eq!(embed(&e, &x.complement()).unwrap(), ex.complement());
                        for y in Element::all(m) {
                            let ey = embed(&e, &y).unwrap();
                            assert_eq!(embed(&e, &x.join(&y)).unwrap(), ex.join(&ey));
                            assert_eq!(embed(&e, &x.meet(&y)).unwrap(), ex.meet(&ey));
                        }
                    }
                    for b in Element::all(n) {
                        let pb = project(&e, &b).unwrap();
                        assert_eq!(pb, infimum_projection(&e, &b));
                        assert_eq!(pb.is_zero(), b.is_zero());
                        for c in Element::all(n) {
                            let pc = project(&e, &c).unwrap();
                            assert_eq!(project(&e, &b.join(&c)).unwrap(), pb.join(&pc));
                            if b.leq(&c) {
                                assert!(pb.leq(&pc));
                            }
                        }
                    }
                }
            }
        }
    }
}

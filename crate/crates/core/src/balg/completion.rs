//! Separative quotients and regular-open completions of finite preorders.
//!
//! In a finite preorder every element has a minimal element below it, and a
//! down-closed set `U` is regular open (for the topology of down-sets) iff
//! it contains every `p` all of whose minimal lower bounds lie in `U`. The
//! regular-open algebra is therefore the powerset of the classes of minimal
//! elements, and the canonical dense map sends `p` to the classes below it.

use super::{BaError, Element, FiniteBA};
use crate::order::FinitePoset;

/// A preorder on `0..size()`; `leq(a, b)` reads "a is stronger than b".
pub trait Preorder {
    fn size(&self) -> usize;
    fn leq(&self, a: usize, b: usize) -> bool;

    /// Display name of an element, used for atom ids of the completion.
    fn label(&self, a: usize) -> String {
        a.to_string()
    }
}

/// Preorder given extensionally by a relation matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePreorder {
    ids: Vec<String>,
    leq: Vec<bool>,
}

impl FinitePreorder {
    /// Adds reflexive pairs; rejects non-transitive relations.
    pub fn new(ids: Vec<String>, mut leq: Vec<bool>) -> Result<Self, BaError> {
        let n = ids.len();
        assert_eq!(leq.len(), n * n, "relation matrix has wrong size");
        for a in 0..n {
            leq[a * n + a] = true;
        }
        for a in 0..n {
            for b in 0..n {
                if !leq[a * n + b] {
                    continue;
                }
                for c in 0..n {
                    if leq[b * n + c] && !leq[a * n + c] {
                        return Err(BaError::NotAPreorder(format!(
                            "{} <= {} <= {} but not {} <= {}",
                            ids[a], ids[b], ids[c], ids[a], ids[c]
                        )));
                    }
                }
            }
        }
        Ok(Self { ids, leq })
    }

    pub fn from_poset(p: &FinitePoset) -> Self {
        let n = p.len();
        let leq = (0..n * n).map(|k| p.leq(k / n, k % n)).collect();
        Self {
            ids: p.ids().to_vec(),
            leq,
        }
    }

    /// Materializes any preorder.
    pub fn from_preorder<P: Preorder + ?Sized>(p: &P) -> Self {
        let n = p.size();
        Self {
            ids: (0..n).map(|a| p.label(a)).collect(),
            leq: (0..n * n).map(|k| p.leq(k / n, k % n)).collect(),
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

impl Preorder for FinitePreorder {
    fn size(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.ids.len() + b]
    }

    fn label(&self, a: usize) -> String {
        self.ids[a].clone()
    }
}

/// Minimal elements grouped into equivalence classes (mutually `<=`).
struct MinimalClasses {
    /// Class members, each sorted; classes ordered by least member.
    classes: Vec<Vec<usize>>,
    /// For each element, the classes whose members lie below it.
    below: Vec<Vec<usize>>,
}

fn minimal_classes<P: Preorder + ?Sized>(p: &P) -> MinimalClasses {
    let n = p.size();
    let minimal: Vec<usize> = (0..n)
        .filter(|&m| (0..n).all(|r| !p.leq(r, m) || p.leq(m, r)))
        .collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &m in &minimal {
        match classes
            .iter_mut()
            .find(|c| p.leq(c[0], m) && p.leq(m, c[0]))
        {
            Some(c) => c.push(m),
            None => classes.push(vec![m]),
        }
    }
    let below = (0..n)
        .map(|a| {
            (0..classes.len())
                .filter(|&c| p.leq(classes[c][0], a))
                .collect()
        })
        .collect();
    MinimalClasses { classes, below }
}

/// Quotient identifying elements with the same minimal elements below them.
#[derive(Clone, Debug)]
pub struct SeparativeQuotient {
    /// Members of each class, sorted; classes ordered by least member.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    /// The quotient order: inclusion of minimal-class sets.
    pub poset: FinitePoset,
}

pub fn separative_quotient<P: Preorder + ?Sized>(p: &P) -> SeparativeQuotient {
    let mc = minimal_classes(p);
    let n = p.size();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; n];
    for (a, slot) in class_of.iter_mut().enumerate() {
        match classes.iter().position(|c| mc.below[c[0]] == mc.below[a]) {
            Some(k) => {
                classes[k].push(a);
                *slot = k;
            }
            None => {
                *slot = classes.len();
                classes.push(vec![a]);
            }
        }
    }
    let m = classes.len();
    let subset = |x: &[usize], y: &[usize]| x.iter().all(|c| y.contains(c));
    let leq = (0..m * m)
        .map(|k| subset(&mc.below[classes[k / m][0]], &mc.below[classes[k % m][0]]))
        .collect();
    let ids = classes
        .iter()
        .map(|c| format!("[{}]", p.label(c[0])))
        .collect();
    let poset = FinitePoset::from_matrix(ids, leq).expect("inclusion order is a partial order");
    SeparativeQuotient {
        classes,
        class_of,
        poset,
    }
}

/// The regular-open algebra of a preorder with its canonical dense map.
#[derive(Clone, Debug)]
pub struct Completion {
    pub algebra: FiniteBA,
    /// Atom `k` is the class `minimal_classes[k]` of minimal elements.
    pub minimal_classes: Vec<Vec<usize>>,
    /// `dense[p]`: the atoms below the image of `p`.
    pub dense: Vec<Element>,
}

impl Completion {
    pub fn image(&self, p: usize) -> &Element {
        &self.dense[p]
    }
}

pub fn regular_open_completion<P: Preorder + ?Sized>(p: &P) -> Result<Completion, BaError> {
    if p.size() == 0 {
        return Err(BaError::EmptyPreorder);
    }
    let mc = minimal_classes(p);
    let k = mc.classes.len();
    let algebra = FiniteBA::new(mc.classes.iter().map(|c| p.label(c[0])))
        .or_else(|_| FiniteBA::new((0..k).map(|c| format!("m{c}"))))?;
    let dense = mc
        .below
        .iter()
        .map(|cs| Element::from_atoms(k, cs.iter().copied()))
        .collect();
    Ok(Completion {
        algebra,
        minimal_classes: mc.classes,
        dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{validate_poset, FinitePoset};

    fn preorder(n: usize, pairs: &[(usize, usize)]) -> FinitePreorder {
        let mut leq = vec![false; n * n];
        for &(a, b) in pairs {
            leq[a * n + b] = true;
        }
        FinitePreorder::new((0..n).map(|k| format!("p{k}")).collect(), leq).unwrap()
    }

    #[test]
    fn antichain_has_one_atom_per_element() {
        let c = regular_open_completion(&preorder(4, &[])).unwrap();
        assert_eq!(c.algebra.len(), 4);
        for p in 0..4 {
            assert_eq!(c.image(p).atoms().collect::<Vec<_>>(), vec![p]);
        }
    }

    #[test]
    fn chain_completes_to_two_element_algebra() {
        let c = regular_open_completion(&preorder(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_eq!(c.algebra.len(), 1);
        assert!(c.dense.iter().all(Element::is_one));
    }

    #[test]
    fn empty_preorder_is_rejected() {
        assert_eq!(
            regular_open_completion(&preorder(0, &[])).unwrap_err(),
            BaError::EmptyPreorder
        );
    }

    #[test]
    fn non_transitive_relation_is_rejected() {
        let leq = vec![true, true, false, false, true, true, false, false, true];
        assert!(matches!(
            FinitePreorder::new(vec!["a".into(), "b".into(), "c".into()], leq),
            Err(BaError::NotAPreorder(_))
        ));
    }

    #[test]
    fn separative_poset_has_identity_quotient() {
        // two atoms below a common top: already separative
        let p = preorder(3, &[(0, 2), (1, 2)]);
        let q = separative_quotient(&p);
        assert_eq!(q.classes, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn equivalent_copies_collapse() {
        // 1 and 2 sit above the same minimal element 0 only
        let p = preorder(3, &[(0, 1), (0, 2)]);
        let q = separative_quotient(&p);
        assert_eq!(q.classes, vec![vec![0, 1, 2]]);
        // mutually comparable copies
        let p = preorder(2, &[(0, 1), (1, 0)]);
        assert_eq!(separative_quotient(&p).classes, vec![vec![0, 1]]);
    }

    #[test]
    fn quotient_map_is_monotone_and_reflects_compatibility() {
        let p = preorder(5, &[(0, 2), (1, 2), (1, 3), (4, 3)]);
        let q = separative_quotient(&p);
        let compatible = |a: usize, b: usize| (0..5).any(|r| p.leq(r, a) && p.leq(r, b));
        let qcompatible =
            |a: usize, b: usize| (0..q.poset.len()).any(|r| q.poset.leq(r, a) && q.poset.leq(r, b));
        for a in 0..5 {
            for b in 0..5 {
                if p.leq(a, b) {
                    assert!(q.poset.leq(q.class_of[a], q.class_of[b]));
                }
                assert_eq!(compatible(a, b), qcompatible(q.class_of[a], q.class_of[b]));
            }
        }
    }

    #[test]
    fn nonzero_elements_of_an_algebra_complete_to_itself() {
        for n in 1..=4usize {
            let elems: Vec<Element> = Element::all(n).filter(|e| !e.is_zero()).collect();
            let m = elems.len();
            let leq = (0..m * m)
                .map(|k| elems[k / m].leq(&elems[k % m]))
                .collect();
            let ids = (0..m).map(|k| format!("e{k}")).collect();
            let c = regular_open_completion(&FinitePreorder::new(ids, leq).unwrap()).unwrap();
            assert_eq!(c.algebra.len(), n);
            // canonical map: atom class <-> singleton element, images are the atom sets
            let atom_of_class: Vec<usize> = c
                .minimal_classes
                .iter()
                .map(|cl| elems[cl[0]].atoms().next().unwrap())
                .collect();
            for (k, e) in elems.iter().enumerate() {
                let mapped: Vec<usize> = {
                    let mut v: Vec<usize> = c.image(k).atoms().map(|a| atom_of_class[a]).collect();
                    v.sort();
                    v
                };
                assert_eq!(mapped, e.atoms().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn from_poset_preserves_order() {
        let p: FinitePoset = validate_poset(&["a", "b"], &[("a", "b")]).unwrap();
        let q = FinitePreorder::from_poset(&p);
        assert!(q.leq(0, 1) && !q.leq(1, 0));
    }
}

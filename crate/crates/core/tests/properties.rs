use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use amalgam::amal::amalgamated_limit;
use amalgam::balg::{compose, embed, project, AtomMap, Element, FiniteBA};
use amalgam::diagram::{
    random_almost_lattice, random_coordinate_system, validate_system, GeneratorParams,
};
use amalgam::order::closure;
use amalgam::stone_topo::{dualize, extend_to_thread, PartialThread};

fn small_params() -> GeneratorParams {
    GeneratorParams {
        max_index_size: 5,
        max_fiber: 2,
        max_coordinates: 3,
        ..GeneratorParams::default()
    }
}

/// A surjection from `n` atoms onto `1..=n` atoms.
fn surjection() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (1usize..7).prop_flat_map(|n| {
        (1..=n).prop_flat_map(move |m| {
            proptest::collection::vec(0..m, n - m).prop_map(move |rest| {
                let mut f: Vec<usize> = (0..m).collect();
                f.extend(rest);
                (m, f)
            })
        })
    })
}

proptest! {
    #[test]
    fn element_laws(n in 1usize..10, a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (Element::from_mask(n, a), Element::from_mask(n, b));
        prop_assert_eq!(x.join(&y).complement(), x.complement().meet(&y.complement()));
        prop_assert!(x.meet(&y).leq(&x));
        prop_assert_eq!(x.complement().complement(), x.clone());
        prop_assert_eq!(x.compatible(&y), !x.meet(&y).is_zero());
    }

    #[test]
    fn embedding_and_projection((m, f) in surjection(), a in any::<u64>(), b in any::<u64>()) {
        let big = FiniteBA::with_atoms("t", f.len());
        let small = FiniteBA::with_atoms("s", m);
        let e = AtomMap::from_fn(big, small, f.clone());
        let x = Element::from_mask(m, a);
        let y = Element::from_mask(f.len(), b);
        // projection is a left inverse of the embedding
        prop_assert_eq!(project(&e, &embed(&e, &x).unwrap()).unwrap(), x.clone());
        prop_assert!(y.leq(&embed(&e, &project(&e, &y).unwrap()).unwrap()));
        // nonzero stays nonzero
        prop_assert_eq!(project(&e, &y).unwrap().is_zero(), y.is_zero());
        // adjunction
        prop_assert_eq!(project(&e, &y).unwrap().leq(&x), y.leq(&embed(&e, &x).unwrap()));
    }

    #[test]
    fn closure_is_a_closure_operator(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_almost_lattice(&mut rng, 6);
        let n = l.len();
        let pick = |mask: u64| (0..n).filter(move |k| mask >> k & 1 == 1);
        let s = closure(&l, pick(a));
        let t = closure(&l, pick(a | b));
        prop_assert!(pick(a).all(|k| s.contains(k)));
        let again = closure(&l, s.members().iter().copied());
        prop_assert_eq!(again.members(), s.members());
        prop_assert!(s.members().is_subset(t.members()));
        for &i in s.members() {
            for &j in s.members() {
                prop_assert!(s.contains(l.meet(i, j)));
                if let Some(k) = l.join(i, j) {
                    prop_assert!(s.contains(k));
                }
            }
        }
        if !s.members().is_empty() {
            prop_assert!(s.tops().is_some());
        }
    }

    #[test]
    fn generated_systems_are_valid(seed in any::<u64>()) {
        let cs = random_coordinate_system(&small_params(), seed).unwrap();
        prop_assert!(validate_system(&cs.system).is_valid());
    }

    #[test]
    fn limit_projections_commute(seed in any::<u64>()) {
        let cs = random_coordinate_system(&small_params(), seed).unwrap();
        let s = &cs.system;
        let lm = amalgamated_limit(s).unwrap();
        for (&(i, j), m) in s.maps() {
            prop_assert_eq!(&compose(m, &lm.limit[j]).unwrap(), &lm.limit[i]);
        }
        prop_assert!(lm.limit.iter().all(AtomMap::is_surjective));
    }

    #[test]
    fn every_point_lies_on_a_thread(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let cs = random_coordinate_system(&small_params(), seed).unwrap();
        let ds = dualize(&cs.system);
        let i = pick.index(ds.len());
        let x = pick.index(ds.space(i).len());
        let t = extend_to_thread(&ds, &PartialThread::singleton(i, x)).unwrap();
        prop_assert_eq!(t[i], x);
        for lo in 0..ds.len() {
            for hi in 0..ds.len() {
                if ds.index().leq(lo, hi) {
                    prop_assert_eq!(ds.proj(lo, hi).apply(t[hi]), t[lo]);
                }
            }
        }
    }
}

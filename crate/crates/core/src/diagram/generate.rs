//! Systems built from monotone coordinate sets: the algebra at `i` has the
//! functions `coords(i) -> fibres` as atoms and maps restrict functions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BASystem, DiagramError};
use crate::balg::{AtomMap, FiniteBA};
use crate::order::enumerate::random_poset;
use crate::order::{check_almost_lattice, AlmostLattice};

fn atom_id(coords: &[usize], values: &[usize]) -> String {
    if coords.is_empty() {
        return "*".to_string();
    }
    coords
        .iter()
        .zip(values)
        .map(|(c, v)| format!("c{c}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// All value vectors over `coords`, last coordinate varying fastest.
fn functions(coords: &[usize], fibres: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in coords {
        out = out
            .into_iter()
            .flat_map(|f| {
                (0..fibres[c]).map(move |v| {
                    let mut g = f.clone();
                    g.push(v);
                    g
                })
            })
            .collect();
    }
    out
}

fn check_assignment(
    l: &AlmostLattice,
    coords: &[BTreeSet<usize>],
    fibres: &[usize],
) -> Result<(), DiagramError> {
    let bad = |msg: String| Err(DiagramError::Assignment(msg));
    if coords.len() != l.len() {
        return bad(format!(
            "{} coordinate sets for {} indices",
            coords.len(),
            l.len()
        ));
    }
    if let Some(c) = fibres.iter().position(|&f| f == 0) {
        return bad(format!("coordinate c{c} has an empty fibre"));
    }
    for (i, cs) in coords.iter().enumerate() {
        if let Some(c) = cs.iter().find(|&&c| c >= fibres.len()) {
            return bad(format!("index {} uses unknown coordinate c{c}", l.id(i)));
        }
    }
    for i in 0..l.len() {
        for j in 0..l.len() {
            let meet: BTreeSet<usize> = coords[i].intersection(&coords[j]).copied().collect();
            if coords[l.meet(i, j)] != meet {
                return bad(format!(
                    "coords({} ∧ {}) is not the intersection",
                    l.id(i),
                    l.id(j)
                ));
            }
            if let Some(k) = l.join(i, j) {
                let join: BTreeSet<usize> = coords[i].union(&coords[j]).copied().collect();
                if coords[k] != join {
                    return bad(format!(
                        "coords({} ∨ {}) is not the union",
                        l.id(i),
                        l.id(j)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// The coordinate system for `coords`, with atom order at every index
/// shuffled by `seed`.
pub fn generate_coordinate_system(
    l: &AlmostLattice,
    coords: &[BTreeSet<usize>],
    fibres: &[usize],
    seed: u64,
) -> Result<BASystem, DiagramError> {
    check_assignment(l, coords, fibres)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = l.len();
    let mut values: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    let mut algebras = Vec::with_capacity(n);
    for cs in coords {
        let cs: Vec<usize> = cs.iter().copied().collect();
        let mut fs = functions(&cs, fibres);
        fs.shuffle(&mut rng);
        algebras.push(FiniteBA::new(fs.iter().map(|f| atom_id(&cs, f)))?);
        values.push(fs);
    }
    let mut maps = BTreeMap::new();
    for (lo, hi) in l.poset().comparable_pairs() {
        let hi_coords: Vec<usize> = coords[hi].iter().copied().collect();
        let keep: Vec<usize> = (0..hi_coords.len())
            .filter(|&k| coords[lo].contains(&hi_coords[k]))
            .collect();
        let lookup: HashMap<&[usize], usize> = values[lo]
            .iter()
            .enumerate()
            .map(|(a, f)| (f.as_slice(), a))
            .collect();
        let map = values[hi]
            .iter()
            .map(|f| {
                let r: Vec<usize> = keep.iter().map(|&k| f[k]).collect();
                lookup[r.as_slice()]
            })
            .collect();
        maps.insert(
            (lo, hi),
            AtomMap::surjection(algebras[hi].clone(), algebras[lo].clone(), map)?,
        );
    }
    BASystem::new(l.clone(), algebras, maps)
}

/// Non-empty prime filters of `l`: up-closed, meet-closed, and containing
/// `i` or `j` whenever it contains an existing `i ∨ j`. Any family of them
/// defines a valid coordinate assignment.
pub fn prime_filters(l: &AlmostLattice) -> Vec<BTreeSet<usize>> {
    let n = l.len();
    assert!(n < 24, "prime filter enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let has = |k: usize| mask >> k & 1 == 1;
        let ok = (0..n).all(|i| {
            (0..n).all(|j| {
                (!has(i) || !l.leq(i, j) || has(j))
                    && (!(has(i) && has(j)) || has(l.meet(i, j)))
                    && l.join(i, j).is_none_or(|k| !has(k) || has(i) || has(j))
            })
        });
        if ok {
            out.push((0..n).filter(|&k| has(k)).collect());
        }
    }
    out
}

/// A random almost-lattice on at most `max_size` elements. Rejection
/// sampling over naturally labelled posets with a forced bottom; falls back
/// to a chain.
pub fn random_almost_lattice<R: Rng>(rng: &mut R, max_size: usize) -> AlmostLattice {
    assert!(max_size >= 1);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=max_size);
        let density = rng.gen_range(0.2..0.8);
        let p = random_poset(rng, n, density);
        let mut leq = (0..n * n).map(|k| p.leq(k / n, k % n)).collect::<Vec<_>>();
        leq[..n].iter_mut().for_each(|b| *b = true);
        let Ok(p) = crate::order::FinitePoset::from_matrix(p.ids().to_vec(), leq) else {
            continue;
        };
        if let Some(l) = check_almost_lattice(&p).lattice {
            return l;
        }
    }
    let n = max_size;
    let leq = (0..n * n).map(|k| k / n <= k % n).collect();
    let ids = (0..n).map(|k| format!("x{k}")).collect();
    let p = crate::order::FinitePoset::from_matrix(ids, leq).expect("chain");
    AlmostLattice::from_poset(p).expect("chains are lattices")
}

/// The grid index `grid_index_set(beta, delta)` with coordinates
/// `c0..c{beta-1}` for the first component and the next `delta` for the
/// second; `(α, γ)` uses the first `α` and the first `γ` of each kind.
pub fn grid_coordinate_system(
    beta: usize,
    delta: usize,
    fibre: usize,
    seed: u64,
) -> Result<CoordinateSystem, DiagramError> {
    let l = crate::order::grid_index_set(beta, delta)?;
    let ids: HashMap<String, usize> = (0..l.len()).map(|k| (l.id(k).to_string(), k)).collect();
    let mut coords = vec![BTreeSet::new(); l.len()];
    for a in 0..=beta {
        for g in 0..=delta {
            if let Some(&k) = ids.get(&crate::order::grid_id(a, g)) {
                coords[k] = (0..a).chain(beta..beta + g).collect();
            }
        }
    }
    let fibres = vec![fibre; beta + delta];
    let system = generate_coordinate_system(&l, &coords, &fibres, seed)?;
    Ok(CoordinateSystem {
        system,
        coords,
        fibres,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub max_index_size: usize,
    pub max_fiber: usize,
    pub max_coordinates: usize,
    /// Upper bound on the atoms of any single algebra.
    pub max_atoms: usize,
    /// Upper bound on `∏ |atoms(A_i)|`.
    pub product_budget: u128,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            max_index_size: 6,
            max_fiber: 3,
            max_coordinates: 4,
            max_atoms: 8,
            product_budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoordinateSystem {
    pub system: BASystem,
    pub coords: Vec<BTreeSet<usize>>,
    pub fibres: Vec<usize>,
}

/// Draws an index, a family of prime-filter coordinates and fibre sizes
/// within the budgets, then builds the coordinate system. Deterministic in
/// `(params, seed)`.
pub fn random_coordinate_system(
    params: &GeneratorParams,
    seed: u64,
) -> Result<CoordinateSystem, DiagramError> {
    if params.max_index_size == 0 {
        return Err(DiagramError::Infeasible(
            "index size bound must be positive".into(),
        ));
    }
    if params.max_fiber == 0 {
        return Err(DiagramError::Infeasible(
            "fibre bound must be positive".into(),
        ));
    }
    if params.max_atoms == 0 || params.product_budget == 0 {
        return Err(DiagramError::Infeasible(
            "atom and product budgets must be positive".into(),
        ));
    }
    if params.max_index_size > 12 {
        return Err(DiagramError::Infeasible("index size bound above 12".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = random_almost_lattice(&mut rng, params.max_index_size);
    let filters = prime_filters(&l);
    let n = l.len();
    let k = rng.gen_range(0..=params.max_coordinates);
    let mut chosen: Vec<(BTreeSet<usize>, usize)> = Vec::new();
    for _ in 0..k {
        let Some(f) = filters.choose(&mut rng) else {
            break;
        };
        let size = rng.gen_range(1..=params.max_fiber);
        chosen.push((f.clone(), size));
        let atoms: Vec<u128> = (0..n)
            .map(|i| {
                chosen
                    .iter()
                    .filter(|(f, _)| f.contains(&i))
                    .map(|&(_, s)| s as u128)
                    .product()
            })
            .collect();
        let within = atoms.iter().all(|&a| a <= params.max_atoms as u128)
            && atoms
                .iter()
                .try_fold(1u128, |acc, &a| acc.checked_mul(a))
                .is_some_and(|p| p <= params.product_budget);
        if !within {
            chosen.pop();
        }
    }
    let coords: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| {
            (0..chosen.len())
                .filter(|&c| chosen[c].0.contains(&i))
                .collect()
        })
        .collect();
    let fibres: Vec<usize> = chosen.iter().map(|&(_, s)| s).collect();
    let system = generate_coordinate_system(&l, &coords, &fibres, rng.gen())?;
    Ok(CoordinateSystem {
        system,
        coords,
        fibres,
    })
}

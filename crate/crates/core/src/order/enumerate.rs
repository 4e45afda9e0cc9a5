//! Exhaustive enumeration of small posets up to isomorphism.

use std::collections::BTreeSet;

use rand::Rng;

use super::FinitePoset;

fn element_ids(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("x{k}")).collect()
}

/// Strict relations on `0..n` with edges only from smaller to larger
/// indices that are transitive. Every finite poset has a linear extension,
/// so these cover all isomorphism classes.
fn naturally_labelled(n: usize) -> Vec<Vec<bool>> {
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << slots.len()) {
        let mut rel = vec![false; n * n];
        for (k, &(a, b)) in slots.iter().enumerate() {
            if mask >> k & 1 == 1 {
                rel[a * n + b] = true;
            }
        }
        let transitive = (0..n).all(|a| {
            (0..n).all(|b| !rel[a * n + b] || (0..n).all(|c| !rel[b * n + c] || rel[a * n + c]))
        });
        if transitive {
            out.push(rel);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn canonical_code(rel: &[bool], n: usize, perms: &[Vec<usize>]) -> Vec<bool> {
    perms
        .iter()
        .map(|p| {
            let mut code = vec![false; n * n];
            for a in 0..n {
                for b in 0..n {
                    code[p[a] * n + p[b]] = rel[a * n + b];
                }
            }
            code
        })
        .min()
        .expect("at least one permutation")
}

/// One representative of every isomorphism class of posets on `n`
/// elements, with ids `x0..x{n-1}`.
pub fn posets_up_to_iso(n: usize) -> Vec<FinitePoset> {
    if n == 0 {
        return Vec::new();
    }
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rel in naturally_labelled(n) {
        if seen.insert(canonical_code(&rel, n, &perms)) {
            out.push(
                FinitePoset::from_matrix(element_ids(n), rel).expect("transitive and acyclic"),
            );
        }
    }
    out
}

/// Every labelled poset on `n` elements whose order extends the index order,
/// i.e. all naturally labelled posets.
pub fn naturally_labelled_posets(n: usize) -> Vec<FinitePoset> {
    naturally_labelled(n)
        .into_iter()
        .map(|rel| FinitePoset::from_matrix(element_ids(n), rel).expect("transitive and acyclic"))
        .collect()
}

/// A uniformly drawn naturally labelled strict relation, transitively closed.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, edge_probability: f64) -> FinitePoset {
    let mut rel = vec![false; n * n];
    for a in 0..n {
        for b in a + 1..n {
            rel[a * n + b] = rng.gen_bool(edge_probability);
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if rel[a * n + k] && rel[k * n + b] {
                    rel[a * n + b] = true;
                }
            }
        }
    }
    FinitePoset::from_matrix(element_ids(n), rel).expect("closure of an acyclic relation")
}

//! Brute-force oracles and their comparison against the fast paths.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::amal::{
    build_condition_set, completion_of_conditions, limit_of, Amalgam, ConditionSet, LimitAlgebra,
};
use crate::balg::completion::{regular_open_completion, Preorder};
use crate::diagram::{check_correct, BASystem};
use crate::stone_topo::{
    box_image, check_box_image, dualize, random_box, threads_by_filtration, threads_constructive,
    ThreadSpace,
};

/// Largest preorder whose down-sets are enumerated.
pub const MAX_ENUMERATED_PREORDER: usize = 20;

/// The regular-open algebra of a preorder, enumerated literally: down-sets
/// `U` (open in the cone topology) with `U = int(cl(U))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularOpens {
    /// All regular open sets as bitmasks, sorted.
    pub opens: Vec<u64>,
    /// The minimal nonzero regular opens.
    pub atoms: Vec<u64>,
    /// `int(cl(↓p))` for every `p`.
    pub dense: Vec<u64>,
}

fn below_masks<P: Preorder + ?Sized>(p: &P) -> Vec<u64> {
    let n = p.size();
    (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| p.leq(b, a))
                .fold(0u64, |m, b| m | 1 << b)
        })
        .collect()
}

/// Enumerates every down-set of a preorder with at most
/// [`MAX_ENUMERATED_PREORDER`] elements.
pub fn regular_opens<P: Preorder + ?Sized>(p: &P) -> RegularOpens {
    let n = p.size();
    assert!(
        n <= MAX_ENUMERATED_PREORDER,
        "preorder too large to enumerate"
    );
    let below = below_masks(p);
    let cl = |u: u64| {
        (0..n)
            .filter(|&a| below[a] & u != 0)
            .fold(0u64, |m, a| m | 1 << a)
    };
    let int = |v: u64| {
        (0..n)
            .filter(|&a| below[a] & !v == 0)
            .fold(0u64, |m, a| m | 1 << a)
    };
    let is_down = |u: u64| (0..n).all(|a| u >> a & 1 == 0 || below[a] & !u == 0);
    let mut opens: Vec<u64> = (0u64..1 << n)
        .filter(|&u| is_down(u) && int(cl(u)) == u)
        .collect();
    opens.sort_unstable();
    let atoms = opens
        .iter()
        .copied()
        .filter(|&u| u != 0 && opens.iter().all(|&v| v == 0 || v & !u != 0 || v == u))
        .collect();
    let dense = (0..n).map(|a| int(cl(below[a]))).collect();
    RegularOpens {
        opens,
        atoms,
        dense,
    }
}

/// Whether the minimal-class completion agrees with the enumerated
/// regular-open algebra: same number of atoms, and the dense maps agree
/// under the matching of each class with the regular open it generates.
pub fn completion_matches_regular_opens<P: Preorder + ?Sized>(p: &P) -> bool {
    let ro = regular_opens(p);
    let Ok(c) = regular_open_completion(p) else {
        return p.size() == 0;
    };
    if c.algebra.len() != ro.atoms.len() {
        return false;
    }
    let below = below_masks(p);
    let n = p.size();
    let int_cl = |u: u64| {
        let cl = (0..n)
            .filter(|&a| below[a] & u != 0)
            .fold(0u64, |m, a| m | 1 << a);
        (0..n)
            .filter(|&a| below[a] & !cl == 0)
            .fold(0u64, |m, a| m | 1 << a)
    };
    let class_open: Vec<u64> = c
        .minimal_classes
        .iter()
        .map(|cl| int_cl(below[cl[0]]))
        .collect();
    if class_open.iter().collect::<BTreeSet<_>>() != ro.atoms.iter().collect::<BTreeSet<_>>() {
        return false;
    }
    (0..n).all(|a| {
        let from_classes = int_cl(c.image(a).atoms().fold(0u64, |m, t| m | class_open[t]));
        from_classes == ro.dense[a]
    })
}

/// A perturbation of one fast path, for exercising the comparison harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Drops one atom from the fast completion's count.
    Completion,
    /// Flips one strict entry of the canonical order.
    Order,
    /// Drops one thread from the constructive enumeration.
    Threads,
    /// Removes one point from one recipe image.
    BoxImage,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "completion" => Ok(Fault::Completion),
            "order" => Ok(Fault::Order),
            "threads" => Ok(Fault::Threads),
            "box-image" | "box_image" => Ok(Fault::BoxImage),
            other => Err(format!("unknown fault `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    /// `None` when skipped for budget reasons.
    pub agree: Option<bool>,
    pub cases: u64,
    pub counterexample: Option<String>,
}

impl OracleCheck {
    fn skipped(name: &'static str) -> Self {
        Self {
            name,
            agree: None,
            cases: 0,
            counterexample: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_agree(&self) -> bool {
        self.checks.iter().all(|c| c.agree != Some(false))
    }

    pub fn first_counterexample(&self) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.agree == Some(false))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBudgets {
    /// Largest condition set compared exhaustively.
    pub conditions: u128,
    /// Largest product of spaces filtered.
    pub product: u128,
    pub box_draws: usize,
    pub seed: u64,
}

impl Default for OracleBudgets {
    fn default() -> Self {
        Self {
            conditions: 200,
            product: 1_000_000,
            box_draws: 200,
            seed: 0,
        }
    }
}

/// The canonical order on `D` as a matrix.
pub fn order_matrix(d: &ConditionSet) -> Vec<bool> {
    let n = d.len();
    (0..n * n).map(|k| d.leq(k / n, k % n)).collect()
}

/// Reflexivity and transitivity of an order matrix; returns a failing
/// index tuple.
pub fn preorder_failure(leq: &[bool], n: usize) -> Option<Vec<usize>> {
    if let Some(a) = (0..n).find(|&a| !leq[a * n + a]) {
        return Some(vec![a]);
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a * n + b] {
                continue;
            }
            for c in 0..n {
                if leq[b * n + c] && !leq[a * n + c] {
                    return Some(vec![a, b, c]);
                }
            }
        }
    }
    None
}

/// Canonical against existential witnesses; returns the first disagreement.
pub fn witness_disagreement(d: &ConditionSet, canonical: &[bool]) -> Option<(usize, usize)> {
    let n = d.len();
    (0..n * n)
        .find(|&k| {
            canonical[k]
                != d.amalgam
                    .cond_leq_existential(d.conditions[k / n], d.conditions[k % n])
        })
        .map(|k| (k / n, k % n))
}

/// Runs every oracle on a valid system.
pub fn run_oracles(
    s: &BASystem,
    budgets: &OracleBudgets,
    fault: Option<Fault>,
) -> Result<(OracleReport, LimitAlgebra), crate::amal::AmalError> {
    let amalgam = Amalgam::new(s)?;
    let lm = limit_of(amalgam.clone())?;
    let mut checks = Vec::new();

    // the three correctness conditions on every join square
    let squares = s.index().join_squares();
    let disagreeing = squares.iter().find(|&&(i, j)| {
        let sq = s.square(i, j).expect("join").expect("valid");
        !check_correct(&sq).expect("complete").agree()
    });
    checks.push(OracleCheck {
        name: "correctness_conditions",
        agree: Some(disagreeing.is_none()),
        cases: squares.len() as u64,
        counterexample: disagreeing
            .map(|&(i, j)| format!("square {} , {}", s.index().id(i), s.index().id(j))),
    });

    let d = if amalgam.count_conditions() <= budgets.conditions {
        Some(build_condition_set(s, budgets.conditions)?)
    } else {
        None
    };
    match &d {
        Some(d) => {
            let mut fast_atoms = lm.algebra.len();
            if fault == Some(Fault::Completion) {
                fast_atoms -= 1;
            }
            let generic = completion_of_conditions(d)?;
            let agree = generic.algebra.len() == fast_atoms;
            checks.push(OracleCheck {
                name: "completion",
                agree: Some(agree),
                cases: d.len() as u64,
                counterexample: (!agree).then(|| {
                    format!(
                        "{} atoms from minimal pairs, {} from all of D",
                        fast_atoms,
                        generic.algebra.len()
                    )
                }),
            });
            if d.len() <= MAX_ENUMERATED_PREORDER {
                let agree = completion_matches_regular_opens(d);
                checks.push(OracleCheck {
                    name: "regular_open_enumeration",
                    agree: Some(agree),
                    cases: 1 << d.len(),
                    counterexample: (!agree)
                        .then(|| "minimal classes differ from regular opens".into()),
                });
            } else {
                checks.push(OracleCheck::skipped("regular_open_enumeration"));
            }
            let mut canonical = order_matrix(d);
            let n = d.len();
            if fault == Some(Fault::Order) {
                if let Some(k) = (0..n * n).find(|&k| k / n != k % n && canonical[k]) {
                    canonical[k] = false;
                }
            }
            let sound = preorder_failure(&canonical, n);
            checks.push(OracleCheck {
                name: "order_preorder",
                agree: Some(sound.is_none()),
                cases: (n * n * n) as u64,
                counterexample: sound.map(|t| {
                    t.iter()
                        .map(|&k| d.amalgam.condition_label(d.conditions[k]))
                        .collect::<Vec<_>>()
                        .join(" / ")
                }),
            });
            let diff = witness_disagreement(d, &canonical);
            checks.push(OracleCheck {
                name: "existential_witnesses",
                agree: Some(diff.is_none()),
                cases: (n * n) as u64,
                counterexample: diff.map(|(a, b)| {
                    format!(
                        "{} <= {}",
                        d.amalgam.condition_label(d.conditions[a]),
                        d.amalgam.condition_label(d.conditions[b])
                    )
                }),
            });
        }
        None => {
            for name in [
                "completion",
                "regular_open_enumeration",
                "order_preorder",
                "existential_witnesses",
            ] {
                checks.push(OracleCheck::skipped(name));
            }
        }
    }

    let ds = dualize(s);
    if ds.product_size() <= budgets.product {
        let filtered = threads_by_filtration(&ds, budgets.product).expect("within budget");
        let mut built = threads_constructive(&ds, budgets.product);
        if fault == Some(Fault::Threads) {
            if let Ok(b) = &mut built {
                b.pop();
            }
        }
        let (agree, counterexample) = match &built {
            Ok(b) if *b == filtered => (true, None),
            Ok(b) => {
                let fs: BTreeSet<&Vec<usize>> = filtered.iter().collect();
                let bs: BTreeSet<&Vec<usize>> = b.iter().collect();
                let t = fs.symmetric_difference(&bs).next().copied();
                (
                    false,
                    t.map(|t| {
                        let ids: Vec<String> = t
                            .iter()
                            .enumerate()
                            .map(|(i, &x)| {
                                format!("{}={}", s.index().id(i), s.algebra(i).atom_id(x))
                            })
                            .collect();
                        format!("thread ({}) found by only one method", ids.join(", "))
                    }),
                )
            }
            Err(e) => (false, Some(e.to_string())),
        };
        checks.push(OracleCheck {
            name: "thread_filtration",
            agree: Some(agree),
            cases: ds.product_size() as u64,
            counterexample,
        });
        let space = ThreadSpace { threads: filtered };
        let mut rng = ChaCha8Rng::seed_from_u64(budgets.seed);
        let mut failure = None;
        for draw in 0..budgets.box_draws {
            let (f, boxes) = random_box(&mut rng, &ds);
            let v = match box_image(&ds, &f, &boxes) {
                Ok(mut v) => {
                    if fault == Some(Fault::BoxImage) && draw == 0 {
                        if let Some(set) = v.values_mut().find(|s| !s.is_empty()) {
                            let first = *set.iter().next().expect("non-empty");
                            set.remove(&first);
                        }
                    }
                    v
                }
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            };
            if !check_box_image(&ds, &space, &f, &boxes, &v).holds() {
                failure = Some(describe_box(s, &f, &boxes));
                break;
            }
        }
        checks.push(OracleCheck {
            name: "box_image",
            agree: Some(failure.is_none()),
            cases: budgets.box_draws as u64,
            counterexample: failure,
        });
    } else {
        checks.push(OracleCheck::skipped("thread_filtration"));
        checks.push(OracleCheck::skipped("box_image"));
    }
    Ok((OracleReport { checks }, lm))
}

fn describe_box(
    s: &BASystem,
    f: &crate::order::ClosedSet,
    boxes: &BTreeMap<usize, BTreeSet<usize>>,
) -> String {
    let parts: Vec<String> = f
        .members()
        .iter()
        .map(|&i| {
            let pts: Vec<&str> = boxes[&i].iter().map(|&x| s.algebra(i).atom_id(x)).collect();
            format!("{}:{{{}}}", s.index().id(i), pts.join(" "))
        })
        .collect();
    format!("boxes {}", parts.join(", "))
}

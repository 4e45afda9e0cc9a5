//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use amalgam::amal::{
    build_condition_set, lattice_sub_index_checks, limit_of, maximum_index_check,
    three_element_check, verify_embeddability, Amalgam, Degenerate, LimitAlgebra,
};
use amalgam::balg::completion::FinitePreorder;
use amalgam::balg::{AtomMap, FiniteBA};
use amalgam::diagram::{
    check_correct, generate_coordinate_system, random_coordinate_system, BASystem, EmbeddingSquare,
    GeneratorParams,
};
use amalgam::io::{load, Loaded};
use amalgam::oracle::{
    completion_matches_regular_opens, order_matrix, preorder_failure, witness_disagreement,
};
use amalgam::order::enumerate::posets_up_to_iso;
use amalgam::order::{add_top, validate_poset, AlmostLattice};
use amalgam::stone_topo::{
    box_image, check_box_image, duality_bridge, dualize, random_box, thread_space,
};

const SUITE_SIZE: u64 = 300;
const PRODUCT_BUDGET: u128 = 1_000_000;
const ORDER_BUDGET: u128 = 200;
const BOX_DRAWS: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load_system(name: &str) -> BASystem {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    match load(&text).unwrap() {
        Loaded::System { system, .. } => system,
        other => panic!("{name}: {other:?}"),
    }
}

fn suite() -> Vec<(String, BASystem)> {
    let params = GeneratorParams::default();
    let mut out: Vec<(String, BASystem)> = (0..SUITE_SIZE)
        .map(|seed| {
            let cs = random_coordinate_system(&params, seed).unwrap();
            (format!("seed {seed}"), cs.system)
        })
        .collect();
    for name in ["vee.json", "grid_2_2.json", "lattice.json", "single.json"] {
        out.push((name.to_string(), load_system(name)));
    }
    out
}

fn limit_embeds_everything(suite: &[(String, BASystem)]) -> (Outcome, Vec<LimitAlgebra>) {
    let start = Instant::now();
    let mut limits = Vec::new();
    let mut failure = None;
    for (name, s) in suite {
        let lm = limit_of(Amalgam::new(s).unwrap()).unwrap();
        let report = verify_embeddability(&lm);
        if !report.holds() && failure.is_none() {
            failure = Some(format!("{name}: {report:?}"));
        }
        limits.push(lm);
    }
    let elapsed = start.elapsed();
    let pass = failure.is_none() && elapsed < Duration::from_secs(120);
    let detail = failure
        .unwrap_or_else(|| format!("{} systems in {:.2} s", suite.len(), elapsed.as_secs_f64()));
    (Outcome::new(pass, detail), limits)
}

fn surjections(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut f = vec![0; n];
    loop {
        if (0..m).all(|b| f.contains(&b)) {
            out.push(f.clone());
        }
        let mut k = 0;
        while k < n && f[k] == m - 1 {
            f[k] = 0;
            k += 1;
        }
        if k == n {
            return out;
        }
        f[k] += 1;
    }
}

fn square(top: usize, tl: &[usize], tr: &[usize], lb: &[usize], rb: &[usize]) -> EmbeddingSquare {
    let count = |f: &[usize]| f.iter().max().map_or(0, |m| m + 1);
    let t = FiniteBA::with_atoms("t", top);
    let l = FiniteBA::with_atoms("l", count(tl));
    let r = FiniteBA::with_atoms("r", count(tr));
    let b = FiniteBA::with_atoms("b", count(lb));
    EmbeddingSquare::new(
        AtomMap::from_fn(l.clone(), b.clone(), lb.to_vec()),
        AtomMap::from_fn(r.clone(), b, rb.to_vec()),
        AtomMap::from_fn(t.clone(), l, tl.to_vec()),
        AtomMap::from_fn(t, r, tr.to_vec()),
    )
    .unwrap()
}

/// A surjection from `0..n` onto `0..m` for a random `m` in `lo..=n`.
fn random_surjection(rng: &mut ChaCha8Rng, n: usize, lo: usize) -> Vec<usize> {
    let m = rng.gen_range(lo..=n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut f = vec![0; n];
    for (k, &a) in order.iter().enumerate() {
        f[a] = if k < m { k } else { rng.gen_range(0..m) };
    }
    f
}

/// Finest common quotient of two partitions of `0..n`.
fn pushout(tl: &[usize], tr: &[usize]) -> Vec<usize> {
    let n = tl.len();
    let mut class: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            for b in 0..n {
                if (tl[a] == tl[b] || tr[a] == tr[b]) && class[a] != class[b] {
                    let (lo, hi) = (class[a].min(class[b]), class[a].max(class[b]));
                    class.iter_mut().filter(|c| **c == hi).for_each(|c| *c = lo);
                    changed = true;
                }
            }
        }
    }
    let ids: Vec<usize> = class
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    class
        .iter()
        .map(|c| ids.binary_search(c).unwrap())
        .collect()
}

fn conditions_agree_on_squares() -> Outcome {
    let mut exhaustive = 0usize;
    let mut incorrect = 0usize;
    for top in 1..=3 {
        for l in 1..=top {
            for r in 1..=top {
                for tl in surjections(top, l) {
                    for tr in surjections(top, r) {
                        for b in 1..=l.min(r) {
                            for lb in surjections(l, b) {
                                for rb in surjections(r, b) {
                                    if (0..top).any(|t| lb[tl[t]] != rb[tr[t]]) {
                                        continue;
                                    }
                                    let report =
                                        check_correct(&square(top, &tl, &tr, &lb, &rb)).unwrap();
                                    exhaustive += 1;
                                    incorrect += usize::from(!report.is_correct());
                                    if !report.agree() {
                                        return Outcome::new(
                                            false,
                                            format!("{tl:?} {tr:?} {lb:?} {rb:?}"),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let top = rng.gen_range(4..=9);
        let tl = random_surjection(&mut rng, top, 2);
        let tr = random_surjection(&mut rng, top, 2);
        let p = pushout(&tl, &tr);
        let pn = p.iter().max().unwrap() + 1;
        let to_b = random_surjection(&mut rng, pn, 1);
        let l = tl.iter().max().unwrap() + 1;
        let r = tr.iter().max().unwrap() + 1;
        let mut lb = vec![0; l];
        let mut rb = vec![0; r];
        for t in 0..top {
            lb[tl[t]] = to_b[p[t]];
            rb[tr[t]] = to_b[p[t]];
        }
        let report = check_correct(&square(top, &tl, &tr, &lb, &rb)).unwrap();
        incorrect += usize::from(!report.is_correct());
        if !report.agree() {
            return Outcome::new(false, format!("{tl:?} {tr:?} {lb:?} {rb:?}"));
        }
    }
    Outcome::new(
        true,
        format!("{exhaustive} exhaustive + 1000 random squares, {incorrect} not correct"),
    )
}

fn three_element(a: usize, b: usize, seed: u64) -> BASystem {
    let p = validate_poset(&["m", "0", "1"], &[("m", "0"), ("m", "1")]).unwrap();
    let l = AlmostLattice::from_poset(p).unwrap();
    let coords = vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1])];
    generate_coordinate_system(&l, &coords, &[a, b], seed).unwrap()
}

fn degenerate_identities(suite: &[(String, BASystem)], limits: &[LimitAlgebra]) -> Outcome {
    let mut counts = [0usize; 3];
    for ((name, s), lm) in suite.iter().zip(limits) {
        let mut found: Vec<Degenerate> = maximum_index_check(lm).into_iter().collect();
        found.extend(three_element_check(lm));
        found.extend(lattice_sub_index_checks(s).unwrap());
        for d in &found {
            counts[match d {
                Degenerate::MaximumIndex { .. } => 0,
                Degenerate::LatticeSubIndex { .. } => 1,
                Degenerate::ThreeElement { .. } => 2,
            }] += 1;
            if !d.isomorphic() {
                return Outcome::new(false, format!("{name}: {d:?}"));
            }
        }
    }
    for a in 1..=3 {
        for b in 1..=3 {
            let lm = limit_of(Amalgam::new(&three_element(a, b, 5)).unwrap()).unwrap();
            match three_element_check(&lm) {
                Some(Degenerate::ThreeElement {
                    atoms,
                    isomorphic: true,
                    ..
                }) if atoms == a * b => counts[2] += 1,
                other => return Outcome::new(false, format!("factors {a},{b}: {other:?}")),
            }
        }
    }
    Outcome::new(
        true,
        format!(
            "{} maximum-index, {} lattice sub-index, {} three-element identifications",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn random_preorder(rng: &mut ChaCha8Rng, n: usize) -> FinitePreorder {
    let p = rng.gen_range(0.1..0.6);
    let mut leq: Vec<bool> = (0..n * n)
        .map(|k| k / n == k % n || rng.gen_bool(p))
        .collect();
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if leq[a * n + k] && leq[k * n + b] {
                    leq[a * n + b] = true;
                }
            }
        }
    }
    FinitePreorder::new((0..n).map(|k| format!("p{k}")).collect(), leq).unwrap()
}

fn completion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..500 {
        let n = rng.gen_range(1..=6);
        let p = random_preorder(&mut rng, n);
        if !completion_matches_regular_opens(&p) {
            return Outcome::new(false, format!("random preorder {k}: {p:?}"));
        }
    }
    let mut posets = 0;
    for n in 1..=4 {
        for p in posets_up_to_iso(n) {
            posets += 1;
            if !completion_matches_regular_opens(&FinitePreorder::from_poset(&p)) {
                return Outcome::new(false, format!("poset {:?}", p.strict_pairs()));
            }
        }
    }
    Outcome::new(true, format!("500 random preorders and {posets} posets"))
}

fn order_soundness(suite: &[(String, BASystem)]) -> Outcome {
    let mut checked = 0;
    for (name, s) in suite {
        if Amalgam::new(s).unwrap().count_conditions() > ORDER_BUDGET {
            continue;
        }
        let d = build_condition_set(s, ORDER_BUDGET).unwrap();
        let m = order_matrix(&d);
        if let Some(t) = preorder_failure(&m, d.len()) {
            return Outcome::new(false, format!("{name}: order fails at {t:?}"));
        }
        if let Some((a, b)) = witness_disagreement(&d, &m) {
            return Outcome::new(false, format!("{name}: witnesses disagree at {a}, {b}"));
        }
        checked += 1;
    }
    Outcome::new(
        true,
        format!(
            "{checked} of {} systems with |D| <= {ORDER_BUDGET}",
            suite.len()
        ),
    )
}

fn thread_suite(suite: &[(String, BASystem)], limits: &[LimitAlgebra]) -> (Outcome, Outcome) {
    let mut draws = 0usize;
    let mut checked = 0usize;
    let mut threads_failure = None;
    let mut bridge_failure = None;
    for (k, ((name, s), lm)) in suite.iter().zip(limits).enumerate() {
        let ds = dualize(s);
        if ds.product_size() > PRODUCT_BUDGET {
            threads_failure
                .get_or_insert(format!("{name}: product {} over budget", ds.product_size()));
            continue;
        }
        let (space, report) = thread_space(&ds, PRODUCT_BUDGET).unwrap();
        if !report.holds() {
            threads_failure.get_or_insert(format!("{name}: {report:?}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..BOX_DRAWS {
            let (f, boxes) = random_box(&mut rng, &ds);
            let v = box_image(&ds, &f, &boxes).unwrap();
            if !check_box_image(&ds, &space, &f, &boxes, &v).holds() {
                threads_failure.get_or_insert(format!("{name}: box image on {:?}", f.members()));
            }
            draws += 1;
        }
        let bridge = duality_bridge(lm, &ds, &space);
        if !bridge.bijective() {
            bridge_failure.get_or_insert(format!("{name}: {bridge:?}"));
        }
        checked += 1;
    }
    let threads = match threads_failure {
        Some(f) => Outcome::new(false, f),
        None => Outcome::new(true, format!("{checked} systems, {draws} box draws")),
    };
    let bridge = match bridge_failure {
        Some(f) => Outcome::new(false, f),
        None => Outcome::new(
            true,
            format!("{checked} systems, atoms and threads in bijection"),
        ),
    };
    (threads, bridge)
}

fn top_extension() -> Outcome {
    let mut eligible = 0;
    let mut lattices = 0;
    for n in 1..=5 {
        for p in posets_up_to_iso(n) {
            let Ok(t) = add_top(&p) else { continue };
            eligible += 1;
            lattices += usize::from(t.distributive_lattice);
            if !t.agrees() {
                return Outcome::new(false, format!("{:?}: {t:?}", p.strict_pairs()));
            }
        }
    }
    Outcome::new(
        true,
        format!("{eligible} posets, {lattices} distributive after adding a top"),
    )
}

fn run_cli(args: &[&str], dir: &Path, out: &str) -> (i32, Vec<u8>) {
    let path = dir.join(out);
    let status = Command::new(env!("CARGO_BIN_EXE_amalgam"))
        .args(args)
        .arg("--output")
        .arg(&path)
        .env_remove("AMALGAM_SEED")
        .output()
        .unwrap();
    let bytes = std::fs::read(&path).unwrap_or_default();
    (status.status.code().unwrap_or(-1), bytes)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let generated = dir.path().join("generated.json");
    let generated = generated.to_str().unwrap();
    let example = fixture("vee.json");
    let example = example.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["generate", "--seed", "11"],
        vec!["generate", "--grid", "2,1", "--seed", "11"],
        vec!["validate", "--input", example],
        vec!["amalgamate", "--input", example],
        vec!["threads", "--input", example, "--seed", "3"],
        vec!["oracle", "--input", example, "--seed", "3"],
    ];
    let (code, first) = run_cli(&runs[0], dir.path(), "generated.json");
    if code != 0 {
        return Outcome::new(false, "generate failed");
    }
    let mut all = runs.clone();
    for cmd in ["validate", "amalgamate", "threads", "oracle"] {
        all.push(vec![cmd, "--input", generated, "--seed", "5"]);
    }
    for (k, args) in all.iter().enumerate() {
        let (c1, a) = run_cli(args, dir.path(), &format!("a{k}.json"));
        let (c2, b) = run_cli(args, dir.path(), &format!("b{k}.json"));
        if c1 != c2 || a != b || a.is_empty() {
            return Outcome::new(false, format!("`{}` differs between runs", args.join(" ")));
        }
        if k == 0 && a != first {
            return Outcome::new(false, "generate differs from the first run");
        }
    }
    Outcome::new(
        true,
        format!("{} commands run twice, byte-identical", all.len()),
    )
}

fn main() {
    let suite = suite();
    let (c1, limits) = limit_embeds_everything(&suite);
    let c2 = conditions_agree_on_squares();
    let c3 = degenerate_identities(&suite, &limits);
    let c4 = completion_oracle();
    let c5 = order_soundness(&suite);
    let (c6, c7) = thread_suite(&suite, &limits);
    let c8 = top_extension();
    let c9 = cli_determinism();
    let rows = [
        ("limit embeds every index, extended system correct", c1),
        ("three correctness conditions agree", c2),
        ("degenerate shapes give the expected algebra", c3),
        ("minimal-class completion equals regular opens", c4),
        ("condition order is a preorder, witnesses agree", c5),
        ("thread space, projections and box images", c6),
        ("limit atoms correspond to threads", c7),
        ("adding a top gives a lattice iff (v) and (vi)", c8),
        ("CLI output is byte-reproducible", c9),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in rows.iter().enumerate() {
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name}: {}", k + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

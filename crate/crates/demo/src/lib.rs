//! Browser front end: three JSON-returning operations on grid systems.
//!
//! Each exported function returns a JSON string; failures come back as
//! `{"error": "..."}`.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use amalgam::amal::{amalgamated_limit, verify_embeddability};
use amalgam::diagram::{grid_coordinate_system, BASystem};
use amalgam::order::{closure, grid_index_set, Tops};
use amalgam::stone_topo::{
    box_image, check_box_image, duality_bridge, dualize, random_box, thread_space,
};

/// Largest grid side offered by the page.
pub const MAX_SIDE: usize = 3;
const THREAD_BUDGET: u128 = 2_000_000;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn check_sides(beta: usize, delta: usize) -> Result<(), String> {
    if beta > MAX_SIDE || delta > MAX_SIDE {
        return Err(format!("grid sides are limited to {MAX_SIDE}"));
    }
    Ok(())
}

/// The grid index for `beta, delta` with covers, and the closed set
/// generated by the semicolon-separated ids in `selected`.
pub fn grid_index_json(beta: usize, delta: usize, selected: &str) -> Result<Value, String> {
    check_sides(beta, delta)?;
    let l = grid_index_set(beta, delta).map_err(|e| e.to_string())?;
    let mut seed = Vec::new();
    for id in selected.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        seed.push(
            l.index_of(id)
                .ok_or_else(|| format!("`{id}` is not in the grid"))?,
        );
    }
    let covers: Vec<(&str, &str)> = l
        .poset()
        .comparable_pairs()
        .filter(|&(a, b)| {
            a != b && !(0..l.len()).any(|c| c != a && c != b && l.leq(a, c) && l.leq(c, b))
        })
        .map(|(a, b)| (l.id(a), l.id(b)))
        .collect();
    let set = closure(&l, seed);
    let tops: Vec<&str> = match set.tops() {
        Some(Tops::Single(t)) => vec![l.id(t)],
        Some(Tops::Pair(a, b)) => vec![l.id(a), l.id(b)],
        None => Vec::new(),
    };
    Ok(json!({
        "elements": l.ids(),
        "covers": covers,
        "closure": set.members().iter().map(|&k| l.id(k)).collect::<Vec<_>>(),
        "tops": tops,
    }))
}

fn grid_system(beta: usize, delta: usize, fibre: usize, seed: u64) -> Result<BASystem, String> {
    check_sides(beta, delta)?;
    if !(1..=3).contains(&fibre) {
        return Err("fibre size must be 1, 2 or 3".into());
    }
    let s = grid_coordinate_system(beta, delta, fibre, seed)
        .map_err(|e| e.to_string())?
        .system;
    if s.product_size() > THREAD_BUDGET {
        return Err(format!(
            "system too large for the page ({} threads to filter)",
            s.product_size()
        ));
    }
    Ok(s)
}

/// Builds the amalgamated limit of a grid system and its thread space.
pub fn amalgamate_grid_json(
    beta: usize,
    delta: usize,
    fibre: usize,
    seed: u64,
) -> Result<Value, String> {
    let s = grid_system(beta, delta, fibre, seed)?;
    let lm = amalgamated_limit(&s).map_err(|e| e.to_string())?;
    let report = verify_embeddability(&lm);
    let atoms: BTreeMap<&str, usize> = (0..s.len())
        .map(|k| (s.index().id(k), s.algebra(k).len()))
        .collect();
    let ds = dualize(&s);
    let (space, tr) = thread_space(&ds, THREAD_BUDGET).map_err(|e| e.to_string())?;
    let bridge = duality_bridge(&lm, &ds, &space);
    let threads =
        json!({ "count": space.len(), "holds": tr.holds(), "bijective": bridge.bijective() });
    Ok(json!({
        "atoms": atoms,
        "limit_atoms": lm.algebra.len(),
        "embeddings_hold": report.holds(),
        "threads": threads,
    }))
}

/// Draws a closed set with boxes from `draw` and computes the box image.
pub fn box_image_json(
    beta: usize,
    delta: usize,
    fibre: usize,
    seed: u64,
    draw: u64,
) -> Result<Value, String> {
    let s = grid_system(beta, delta, fibre, seed)?;
    let ds = dualize(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(draw);
    let (f, boxes) = random_box(&mut rng, &ds);
    let images = box_image(&ds, &f, &boxes).map_err(|e| e.to_string())?;
    let named = |m: &BTreeMap<usize, BTreeSet<usize>>| -> BTreeMap<String, Vec<String>> {
        m.iter()
            .map(|(&i, pts)| {
                let ids = pts
                    .iter()
                    .map(|&x| ds.space(i).point(x).to_string())
                    .collect();
                (s.index().id(i).to_string(), ids)
            })
            .collect()
    };
    let (space, _) = thread_space(&ds, THREAD_BUDGET).map_err(|e| e.to_string())?;
    let verified = check_box_image(&ds, &space, &f, &boxes, &images).holds();
    Ok(json!({
        "closed_set": f.members().iter().map(|&k| s.index().id(k)).collect::<Vec<_>>(),
        "boxes": named(&boxes),
        "images": named(&images),
        "verified": verified,
    }))
}

#[wasm_bindgen]
pub fn grid_index(beta: usize, delta: usize, selected: &str) -> String {
    respond(grid_index_json(beta, delta, selected))
}

#[wasm_bindgen]
pub fn amalgamate_grid(beta: usize, delta: usize, fibre: usize, seed: u32) -> String {
    respond(amalgamate_grid_json(beta, delta, fibre, seed.into()))
}

#[wasm_bindgen]
pub fn explore_box_image(beta: usize, delta: usize, fibre: usize, seed: u32, draw: u32) -> String {
    respond(box_image_json(beta, delta, fibre, seed.into(), draw.into()))
}

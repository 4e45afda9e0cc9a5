//! JSON formats for posets and systems.
//!
//! A poset is `{"elements": [...], "leq": [[a, b], ...]}` with reflexive
//! pairs implied. A system is
//! `{"index": <poset>, "algebras": {id: {"atoms": [...]}}, "maps": {"i<j": {atom: atom}}}`
//! where the map under `"i<j"` sends atoms of `A_j` to atoms of `A_i`. A
//! discrete system uses `"spaces"` and `"points"` instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::balg::{AtomMap, FiniteBA};
use crate::diagram::BASystem;
use crate::order::{
    check_almost_lattice, validate_poset, AlmostLattice, AxiomViolation, FinitePoset, OrderError,
    PosetReport,
};

/// Malformed input: the file cannot be read as a poset or system at all.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Format(String),
}

impl From<serde_json::Error> for InputError {
    fn from(e: serde_json::Error) -> Self {
        InputError::Json(e.to_string())
    }
}

fn format_err<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError::Format(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

impl PosetFile {
    pub fn from_poset(p: &FinitePoset) -> Self {
        Self {
            elements: p.ids().to_vec(),
            leq: p.strict_pairs(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarrierFile {
    atoms: Option<Vec<String>>,
    points: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    index: PosetFile,
    algebras: Option<BTreeMap<String, CarrierFile>>,
    spaces: Option<BTreeMap<String, CarrierFile>>,
    #[serde(default)]
    maps: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Algebraic,
    Discrete,
}

/// A parsed file, staged by how far validation got.
#[derive(Clone, Debug)]
pub enum Loaded {
    NotAPoset(PosetReport),
    NotAlmostLattice {
        poset: FinitePoset,
        violations: Vec<AxiomViolation>,
    },
    /// A poset file whose order is a distributive almost-lattice.
    AlmostLattice(AlmostLattice),
    System {
        kind: SystemKind,
        system: BASystem,
    },
}

fn build_poset(f: &PosetFile) -> Result<Result<FinitePoset, PosetReport>, InputError> {
    match validate_poset(&f.elements, &f.leq) {
        Ok(p) => Ok(Ok(p)),
        Err(OrderError::NotAPartialOrder(r)) => Ok(Err(r)),
        Err(e) => format_err(e.to_string()),
    }
}

/// Parses a poset or system file.
pub fn load(text: &str) -> Result<Loaded, InputError> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(obj) = &value else {
        return format_err("top level must be an object");
    };
    if obj.contains_key("index") {
        let file: SystemFile = serde_json::from_value(value)?;
        load_system(file)
    } else if obj.contains_key("elements") {
        let file: PosetFile = serde_json::from_value(value)?;
        let p = match build_poset(&file)? {
            Ok(p) => p,
            Err(r) => return Ok(Loaded::NotAPoset(r)),
        };
        let check = check_almost_lattice(&p);
        Ok(match check.lattice {
            Some(l) => Loaded::AlmostLattice(l),
            None => Loaded::NotAlmostLattice {
                poset: p,
                violations: check.violations,
            },
        })
    } else {
        format_err("expected an `index` (system) or `elements` (poset) field")
    }
}

fn load_system(file: SystemFile) -> Result<Loaded, InputError> {
    let (kind, carriers) = match (file.algebras, file.spaces) {
        (Some(a), None) => (SystemKind::Algebraic, a),
        (None, Some(s)) => (SystemKind::Discrete, s),
        _ => return format_err("give exactly one of `algebras` and `spaces`"),
    };
    let p = match build_poset(&file.index)? {
        Ok(p) => p,
        Err(r) => return Ok(Loaded::NotAPoset(r)),
    };
    let check = check_almost_lattice(&p);
    let Some(l) = check.lattice else {
        return Ok(Loaded::NotAlmostLattice {
            poset: p,
            violations: check.violations,
        });
    };
    let mut algebras = Vec::with_capacity(l.len());
    for id in l.ids() {
        let Some(c) = carriers.get(id) else {
            return format_err(format!("no algebra given for index `{id}`"));
        };
        let atoms = match (kind, &c.atoms, &c.points) {
            (SystemKind::Algebraic, Some(a), None) | (SystemKind::Discrete, None, Some(a)) => a,
            (SystemKind::Algebraic, _, _) => {
                return format_err(format!("algebra `{id}` needs `atoms`"))
            }
            (SystemKind::Discrete, _, _) => {
                return format_err(format!("space `{id}` needs `points`"))
            }
        };
        algebras.push(
            FiniteBA::new(atoms.iter().cloned())
                .map_err(|e| InputError::Format(format!("`{id}`: {e}")))?,
        );
    }
    if let Some(extra) = carriers.keys().find(|k| l.index_of(k).is_none()) {
        return format_err(format!("algebra `{extra}` is not an index"));
    }
    let mut maps = BTreeMap::new();
    for (key, pairs) in &file.maps {
        let (lo, hi) = split_key(&l, key)?;
        let pairs: Vec<(&String, &String)> = pairs.iter().collect();
        let m = AtomMap::from_ids(algebras[hi].clone(), algebras[lo].clone(), &pairs)
            .map_err(|e| InputError::Format(format!("map `{key}`: {e}")))?;
        maps.insert((lo, hi), m);
    }
    let system = BASystem::new(l, algebras, maps).map_err(|e| InputError::Format(e.to_string()))?;
    Ok(Loaded::System { kind, system })
}

fn split_key(l: &AlmostLattice, key: &str) -> Result<(usize, usize), InputError> {
    for (pos, _) in key.match_indices('<') {
        if let (Some(a), Some(b)) = (l.index_of(&key[..pos]), l.index_of(&key[pos + 1..])) {
            if !l.leq(a, b) {
                return format_err(format!("map `{key}` joins incomparable indices"));
            }
            return Ok((a, b));
        }
    }
    format_err(format!(
        "map key `{key}` is not of the form `i<j` over known indices"
    ))
}

fn map_key(s: &BASystem, lo: usize, hi: usize) -> String {
    format!("{}<{}", s.index().id(lo), s.index().id(hi))
}

/// The file form of a system; identity maps are omitted.
pub fn system_to_json(s: &BASystem, kind: SystemKind) -> Value {
    let field = match kind {
        SystemKind::Algebraic => "atoms",
        SystemKind::Discrete => "points",
    };
    let carriers: serde_json::Map<String, Value> = (0..s.len())
        .map(|k| {
            let mut entry = serde_json::Map::new();
            entry.insert(field.into(), serde_json::json!(s.algebra(k).atoms()));
            (s.index().id(k).to_string(), Value::Object(entry))
        })
        .collect();
    let maps: serde_json::Map<String, Value> = s
        .maps()
        .iter()
        .filter(|((lo, hi), _)| lo != hi)
        .map(|(&(lo, hi), m)| {
            let pairs: serde_json::Map<String, Value> = m
                .id_pairs()
                .into_iter()
                .map(|(a, b)| (a, Value::String(b)))
                .collect();
            (map_key(s, lo, hi), Value::Object(pairs))
        })
        .collect();
    let carrier_key = match kind {
        SystemKind::Algebraic => "algebras",
        SystemKind::Discrete => "spaces",
    };
    serde_json::json!({
        "index": PosetFile::from_poset(s.index().poset()),
        carrier_key: carriers,
        "maps": maps,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

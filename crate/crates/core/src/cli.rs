//! The `amalgam` command-line tool.
//!
//! Every command writes one JSON report `{command, inputs, verdicts,
//! witnesses, timing}`; `generate` writes a system file instead. Exit codes:
//! 0 success, 1 failed verdict, 2 input error, 3 budget refusal.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::amal::{
    lattice_sub_index_checks, limit_of, maximum_index_check, three_element_check,
    verify_embeddability, AmalError, Amalgam,
};
use crate::diagram::{
    grid_coordinate_system, random_coordinate_system, validate_system, BASystem, DiagramError,
    GeneratorParams,
};
use crate::io::{load, system_to_json, to_pretty, InputError, Loaded, SystemKind};
use crate::oracle::{run_oracles, Fault, OracleBudgets};
use crate::stone_topo::{
    box_image, check_box_image, duality_bridge, dualize, random_box, thread_space,
    validate_discrete, ThreadError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

const DEFAULT_PRODUCT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "amalgam",
    version,
    about = "Amalgamated limits of systems of finite Boolean algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: Config,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a poset, almost-lattice or system file.
    Validate,
    /// Build the amalgamated limit and verify it.
    Amalgamate,
    /// Build the thread space of the dual system and compare with the limit.
    Threads {
        /// Random (F, boxes) draws for the box-image check.
        #[arg(long, default_value_t = 200)]
        box_draws: usize,
    },
    /// Write a random coordinate system, or a grid system with `--grid B,D`.
    Generate {
        #[arg(long, value_name = "B,D", value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
    },
    /// Compare every fast path against its brute-force oracle.
    Oracle {
        /// Largest |D| compared exhaustively.
        #[arg(long, default_value_t = 200)]
        max_conditions: u128,
        #[arg(long, default_value_t = 200)]
        box_draws: usize,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Config {
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report path; the report goes to standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, env = "AMALGAM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub max_index_size: Option<usize>,
    #[arg(long, global = true)]
    pub max_fiber: Option<usize>,
    #[arg(long, global = true)]
    pub max_atoms: Option<usize>,
    #[arg(long, global = true)]
    pub product_budget: Option<u128>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// Adds wall-clock time to the report, which makes it non-reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (b, d) = s.split_once(',').ok_or("expected B,D")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(b)?, parse(d)?))
}

/// A refusal before any verdict.
#[derive(Debug)]
pub enum Refusal {
    Input(String),
    Budget(String),
}

impl Refusal {
    pub fn exit_code(&self) -> i32 {
        match self {
            Refusal::Input(_) => EXIT_INPUT,
            Refusal::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Refusal::Input(m) => write!(f, "input error: {m}"),
            Refusal::Budget(m) => write!(f, "budget exceeded: {m}"),
        }
    }
}

impl From<InputError> for Refusal {
    fn from(e: InputError) -> Self {
        Refusal::Input(e.to_string())
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub verdicts: BTreeMap<&'static str, bool>,
    pub witnesses: Value,
    pub timing: BTreeMap<&'static str, u128>,
}

impl Report {
    fn new(command: &'static str, inputs: Value) -> Self {
        Self {
            command,
            inputs,
            verdicts: BTreeMap::new(),
            witnesses: json!({}),
            timing: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    fn witness(&mut self, key: &str, v: impl Serialize) {
        self.witnesses[key] = serde_json::to_value(v).expect("serializable");
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self
            .verdicts
            .iter()
            .filter(|(_, &v)| !v)
            .map(|(k, _)| *k)
            .collect();
        if failed.is_empty() {
            format!("{}: ok ({} checks)", self.command, self.verdicts.len())
        } else {
            format!("{}: FAILED {}", self.command, failed.join(", "))
        }
    }
}

/// What a command produced.
pub enum Output {
    Report(Report),
    System { text: String, summary: String },
}

fn read_input(config: &Config) -> Result<(String, Loaded), Refusal> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Refusal::Input("--input is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Refusal::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok((path.display().to_string(), load(&text)?))
}

fn inputs(path: &str, config: &Config) -> Value {
    json!({ "input": path, "seed": config.seed })
}

fn check_index_budget(s: &BASystem, config: &Config) -> Result<(), Refusal> {
    if let Some(max) = config.max_index_size {
        if s.len() > max {
            return Err(Refusal::Budget(format!(
                "index has {} elements, limit {max}",
                s.len()
            )));
        }
    }
    if let Some(max) = config.max_atoms {
        if let Some(a) = s.algebras().iter().find(|a| a.len() > max) {
            return Err(Refusal::Budget(format!(
                "an algebra has {} atoms, limit {max}",
                a.len()
            )));
        }
    }
    Ok(())
}

/// Loads a system file; other staged results become a failed report.
fn load_system(
    command: &'static str,
    config: &Config,
) -> Result<Result<(SystemKind, BASystem), Report>, Refusal> {
    let (path, loaded) = read_input(config)?;
    let mut report = Report::new(command, inputs(&path, config));
    match loaded {
        Loaded::System { kind, system } => {
            check_index_budget(&system, config)?;
            Ok(Ok((kind, system)))
        }
        Loaded::NotAPoset(r) => {
            report.verdicts.insert("index_is_poset", false);
            report.witness("poset_violations", r.violations);
            Ok(Err(report))
        }
        Loaded::NotAlmostLattice { violations, .. } => {
            report.verdicts.insert("index_is_almost_lattice", false);
            report.witness("axiom_violations", violations);
            Ok(Err(report))
        }
        Loaded::AlmostLattice(_) => Err(Refusal::Input(
            "expected a system file, found a poset".into(),
        )),
    }
}

fn amal_refusal(e: AmalError) -> Result<Report, Refusal> {
    match e {
        AmalError::Budget { .. } => Err(Refusal::Budget(e.to_string())),
        other => Err(Refusal::Input(other.to_string())),
    }
}

fn invalid_report(command: &'static str, path: Value, r: crate::diagram::SystemReport) -> Report {
    let mut report = Report::new(command, path);
    report.verdicts.insert("valid_system", false);
    report.witness("violations", r.violations);
    report
}

fn cmd_validate(config: &Config) -> Result<Report, Refusal> {
    let (path, loaded) = read_input(config)?;
    let mut report = Report::new("validate", inputs(&path, config));
    match loaded {
        Loaded::NotAPoset(r) => {
            report.verdicts.insert("index_is_poset", false);
            report.witness("poset_violations", r.violations);
        }
        Loaded::NotAlmostLattice { violations, .. } => {
            report.verdicts.insert("index_is_poset", true);
            report.verdicts.insert("index_is_almost_lattice", false);
            report.witness("axiom_violations", violations);
        }
        Loaded::AlmostLattice(l) => {
            report.verdicts.insert("index_is_poset", true);
            report.verdicts.insert("index_is_almost_lattice", true);
            report.witness("elements", l.len());
            report.witness("lattice", l.is_lattice());
        }
        Loaded::System { kind, system } => {
            check_index_budget(&system, config)?;
            report.verdicts.insert("index_is_almost_lattice", true);
            report.witness("kind", kind);
            match kind {
                SystemKind::Algebraic => {
                    let r = validate_system(&system);
                    report.verdicts.insert("valid_system", r.is_valid());
                    report
                        .timing
                        .insert("squares_checked", r.squares_checked as u128);
                    report.witness("violations", r.violations);
                }
                SystemKind::Discrete => {
                    let r = validate_discrete(&dualize(&system));
                    report
                        .verdicts
                        .insert("valid_system", r.structure.is_valid());
                    report
                        .verdicts
                        .insert("topologically_correct", r.squares.iter().all(|c| c.holds()));
                    report
                        .timing
                        .insert("squares_checked", r.squares.len() as u128);
                    report.witness("violations", r.structure.violations);
                    let failing: Vec<_> = r.squares.iter().filter(|c| !c.holds()).collect();
                    report.witness("square_failures", failing);
                }
            }
        }
    }
    Ok(report)
}

fn cmd_amalgamate(config: &Config) -> Result<Report, Refusal> {
    let (kind, s) = match load_system("amalgamate", config)? {
        Ok(x) => x,
        Err(r) => return Ok(r),
    };
    let path = config
        .input
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    let amalgam = match Amalgam::new(&s) {
        Ok(a) => a,
        Err(AmalError::InvalidSystem(r)) => {
            return Ok(invalid_report("amalgamate", inputs(&path, config), r))
        }
        Err(e) => return amal_refusal(e),
    };
    let conditions = amalgam.count_conditions();
    if let Some(b) = config.product_budget {
        if conditions > b {
            return Err(Refusal::Budget(format!(
                "|D| = {conditions} exceeds the budget {b}"
            )));
        }
    }
    let lm = match limit_of(amalgam) {
        Ok(lm) => lm,
        Err(e) => return amal_refusal(e),
    };
    let mut report = Report::new("amalgamate", inputs(&path, config));
    report.witness("kind", kind);
    report.verdicts.insert("valid_system", true);
    let e = verify_embeddability(&lm);
    report.verdicts.insert(
        "complete_embeddings",
        e.per_index.iter().all(|x| x.complete && x.identification),
    );
    report.verdicts.insert("meet_identity", e.meet_identity);
    report.verdicts.insert("dense", e.dense);
    report
        .verdicts
        .insert("extended_correct", e.extended.is_valid());
    let mut degenerate = Vec::new();
    degenerate.extend(maximum_index_check(&lm));
    degenerate.extend(three_element_check(&lm));
    match lattice_sub_index_checks(&s) {
        Ok(d) => degenerate.extend(d),
        Err(e) => return amal_refusal(e),
    }
    report.verdicts.insert(
        "degenerate_isomorphisms",
        degenerate.iter().all(|d| d.isomorphic()),
    );
    report.witness("conditions", conditions);
    report.witness("limit_atoms", lm.algebra.len());
    report.witness("per_index", &e.per_index);
    report.witness("meet_identity_failure", &e.meet_identity_failure);
    report.witness("extended_violations", &e.extended.violations);
    report.witness("degenerate", degenerate);
    report.timing.insert("conditions", conditions);
    report
        .timing
        .insert("meet_identity_checked", e.meet_identity_checked);
    report
        .timing
        .insert("squares_checked", e.extended.squares_checked as u128);
    Ok(report)
}

fn cmd_threads(config: &Config, box_draws: usize) -> Result<Report, Refusal> {
    let (kind, s) = match load_system("threads", config)? {
        Ok(x) => x,
        Err(r) => return Ok(r),
    };
    let path = config
        .input
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    let valid = validate_system(&s);
    if !valid.is_valid() {
        return Ok(invalid_report("threads", inputs(&path, config), valid));
    }
    let ds = dualize(&s);
    let budget = config.product_budget.unwrap_or(DEFAULT_PRODUCT_BUDGET);
    let (space, tr) = match thread_space(&ds, budget) {
        Ok(x) => x,
        Err(ThreadError::Budget { needed, limit }) => {
            return Err(Refusal::Budget(format!(
                "product of spaces {needed} exceeds {limit}"
            )))
        }
        Err(e) => return Err(Refusal::Input(e.to_string())),
    };
    let lm = match limit_of(Amalgam::new_unchecked(&s).map_err(|e| Refusal::Input(e.to_string()))?)
    {
        Ok(lm) => lm,
        Err(e) => return amal_refusal(e),
    };
    let bridge = duality_bridge(&lm, &ds, &space);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut box_failure = None;
    for _ in 0..box_draws {
        let (f, boxes) = random_box(&mut rng, &ds);
        let ok = box_image(&ds, &f, &boxes)
            .is_ok_and(|v| check_box_image(&ds, &space, &f, &boxes, &v).holds());
        if !ok {
            let members: Vec<&str> = f.members().iter().map(|&i| s.index().id(i)).collect();
            box_failure = Some(members);
            break;
        }
    }
    let mut report = Report::new("threads", inputs(&path, config));
    report.witness("kind", kind);
    report
        .verdicts
        .insert("constructive_matches_filtration", tr.constructive_matches);
    report
        .verdicts
        .insert("projections_surjective", tr.surjective.values().all(|&b| b));
    report.verdicts.insert("commutative", tr.commutative);
    report.verdicts.insert("extended_correct", tr.correct);
    report
        .verdicts
        .insert("bridge_bijective", bridge.bijective());
    report.verdicts.insert("box_images", box_failure.is_none());
    report.witness("threads", space.len());
    report.witness("surjective", &tr.surjective);
    report.witness("first_difference", &tr.first_difference);
    report.witness("correctness_failure", &tr.correctness_failure);
    report.witness(
        "bridge",
        if bridge.bijective() {
            "bijective"
        } else {
            "not bijective"
        },
    );
    report.witness("bridge_report", &bridge);
    report.witness("box_failure", box_failure);
    report.timing.insert("product", ds.product_size());
    report.timing.insert("box_draws", box_draws as u128);
    Ok(report)
}

fn cmd_generate(config: &Config, grid: Option<(usize, usize)>) -> Result<Output, Refusal> {
    let infeasible = |e: DiagramError| Refusal::Budget(e.to_string());
    let cs = match grid {
        Some((b, d)) => {
            let fibre = config.max_fiber.unwrap_or(2);
            if fibre == 0 {
                return Err(Refusal::Budget("fibre bound must be positive".into()));
            }
            let cs = grid_coordinate_system(b, d, fibre, config.seed).map_err(infeasible)?;
            let budget = config.product_budget.unwrap_or(DEFAULT_PRODUCT_BUDGET);
            if cs.system.product_size() > budget {
                return Err(Refusal::Budget(format!(
                    "grid product {} exceeds {budget}",
                    cs.system.product_size()
                )));
            }
            cs
        }
        None => {
            let d = GeneratorParams::default();
            let params = GeneratorParams {
                max_index_size: config.max_index_size.unwrap_or(d.max_index_size),
                max_fiber: config.max_fiber.unwrap_or(d.max_fiber),
                max_atoms: config.max_atoms.unwrap_or(d.max_atoms),
                product_budget: config.product_budget.unwrap_or(d.product_budget),
                ..d
            };
            random_coordinate_system(&params, config.seed).map_err(infeasible)?
        }
    };
    let s = &cs.system;
    let summary = format!(
        "generate: {} indices, {} coordinates, {} atoms in total",
        s.len(),
        cs.fibres.len(),
        s.algebras().iter().map(|a| a.len()).sum::<usize>()
    );
    Ok(Output::System {
        text: to_pretty(&system_to_json(s, SystemKind::Algebraic)),
        summary,
    })
}

fn cmd_oracle(
    config: &Config,
    max_conditions: u128,
    box_draws: usize,
    fault: Option<Fault>,
) -> Result<Report, Refusal> {
    let (_, s) = match load_system("oracle", config)? {
        Ok(x) => x,
        Err(r) => return Ok(r),
    };
    let path = config
        .input
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    let budgets = OracleBudgets {
        conditions: max_conditions,
        product: config.product_budget.unwrap_or(DEFAULT_PRODUCT_BUDGET),
        box_draws,
        seed: config.seed,
    };
    let (or, _) = match run_oracles(&s, &budgets, fault) {
        Ok(x) => x,
        Err(AmalError::InvalidSystem(r)) => {
            return Ok(invalid_report("oracle", inputs(&path, config), r))
        }
        Err(e) => return amal_refusal(e),
    };
    let mut report = Report::new("oracle", inputs(&path, config));
    if let Some(f) = fault {
        report.inputs["inject_fault"] = serde_json::to_value(f).expect("serializable");
    }
    for c in &or.checks {
        if let Some(a) = c.agree {
            report.verdicts.insert(c.name, a);
        }
        report.timing.insert(c.name, c.cases as u128);
    }
    let skipped: Vec<&str> = or
        .checks
        .iter()
        .filter(|c| c.agree.is_none())
        .map(|c| c.name)
        .collect();
    report.witness("skipped", skipped);
    report.witness("first_counterexample", or.first_counterexample());
    Ok(report)
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let config = cli.config.clone();
    let start = Instant::now();
    let result = match cli.command {
        Command::Validate => cmd_validate(&config).map(Output::Report),
        Command::Amalgamate => cmd_amalgamate(&config).map(Output::Report),
        Command::Threads { box_draws } => cmd_threads(&config, box_draws).map(Output::Report),
        Command::Generate { grid } => cmd_generate(&config, grid),
        Command::Oracle {
            max_conditions,
            box_draws,
            inject_fault,
        } => cmd_oracle(&config, max_conditions, box_draws, inject_fault).map(Output::Report),
    };
    let (text, summary, code) = match result {
        Err(refusal) => {
            eprintln!("{refusal}");
            return refusal.exit_code();
        }
        Ok(Output::System { text, summary }) => (text, summary, EXIT_OK),
        Ok(Output::Report(mut report)) => {
            if config.timing {
                report.timing.insert("wall_ms", start.elapsed().as_millis());
            }
            let code = if report.passed() {
                EXIT_OK
            } else {
                EXIT_VERDICT
            };
            (to_pretty(&report), report.summary(), code)
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
            println!("{summary}");
        }
        None => {
            print!("{text}");
            if config.verbose {
                eprintln!("{summary}");
            }
        }
    }
    code
}

/// Parses `std::env::args` and runs.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

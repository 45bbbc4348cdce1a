//! The `chisini` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | audit verdicts disagree, a witness fails revalidation, or the declared profile is not met |
//! | 2 | usage, I/O, schema or name-resolution error |
//! | 3 | a utility is not regular |
//! | 4 | a residual or tower defect exceeds the tolerance, or no finite solution exists |
//! | 5 | an enumeration cap is exceeded |
//! | 6 | a tower chain is not ordered from finest to coarsest |
//! | 7 | a jump sits on a positive-probability outcome |

pub mod model;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::audit::{equivalence_harness, Caps, Status};
use crate::chisini::chisini_mean;
use crate::error::Error;
use crate::family::{check_tower_chain, ExpectationFamily};
use crate::forge::{detect_jumps, repair_continuous, JumpSource};
use crate::utility::{validate_regular, AdditiveRepresentation};

use model::{CurveSpec, LoadError, Model, UtilitySpec};
pub use output::{render, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_AUDIT_MISMATCH: u8 = 1;
pub const EXIT_RESOLUTION: u8 = 2;
pub const EXIT_REGULARITY: u8 = 3;
pub const EXIT_RESIDUAL: u8 = 4;
pub const EXIT_CAP: u8 = 5;
pub const EXIT_NOT_NESTED: u8 = 6;
pub const EXIT_CONTINUITY: u8 = 7;

#[derive(Debug, Parser)]
#[command(name = "chisini", version, about = "Conditional Chisini means and preference audits on finite models")]
pub struct Cli {
    /// Model file (JSON, version "chisini-model/1").
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Write the report here; for `repair`, the model file with the repaired utility.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Residual tolerance, overriding the model settings.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Comma-separated audit grid, overriding the model settings.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Outcome cap for exhaustive audits (also CHISINI_CAP).
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// JSON report (default).
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,
    /// One "path value" line per report entry.
    #[arg(long, global = true)]
    pub table: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional Chisini mean of an act given a partition.
    Compute {
        #[arg(long)]
        utility: String,
        #[arg(long)]
        act: String,
        #[arg(long)]
        partition: String,
    },
    /// Strict monotonicity, sure-thing and conditionability audit of a functional.
    Audit {
        #[arg(long)]
        functional: String,
    },
    /// Time-consistency defects along a chain of partitions, finest first.
    Tower {
        #[arg(long)]
        utility: String,
        #[arg(long)]
        act: String,
        #[arg(long, value_delimiter = ',', required = true)]
        chain: Vec<String>,
    },
    /// Jump detection and continuity repair of a utility.
    Repair {
        #[arg(long)]
        utility: String,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Checks schema, references and regularity of every utility.
    Validate,
}

/// A finished command: report, exit code and an optional model file to write.
pub struct Outcome {
    pub report: Value,
    pub code: u8,
    pub model_out: Option<String>,
}

impl Outcome {
    fn new(report: Value, code: u8) -> Self {
        Outcome { report, code, model_out: None }
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::RegularityViolation { .. } => EXIT_REGULARITY,
        Error::NonFiniteSolution { .. } | Error::BisectionBracketFailure { .. } => EXIT_RESIDUAL,
        Error::ComplexityCapExceeded { .. } => EXIT_CAP,
        Error::ContinuityViolation { .. } => EXIT_CONTINUITY,
        _ => EXIT_RESOLUTION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SpaceMismatch => "space_mismatch",
        Error::InvalidSpace(_) => "invalid_space",
        Error::InvalidPartition(_) => "invalid_partition",
        Error::InvalidAct(_) => "invalid_act",
        Error::InvalidGrid(_) => "invalid_grid",
        Error::RegularityViolation { .. } => "regularity_violation",
        Error::NotMeasurable { .. } => "not_measurable",
        Error::EventNotInAlgebra => "event_not_in_algebra",
        Error::ComplexityCapExceeded { .. } => "complexity_cap_exceeded",
        Error::BisectionBracketFailure { .. } => "bisection_bracket_failure",
        Error::PreconditionFailed(_) => "resolution",
        Error::PropertyFlagMissing(_) => "property_flag_missing",
        Error::OutOfGridRange { .. } => "out_of_grid_range",
        Error::ContinuityViolation { .. } => "continuity_violation",
        Error::NonFiniteSolution { .. } => "non_finite_solution",
    }
}

fn failure(e: &Error) -> Outcome {
    Outcome::new(json!({ "error": { "kind": error_kind(e), "message": e.to_string() } }), error_code(e))
}

fn load_failure(e: &LoadError) -> Outcome {
    let detail = match e {
        LoadError::Io(m) => json!({ "kind": "io", "message": m }),
        LoadError::Schema { path, message } => json!({ "kind": "schema", "path": path, "message": message }),
        LoadError::Invalid(m) => json!({ "kind": "invalid_model", "message": m }),
    };
    Outcome::new(json!({ "error": detail }), EXIT_RESOLUTION)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let Some(path) = &cli.model else {
        return Outcome::new(
            json!({ "error": { "kind": "usage", "message": "--model is required" } }),
            EXIT_RESOLUTION,
        );
    };
    let mut model = match Model::load(path) {
        Ok(m) => m,
        Err(e) => return load_failure(&e),
    };
    let s = &mut model.file.settings;
    if let Some(t) = cli.tol {
        s.tol = t;
    }
    if let Some(g) = &cli.grid {
        s.grid = g.clone();
    }
    let env_caps = Caps { max_outcomes: s.max_outcomes, max_grid: s.max_grid }.with_env_override();
    s.max_outcomes = cli.cap.unwrap_or(env_caps.max_outcomes);
    let result = match &cli.command {
        Command::Compute { utility, act, partition } => compute(&model, utility, act, partition),
        Command::Audit { functional } => audit(&model, functional),
        Command::Tower { utility, act, chain } => tower(&model, utility, act, chain),
        Command::Repair { utility, epsilon, bound } => repair(&model, utility, *epsilon, *bound),
        Command::Validate => validate(&model),
    };
    result.unwrap_or_else(|e| failure(&e))
}

fn labels(e: &crate::measure::EventSet) -> Vec<String> {
    e.members().map(|i| e.space().label(i).to_string()).collect()
}

fn compute(model: &Model, utility: &str, act: &str, partition: &str) -> Result<Outcome, Error> {
    let rep = AdditiveRepresentation::new(model.utility(utility)?);
    let f = model.act(act)?;
    let g = model.partition(partition)?;
    let sol = chisini_mean(&rep, &f, &g)?;
    let tolerance = model.file.settings.tol * (1.0 + f.sup_norm());
    let atoms: Vec<Value> = (0..g.num_atoms())
        .map(|k| {
            let first = g.atoms()[k][0];
            json!({
                "outcomes": labels(&g.atom_event(k)),
                "probability": g.atom_probability(k),
                "conditional_utility": sol.conditional_utility.value(first),
                "value": sol.act.value(first),
            })
        })
        .collect();
    let residuals: Vec<Value> =
        sol.residuals.iter().map(|r| json!({ "event": labels(&r.event), "residual": r.residual })).collect();
    let pass = sol.max_residual() <= tolerance;
    let report = json!({
        "command": "compute",
        "utility": utility,
        "act": act,
        "partition": partition,
        "input": f.values(),
        "chisini_mean": sol.act.values(),
        "conditional_utility": sol.conditional_utility.values(),
        "atoms": atoms,
        "residuals": residuals,
        "max_residual": sol.max_residual(),
        "tolerance": tolerance,
        "exhaustive": sol.exhaustive,
        "pass": pass,
    });
    Ok(Outcome::new(report, if pass { EXIT_OK } else { EXIT_RESIDUAL }))
}

fn audit(model: &Model, name: &str) -> Result<Outcome, Error> {
    let t = model.functional(name)?;
    let cfg = model.file.settings.audit_config();
    let h = equivalence_harness(t.as_ref(), &cfg)?;
    let profile = model.file.functionals[name].expect().copied().unwrap_or_default();
    let meets = |want: Option<Status>, got: Status| want.is_none_or(|w| w == got);
    let profile_match = meets(profile.strict_monotonicity, h.strict_monotonicity)
        && meets(profile.sure_thing, h.sure_thing)
        && meets(profile.conditionable, h.conditionable);
    let mut sorted_grid = cfg.grid.clone();
    sorted_grid.sort_by(f64::total_cmp);
    sorted_grid.dedup();
    let report = json!({
        "command": "audit",
        "functional": name,
        "grid": sorted_grid,
        "harness": serde_json::to_value(&h).expect("serializable"),
        "expected_profile": serde_json::to_value(profile).expect("serializable"),
        "profile_match": profile_match,
        "pass": h.passed() && profile_match,
    });
    let code = if h.passed() && profile_match { EXIT_OK } else { EXIT_AUDIT_MISMATCH };
    Ok(Outcome::new(report, code))
}

fn tower(model: &Model, utility: &str, act: &str, chain: &[String]) -> Result<Outcome, Error> {
    let fam = ExpectationFamily::new(AdditiveRepresentation::new(model.utility(utility)?))?;
    let x = model.act(act)?;
    let algebras = chain.iter().map(|c| model.partition(c)).collect::<Result<Vec<_>, _>>()?;
    for (w, names) in algebras.windows(2).zip(chain.windows(2)) {
        if !w[1].is_coarser_than(&w[0]) {
            let report = json!({ "error": {
                "kind": "chain_not_nested",
                "message": format!("partition \"{}\" is not coarser than \"{}\"", names[1], names[0]),
            }});
            return Ok(Outcome::new(report, EXIT_NOT_NESTED));
        }
    }
    let d = check_tower_chain(&fam, &x, &algebras)?;
    let tolerance = model.file.settings.tol * (1.0 + x.sup_norm());
    let links: Vec<Value> =
        chain.windows(2).zip(&d.links).map(|(n, v)| json!({ "fine": n[0], "coarse": n[1], "defect": v })).collect();
    let per: Vec<Value> =
        chain.iter().zip(&d.per_algebra).map(|(n, v)| json!({ "partition": n, "defect": v })).collect();
    let pass = d.overall <= tolerance
        && d.links.iter().all(|&l| l <= tolerance)
        && d.per_algebra.iter().all(|&l| l <= tolerance);
    let report = json!({
        "command": "tower",
        "utility": utility,
        "act": act,
        "chain": chain,
        "links": links,
        "per_partition": per,
        "overall": d.overall,
        "tolerance": tolerance,
        "pass": pass,
    });
    Ok(Outcome::new(report, if pass { EXIT_OK } else { EXIT_RESIDUAL }))
}

fn repair(model: &Model, name: &str, epsilon: Option<f64>, bound: Option<f64>) -> Result<Outcome, Error> {
    let u = model.utility(name)?;
    let eps = epsilon.unwrap_or(model.file.settings.epsilon);
    let m = bound.unwrap_or(model.file.settings.bound);
    let jumps = detect_jumps(JumpSource::Utility(&u), eps, m)?;
    let jumps_value = serde_json::to_value(&jumps).expect("serializable");
    let fixed = match repair_continuous(&u, &jumps) {
        Ok(f) => f,
        Err(e) => {
            let mut out = failure(&e);
            out.report["jumps"] = jumps_value;
            out.report["command"] = json!("repair");
            return Ok(out);
        }
    };
    let specs: Vec<CurveSpec> = fixed
        .curves()
        .iter()
        .map(|c| {
            CurveSpec::from_curve(c).ok_or_else(|| Error::PreconditionFailed("mixture curves have no file form".into()))
        })
        .collect::<Result<_, _>>()?;
    let before = AdditiveRepresentation::new(u);
    let after = AdditiveRepresentation::new(fixed);
    let mut t_defect = 0.0f64;
    for act in model.file.acts.keys() {
        let f = model.act(act)?;
        t_defect = t_defect.max((before.evaluate(&f)? - after.evaluate(&f)?).abs());
    }
    let repaired_name = format!("{name}_repaired");
    let mut file = model.file.clone();
    file.utilities.insert(repaired_name.clone(), UtilitySpec::PerOutcome(specs.clone()));
    let model_out = serde_json::to_string_pretty(&file).expect("serializable") + "\n";
    let report = json!({
        "command": "repair",
        "utility": name,
        "repaired_name": repaired_name,
        "jumps": jumps_value,
        "repaired": serde_json::to_value(&specs).expect("serializable"),
        "max_value_change_on_acts": t_defect,
        "changed": jumps.has_jumps(),
    });
    Ok(Outcome { report, code: EXIT_OK, model_out: Some(model_out) })
}

fn validate(model: &Model) -> Result<Outcome, Error> {
    model.check_references()?;
    let mut utilities = serde_json::Map::new();
    let mut all_regular = true;
    for name in model.file.utilities.keys() {
        let entry = match validate_regular(&model.utility(name)?) {
            Ok(r) => json!({ "regular": true, "report": serde_json::to_value(r).expect("serializable") }),
            Err(e) => {
                all_regular = false;
                json!({ "regular": false, "error": e.to_string() })
            }
        };
        utilities.insert(name.clone(), entry);
    }
    let partitions: serde_json::Map<String, Value> = model
        .file
        .partitions
        .keys()
        .map(|n| (n.clone(), json!(model.partition(n).expect("checked").num_atoms())))
        .collect();
    let report = json!({
        "command": "validate",
        "version": model.file.version,
        "outcomes": model.space.labels(),
        "weights": model.space.weights(),
        "utilities": utilities,
        "partitions": partitions,
        "acts": model.file.acts.keys().collect::<Vec<_>>(),
        "functionals": model.file.functionals.keys().collect::<Vec<_>>(),
        "regular": all_regular,
    });
    Ok(Outcome::new(report, if all_regular { EXIT_OK } else { EXIT_REGULARITY }))
}

/// Entry point for the binary: parse, run, write, return the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_RESOLUTION } else { EXIT_OK };
        }
    };
    let format = if cli.table { Format::Table } else { Format::Json };
    let outcome = run(&cli);
    let text = render(&outcome.report, format);
    let write = |path: &PathBuf, body: &str| {
        std::fs::write(path, body).map_err(|e| eprintln!("cannot write {}: {e}", path.display())).is_ok()
    };
    match (&cli.out, &outcome.model_out) {
        (Some(path), Some(body)) => {
            if !write(path, body) {
                return EXIT_RESOLUTION;
            }
            print!("{text}");
        }
        (Some(path), None) if !matches!(cli.command, Command::Repair { .. }) => {
            if !write(path, &text) {
                return EXIT_RESOLUTION;
            }
        }
        _ => print!("{text}"),
    }
    if outcome.code != EXIT_OK {
        if let Some(msg) = outcome.report.pointer("/error/message").and_then(Value::as_str) {
            eprintln!("error: {msg}");
        }
    }
    outcome.code
}

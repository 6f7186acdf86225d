//! Commands behind the `nszcap` binary.

pub mod document;
pub mod source;

use std::fmt;
use std::str::FromStr;

use nszcap::builtin::BUILTINS;
use nszcap::capacity::{superdense_bound, CapacityResult, CapacitySolver, NamedMatrix, Quantity};
use nszcap::theorems::{run_suite, CheckKind, SuiteConfig, SuiteReport, TheoremCheck};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::document::{to_json_matrix, ChannelDocument};
use crate::source::Loaded;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn from_core(e: nszcap::Error) -> Self {
        match e {
            nszcap::Error::Solver(msg) => CliError::Solver(msg),
            other => CliError::Input(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

/// What `compute` can evaluate: a capacity program or the closed-form
/// superdense-coding bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Program(Quantity),
    SuperdenseBound,
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if matches!(s, "superdense-bound" | "superdense_bound") {
            return Ok(Target::SuperdenseBound);
        }
        s.parse::<Quantity>().map(Target::Program).map_err(|_| {
            let names: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
            format!("unknown quantity '{s}', expected one of: {}, superdense-bound", names.join(", "))
        })
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Program(q) => write!(f, "{q}"),
            Target::SuperdenseBound => f.write_str("superdense-bound"),
        }
    }
}

/// Where the channel comes from.
#[derive(Debug, Clone)]
pub enum ChannelSource {
    File(std::path::PathBuf),
    Builtin(String),
}

pub fn load(source: &ChannelSource) -> Result<Loaded, CliError> {
    match source {
        ChannelSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            source::load_document(&ChannelDocument::parse(&text)?)
        }
        ChannelSource::Builtin(spec) => {
            let (name, params) = source::parse_builtin_spec(spec)?;
            source::resolve_builtin(&name, &params)
        }
    }
}

fn witness_map(ws: &[NamedMatrix]) -> Value {
    let m: Map<String, Value> = ws.iter().map(|w| (w.name.clone(), json!(to_json_matrix(&w.matrix)))).collect();
    Value::Object(m)
}

fn result_document(channel: &str, r: &CapacityResult, witness: bool) -> Value {
    let mut doc = json!({
        "quantity": r.quantity.name(),
        "channel": channel,
        "value": r.value,
        "log2_value": r.log2_value,
        "gap": r.gap,
        "status": r.status.to_string(),
        "iterations": r.iterations,
        "primal_violation": r.primal_violation,
        "dual_violation": r.dual_violation,
    });
    if witness {
        doc["witness"] = json!({ "primal": witness_map(&r.primal_witness), "dual": witness_map(&r.dual_witness) });
    }
    doc
}

/// Evaluates `target` and returns the output document.
pub fn compute(source: &ChannelSource, target: Target, witness: bool) -> Result<Value, CliError> {
    let loaded = load(source)?;
    match target {
        Target::SuperdenseBound => {
            let v = superdense_bound(&loaded.graph);
            Ok(json!({
                "quantity": "superdense-bound",
                "channel": loaded.description,
                "value": v,
                "log2_value": v.log2(),
                "gap": 0.0,
            }))
        }
        Target::Program(q) => {
            let r = CapacitySolver::default()
                .compute(q, &loaded.graph, loaded.cq.as_ref())
                .map_err(CliError::from_core)?;
            Ok(result_document(&loaded.description, &r, witness))
        }
    }
}

fn check_document(c: &TheoremCheck) -> Value {
    json!({
        "name": c.name,
        "instance": c.instance,
        "lhs": c.lhs,
        "relation": c.relation.to_string(),
        "rhs": c.rhs,
        "tolerance": c.tolerance,
        "margin": c.margin(),
        "passed": c.passed,
        "kind": match c.kind {
            CheckKind::Substantive => "substantive",
            CheckKind::Vacuous => "vacuous",
            CheckKind::Skipped => "skipped",
        },
        "note": c.note,
    })
}

pub fn report_document(report: &SuiteReport) -> Value {
    json!({
        "checks": report.checks.iter().map(check_document).collect::<Vec<_>>(),
        "summary": {
            "total": report.checks.len(),
            "substantive": report.count(CheckKind::Substantive),
            "vacuous": report.count(CheckKind::Vacuous),
            "skipped": report.count(CheckKind::Skipped),
            "failed": report.failures().count(),
        },
    })
}

/// Runs the check suite. The exit code is [`EXIT_VERIFICATION`] when any
/// check fails.
pub fn verify(config: &SuiteConfig) -> Result<(SuiteReport, i32), CliError> {
    let report = run_suite(config).map_err(|e| CliError::Input(e.to_string()))?;
    let code = if report.all_passed() { EXIT_OK } else { EXIT_VERIFICATION };
    Ok((report, code))
}

pub fn examples_listing() -> String {
    let width = BUILTINS.iter().map(|b| b.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for b in BUILTINS {
        out.push_str(&format!("{:<width$}  params: {:<20}  {}\n", b.name, b.params, b.description));
    }
    out
}

/// Kraus document of a built-in channel.
pub fn export(spec: &str) -> Result<ChannelDocument, CliError> {
    let (name, params) = source::parse_builtin_spec(spec)?;
    let loaded = source::resolve_builtin(&name, &params)?;
    let ch = loaded.channel.ok_or_else(|| CliError::Input(format!("builtin '{name}' has no Kraus form")))?;
    Ok(ChannelDocument::from_channel(&ch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_parse() {
        assert_eq!("upsilon-hat".parse::<Target>().unwrap(), Target::Program(Quantity::UpsilonHat));
        assert_eq!("superdense-bound".parse::<Target>().unwrap(), Target::SuperdenseBound);
        assert!("theta".parse::<Target>().is_err());
    }

    #[test]
    fn solver_errors_map_to_exit_two() {
        assert_eq!(CliError::from_core(nszcap::Error::Solver("x".into())).exit_code(), EXIT_SOLVER);
        assert_eq!(CliError::from_core(nszcap::Error::SizeGuard { dim: 9, limit: 4 }).exit_code(), EXIT_INPUT);
    }

    #[test]
    fn listing_names_every_builtin() {
        let s = examples_listing();
        for b in BUILTINS {
            assert!(s.contains(b.name));
        }
    }
}

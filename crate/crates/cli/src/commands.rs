use std::fs;
use std::path::Path;

use fdekit::canonical::{
    bounded_oracle, build_canonical_model, propositional_oracle, verify_truth_lemma,
    CanonicalError, ProvabilityOracle, DEFAULT_PARTITION_CAP,
};
use fdekit::proofs::{check_proof, Proof};
use fdekit::search::{
    decide_report, find_countermodel, probe_schema, probe_schema_with_pool, ProbeVerdict,
    Refutation, SearchError, Verdict,
};
use fdekit::semantics::{extension, validate_model};
use fdekit::{parse, print, Formula, GroupUpdateModel, Universe};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{Cli, Command, Global, OracleKind, ProofAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Affirmative,
    Refuted,
    Undetermined,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Affirmative => 0,
            Outcome::Refuted => 1,
            Outcome::Undetermined => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Only the `parse` command reports a bad formula as a refutation.
    #[error("{0}")]
    ParseRefused(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    /// The search could not run at all within its caps.
    #[error("{0}")]
    Limit(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::ParseRefused(_) => 1,
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Limit(_) => 3,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Overflow { .. } => CliError::Limit(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Parse { text, formula } => cmd_parse(g, text.as_deref().or(formula.as_deref())),
        Command::Eval { model, formula } => cmd_eval(g, model, formula),
        Command::Decide { formula } => cmd_decide(g, formula),
        Command::Countermodel { formula } => cmd_countermodel(g, formula),
        Command::Probe { schema, pool } => cmd_probe(g, schema, pool),
        Command::Proof {
            action: ProofAction::Check { file },
        } => cmd_proof_check(g, file),
        Command::Canonical {
            formula,
            oracle,
            theorems,
        } => cmd_canonical(g, formula, *oracle, theorems),
    }
}

fn formula(text: &str, u: &Universe) -> Result<Formula, CliError> {
    parse(text, u).map_err(|e| CliError::Usage(format!("formula `{text}` {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn cmd_parse(g: &Global, text: Option<&str>) -> Result<Outcome, CliError> {
    let text = text.ok_or_else(|| CliError::Usage("parse needs a formula".into()))?;
    let u = g.universe()?;
    let f = parse(text, &u).map_err(|e| {
        let caret = format!("{}^", " ".repeat(e.position));
        CliError::ParseRefused(format!("{e}\n  {text}\n  {caret}"))
    })?;
    if g.json {
        emit(&json!({
            "input": text,
            "formula": print(&f),
            "core": format!("{f:?}"),
            "depth": f.depth(),
            "variables": f.variables(),
        }));
    } else {
        println!("{}", print(&f));
    }
    Ok(Outcome::Affirmative)
}

fn load_model(path: &Path) -> Result<GroupUpdateModel, CliError> {
    let m = GroupUpdateModel::from_json(&read(path)?).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(m)
}

fn cmd_eval(g: &Global, model: &Path, text: &str) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let u = Universe::new(m.frame.agents().iter().map(|a| a.as_str()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let f = formula(text, &u)?;
    let ext = extension(&m, &f).map_err(|e| CliError::Usage(e.to_string()))?.states;
    let valid = ext.is_full();
    if g.json {
        emit(&json!({
            "formula": print(&f),
            "states": m.states(),
            "extension": ext.to_vec(),
            "valid": valid,
        }));
    } else {
        println!("extension: {:?}", ext.to_vec());
        println!("valid in model: {valid}");
    }
    Ok(if valid {
        Outcome::Affirmative
    } else {
        Outcome::Refuted
    })
}

fn cmd_decide(g: &Global, text: &str) -> Result<Outcome, CliError> {
    let b = g.bounds()?;
    let f = formula(text, &b.universe())?;
    let report = decide_report(&f, &b);
    if g.json {
        emit(&report);
    } else {
        match &report.verdict {
            Verdict::ValidConclusive { bound_used } => {
                println!("valid (conclusive, all frames up to {bound_used} states)")
            }
            Verdict::ValidUpToBound { bound_reached } => println!(
                "no countermodel up to {bound_reached} states; theoretical bound is {}",
                report.theoretical_bound
            ),
            Verdict::Invalid { model, state } => {
                println!("invalid at state {state} of");
                println!("{}", model.to_json());
            }
            Verdict::Unknown { reason } => println!("unknown: {reason}"),
        }
    }
    Ok(match report.verdict {
        Verdict::ValidConclusive { .. } => Outcome::Affirmative,
        Verdict::Invalid { .. } => Outcome::Refuted,
        Verdict::ValidUpToBound { .. } | Verdict::Unknown { .. } => Outcome::Undetermined,
    })
}

fn cmd_countermodel(g: &Global, text: &str) -> Result<Outcome, CliError> {
    let b = g.bounds()?;
    let f = formula(text, &b.universe())?;
    let r = find_countermodel(&f, &b)?;
    if g.json {
        emit(&json!({ "formula": print(&f), "bounds": b, "report": r }));
    } else {
        match &r {
            Refutation::Invalid { model, state } => {
                println!("countermodel, fails at state {state}:");
                println!("{}", model.to_json());
            }
            Refutation::NotFoundUpTo {
                max_states,
                models_checked,
            } => println!("none up to {max_states} states ({models_checked} models checked)"),
        }
    }
    Ok(match r {
        Refutation::Invalid { .. } => Outcome::Refuted,
        Refutation::NotFoundUpTo { .. } => Outcome::Undetermined,
    })
}

fn cmd_probe(g: &Global, name: &str, pool: &[String]) -> Result<Outcome, CliError> {
    let b = g.bounds()?;
    let report = if pool.is_empty() {
        probe_schema(name, &b)?
    } else {
        let u = b.universe();
        let items = pool
            .iter()
            .map(|p| formula(p, &u))
            .collect::<Result<Vec<_>, _>>()?;
        let s = fdekit::proofs::schema(name)
            .ok_or_else(|| CliError::Usage(format!("unknown or unprobeable schema `{name}`")))?;
        probe_schema_with_pool(&s, &b, &items)?
    };
    if g.json {
        emit(&report);
    } else {
        println!(
            "{}: {:?} over {} instances, {} models checked",
            report.schema, report.verdict, report.instances, report.models_checked
        );
        for w in &report.witnesses {
            println!("  instance {}: {} fails at state {}", w.instance, w.conclusion, w.state);
        }
    }
    Ok(match report.verdict {
        ProbeVerdict::Clean => Outcome::Affirmative,
        ProbeVerdict::Witness => Outcome::Refuted,
    })
}

fn cmd_proof_check(g: &Global, file: &Path) -> Result<Outcome, CliError> {
    let proof = Proof::from_json(&read(file)?, &g.universe()?).map_err(|e| CliError::Input {
        path: file.display().to_string(),
        message: e.to_string(),
    })?;
    let result = check_proof(&proof);
    if g.json {
        emit(&json!({
            "system": proof.system.kind.name(),
            "steps": proof.steps.len(),
            "conclusion": proof.conclusion().map(print),
            "ok": result.is_ok(),
            "error": result.as_ref().err().map(|e| e.to_string()),
        }));
    } else {
        match &result {
            Ok(()) => println!(
                "ok: {} steps in {}, proves {}",
                proof.steps.len(),
                proof.system.kind.name(),
                proof.conclusion().map(print).unwrap_or_default()
            ),
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(if result.is_ok() {
        Outcome::Affirmative
    } else {
        Outcome::Refuted
    })
}

/// Rough bytes held per stored canonical state.
const BYTES_PER_PARTITION: u128 = 256;

fn cmd_canonical(
    g: &Global,
    text: &str,
    kind: OracleKind,
    theorems: &[std::path::PathBuf],
) -> Result<Outcome, CliError> {
    let u = g.universe()?;
    let f = formula(text, &u)?;
    let oracle: Box<dyn ProvabilityOracle> = match kind {
        OracleKind::Propositional => Box::new(propositional_oracle()),
        OracleKind::Bounded => {
            let proofs = theorems
                .iter()
                .map(|p| {
                    Proof::from_json(&read(p)?, &u).map_err(|e| CliError::Input {
                        path: p.display().to_string(),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Box::new(bounded_oracle(g.bounds()?, &proofs))
        }
    };
    let cap = match g.max_mem()? {
        Some(bytes) => (bytes / BYTES_PER_PARTITION).clamp(1, DEFAULT_PARTITION_CAP),
        None => DEFAULT_PARTITION_CAP,
    };
    let cm = match build_canonical_model(&f, oracle.as_ref(), &u, cap) {
        Ok(cm) => cm,
        Err(e @ (CanonicalError::TooLarge { .. } | CanonicalError::Undecided(_))) => {
            return Err(CliError::Limit(e.to_string()))
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let valid = validate_model(&cm.model);
    let lemma = verify_truth_lemma(&cm).map_err(|e| CliError::Usage(e.to_string()))?;
    let holds = valid.is_ok() && lemma.holds();
    if g.json {
        emit(&json!({
            "formula": print(&f),
            "oracle": oracle.description(),
            "model": cm.to_doc(),
            "model_valid": valid.as_ref().err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()),
            "truth_lemma": lemma,
        }));
    } else {
        println!(
            "{} states over {} formulas ({})",
            cm.model.states(),
            lemma.formulas,
            oracle.description()
        );
        match &valid {
            Ok(()) => println!("model valid"),
            Err(e) => println!("model invalid: {e}"),
        }
        println!("truth lemma violations: {}", lemma.violations.len());
        for v in &lemma.violations {
            println!("  state {}: {} (labelled in: {})", v.state, v.formula, v.in_label);
        }
    }
    Ok(if holds {
        Outcome::Affirmative
    } else {
        Outcome::Refuted
    })
}

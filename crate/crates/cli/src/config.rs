use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdekit::search::{SearchBounds, SearchMode};
use fdekit::{AgentId, Universe};

use crate::commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "fdekit", version, about = "Group epistemic FDE toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Comma-separated agent universe.
    #[arg(long, global = true, default_value = "a,b")]
    pub agents: String,
    /// Comma-separated variables for whole-space sweeps and default pools.
    #[arg(long, global = true, default_value = "p,q")]
    pub vars: String,
    #[arg(long, global = true, default_value_t = 3)]
    pub max_states: usize,
    #[arg(long, global = true, default_value_t = 2)]
    pub max_triggers: usize,
    /// Random models tried in randomized mode or after an overflow.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Leave update relations out of the search space.
    #[arg(long, global = true)]
    pub no_updates: bool,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exhaustive)]
    pub mode: Mode,
    /// Upper bound on models swept exhaustively.
    #[arg(long, global = true, default_value_t = 1 << 28)]
    pub max_models: u64,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Byte budget for stored enumeration state, with an optional K, M or G
    /// suffix.
    #[arg(long, global = true, env = "FDEKIT_MAX_MEM", hide_env_values = true)]
    pub max_mem: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Propositional,
    Bounded,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and print its core form.
    Parse {
        text: Option<String>,
        #[arg(long)]
        formula: Option<String>,
    },
    /// Evaluate a formula on a model file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Run the bounded decision procedure.
    Decide {
        #[arg(long)]
        formula: String,
    },
    /// Look for a countermodel within the bounds.
    Countermodel {
        #[arg(long)]
        formula: String,
    },
    /// Sweep every instance of a schema over the bounded model space.
    Probe {
        schema: String,
        /// Instantiation pool, one formula per flag. Defaults to the
        /// variables plus the negation of the first.
        #[arg(long = "pool")]
        pool: Vec<String>,
    },
    /// Proof documents.
    Proof {
        #[command(subcommand)]
        action: ProofAction,
    },
    /// Build the canonical model of a formula and check the truth lemma.
    Canonical {
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value_t = OracleKind::Propositional)]
        oracle: OracleKind,
        /// Proof files whose conclusions the bounded oracle takes as given.
        #[arg(long = "theorem")]
        theorems: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProofAction {
    /// Check a proof document.
    Check { file: PathBuf },
}

impl Global {
    pub fn universe(&self) -> Result<Universe, CliError> {
        let names: Vec<&str> = self.agents.split(',').map(str::trim).collect();
        Universe::new(names).map_err(|e| CliError::Usage(format!("--agents: {e}")))
    }

    pub fn bounds(&self) -> Result<SearchBounds, CliError> {
        let vars = self
            .vars
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        let agents: Vec<AgentId> = self.universe()?.agents().cloned().collect();
        let b = SearchBounds {
            max_states: self.max_states,
            agents,
            vars,
            include_updates: !self.no_updates,
            max_triggers: self.max_triggers,
            sample_budget: self.samples,
            seed: self.seed,
            mode: match self.mode {
                Mode::Exhaustive => SearchMode::Exhaustive,
                Mode::Randomized => SearchMode::Randomized,
            },
            max_models: self.max_models,
        };
        b.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(b)
    }

    pub fn max_mem(&self) -> Result<Option<u128>, CliError> {
        self.max_mem.as_deref().map(parse_bytes).transpose()
    }
}

fn parse_bytes(text: &str) -> Result<u128, CliError> {
    let t = text.trim();
    let (digits, scale) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 1u128 << 10),
        Some('M') => (&t[..t.len() - 1], 1 << 20),
        Some('G') => (&t[..t.len() - 1], 1 << 30),
        _ => (t, 1),
    };
    digits
        .trim()
        .parse::<u128>()
        .ok()
        .filter(|&n| n > 0)
        .map(|n| n.saturating_mul(scale))
        .ok_or_else(|| CliError::Usage(format!("FDEKIT_MAX_MEM: cannot read `{text}` as a byte count")))
}

//! Group epistemic logics over First Degree Entailment, with abstract
//! information updates.
//!
//! - [`formula`]: syntax, sugar, closures.
//! - [`parser`]: text syntax and pretty-printer.
//! - [`semantics`]: finite models and satisfaction.
//! - [`search`]: model enumeration, countermodels, the bounded decision
//!   procedure and schema probes.
//! - [`proofs`]: axiom schemata, rules and the Hilbert proof checker.
//! - [`canonical`]: provability oracles and finite canonical models.

pub mod canonical;
pub mod formula;
pub mod parser;
pub mod proofs;
pub mod search;
pub mod semantics;
pub mod stateset;

pub use formula::{AgentId, ClosureSet, Formula, FormulaError, Group, Universe};
pub use parser::{parse, print, ParseError};
pub use semantics::{Frame, GroupUpdateModel, ModelError};
pub use stateset::StateSet;

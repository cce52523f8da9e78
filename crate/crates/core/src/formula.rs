//! Abstract syntax for the group epistemic language with updates.
//!
//! The core syntax has nine node kinds. Everything else (`top`, `bot`,
//! Boolean negation, the biconditional, the update diamond and single-agent
//! knowledge) is sugar that [`desugar`] expands into core nodes.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::parser::{self, SurfaceFormula};

/// The reserved variable used to realize `top` as `_t => _t`.
pub const TOP_VAR: &str = "_t";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("invalid agent name `{0}` (expected [a-z][a-z0-9]*)")]
    InvalidAgentName(String),
    #[error("agent `{0}` is not in the declared universe")]
    UnknownAgent(String),
    #[error("empty group")]
    EmptyGroup,
    #[error("the agent universe is empty")]
    EmptyUniverse,
    #[error("variable name `{0}` is reserved")]
    ReservedVariable(String),
}

/// An agent name, a lowercase token over `[a-z][a-z0-9]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: &str) -> Result<Self, FormulaError> {
        if is_lower_token(name) {
            Ok(AgentId(name.to_string()))
        } else {
            Err(FormulaError::InvalidAgentName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for AgentId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for AgentId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        AgentId::new(&name).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn is_lower_token(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

/// The finite, non-empty set of agents a formula may talk about.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe(BTreeSet<AgentId>);

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let agents = names
            .into_iter()
            .map(|n| AgentId::new(n.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if agents.is_empty() {
            return Err(FormulaError::EmptyUniverse);
        }
        Ok(Universe(agents))
    }

    pub fn contains(&self, agent: &AgentId) -> bool {
        self.0.contains(agent)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.0.iter().any(|a| a.as_str() == name)
    }

    /// Agents in their fixed lexicographic order.
    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Resolves a list of agent names into a group of this universe.
    pub fn group<I, S>(&self, names: I) -> Result<Group, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut members = BTreeSet::new();
        for name in names {
            let agent = AgentId::new(name.as_ref())?;
            if !self.contains(&agent) {
                return Err(FormulaError::UnknownAgent(agent.0));
            }
            members.insert(agent);
        }
        Group::new(members)
    }

    /// Every non-empty subset of the universe, smallest first.
    pub fn groups(&self) -> Vec<Group> {
        let agents: Vec<_> = self.0.iter().cloned().collect();
        let mut out: Vec<Group> = (1u32..(1 << agents.len()))
            .map(|mask| {
                Group(
                    agents
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, a)| a.clone())
                        .collect(),
                )
            })
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

/// A non-empty set of agents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group(BTreeSet<AgentId>);

impl Group {
    pub fn new<I: IntoIterator<Item = AgentId>>(members: I) -> Result<Self, FormulaError> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if members.is_empty() {
            return Err(FormulaError::EmptyGroup);
        }
        Ok(Group(members))
    }

    pub fn singleton(agent: AgentId) -> Self {
        Group(BTreeSet::from([agent]))
    }

    /// Members in the fixed lexicographic agent order.
    pub fn members(&self) -> impl Iterator<Item = &AgentId> + '_ {
        self.0.iter()
    }

    pub fn contains(&self, agent: &AgentId) -> bool {
        self.0.contains(agent)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|a| a.as_str()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// A core formula.
///
/// The derived `Ord` is the structural order used whenever formulas have to
/// be enumerated deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    /// De Morgan negation, evaluated through the star map.
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Material implication.
    Impl(Box<Formula>, Box<Formula>),
    /// Everybody in the group knows.
    Know(Group, Box<Formula>),
    /// Common knowledge in the group.
    Common(Group, Box<Formula>),
    /// Left division: after any update supporting the left side, the right side holds.
    LDiv(Box<Formula>, Box<Formula>),
    /// Iterated left division over the update relation's powers.
    LDivStar(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// A propositional variable. No validation is done here; `_t` is
    /// reserved for [`Formula::top`] and rejected by the parser.
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    pub fn top() -> Self {
        Formula::implies(Formula::var(TOP_VAR), Formula::var(TOP_VAR))
    }

    pub fn bot() -> Self {
        Formula::neg(Formula::top())
    }

    pub fn neg(f: Formula) -> Self {
        Formula::Neg(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Impl(Box::new(l), Box::new(r))
    }

    /// Boolean negation, `f => bot`.
    pub fn not(f: Formula) -> Self {
        Formula::implies(f, Formula::bot())
    }

    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::and(
            Formula::implies(l.clone(), r.clone()),
            Formula::implies(r, l),
        )
    }

    pub fn know(g: Group, f: Formula) -> Self {
        Formula::Know(g, Box::new(f))
    }

    pub fn know_agent(a: AgentId, f: Formula) -> Self {
        Formula::Know(Group::singleton(a), Box::new(f))
    }

    pub fn common(g: Group, f: Formula) -> Self {
        Formula::Common(g, Box::new(f))
    }

    pub fn ldiv(l: Formula, r: Formula) -> Self {
        Formula::LDiv(Box::new(l), Box::new(r))
    }

    pub fn ldiv_star(l: Formula, r: Formula) -> Self {
        Formula::LDivStar(Box::new(l), Box::new(r))
    }

    /// The update diamond `!(l \ !r)`.
    pub fn fuse(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::ldiv(l, Formula::not(r)))
    }

    /// Right-nested conjunction; `top` for an empty list.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .reduce(|acc, f| Formula::and(f, acc))
            .unwrap_or_else(Formula::top)
    }

    /// Right-nested disjunction; `bot` for an empty list.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .reduce(|acc, f| Formula::or(f, acc))
            .unwrap_or_else(Formula::bot)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Impl(l, r)
            if matches!((&**l, &**r), (Formula::Var(a), Formula::Var(b)) if a == TOP_VAR && b == TOP_VAR))
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Formula::Neg(inner) if inner.is_top())
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) => vec![],
            Formula::Neg(f) | Formula::Know(_, f) | Formula::Common(_, f) => vec![f],
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Impl(l, r)
            | Formula::LDiv(l, r)
            | Formula::LDivStar(l, r) => vec![l, r],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// All subtrees, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if out.insert(f.clone()) {
                stack.extend(f.children());
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Var(v) = f {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn groups(&self) -> BTreeSet<Group> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Know(g, _) | Formula::Common(g, _) = f {
                out.insert(g.clone());
            }
        });
        out
    }

    /// Agents mentioned by any modality.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        self.groups()
            .into_iter()
            .flat_map(|g| g.0.into_iter())
            .collect()
    }

    /// True when some update connective occurs.
    pub fn has_updates(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            found |= matches!(f, Formula::LDiv(..) | Formula::LDivStar(..));
        });
        found
    }

    /// True for formulas built from variables with `~`, `&`, `|` and `=>` only.
    pub fn is_propositional(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |f| {
            ok &= matches!(
                f,
                Formula::Var(_)
                    | Formula::Neg(_)
                    | Formula::And(..)
                    | Formula::Or(..)
                    | Formula::Impl(..)
            );
        });
        ok
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parser::print(self))
    }
}

/// The enumeration order on formulas: smaller trees first, ties broken by
/// the derived structural order.
pub fn enumeration_order(a: &Formula, b: &Formula) -> Ordering {
    a.size().cmp(&b.size()).then_with(|| a.cmp(b))
}

/// `~f` unless `f` is already a De Morgan negation, in which case the
/// negation is stripped.
pub fn tilde(f: &Formula) -> Formula {
    match f {
        Formula::Neg(inner) => (**inner).clone(),
        other => Formula::neg(other.clone()),
    }
}

/// The closure of a formula and its negation closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureSet {
    pub phi0: Formula,
    /// Closed under subformulas, the common-knowledge unfolding and group
    /// decomposition, in enumeration order.
    pub closure: Vec<Formula>,
    /// `closure` plus the tilde of every member, in enumeration order.
    pub neg_closure: Vec<Formula>,
}

impl ClosureSet {
    pub fn contains(&self, f: &Formula) -> bool {
        self.closure
            .binary_search_by(|g| enumeration_order(g, f))
            .is_ok()
    }

    pub fn neg_contains(&self, f: &Formula) -> bool {
        self.neg_index(f).is_some()
    }

    /// Position of `f` in the negation closure.
    pub fn neg_index(&self, f: &Formula) -> Option<usize> {
        self.neg_closure
            .binary_search_by(|g| enumeration_order(g, f))
            .ok()
    }
}

/// Computes the closure with a worklist and a seen-set.
///
/// `top` enters as the formula `_t => _t`, so `_t` is a member too.
pub fn closure(phi0: &Formula) -> ClosureSet {
    let mut seen: BTreeSet<Formula> = BTreeSet::new();
    let mut work: VecDeque<Formula> = VecDeque::from([phi0.clone(), Formula::top()]);
    while let Some(f) = work.pop_front() {
        if !seen.insert(f.clone()) {
            continue;
        }
        work.extend(f.children().into_iter().cloned());
        match &f {
            Formula::Common(g, inner) => {
                work.push_back(Formula::know(
                    g.clone(),
                    Formula::and((**inner).clone(), f.clone()),
                ));
            }
            Formula::Know(g, inner) if !g.is_singleton() => {
                for a in g.members() {
                    work.push_back(Formula::know_agent(a.clone(), (**inner).clone()));
                }
            }
            _ => {}
        }
    }
    let mut closure: Vec<Formula> = seen.iter().cloned().collect();
    closure.sort_by(enumeration_order);
    let mut neg: BTreeSet<Formula> = seen.iter().map(tilde).collect();
    neg.extend(seen);
    let mut neg_closure: Vec<Formula> = neg.into_iter().collect();
    neg_closure.sort_by(enumeration_order);
    ClosureSet {
        phi0: phi0.clone(),
        closure,
        neg_closure,
    }
}

/// Expands surface sugar into a core formula, checking groups against the
/// universe.
pub fn desugar(surface: &SurfaceFormula, universe: &Universe) -> Result<Formula, FormulaError> {
    use SurfaceFormula as S;
    let bin = |l: &S, r: &S| -> Result<(Formula, Formula), FormulaError> {
        Ok((desugar(l, universe)?, desugar(r, universe)?))
    };
    Ok(match surface {
        S::Var(name) => {
            if name == TOP_VAR {
                return Err(FormulaError::ReservedVariable(name.clone()));
            }
            Formula::var(name.clone())
        }
        S::Core(f) => f.clone(),
        S::Top => Formula::top(),
        S::Bot => Formula::bot(),
        S::Neg(f) => Formula::neg(desugar(f, universe)?),
        S::Not(f) => Formula::not(desugar(f, universe)?),
        S::And(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::and(l, r)
        }
        S::Or(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::or(l, r)
        }
        S::Impl(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::implies(l, r)
        }
        S::Iff(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::iff(l, r)
        }
        S::Know(names, f) => Formula::know(universe.group(names)?, desugar(f, universe)?),
        S::Common(names, f) => Formula::common(universe.group(names)?, desugar(f, universe)?),
        S::LDiv(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::ldiv(l, r)
        }
        S::LDivStar(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::ldiv_star(l, r)
        }
        S::Fuse(l, r) => {
            let (l, r) = bin(l, r)?;
            Formula::fuse(l, r)
        }
    })
}

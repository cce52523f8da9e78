//! Axiom schemata, inference rules and the Hilbert-style proof checker.
//!
//! Schemata are patterns over formula metavariables (`phi`, `psi`, ...),
//! group metavariables and a modality metavariable `X` ranging over
//! `K` and `CK`. The same patterns drive matching (proof checking) and
//! instantiation (soundness sweeps and conjecture probes).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{Provability, ProvabilityOracle};
use crate::formula::{Formula, Group, Universe};
use crate::parser::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    Know,
    Common,
}

/// Which modality a pattern position accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModalSlot {
    Fixed(Modality),
    /// Bound once per match: the `X_G` of the schema list.
    Var(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSlot {
    pub name: &'static str,
    /// Only single-agent groups bind.
    pub singleton: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Meta(&'static str),
    Lit(Formula),
    Neg(Box<Pattern>),
    And(Box<Pattern>, Box<Pattern>),
    Or(Box<Pattern>, Box<Pattern>),
    Impl(Box<Pattern>, Box<Pattern>),
    Modal(ModalSlot, GroupSlot, Box<Pattern>),
    /// Right-nested conjunction of `K{a} p` over the group's members in
    /// agent order.
    EachAgent(GroupSlot, Box<Pattern>),
    LDiv(Box<Pattern>, Box<Pattern>),
    LDivStar(Box<Pattern>, Box<Pattern>),
}

/// Metavariable assignments collected during a match.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub formulas: BTreeMap<&'static str, Formula>,
    pub groups: BTreeMap<&'static str, Group>,
    pub modalities: BTreeMap<&'static str, Modality>,
}

impl Pattern {
    fn match_into<'p>(
        &'p self,
        f: &Formula,
        b: &mut Bindings,
        deferred: &mut Vec<(&'p Pattern, Formula)>,
    ) -> bool {
        use Pattern as P;
        match (self, f) {
            (P::Meta(name), _) => match b.formulas.get(name) {
                Some(bound) => bound == f,
                None => {
                    b.formulas.insert(name, f.clone());
                    true
                }
            },
            (P::Lit(g), _) => g == f,
            (P::Neg(p), Formula::Neg(x)) => p.match_into(x, b, deferred),
            (P::And(pl, pr), Formula::And(l, r))
            | (P::Or(pl, pr), Formula::Or(l, r))
            | (P::Impl(pl, pr), Formula::Impl(l, r))
            | (P::LDiv(pl, pr), Formula::LDiv(l, r))
            | (P::LDivStar(pl, pr), Formula::LDivStar(l, r)) => {
                pl.match_into(l, b, deferred) && pr.match_into(r, b, deferred)
            }
            (P::Modal(slot, gslot, p), Formula::Know(g, x) | Formula::Common(g, x)) => {
                let modality = if matches!(f, Formula::Know(..)) {
                    Modality::Know
                } else {
                    Modality::Common
                };
                let modal_ok = match slot {
                    ModalSlot::Fixed(m) => *m == modality,
                    ModalSlot::Var(name) => *b.modalities.entry(name).or_insert(modality) == modality,
                };
                modal_ok && bind_group(gslot, g, b) && p.match_into(x, b, deferred)
            }
            (P::EachAgent(..), _) => {
                deferred.push((self, f.clone()));
                true
            }
            _ => false,
        }
    }

    /// One-way structural match of the pattern against a formula.
    pub fn matches(&self, f: &Formula) -> Option<Bindings> {
        let mut b = Bindings::default();
        self.matches_with(f, &mut b).then_some(b)
    }

    /// Matches, extending existing bindings.
    pub fn matches_with(&self, f: &Formula, b: &mut Bindings) -> bool {
        let mut deferred = Vec::new();
        if !self.match_into(f, b, &mut deferred) {
            return false;
        }
        deferred
            .into_iter()
            .all(|(p, g)| p.instantiate(b).as_ref() == Some(&g))
    }

    /// Substitutes bindings; `None` if a metavariable is unbound.
    pub fn instantiate(&self, b: &Bindings) -> Option<Formula> {
        use Pattern as P;
        let bin = |l: &Pattern, r: &Pattern| Some((l.instantiate(b)?, r.instantiate(b)?));
        Some(match self {
            P::Meta(name) => b.formulas.get(name)?.clone(),
            P::Lit(f) => f.clone(),
            P::Neg(p) => Formula::neg(p.instantiate(b)?),
            P::And(l, r) => bin(l, r).map(|(l, r)| Formula::and(l, r))?,
            P::Or(l, r) => bin(l, r).map(|(l, r)| Formula::or(l, r))?,
            P::Impl(l, r) => bin(l, r).map(|(l, r)| Formula::implies(l, r))?,
            P::LDiv(l, r) => bin(l, r).map(|(l, r)| Formula::ldiv(l, r))?,
            P::LDivStar(l, r) => bin(l, r).map(|(l, r)| Formula::ldiv_star(l, r))?,
            P::Modal(slot, g, p) => {
                let modality = match slot {
                    ModalSlot::Fixed(m) => *m,
                    ModalSlot::Var(name) => *b.modalities.get(name)?,
                };
                let g = b.groups.get(g.name)?.clone();
                let inner = p.instantiate(b)?;
                match modality {
                    Modality::Know => Formula::know(g, inner),
                    Modality::Common => Formula::common(g, inner),
                }
            }
            P::EachAgent(g, p) => {
                let g = b.groups.get(g.name)?;
                let inner = p.instantiate(b)?;
                Formula::conjunction(
                    g.members()
                        .map(|a| Formula::know_agent(a.clone(), inner.clone())),
                )
            }
        })
    }

    /// Metavariable names in first-occurrence order.
    pub fn metavariables(&self) -> (Vec<&'static str>, Vec<GroupSlot>, Vec<&'static str>) {
        let mut metas = Vec::new();
        let mut groups: Vec<GroupSlot> = Vec::new();
        let mut modals = Vec::new();
        self.collect_metas(&mut metas, &mut groups, &mut modals);
        (metas, groups, modals)
    }

    fn collect_metas(
        &self,
        metas: &mut Vec<&'static str>,
        groups: &mut Vec<GroupSlot>,
        modals: &mut Vec<&'static str>,
    ) {
        use Pattern as P;
        match self {
            P::Meta(n) => {
                if !metas.contains(n) {
                    metas.push(n)
                }
            }
            P::Lit(_) => {}
            P::Neg(p) => p.collect_metas(metas, groups, modals),
            P::And(l, r) | P::Or(l, r) | P::Impl(l, r) | P::LDiv(l, r) | P::LDivStar(l, r) => {
                l.collect_metas(metas, groups, modals);
                r.collect_metas(metas, groups, modals);
            }
            P::Modal(slot, g, p) => {
                if let ModalSlot::Var(n) = slot {
                    if !modals.contains(n) {
                        modals.push(n);
                    }
                }
                if !groups.iter().any(|h| h.name == g.name) {
                    groups.push(*g);
                }
                p.collect_metas(metas, groups, modals);
            }
            P::EachAgent(g, p) => {
                if !groups.iter().any(|h| h.name == g.name) {
                    groups.push(*g);
                }
                p.collect_metas(metas, groups, modals);
            }
        }
    }
}

fn bind_group(slot: &GroupSlot, g: &Group, b: &mut Bindings) -> bool {
    if slot.singleton && !g.is_singleton() {
        return false;
    }
    match b.groups.get(slot.name) {
        Some(bound) => bound == g,
        None => {
            b.groups.insert(slot.name, g.clone());
            true
        }
    }
}

mod build {
    use super::*;

    pub fn m(name: &'static str) -> Pattern {
        Pattern::Meta(name)
    }
    pub fn neg(p: Pattern) -> Pattern {
        Pattern::Neg(Box::new(p))
    }
    pub fn and(l: Pattern, r: Pattern) -> Pattern {
        Pattern::And(Box::new(l), Box::new(r))
    }
    pub fn or(l: Pattern, r: Pattern) -> Pattern {
        Pattern::Or(Box::new(l), Box::new(r))
    }
    pub fn imp(l: Pattern, r: Pattern) -> Pattern {
        Pattern::Impl(Box::new(l), Box::new(r))
    }
    pub fn iff(l: Pattern, r: Pattern) -> Pattern {
        and(imp(l.clone(), r.clone()), imp(r, l))
    }
    pub fn not(p: Pattern) -> Pattern {
        imp(p, Pattern::Lit(Formula::bot()))
    }
    pub fn div(l: Pattern, r: Pattern) -> Pattern {
        Pattern::LDiv(Box::new(l), Box::new(r))
    }
    pub fn div_star(l: Pattern, r: Pattern) -> Pattern {
        Pattern::LDivStar(Box::new(l), Box::new(r))
    }
    const G: GroupSlot = GroupSlot {
        name: "G",
        singleton: false,
    };
    const A: GroupSlot = GroupSlot {
        name: "a",
        singleton: true,
    };
    pub fn x_g(p: Pattern) -> Pattern {
        Pattern::Modal(ModalSlot::Var("X"), G, Box::new(p))
    }
    pub fn k_g(p: Pattern) -> Pattern {
        Pattern::Modal(ModalSlot::Fixed(Modality::Know), G, Box::new(p))
    }
    pub fn ck_g(p: Pattern) -> Pattern {
        Pattern::Modal(ModalSlot::Fixed(Modality::Common), G, Box::new(p))
    }
    pub fn k_a(p: Pattern) -> Pattern {
        Pattern::Modal(ModalSlot::Fixed(Modality::Know), A, Box::new(p))
    }
    pub fn each(p: Pattern) -> Pattern {
        Pattern::EachAgent(G, Box::new(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaKind {
    Axiom(Pattern),
    Rule {
        premises: Vec<Pattern>,
        conclusion: Pattern,
    },
}

/// A named axiom schema or inference rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: SchemaKind,
}

impl Schema {
    pub fn is_rule(&self) -> bool {
        matches!(self.kind, SchemaKind::Rule { .. })
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            SchemaKind::Axiom(_) => 0,
            SchemaKind::Rule { premises, .. } => premises.len(),
        }
    }

    /// All patterns, premises first.
    pub fn patterns(&self) -> Vec<&Pattern> {
        match &self.kind {
            SchemaKind::Axiom(p) => vec![p],
            SchemaKind::Rule {
                premises,
                conclusion,
            } => premises.iter().chain(std::iter::once(conclusion)).collect(),
        }
    }

    pub fn metavariables(&self) -> (Vec<&'static str>, Vec<GroupSlot>, Vec<&'static str>) {
        let mut out = (Vec::new(), Vec::<GroupSlot>::new(), Vec::new());
        for p in self.patterns() {
            let (m, g, x) = p.metavariables();
            for v in m {
                if !out.0.contains(&v) {
                    out.0.push(v);
                }
            }
            for v in g {
                if !out.1.iter().any(|h| h.name == v.name) {
                    out.1.push(v);
                }
            }
            for v in x {
                if !out.2.contains(&v) {
                    out.2.push(v);
                }
            }
        }
        out
    }

    /// Every instance with formula metavariables drawn from `pool`, groups
    /// from the universe's non-empty subsets and `X` from `{K, CK}`.
    /// Order: odometer over metavariables in first-occurrence order.
    pub fn instances(&self, pool: &[Formula], universe: &Universe) -> Vec<SchemaInstance> {
        let (metas, groups, modals) = self.metavariables();
        let all_groups = universe.groups();
        let mut choices: Vec<Vec<Choice>> = Vec::new();
        for _ in &metas {
            choices.push(pool.iter().cloned().map(Choice::Formula).collect());
        }
        for g in &groups {
            choices.push(
                all_groups
                    .iter()
                    .filter(|h| !g.singleton || h.is_singleton())
                    .cloned()
                    .map(Choice::Group)
                    .collect(),
            );
        }
        for _ in &modals {
            choices.push(vec![
                Choice::Modality(Modality::Know),
                Choice::Modality(Modality::Common),
            ]);
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; choices.len()];
        if choices.iter().any(Vec::is_empty) {
            return out;
        }
        loop {
            let mut b = Bindings::default();
            for (slot, (&i, opts)) in idx.iter().zip(&choices).enumerate() {
                match &opts[i] {
                    Choice::Formula(f) => {
                        b.formulas.insert(metas[slot], f.clone());
                    }
                    Choice::Group(g) => {
                        b.groups.insert(groups[slot - metas.len()].name, g.clone());
                    }
                    Choice::Modality(m) => {
                        b.modalities.insert(modals[slot - metas.len() - groups.len()], *m);
                    }
                }
            }
            let formulas: Vec<Formula> = self
                .patterns()
                .iter()
                .map(|p| p.instantiate(&b).expect("all metavariables bound"))
                .collect();
            let (conclusion, premises) = formulas.split_last().expect("at least one pattern");
            out.push(SchemaInstance {
                premises: premises.to_vec(),
                conclusion: conclusion.clone(),
            });
            // odometer, last slot fastest
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

enum Choice {
    Formula(Formula),
    Group(Group),
    Modality(Modality),
}

/// A concrete axiom (no premises) or rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaInstance {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

pub const A0: &str = "A0";

/// All pattern-based schemata: A1 to A12, the introspection and update
/// extras, and rules R0 to R7. A0 is handled by [`is_tautology_instance`].
pub fn registry() -> Vec<Schema> {
    use build::*;
    let (phi, psi, chi) = (|| m("phi"), || m("psi"), || m("chi"));
    let axiom = |name, description, p| Schema {
        name,
        description,
        kind: SchemaKind::Axiom(p),
    };
    let rule = |name, description, premises, conclusion| Schema {
        name,
        description,
        kind: SchemaKind::Rule {
            premises,
            conclusion,
        },
    };
    vec![
        axiom("A1", "phi => ~~phi", imp(phi(), neg(neg(phi())))),
        axiom("A2", "~~phi => phi", imp(neg(neg(phi())), phi())),
        axiom(
            "A3",
            "(~phi & ~psi) => ~(phi | psi)",
            imp(and(neg(phi()), neg(psi())), neg(or(phi(), psi()))),
        ),
        axiom(
            "A4",
            "~(phi & psi) => (~phi | ~psi)",
            imp(neg(and(phi(), psi())), or(neg(phi()), neg(psi()))),
        ),
        axiom(
            "A5",
            "X_G phi & X_G psi => X_G (phi & psi)",
            imp(and(x_g(phi()), x_g(psi())), x_g(and(phi(), psi()))),
        ),
        axiom("A6", "X_G phi => phi", imp(x_g(phi()), phi())),
        axiom(
            "A7",
            "K_G phi <=> conjunction of K_a phi over a in G",
            iff(k_g(phi()), each(phi())),
        ),
        axiom(
            "A8",
            "CK_G phi => K_G (phi & CK_G phi)",
            imp(ck_g(phi()), k_g(and(phi(), ck_g(phi())))),
        ),
        axiom(
            "A9",
            "(chi \\ phi & chi \\ psi) => chi \\ (phi & psi)",
            imp(and(div(chi(), phi()), div(chi(), psi())), div(chi(), and(phi(), psi()))),
        ),
        axiom(
            "A10",
            "(chi \\* phi & chi \\* psi) => chi \\* (phi & psi)",
            imp(
                and(div_star(chi(), phi()), div_star(chi(), psi())),
                div_star(chi(), and(phi(), psi())),
            ),
        ),
        axiom(
            "A11",
            "phi \\* psi => (phi \\ psi & phi \\ (phi \\* psi))",
            imp(
                div_star(phi(), psi()),
                and(div(phi(), psi()), div(phi(), div_star(phi(), psi()))),
            ),
        ),
        axiom(
            "A12",
            "phi \\ (phi \\* psi) => phi \\* psi",
            imp(div(phi(), div_star(phi(), psi())), div_star(phi(), psi())),
        ),
        axiom(
            "PI",
            "positive introspection: K_a phi => K_a K_a phi",
            imp(k_a(phi()), k_a(k_a(phi()))),
        ),
        axiom(
            "BNI",
            "Boolean negative introspection: !K_a phi => K_a !K_a phi",
            imp(not(k_a(phi())), k_a(not(k_a(phi())))),
        ),
        axiom(
            "DNI",
            "De Morgan negative introspection: ~K_a phi => K_a ~K_a phi",
            imp(neg(k_a(phi())), k_a(neg(k_a(phi())))),
        ),
        axiom(
            "MON",
            "monotonicity: phi \\ chi => phi \\ (psi \\ chi)",
            imp(div(phi(), chi()), div(phi(), div(psi(), chi()))),
        ),
        axiom(
            "SUC",
            "success: phi \\ psi => phi \\ (phi & psi)",
            imp(div(phi(), psi()), div(phi(), and(phi(), psi()))),
        ),
        rule("R0", "modus ponens", vec![phi(), imp(phi(), psi())], psi()),
        rule(
            "R1",
            "phi => psi / ~psi => ~phi",
            vec![imp(phi(), psi())],
            imp(neg(psi()), neg(phi())),
        ),
        rule("R2", "phi / X_G phi", vec![phi()], x_g(phi())),
        rule(
            "R3",
            "phi => K_G (psi & phi) / phi => CK_G psi",
            vec![imp(phi(), k_g(and(psi(), phi())))],
            imp(phi(), ck_g(psi())),
        ),
        rule(
            "R4",
            "phi1 => psi1, phi2 => psi2 / psi1 \\ phi2 => phi1 \\ psi2",
            vec![imp(m("phi1"), m("psi1")), imp(m("phi2"), m("psi2"))],
            imp(div(m("psi1"), m("phi2")), div(m("phi1"), m("psi2"))),
        ),
        rule("R5", "phi / psi \\ phi", vec![phi()], div(psi(), phi())),
        rule(
            "R6",
            "phi1 => psi1, phi2 => psi2 / psi1 \\* phi2 => phi1 \\* psi2",
            vec![imp(m("phi1"), m("psi1")), imp(m("phi2"), m("psi2"))],
            imp(div_star(m("psi1"), m("phi2")), div_star(m("phi1"), m("psi2"))),
        ),
        rule(
            "R7",
            "phi => psi \\ phi / phi => psi \\* phi",
            vec![imp(phi(), div(psi(), phi()))],
            imp(phi(), div_star(psi(), phi())),
        ),
    ]
}

pub fn schema(name: &str) -> Option<Schema> {
    registry().into_iter().find(|s| s.name == name)
}

/// Names of the extra schemata a system may opt into.
pub const EXTRAS: [&str; 5] = ["PI", "BNI", "DNI", "MON", "SUC"];

/// Abstracts every maximal subformula whose head is not `&`, `|` or `=>`
/// into an atom; structurally equal subformulas share an atom.
pub fn abstract_positive(f: &Formula) -> (Skeleton, Vec<Formula>) {
    fn go(f: &Formula, atoms: &mut Vec<Formula>) -> Skeleton {
        let b = |l: &Formula, r: &Formula, atoms: &mut Vec<Formula>| {
            (Box::new(go(l, atoms)), Box::new(go(r, atoms)))
        };
        match f {
            Formula::And(l, r) => {
                let (l, r) = b(l, r, atoms);
                Skeleton::And(l, r)
            }
            Formula::Or(l, r) => {
                let (l, r) = b(l, r, atoms);
                Skeleton::Or(l, r)
            }
            Formula::Impl(l, r) => {
                let (l, r) = b(l, r, atoms);
                Skeleton::Impl(l, r)
            }
            other => match atoms.iter().position(|a| a == other) {
                Some(i) => Skeleton::Atom(i),
                None => {
                    atoms.push(other.clone());
                    Skeleton::Atom(atoms.len() - 1)
                }
            },
        }
    }
    let mut atoms = Vec::new();
    let s = go(f, &mut atoms);
    (s, atoms)
}

/// A classical formula over numbered atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Skeleton {
    Atom(usize),
    And(Box<Skeleton>, Box<Skeleton>),
    Or(Box<Skeleton>, Box<Skeleton>),
    Impl(Box<Skeleton>, Box<Skeleton>),
}

impl Skeleton {
    pub fn eval(&self, assignment: u64) -> bool {
        match self {
            Skeleton::Atom(i) => assignment & (1 << i) != 0,
            Skeleton::And(l, r) => l.eval(assignment) && r.eval(assignment),
            Skeleton::Or(l, r) => l.eval(assignment) || r.eval(assignment),
            Skeleton::Impl(l, r) => !l.eval(assignment) || r.eval(assignment),
        }
    }
}

/// Truth tables are only built up to this many abstracted atoms; larger
/// formulas are rejected as A0 instances.
pub const MAX_TAUTOLOGY_ATOMS: usize = 20;

/// A0: a substitution instance of a classical tautology in `&`, `|`, `=>`.
pub fn is_tautology_instance(f: &Formula) -> bool {
    let (skeleton, atoms) = abstract_positive(f);
    if atoms.len() > MAX_TAUTOLOGY_ATOMS {
        return false;
    }
    (0..1u64 << atoms.len()).all(|v| skeleton.eval(v))
}

/// Whether `f` is an instance of the named axiom.
pub fn match_axiom(name: &str, f: &Formula) -> bool {
    if name == A0 {
        return is_tautology_instance(f);
    }
    match schema(name) {
        Some(Schema {
            kind: SchemaKind::Axiom(p),
            ..
        }) => p.matches(f).is_some(),
        _ => false,
    }
}

/// Whether `conclusion` follows from `premises` by the named rule. Two-premise
/// rules accept their premises in either order.
pub fn check_rule(name: &str, premises: &[Formula], conclusion: &Formula) -> bool {
    let Some(Schema {
        kind: SchemaKind::Rule {
            premises: pats,
            conclusion: cpat,
        },
        ..
    }) = schema(name)
    else {
        return false;
    };
    if pats.len() != premises.len() {
        return false;
    }
    let attempt = |order: &[usize]| {
        let mut b = Bindings::default();
        order
            .iter()
            .zip(&pats)
            .all(|(&i, p)| p.matches_with(&premises[i], &mut b))
            && cpat.matches_with(conclusion, &mut b)
    };
    match premises.len() {
        2 => attempt(&[0, 1]) || attempt(&[1, 0]),
        n => attempt(&(0..n).collect::<Vec<_>>()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "GrFDE")]
    GrFde,
    #[serde(rename = "GrUpFDE")]
    GrUpFde,
    #[serde(rename = "GrUpFDEStar")]
    GrUpFdeStar,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::GrFde => "GrFDE",
            SystemKind::GrUpFde => "GrUpFDE",
            SystemKind::GrUpFdeStar => "GrUpFDEStar",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [SystemKind::GrFde, SystemKind::GrUpFde, SystemKind::GrUpFdeStar]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// A proof system: one of the three base systems plus optional extras.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofSystem {
    pub kind: SystemKind,
    pub extras: BTreeSet<String>,
}

impl ProofSystem {
    pub fn new(kind: SystemKind) -> Self {
        ProofSystem {
            kind,
            extras: BTreeSet::new(),
        }
    }

    pub fn with_extra(mut self, name: &str) -> Self {
        self.extras.insert(name.to_string());
        self
    }

    pub fn axioms(&self) -> Vec<String> {
        let last = match self.kind {
            SystemKind::GrFde => 8,
            SystemKind::GrUpFde => 9,
            SystemKind::GrUpFdeStar => 12,
        };
        (0..=last)
            .map(|i| format!("A{i}"))
            .chain(self.extras.iter().cloned())
            .collect()
    }

    pub fn rules(&self) -> Vec<String> {
        let last = match self.kind {
            SystemKind::GrFde => 3,
            SystemKind::GrUpFde => 5,
            SystemKind::GrUpFdeStar => 7,
        };
        (0..=last).map(|i| format!("R{i}")).collect()
    }

    pub fn has_axiom(&self, name: &str) -> bool {
        self.axioms().iter().any(|a| a == name)
    }

    pub fn has_rule(&self, name: &str) -> bool {
        self.rules().iter().any(|r| r == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(String),
    Rule(String, Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub system: ProofSystem,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofFailure {
    #[error("proof has no steps")]
    Empty,
    #[error("axiom {0} is not part of the system")]
    AxiomNotInSystem(String),
    #[error("rule {0} is not part of the system")]
    RuleNotInSystem(String),
    #[error("formula is not an instance of {0}")]
    AxiomMismatch(String),
    #[error("{rule} expects {expected} premises, got {found}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("premise {0} does not refer to an earlier step")]
    PremiseNotEarlier(usize),
    #[error("formula does not follow by {0}")]
    RuleMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {reason}")]
pub struct ProofError {
    pub step: usize,
    pub reason: ProofFailure,
}

impl Proof {
    /// The formula proved by the last step.
    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }

    pub fn from_doc(doc: &ProofDoc, default_universe: &Universe) -> Result<Self, ProofLoadError> {
        let kind = SystemKind::from_name(&doc.system)
            .ok_or_else(|| ProofLoadError::UnknownSystem(doc.system.clone()))?;
        let mut system = ProofSystem::new(kind);
        for e in &doc.extras {
            if !EXTRAS.contains(&e.as_str()) {
                return Err(ProofLoadError::UnknownSystem(e.clone()));
            }
            system.extras.insert(e.clone());
        }
        let universe = match &doc.agents {
            Some(names) => Universe::new(names).map_err(|e| ProofLoadError::Agents(e.to_string()))?,
            None => default_universe.clone(),
        };
        let mut steps = Vec::new();
        for (i, s) in doc.steps.iter().enumerate() {
            let formula =
                parse(&s.formula, &universe).map_err(|e| ProofLoadError::Formula(i, e))?;
            let justification = match (&s.axiom, &s.rule) {
                (Some(a), None) => Justification::Axiom(a.clone()),
                (None, Some(r)) => Justification::Rule(r.clone(), s.premises.clone().unwrap_or_default()),
                _ => return Err(ProofLoadError::Justification(i)),
            };
            steps.push(Step {
                formula,
                justification,
            });
        }
        Ok(Proof { system, steps })
    }

    pub fn from_json(text: &str, default_universe: &Universe) -> Result<Self, ProofLoadError> {
        let doc: ProofDoc =
            serde_json::from_str(text).map_err(|e| ProofLoadError::Json(e.to_string()))?;
        Self::from_doc(&doc, default_universe)
    }

    pub fn to_doc(&self) -> ProofDoc {
        ProofDoc {
            system: self.system.kind.name().to_string(),
            extras: self.system.extras.iter().cloned().collect(),
            agents: None,
            steps: self
                .steps
                .iter()
                .map(|s| match &s.justification {
                    Justification::Axiom(a) => StepDoc {
                        formula: s.formula.to_string(),
                        axiom: Some(a.clone()),
                        rule: None,
                        premises: None,
                    },
                    Justification::Rule(r, ps) => StepDoc {
                        formula: s.formula.to_string(),
                        axiom: None,
                        rule: Some(r.clone()),
                        premises: Some(ps.clone()),
                    },
                })
                .collect(),
        }
    }
}

/// Checks every step; the first failing step is reported.
pub fn check_proof(pf: &Proof) -> Result<(), ProofError> {
    if pf.steps.is_empty() {
        return Err(ProofError {
            step: 0,
            reason: ProofFailure::Empty,
        });
    }
    for (i, step) in pf.steps.iter().enumerate() {
        let fail = |reason| Err(ProofError { step: i, reason });
        match &step.justification {
            Justification::Axiom(name) => {
                if !pf.system.has_axiom(name) {
                    return fail(ProofFailure::AxiomNotInSystem(name.clone()));
                }
                if !match_axiom(name, &step.formula) {
                    return fail(ProofFailure::AxiomMismatch(name.clone()));
                }
            }
            Justification::Rule(name, premises) => {
                if !pf.system.has_rule(name) {
                    return fail(ProofFailure::RuleNotInSystem(name.clone()));
                }
                let expected = schema(name).map(|s| s.arity()).unwrap_or(0);
                if premises.len() != expected {
                    return fail(ProofFailure::Arity {
                        rule: name.clone(),
                        expected,
                        found: premises.len(),
                    });
                }
                if let Some(&bad) = premises.iter().find(|&&p| p >= i) {
                    return fail(ProofFailure::PremiseNotEarlier(bad));
                }
                let prem: Vec<Formula> =
                    premises.iter().map(|&p| pf.steps[p].formula.clone()).collect();
                if !check_rule(name, &prem, &step.formula) {
                    return fail(ProofFailure::RuleMismatch(name.clone()));
                }
            }
        }
    }
    Ok(())
}

/// The JSON form of a proof. Formulas are in surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDoc {
    pub system: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<String>>,
    pub steps: Vec<StepDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axiom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premises: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofLoadError {
    #[error("malformed proof document: {0}")]
    Json(String),
    #[error("unknown proof system or extra `{0}`")]
    UnknownSystem(String),
    #[error("bad agent list: {0}")]
    Agents(String),
    #[error("step {0}: {1}")]
    Formula(usize, ParseError),
    #[error("step {0}: exactly one of `axiom` or `rule` is required")]
    Justification(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivability {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Derivability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `gamma |- delta`: asks the oracle about `/\gamma => \/delta`, with the
/// empty conjunction `top` and the empty disjunction `bot`.
pub fn derives(gamma: &[Formula], delta: &[Formula], oracle: &dyn ProvabilityOracle) -> Derivability {
    let query = Formula::implies(
        Formula::conjunction(gamma.iter().cloned()),
        Formula::disjunction(delta.iter().cloned()),
    );
    match oracle.query(&query) {
        Provability::Provable => Derivability::Yes,
        Provability::Refuted => Derivability::No,
        Provability::Unknown => Derivability::Unknown,
    }
}

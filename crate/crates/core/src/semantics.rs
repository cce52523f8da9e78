//! Finite group update models and the satisfaction relation.
//!
//! A model has states `0..n`, one reflexive accessibility relation per
//! agent, a period-two star map, a set of update triples `(x, Y, z)` and a
//! valuation. Formulas are compiled into a hash-consed node list and
//! evaluated bottom-up, so shared subformulas are computed once.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{AgentId, Formula, Group};
use crate::stateset::StateSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("relation of agent `{agent}` is not reflexive at state {state}")]
    NonReflexive { agent: String, state: usize },
    #[error("star is not an involution at state {state}")]
    NotInvolution { state: usize },
    #[error("{what}: index {index} out of range for {states} states")]
    OutOfRange {
        what: String,
        index: usize,
        states: usize,
    },
    #[error("star has length {found}, expected {expected}")]
    StarLength { expected: usize, found: usize },
    #[error("agent `{0}` is not part of the model")]
    UnknownAgent(String),
    #[error("agent list is empty or has duplicates")]
    BadAgents,
    #[error("update power index must be at least 1")]
    ZeroPower,
    #[error("frame sweep needs {needed} valuations, cap is {cap}")]
    FrameTooLarge { needed: u128, cap: u128 },
    #[error("malformed model document: {0}")]
    Document(String),
}

/// One update triple: updating `from` with the trigger may yield `to`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub from: usize,
    pub trigger: StateSet,
    pub to: usize,
}

/// States, accessibility, star and update relation; no valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    states: usize,
    agents: Vec<AgentId>,
    /// `access[agent][x]` is the successor set of `x`.
    access: Vec<Vec<StateSet>>,
    star: Vec<usize>,
    updates: Vec<Update>,
}

impl Frame {
    /// Assembles a frame, checking index ranges only. Reflexivity and the
    /// star condition are checked by [`Frame::validate`].
    pub fn new(
        states: usize,
        relations: Vec<(AgentId, Vec<(usize, usize)>)>,
        star: Vec<usize>,
        updates: Vec<(usize, Vec<usize>, usize)>,
    ) -> Result<Self, ModelError> {
        let range = |what: &str, index: usize| ModelError::OutOfRange {
            what: what.to_string(),
            index,
            states,
        };
        let mut rels: BTreeMap<AgentId, Vec<(usize, usize)>> = BTreeMap::new();
        for (a, pairs) in relations {
            if rels.insert(a, pairs).is_some() {
                return Err(ModelError::BadAgents);
            }
        }
        if rels.is_empty() {
            return Err(ModelError::BadAgents);
        }
        let mut agents = Vec::new();
        let mut access = Vec::new();
        for (a, pairs) in rels {
            let mut succ = vec![StateSet::empty(states); states];
            for (x, y) in pairs {
                if x >= states {
                    return Err(range(&format!("relation {a}"), x));
                }
                if y >= states {
                    return Err(range(&format!("relation {a}"), y));
                }
                succ[x].insert(y);
            }
            agents.push(a);
            access.push(succ);
        }
        if star.len() != states {
            return Err(ModelError::StarLength {
                expected: states,
                found: star.len(),
            });
        }
        if let Some(&bad) = star.iter().find(|&&s| s >= states) {
            return Err(range("star", bad));
        }
        let mut triples = BTreeSet::new();
        for (from, trigger, to) in updates {
            if from >= states {
                return Err(range("update source", from));
            }
            if to >= states {
                return Err(range("update target", to));
            }
            let trigger =
                StateSet::from_indices(states, trigger).map_err(|i| range("update trigger", i))?;
            triples.insert(Update { from, trigger, to });
        }
        Ok(Frame {
            states,
            agents,
            access,
            star,
            updates: triples.into_iter().collect(),
        })
    }

    /// Internal constructor for enumerators that build valid data directly.
    pub(crate) fn from_raw(
        states: usize,
        agents: Vec<AgentId>,
        access: Vec<Vec<StateSet>>,
        star: Vec<usize>,
        updates: Vec<Update>,
    ) -> Self {
        Frame {
            states,
            agents,
            access,
            star,
            updates,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn star(&self) -> &[usize] {
        &self.star
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    pub fn successors(&self, agent: &AgentId) -> Result<&[StateSet], ModelError> {
        let i = self.agent_index(agent)?;
        Ok(&self.access[i])
    }

    fn agent_index(&self, agent: &AgentId) -> Result<usize, ModelError> {
        self.agents
            .binary_search(agent)
            .map_err(|_| ModelError::UnknownAgent(agent.to_string()))
    }

    pub fn relation(&self, agent: &AgentId) -> Result<BTreeSet<(usize, usize)>, ModelError> {
        Ok(pairs(self.successors(agent)?))
    }

    /// Checks reflexivity of every relation and the period-two star.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.star.len() != self.states {
            return Err(ModelError::StarLength {
                expected: self.states,
                found: self.star.len(),
            });
        }
        for (x, &s) in self.star.iter().enumerate() {
            if s >= self.states {
                return Err(ModelError::OutOfRange {
                    what: "star".into(),
                    index: s,
                    states: self.states,
                });
            }
            if self.star[s] != x {
                return Err(ModelError::NotInvolution { state: x });
            }
        }
        for (a, succ) in self.agents.iter().zip(&self.access) {
            for (x, s) in succ.iter().enumerate() {
                if !s.contains(x) {
                    return Err(ModelError::NonReflexive {
                        agent: a.to_string(),
                        state: x,
                    });
                }
            }
        }
        Ok(())
    }

    /// Successor sets of `R_G`, the union of the members' relations.
    pub fn group_successors(&self, g: &Group) -> Result<Vec<StateSet>, ModelError> {
        let mut out = vec![StateSet::empty(self.states); self.states];
        for a in g.members() {
            let i = self.agent_index(a)?;
            for (o, s) in out.iter_mut().zip(&self.access[i]) {
                o.union_with(s);
            }
        }
        Ok(out)
    }

    /// Successor sets of the reflexive transitive closure of `R_G`.
    pub fn group_star_successors(&self, g: &Group) -> Result<Vec<StateSet>, ModelError> {
        let mut reach = self.group_successors(g)?;
        for (x, r) in reach.iter_mut().enumerate() {
            r.insert(x);
        }
        for k in 0..self.states {
            let via = reach[k].clone();
            for r in reach.iter_mut() {
                if r.contains(k) {
                    r.union_with(&via);
                }
            }
        }
        Ok(reach)
    }

    /// The union of all update powers, as a sorted triple list.
    pub fn update_star(&self) -> Vec<Update> {
        let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); self.states];
        for u in &self.updates {
            by_source[u.from].push(u.to);
        }
        let mut known: BTreeSet<Update> = self.updates.iter().cloned().collect();
        let mut frontier: Vec<Update> = self.updates.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            // (x, U0, v) in U and (v, Y, z) newly derived gives (x, Y, z).
            for t in &frontier {
                for (x, targets) in by_source.iter().enumerate() {
                    if targets.contains(&t.from) {
                        let derived = Update {
                            from: x,
                            trigger: t.trigger.clone(),
                            to: t.to,
                        };
                        if known.insert(derived.clone()) {
                            next.push(derived);
                        }
                    }
                }
            }
            frontier = next;
        }
        known.into_iter().collect()
    }

    /// `R^k` for `k >= 1`.
    pub fn update_power(&self, k: usize) -> Result<BTreeSet<Update>, ModelError> {
        if k == 0 {
            return Err(ModelError::ZeroPower);
        }
        let mut power: BTreeSet<Update> = self.updates.iter().cloned().collect();
        for _ in 1..k {
            let mut next = BTreeSet::new();
            for first in &self.updates {
                for rest in power.iter().filter(|t| t.from == first.to) {
                    next.insert(Update {
                        from: first.from,
                        trigger: rest.trigger.clone(),
                        to: rest.to,
                    });
                }
            }
            power = next;
        }
        Ok(power)
    }
}

fn pairs(succ: &[StateSet]) -> BTreeSet<(usize, usize)> {
    succ.iter()
        .enumerate()
        .flat_map(|(x, s)| s.iter().map(move |y| (x, y)))
        .collect()
}

/// A frame together with a valuation. Variables without an entry denote
/// the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupUpdateModel {
    pub frame: Frame,
    pub valuation: BTreeMap<String, StateSet>,
}

impl GroupUpdateModel {
    pub fn new(frame: Frame, valuation: BTreeMap<String, Vec<usize>>) -> Result<Self, ModelError> {
        let n = frame.states;
        let valuation = valuation
            .into_iter()
            .map(|(v, xs)| {
                StateSet::from_indices(n, xs)
                    .map(|s| (v.clone(), s))
                    .map_err(|index| ModelError::OutOfRange {
                        what: format!("valuation of {v}"),
                        index,
                        states: n,
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(GroupUpdateModel { frame, valuation })
    }

    pub fn states(&self) -> usize {
        self.frame.states
    }

    pub fn value(&self, var: &str) -> StateSet {
        self.valuation
            .get(var)
            .cloned()
            .unwrap_or_else(|| StateSet::empty(self.frame.states))
    }

    pub fn to_doc(&self) -> ModelDoc {
        let f = &self.frame;
        ModelDoc {
            agents: f.agents.iter().map(|a| a.to_string()).collect(),
            states: f.states,
            star: f.star.clone(),
            relations: f
                .agents
                .iter()
                .zip(&f.access)
                .map(|(a, s)| (a.to_string(), pairs(s).into_iter().map(|(x, y)| [x, y]).collect()))
                .collect(),
            update: f
                .updates
                .iter()
                .map(|u| UpdateDoc {
                    from: u.from,
                    trigger: u.trigger.to_vec(),
                    to: u.to,
                })
                .collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(v, s)| (v.clone(), s.to_vec()))
                .collect(),
        }
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self, ModelError> {
        let mut relations = Vec::new();
        let declared: BTreeSet<&str> = doc.agents.iter().map(String::as_str).collect();
        if declared.len() != doc.agents.len() {
            return Err(ModelError::BadAgents);
        }
        for name in doc.relations.keys() {
            if !declared.contains(name.as_str()) {
                return Err(ModelError::UnknownAgent(name.clone()));
            }
        }
        for name in &doc.agents {
            let agent =
                AgentId::new(name).map_err(|e| ModelError::Document(e.to_string()))?;
            let pairs = doc
                .relations
                .get(name)
                .map(|ps| ps.iter().map(|[x, y]| (*x, *y)).collect())
                .unwrap_or_default();
            relations.push((agent, pairs));
        }
        let updates = doc
            .update
            .iter()
            .map(|u| (u.from, u.trigger.clone(), u.to))
            .collect();
        let frame = Frame::new(doc.states, relations, doc.star.clone(), updates)?;
        GroupUpdateModel::new(frame, doc.valuation.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("model documents serialize")
    }

    /// Parses and validates a model document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
        let m = GroupUpdateModel::from_doc(&doc)?;
        validate_model(&m)?;
        Ok(m)
    }
}

/// The JSON form of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub agents: Vec<String>,
    pub states: usize,
    pub star: Vec<usize>,
    #[serde(rename = "R")]
    pub relations: BTreeMap<String, Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub update: Vec<UpdateDoc>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateDoc {
    pub from: usize,
    pub trigger: Vec<usize>,
    pub to: usize,
}

/// The set of states where a formula holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub formula: Formula,
    pub states: StateSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Var(usize),
    Neg(usize),
    And(usize, usize),
    Or(usize, usize),
    Impl(usize, usize),
    Know(usize, usize),
    Common(usize, usize),
    LDiv(usize, usize),
    LDivStar(usize, usize),
}

/// A set of formulas compiled into one shared node list.
#[derive(Debug, Clone)]
pub struct Compiled {
    nodes: Vec<Node>,
    roots: Vec<usize>,
    vars: Vec<String>,
    groups: Vec<Group>,
}

impl Compiled {
    /// Compiles formulas against their own sorted variable list.
    pub fn new(formulas: &[Formula]) -> Self {
        let vars: BTreeSet<String> = formulas.iter().flat_map(|f| f.variables()).collect();
        let vars: Vec<String> = vars.into_iter().collect();
        Self::with_vars(formulas, &vars).expect("all variables are listed")
    }

    /// Compiles against a caller-supplied variable order; fails with the
    /// first variable missing from `vars`.
    pub fn with_vars(formulas: &[Formula], vars: &[String]) -> Result<Self, String> {
        let mut c = Compiled {
            nodes: Vec::new(),
            roots: Vec::new(),
            vars: vars.to_vec(),
            groups: Vec::new(),
        };
        let mut memo: HashMap<&Formula, usize> = HashMap::new();
        let mut interned: HashMap<Node, usize> = HashMap::new();
        for f in formulas {
            let r = c.intern(f, &mut memo, &mut interned)?;
            c.roots.push(r);
        }
        Ok(c)
    }

    fn intern<'f>(
        &mut self,
        f: &'f Formula,
        memo: &mut HashMap<&'f Formula, usize>,
        interned: &mut HashMap<Node, usize>,
    ) -> Result<usize, String> {
        if let Some(&i) = memo.get(f) {
            return Ok(i);
        }
        let node = match f {
            Formula::Var(v) => Node::Var(
                self.vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| v.clone())?,
            ),
            Formula::Neg(x) => Node::Neg(self.intern(x, memo, interned)?),
            Formula::And(l, r) => Node::And(self.intern(l, memo, interned)?, self.intern(r, memo, interned)?),
            Formula::Or(l, r) => Node::Or(self.intern(l, memo, interned)?, self.intern(r, memo, interned)?),
            Formula::Impl(l, r) => Node::Impl(self.intern(l, memo, interned)?, self.intern(r, memo, interned)?),
            Formula::LDiv(l, r) => Node::LDiv(self.intern(l, memo, interned)?, self.intern(r, memo, interned)?),
            Formula::LDivStar(l, r) => {
                Node::LDivStar(self.intern(l, memo, interned)?, self.intern(r, memo, interned)?)
            }
            Formula::Know(g, x) => {
                let inner = self.intern(x, memo, interned)?;
                Node::Know(self.group_slot(g), inner)
            }
            Formula::Common(g, x) => {
                let inner = self.intern(x, memo, interned)?;
                Node::Common(self.group_slot(g), inner)
            }
        };
        let idx = *interned.entry(node).or_insert_with(|| {
            self.nodes.push(node);
            self.nodes.len() - 1
        });
        memo.insert(f, idx);
        Ok(idx)
    }

    fn group_slot(&mut self, g: &Group) -> usize {
        match self.groups.iter().position(|h| h == g) {
            Some(i) => i,
            None => {
                self.groups.push(g.clone());
                self.groups.len() - 1
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn roots(&self) -> usize {
        self.roots.len()
    }

    /// Precomputes the relations this formula set needs on a frame.
    pub fn bind<'a>(&'a self, frame: &'a Frame) -> Result<Bound<'a>, ModelError> {
        let mut know = vec![None; self.groups.len()];
        let mut common = vec![None; self.groups.len()];
        let mut star_updates = None;
        for node in &self.nodes {
            match *node {
                Node::Know(g, _) if know[g].is_none() => {
                    know[g] = Some(frame.group_successors(&self.groups[g])?)
                }
                Node::Common(g, _) if common[g].is_none() => {
                    common[g] = Some(frame.group_star_successors(&self.groups[g])?)
                }
                Node::LDivStar(..) if star_updates.is_none() => {
                    star_updates = Some(frame.update_star())
                }
                _ => {}
            }
        }
        Ok(Bound {
            compiled: self,
            frame,
            know,
            common,
            star_updates: star_updates.unwrap_or_default(),
        })
    }
}

/// A compiled formula set bound to one frame.
pub struct Bound<'a> {
    compiled: &'a Compiled,
    frame: &'a Frame,
    know: Vec<Option<Vec<StateSet>>>,
    common: Vec<Option<Vec<StateSet>>>,
    star_updates: Vec<Update>,
}

fn boxes(succ: &[StateSet], inner: &StateSet) -> StateSet {
    let mut out = StateSet::empty(inner.universe());
    for (x, s) in succ.iter().enumerate() {
        if s.is_subset(inner) {
            out.insert(x);
        }
    }
    out
}

fn divides(triples: &[Update], trigger: &StateSet, result: &StateSet) -> StateSet {
    let mut out = StateSet::full(trigger.universe());
    for t in triples {
        if t.trigger.is_subset(trigger) && !result.contains(t.to) {
            out.remove(t.from);
        }
    }
    out
}

impl Bound<'_> {
    /// Evaluates every node; `values` is aligned with [`Compiled::vars`].
    /// Returns the extensions of the roots in order.
    pub fn eval(&self, values: &[StateSet]) -> Vec<StateSet> {
        let mut scratch = Vec::with_capacity(self.compiled.nodes.len());
        self.eval_into(values, &mut scratch);
        self.compiled.roots.iter().map(|&r| scratch[r].clone()).collect()
    }

    /// Like [`Bound::eval`] but reuses the caller's buffer; root `i` is at
    /// `scratch[root_index(i)]`.
    pub fn eval_into(&self, values: &[StateSet], scratch: &mut Vec<StateSet>) {
        let n = self.frame.states;
        scratch.clear();
        for node in &self.compiled.nodes {
            let v = match *node {
                Node::Var(i) => values[i].clone(),
                Node::Neg(a) => {
                    let inner = &scratch[a];
                    let mut out = StateSet::empty(n);
                    for (x, &s) in self.frame.star.iter().enumerate() {
                        if !inner.contains(s) {
                            out.insert(x);
                        }
                    }
                    out
                }
                Node::And(a, b) => scratch[a].intersection(&scratch[b]),
                Node::Or(a, b) => scratch[a].union(&scratch[b]),
                Node::Impl(a, b) => scratch[a].complement().union(&scratch[b]),
                Node::Know(g, a) => boxes(self.know[g].as_ref().expect("bound"), &scratch[a]),
                Node::Common(g, a) => boxes(self.common[g].as_ref().expect("bound"), &scratch[a]),
                Node::LDiv(a, b) => divides(&self.frame.updates, &scratch[a], &scratch[b]),
                Node::LDivStar(a, b) => divides(&self.star_updates, &scratch[a], &scratch[b]),
            };
            scratch.push(v);
        }
    }

    pub fn root_index(&self, i: usize) -> usize {
        self.compiled.roots[i]
    }
}

/// Checks every model invariant.
pub fn validate_model(m: &GroupUpdateModel) -> Result<(), ModelError> {
    m.frame.validate()
}

/// `R_G` as a set of pairs.
pub fn rel_group(m: &GroupUpdateModel, g: &Group) -> Result<BTreeSet<(usize, usize)>, ModelError> {
    Ok(pairs(&m.frame.group_successors(g)?))
}

/// The reflexive transitive closure of `R_G` as a set of pairs.
pub fn rel_group_star(
    m: &GroupUpdateModel,
    g: &Group,
) -> Result<BTreeSet<(usize, usize)>, ModelError> {
    Ok(pairs(&m.frame.group_star_successors(g)?))
}

pub fn update_power(m: &GroupUpdateModel, k: usize) -> Result<BTreeSet<Update>, ModelError> {
    m.frame.update_power(k)
}

pub fn update_star(m: &GroupUpdateModel) -> BTreeSet<Update> {
    m.frame.update_star().into_iter().collect()
}

pub fn extension(m: &GroupUpdateModel, f: &Formula) -> Result<Extension, ModelError> {
    let compiled = Compiled::new(std::slice::from_ref(f));
    let bound = compiled.bind(&m.frame)?;
    let values: Vec<StateSet> = compiled.vars().iter().map(|v| m.value(v)).collect();
    let states = bound.eval(&values).pop().expect("one root");
    Ok(Extension {
        formula: f.clone(),
        states,
    })
}

pub fn satisfies(m: &GroupUpdateModel, x: usize, f: &Formula) -> Result<bool, ModelError> {
    Ok(extension(m, f)?.states.contains(x))
}

/// `Y` supports `f` when every member satisfies it; the empty set supports everything.
pub fn set_satisfies(m: &GroupUpdateModel, y: &StateSet, f: &Formula) -> Result<bool, ModelError> {
    Ok(y.is_subset(&extension(m, f)?.states))
}

pub fn valid_in_model(m: &GroupUpdateModel, f: &Formula) -> Result<bool, ModelError> {
    Ok(extension(m, f)?.states.is_full())
}

/// Default cap on the number of valuations a frame sweep may visit.
pub const DEFAULT_VALUATION_CAP: u128 = 1 << 24;

/// Validity in every model on the frame. Only the variables of `f` are
/// varied; the others cannot affect its extension.
pub fn valid_in_frame(frame: &Frame, f: &Formula, cap: u128) -> Result<bool, ModelError> {
    Ok(frame_countermodel(frame, f, cap)?.is_none())
}

/// The first valuation (in mixed-radix order over the sorted variables)
/// refuting `f` on the frame, with a refuted state.
pub fn frame_countermodel(
    frame: &Frame,
    f: &Formula,
    cap: u128,
) -> Result<Option<(GroupUpdateModel, usize)>, ModelError> {
    let compiled = Compiled::new(std::slice::from_ref(f));
    let n = frame.states;
    let k = compiled.vars().len();
    let needed = valuation_count(n, k);
    if needed > cap {
        return Err(ModelError::FrameTooLarge { needed, cap });
    }
    let bound = compiled.bind(frame)?;
    let mut scratch = Vec::new();
    let mut values = vec![StateSet::empty(n); k];
    for index in 0..needed as u64 {
        decode_valuation(n, index, &mut values);
        bound.eval_into(&values, &mut scratch);
        let ext = &scratch[bound.root_index(0)];
        if let Some(x) = ext.complement().iter().next() {
            let valuation = compiled
                .vars()
                .iter()
                .cloned()
                .zip(values.iter().cloned())
                .collect();
            return Ok(Some((
                GroupUpdateModel {
                    frame: frame.clone(),
                    valuation,
                },
                x,
            )));
        }
    }
    Ok(None)
}

/// `(2^n)^k`, saturating.
pub(crate) fn valuation_count(n: usize, k: usize) -> u128 {
    1u128.checked_shl((n * k) as u32).unwrap_or(u128::MAX)
}

/// Writes valuation number `index`: the `i`-th variable gets bits
/// `i*n .. (i+1)*n` of the index.
pub(crate) fn decode_valuation(n: usize, index: u64, values: &mut [StateSet]) {
    let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    for (i, v) in values.iter_mut().enumerate() {
        *v = StateSet::from_mask(n, (index >> (i * n)) & mask);
    }
}

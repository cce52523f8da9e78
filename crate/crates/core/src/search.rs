//! Model enumeration, countermodel search, the bounded decision procedure
//! and schema probes.
//!
//! The exhaustive space for `n` states is ordered by a canonical index:
//! involution slowest, then one reflexive relation per agent (agents in
//! order, off-diagonal edges as a bitmask), then the update relation, then
//! the valuation. Sweeps for a fixed formula set only vary what the formulas
//! can observe: their own variables, their own agents (only the identity
//! relation when there are none), and the update relation when `\` or `\*`
//! occurs.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{closure, AgentId, Formula, Universe};
use crate::parser::parse;
use crate::proofs::{schema, Schema, SchemaInstance};
use crate::semantics::{
    decode_valuation, valuation_count, Compiled, Frame, GroupUpdateModel, ModelError, Update,
};
use crate::stateset::StateSet;

/// Relations are decoded from `u128` bitmasks, which caps enumerable frames.
pub const MAX_ENUM_STATES: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Exhaustive,
    /// Draws `sample_budget` models from the seeded sampler instead.
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_states: usize,
    pub agents: Vec<AgentId>,
    pub vars: Vec<String>,
    pub include_updates: bool,
    /// Cap on distinct triggers per update relation.
    pub max_triggers: usize,
    pub sample_budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: SearchMode,
    /// Exhaustive sweeps larger than this fail with [`SearchError::Overflow`].
    pub max_models: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_states: 3,
            agents: vec![agent("a"), agent("b")],
            vars: vec!["p".into(), "q".into()],
            include_updates: true,
            max_triggers: 2,
            sample_budget: 1000,
            seed: 0,
            mode: SearchMode::Exhaustive,
            max_models: 1 << 28,
        }
    }
}

fn agent(name: &str) -> AgentId {
    AgentId::new(name).expect("valid agent literal")
}

impl SearchBounds {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidBounds(m.to_string()));
        if self.max_states == 0 {
            return bad("max_states must be at least 1");
        }
        if self.max_states > MAX_ENUM_STATES {
            return bad("max_states is limited to 8");
        }
        if self.agents.is_empty() {
            return bad("at least one agent is required");
        }
        if self.max_triggers == 0 {
            return bad("max_triggers must be positive");
        }
        if self.max_models == 0 {
            return bad("max_models must be positive");
        }
        if self.mode == SearchMode::Randomized && self.sample_budget == 0 {
            return bad("randomized mode needs a positive sample_budget");
        }
        Ok(())
    }

    pub fn universe(&self) -> Universe {
        Universe::new(self.agents.iter().map(AgentId::as_str)).expect("validated agents")
    }

    fn all_agents(&self) -> Vec<AgentId> {
        let set: BTreeSet<AgentId> = self.agents.iter().cloned().collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search bounds: {0}")]
    InvalidBounds(String),
    #[error("search space of {needed} models exceeds the cap of {cap}")]
    Overflow { needed: u128, cap: u64 },
    #[error("formula mentions agent `{0}` outside the search bounds")]
    UnknownAgent(String),
    #[error("unknown or unprobeable schema `{0}`")]
    UnknownSchema(String),
    #[error("cannot parse `{0}`: {1}")]
    Parse(String, String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Binomial coefficient, saturating.
fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = match r.checked_mul(n - i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    r
}

fn sat_pow(base: u128, exp: u32) -> u128 {
    base.checked_pow(exp).unwrap_or(u128::MAX)
}

fn sat_mul(a: u128, b: u128) -> u128 {
    a.checked_mul(b).unwrap_or(u128::MAX)
}

/// All involutions on `0..n`: for the lowest unassigned point, first a fixed
/// point, then a swap with each later free point.
pub fn involutions(n: usize) -> Vec<Vec<usize>> {
    fn go(star: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = star.iter().position(Option::is_none) else {
            out.push(star.iter().map(|s| s.expect("assigned")).collect());
            return;
        };
        star[i] = Some(i);
        go(star, out);
        for j in i + 1..star.len() {
            if star[j].is_none() {
                star[i] = Some(j);
                star[j] = Some(i);
                go(star, out);
                star[j] = None;
            }
        }
        star[i] = None;
    }
    let mut out = Vec::new();
    go(&mut vec![None; n], &mut out);
    out
}

/// The `k`-subset of `0..m` at lexicographic rank `r`.
fn unrank_combination(m: u128, k: usize, mut r: u128) -> Vec<u128> {
    let mut out = Vec::with_capacity(k);
    let mut c = 0u128;
    for i in 0..k {
        loop {
            let cnt = binom(m - c - 1, (k - i - 1) as u128);
            if r < cnt {
                out.push(c);
                c += 1;
                break;
            }
            r -= cnt;
            c += 1;
        }
    }
    out
}

/// Update relations with at most `max_triggers` distinct triggers. Block `k`
/// holds relations with exactly `k` triggers: a trigger combination times a
/// non-empty transition set per trigger.
#[derive(Debug, Clone)]
struct UpdateSpace {
    n: usize,
    pair_choices: u128,
    blocks: Vec<u128>,
    len: u128,
}

impl UpdateSpace {
    fn new(n: usize, max_triggers: usize) -> Self {
        let triggers = 1u128 << n;
        let pair_choices = (1u128 << (n * n)) - 1;
        let top = (max_triggers as u128).min(triggers);
        let blocks: Vec<u128> = (0..=top)
            .map(|k| sat_mul(binom(triggers, k), sat_pow(pair_choices, k as u32)))
            .collect();
        let len = blocks.iter().fold(0u128, |a, &b| a.saturating_add(b));
        UpdateSpace {
            n,
            pair_choices,
            blocks,
            len,
        }
    }

    fn decode(&self, index: u128) -> Vec<Update> {
        let n = self.n;
        let mut rest = index;
        let mut k = 0;
        while rest >= self.blocks[k] {
            rest -= self.blocks[k];
            k += 1;
        }
        let per = sat_pow(self.pair_choices, k as u32);
        let combo = rest / per;
        let mut digits = rest % per;
        let mut out = Vec::new();
        for t in unrank_combination(1u128 << n, k, combo) {
            let mask = digits % self.pair_choices + 1;
            digits /= self.pair_choices;
            let trigger = StateSet::from_mask(n, t as u64);
            for bit in 0..n * n {
                if mask >> bit & 1 == 1 {
                    out.push(Update {
                        from: bit / n,
                        trigger: trigger.clone(),
                        to: bit % n,
                    });
                }
            }
        }
        out.sort();
        out
    }
}

/// All frames with exactly `n` states over the given agents.
#[derive(Debug, Clone)]
struct FrameSpace {
    n: usize,
    agents: Vec<AgentId>,
    involutions: Vec<Vec<usize>>,
    off_diagonal: Vec<(usize, usize)>,
    relations: u128,
    updates: Option<UpdateSpace>,
    len: u128,
}

impl FrameSpace {
    fn new(n: usize, agents: &[AgentId], max_triggers: Option<usize>, vary_relations: bool) -> Self {
        let involutions = involutions(n);
        let off_diagonal: Vec<(usize, usize)> = (0..n)
            .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
            .collect();
        let relations = if vary_relations {
            1u128 << off_diagonal.len()
        } else {
            1
        };
        let updates = max_triggers.map(|t| UpdateSpace::new(n, t));
        let len = sat_mul(
            sat_mul(
                involutions.len() as u128,
                sat_pow(relations, agents.len() as u32),
            ),
            updates.as_ref().map_or(1, |u| u.len),
        );
        FrameSpace {
            n,
            agents: agents.to_vec(),
            involutions,
            off_diagonal,
            relations,
            updates,
            len,
        }
    }

    fn frame(&self, index: u128) -> Frame {
        let n = self.n;
        let upd_len = self.updates.as_ref().map_or(1, |u| u.len);
        let updates = self
            .updates
            .as_ref()
            .map(|u| u.decode(index % upd_len))
            .unwrap_or_default();
        let mut rest = index / upd_len;
        let mut masks = vec![0u128; self.agents.len()];
        for m in masks.iter_mut().rev() {
            *m = rest % self.relations;
            rest /= self.relations;
        }
        let access = masks
            .iter()
            .map(|&mask| {
                let mut succ: Vec<StateSet> = (0..n).map(|x| StateSet::singleton(n, x)).collect();
                for (j, &(x, y)) in self.off_diagonal.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        succ[x].insert(y);
                    }
                }
                succ
            })
            .collect();
        Frame::from_raw(
            n,
            self.agents.clone(),
            access,
            self.involutions[rest as usize].clone(),
            updates,
        )
    }
}

/// What a sweep varies after locality reductions.
#[derive(Debug, Clone)]
struct Local {
    agents: Vec<AgentId>,
    vars: Vec<String>,
    max_triggers: Option<usize>,
    /// False when no formula mentions an agent: relations are then
    /// unobservable and only the identity is enumerated.
    vary_relations: bool,
}

fn localize(b: &SearchBounds, formulas: &[Formula]) -> Result<Local, SearchError> {
    let all = b.all_agents();
    let mut agents = BTreeSet::new();
    let mut vars = BTreeSet::new();
    let mut updates = false;
    for f in formulas {
        for a in f.agents() {
            if !all.contains(&a) {
                return Err(SearchError::UnknownAgent(a.to_string()));
            }
            agents.insert(a);
        }
        vars.extend(f.variables());
        updates |= f.has_updates();
    }
    let vary_relations = !agents.is_empty();
    if agents.is_empty() {
        agents.insert(all[0].clone());
    }
    Ok(Local {
        agents: agents.into_iter().collect(),
        vars: vars.into_iter().collect(),
        max_triggers: (b.include_updates && updates).then_some(b.max_triggers),
        vary_relations,
    })
}

/// Local reductions for a whole-space enumeration: every bound agent and
/// variable is varied.
fn full_local(b: &SearchBounds) -> Local {
    Local {
        agents: b.all_agents(),
        vars: b.vars.clone(),
        max_triggers: b.include_updates.then_some(b.max_triggers),
        vary_relations: true,
    }
}

fn spaces(max_states: usize, local: &Local) -> Vec<FrameSpace> {
    (1..=max_states)
        .map(|n| FrameSpace::new(n, &local.agents, local.max_triggers, local.vary_relations))
        .collect()
}

fn space_size(spaces: &[FrameSpace], vars: usize) -> u128 {
    spaces.iter().fold(0u128, |acc, s| {
        acc.saturating_add(sat_mul(s.len, valuation_count(s.n, vars)))
    })
}

fn checked_spaces(b: &SearchBounds, local: &Local) -> Result<Vec<FrameSpace>, SearchError> {
    let sp = spaces(b.max_states, local);
    let needed = space_size(&sp, local.vars.len());
    if needed > b.max_models as u128 {
        return Err(SearchError::Overflow {
            needed,
            cap: b.max_models,
        });
    }
    Ok(sp)
}

/// Number of models an exhaustive sweep of the localized space visits.
pub fn count_models(b: &SearchBounds) -> u128 {
    let local = full_local(b);
    space_size(&spaces(b.max_states, &local), local.vars.len())
}

enum Flow {
    Continue,
    Stop,
}

/// Feeds frames and their valuations to `visit`: exhaustively in canonical
/// order, or as seeded samples.
fn drive(
    b: &SearchBounds,
    local: &Local,
    visit: &mut dyn FnMut(&Frame, &[Vec<StateSet>]) -> Result<Flow, SearchError>,
) -> Result<u64, SearchError> {
    let mut models = 0u64;
    match b.mode {
        SearchMode::Exhaustive => {
            for space in checked_spaces(b, local)? {
                let n = space.n;
                let k = local.vars.len();
                let valuations: Vec<Vec<StateSet>> = (0..valuation_count(n, k) as u64)
                    .map(|i| {
                        let mut v = vec![StateSet::empty(n); k];
                        decode_valuation(n, i, &mut v);
                        v
                    })
                    .collect();
                for index in 0..space.len {
                    let frame = space.frame(index);
                    models += valuations.len() as u64;
                    if let Flow::Stop = visit(&frame, &valuations)? {
                        return Ok(models);
                    }
                }
            }
        }
        SearchMode::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
            for _ in 0..b.sample_budget {
                let (frame, values) = sample(&mut rng, b.max_states, local);
                models += 1;
                if let Flow::Stop = visit(&frame, &[values])? {
                    return Ok(models);
                }
            }
        }
    }
    Ok(models)
}

/// The documented sampler: uniform size; a uniformly shuffled list is
/// consumed front to back, each point being fixed or (with probability 1/2,
/// when a partner remains) swapped with the next; each off-diagonal edge
/// with probability 1/2 (none for agent-free formula sets); a uniform number of distinct triggers, uniform
/// distinct trigger sets and a uniform non-empty transition set for each;
/// uniform variable extensions.
fn sample(rng: &mut ChaCha8Rng, max_states: usize, local: &Local) -> (Frame, Vec<StateSet>) {
    let n = rng.gen_range(1..=max_states.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut star: Vec<usize> = (0..n).collect();
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.gen_bool(0.5) {
            star[order[i]] = order[i + 1];
            star[order[i + 1]] = order[i];
            i += 2;
        } else {
            i += 1;
        }
    }
    let access = local
        .agents
        .iter()
        .map(|_| {
            (0..n)
                .map(|x| {
                    let mut s = StateSet::singleton(n, x);
                    for y in (0..n).filter(|&y| y != x) {
                        if local.vary_relations && rng.gen_bool(0.5) {
                            s.insert(y);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut updates = Vec::new();
    if let Some(t) = local.max_triggers {
        let triggers = 1usize << n;
        let k = rng.gen_range(0..=t.min(triggers));
        let mut chosen = index::sample(rng, triggers, k).into_vec();
        chosen.sort_unstable();
        for mask in chosen {
            let trigger = StateSet::from_mask(n, mask as u64);
            let pairs: u128 = rng.gen_range(1..1u128 << (n * n));
            for bit in 0..n * n {
                if pairs >> bit & 1 == 1 {
                    updates.push(Update {
                        from: bit / n,
                        trigger: trigger.clone(),
                        to: bit % n,
                    });
                }
            }
        }
        updates.sort();
    }
    let values = local
        .vars
        .iter()
        .map(|_| StateSet::from_mask(n, rng.gen_range(0..1u64 << n)))
        .collect();
    (
        Frame::from_raw(n, local.agents.clone(), access, star, updates),
        values,
    )
}

/// A seeded stream of models over all bound agents and variables.
pub struct RandomModels {
    rng: ChaCha8Rng,
    max_states: usize,
    local: Local,
}

impl Iterator for RandomModels {
    type Item = GroupUpdateModel;

    fn next(&mut self) -> Option<GroupUpdateModel> {
        let (frame, values) = sample(&mut self.rng, self.max_states, &self.local);
        Some(GroupUpdateModel {
            frame,
            valuation: self.local.vars.iter().cloned().zip(values).collect(),
        })
    }
}

pub fn random_models(b: &SearchBounds) -> RandomModels {
    RandomModels {
        rng: ChaCha8Rng::seed_from_u64(b.seed),
        max_states: b.max_states,
        local: full_local(b),
    }
}

/// The first model of [`random_models`].
pub fn random_model(b: &SearchBounds) -> GroupUpdateModel {
    random_models(b).next().expect("infinite stream")
}

/// Every model of the exhaustive space in canonical order, over all bound
/// agents and variables.
pub fn enumerate_models(
    b: &SearchBounds,
) -> Result<impl Iterator<Item = GroupUpdateModel>, SearchError> {
    b.validate()?;
    let local = full_local(b);
    let sp = checked_spaces(b, &local)?;
    let vars = local.vars;
    Ok(sp.into_iter().flat_map(move |space| {
        let vars = vars.clone();
        let n = space.n;
        (0..space.len).flat_map(move |index| {
            let frame = space.frame(index);
            let vars = vars.clone();
            (0..valuation_count(n, vars.len()) as u64).map(move |v| {
                let mut values = vec![StateSet::empty(n); vars.len()];
                decode_valuation(n, v, &mut values);
                GroupUpdateModel {
                    frame: frame.clone(),
                    valuation: vars.iter().cloned().zip(values).collect(),
                }
            })
        })
    }))
}

/// Re-expresses a reduced frame over every bound agent; agents the formulas
/// never mention get the identity relation.
fn widen(frame: &Frame, agents: &[AgentId]) -> Frame {
    let n = frame.states();
    let access = agents
        .iter()
        .map(|a| match frame.successors(a) {
            Ok(s) => s.to_vec(),
            Err(_) => (0..n).map(|x| StateSet::singleton(n, x)).collect(),
        })
        .collect();
    Frame::from_raw(
        n,
        agents.to_vec(),
        access,
        frame.star().to_vec(),
        frame.updates().to_vec(),
    )
}

fn witness_model(b: &SearchBounds, frame: &Frame, local: &Local, values: &[StateSet]) -> GroupUpdateModel {
    GroupUpdateModel {
        frame: widen(frame, &b.all_agents()),
        valuation: local.vars.iter().cloned().zip(values.iter().cloned()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Refutation {
    Invalid {
        #[serde(with = "model_serde")]
        model: GroupUpdateModel,
        state: usize,
    },
    NotFoundUpTo {
        max_states: usize,
        models_checked: u64,
    },
}

/// The first model (canonical order, or seeded sample order) where `f` is
/// not valid, with the lowest refuted state.
pub fn find_countermodel(f: &Formula, b: &SearchBounds) -> Result<Refutation, SearchError> {
    b.validate()?;
    let local = localize(b, std::slice::from_ref(f))?;
    let compiled = Compiled::with_vars(std::slice::from_ref(f), &local.vars)
        .expect("variables collected from the formula");
    let mut found = None;
    let mut scratch = Vec::new();
    let models = drive(b, &local, &mut |frame, valuations| {
        let bound = compiled.bind(frame)?;
        let root = bound.root_index(0);
        for values in valuations {
            bound.eval_into(values, &mut scratch);
            if let Some(x) = scratch[root].complement().iter().next() {
                found = Some(Refutation::Invalid {
                    model: witness_model(b, frame, &local, values),
                    state: x,
                });
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    })?;
    Ok(found.unwrap_or(Refutation::NotFoundUpTo {
        max_states: b.max_states,
        models_checked: models,
    }))
}

/// `2^|Phi'|`, saturating: the number of partitions of the negation closure.
pub fn closure_bound(f: &Formula) -> u128 {
    1u128
        .checked_shl(closure(f).neg_closure.len() as u32)
        .unwrap_or(u128::MAX)
}

/// Size up to which a countermodel must exist if `f` is invalid.
///
/// For formulas over `~`, `&`, `|`, `=>` this is 2: evaluation at `x` only
/// visits `x` and `x*`, and the submodel on `{x, x*}` is closed under the
/// star and keeps every relation reflexive. Otherwise it is the canonical
/// carrier bound [`closure_bound`].
pub fn theoretical_bound(f: &Formula) -> u128 {
    if f.is_propositional() {
        2
    } else {
        closure_bound(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ValidConclusive {
        bound_used: usize,
    },
    ValidUpToBound {
        bound_reached: usize,
    },
    Invalid {
        #[serde(with = "model_serde")]
        model: GroupUpdateModel,
        state: usize,
    },
    Unknown {
        reason: String,
    },
}

impl Verdict {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid { .. })
    }
}

/// Sweeps up to `min(max_states, theoretical_bound(f))`. The verdict is
/// conclusive only when that reaches the theoretical bound and, for
/// formulas with updates, every update relation was enumerated. An
/// exhaustive sweep that overflows falls back to `sample_budget` seeded
/// samples, which can only refute.
pub fn decide(f: &Formula, b: &SearchBounds) -> Verdict {
    if let Err(e) = b.validate() {
        return Verdict::Unknown {
            reason: e.to_string(),
        };
    }
    let tb = theoretical_bound(f);
    let limit = (b.max_states as u128).min(tb) as usize;
    let mut eb = b.clone();
    eb.max_states = limit;
    eb.mode = SearchMode::Exhaustive;
    match find_countermodel(f, &eb) {
        Ok(Refutation::Invalid { model, state }) => Verdict::Invalid { model, state },
        Ok(Refutation::NotFoundUpTo { .. }) => {
            let updates_covered = !f.has_updates()
                || (b.include_updates && (b.max_triggers as u128) >= 1u128 << limit);
            if tb <= limit as u128 && updates_covered {
                Verdict::ValidConclusive { bound_used: limit }
            } else {
                Verdict::ValidUpToBound {
                    bound_reached: limit,
                }
            }
        }
        Err(e @ SearchError::Overflow { .. }) => {
            if b.sample_budget > 0 {
                eb.mode = SearchMode::Randomized;
                if let Ok(Refutation::Invalid { model, state }) = find_countermodel(f, &eb) {
                    return Verdict::Invalid { model, state };
                }
            }
            Verdict::Unknown {
                reason: format!(
                    "{e}; {} seeded samples found no countermodel",
                    b.sample_budget
                ),
            }
        }
        Err(e) => Verdict::Unknown {
            reason: e.to_string(),
        },
    }
}

/// A replayable decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideReport {
    pub formula: String,
    pub bounds: SearchBounds,
    pub theoretical_bound: u128,
    #[serde(flatten)]
    pub verdict: Verdict,
}

pub fn decide_report(f: &Formula, b: &SearchBounds) -> DecideReport {
    DecideReport {
        formula: f.to_string(),
        bounds: b.clone(),
        theoretical_bound: theoretical_bound(f),
        verdict: decide(f, b),
    }
}

impl DecideReport {
    /// Re-runs the decision from the embedded formula and bounds.
    pub fn replay(&self) -> Result<DecideReport, SearchError> {
        self.bounds.validate()?;
        let f = parse(&self.formula, &self.bounds.universe())
            .map_err(|e| SearchError::Parse(self.formula.clone(), e.to_string()))?;
        Ok(decide_report(&f, &self.bounds))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Axiom,
    Rule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// No instance failed anywhere in the swept space.
    Clean,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeWitness {
    /// Position in the schema's instance enumeration.
    pub instance: usize,
    pub premises: Vec<String>,
    pub conclusion: String,
    #[serde(with = "model_serde")]
    pub model: GroupUpdateModel,
    /// A state where the conclusion fails.
    pub state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema: String,
    pub kind: ProbeKind,
    pub pool: Vec<String>,
    pub bounds: SearchBounds,
    pub instances: usize,
    pub models_checked: u64,
    pub verdict: ProbeVerdict,
    /// The first witness of every failing instance.
    pub witnesses: Vec<ProbeWitness>,
}

impl ProbeReport {
    /// Re-runs the probe from the embedded schema name, pool and bounds.
    pub fn replay(&self) -> Result<ProbeReport, SearchError> {
        self.bounds.validate()?;
        let universe = self.bounds.universe();
        let pool = self
            .pool
            .iter()
            .map(|s| parse(s, &universe).map_err(|e| SearchError::Parse(s.clone(), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let schema =
            schema(&self.schema).ok_or_else(|| SearchError::UnknownSchema(self.schema.clone()))?;
        probe_schema_with_pool(&schema, &self.bounds, &pool)
    }
}

/// The default instantiation pool: the bound variables plus the De Morgan
/// negation of the first one.
pub fn default_pool(b: &SearchBounds) -> Vec<Formula> {
    let mut pool: Vec<Formula> = b.vars.iter().map(Formula::var).collect();
    if let Some(v) = b.vars.first() {
        pool.push(Formula::neg(Formula::var(v)));
    }
    pool
}

pub fn probe_schema(name: &str, b: &SearchBounds) -> Result<ProbeReport, SearchError> {
    let s = schema(name).ok_or_else(|| SearchError::UnknownSchema(name.to_string()))?;
    probe_schema_with_pool(&s, b, &default_pool(b))
}

/// Sweeps every instance over the bounds. Axiom instances fail on a model
/// where they are not valid; rule instances fail on a model where every
/// premise is valid and the conclusion is not.
pub fn probe_schema_with_pool(
    s: &Schema,
    b: &SearchBounds,
    pool: &[Formula],
) -> Result<ProbeReport, SearchError> {
    b.validate()?;
    let instances: Vec<SchemaInstance> = s.instances(pool, &b.universe());
    let mut roots = Vec::new();
    let mut offsets = Vec::new();
    for inst in &instances {
        offsets.push(roots.len());
        roots.extend(inst.premises.iter().cloned());
        roots.push(inst.conclusion.clone());
    }
    let local = localize(b, &roots)?;
    let compiled = Compiled::with_vars(&roots, &local.vars).expect("variables collected");
    let mut witnesses: Vec<Option<ProbeWitness>> = vec![None; instances.len()];
    let mut open = instances.len();
    let mut scratch = Vec::new();
    let models_checked = drive(b, &local, &mut |frame, valuations| {
        let bound = compiled.bind(frame)?;
        for values in valuations {
            bound.eval_into(values, &mut scratch);
            for (i, inst) in instances.iter().enumerate() {
                if witnesses[i].is_some() {
                    continue;
                }
                let base = offsets[i];
                let premises_hold = (0..inst.premises.len())
                    .all(|j| scratch[bound.root_index(base + j)].is_full());
                if !premises_hold {
                    continue;
                }
                let concl = &scratch[bound.root_index(base + inst.premises.len())];
                if let Some(x) = concl.complement().iter().next() {
                    witnesses[i] = Some(ProbeWitness {
                        instance: i,
                        premises: inst.premises.iter().map(Formula::to_string).collect(),
                        conclusion: inst.conclusion.to_string(),
                        model: witness_model(b, frame, &local, values),
                        state: x,
                    });
                    open -= 1;
                }
            }
            if open == 0 {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    })?;
    let witnesses: Vec<ProbeWitness> = witnesses.into_iter().flatten().collect();
    Ok(ProbeReport {
        schema: s.name.to_string(),
        kind: if s.is_rule() {
            ProbeKind::Rule
        } else {
            ProbeKind::Axiom
        },
        pool: pool.iter().map(Formula::to_string).collect(),
        bounds: b.clone(),
        instances: instances.len(),
        models_checked,
        verdict: if witnesses.is_empty() {
            ProbeVerdict::Clean
        } else {
            ProbeVerdict::Witness
        },
        witnesses,
    })
}

/// Models serialize through the model document format.
pub mod model_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::semantics::{GroupUpdateModel, ModelDoc};

    pub fn serialize<S: Serializer>(m: &GroupUpdateModel, s: S) -> Result<S::Ok, S::Error> {
        m.to_doc().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GroupUpdateModel, D::Error> {
        let doc = ModelDoc::deserialize(d)?;
        GroupUpdateModel::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

//! Provability oracles and the finite canonical model over a closure.
//!
//! States are partitions of the negation closure `Phi'` whose in-side does
//! not provably imply the disjunction of the out-side. Provability is
//! delegated to a [`ProvabilityOracle`]; construction refuses to proceed on
//! an undecided query.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{closure, tilde, AgentId, ClosureSet, Formula, Group, Universe};
use crate::proofs::{check_proof, Proof};
use crate::search::{decide, SearchBounds, Verdict};
use crate::semantics::{
    frame_countermodel, Compiled, Frame, GroupUpdateModel, ModelDoc, ModelError,
};
use crate::stateset::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provability {
    Provable,
    Refuted,
    Unknown,
}

/// Answers "is this formula a theorem?". Implementations must be pure so
/// one oracle can serve concurrent queries.
pub trait ProvabilityOracle: Send + Sync {
    fn query(&self, f: &Formula) -> Provability;
    fn description(&self) -> String;
}

/// Valuation sweeps per two-point frame are capped at this many valuations.
const TWO_POINT_CAP: u128 = 1 << 24;

/// Exact for formulas over `~`, `&`, `|`, `=>`; `Unknown` otherwise.
///
/// Evaluation at `x` only reads `x` and `x*`, so a countermodel restricts
/// to the one-point model (`x* = x`) or the two-point swap model.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropositionalOracle;

pub fn propositional_oracle() -> PropositionalOracle {
    PropositionalOracle
}

fn two_point_frames() -> [Frame; 2] {
    let a = AgentId::new("a").expect("valid agent");
    let id = |n: usize| (0..n).map(|x| (x, x)).collect::<Vec<_>>();
    [
        Frame::new(1, vec![(a.clone(), id(1))], vec![0], vec![]).expect("one-point frame"),
        Frame::new(2, vec![(a, id(2))], vec![1, 0], vec![]).expect("two-point frame"),
    ]
}

impl ProvabilityOracle for PropositionalOracle {
    fn query(&self, f: &Formula) -> Provability {
        if !f.is_propositional() {
            return Provability::Unknown;
        }
        for frame in two_point_frames() {
            match frame_countermodel(&frame, f, TWO_POINT_CAP) {
                Ok(Some(_)) => return Provability::Refuted,
                Ok(None) => {}
                Err(_) => return Provability::Unknown,
            }
        }
        Provability::Provable
    }

    fn description(&self) -> String {
        "propositional (two-point star models)".to_string()
    }
}

/// Checked proofs first, then the bounded decision procedure.
#[derive(Debug, Clone)]
pub struct BoundedOracle {
    pub bounds: SearchBounds,
    theorems: Vec<Formula>,
}

/// Keeps the conclusions of the proofs that check; the others are ignored.
pub fn bounded_oracle(bounds: SearchBounds, proofs: &[Proof]) -> BoundedOracle {
    let theorems = proofs
        .iter()
        .filter(|p| check_proof(p).is_ok())
        .filter_map(|p| p.conclusion().cloned())
        .collect();
    BoundedOracle { bounds, theorems }
}

impl ProvabilityOracle for BoundedOracle {
    fn query(&self, f: &Formula) -> Provability {
        if self.theorems.contains(f) {
            return Provability::Provable;
        }
        match decide(f, &self.bounds) {
            Verdict::Invalid { .. } => Provability::Refuted,
            Verdict::ValidConclusive { .. } => Provability::Provable,
            Verdict::ValidUpToBound { .. } | Verdict::Unknown { .. } => Provability::Unknown,
        }
    }

    fn description(&self) -> String {
        format!(
            "bounded (max_states {}, {} checked theorems)",
            self.bounds.max_states,
            self.theorems.len()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("{needed} candidate partitions exceed the cap of {cap}")]
    TooLarge { needed: u128, cap: u128 },
    #[error("top is on the out-side")]
    MissingTop,
    #[error("partition over {found} formulas, closure has {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("the oracle could not decide {} queries, first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    Undecided(Vec<String>),
    #[error("the input pair is not independent")]
    NotIndependent,
    #[error("extension ended on a dependent partition")]
    Dependent,
    #[error("the set formula of an empty set is undefined")]
    EmptySet,
    #[error("the star of state {0} is not a state")]
    StarNotClosed(usize),
    #[error("agent `{0}` is not in the universe")]
    UnknownAgent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The negation closure of a formula with lookup tables.
#[derive(Debug, Clone)]
pub struct CanonicalSpace {
    pub closure: ClosureSet,
    top: usize,
}

impl CanonicalSpace {
    pub fn new(phi0: &Formula) -> Self {
        let closure = closure(phi0);
        let top = closure
            .neg_index(&Formula::top())
            .expect("top is always in the closure");
        CanonicalSpace { closure, top }
    }

    /// `Phi'` in enumeration order.
    pub fn formulas(&self) -> &[Formula] {
        &self.closure.neg_closure
    }

    pub fn len(&self) -> usize {
        self.closure.neg_closure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, f: &Formula) -> Option<usize> {
        self.closure.neg_index(f)
    }

    pub fn top_index(&self) -> usize {
        self.top
    }

    /// The partition with the given formulas inside; members outside `Phi'`
    /// are dropped.
    pub fn partition<'a>(&self, inside: impl IntoIterator<Item = &'a Formula>) -> Partition {
        let mut s = StateSet::empty(self.len());
        for f in inside {
            if let Some(i) = self.index(f) {
                s.insert(i);
            }
        }
        Partition { inside: s }
    }
}

/// A raw partition of `Phi'`: the in-side as an index set, the out-side its
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    pub inside: StateSet,
}

impl Partition {
    pub fn in_formulas(&self, space: &CanonicalSpace) -> Vec<Formula> {
        self.inside.iter().map(|i| space.formulas()[i].clone()).collect()
    }

    pub fn out_formulas(&self, space: &CanonicalSpace) -> Vec<Formula> {
        self.inside
            .complement()
            .iter()
            .map(|i| space.formulas()[i].clone())
            .collect()
    }

    /// `/\x_in => \/x_out`.
    pub fn query(&self, space: &CanonicalSpace) -> Formula {
        Formula::implies(
            Formula::conjunction(self.in_formulas(space)),
            Formula::disjunction(self.out_formulas(space)),
        )
    }
}

/// A partition with `top` on the in-side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairState(Partition);

impl PairState {
    pub fn new(space: &CanonicalSpace, p: Partition) -> Result<Self, CanonicalError> {
        if p.inside.universe() != space.len() {
            return Err(CanonicalError::WrongSize {
                expected: space.len(),
                found: p.inside.universe(),
            });
        }
        if !p.inside.contains(space.top_index()) {
            return Err(CanonicalError::MissingTop);
        }
        Ok(PairState(p))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn contains(&self, space: &CanonicalSpace, f: &Formula) -> bool {
        space.index(f).is_some_and(|i| self.0.inside.contains(i))
    }

    pub fn in_formulas(&self, space: &CanonicalSpace) -> Vec<Formula> {
        self.0.in_formulas(space)
    }

    pub fn out_formulas(&self, space: &CanonicalSpace) -> Vec<Formula> {
        self.0.out_formulas(space)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Independence {
    Independent,
    Dependent,
    Unknown,
}

pub fn is_independent(
    space: &CanonicalSpace,
    x: &PairState,
    oracle: &dyn ProvabilityOracle,
) -> Independence {
    partition_independence(space, &x.0, oracle)
}

fn partition_independence(
    space: &CanonicalSpace,
    p: &Partition,
    oracle: &dyn ProvabilityOracle,
) -> Independence {
    match oracle.query(&p.query(space)) {
        Provability::Provable => Independence::Dependent,
        Provability::Refuted => Independence::Independent,
        Provability::Unknown => Independence::Unknown,
    }
}

fn pair_query(gamma: &[Formula], delta: &[Formula]) -> Formula {
    Formula::implies(
        Formula::conjunction(gamma.iter().cloned()),
        Formula::disjunction(delta.iter().cloned()),
    )
}

/// Greedy extension in `Phi'` order: each unplaced formula goes inside if
/// the pair stays independent, outside otherwise.
pub fn pair_extend(
    gamma: &[Formula],
    delta: &[Formula],
    space: &CanonicalSpace,
    oracle: &dyn ProvabilityOracle,
) -> Result<PairState, CanonicalError> {
    let q = pair_query(gamma, delta);
    match oracle.query(&q) {
        Provability::Refuted => {}
        Provability::Provable => return Err(CanonicalError::NotIndependent),
        Provability::Unknown => return Err(CanonicalError::Undecided(vec![q.to_string()])),
    }
    let mut inside: Vec<Formula> = gamma.iter().filter(|f| space.index(f).is_some()).cloned().collect();
    let mut outside: Vec<Formula> = delta.iter().filter(|f| space.index(f).is_some()).cloned().collect();
    for f in space.formulas() {
        if inside.contains(f) || outside.contains(f) {
            continue;
        }
        let mut trial = inside.clone();
        trial.push(f.clone());
        let q = pair_query(&trial, &outside);
        match oracle.query(&q) {
            Provability::Refuted => inside = trial,
            Provability::Provable => outside.push(f.clone()),
            Provability::Unknown => return Err(CanonicalError::Undecided(vec![q.to_string()])),
        }
    }
    let x = PairState::new(space, space.partition(&inside))?;
    match is_independent(space, &x, oracle) {
        Independence::Independent => Ok(x),
        Independence::Dependent => Err(CanonicalError::Dependent),
        Independence::Unknown => Err(CanonicalError::Undecided(vec![x.0.query(space).to_string()])),
    }
}

/// `x*_in = { psi | tilde(psi) in x_out }`.
pub fn canonical_star(space: &CanonicalSpace, x: &Partition) -> Partition {
    let mut inside = StateSet::empty(space.len());
    for (i, f) in space.formulas().iter().enumerate() {
        let t = space.index(&tilde(f)).expect("Phi' is closed under tilde");
        if !x.inside.contains(t) {
            inside.insert(i);
        }
    }
    Partition { inside }
}

/// `R_a x y` iff every `psi` with `K{a} psi` in `x_in` is in `y_in`.
pub fn canonical_accessibility(
    space: &CanonicalSpace,
    a: &AgentId,
    x: &PairState,
    y: &PairState,
) -> bool {
    let g = Group::singleton(a.clone());
    x.0.inside.iter().all(|i| match &space.formulas()[i] {
        Formula::Know(h, psi) if *h == g => y.contains(space, psi),
        _ => true,
    })
}

/// A canonical model with its state labels.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    pub space: CanonicalSpace,
    pub model: GroupUpdateModel,
    pub labels: Vec<PairState>,
}

/// Default cap on candidate partitions.
pub const DEFAULT_PARTITION_CAP: u128 = 1 << 20;

/// States are the independent partitions with `top` inside, numbered by
/// increasing in-side bitmask over `Phi'`. The update relation is empty.
pub fn build_canonical_model(
    phi0: &Formula,
    oracle: &dyn ProvabilityOracle,
    universe: &Universe,
    cap: u128,
) -> Result<CanonicalModel, CanonicalError> {
    for a in phi0.agents() {
        if !universe.contains(&a) {
            return Err(CanonicalError::UnknownAgent(a.to_string()));
        }
    }
    let space = CanonicalSpace::new(phi0);
    let m = space.len();
    let needed = 1u128.checked_shl(m as u32 - 1).unwrap_or(u128::MAX);
    if needed > cap || m > 64 {
        return Err(CanonicalError::TooLarge { needed, cap });
    }
    let top = space.top_index();
    let mut labels = Vec::new();
    let mut undecided = Vec::new();
    for mask in 0..1u64 << (m - 1) {
        // spread the free bits around the fixed top bit
        let low = mask & ((1u64 << top) - 1);
        let high = (mask >> top) << (top + 1);
        let full = low | high | 1u64 << top;
        let x = PairState(Partition {
            inside: StateSet::from_mask(m, full),
        });
        match is_independent(&space, &x, oracle) {
            Independence::Independent => labels.push(x),
            Independence::Dependent => {}
            Independence::Unknown => undecided.push(x.0.query(&space).to_string()),
        }
    }
    if !undecided.is_empty() {
        return Err(CanonicalError::Undecided(undecided));
    }
    let position: HashMap<&Partition, usize> =
        labels.iter().enumerate().map(|(i, x)| (&x.0, i)).collect();
    let mut star = Vec::with_capacity(labels.len());
    for (i, x) in labels.iter().enumerate() {
        let s = canonical_star(&space, &x.0);
        star.push(*position.get(&s).ok_or(CanonicalError::StarNotClosed(i))?);
    }
    let relations = universe
        .agents()
        .map(|a| {
            let pairs = (0..labels.len())
                .flat_map(|x| (0..labels.len()).map(move |y| (x, y)))
                .filter(|&(x, y)| canonical_accessibility(&space, a, &labels[x], &labels[y]))
                .collect();
            (a.clone(), pairs)
        })
        .collect();
    let frame = Frame::new(labels.len(), relations, star, vec![])?;
    let valuation = space
        .closure
        .closure
        .iter()
        .filter_map(|f| match f {
            Formula::Var(v) => Some((
                v.clone(),
                labels
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| x.contains(&space, f))
                    .map(|(i, _)| i)
                    .collect(),
            )),
            _ => None,
        })
        .collect();
    let model = GroupUpdateModel::new(frame, valuation)?;
    Ok(CanonicalModel {
        space,
        model,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaViolation {
    pub state: usize,
    pub formula: String,
    pub in_label: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthLemmaReport {
    pub formulas: usize,
    pub states: usize,
    pub violations: Vec<LemmaViolation>,
}

impl TruthLemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `psi in x_in <=> x |= psi` for every `psi` in the closure.
pub fn verify_truth_lemma(cm: &CanonicalModel) -> Result<TruthLemmaReport, CanonicalError> {
    let phi = &cm.space.closure.closure;
    let compiled = Compiled::new(phi);
    let bound = compiled.bind(&cm.model.frame)?;
    let values: Vec<StateSet> = compiled.vars().iter().map(|v| cm.model.value(v)).collect();
    let exts = bound.eval(&values);
    let mut violations = Vec::new();
    for (f, ext) in phi.iter().zip(&exts) {
        for (x, label) in cm.labels.iter().enumerate() {
            let in_label = label.contains(&cm.space, f);
            let satisfied = ext.contains(x);
            if in_label != satisfied {
                violations.push(LemmaViolation {
                    state: x,
                    formula: f.to_string(),
                    in_label,
                    satisfied,
                });
            }
        }
    }
    Ok(TruthLemmaReport {
        formulas: phi.len(),
        states: cm.labels.len(),
        violations,
    })
}

/// `phi_y`: the right-nested conjunction of the in-side.
pub fn state_formula(space: &CanonicalSpace, x: &PairState) -> Formula {
    Formula::conjunction(x.in_formulas(space))
}

/// `phi_Z`: the right-nested disjunction of the members' state formulas.
pub fn set_formula(space: &CanonicalSpace, z: &[PairState]) -> Result<Formula, CanonicalError> {
    if z.is_empty() {
        return Err(CanonicalError::EmptySet);
    }
    Ok(Formula::disjunction(z.iter().map(|x| state_formula(space, x))))
}

/// One instance of the claim that `X_G Y` makes `X => K_G Y` provable.
/// `None` when `X_G Y` fails in the model; otherwise the oracle's answer,
/// which must never be `Refuted`.
pub fn probe_accessibility(
    cm: &CanonicalModel,
    group: &Group,
    xs: &[usize],
    ys: &[usize],
    oracle: &dyn ProvabilityOracle,
) -> Result<Option<Provability>, CanonicalError> {
    let succ = cm.model.frame.group_successors(group)?;
    let y_set = StateSet::from_indices(cm.labels.len(), ys.iter().copied()).map_err(|i| {
        ModelError::OutOfRange {
            what: "lemma set".into(),
            index: i,
            states: cm.labels.len(),
        }
    })?;
    if !xs.iter().all(|&x| succ[x].is_subset(&y_set)) {
        return Ok(None);
    }
    let pick = |is: &[usize]| is.iter().map(|&i| cm.labels[i].clone()).collect::<Vec<_>>();
    let q = Formula::implies(
        set_formula(&cm.space, &pick(xs))?,
        Formula::know(group.clone(), set_formula(&cm.space, &pick(ys))?),
    );
    Ok(Some(oracle.query(&q)))
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelDoc {
    #[serde(rename = "in")]
    pub inside: Vec<String>,
}

/// The model document plus state labels.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalDoc {
    #[serde(flatten)]
    pub model: ModelDoc,
    pub labels: Vec<LabelDoc>,
}

impl CanonicalModel {
    pub fn to_doc(&self) -> CanonicalDoc {
        CanonicalDoc {
            model: self.model.to_doc(),
            labels: self
                .labels
                .iter()
                .map(|x| LabelDoc {
                    inside: x.in_formulas(&self.space).iter().map(Formula::to_string).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::proofs::{Justification, ProofSystem, Step, SystemKind};
    use crate::semantics::validate_model;

    fn u() -> Universe {
        Universe::new(["a", "b"]).unwrap()
    }
    fn f(s: &str) -> Formula {
        parse(s, &u()).unwrap()
    }

    #[test]
    fn propositional_oracle_examples() {
        let o = propositional_oracle();
        assert_eq!(o.query(&f("~(p & q) => (~p | ~q)")), Provability::Provable);
        assert_eq!(o.query(&f("p | ~p")), Provability::Refuted);
        assert_eq!(o.query(&f("p => p")), Provability::Provable);
        assert_eq!(o.query(&f("K{a} p => p")), Provability::Unknown);
        assert_eq!(o.query(&f("top => bot")), Provability::Refuted);
    }

    #[test]
    fn bounded_oracle_examples() {
        let b = SearchBounds::default();
        let a6 = f("K{a} p => p");
        assert_eq!(bounded_oracle(b.clone(), &[]).query(&a6), Provability::Unknown);
        let proof = Proof {
            system: ProofSystem::new(SystemKind::GrFde),
            steps: vec![Step {
                formula: a6.clone(),
                justification: Justification::Axiom("A6".into()),
            }],
        };
        let o = bounded_oracle(b.clone(), &[proof]);
        assert_eq!(o.query(&a6), Provability::Provable);
        assert_eq!(o.query(&f("p => K{a} p")), Provability::Refuted);
        let tiny = SearchBounds {
            max_states: 1,
            ..b
        };
        let huge = f("CK{a,b} (p & q & r) => p & q & r");
        assert_eq!(bounded_oracle(tiny, &[]).query(&huge), Provability::Unknown);
    }

    #[test]
    fn independence_examples() {
        let o = propositional_oracle();
        let space = CanonicalSpace::new(&f("p"));
        let x = PairState::new(&space, space.partition(&[f("p"), Formula::top(), f("~p")])).unwrap();
        // Phi' also holds _t and its negation; keep _t on the side of top
        let x_t = PairState::new(
            &space,
            space.partition(&[f("p"), Formula::top(), f("~p"), Formula::var("_t")]),
        )
        .unwrap();
        assert_eq!(is_independent(&space, &x_t, &o), Independence::Independent);
        assert_eq!(is_independent(&space, &x, &o), Independence::Independent);
        assert_eq!(
            PairState::new(&space, space.partition(&[f("p")])),
            Err(CanonicalError::MissingTop)
        );
    }

    #[test]
    fn pair_extension_examples() {
        let o = propositional_oracle();
        let space = CanonicalSpace::new(&f("p | q"));
        let x = pair_extend(&[f("p")], &[f("q")], &space, &o).unwrap();
        assert!(x.contains(&space, &f("p")));
        assert!(!x.contains(&space, &f("q")));
        assert!(x.contains(&space, &Formula::top()));
        assert_eq!(is_independent(&space, &x, &o), Independence::Independent);
        assert!(pair_extend(&[], &[], &space, &o).is_ok());
        assert_eq!(
            pair_extend(&[f("p")], &[f("p")], &space, &o),
            Err(CanonicalError::NotIndependent)
        );
    }

    #[test]
    fn star_examples() {
        let space = CanonicalSpace::new(&f("p"));
        let x = space.partition(&[f("p"), Formula::top(), Formula::var("_t")]);
        assert_eq!(canonical_star(&space, &x), x);
        let everything = space.partition(space.formulas());
        let s = canonical_star(&space, &everything);
        assert!(s.inside.is_empty());
        assert!(PairState::new(&space, s).is_err());
        // no double negations in this closure, so the star is period two on
        // every partition
        for mask in 0..1u64 << space.len() {
            let p = Partition {
                inside: StateSet::from_mask(space.len(), mask),
            };
            assert_eq!(canonical_star(&space, &canonical_star(&space, &p)), p);
        }
    }

    #[test]
    fn accessibility_examples() {
        let space = CanonicalSpace::new(&f("K{a} p"));
        let a = AgentId::new("a").unwrap();
        let top = Formula::top();
        let plain = PairState::new(&space, space.partition([&top])).unwrap();
        let knows = PairState::new(&space, space.partition([&top, &f("K{a} p")])).unwrap();
        let has_p = PairState::new(&space, space.partition([&top, &f("p")])).unwrap();
        assert!(canonical_accessibility(&space, &a, &plain, &knows));
        assert!(!canonical_accessibility(&space, &a, &knows, &plain));
        assert!(canonical_accessibility(&space, &a, &knows, &has_p));
    }

    #[test]
    fn canonical_model_for_p() {
        let o = propositional_oracle();
        let cm = build_canonical_model(&f("p"), &o, &u(), DEFAULT_PARTITION_CAP).unwrap();
        assert!(!cm.labels.is_empty());
        assert!(cm.labels.iter().all(|x| x.contains(&cm.space, &Formula::top())));
        assert_eq!(validate_model(&cm.model), Ok(()));
        let report = verify_truth_lemma(&cm).unwrap();
        assert!(report.holds(), "{:?}", report.violations);
        // four truth values for p, _t forced true by its negation's freedom
        let doc = serde_json::to_value(cm.to_doc()).unwrap();
        assert_eq!(doc["labels"].as_array().unwrap().len(), cm.labels.len());
    }

    #[test]
    fn corrupted_valuation_is_caught() {
        let o = propositional_oracle();
        let mut cm = build_canonical_model(&f("p"), &o, &u(), DEFAULT_PARTITION_CAP).unwrap();
        let v = cm.model.valuation.get_mut("p").unwrap();
        if v.contains(0) {
            v.remove(0)
        } else {
            v.insert(0)
        }
        assert!(!verify_truth_lemma(&cm).unwrap().holds());
    }

    #[test]
    fn modal_closure_needs_a_decisive_oracle() {
        let o = propositional_oracle();
        assert!(matches!(
            build_canonical_model(&f("K{a} p"), &o, &u(), DEFAULT_PARTITION_CAP),
            Err(CanonicalError::Undecided(_))
        ));
        assert!(matches!(
            build_canonical_model(&f("p"), &o, &u(), 4),
            Err(CanonicalError::TooLarge { .. })
        ));
    }

    #[test]
    fn state_and_set_formulas() {
        let space = CanonicalSpace::new(&f("p"));
        let top_only = PairState::new(&space, space.partition([&Formula::top()])).unwrap();
        assert_eq!(state_formula(&space, &top_only), Formula::top());
        let other = PairState::new(&space, space.partition([&Formula::top(), &f("p")])).unwrap();
        let z = set_formula(&space, &[top_only.clone(), other.clone()]).unwrap();
        assert_eq!(
            z,
            Formula::or(state_formula(&space, &top_only), state_formula(&space, &other))
        );
        assert_eq!(set_formula(&space, &[]), Err(CanonicalError::EmptySet));
    }

    #[test]
    fn accessibility_probe() {
        let o = propositional_oracle();
        let cm = build_canonical_model(&f("p"), &o, &u(), DEFAULT_PARTITION_CAP).unwrap();
        let g = u().group(["a"]).unwrap();
        let all: Vec<usize> = (0..cm.labels.len()).collect();
        let succ = cm.model.frame.group_successors(&g).unwrap();
        let answer = probe_accessibility(&cm, &g, &[0], &all, &o).unwrap();
        // the query is modal, which the propositional oracle leaves open
        assert_eq!(answer, Some(Provability::Unknown));
        let outside: Vec<usize> = all.iter().copied().filter(|&y| !succ[0].contains(y)).collect();
        if let Some(&y) = succ[0].iter().collect::<Vec<_>>().first() {
            let rest: Vec<usize> = all.iter().copied().filter(|&z| z != y).collect();
            assert_eq!(probe_accessibility(&cm, &g, &[0], &rest, &o).unwrap(), None);
        }
        assert!(outside.len() < all.len());
    }

    #[test]
    fn star_with_double_negation() {
        // tilde(tilde(~~p)) is p, so a partition separating ~~p from p is
        // not returned by the double star
        let space = CanonicalSpace::new(&f("~~p"));
        let split = space.partition([&Formula::top(), &f("~~p")]);
        assert_ne!(canonical_star(&space, &canonical_star(&space, &split)), split);
        let o = propositional_oracle();
        let cm = build_canonical_model(&f("~~p"), &o, &u(), DEFAULT_PARTITION_CAP).unwrap();
        for x in &cm.labels {
            let p = x.partition();
            assert_eq!(canonical_star(&space, &canonical_star(&space, p)), *p);
        }
        assert_eq!(validate_model(&cm.model), Ok(()));
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{agent, bfs_reachable, division_over, f, power_union, random_formula, universe};
use fdekit::canonical::{
    build_canonical_model, propositional_oracle, verify_truth_lemma, Provability,
    ProvabilityOracle, DEFAULT_PARTITION_CAP,
};
use fdekit::proofs::schema;
use fdekit::search::{
    decide, enumerate_models, find_countermodel, probe_schema, probe_schema_with_pool,
    random_models, ProbeReport, ProbeVerdict, Refutation, SearchBounds, Verdict,
};
use fdekit::semantics::{extension, satisfies, valid_in_model, validate_model, Compiled};
use fdekit::{parse, print, Formula, StateSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn pool(items: &[&str]) -> Vec<Formula> {
    items.iter().map(|s| f(s)).collect()
}

/// Two agents, variables p and q, up to three states, no updates.
fn static_bounds() -> SearchBounds {
    SearchBounds {
        max_states: 3,
        agents: vec![agent("a"), agent("b")],
        vars: vec!["p".into(), "q".into()],
        include_updates: false,
        ..SearchBounds::default()
    }
}

/// Up to two states with update relations of at most two triggers.
fn update_bounds() -> SearchBounds {
    SearchBounds {
        max_states: 2,
        include_updates: true,
        max_triggers: 2,
        ..static_bounds()
    }
}

/// Involutions on n points.
fn telephone(n: u32) -> u128 {
    match n {
        0 | 1 => 1,
        _ => telephone(n - 1) + (n as u128 - 1) * telephone(n - 2),
    }
}

/// Size of the exhaustive space without updates, counted independently of
/// the enumerator.
fn static_space(max_states: u32, agents: u32, vars: u32) -> u128 {
    (1..=max_states)
        .map(|n| telephone(n) * (1u128 << (n * (n - 1) * agents)) * (1u128 << (n * vars)))
        .sum()
}

fn sweep_axioms(names: &[&str], b: &SearchBounds, items: &[Formula]) -> (usize, u64, Vec<String>) {
    let mut witnesses = 0;
    let mut models = 0;
    let mut notes = Vec::new();
    for name in names {
        let r = probe_schema_with_pool(&schema(name).unwrap(), b, items).unwrap();
        witnesses += r.witnesses.len();
        models += r.models_checked;
        if !r.witnesses.is_empty() {
            notes.push(format!("{name}: {} witnesses", r.witnesses.len()));
        }
    }
    (witnesses, models, notes)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let items = pool(&["p", "q", "~p"]);
    let names = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"];
    let (w_static, m_static, mut notes) = sweep_axioms(&names, &static_bounds(), &items);
    let (w_upd, m_upd, notes_upd) = sweep_axioms(&["A9"], &update_bounds(), &items);
    notes.extend(notes_upd);
    // A5 ranges over all three groups, so its sweep covers both agents
    let a5 = probe_schema_with_pool(&schema("A5").unwrap(), &static_bounds(), &items).unwrap();
    let a5_expected = static_space(3, 2, 2);
    let elapsed = start.elapsed();
    outcome(
        w_static == 0 && w_upd == 0 && a5.models_checked as u128 == a5_expected
            && elapsed < Duration::from_secs(300),
        format!(
            "0 countermodels expected, found {}; {} models for A1-A8, {} for A9; A5 space {} of {}; {:.1}s {}",
            w_static + w_upd,
            m_static,
            m_upd,
            a5.models_checked,
            a5_expected,
            elapsed.as_secs_f64(),
            notes.join(", ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let items = pool(&["p", "q"]);
    let mut failures = Vec::new();
    let mut instances = 0;
    for (name, b) in [
        ("R0", static_bounds()),
        ("R1", static_bounds()),
        ("R2", static_bounds()),
        ("R3", static_bounds()),
        ("R4", update_bounds()),
        ("R5", update_bounds()),
    ] {
        let r = probe_schema_with_pool(&schema(name).unwrap(), &b, &items).unwrap();
        instances += r.instances;
        if !r.witnesses.is_empty() {
            failures.push(format!("{name}: {} witnesses", r.witnesses.len()));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{instances} rule instances, violations: [{}]", failures.join(", ")),
    )
}

/// `{x | exists (x, Y, z) in U with Y in phi and z in psi}`.
fn diamond(m: &fdekit::GroupUpdateModel, phi: &StateSet, psi: &StateSet) -> StateSet {
    let mut out = StateSet::empty(m.states());
    for u in m.frame.updates() {
        if u.trigger.is_subset(phi) && psi.contains(u.to) {
            out.insert(u.from);
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let base = pool(&["p", "~p", "K{a} q", "CK{a,b} (p | q)", "p \\ q", "~q \\* K{b} p"]);
    let pairs = [("p", "q"), ("~p", "K{a} q"), ("p & q", "~q")];
    let mut roots = vec![Formula::top()];
    for phi in &base {
        roots.push(phi.clone());
        roots.push(Formula::not(phi.clone()));
    }
    for (l, r) in pairs {
        roots.push(f(l));
        roots.push(f(r));
        roots.push(Formula::fuse(f(l), f(r)));
    }
    let compiled = Compiled::new(&roots);
    let mut models = 0u64;
    let mut violations = 0u64;
    let mut nontrivial_fuse = 0u64;
    for b in [static_bounds(), update_bounds()] {
        for m in enumerate_models(&b).unwrap() {
            models += 1;
            let bound = compiled.bind(&m.frame).unwrap();
            let values: Vec<StateSet> = compiled.vars().iter().map(|v| m.value(v)).collect();
            let ext = bound.eval(&values);
            if !ext[0].is_full() {
                violations += 1;
            }
            for i in 0..base.len() {
                if ext[2 + 2 * i] != ext[1 + 2 * i].complement() {
                    violations += 1;
                }
            }
            let off = 1 + 2 * base.len();
            for j in 0..pairs.len() {
                let (l, r, fused) = (&ext[off + 3 * j], &ext[off + 3 * j + 1], &ext[off + 3 * j + 2]);
                let direct = diamond(&m, l, r);
                if *fused != direct {
                    violations += 1;
                }
                if !direct.is_empty() {
                    nontrivial_fuse += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && nontrivial_fuse > 0,
        format!("{models} models, {violations} violations, {nontrivial_fuse} non-empty diamonds"),
    )
}

fn criterion_4() -> Outcome {
    let b = SearchBounds {
        max_states: 3,
        include_updates: true,
        max_triggers: 3,
        seed: 20261014,
        ..SearchBounds::default()
    };
    let groups = universe().groups();
    let inner = pool(&["p", "~q", "K{a} p", "p \\ q"]);
    let slots = pool(&["p", "q", "~p", "K{b} q"]);
    let mut mismatches = 0;
    let mut checks = 0;
    let mut iterated = 0;
    for m in random_models(&b).take(500) {
        let n = m.states();
        for g in &groups {
            for phi in &inner {
                let inner_ext = extension(&m, phi).unwrap().states;
                let got = extension(&m, &Formula::common(g.clone(), phi.clone())).unwrap().states;
                let want = StateSet::from_indices(
                    n,
                    (0..n).filter(|&x| bfs_reachable(&m, g, x).iter().all(|&y| inner_ext.contains(y))),
                )
                .unwrap();
                checks += 1;
                if got != want {
                    mismatches += 1;
                }
            }
        }
        let star = power_union(&m);
        if star.len() > m.frame.updates().len() {
            iterated += 1;
        }
        for phi in &slots {
            for psi in &slots {
                let got = extension(&m, &Formula::ldiv_star(phi.clone(), psi.clone())).unwrap().states;
                let want = division_over(
                    n,
                    &star,
                    &extension(&m, phi).unwrap().states,
                    &extension(&m, psi).unwrap().states,
                );
                checks += 1;
                if got != want {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && iterated > 0,
        format!("{checks} comparisons, {mismatches} mismatches, {iterated} models where R* exceeds R"),
    )
}

fn criterion_5() -> Outcome {
    let b = SearchBounds::default();
    let mut problems = Vec::new();
    if !matches!(decide(&f("p => p"), &b), Verdict::ValidConclusive { .. }) {
        problems.push("p => p not conclusive".to_string());
    }
    let target = f("p => K{a} p");
    match decide(&target, &b) {
        Verdict::Invalid { model, state } => {
            let verified = model.states() <= 2
                && validate_model(&model).is_ok()
                && !satisfies(&model, state, &target).unwrap()
                && !valid_in_model(&model, &target).unwrap();
            if !verified {
                problems.push("witness for p => K{a} p does not verify".into());
            }
        }
        other => problems.push(format!("p => K{{a}} p gave {other:?}")),
    }
    let items = pool(&["p", "q", "~p"]);
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    let cases = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"]
        .into_iter()
        .map(|n| (n, static_bounds()))
        .chain([("A9", update_bounds())]);
    for (name, bounds) in cases {
        for inst in schema(name).unwrap().instances(&items, &universe()) {
            let verdict = decide(&inst.conclusion, &bounds);
            let key = match verdict {
                Verdict::ValidConclusive { .. } => "conclusive",
                Verdict::ValidUpToBound { .. } => "up_to_bound",
                Verdict::Unknown { .. } => "unknown",
                Verdict::Invalid { .. } => {
                    problems.push(format!("{name} instance {} refuted", inst.conclusion));
                    "invalid"
                }
            };
            *tally.entry(key).or_default() += 1;
        }
    }
    outcome(
        problems.is_empty(),
        format!("axiom instances {tally:?}; problems: [{}]", problems.join("; ")),
    )
}

fn criterion_6() -> Outcome {
    let oracle = propositional_oracle();
    let mut details = Vec::new();
    let mut pass = true;
    for src in ["p", "~(p & q) => (~p | ~q)"] {
        let phi0 = f(src);
        match build_canonical_model(&phi0, &oracle, &universe(), DEFAULT_PARTITION_CAP) {
            Ok(cm) => {
                let valid = validate_model(&cm.model).is_ok();
                let report = verify_truth_lemma(&cm).unwrap();
                pass &= valid && report.holds();
                details.push(format!(
                    "{src}: {} states, valid {valid}, {} violations",
                    cm.labels.len(),
                    report.violations.len()
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{src}: {e}"));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn verify_witnesses(r: &ProbeReport) -> bool {
    let u = r.bounds.universe();
    r.witnesses.iter().all(|w| {
        let concl = parse(&w.conclusion, &u).unwrap();
        let premises_hold = w
            .premises
            .iter()
            .all(|p| valid_in_model(&w.model, &parse(p, &u).unwrap()).unwrap());
        validate_model(&w.model).is_ok()
            && premises_hold
            && !satisfies(&w.model, w.state, &concl).unwrap()
    })
}

fn criterion_7() -> Outcome {
    let b = update_bounds();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["A10", "R6", "A11", "A12", "R7"] {
        let r = probe_schema(name, &b).unwrap();
        let replayed = r.replay().unwrap() == r;
        let json_stable = serde_json::to_string(&r).unwrap()
            == serde_json::to_string(&r.replay().unwrap()).unwrap();
        let must_be_clean = matches!(name, "A10" | "R6");
        let ok = replayed
            && json_stable
            && verify_witnesses(&r)
            && (!must_be_clean || r.verdict == ProbeVerdict::Clean);
        pass &= ok;
        details.push(format!(
            "{name} {:?} ({} of {} instances with witnesses, replay {})",
            r.verdict,
            r.witnesses.len(),
            r.instances,
            if replayed { "identical" } else { "differs" }
        ));
    }
    outcome(pass, details.join("; "))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    let mut deepest = 0;
    for _ in 0..1000 {
        let phi = random_formula(&mut rng, 8, &["p", "q", "r"]);
        deepest = deepest.max(phi.depth());
        let text = print(&phi);
        if parse(&text, &universe()).ok() != Some(phi) {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && deepest <= 8,
        format!("1000 formulas, max depth {deepest}, {failures} failures"),
    )
}

/// Truth at a state `x` of a formula over `~ & | =>` is a Boolean function
/// of `(p@x, q@x, p@x*, q@x*)`; the bit at `a | b<<1 | c<<2 | d<<3` holds
/// its value.
type Signature = u16;

const SIG_P: Signature = 0b1010_1010_1010_1010;
const SIG_Q: Signature = 0b1100_1100_1100_1100;

fn sig_neg(s: Signature) -> Signature {
    let mut out = 0;
    for i in 0..16u16 {
        let swapped = (i >> 2) | ((i & 3) << 2);
        if s >> swapped & 1 == 0 {
            out |= 1 << i;
        }
    }
    out
}

fn signature(phi: &Formula) -> Signature {
    match phi {
        Formula::Var(v) if v == "p" => SIG_P,
        Formula::Var(v) if v == "q" => SIG_Q,
        Formula::Neg(x) => sig_neg(signature(x)),
        Formula::And(l, r) => signature(l) & signature(r),
        Formula::Or(l, r) => signature(l) | signature(r),
        Formula::Impl(l, r) => !signature(l) | signature(r),
        other => panic!("unexpected {other:?}"),
    }
}

/// All formulas of depth at most `depth`, listed literally.
fn all_formulas(depth: usize) -> Vec<Formula> {
    if depth == 1 {
        return vec![Formula::var("p"), Formula::var("q")];
    }
    let below = all_formulas(depth - 1);
    let mut out = below.clone();
    for x in &below {
        out.push(Formula::neg(x.clone()));
    }
    for l in &below {
        for r in &below {
            out.push(Formula::and(l.clone(), r.clone()));
            out.push(Formula::or(l.clone(), r.clone()));
            out.push(Formula::implies(l.clone(), r.clone()));
        }
    }
    let set: BTreeSet<Formula> = out.into_iter().collect();
    set.into_iter().collect()
}

fn criterion_9() -> Outcome {
    // one representative per signature class, layer by layer; a formula of
    // depth k+1 applies one connective to formulas of depth at most k
    let mut classes: BTreeMap<Signature, Formula> =
        BTreeMap::from([(SIG_P, Formula::var("p")), (SIG_Q, Formula::var("q"))]);
    for _ in 2..=5 {
        let layer: Vec<(Signature, Formula)> =
            classes.iter().map(|(s, x)| (*s, x.clone())).collect();
        let mut next = classes.clone();
        for (s, x) in &layer {
            next.entry(sig_neg(*s)).or_insert_with(|| Formula::neg(x.clone()));
        }
        for (sl, l) in &layer {
            for (sr, r) in &layer {
                next.entry(sl & sr).or_insert_with(|| Formula::and(l.clone(), r.clone()));
                next.entry(sl | sr).or_insert_with(|| Formula::or(l.clone(), r.clone()));
                next.entry(!sl | sr).or_insert_with(|| Formula::implies(l.clone(), r.clone()));
            }
        }
        classes = next;
    }
    // literal enumeration to depth 3 lands in known classes with matching
    // verdicts
    let literal = all_formulas(3);
    let literal_ok = literal.iter().all(|x| classes.contains_key(&signature(x)));
    let oracle = propositional_oracle();
    let b = SearchBounds {
        max_states: 3,
        agents: vec![agent("a")],
        vars: vec!["p".into(), "q".into()],
        include_updates: false,
        ..SearchBounds::default()
    };
    let mut disagreements = 0;
    let mut refuted = 0;
    let judge = |x: &Formula| -> (bool, bool, bool) {
        let o = oracle.query(x);
        let cm = matches!(find_countermodel(x, &b).unwrap(), Refutation::Invalid { .. });
        (o == Provability::Refuted, cm, signature(x) != Signature::MAX)
    };
    for (s, rep) in &classes {
        assert_eq!(signature(rep), *s);
        assert!(rep.depth() <= 5);
        let (o, cm, sig) = judge(rep);
        if o != cm || o != sig {
            disagreements += 1;
        }
        refuted += o as usize;
    }
    for x in &literal {
        let (o, cm, sig) = judge(x);
        if o != cm || o != sig {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0 && literal_ok,
        format!(
            "{} signature classes cover every formula of depth <= 5 ({} refuted), {} literal formulas of depth <= 3, {disagreements} disagreements",
            classes.len(),
            refuted,
            literal.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("1", "axiom soundness sweep", criterion_1),
        ("2", "rule preservation", criterion_2),
        ("3", "defined-connective laws", criterion_3),
        ("4", "fixpoint oracle agreement", criterion_4),
        ("5", "decision procedure", criterion_5),
        ("6", "canonical lab", criterion_6),
        ("7", "conjecture probe", criterion_7),
        ("8", "parser round trip", criterion_8),
        ("9", "two-point oracle validation", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !o.pass as usize;
        println!(
            "criterion {id} {} {name} [{:.1}s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}

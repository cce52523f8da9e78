mod common;

use std::collections::BTreeSet;

use common::{agent, f, power_union, random_formula, universe};
use fdekit::formula::{closure, tilde};
use fdekit::proofs::{
    check_proof, is_tautology_instance, match_axiom, schema, Justification, Proof, ProofSystem, Step,
    SystemKind,
};
use fdekit::search::{find_countermodel, random_model, Refutation, SearchBounds};
use fdekit::semantics::{extension, update_star, GroupUpdateModel};
use fdekit::{parse, print, Formula, StateSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula(depth: usize) -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(move |seed| {
        random_formula(&mut ChaCha8Rng::seed_from_u64(seed), depth, &["p", "q", "r"])
    })
}

fn model() -> impl Strategy<Value = GroupUpdateModel> {
    any::<u64>().prop_map(|seed| {
        random_model(&SearchBounds {
            max_states: 3,
            include_updates: true,
            max_triggers: 3,
            seed,
            ..SearchBounds::default()
        })
    })
}

fn ext(m: &GroupUpdateModel, phi: &Formula) -> StateSet {
    extension(m, phi).unwrap().states
}

fn is_double_negation(phi: &Formula) -> bool {
    matches!(phi, Formula::Neg(inner) if matches!(**inner, Formula::Neg(_)))
}

#[test]
fn tilde_fails_to_be_an_involution_on_double_negations() {
    let phi = f("~~p");
    assert_eq!(tilde(&tilde(&phi)), f("p"));
    assert_ne!(tilde(&tilde(&phi)), phi);
}

#[test]
fn a7_ignores_surface_agent_order() {
    assert_eq!(f("K{b,a} p"), f("K{a,b} p"));
    assert!(match_axiom("A7", &f("K{b,a} q <=> K{a} q & K{b} q")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tilde_is_an_involution_off_double_negations(phi in formula(6)) {
        prop_assert_eq!(tilde(&tilde(&phi)) == phi, !is_double_negation(&phi));
    }

    #[test]
    fn round_trip(phi in formula(8)) {
        prop_assert_eq!(parse(&print(&phi), &universe()).unwrap(), phi);
    }

    #[test]
    fn closure_clauses(phi in formula(5)) {
        let cl = closure(&phi);
        let members: BTreeSet<&Formula> = cl.closure.iter().collect();
        let negs: BTreeSet<&Formula> = cl.neg_closure.iter().collect();
        prop_assert!(members.contains(&phi) && members.contains(&Formula::top()));
        for psi in &cl.closure {
            for child in psi.children() {
                prop_assert!(members.contains(child));
            }
            match psi {
                Formula::Common(g, inner) => {
                    let unfold = Formula::know(g.clone(), Formula::and((**inner).clone(), psi.clone()));
                    prop_assert!(members.contains(&unfold));
                }
                Formula::Know(g, inner) => {
                    for a in g.members() {
                        prop_assert!(members.contains(&Formula::know_agent(a.clone(), (**inner).clone())));
                    }
                }
                _ => {}
            }
            prop_assert!(negs.contains(psi) && negs.contains(&tilde(psi)));
        }
        for psi in &cl.neg_closure {
            prop_assert!(negs.contains(&tilde(psi)));
            prop_assert!(members.contains(psi) || cl.closure.iter().any(|x| tilde(x) == *psi));
        }
        let bound = 2 + phi.subformulas().len() * (3 + universe().len());
        prop_assert!(cl.closure.len() <= bound);
        prop_assert!(cl.neg_closure.len() <= 2 * cl.closure.len());
    }

    #[test]
    fn pointwise_laws(m in model(), phi in formula(4), psi in formula(4)) {
        let (a, b) = (ext(&m, &phi), ext(&m, &psi));
        prop_assert_eq!(ext(&m, &Formula::neg(Formula::neg(phi.clone()))), a.clone());
        prop_assert_eq!(ext(&m, &Formula::and(phi.clone(), psi.clone())), a.intersection(&b));
        prop_assert_eq!(ext(&m, &Formula::or(phi.clone(), psi.clone())), a.union(&b));
        prop_assert_eq!(ext(&m, &Formula::implies(phi.clone(), psi.clone())), a.complement().union(&b));
        prop_assert_eq!(ext(&m, &Formula::not(phi.clone())), a.complement());
        let n = m.states();
        let swapped = StateSet::from_indices(n, (0..n).filter(|&x| !a.contains(m.frame.star()[x]))).unwrap();
        prop_assert_eq!(ext(&m, &Formula::neg(phi.clone())), swapped);
    }

    #[test]
    fn common_knowledge_unfolds(m in model(), phi in formula(4)) {
        for g in universe().groups() {
            let ck = Formula::common(g.clone(), phi.clone());
            let unfold = Formula::know(g, Formula::and(phi.clone(), ck.clone()));
            prop_assert_eq!(ext(&m, &ck), ext(&m, &unfold));
        }
    }

    #[test]
    fn iterated_updates_saturate(m in model()) {
        let star: BTreeSet<_> = update_star(&m)
            .into_iter()
            .map(|u| (u.from, u.trigger.to_vec(), u.to))
            .collect();
        prop_assert_eq!(&star, &power_union(&m));
        for u in m.frame.updates() {
            prop_assert!(star.contains(&(u.from, u.trigger.to_vec(), u.to)));
        }
    }

    #[test]
    fn evaluation_is_local(m in model(), phi in formula(5), mask in 0u64..8) {
        let before = ext(&m, &phi);
        let mut changed = m.clone();
        let n = m.states();
        for v in ["s", "t"] {
            changed.valuation.insert(v.to_string(), StateSet::from_mask(n, mask & ((1 << n) - 1)));
        }
        prop_assert_eq!(ext(&changed, &phi), before);
    }

    #[test]
    fn tautology_check_matches_truth_tables(phi in skeleton(6)) {
        prop_assert_eq!(is_tautology_instance(&phi), truth_table_valid(&phi));
    }

    #[test]
    fn accepted_axiom_steps_survive_the_tiny_sweep(index in 0usize..10_000) {
        let names = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"];
        let pool = vec![f("p"), f("~q")];
        let all: Vec<(String, Formula)> = names
            .iter()
            .flat_map(|n| {
                schema(n).unwrap().instances(&pool, &universe())
                    .into_iter()
                    .map(move |i| (n.to_string(), i.conclusion))
            })
            .collect();
        let (name, conclusion) = &all[index % all.len()];
        let proof = Proof {
            system: ProofSystem::new(SystemKind::GrUpFde),
            steps: vec![Step { formula: conclusion.clone(), justification: Justification::Axiom(name.clone()) }],
        };
        prop_assert!(check_proof(&proof).is_ok());
        let b = SearchBounds { max_states: 2, max_triggers: 1, ..SearchBounds::default() };
        let refuted = matches!(find_countermodel(conclusion, &b).unwrap(), Refutation::Invalid { .. });
        prop_assert!(!refuted);
    }
}

/// Atoms whose heads lie outside `& | =>`.
fn atoms() -> [Formula; 3] {
    [
        Formula::var("p"),
        Formula::neg(Formula::var("p")),
        Formula::know_agent(agent("a"), Formula::var("q")),
    ]
}

fn skeleton(depth: usize) -> impl Strategy<Value = Formula> {
    let leaf = (0usize..3).prop_map(|i| atoms()[i].clone());
    leaf.prop_recursive(depth as u32 - 1, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::implies(l, r)),
        ]
    })
}

fn classical(phi: &Formula, row: u8) -> bool {
    match phi {
        Formula::And(l, r) => classical(l, row) && classical(r, row),
        Formula::Or(l, r) => classical(l, row) || classical(r, row),
        Formula::Impl(l, r) => !classical(l, row) || classical(r, row),
        atom => {
            let i = atoms().iter().position(|a| a == atom).unwrap();
            row >> i & 1 == 1
        }
    }
}

fn truth_table_valid(phi: &Formula) -> bool {
    (0..8).all(|row| classical(phi, row))
}

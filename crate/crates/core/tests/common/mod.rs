//! Shared generators and reference evaluators for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fdekit::semantics::GroupUpdateModel;
use fdekit::{AgentId, Formula, Group, StateSet, Universe};
use rand::Rng;

pub fn universe() -> Universe {
    Universe::new(["a", "b"]).unwrap()
}

pub fn f(s: &str) -> Formula {
    fdekit::parse(s, &universe()).unwrap()
}

pub fn agent(s: &str) -> AgentId {
    AgentId::new(s).unwrap()
}

/// A random formula of depth at most `depth` over every node kind.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Formula {
    let groups = universe().groups();
    if depth <= 1 || rng.gen_bool(0.25) {
        // top is `_t => _t`, so it only fits where two levels remain
        return if depth >= 2 && rng.gen_bool(0.1) {
            Formula::top()
        } else {
            Formula::var(vars[rng.gen_range(0..vars.len())])
        };
    }
    let sub = |rng: &mut R| random_formula(rng, depth - 1, vars);
    match rng.gen_range(0..8) {
        0 => Formula::neg(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::know(groups[rng.gen_range(0..groups.len())].clone(), sub(rng)),
        5 => Formula::common(groups[rng.gen_range(0..groups.len())].clone(), sub(rng)),
        6 => Formula::ldiv(sub(rng), sub(rng)),
        _ => Formula::ldiv_star(sub(rng), sub(rng)),
    }
}

/// States reachable from `x` in zero or more steps of the group relation,
/// by breadth-first search over the relation pairs.
pub fn bfs_reachable(m: &GroupUpdateModel, g: &Group, x: usize) -> BTreeSet<usize> {
    let edges: BTreeSet<(usize, usize)> = g
        .members()
        .flat_map(|a| m.frame.relation(a).unwrap())
        .collect();
    let mut seen = BTreeSet::from([x]);
    let mut queue = std::collections::VecDeque::from([x]);
    while let Some(y) = queue.pop_front() {
        for &(u, v) in &edges {
            if u == y && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

pub type Triple = (usize, Vec<usize>, usize);

/// The union of all powers `R^k`, `k >= 1`, computed by iterating the
/// composition until no new triple appears.
pub fn power_union(m: &GroupUpdateModel) -> BTreeSet<Triple> {
    let base: BTreeSet<Triple> = m
        .frame
        .updates()
        .iter()
        .map(|u| (u.from, u.trigger.to_vec(), u.to))
        .collect();
    let mut all = base.clone();
    let mut power = base.clone();
    loop {
        let next: BTreeSet<Triple> = base
            .iter()
            .flat_map(|(x, _, v)| {
                power
                    .iter()
                    .filter(move |(w, _, _)| w == v)
                    .map(move |(_, y, z)| (*x, y.clone(), *z))
            })
            .collect();
        let before = all.len();
        all.extend(next.iter().cloned());
        if all.len() == before {
            return all;
        }
        power = next;
    }
}

/// `phi \ psi` read off a triple set directly.
pub fn division_over(
    n: usize,
    triples: &BTreeSet<Triple>,
    phi: &StateSet,
    psi: &StateSet,
) -> StateSet {
    let mut out = StateSet::full(n);
    for (x, y, z) in triples {
        if y.iter().all(|s| phi.contains(*s)) && !psi.contains(*z) {
            out.remove(*x);
        }
    }
    out
}

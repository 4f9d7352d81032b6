//! Random small agents and Kripke models for property tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::belief::BeliefFormula;
use crate::ctl::{Ctl, Model};
use crate::lang::{ActionDecl, BodyExpr, CompiledAgent, ExternalEvent, MotivationDecl, PlanDecl};
use crate::names::{ActionName, Atom, EventName, Identifier};

#[derive(Debug, Clone)]
pub struct AgentShape {
    pub max_events: usize,
    pub max_plans: usize,
    pub max_actions: usize,
    pub max_atoms: usize,
    /// Number of motivation rules to add (0 for none).
    pub motivations: usize,
}

impl Default for AgentShape {
    fn default() -> Self {
        AgentShape {
            max_events: 2,
            max_plans: 4,
            max_actions: 3,
            max_atoms: 4,
            motivations: 0,
        }
    }
}

fn literal(rng: &mut impl Rng, atoms: &[Atom]) -> BeliefFormula {
    let a = BeliefFormula::Atom(atoms.choose(rng).expect("atoms").clone());
    if rng.random_bool(0.5) {
        BeliefFormula::not(a)
    } else {
        a
    }
}

/// `true`, a literal, or a conjunction/disjunction of two literals.
pub fn random_formula(rng: &mut impl Rng, atoms: &[Atom]) -> BeliefFormula {
    match rng.random_range(0..5) {
        0 | 1 => BeliefFormula::True,
        2 => literal(rng, atoms),
        3 => BeliefFormula::and(literal(rng, atoms), literal(rng, atoms)),
        _ => BeliefFormula::or(literal(rng, atoms), literal(rng, atoms)),
    }
}

fn random_step(rng: &mut impl Rng, actions: &[ActionName], events: &[EventName], from: usize, atoms: &[Atom]) -> BodyExpr {
    let later = &events[from + 1..];
    match rng.random_range(0..6) {
        0 if !later.is_empty() => BodyExpr::Post(later.choose(rng).unwrap().clone()),
        1 if !later.is_empty() => BodyExpr::Goal {
            success: literal(rng, atoms),
            event: later.choose(rng).unwrap().clone(),
            failure: literal(rng, atoms),
        },
        _ => BodyExpr::Act(actions.choose(rng).unwrap().clone()),
    }
}

fn random_body(rng: &mut impl Rng, actions: &[ActionName], events: &[EventName], from: usize, atoms: &[Atom]) -> BodyExpr {
    let len = rng.random_range(1..=3);
    let steps: Vec<BodyExpr> = (0..len)
        .map(|_| random_step(rng, actions, events, from, atoms))
        .collect();
    if len >= 2 && rng.random_bool(0.25) {
        let mut steps = steps;
        let right = steps.pop().unwrap();
        BodyExpr::par(BodyExpr::sequence(steps), right)
    } else {
        BodyExpr::sequence(steps)
    }
}

/// A random valid agent. Sub-events are only posted to higher-numbered
/// events, so the plan library is never recursive.
pub fn random_agent(rng: &mut impl Rng, shape: &AgentShape) -> CompiledAgent {
    let n_atoms = rng.random_range(1..=shape.max_atoms.max(1));
    let atoms: Vec<Atom> = (0..n_atoms).map(|i| Atom::new(format!("b{i}"))).collect();
    let n_events = rng.random_range(1..=shape.max_events.max(1));
    let events: Vec<EventName> = (0..n_events).map(|i| EventName::new(format!("e{i}"))).collect();
    let n_actions = rng.random_range(1..=shape.max_actions.max(1));
    let action_names: Vec<ActionName> = (0..n_actions).map(|i| ActionName::new(format!("a{i}"))).collect();

    let mut actions = BTreeMap::new();
    for name in &action_names {
        let mut adds = BTreeSet::new();
        let mut dels = BTreeSet::new();
        for a in &atoms {
            match rng.random_range(0..4) {
                0 => {
                    adds.insert(a.clone());
                }
                1 => {
                    dels.insert(a.clone());
                }
                _ => {}
            }
        }
        let pre = if rng.random_bool(0.5) {
            BeliefFormula::True
        } else {
            literal(rng, &atoms)
        };
        actions.insert(
            name.clone(),
            ActionDecl {
                name: name.clone(),
                pre,
                adds,
                dels,
            },
        );
    }

    let n_plans = rng.random_range(1..=shape.max_plans.max(1));
    let plans: Vec<PlanDecl> = (0..n_plans)
        .map(|_| {
            let from = rng.random_range(0..n_events);
            PlanDecl {
                event: events[from].clone(),
                context: random_formula(rng, &atoms),
                body: random_body(rng, &action_names, &events, from, &atoms),
            }
        })
        .collect();

    // Posted events must be known, so any that no plan handles become external.
    let handled: BTreeSet<&EventName> = plans.iter().map(|p| &p.event).collect();
    let posted: BTreeSet<&EventName> = plans.iter().flat_map(|p| p.body.posted_events()).collect();
    let external_events = events
        .iter()
        .enumerate()
        .filter(|(i, e)| *i == 0 || (posted.contains(e) && !handled.contains(e)) || rng.random_bool(0.5))
        .map(|(i, e)| ExternalEvent {
            event: e.clone(),
            identifier: Identifier::new(format!("i{i}")),
        })
        .collect();

    let motivations = (0..shape.motivations)
        .map(|k| MotivationDecl {
            condition: literal(rng, &atoms),
            event: events.choose(rng).unwrap().clone(),
            identifier: Identifier::new(format!("m{k}")),
        })
        .collect();

    let initial_beliefs = atoms.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();

    CompiledAgent {
        initial_beliefs,
        negative_assertions: BTreeSet::new(),
        external_events,
        plans,
        actions,
        motivations,
    }
}

/// A random model with a total transition relation. `labels` names the
/// atomic propositions; each holds in a random subset of states.
pub fn random_model(rng: &mut impl Rng, max_states: usize, labels: &[&str]) -> Model {
    let n = rng.random_range(1..=max_states.max(1));
    let successors = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3.min(n));
            let mut succ: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    let labels = labels
        .iter()
        .map(|l| {
            let set = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            (l.to_string(), set)
        })
        .collect();
    Model {
        successors,
        labels,
        initial: 0,
    }
}

/// A random CTL formula of nesting depth at most `depth`.
pub fn random_ctl(rng: &mut impl Rng, depth: usize, labels: &[&str]) -> Ctl {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..8) {
            0 => Ctl::True,
            1 => Ctl::False,
            _ => Ctl::label(*labels.choose(rng).expect("labels")),
        };
    }
    let op = rng.random_range(0..14);
    let mut sub = || Box::new(random_ctl(rng, depth - 1, labels));
    match op {
        0 => Ctl::Not(sub()),
        1 => Ctl::And(sub(), sub()),
        2 => Ctl::Or(sub(), sub()),
        3 => Ctl::Implies(sub(), sub()),
        4 => Ctl::EX(sub()),
        5 => Ctl::AX(sub()),
        6 => Ctl::EF(sub()),
        7 => Ctl::AF(sub()),
        8 => Ctl::EG(sub()),
        9 => Ctl::AG(sub()),
        10 => Ctl::EU(sub(), sub()),
        11 => Ctl::AU(sub(), sub()),
        _ => Ctl::Not(sub()),
    }
}

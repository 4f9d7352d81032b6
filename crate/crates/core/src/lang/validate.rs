use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::CompiledAgent;
use crate::names::{ActionName, Atom, EventName, Identifier};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("plan {plan} for `{event}` uses undeclared action `{action}`")]
    UndeclaredAction {
        plan: usize,
        event: EventName,
        action: ActionName,
    },
    #[error("plan {plan} for `{event}` posts unknown event `{posted}`")]
    UndeclaredEvent {
        plan: usize,
        event: EventName,
        posted: EventName,
    },
    #[error("identifier `{0}` is declared more than once")]
    DuplicateIdentifier(Identifier),
    #[error("action `{0}` is declared more than once")]
    DuplicateAction(ActionName),
    #[error("action `{action}` both adds and deletes {atoms:?}")]
    ConflictingEffects { action: ActionName, atoms: Vec<Atom> },
    #[error("atom `{0}` is both believed and asserted false")]
    ContradictoryInitialBelief(Atom),
    #[error("recursive plans: {}", .0.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(" -> "))]
    Recursion(Vec<EventName>),
}

pub(super) fn validate(agent: &CompiledAgent) -> Result<(), ValidationError> {
    if let Some(atom) = agent
        .initial_beliefs
        .intersection(&agent.negative_assertions)
        .next()
    {
        return Err(ValidationError::ContradictoryInitialBelief(atom.clone()));
    }

    let mut seen = BTreeSet::new();
    for id in agent.identifiers() {
        if !seen.insert(id) {
            return Err(ValidationError::DuplicateIdentifier(id.clone()));
        }
    }

    for action in agent.actions.values() {
        let clash: Vec<Atom> = action.adds.intersection(&action.dels).cloned().collect();
        if !clash.is_empty() {
            return Err(ValidationError::ConflictingEffects {
                action: action.name.clone(),
                atoms: clash,
            });
        }
    }

    let mut known_events: BTreeSet<&EventName> = agent.plans.iter().map(|p| &p.event).collect();
    known_events.extend(agent.external_events.iter().map(|e| &e.event));
    known_events.extend(agent.motivations.iter().map(|m| &m.event));

    for (i, plan) in agent.plans.iter().enumerate() {
        for action in plan.body.actions() {
            if !agent.actions.contains_key(action) {
                return Err(ValidationError::UndeclaredAction {
                    plan: i + 1,
                    event: plan.event.clone(),
                    action: action.clone(),
                });
            }
        }
        for posted in plan.body.posted_events() {
            if !known_events.contains(posted) {
                return Err(ValidationError::UndeclaredEvent {
                    plan: i + 1,
                    event: plan.event.clone(),
                    posted: posted.clone(),
                });
            }
        }
    }

    if let Some(cycle) = find_cycle(agent) {
        return Err(ValidationError::Recursion(cycle));
    }
    Ok(())
}

/// Event graph: `e -> f` when some plan for `e` posts `f`.
pub(crate) fn event_graph(agent: &CompiledAgent) -> BTreeMap<&EventName, BTreeSet<&EventName>> {
    let mut graph: BTreeMap<&EventName, BTreeSet<&EventName>> = BTreeMap::new();
    for plan in &agent.plans {
        let entry = graph.entry(&plan.event).or_default();
        entry.extend(plan.body.posted_events());
    }
    graph
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Open,
    Done,
}

fn find_cycle(agent: &CompiledAgent) -> Option<Vec<EventName>> {
    let graph = event_graph(agent);
    let mut marks: BTreeMap<&EventName, Mark> = BTreeMap::new();
    let mut stack: Vec<&EventName> = Vec::new();

    fn dfs<'a>(
        node: &'a EventName,
        graph: &BTreeMap<&'a EventName, BTreeSet<&'a EventName>>,
        marks: &mut BTreeMap<&'a EventName, Mark>,
        stack: &mut Vec<&'a EventName>,
    ) -> Option<Vec<EventName>> {
        marks.insert(node, Mark::Open);
        stack.push(node);
        if let Some(succs) = graph.get(node) {
            for &next in succs {
                match marks.get(next) {
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|e| *e == next).unwrap_or(0);
                        let mut cycle: Vec<EventName> =
                            stack[start..].iter().map(|e| (*e).clone()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        if let Some(c) = dfs(next, graph, marks, stack) {
                            return Some(c);
                        }
                    }
                }
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
        None
    }

    let roots: Vec<&EventName> = graph.keys().copied().collect();
    for root in roots {
        if !marks.contains_key(root) {
            if let Some(c) = dfs(root, &graph, &mut marks, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

//! The `.can` agent language: declarations, parsing, validation and printing.
//!
//! A program is a list of `.`-terminated statements:
//!
//! ```text
//! belief b.
//! assert-not b.
//! event e [id].
//! motivation phi ~> e [id].
//! plan e : phi <- body.
//! action a : phi <- +{adds} -{dels}.
//! ```
//!
//! Bodies are built from `nil`, action names, `!event`, `;` (sequence),
//! `||` (parallel) and `goal(success, event, failure)`. `;` binds tighter
//! than `||`; both associate to the right.

mod lexer;
mod parser;
mod printer;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::belief::BeliefFormula;
use crate::names::{ActionName, Atom, EventName, Identifier};

pub use parser::ParseError;
pub use printer::pretty_print;
pub use validate::ValidationError;

/// Surface plan body as written in source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyExpr {
    Nil,
    Act(ActionName),
    Post(EventName),
    Seq(Box<BodyExpr>, Box<BodyExpr>),
    Par(Box<BodyExpr>, Box<BodyExpr>),
    Goal {
        success: BeliefFormula,
        event: EventName,
        failure: BeliefFormula,
    },
}

impl BodyExpr {
    pub fn seq(first: BodyExpr, second: BodyExpr) -> Self {
        BodyExpr::Seq(Box::new(first), Box::new(second))
    }

    pub fn par(left: BodyExpr, right: BodyExpr) -> Self {
        BodyExpr::Par(Box::new(left), Box::new(right))
    }

    /// Right-nested sequence of the given steps; `nil` when empty.
    pub fn sequence(steps: impl IntoIterator<Item = BodyExpr>) -> Self {
        let mut steps: Vec<BodyExpr> = steps.into_iter().collect();
        let Some(mut acc) = steps.pop() else {
            return BodyExpr::Nil;
        };
        while let Some(prev) = steps.pop() {
            acc = BodyExpr::seq(prev, acc);
        }
        acc
    }

    /// Events this body posts directly, either with `!e` or as a goal's event.
    pub fn posted_events(&self) -> Vec<&EventName> {
        let mut out = Vec::new();
        self.visit(&mut |node| match node {
            BodyExpr::Post(e) | BodyExpr::Goal { event: e, .. } => out.push(e),
            _ => {}
        });
        out
    }

    pub fn actions(&self) -> Vec<&ActionName> {
        let mut out = Vec::new();
        self.visit(&mut |node| {
            if let BodyExpr::Act(a) = node {
                out.push(a);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a BodyExpr)) {
        f(self);
        match self {
            BodyExpr::Seq(l, r) | BodyExpr::Par(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanDecl {
    pub event: EventName,
    pub context: BeliefFormula,
    pub body: BodyExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: ActionName,
    pub pre: BeliefFormula,
    pub adds: BTreeSet<Atom>,
    pub dels: BTreeSet<Atom>,
}

/// `condition ~> event [identifier]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotivationDecl {
    pub condition: BeliefFormula,
    pub event: EventName,
    pub identifier: Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalEvent {
    pub event: EventName,
    pub identifier: Identifier,
}

/// A parsed and validated agent program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompiledAgent {
    pub initial_beliefs: BTreeSet<Atom>,
    /// Atoms listed as initially false; checked absent, never stored as beliefs.
    pub negative_assertions: BTreeSet<Atom>,
    pub external_events: Vec<ExternalEvent>,
    /// Declaration order is significant: it fixes plan numbering and selection order.
    pub plans: Vec<PlanDecl>,
    pub actions: BTreeMap<ActionName, ActionDecl>,
    pub motivations: Vec<MotivationDecl>,
}

impl CompiledAgent {
    /// Indices into `plans` of the plans handling `event`, in declaration order.
    pub fn plans_for<'a>(&'a self, event: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.plans
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.event.as_str() == event)
            .map(|(i, _)| i)
    }

    /// 1-based position of plan `index` among the plans for its event.
    pub fn plan_ordinal(&self, index: usize) -> usize {
        let event = &self.plans[index].event;
        self.plans[..index]
            .iter()
            .filter(|p| &p.event == event)
            .count()
            + 1
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.get(name)
    }

    /// Every event name that can occur: plan triggers, external and motivation
    /// events, and posted sub-events.
    pub fn event_names(&self) -> BTreeSet<EventName> {
        let mut out: BTreeSet<EventName> = self.plans.iter().map(|p| p.event.clone()).collect();
        out.extend(self.external_events.iter().map(|e| e.event.clone()));
        out.extend(self.motivations.iter().map(|m| m.event.clone()));
        for plan in &self.plans {
            out.extend(plan.body.posted_events().into_iter().cloned());
        }
        out
    }

    /// Every atom mentioned anywhere in the program.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        out.extend(self.initial_beliefs.iter().cloned());
        out.extend(self.negative_assertions.iter().cloned());
        for m in &self.motivations {
            m.condition.collect_atoms(&mut out);
        }
        for a in self.actions.values() {
            a.pre.collect_atoms(&mut out);
            out.extend(a.adds.iter().cloned());
            out.extend(a.dels.iter().cloned());
        }
        for p in &self.plans {
            p.context.collect_atoms(&mut out);
            let mut goals = Vec::new();
            collect_goal_formulas(&p.body, &mut goals);
            for f in goals {
                f.collect_atoms(&mut out);
            }
        }
        out
    }

    /// Every identifier declared by external events and motivation rules.
    pub fn identifiers(&self) -> Vec<&Identifier> {
        self.external_events
            .iter()
            .map(|e| &e.identifier)
            .chain(self.motivations.iter().map(|m| &m.identifier))
            .collect()
    }

    /// Checks the invariants a program must satisfy before it is executed.
    pub fn validate(&self) -> Result<(), ValidationError> {
        validate::validate(self)
    }
}

fn collect_goal_formulas<'a>(body: &'a BodyExpr, out: &mut Vec<&'a BeliefFormula>) {
    match body {
        BodyExpr::Goal {
            success, failure, ..
        } => {
            out.push(success);
            out.push(failure);
        }
        BodyExpr::Seq(l, r) | BodyExpr::Par(l, r) => {
            collect_goal_formulas(l, out);
            collect_goal_formulas(r, out);
        }
        _ => {}
    }
}

/// Either half of loading a program can fail.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl AgentError {
    /// `file:line:col: message` for parse errors, `file: message` otherwise.
    pub fn render(&self, file: &str) -> String {
        match self {
            AgentError::Parse(e) => e.render(file),
            AgentError::Validation(e) => format!("{file}: {e}"),
        }
    }
}

/// Parses and validates an agent program.
pub fn parse_program(source: &str) -> Result<CompiledAgent, AgentError> {
    let agent = parser::parse(source)?;
    agent.validate()?;
    Ok(agent)
}

/// Parses without running validation. Useful for diagnostics tooling.
pub fn parse_unvalidated(source: &str) -> Result<CompiledAgent, AgentError> {
    parser::parse(source)
}

/// Parses a standalone belief formula such as `~a & (b | c)`.
pub fn parse_formula(source: &str) -> Result<BeliefFormula, ParseError> {
    parser::parse_formula(source)
}

impl fmt::Display for CompiledAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

#[cfg(test)]
mod tests;

//! State predicates used to label explored configurations.
//!
//! Concrete syntax, one per line in a predicates file:
//!
//! ```text
//! status(identifier1)=success
//! completed(identifier1)
//! blocked(identifier1)
//! progressing(identifier1)
//! believes(parked & ~flying)
//! desires(e_parked)
//! progress(identifier1)>=3/4
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::belief::BeliefFormula;
use crate::lang::{parse_formula, CompiledAgent};
use crate::names::{EventName, Identifier};
use crate::progress::{estimate_progress, format_fraction, parse_fraction, Fraction, TraceTable};
use crate::semantics::{intention_step, is_blocked, AgentConfig, Status};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    EventStatus(Identifier, Status),
    /// The intention is still in Γ with an empty body.
    IntentionCompleted(Identifier),
    /// The intention is still in Γ, not empty, and no intention rule applies.
    IntentionBlocked(Identifier),
    /// The intention can take an intention-level step.
    IntentionProgressing(Identifier),
    BeliefHolds(BeliefFormula),
    /// Some event record for this event exists, whatever its status.
    DesireContains(EventName),
    ProgressAtLeast(Identifier, Fraction),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad predicate `{text}`: {reason}")]
pub struct PredicateError {
    pub text: String,
    pub reason: String,
}

fn bad(text: &str, reason: impl Into<String>) -> PredicateError {
    PredicateError {
        text: text.to_owned(),
        reason: reason.into(),
    }
}

/// Splits `name(arg)rest` into its three parts. The argument may itself
/// contain balanced parentheses.
fn call(text: &str) -> Option<(&str, &str, &str)> {
    let open = text.find('(')?;
    let mut depth = 0usize;
    for (i, c) in text[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let close = open + i;
                    return Some((
                        text[..open].trim(),
                        text[open + 1..close].trim(),
                        text[close + 1..].trim(),
                    ));
                }
            }
            _ => {}
        }
    }
    None
}

fn identifier(text: &str, arg: &str) -> Result<Identifier, PredicateError> {
    if crate::names::is_identifier(arg) {
        Ok(Identifier::from(arg))
    } else {
        Err(bad(text, format!("`{arg}` is not an identifier")))
    }
}

impl FromStr for Predicate {
    type Err = PredicateError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let (name, arg, rest) = call(text).ok_or_else(|| bad(text, "expected `name(argument)`"))?;
        let no_rest = |p: Predicate| {
            if rest.is_empty() {
                Ok(p)
            } else {
                Err(bad(text, format!("unexpected `{rest}`")))
            }
        };
        match name {
            "status" => {
                let value = rest
                    .strip_prefix('=')
                    .ok_or_else(|| bad(text, "expected `=status`"))?
                    .trim();
                let status = Status::parse(value)
                    .ok_or_else(|| bad(text, format!("unknown status `{value}`")))?;
                Ok(Predicate::EventStatus(identifier(text, arg)?, status))
            }
            "completed" => no_rest(Predicate::IntentionCompleted(identifier(text, arg)?)),
            "blocked" => no_rest(Predicate::IntentionBlocked(identifier(text, arg)?)),
            "progressing" => no_rest(Predicate::IntentionProgressing(identifier(text, arg)?)),
            "desires" => {
                let e = identifier(text, arg)?;
                no_rest(Predicate::DesireContains(EventName::from(e.as_str())))
            }
            "believes" => {
                let f = parse_formula(arg).map_err(|e| bad(text, e.to_string()))?;
                no_rest(Predicate::BeliefHolds(f))
            }
            "progress" => {
                let value = rest
                    .strip_prefix(">=")
                    .ok_or_else(|| bad(text, "expected `>=fraction`"))?;
                let q = parse_fraction(value)
                    .ok_or_else(|| bad(text, format!("bad fraction `{}`", value.trim())))?;
                Ok(Predicate::ProgressAtLeast(identifier(text, arg)?, q))
            }
            other => Err(bad(text, format!("unknown predicate `{other}`"))),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::EventStatus(i, s) => write!(f, "status({i})={s}"),
            Predicate::IntentionCompleted(i) => write!(f, "completed({i})"),
            Predicate::IntentionBlocked(i) => write!(f, "blocked({i})"),
            Predicate::IntentionProgressing(i) => write!(f, "progressing({i})"),
            Predicate::BeliefHolds(b) => write!(f, "believes({b})"),
            Predicate::DesireContains(e) => write!(f, "desires({e})"),
            Predicate::ProgressAtLeast(i, q) => write!(f, "progress({i})>={}", format_fraction(q)),
        }
    }
}

/// Parses a predicates file: one predicate per line, blank lines and `//`
/// comments ignored. Errors carry the 1-based line number.
pub fn parse_predicates(source: &str) -> Result<Vec<Predicate>, (usize, PredicateError)> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        out.push(line.parse().map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

impl Predicate {
    pub fn eval(&self, cfg: &AgentConfig, agent: &CompiledAgent, traces: &TraceTable) -> bool {
        match self {
            Predicate::EventStatus(id, s) => cfg.status(id.as_str()) == Some(*s),
            Predicate::IntentionCompleted(id) => cfg
                .intentions
                .get(id)
                .is_some_and(|i| i.body.is_nil()),
            Predicate::IntentionBlocked(id) => cfg
                .intentions
                .get(id)
                .is_some_and(|i| !i.body.is_nil() && is_blocked(agent, &cfg.beliefs, &i.body)),
            Predicate::IntentionProgressing(id) => cfg
                .intentions
                .get(id)
                .is_some_and(|i| !intention_step(agent, &cfg.beliefs, &i.body).is_empty()),
            Predicate::BeliefHolds(f) => cfg.beliefs.entails(f),
            Predicate::DesireContains(e) => cfg.events.values().any(|r| &r.event == e),
            Predicate::ProgressAtLeast(id, q) => cfg
                .intentions
                .get(id)
                .and_then(|i| estimate_progress(&i.trace, traces).ok())
                .is_some_and(|p| p.ratio >= *q),
        }
    }
}

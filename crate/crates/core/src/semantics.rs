//! Small-step operational semantics.
//!
//! Two layers: [`intention_step`] rewrites a single plan body against the
//! belief base, and [`agent_step`] rewrites a whole [`AgentConfig`]. The
//! agent level comes in two rule sets. [`RuleSet::Transparent`] keeps every
//! event in `E^e` with a lifecycle status, records success and failure of
//! intentions, and fires motivation rules. [`RuleSet::Legacy`] is the
//! original behaviour: adopted events disappear and finished or blocked
//! intentions are dropped without trace.
//!
//! All applicable rule instances are returned as alternatives, in a fixed
//! canonical order (rule family first, then identifier).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefBase, BeliefFormula};
use crate::lang::{BodyExpr, CompiledAgent};
use crate::names::{ActionName, EventName, Identifier};
use crate::progress::{leaf_label, plan_label, CurrentTrace, TraceStep};

/// Runtime plan body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlanBody {
    Nil,
    Act {
        action: ActionName,
        site: String,
    },
    /// `!e`: post a sub-event (or the root event of a fresh intention).
    Event {
        event: EventName,
        site: String,
    },
    Seq(Box<PlanBody>, Box<PlanBody>),
    Par(Box<PlanBody>, Box<PlanBody>),
    Goal {
        success: BeliefFormula,
        inner: Box<PlanBody>,
        failure: BeliefFormula,
    },
    /// Plans for `event` not yet tried, as indices into the plan library.
    SelectSet {
        event: EventName,
        site: String,
        remaining: Vec<usize>,
    },
    /// Run the first body; if it blocks, continue with the second.
    Recover(Box<PlanBody>, Box<PlanBody>),
}

impl PlanBody {
    pub fn is_nil(&self) -> bool {
        matches!(self, PlanBody::Nil)
    }

    /// A fresh intention body for a root event.
    pub fn root_event(event: &EventName) -> Self {
        PlanBody::Event {
            event: event.clone(),
            site: event.as_str().to_owned(),
        }
    }

    /// Trace label of the event this body falls back to on recovery.
    fn recovery_site(&self) -> Option<&str> {
        match self {
            PlanBody::SelectSet { site, .. } | PlanBody::Event { site, .. } => Some(site),
            _ => None,
        }
    }

    fn seq(a: PlanBody, b: PlanBody) -> Self {
        PlanBody::Seq(Box::new(a), Box::new(b))
    }

    fn par(a: PlanBody, b: PlanBody) -> Self {
        PlanBody::Par(Box::new(a), Box::new(b))
    }

    fn recover(a: PlanBody, b: PlanBody) -> Self {
        PlanBody::Recover(Box::new(a), Box::new(b))
    }

    fn goal(success: &BeliefFormula, inner: PlanBody, failure: &BeliefFormula) -> Self {
        PlanBody::Goal {
            success: success.clone(),
            inner: Box::new(inner),
            failure: failure.clone(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PlanBody::Recover(..) => 1,
            PlanBody::Par(..) => 2,
            PlanBody::Seq(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(child: &PlanBody, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }

    /// Injective rendering that includes trace sites; used for state identity.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        match self {
            PlanBody::Nil => out.push_str("nil"),
            PlanBody::Act { action, site } => {
                out.push_str(&format!("(act {action} {site})"));
            }
            PlanBody::Event { event, site } => {
                out.push_str(&format!("(post {event} {site})"));
            }
            PlanBody::Seq(a, b) | PlanBody::Par(a, b) | PlanBody::Recover(a, b) => {
                out.push_str(match self {
                    PlanBody::Seq(..) => "(seq ",
                    PlanBody::Par(..) => "(par ",
                    _ => "(rec ",
                });
                a.write_canonical(out);
                out.push(' ');
                b.write_canonical(out);
                out.push(')');
            }
            PlanBody::Goal {
                success,
                inner,
                failure,
            } => {
                out.push_str(&format!("(goal [{success}] "));
                inner.write_canonical(out);
                out.push_str(&format!(" [{failure}])"));
            }
            PlanBody::SelectSet {
                event,
                site,
                remaining,
            } => {
                out.push_str(&format!("(sel {event} {site}"));
                for r in remaining {
                    out.push_str(&format!(" {r}"));
                }
                out.push(')');
            }
        }
    }
}

/// Readable form. Recovery is written `p >> q`; a selection point as
/// `e:{1,3}` listing the library indices of the untried plans.
impl fmt::Display for PlanBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanBody::Nil => f.write_str("nil"),
            PlanBody::Act { action, .. } => write!(f, "{action}"),
            PlanBody::Event { event, .. } => write!(f, "!{event}"),
            PlanBody::Seq(a, b) => {
                Self::fmt_child(a, 4, f)?;
                f.write_str("; ")?;
                Self::fmt_child(b, 3, f)
            }
            PlanBody::Par(a, b) => {
                Self::fmt_child(a, 3, f)?;
                f.write_str(" || ")?;
                Self::fmt_child(b, 2, f)
            }
            PlanBody::Recover(a, b) => {
                Self::fmt_child(a, 2, f)?;
                f.write_str(" >> ")?;
                Self::fmt_child(b, 1, f)
            }
            PlanBody::Goal {
                success,
                inner,
                failure,
            } => write!(f, "goal({success}, {inner}, {failure})"),
            PlanBody::SelectSet {
                event, remaining, ..
            } => {
                let list: Vec<String> = remaining.iter().map(|r| r.to_string()).collect();
                write!(f, "{event}:{{{}}}", list.join(","))
            }
        }
    }
}

/// Builds the runtime body for plan `index`, labelling each leaf with its trace site.
pub fn instantiate_plan(agent: &CompiledAgent, index: usize, plan_site: &str) -> PlanBody {
    let mut position = 0;
    instantiate(&agent.plans[index].body, plan_site, &mut position)
}

fn instantiate(body: &BodyExpr, plan_site: &str, position: &mut usize) -> PlanBody {
    match body {
        BodyExpr::Nil => PlanBody::Nil,
        BodyExpr::Act(a) => {
            *position += 1;
            PlanBody::Act {
                action: a.clone(),
                site: leaf_label(plan_site, a.as_str(), *position),
            }
        }
        BodyExpr::Post(e) => {
            *position += 1;
            PlanBody::Event {
                event: e.clone(),
                site: leaf_label(plan_site, e.as_str(), *position),
            }
        }
        BodyExpr::Goal {
            success,
            event,
            failure,
        } => {
            *position += 1;
            let post = PlanBody::Event {
                event: event.clone(),
                site: leaf_label(plan_site, event.as_str(), *position),
            };
            PlanBody::goal(success, post, failure)
        }
        BodyExpr::Seq(l, r) => {
            let l = instantiate(l, plan_site, position);
            PlanBody::seq(l, instantiate(r, plan_site, position))
        }
        BodyExpr::Par(l, r) => {
            let l = instantiate(l, plan_site, position);
            PlanBody::par(l, instantiate(r, plan_site, position))
        }
    }
}

/// Which intention-level rule produced a step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntentionRule {
    Act(ActionName),
    Event(EventName),
    /// `plan` is the 1-based ordinal among the event's plans.
    Select { event: EventName, plan: usize },
    SeqDone,
    ParDone,
    RecoverDone,
    RecoverFail,
    GoalSuccess,
    GoalInit,
    GoalRestart,
}

impl fmt::Display for IntentionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntentionRule::Act(a) => write!(f, "act({a})"),
            IntentionRule::Event(e) => write!(f, "event({e})"),
            IntentionRule::Select { event, plan } => write!(f, "select({event}.P{plan})"),
            IntentionRule::SeqDone => f.write_str("seq-done"),
            IntentionRule::ParDone => f.write_str("par-done"),
            IntentionRule::RecoverDone => f.write_str("recover-done"),
            IntentionRule::RecoverFail => f.write_str("recover-fail"),
            IntentionRule::GoalSuccess => f.write_str("goal-success"),
            IntentionRule::GoalInit => f.write_str("goal-init"),
            IntentionRule::GoalRestart => f.write_str("goal-restart"),
        }
    }
}

/// One successor of a basic configuration `⟨B, P⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentionMove {
    pub beliefs: BeliefBase,
    pub body: PlanBody,
    pub rule: IntentionRule,
    pub trace: Option<TraceStep>,
}

impl IntentionMove {
    fn silent(beliefs: &BeliefBase, body: PlanBody, rule: IntentionRule) -> Self {
        IntentionMove {
            beliefs: beliefs.clone(),
            body,
            rule,
            trace: None,
        }
    }

    fn map_body(self, f: impl FnOnce(PlanBody) -> PlanBody) -> Self {
        IntentionMove {
            body: f(self.body),
            ..self
        }
    }
}

/// Every successor of `⟨beliefs, body⟩` reachable by one rule application.
pub fn intention_step(agent: &CompiledAgent, beliefs: &BeliefBase, body: &PlanBody) -> Vec<IntentionMove> {
    match body {
        PlanBody::Nil => Vec::new(),
        PlanBody::Act { action, site } => {
            let Some(decl) = agent.action(action.as_str()) else {
                return Vec::new();
            };
            if !beliefs.entails(&decl.pre) {
                return Vec::new();
            }
            vec![IntentionMove {
                beliefs: beliefs.update(&decl.adds, &decl.dels),
                body: PlanBody::Nil,
                rule: IntentionRule::Act(action.clone()),
                trace: Some(TraceStep::Action(site.clone())),
            }]
        }
        PlanBody::Event { event, site } => vec![IntentionMove {
            beliefs: beliefs.clone(),
            body: PlanBody::SelectSet {
                event: event.clone(),
                site: site.clone(),
                remaining: agent.plans_for(event.as_str()).collect(),
            },
            rule: IntentionRule::Event(event.clone()),
            trace: Some(TraceStep::Event(site.clone())),
        }],
        PlanBody::SelectSet {
            event,
            site,
            remaining,
        } => remaining
            .iter()
            .filter(|&&idx| beliefs.entails(&agent.plans[idx].context))
            .map(|&idx| {
                let ordinal = agent.plan_ordinal(idx);
                let plan_site = plan_label(site, ordinal);
                let rest = PlanBody::SelectSet {
                    event: event.clone(),
                    site: site.clone(),
                    remaining: remaining.iter().copied().filter(|&r| r != idx).collect(),
                };
                IntentionMove {
                    beliefs: beliefs.clone(),
                    body: PlanBody::recover(instantiate_plan(agent, idx, &plan_site), rest),
                    rule: IntentionRule::Select {
                        event: event.clone(),
                        plan: ordinal,
                    },
                    trace: Some(TraceStep::Plan {
                        event: site.clone(),
                        plan: plan_site,
                    }),
                }
            })
            .collect(),
        PlanBody::Seq(first, second) => {
            if first.is_nil() {
                return vec![IntentionMove::silent(
                    beliefs,
                    (**second).clone(),
                    IntentionRule::SeqDone,
                )];
            }
            intention_step(agent, beliefs, first)
                .into_iter()
                .map(|m| m.map_body(|b| PlanBody::seq(b, (**second).clone())))
                .collect()
        }
        PlanBody::Par(left, right) => {
            if left.is_nil() && right.is_nil() {
                return vec![IntentionMove::silent(beliefs, PlanBody::Nil, IntentionRule::ParDone)];
            }
            let mut out: Vec<IntentionMove> = intention_step(agent, beliefs, left)
                .into_iter()
                .map(|m| m.map_body(|b| PlanBody::par(b, (**right).clone())))
                .collect();
            out.extend(
                intention_step(agent, beliefs, right)
                    .into_iter()
                    .map(|m| m.map_body(|b| PlanBody::par((**left).clone(), b))),
            );
            out
        }
        PlanBody::Recover(first, fallback) => {
            if first.is_nil() {
                return vec![IntentionMove::silent(
                    beliefs,
                    PlanBody::Nil,
                    IntentionRule::RecoverDone,
                )];
            }
            let moves: Vec<IntentionMove> = intention_step(agent, beliefs, first)
                .into_iter()
                .map(|m| m.map_body(|b| PlanBody::recover(b, (**fallback).clone())))
                .collect();
            if !moves.is_empty() {
                return moves;
            }
            vec![IntentionMove {
                beliefs: beliefs.clone(),
                body: (**fallback).clone(),
                rule: IntentionRule::RecoverFail,
                trace: fallback
                    .recovery_site()
                    .map(|s| TraceStep::Backtrack(s.to_owned())),
            }]
        }
        PlanBody::Goal {
            success,
            inner,
            failure,
        } => {
            if beliefs.entails(success) {
                return vec![IntentionMove::silent(
                    beliefs,
                    PlanBody::Nil,
                    IntentionRule::GoalSuccess,
                )];
            }
            if beliefs.entails(failure) {
                return Vec::new();
            }
            match &**inner {
                PlanBody::Event { .. } => vec![IntentionMove::silent(
                    beliefs,
                    PlanBody::goal(success, PlanBody::recover((**inner).clone(), (**inner).clone()), failure),
                    IntentionRule::GoalInit,
                )],
                PlanBody::Recover(current, original) if current.is_nil() => vec![IntentionMove {
                    beliefs: beliefs.clone(),
                    body: PlanBody::goal(
                        success,
                        PlanBody::recover((**original).clone(), (**original).clone()),
                        failure,
                    ),
                    rule: IntentionRule::GoalRestart,
                    trace: original
                        .recovery_site()
                        .map(|s| TraceStep::Backtrack(s.to_owned())),
                }],
                other => intention_step(agent, beliefs, other)
                    .into_iter()
                    .map(|m| m.map_body(|b| PlanBody::goal(success, b, failure)))
                    .collect(),
            }
        }
    }
}

/// True when no intention-level rule applies. Agrees with
/// `intention_step(..).is_empty()` without building successors.
pub fn is_blocked(agent: &CompiledAgent, beliefs: &BeliefBase, body: &PlanBody) -> bool {
    !can_step(agent, beliefs, body)
}

fn can_step(agent: &CompiledAgent, beliefs: &BeliefBase, body: &PlanBody) -> bool {
    match body {
        PlanBody::Nil => false,
        PlanBody::Act { action, .. } => agent
            .action(action.as_str())
            .is_some_and(|d| beliefs.entails(&d.pre)),
        PlanBody::Event { .. } => true,
        PlanBody::SelectSet { remaining, .. } => remaining
            .iter()
            .any(|&idx| beliefs.entails(&agent.plans[idx].context)),
        PlanBody::Seq(first, _) => first.is_nil() || can_step(agent, beliefs, first),
        PlanBody::Par(l, r) => {
            (l.is_nil() && r.is_nil()) || can_step(agent, beliefs, l) || can_step(agent, beliefs, r)
        }
        // Either the first part steps, completes, or the fallback takes over.
        PlanBody::Recover(..) => true,
        PlanBody::Goal {
            success,
            inner,
            failure,
        } => {
            if beliefs.entails(success) {
                true
            } else if beliefs.entails(failure) {
                false
            } else {
                match &**inner {
                    PlanBody::Event { .. } => true,
                    PlanBody::Recover(current, _) if current.is_nil() => true,
                    other => can_step(agent, beliefs, other),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Active,
    Success,
    Failure,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        matches!(self, Status::Success | Status::Failure)
    }

    /// Allowed lifecycle moves: pending→active→{success, failure}.
    pub fn may_become(self, next: Status) -> bool {
        self == next
            || matches!(
                (self, next),
                (Status::Pending, Status::Active)
                    | (Status::Active, Status::Success)
                    | (Status::Active, Status::Failure)
            )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pending => "pending",
            Status::Active => "active",
            Status::Success => "success",
            Status::Failure => "failure",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "pending" => Some(Status::Pending),
            "active" => Some(Status::Active),
            "success" => Some(Status::Success),
            "failure" => Some(Status::Failure),
            _ => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventRecord {
    pub event: EventName,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Intention {
    pub body: PlanBody,
    pub trace: CurrentTrace,
}

impl Intention {
    fn adopt(event: &EventName) -> Self {
        let mut trace = CurrentTrace::new();
        trace.apply(&TraceStep::Event(event.as_str().to_owned()));
        Intention {
            body: PlanBody::root_event(event),
            trace,
        }
    }
}

/// `⟨E^e, B, Γ⟩` plus the set of motivation identifiers already fired.
/// Records and intentions are keyed by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentConfig {
    pub events: BTreeMap<Identifier, EventRecord>,
    pub beliefs: BeliefBase,
    pub intentions: BTreeMap<Identifier, Intention>,
    pub fired_motivations: BTreeSet<Identifier>,
}

impl AgentConfig {
    /// External events pending, initial beliefs, no intentions.
    pub fn initial(agent: &CompiledAgent) -> Self {
        AgentConfig {
            events: agent
                .external_events
                .iter()
                .map(|e| {
                    (
                        e.identifier.clone(),
                        EventRecord {
                            event: e.event.clone(),
                            status: Status::Pending,
                        },
                    )
                })
                .collect(),
            beliefs: agent.initial_beliefs.iter().cloned().collect(),
            intentions: BTreeMap::new(),
            fired_motivations: BTreeSet::new(),
        }
    }

    pub fn status(&self, id: &str) -> Option<Status> {
        self.events.get(id).map(|r| r.status)
    }

    /// Checks the structural invariants the transparent rules maintain.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        for id in self.intentions.keys() {
            match self.events.get(id) {
                Some(r) if r.status == Status::Active => {}
                Some(r) => {
                    return Err(InvariantViolation::IntentionNotActive {
                        identifier: id.clone(),
                        status: r.status,
                    })
                }
                None => return Err(InvariantViolation::OrphanIntention(id.clone())),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("intention `{0}` has no event record")]
    OrphanIntention(Identifier),
    #[error("intention `{identifier}` is progressed while its event is {status}")]
    IntentionNotActive { identifier: Identifier, status: Status },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleSet {
    /// Status-tracking rules plus motivation rules.
    #[default]
    Transparent,
    /// The original rules: adoption deletes the event, blocked intentions vanish.
    Legacy,
}

/// Agent-level rule instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentRule {
    Event(Identifier),
    Motive(Identifier),
    Step { identifier: Identifier, rule: IntentionRule },
    UpdateSuccess(Identifier),
    UpdateFailure(Identifier),
    LegacyEvent(Identifier),
    LegacyUpdate(Identifier),
}

impl AgentRule {
    pub fn identifier(&self) -> &Identifier {
        match self {
            AgentRule::Event(i)
            | AgentRule::Motive(i)
            | AgentRule::Step { identifier: i, .. }
            | AgentRule::UpdateSuccess(i)
            | AgentRule::UpdateFailure(i)
            | AgentRule::LegacyEvent(i)
            | AgentRule::LegacyUpdate(i) => i,
        }
    }
}

impl fmt::Display for AgentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentRule::Event(i) => write!(f, "A_event[{i}]"),
            AgentRule::Motive(i) => write!(f, "A_motive[{i}]"),
            AgentRule::Step { identifier, rule } => write!(f, "A_step[{identifier}] {rule}"),
            AgentRule::UpdateSuccess(i) => write!(f, "A_update_suc[{i}]"),
            AgentRule::UpdateFailure(i) => write!(f, "A_update_fail[{i}]"),
            AgentRule::LegacyEvent(i) => write!(f, "A_event_legacy[{i}]"),
            AgentRule::LegacyUpdate(i) => write!(f, "A_update_legacy[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub rule: AgentRule,
    pub target: AgentConfig,
}

/// Successors under the transparent rules.
pub fn agent_step(cfg: &AgentConfig, agent: &CompiledAgent) -> Result<Vec<Transition>, InvariantViolation> {
    successors(cfg, agent, RuleSet::Transparent)
}

/// Successors under the original rules.
pub fn agent_step_legacy(cfg: &AgentConfig, agent: &CompiledAgent) -> Result<Vec<Transition>, InvariantViolation> {
    successors(cfg, agent, RuleSet::Legacy)
}

pub fn successors(
    cfg: &AgentConfig,
    agent: &CompiledAgent,
    rules: RuleSet,
) -> Result<Vec<Transition>, InvariantViolation> {
    if rules == RuleSet::Transparent {
        cfg.check_invariants()?;
    }
    let mut out = Vec::new();

    // Event adoption.
    for (id, record) in &cfg.events {
        if record.status != Status::Pending {
            continue;
        }
        let mut next = cfg.clone();
        match rules {
            RuleSet::Transparent => {
                next.events.get_mut(id).expect("present").status = Status::Active;
            }
            RuleSet::Legacy => {
                next.events.remove(id);
            }
        }
        next.intentions.insert(id.clone(), Intention::adopt(&record.event));
        out.push(Transition {
            rule: match rules {
                RuleSet::Transparent => AgentRule::Event(id.clone()),
                RuleSet::Legacy => AgentRule::LegacyEvent(id.clone()),
            },
            target: next,
        });
    }

    // Motivation rules fire at most once per identifier.
    if rules == RuleSet::Transparent {
        let mut motives: Vec<_> = agent
            .motivations
            .iter()
            .filter(|m| {
                !cfg.fired_motivations.contains(&m.identifier)
                    && !cfg.events.contains_key(&m.identifier)
                    && !cfg.intentions.contains_key(&m.identifier)
                    && cfg.beliefs.entails(&m.condition)
            })
            .collect();
        motives.sort_by(|a, b| a.identifier.cmp(&b.identifier));
        motives.dedup_by(|a, b| a.identifier == b.identifier);
        for m in motives {
            let mut next = cfg.clone();
            next.events.insert(
                m.identifier.clone(),
                EventRecord {
                    event: m.event.clone(),
                    status: Status::Active,
                },
            );
            next.intentions.insert(m.identifier.clone(), Intention::adopt(&m.event));
            next.fired_motivations.insert(m.identifier.clone());
            out.push(Transition {
                rule: AgentRule::Motive(m.identifier.clone()),
                target: next,
            });
        }
    }

    // Intention steps.
    for (id, intention) in &cfg.intentions {
        for mv in intention_step(agent, &cfg.beliefs, &intention.body) {
            let mut next = cfg.clone();
            next.beliefs = mv.beliefs;
            let slot = next.intentions.get_mut(id).expect("present");
            slot.body = mv.body;
            if let Some(step) = &mv.trace {
                slot.trace.apply(step);
            }
            out.push(Transition {
                rule: AgentRule::Step {
                    identifier: id.clone(),
                    rule: mv.rule,
                },
                target: next,
            });
        }
    }

    // Removal of finished or blocked intentions.
    let mut failures = Vec::new();
    for (id, intention) in &cfg.intentions {
        if !is_blocked(agent, &cfg.beliefs, &intention.body) {
            continue;
        }
        let mut next = cfg.clone();
        next.intentions.remove(id);
        match rules {
            RuleSet::Legacy => out.push(Transition {
                rule: AgentRule::LegacyUpdate(id.clone()),
                target: next,
            }),
            RuleSet::Transparent => {
                let done = intention.body.is_nil();
                next.events.get_mut(id).expect("checked").status =
                    if done { Status::Success } else { Status::Failure };
                let t = Transition {
                    rule: if done {
                        AgentRule::UpdateSuccess(id.clone())
                    } else {
                        AgentRule::UpdateFailure(id.clone())
                    },
                    target: next,
                };
                if done {
                    out.push(t);
                } else {
                    failures.push(t);
                }
            }
        }
    }
    out.extend(failures);
    Ok(out)
}

//! Execution traces over the goal-plan tree and per-intention progress estimates.
//!
//! Every node of the goal-plan tree gets a path-qualified label so that the same
//! action used in two places counts as two different trace elements:
//!
//! * root event: `e1`
//! * plan: `<event label>.P<k>`, `k` the 1-based position among the event's plans
//! * body leaf (action, posted event, goal event): `<plan label>.<name>#<j>`,
//!   `j` the 1-based position of the leaf in the plan body, left to right
//!
//! A full trace is one root-to-leaf path with sub-events expanded inline.
//! Progress is `k / n` where `k` is the number of elements in the current trace
//! and `n` the length of the longest full trace still consistent with it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{BodyExpr, CompiledAgent};
use crate::names::EventName;

pub type Fraction = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Event,
    Plan,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceElement {
    pub kind: ElementKind,
    pub label: String,
}

impl TraceElement {
    pub fn event(label: impl Into<String>) -> Self {
        TraceElement {
            kind: ElementKind::Event,
            label: label.into(),
        }
    }

    pub fn plan(label: impl Into<String>) -> Self {
        TraceElement {
            kind: ElementKind::Plan,
            label: label.into(),
        }
    }

    pub fn action(label: impl Into<String>) -> Self {
        TraceElement {
            kind: ElementKind::Action,
            label: label.into(),
        }
    }
}

pub fn plan_label(event_label: &str, ordinal: usize) -> String {
    format!("{event_label}.P{ordinal}")
}

pub fn leaf_label(plan_label: &str, name: &str, position: usize) -> String {
    format!("{plan_label}.{name}#{position}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullTrace {
    elements: Vec<TraceElement>,
    labels: BTreeSet<String>,
}

impl FullTrace {
    pub fn new(elements: Vec<TraceElement>) -> Self {
        let labels = elements.iter().map(|e| e.label.clone()).collect();
        FullTrace { elements, labels }
    }

    pub fn elements(&self) -> &[TraceElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Every element of `current` occurs in this trace.
    fn covers(&self, current: &[TraceElement]) -> bool {
        current.iter().all(|e| self.labels.contains(&e.label))
    }
}

impl fmt::Display for FullTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(&self.elements, f)
    }
}

fn write_joined(elements: &[TraceElement], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, e) in elements.iter().enumerate() {
        if i > 0 {
            f.write_str(";")?;
        }
        f.write_str(&e.label)?;
    }
    Ok(())
}

/// All full traces for every event the agent can handle, keyed by root event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceTable {
    traces: BTreeMap<EventName, Vec<FullTrace>>,
}

impl TraceTable {
    pub fn traces(&self, event: &str) -> &[FullTrace] {
        self.traces.get(event).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn events(&self) -> impl Iterator<Item = &EventName> {
        self.traces.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EventName, &[FullTrace])> {
        self.traces.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// One trace per line: elements joined with `;`, then a space and the length.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for traces in self.traces.values() {
            for t in traces {
                out.push_str(&format!("{t} {}\n", t.len()));
            }
        }
        out
    }
}

/// Enumerates every execution trace of every event. The agent must be free of
/// recursive plans.
pub fn compile_traces(agent: &CompiledAgent) -> TraceTable {
    let mut traces = BTreeMap::new();
    for event in agent.event_names() {
        let paths = expand_event(agent, event.as_str(), event.as_str());
        traces.insert(event, paths.into_iter().map(FullTrace::new).collect());
    }
    TraceTable { traces }
}

fn expand_event(agent: &CompiledAgent, label: &str, event: &str) -> Vec<Vec<TraceElement>> {
    let plans: Vec<usize> = agent.plans_for(event).collect();
    if plans.is_empty() {
        return vec![vec![TraceElement::event(label)]];
    }
    let mut out = Vec::new();
    for (k, idx) in plans.into_iter().enumerate() {
        let plan = plan_label(label, k + 1);
        let mut position = 0;
        for tail in expand_body(agent, &agent.plans[idx].body, &plan, &mut position) {
            let mut path = vec![TraceElement::event(label), TraceElement::plan(&plan)];
            path.extend(tail);
            out.push(path);
        }
    }
    out
}

fn expand_body(
    agent: &CompiledAgent,
    body: &BodyExpr,
    plan: &str,
    position: &mut usize,
) -> Vec<Vec<TraceElement>> {
    match body {
        BodyExpr::Nil => vec![Vec::new()],
        BodyExpr::Act(a) => {
            *position += 1;
            vec![vec![TraceElement::action(leaf_label(plan, a.as_str(), *position))]]
        }
        BodyExpr::Post(e) | BodyExpr::Goal { event: e, .. } => {
            *position += 1;
            let label = leaf_label(plan, e.as_str(), *position);
            expand_event(agent, &label, e.as_str())
        }
        BodyExpr::Seq(l, r) | BodyExpr::Par(l, r) => {
            let left = expand_body(agent, l, plan, position);
            let right = expand_body(agent, r, plan, position);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for a in &left {
                for b in &right {
                    let mut path = a.clone();
                    path.extend(b.iter().cloned());
                    out.push(path);
                }
            }
            out
        }
    }
}

/// Trace bookkeeping emitted by the intention-level rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TraceStep {
    /// An event is posted or re-posted at `label`. Re-entry truncates back to it.
    Event(String),
    /// A plan is selected for the event at `event`.
    Plan { event: String, plan: String },
    /// An action completed.
    Action(String),
    /// Failure recovery or goal restart: fall back to the event at `label`.
    Backtrack(String),
}

/// The trace an intention has followed so far.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurrentTrace {
    elements: Vec<TraceElement>,
}

impl CurrentTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_elements(elements: Vec<TraceElement>) -> Self {
        CurrentTrace { elements }
    }

    pub fn elements(&self) -> &[TraceElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Root event of the trace.
    pub fn root(&self) -> Option<&str> {
        self.elements.first().map(|e| e.label.as_str())
    }

    fn truncate_after(&mut self, label: &str) -> bool {
        match self.elements.iter().rposition(|e| e.label == label) {
            Some(i) => {
                self.elements.truncate(i + 1);
                true
            }
            None => false,
        }
    }

    /// Applies a step without checking it against a trace table.
    pub fn apply(&mut self, step: &TraceStep) {
        match step {
            TraceStep::Event(label) => {
                if !self.truncate_after(label) {
                    self.elements.push(TraceElement::event(label.clone()));
                }
            }
            TraceStep::Plan { event, plan } => {
                self.truncate_after(event);
                self.elements.push(TraceElement::plan(plan.clone()));
            }
            TraceStep::Action(label) => self.elements.push(TraceElement::action(label.clone())),
            TraceStep::Backtrack(label) => {
                self.truncate_after(label);
            }
        }
    }

    /// Full traces consistent with this one.
    pub fn matching<'a>(&'a self, table: &'a TraceTable) -> impl Iterator<Item = &'a FullTrace> + 'a {
        let root = self.root().unwrap_or("");
        table
            .traces(root)
            .iter()
            .filter(move |t| t.covers(&self.elements))
    }
}

impl fmt::Display for CurrentTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(&self.elements, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgressError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("no full trace matches `{0}`")]
    NoMatchingTrace(String),
    #[error("trace `{0}` no longer matches any full trace")]
    TraceDesync(String),
}

/// Applies `step` and checks the result is still consistent with `table`.
pub fn update_trace(
    trace: &CurrentTrace,
    step: &TraceStep,
    table: &TraceTable,
) -> Result<CurrentTrace, ProgressError> {
    let mut next = trace.clone();
    next.apply(step);
    if next.matching(table).next().is_none() {
        return Err(ProgressError::TraceDesync(next.to_string()));
    }
    Ok(next)
}

/// Progress of one intention. `ratio` is measured against the longest matching
/// trace, so it equals `min_ratio`; `max_ratio` uses the shortest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub ratio: Fraction,
    pub min_ratio: Fraction,
    pub max_ratio: Fraction,
}

pub fn estimate_progress(trace: &CurrentTrace, table: &TraceTable) -> Result<Progress, ProgressError> {
    if trace.is_empty() {
        return Err(ProgressError::EmptyTrace);
    }
    let (mut shortest, mut longest) = (usize::MAX, 0);
    for t in trace.matching(table) {
        shortest = shortest.min(t.len());
        longest = longest.max(t.len());
    }
    if longest == 0 {
        return Err(ProgressError::NoMatchingTrace(trace.to_string()));
    }
    let k = trace.len() as u64;
    let low = Fraction::new(k, longest as u64);
    Ok(Progress {
        ratio: low,
        min_ratio: low,
        max_ratio: Fraction::new(k, shortest as u64),
    })
}

/// `3/4` style rendering; whole numbers print without a denominator.
pub fn format_fraction(f: &Fraction) -> String {
    if *f.denom() == 1 {
        f.numer().to_string()
    } else {
        format!("{}/{}", f.numer(), f.denom())
    }
}

pub fn fraction_to_f64(f: &Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Parses `3/4`, `0.75` or `1`.
pub fn parse_fraction(text: &str) -> Option<Fraction> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: u64 = n.trim().parse().ok()?;
        let d: u64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Fraction::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().ok()?;
        return Some(Fraction::new(whole * scale + frac, scale));
    }
    text.parse::<u64>().ok().map(Fraction::from_integer)
}

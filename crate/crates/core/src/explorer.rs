//! Reachable-state exploration.
//!
//! Breadth-first from the initial configuration. Successors of a whole BFS
//! level are computed in parallel; indices are then handed out serially in
//! frontier order so numbering does not depend on thread scheduling.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::lang::CompiledAgent;
use crate::predicate::Predicate;
use crate::progress::{compile_traces, ProgressError, TraceTable};
use crate::semantics::{successors, AgentConfig, InvariantViolation, RuleSet, Transition};

pub const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Debug, Clone)]
pub struct ExploreOptions {
    pub max_states: usize,
    pub rules: RuleSet,
    /// Fail when an intention's trace stops matching the compiled traces.
    pub check_traces: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            max_states: DEFAULT_MAX_STATES,
            rules: RuleSet::Transparent,
            check_traces: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("state limit of {limit} exceeded with {frontier} states still on the frontier")]
    StateLimitExceeded { limit: usize, frontier: usize },
    #[error("state {state}: {source}")]
    Invariant {
        state: usize,
        #[source]
        source: InvariantViolation,
    },
    #[error("state {state}, intention `{identifier}`: {source}")]
    Trace {
        state: usize,
        identifier: String,
        #[source]
        source: ProgressError,
    },
}

/// Labelled transition system over agent configurations. State 0 is initial.
/// Every deadlock state carries a self-loop.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub states: Vec<AgentConfig>,
    /// Sorted, duplicate-free.
    pub transitions: Vec<(usize, usize)>,
    pub deadlocks: BTreeSet<usize>,
    pub predicates: Vec<Predicate>,
    /// `labels[s]` holds indices into `predicates` true at state `s`.
    pub labels: Vec<BTreeSet<usize>>,
}

impl TransitionSystem {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for &(a, b) in &self.transitions {
            out[a].push(b);
        }
        out
    }

    /// States where predicate `p` holds.
    pub fn sat(&self, p: usize) -> BTreeSet<usize> {
        (0..self.states.len()).filter(|&s| self.labels[s].contains(&p)).collect()
    }
}

struct Builder<'a> {
    agent: &'a CompiledAgent,
    table: TraceTable,
    opts: &'a ExploreOptions,
    states: Vec<AgentConfig>,
    index: HashMap<AgentConfig, usize>,
    transitions: BTreeSet<(usize, usize)>,
    deadlocks: BTreeSet<usize>,
}

impl<'a> Builder<'a> {
    fn new(agent: &'a CompiledAgent, opts: &'a ExploreOptions) -> Self {
        Builder {
            agent,
            table: compile_traces(agent),
            opts,
            states: Vec::new(),
            index: HashMap::new(),
            transitions: BTreeSet::new(),
            deadlocks: BTreeSet::new(),
        }
    }

    fn expand(&self, state: usize) -> Result<Vec<Transition>, ExploreError> {
        let cfg = &self.states[state];
        if self.opts.check_traces {
            for (id, intention) in &cfg.intentions {
                if intention.trace.matching(&self.table).next().is_none() {
                    return Err(ExploreError::Trace {
                        state,
                        identifier: id.to_string(),
                        source: ProgressError::TraceDesync(intention.trace.to_string()),
                    });
                }
            }
        }
        successors(cfg, self.agent, self.opts.rules)
            .map_err(|source| ExploreError::Invariant { state, source })
    }

    /// Returns the index of `cfg` and whether it is new.
    fn intern(&mut self, cfg: AgentConfig, pending: usize) -> Result<(usize, bool), ExploreError> {
        if let Some(&i) = self.index.get(&cfg) {
            return Ok((i, false));
        }
        if self.states.len() >= self.opts.max_states {
            return Err(ExploreError::StateLimitExceeded {
                limit: self.opts.max_states,
                frontier: pending,
            });
        }
        let i = self.states.len();
        self.index.insert(cfg.clone(), i);
        self.states.push(cfg);
        Ok((i, true))
    }

    fn record(&mut self, from: usize, succs: Vec<Transition>, pending: usize) -> Result<Vec<usize>, ExploreError> {
        if succs.is_empty() {
            self.deadlocks.insert(from);
            self.transitions.insert((from, from));
            return Ok(Vec::new());
        }
        let mut fresh = Vec::new();
        for t in succs {
            let (to, new) = self.intern(t.target, pending + fresh.len())?;
            self.transitions.insert((from, to));
            if new {
                fresh.push(to);
            }
        }
        Ok(fresh)
    }

    fn finish(self, predicates: &[Predicate]) -> TransitionSystem {
        let labels = self
            .states
            .par_iter()
            .map(|cfg| {
                predicates
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.eval(cfg, self.agent, &self.table))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        TransitionSystem {
            states: self.states,
            transitions: self.transitions.into_iter().collect(),
            deadlocks: self.deadlocks,
            predicates: predicates.to_vec(),
            labels,
        }
    }
}

/// Breadth-first exploration of every configuration reachable from the initial one.
pub fn explore(
    agent: &CompiledAgent,
    predicates: &[Predicate],
    opts: &ExploreOptions,
) -> Result<TransitionSystem, ExploreError> {
    let mut b = Builder::new(agent, opts);
    b.intern(AgentConfig::initial(agent), 0)?;
    let mut frontier = vec![0];
    while !frontier.is_empty() {
        let expanded: Vec<Result<Vec<Transition>, ExploreError>> =
            frontier.par_iter().map(|&s| b.expand(s)).collect();
        let mut next = Vec::new();
        for (k, (&s, succs)) in frontier.iter().zip(expanded).enumerate() {
            let pending = frontier.len() - k + next.len();
            next.extend(b.record(s, succs?, pending)?);
        }
        frontier = next;
    }
    Ok(b.finish(predicates))
}

/// Depth-first variant. Same state set and transition relation as [`explore`]
/// up to renumbering.
pub fn explore_dfs(
    agent: &CompiledAgent,
    predicates: &[Predicate],
    opts: &ExploreOptions,
) -> Result<TransitionSystem, ExploreError> {
    let mut b = Builder::new(agent, opts);
    b.intern(AgentConfig::initial(agent), 0)?;
    let mut stack = vec![0];
    while let Some(s) = stack.pop() {
        let succs = b.expand(s)?;
        let fresh = b.record(s, succs, stack.len())?;
        stack.extend(fresh.into_iter().rev());
    }
    Ok(b.finish(predicates))
}

/// Order-free textual encoding of a configuration. Two configurations are
/// equal exactly when their canonical forms are.
pub fn canonical_form(cfg: &AgentConfig) -> String {
    let mut out = String::from("(events");
    for (id, r) in &cfg.events {
        let _ = write!(out, " ({id} {} {})", r.event, r.status);
    }
    out.push_str(") (beliefs");
    for a in cfg.beliefs.iter() {
        let _ = write!(out, " {a}");
    }
    out.push_str(") (intentions");
    for (id, i) in &cfg.intentions {
        let _ = write!(out, " ({id} {} (trace", i.body.canonical());
        for e in i.trace.elements() {
            let _ = write!(out, " {}", e.label);
        }
        out.push_str("))");
    }
    out.push_str(") (fired");
    for id in &cfg.fired_motivations {
        let _ = write!(out, " {id}");
    }
    out.push(')');
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Nodes show the index, beliefs and statuses; deadlocks
/// are drawn with a double border.
pub fn export_dot(ts: &TransitionSystem) -> String {
    let mut out = String::from("digraph ts {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, cfg) in ts.states.iter().enumerate() {
        let beliefs: Vec<&str> = cfg.beliefs.iter().map(|a| a.as_str()).collect();
        let statuses: Vec<String> = cfg
            .events
            .iter()
            .map(|(id, r)| format!("{id}={}", r.status))
            .collect();
        let mut label = format!("{i}\\n{{{}}}\\n{}", beliefs.join(","), statuses.join(" "));
        let holding: Vec<String> = ts.labels[i]
            .iter()
            .map(|&p| escape(&ts.predicates[p].to_string()))
            .collect();
        if !holding.is_empty() {
            let _ = write!(label, "\\n{}", holding.join("\\n"));
        }
        let shape = if ts.deadlocks.contains(&i) { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  s{i} [label=\"{}\"{shape}];", label);
    }
    for (a, b) in &ts.transitions {
        let _ = writeln!(out, "  s{a} -> s{b};");
    }
    out.push_str("}\n");
    out
}

/// `.sta` file: one `index:canonical-form` line per state.
pub fn export_sta(ts: &TransitionSystem) -> String {
    let mut out = String::from("(config)\n");
    for (i, cfg) in ts.states.iter().enumerate() {
        let _ = writeln!(out, "{i}:{}", canonical_form(cfg));
    }
    out
}

/// `.tra` file: `states transitions` header then one `from to` per line.
pub fn export_tra(ts: &TransitionSystem) -> String {
    let mut out = format!("{} {}\n", ts.states.len(), ts.transitions.len());
    for (a, b) in &ts.transitions {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

/// `.lab` file. Label 0 is `init`, 1 is `deadlock`, predicates follow in order.
/// States with no label are omitted.
pub fn export_lab(ts: &TransitionSystem) -> String {
    let mut names = vec!["init".to_owned(), "deadlock".to_owned()];
    names.extend(ts.predicates.iter().map(|p| p.to_string()));
    let header: Vec<String> = names
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{i}=\"{}\"", escape(n)))
        .collect();
    let mut out = header.join(" ");
    out.push('\n');
    for s in 0..ts.states.len() {
        let mut ids = Vec::new();
        if s == ts.initial() {
            ids.push(0);
        }
        if ts.deadlocks.contains(&s) {
            ids.push(1);
        }
        ids.extend(ts.labels[s].iter().map(|p| p + 2));
        if ids.is_empty() {
            continue;
        }
        let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{s}: {}", ids.join(" "));
    }
    out
}

/// Writes `<prefix>.sta`, `<prefix>.tra` and `<prefix>.lab`.
pub fn write_explicit(ts: &TransitionSystem, prefix: &std::path::Path) -> std::io::Result<()> {
    let with = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(".");
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    std::fs::write(with("sta"), export_sta(ts))?;
    std::fs::write(with("tra"), export_tra(ts))?;
    std::fs::write(with("lab"), export_lab(ts))?;
    Ok(())
}

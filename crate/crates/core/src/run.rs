//! Single-path execution under a scheduling policy, with per-step
//! transparency records.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::CompiledAgent;
use crate::names::{Atom, EventName, Identifier};
use crate::progress::{compile_traces, estimate_progress, format_fraction, fraction_to_f64, TraceTable};
use crate::semantics::{agent_step, AgentConfig, AgentRule, EventRecord, InvariantViolation, Status};

/// How one successor is picked when several rules apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "seed")]
pub enum Policy {
    /// First rule instance in canonical order.
    Fifo,
    /// Uniform choice, reproducible from the seed.
    Random(u64),
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fifo => f.write_str("fifo"),
            Policy::Random(seed) => write!(f, "random({seed})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown policy `{0}`; expected `fifo` or `random(SEED)`")]
pub struct PolicyError(pub String);

impl FromStr for Policy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "fifo" {
            return Ok(Policy::Fifo);
        }
        if t == "random" {
            return Ok(Policy::Random(0));
        }
        t.strip_prefix("random(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.trim().parse().ok())
            .map(Policy::Random)
            .ok_or_else(|| PolicyError(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub ratio: String,
    pub min_ratio: String,
    pub max_ratio: String,
    /// `ratio` as a percentage, for display only.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifierReport {
    pub identifier: Identifier,
    pub event: EventName,
    pub status: Status,
    /// Present while the identifier has an intention.
    pub progress: Option<ProgressReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attention {
    pub event: EventName,
    pub identifier: Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusChange {
    pub identifier: Identifier,
    pub event: EventName,
    /// Absent when the record was just created.
    pub from: Option<Status>,
    pub to: Status,
}

/// One line of a run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub rule: String,
    pub identifier: Identifier,
    pub identifiers: Vec<IdentifierReport>,
    pub attention: Vec<Attention>,
    pub status_changes: Vec<StatusChange>,
    pub beliefs_added: Vec<Atom>,
    pub beliefs_removed: Vec<Atom>,
}

/// Per-identifier status and progress, read straight off `cfg`.
pub fn identifier_reports(cfg: &AgentConfig, table: &TraceTable) -> Vec<IdentifierReport> {
    cfg.events
        .iter()
        .map(|(id, record)| IdentifierReport {
            identifier: id.clone(),
            event: record.event.clone(),
            status: record.status,
            progress: cfg
                .intentions
                .get(id)
                .and_then(|i| estimate_progress(&i.trace, table).ok())
                .map(|p| ProgressReport {
                    ratio: format_fraction(&p.ratio),
                    min_ratio: format_fraction(&p.min_ratio),
                    max_ratio: format_fraction(&p.max_ratio),
                    percent: fraction_to_f64(&p.ratio) * 100.0,
                }),
        })
        .collect()
}

fn status_changes(before: &AgentConfig, after: &AgentConfig) -> Vec<StatusChange> {
    after
        .events
        .iter()
        .filter_map(|(id, r)| {
            let old = before.events.get(id).map(|o| o.status);
            (old != Some(r.status)).then(|| StatusChange {
                identifier: id.clone(),
                event: r.event.clone(),
                from: old,
                to: r.status,
            })
        })
        .collect()
}

/// Environment input applied between agent steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Injection {
    AddBelief { atom: Atom },
    RemoveBelief { atom: Atom },
    PostEvent { event: EventName, identifier: Identifier },
    /// Clears an attention flag. Leaves the agent configuration untouched.
    Acknowledge { identifier: Identifier },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectError {
    #[error("atom `{0}` is not used by the agent")]
    UndeclaredAtom(Atom),
    #[error("event `{0}` is not declared by the agent")]
    UndeclaredEvent(EventName),
    #[error("identifier `{0}` is already in use")]
    DuplicateIdentifier(Identifier),
    #[error("no attention flag is raised for `{0}`")]
    NotFlagged(Identifier),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventView {
    pub identifier: Identifier,
    pub event: EventName,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentionView {
    pub identifier: Identifier,
    pub body: String,
    pub trace: String,
    pub progress: Option<ProgressReport>,
}

/// Read-only view of a runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub beliefs: Vec<Atom>,
    pub events: Vec<EventView>,
    pub intentions: Vec<IntentionView>,
    /// Raised and not yet acknowledged.
    pub attention: Vec<Attention>,
    pub quiescent: bool,
}

#[derive(Debug, Clone)]
pub struct Runner {
    agent: CompiledAgent,
    table: TraceTable,
    atoms: BTreeSet<Atom>,
    events: BTreeSet<EventName>,
    config: AgentConfig,
    policy: Policy,
    rng: ChaCha8Rng,
    step: u64,
    attention: Vec<Attention>,
}

impl Runner {
    pub fn new(agent: CompiledAgent, policy: Policy) -> Self {
        let seed = match policy {
            Policy::Fifo => 0,
            Policy::Random(seed) => seed,
        };
        Runner {
            table: compile_traces(&agent),
            atoms: agent.atoms(),
            events: agent.event_names(),
            config: AgentConfig::initial(&agent),
            agent,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step: 0,
            attention: Vec::new(),
        }
    }

    pub fn agent(&self) -> &CompiledAgent {
        &self.agent
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn traces(&self) -> &TraceTable {
        &self.table
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// True when no agent rule applies.
    pub fn is_quiescent(&self) -> Result<bool, InvariantViolation> {
        Ok(agent_step(&self.config, &self.agent)?.is_empty())
    }

    /// Applies one rule chosen by the policy. `None` once quiescent.
    pub fn step(&mut self) -> Result<Option<StepRecord>, InvariantViolation> {
        let mut succs = agent_step(&self.config, &self.agent)?;
        if succs.is_empty() {
            return Ok(None);
        }
        let pick = match self.policy {
            Policy::Fifo => 0,
            Policy::Random(_) => self.rng.random_range(0..succs.len()),
        };
        let chosen = succs.swap_remove(pick);
        let before = std::mem::replace(&mut self.config, chosen.target);
        let after = &self.config;

        let attention: Vec<Attention> = match &chosen.rule {
            AgentRule::Motive(id) => after
                .events
                .get(id)
                .map(|r| Attention {
                    event: r.event.clone(),
                    identifier: id.clone(),
                })
                .into_iter()
                .collect(),
            _ => Vec::new(),
        };
        self.attention.extend(attention.iter().cloned());

        let record = StepRecord {
            step: self.step,
            rule: chosen.rule.to_string(),
            identifier: chosen.rule.identifier().clone(),
            identifiers: identifier_reports(after, &self.table),
            attention,
            status_changes: status_changes(&before, after),
            beliefs_added: after.beliefs.atoms().difference(before.beliefs.atoms()).cloned().collect(),
            beliefs_removed: before.beliefs.atoms().difference(after.beliefs.atoms()).cloned().collect(),
        };
        self.step += 1;
        Ok(Some(record))
    }

    /// Steps until quiescent or `max_steps` records have been produced.
    pub fn run(&mut self, max_steps: u64) -> Result<Vec<StepRecord>, InvariantViolation> {
        let mut out = Vec::new();
        while (out.len() as u64) < max_steps {
            match self.step()? {
                Some(r) => out.push(r),
                None => break,
            }
        }
        Ok(out)
    }

    /// Checks an injection against the agent's vocabulary and current state.
    /// `reserved` lists identifiers claimed by injections not yet applied.
    pub fn validate_injection(&self, inj: &Injection, reserved: &BTreeSet<Identifier>) -> Result<(), InjectError> {
        match inj {
            Injection::AddBelief { atom } | Injection::RemoveBelief { atom } => {
                if !self.atoms.contains(atom) {
                    return Err(InjectError::UndeclaredAtom(atom.clone()));
                }
            }
            Injection::PostEvent { event, identifier } => {
                if !self.events.contains(event) {
                    return Err(InjectError::UndeclaredEvent(event.clone()));
                }
                let taken = self.config.events.contains_key(identifier)
                    || self.config.intentions.contains_key(identifier)
                    || self.agent.identifiers().contains(&identifier)
                    || reserved.contains(identifier);
                if taken {
                    return Err(InjectError::DuplicateIdentifier(identifier.clone()));
                }
            }
            Injection::Acknowledge { identifier } => {
                if !self.attention.iter().any(|a| &a.identifier == identifier) {
                    return Err(InjectError::NotFlagged(identifier.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn inject(&mut self, inj: &Injection) -> Result<(), InjectError> {
        self.validate_injection(inj, &BTreeSet::new())?;
        match inj {
            Injection::AddBelief { atom } => {
                self.config.beliefs.insert(atom.clone());
            }
            Injection::RemoveBelief { atom } => {
                self.config.beliefs.remove(atom.as_str());
            }
            Injection::PostEvent { event, identifier } => {
                self.config.events.insert(
                    identifier.clone(),
                    EventRecord {
                        event: event.clone(),
                        status: Status::Pending,
                    },
                );
            }
            Injection::Acknowledge { identifier } => {
                self.attention.retain(|a| &a.identifier != identifier);
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Result<Snapshot, InvariantViolation> {
        let reports = identifier_reports(&self.config, &self.table);
        Ok(Snapshot {
            step: self.step,
            beliefs: self.config.beliefs.iter().cloned().collect(),
            events: reports
                .iter()
                .map(|r| EventView {
                    identifier: r.identifier.clone(),
                    event: r.event.clone(),
                    status: r.status,
                })
                .collect(),
            intentions: self
                .config
                .intentions
                .iter()
                .map(|(id, i)| IntentionView {
                    identifier: id.clone(),
                    body: i.body.to_string(),
                    trace: i.trace.to_string(),
                    progress: reports
                        .iter()
                        .find(|r| &r.identifier == id)
                        .and_then(|r| r.progress.clone()),
                })
                .collect(),
            attention: self.attention.clone(),
            quiescent: self.is_quiescent()?,
        })
    }
}

/// Renders records as line-delimited JSON.
pub fn report_lines(records: &[StepRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

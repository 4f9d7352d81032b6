//! Session state independent of the transport: a runner, its pending
//! injections, the transparency feed and an optional journal.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use canrt_core::run::{Attention, InjectError, StatusChange};
use canrt_core::semantics::InvariantViolation;
use canrt_core::{parse_program, AgentError, Injection, Policy, Runner, Snapshot, StepRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One entry of a session's server-push feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedEvent {
    /// Position in the feed, starting at 0.
    pub id: u64,
    /// Agent step the event belongs to.
    pub step: u64,
    #[serde(flatten)]
    pub payload: FeedPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "kebab-case")]
pub enum FeedPayload {
    Step(StepRecord),
    Attention(Attention),
    StatusChange(StatusChange),
    Quiescent,
}

impl FeedPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            FeedPayload::Step(_) => "step",
            FeedPayload::Attention(_) => "attention",
            FeedPayload::StatusChange(_) => "status-change",
            FeedPayload::Quiescent => "quiescent",
        }
    }
}

/// A line of the per-session journal. Replaying the lines in order
/// rebuilds the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JournalEntry {
    Create { source: String, policy: Policy },
    Inject { injection: Injection },
    Step { count: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub policy: Policy,
    /// Injections accepted but not yet applied.
    pub pending_injections: Vec<Injection>,
    pub feed_length: u64,
    #[serde(flatten)]
    pub snapshot: Snapshot,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Inject(#[from] InjectError),
    #[error("invariant violated: {0}")]
    Invariant(#[from] InvariantViolation),
    #[error("journal: {0}")]
    Journal(#[from] io::Error),
    #[error("journal line {line}: {message}")]
    Replay { line: usize, message: String },
}

pub struct SessionCore {
    runner: Runner,
    queue: Vec<Injection>,
    feed: Vec<FeedEvent>,
    journal: Option<File>,
}

impl SessionCore {
    pub fn new(source: &str, policy: Policy) -> Result<Self, SessionError> {
        let agent = parse_program(source)?;
        Ok(SessionCore {
            runner: Runner::new(agent, policy),
            queue: Vec::new(),
            feed: Vec::new(),
            journal: None,
        })
    }

    /// Starts journaling to `path`, beginning with the creation entry.
    pub fn attach_journal(&mut self, path: &Path, source: &str) -> Result<(), SessionError> {
        let file = File::options().create(true).append(true).open(path)?;
        self.journal = Some(file);
        self.record(&JournalEntry::Create {
            source: source.to_owned(),
            policy: self.runner.policy(),
        })
    }

    fn record(&mut self, entry: &JournalEntry) -> Result<(), SessionError> {
        if let Some(f) = &mut self.journal {
            let mut line = serde_json::to_string(entry).expect("journal entries serialize");
            line.push('\n');
            f.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn runner(&self) -> &Runner {
        &self.runner
    }

    pub fn feed(&self) -> &[FeedEvent] {
        &self.feed
    }

    pub fn pending(&self) -> &[Injection] {
        &self.queue
    }

    /// Validates and queues an injection. Acknowledgements touch no agent
    /// state and take effect at once.
    pub fn inject(&mut self, injection: Injection) -> Result<(), SessionError> {
        let reserved: BTreeSet<_> = self
            .queue
            .iter()
            .filter_map(|i| match i {
                Injection::PostEvent { identifier, .. } => Some(identifier.clone()),
                _ => None,
            })
            .collect();
        self.runner.validate_injection(&injection, &reserved)?;
        self.record(&JournalEntry::Inject { injection: injection.clone() })?;
        if matches!(injection, Injection::Acknowledge { .. }) {
            self.runner.inject(&injection)?;
        } else {
            self.queue.push(injection);
        }
        Ok(())
    }

    /// Drains the queue, then takes up to `count` agent steps. Returns the
    /// feed events produced.
    pub fn step(&mut self, count: u64) -> Result<Vec<FeedEvent>, SessionError> {
        self.record(&JournalEntry::Step { count })?;
        for injection in std::mem::take(&mut self.queue) {
            self.runner.inject(&injection)?;
        }
        let start = self.feed.len();
        for _ in 0..count {
            let Some(record) = self.runner.step()? else { break };
            let step = record.step;
            let extra: Vec<FeedPayload> = record
                .attention
                .iter()
                .cloned()
                .map(FeedPayload::Attention)
                .chain(record.status_changes.iter().cloned().map(FeedPayload::StatusChange))
                .collect();
            self.push(step, FeedPayload::Step(record));
            for payload in extra {
                self.push(step, payload);
            }
        }
        let announced = matches!(self.feed.last(), Some(FeedEvent { payload: FeedPayload::Quiescent, .. }));
        if !announced && self.runner.is_quiescent()? {
            self.push(self.runner.steps_taken(), FeedPayload::Quiescent);
        }
        Ok(self.feed[start..].to_vec())
    }

    fn push(&mut self, step: u64, payload: FeedPayload) {
        let id = self.feed.len() as u64;
        self.feed.push(FeedEvent { id, step, payload });
    }

    pub fn state(&self, id: &str) -> Result<SessionState, SessionError> {
        Ok(SessionState {
            id: id.to_owned(),
            policy: self.runner.policy(),
            pending_injections: self.queue.clone(),
            feed_length: self.feed.len() as u64,
            snapshot: self.snapshot()?,
        })
    }

    pub fn snapshot(&self) -> Result<Snapshot, SessionError> {
        Ok(self.runner.snapshot()?)
    }
}

/// Rebuilds a session from journal text.
pub fn replay(journal: &str) -> Result<SessionCore, SessionError> {
    let mut core: Option<SessionCore> = None;
    for (n, line) in journal.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |message: String| SessionError::Replay { line: n + 1, message };
        let entry: JournalEntry = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        match (entry, core.as_mut()) {
            (JournalEntry::Create { source, policy }, None) => core = Some(SessionCore::new(&source, policy)?),
            (JournalEntry::Create { .. }, Some(_)) => return Err(bad("second create entry".into())),
            (_, None) => return Err(bad("entry before create".into())),
            (JournalEntry::Inject { injection }, Some(c)) => c.inject(injection)?,
            (JournalEntry::Step { count }, Some(c)) => {
                c.step(count)?;
            }
        }
    }
    core.ok_or(SessionError::Replay { line: 0, message: "empty journal".into() })
}

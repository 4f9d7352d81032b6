//! A transparent BDI agent runtime.
//!
//! Agents are written in a small plan language ([`lang`]), executed under a
//! small-step semantics that tracks the success or failure of every adopted
//! event ([`semantics`]), report how far each intention has progressed
//! ([`progress`]), and can be explored exhaustively ([`explorer`]) and model
//! checked against CTL properties ([`ctl`]).

pub mod belief;
pub mod ctl;
pub mod explorer;
pub mod gen;
pub mod lang;
pub mod names;
pub mod predicate;
pub mod progress;
pub mod run;
pub mod semantics;

pub use belief::{BeliefBase, BeliefFormula};
pub use ctl::{check, parse_ctl, parse_properties, witness, CheckResult, Ctl, Model, Property};
pub use explorer::{
    canonical_form, explore, explore_dfs, export_dot, export_lab, export_sta, export_tra, write_explicit,
    ExploreError, ExploreOptions, TransitionSystem,
};
pub use lang::{parse_program, AgentError, CompiledAgent};
pub use names::{ActionName, Atom, EventName, Identifier};
pub use predicate::{parse_predicates, Predicate};
pub use progress::{compile_traces, estimate_progress, CurrentTrace, Fraction, Progress, TraceTable};
pub use run::{Injection, Policy, Runner, Snapshot, StepRecord};
pub use semantics::{
    agent_step, agent_step_legacy, intention_step, is_blocked, AgentConfig, AgentRule, PlanBody, RuleSet, Status,
};

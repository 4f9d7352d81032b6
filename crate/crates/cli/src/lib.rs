//! Command implementations behind the `canrt` binary. Each command returns
//! its stdout text so it can be tested without a process.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use canrt_core::explorer::DEFAULT_MAX_STATES;
use canrt_core::run::report_lines;
use canrt_core::{
    check, compile_traces, explore, export_dot, parse_predicates, parse_properties, parse_program, witness,
    write_explicit, AgentError, CompiledAgent, ExploreOptions, Model, Policy, Predicate, Property, RuleSet, Runner,
    TransitionSystem,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    /// Carries the full verification table.
    #[error("{0}")]
    PropertyFailed(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::PropertyFailed(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

pub fn load_agent(path: &Path) -> Result<CompiledAgent, CliError> {
    let source = read(path)?;
    parse_program(&source).map_err(|e| {
        let text = e.render(&path.display().to_string());
        match e {
            AgentError::Parse(_) => CliError::Parse(text),
            AgentError::Validation(_) => CliError::Validation(text),
        }
    })
}

pub fn cmd_check(path: &Path) -> Result<String, CliError> {
    let agent = load_agent(path)?;
    Ok(format!(
        "{}: ok ({} events, {} motivations, {} plans, {} actions)\n",
        path.display(),
        agent.external_events.len(),
        agent.motivations.len(),
        agent.plans.len(),
        agent.actions.len()
    ))
}

pub fn cmd_traces(path: &Path) -> Result<String, CliError> {
    Ok(compile_traces(&load_agent(path)?).dump())
}

pub fn cmd_run(path: &Path, policy: Policy, max_steps: u64) -> Result<String, CliError> {
    let mut runner = Runner::new(load_agent(path)?, policy);
    let records = runner.run(max_steps).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(report_lines(&records))
}

#[derive(Debug, Clone)]
pub struct ExploreFlags {
    pub dot: Option<PathBuf>,
    pub explicit: Option<PathBuf>,
    pub max_states: usize,
    pub predicates: Option<PathBuf>,
    pub legacy: bool,
}

impl Default for ExploreFlags {
    fn default() -> Self {
        ExploreFlags {
            dot: None,
            explicit: None,
            max_states: DEFAULT_MAX_STATES,
            predicates: None,
            legacy: false,
        }
    }
}

fn build(agent: &CompiledAgent, predicates: &[Predicate], max_states: usize, legacy: bool) -> Result<TransitionSystem, CliError> {
    let opts = ExploreOptions {
        max_states,
        rules: if legacy { RuleSet::Legacy } else { RuleSet::Transparent },
        ..ExploreOptions::default()
    };
    explore(agent, predicates, &opts).map_err(|e| CliError::Other(e.to_string()))
}

pub fn cmd_explore(path: &Path, flags: &ExploreFlags) -> Result<String, CliError> {
    let agent = load_agent(path)?;
    let predicates = match &flags.predicates {
        Some(p) => parse_predicates(&read(p)?)
            .map_err(|(line, e)| CliError::Parse(format!("{}:{line}: {e}", p.display())))?,
        None => Vec::new(),
    };
    let ts = build(&agent, &predicates, flags.max_states, flags.legacy)?;
    if let Some(dot) = &flags.dot {
        std::fs::write(dot, export_dot(&ts)).map_err(|e| CliError::Other(format!("{}: {e}", dot.display())))?;
    }
    if let Some(prefix) = &flags.explicit {
        write_explicit(&ts, prefix).map_err(|e| CliError::Other(format!("{}: {e}", prefix.display())))?;
    }
    let mut out = format!(
        "states {}\ntransitions {}\ndeadlocks {}\n",
        ts.len(),
        ts.transitions.len(),
        ts.deadlocks.len()
    );
    for (k, p) in ts.predicates.iter().enumerate() {
        writeln!(out, "{p} {}", ts.sat(k).len()).unwrap();
    }
    Ok(out)
}

/// Predicates named by the properties' labels, in first-use order.
fn property_predicates(props: &[Property]) -> Result<Vec<Predicate>, CliError> {
    let mut out: Vec<Predicate> = Vec::new();
    for prop in props {
        for label in prop.formula.labels() {
            if label == "init" || label == "deadlock" {
                continue;
            }
            let p: Predicate = label
                .parse()
                .map_err(|e| CliError::Parse(format!("property `{}`: `{label}`: {e}", prop.name)))?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

pub fn cmd_verify(path: &Path, props_path: &Path, max_states: usize) -> Result<String, CliError> {
    let agent = load_agent(path)?;
    let props = parse_properties(&read(props_path)?)
        .map_err(|e| CliError::Parse(format!("{}:{e}", props_path.display())))?;
    let predicates = property_predicates(&props)?;
    let ts = build(&agent, &predicates, max_states, false)?;
    let model = Model::from(&ts);
    let mut out = String::new();
    let mut failed = false;
    for prop in &props {
        let result = check(&model, &prop.formula).map_err(|e| CliError::Other(e.to_string()))?;
        let verdict = if result.holds_at_initial { "PASS" } else { "FAIL" };
        writeln!(out, "{} {verdict} {}", prop.name, result.satisfying.len()).unwrap();
        if !result.holds_at_initial {
            failed = true;
            if let Some(path) = witness(&model, &prop.formula).map_err(|e| CliError::Other(e.to_string()))? {
                let steps: Vec<String> = path.iter().map(|s| format!("s{s}")).collect();
                writeln!(out, "  witness: {}", steps.join(" -> ")).unwrap();
            }
        }
    }
    if failed {
        Err(CliError::PropertyFailed(out))
    } else {
        Ok(out)
    }
}

/// Identifiers mentioned by the agent, for the serve banner.
fn identifiers(agent: &CompiledAgent) -> BTreeSet<String> {
    agent.identifiers().into_iter().map(|i| i.to_string()).collect()
}

/// Runs the service until interrupted. With an agent file, a session for
/// it is created up front and announced on stdout.
pub async fn cmd_serve(
    path: Option<&Path>,
    port: u16,
    policy: Policy,
    journal_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let state = match journal_dir {
        Some(dir) => canrt_service::AppState::with_journal_dir(dir),
        None => canrt_service::AppState::new(),
    };
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|e| CliError::Other(format!("bind port {port}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| CliError::Other(e.to_string()))?;
    println!("listening on http://{addr}");
    if let Some(path) = path {
        let agent = load_agent(path)?;
        let source = read(path)?;
        let (id, _) = state
            .create_session(&source, policy)
            .map_err(|e| CliError::Other(e.to_string()))?;
        let ids: Vec<String> = identifiers(&agent).into_iter().collect();
        println!("session {id} ({})", ids.join(", "));
        println!("dashboard http://{addr}/?session={id}");
    }
    canrt_service::serve(listener, state)
        .await
        .map_err(|e| CliError::Other(e.to_string()))
}

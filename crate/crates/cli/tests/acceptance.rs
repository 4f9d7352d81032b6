//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/ctl_oracle.rs"]
mod ctl_oracle;
#[path = "../../core/tests/common/legacy.rs"]
mod legacy;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use canrt_core::gen::{random_agent, random_ctl, random_model, AgentShape};
use canrt_core::progress::TraceStep;
use canrt_core::*;
use ctl_oracle::Oracle;
use futures::StreamExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn agents_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/agents")
}

fn agent_file(name: &str) -> PathBuf {
    agents_dir().join(name)
}

fn load(name: &str) -> CompiledAgent {
    parse_program(&std::fs::read_to_string(agent_file(name)).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn trace(event: &str, steps: &[&str]) -> CurrentTrace {
    let mut t = CurrentTrace::new();
    t.apply(&TraceStep::Event(event.to_owned()));
    for s in steps {
        if s.contains('#') {
            t.apply(&TraceStep::Action((*s).to_owned()));
        } else {
            t.apply(&TraceStep::Plan { event: event.to_owned(), plan: (*s).to_owned() });
        }
    }
    t
}

fn progress_oracle() -> Outcome {
    let start = Instant::now();
    let table = compile_traces(&load("two_plans.can"));
    let p1 = estimate_progress(&trace("e1", &["e1.P1", "e1.P1.a1#1"]), &table).map_err(|e| e.to_string())?;
    let p2 = estimate_progress(&trace("e1", &["e1.P2"]), &table).map_err(|e| e.to_string())?;
    ensure(p1.ratio == Fraction::new(3, 4), || format!("e1;P1;a1 gave {}", p1.ratio))?;
    ensure(p2.ratio == Fraction::new(2, 5), || format!("e1;P2 gave {}", p2.ratio))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("e1;P1;a1 = {}, e1;P2 = {}", p1.ratio, p2.ratio))
}

fn uav_verification() -> Outcome {
    let start = Instant::now();
    let props = parse_properties(
        "p1a: AG (progressing(identifier1) -> !status(identifier1)=pending)\n\
         p1b: AG (progressing(identifier2) -> !status(identifier2)=pending)\n\
         p2: AG (completed(identifier1) -> AF (status(identifier1)=success & !status(identifier1)=failure))\n\
         p3: AG (blocked(identifier1) -> AF (status(identifier1)=failure & !status(identifier1)=success))\n\
         p4: AG (believes(parked) -> AF desires(e_parked))\n",
    )
    .unwrap();
    let mut preds: Vec<Predicate> = Vec::new();
    for p in &props {
        for l in p.formula.labels() {
            let pred: Predicate = l.parse().map_err(|e| format!("{l}: {e}"))?;
            if !preds.contains(&pred) {
                preds.push(pred);
            }
        }
    }
    let ts = explore(&load("uav.can"), &preds, &ExploreOptions::default()).map_err(|e| e.to_string())?;
    let model = Model::from(&ts);
    let mut failed = Vec::new();
    for p in &props {
        if !check(&model, &p.formula).map_err(|e| e.to_string())?.holds_at_initial {
            failed.push(p.name.clone());
        }
    }
    ensure(failed.is_empty(), || format!("failing: {}", failed.join(", ")))?;
    ensure(ts.len() < 100_000, || format!("{} states", ts.len()))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "4 properties hold; {} states, {} transitions",
        ts.len(),
        ts.transitions.len()
    ))
}

/// Allowed status moves between consecutive states, written out directly.
fn lifecycle_ok(from: Option<Status>, to: Option<Status>, motivation: bool) -> bool {
    use Status::*;
    matches!(
        (from, to, motivation),
        (None, None, _)
            | (None, Some(Active), true)
            | (Some(Pending), Some(Pending) | Some(Active), false)
            | (Some(Active), Some(Active) | Some(Success) | Some(Failure), _)
            | (Some(Success), Some(Success), _)
            | (Some(Failure), Some(Failure), _)
    )
}

fn status_lifecycle() -> Outcome {
    let agent = load("uav.can");
    let ts = explore(&agent, &[], &ExploreOptions::default()).map_err(|e| e.to_string())?;
    let motivations: BTreeSet<&str> = agent.motivations.iter().map(|m| m.identifier.as_str()).collect();
    let ids: BTreeSet<&str> = agent.identifiers().into_iter().map(|i| i.as_str()).collect();
    let mut violations = Vec::new();
    let init = &ts.states[ts.initial()];
    for id in &ids {
        let s = init.events.get(*id).map(|r| r.status);
        let expected = if motivations.contains(id) { None } else { Some(Status::Pending) };
        if s != expected {
            violations.push(format!("initial {id}: {s:?}"));
        }
    }
    for &(a, b) in &ts.transitions {
        for id in &ids {
            let from = ts.states[a].events.get(*id).map(|r| r.status);
            let to = ts.states[b].events.get(*id).map(|r| r.status);
            if !lifecycle_ok(from, to, motivations.contains(id)) {
                violations.push(format!("s{a} -> s{b} {id}: {from:?} -> {to:?}"));
            }
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("0 violations over {} transitions", ts.transitions.len()))
}

fn legacy_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let shape = AgentShape {
        max_events: 2,
        max_plans: 4,
        max_actions: 3,
        max_atoms: 4,
        motivations: 0,
    };
    let mut mismatches = 0;
    for _ in 0..50 {
        let agent = random_agent(&mut rng, &shape);
        if legacy::projection(&agent, RuleSet::Transparent) != legacy::projection(&agent, RuleSet::Legacy) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of 50 agents differ"))?;
    Ok("50 agents, 0 mismatches".into())
}

fn ctl_oracle() -> Outcome {
    const LABELS: &[&str] = &["p", "q", "r"];
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7100);
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for system in 0..100 {
        let model = random_model(&mut rng, 8, LABELS);
        let oracle = Oracle::new(&model);
        for _ in 0..10 {
            let f = random_ctl(&mut rng, 3, LABELS);
            let expected: BTreeSet<usize> = oracle
                .sat(&f)
                .unwrap()
                .iter()
                .enumerate()
                .filter(|(_, x)| **x)
                .map(|(i, _)| i)
                .collect();
            checks += 1;
            if check(&model, &f).unwrap().satisfying != expected {
                mismatches.push(format!("system {system}: {f}"));
            }
        }
        for _ in 0..3 {
            let g = Box::new(random_ctl(&mut rng, 2, LABELS));
            let not_g = Box::new(Ctl::Not(g.clone()));
            let pairs = [
                (Ctl::AG(g.clone()), Ctl::Not(Box::new(Ctl::EF(not_g.clone())))),
                (Ctl::AF(g.clone()), Ctl::Not(Box::new(Ctl::EG(not_g.clone())))),
                (Ctl::AX(g.clone()), Ctl::Not(Box::new(Ctl::EX(not_g.clone())))),
            ];
            for (lhs, rhs) in pairs {
                checks += 1;
                if check(&model, &lhs).unwrap().satisfying != check(&model, &rhs).unwrap().satisfying {
                    mismatches.push(format!("system {system}: {lhs} vs {rhs}"));
                }
            }
        }
    }
    ensure(mismatches.is_empty(), || format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    Ok(format!("{checks} comparisons on 100 systems, 0 mismatches"))
}

fn canrt(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_canrt")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("canrt {} exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn explore_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let uav = agent_file("uav.can");
    let preds = agent_file("uav.preds");
    let dot = dir.join("uav.dot");
    let prefix = dir.join("uav");
    let stdout = canrt(&[
        "explore",
        uav.to_str().unwrap(),
        "--predicates",
        preds.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--explicit",
        prefix.to_str().unwrap(),
    ])?;
    let mut files = BTreeMap::from([("stdout".to_owned(), stdout)]);
    for name in ["uav.dot", "uav.sta", "uav.tra", "uav.lab"] {
        files.insert(name.to_owned(), std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = explore_outputs(a.path())?;
    let second = explore_outputs(b.path())?;
    for (name, bytes) in &first {
        ensure(second[name] == *bytes, || format!("explore output {name} differs"))?;
    }
    let uav = agent_file("uav.can");
    for seed in ["1", "7", "42"] {
        let run = ["run", uav.to_str().unwrap(), "--policy", "random", "--seed", seed];
        let (x, y) = (canrt(&run)?, canrt(&run)?);
        ensure(!x.is_empty() && x == y, || format!("seeded run {seed} differs"))?;
    }
    let fifo = ["run", uav.to_str().unwrap()];
    ensure(canrt(&fifo)? == canrt(&fifo)?, || "fifo run differs".into())?;
    Ok(format!("{} explore outputs and 4 run reports identical", first.len()))
}

async fn post(client: &reqwest::Client, url: String, body: Value) -> Result<Value, String> {
    let res = client.post(url).json(&body).send().await.map_err(|e| e.to_string())?;
    let status = res.status();
    let v: Value = res.json().await.map_err(|e| e.to_string())?;
    ensure(status.is_success(), || format!("{status}: {v}"))?;
    Ok(v)
}

/// Reads the SSE feed from the start until the `quiescent` event.
async fn read_feed(client: &reqwest::Client, url: String) -> Result<Vec<(String, Value)>, String> {
    let res = client.get(url).send().await.map_err(|e| e.to_string())?;
    let mut body = res.bytes_stream();
    let mut buf = String::new();
    let mut events = Vec::new();
    while let Some(chunk) = body.next().await {
        buf.push_str(&String::from_utf8_lossy(&chunk.map_err(|e| e.to_string())?));
        while let Some(end) = buf.find("\n\n") {
            let block: String = buf.drain(..end + 2).collect();
            let kind = block.lines().find_map(|l| l.strip_prefix("event:")).map(|s| s.trim().to_owned());
            let data = block.lines().find_map(|l| l.strip_prefix("data:"));
            if let (Some(kind), Some(data)) = (kind, data) {
                let v: Value = serde_json::from_str(data.trim()).map_err(|e| e.to_string())?;
                let done = kind == "quiescent";
                events.push((kind, v));
                if done {
                    return Ok(events);
                }
            }
        }
    }
    Err("feed closed before quiescence".into())
}

async fn engine_malfunction_scenario() -> Outcome {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(canrt_service::serve(listener, canrt_service::AppState::new()));
    let client = reqwest::Client::new();
    let source = std::fs::read_to_string(agent_file("uav.can")).unwrap();

    let created = post(&client, format!("{base}/v1/sessions"), json!({ "source": source })).await?;
    let id = created["id"].as_str().ok_or("no session id")?.to_owned();
    let session = format!("{base}/v1/sessions/{id}");

    // Fly until the UAV is airborne, then the engine fails.
    let mut airborne = false;
    for _ in 0..20 {
        let state = post(&client, format!("{session}/step"), json!({ "count": 1 })).await?;
        if state["beliefs"].as_array().is_some_and(|b| b.contains(&json!("flying"))) {
            airborne = true;
            break;
        }
    }
    ensure(airborne, || "never took off".into())?;
    post(&client, format!("{session}/inject"), json!({ "op": "add-belief", "atom": "engine_malfunc" })).await?;
    let state = post(&client, format!("{session}/step"), json!({ "count": 1000 })).await?;
    ensure(state["quiescent"] == json!(true), || "not quiescent after 1000 steps".into())?;

    let feed = read_feed(&client, format!("{session}/stream")).await?;
    let attention = feed
        .iter()
        .any(|(kind, v)| kind == "attention" && v["data"]["identifier"] == "identifier2" && v["data"]["event"] == "e_parked");
    let statuses: BTreeMap<String, String> = state["events"]
        .as_array()
        .ok_or("no events")?
        .iter()
        .map(|e| (e["identifier"].as_str().unwrap().to_owned(), e["status"].as_str().unwrap().to_owned()))
        .collect();
    let summary = format!("attention(identifier2)={attention}, final statuses {statuses:?}");
    ensure(attention, || format!("no attention event; {summary}"))?;
    ensure(statuses.get("identifier2").map(String::as_str) == Some("success"), || summary.clone())?;
    ensure(statuses.get("identifier1").map(String::as_str) == Some("failure"), || {
        format!("expected identifier1=failure; {summary}")
    })?;
    Ok(summary)
}

fn engine_malfunction() -> Outcome {
    let start = Instant::now();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let result = rt.block_on(async {
        tokio::time::timeout(Duration::from_secs(5), engine_malfunction_scenario())
            .await
            .unwrap_or_else(|_| Err("timed out".into()))
    })?;
    within(start, Duration::from_secs(5))?;
    Ok(result)
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("progress-oracle", progress_oracle),
        ("uav-verification", uav_verification),
        ("status-lifecycle", status_lifecycle),
        ("legacy-equivalence", legacy_equivalence),
        ("ctl-oracle", ctl_oracle),
        ("determinism", determinism),
        ("engine-malfunction-api", engine_malfunction),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {name} ({ms} ms): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({ms} ms): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

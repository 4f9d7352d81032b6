use canrt_core::gen::{random_agent, AgentShape};
use canrt_core::progress::format_fraction;
use canrt_core::run::report_lines;
use canrt_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STATUSES: [Status; 4] = [Status::Pending, Status::Active, Status::Success, Status::Failure];

/// Steps `runner` up to 300 times, checking every record against the
/// configuration it was produced from. Goals whose conditions never hold
/// retry forever, so quiescence is not guaranteed.
fn check_honest(mut runner: Runner) {
    let agent = runner.agent().clone();
    let table = runner.traces().clone();
    let mut expected_step = 0;
    let mut before = runner.config().clone();
    while expected_step < 300 {
        let Some(record) = runner.step().unwrap() else { break };
        let cfg = runner.config();
        assert_eq!(record.step, expected_step);
        expected_step += 1;
        assert_eq!(record.identifiers.len(), cfg.events.len());
        for r in &record.identifiers {
            for s in STATUSES {
                let p: Predicate = format!("status({})={}", r.identifier, s.as_str()).parse().unwrap();
                assert_eq!(p.eval(cfg, &agent, &table), r.status == s, "{}", r.identifier);
            }
            let intention = cfg.intentions.get(&r.identifier);
            assert_eq!(intention.is_some(), r.progress.is_some());
            if let (Some(i), Some(rep)) = (intention, &r.progress) {
                let p = estimate_progress(&i.trace, &table).unwrap();
                assert_eq!(rep.ratio, format_fraction(&p.ratio));
                assert_eq!(rep.min_ratio, format_fraction(&p.min_ratio));
                assert_eq!(rep.max_ratio, format_fraction(&p.max_ratio));
                let q: Predicate = format!("progress({})>={}", r.identifier, rep.ratio).parse().unwrap();
                assert!(q.eval(cfg, &agent, &table));
            }
        }
        let added: Vec<&str> = record.beliefs_added.iter().map(|a| a.as_str()).collect();
        let removed: Vec<&str> = record.beliefs_removed.iter().map(|a| a.as_str()).collect();
        let want_added: Vec<&str> = cfg.beliefs.iter().map(|a| a.as_str()).filter(|a| !before.beliefs.contains(a)).collect();
        let want_removed: Vec<&str> = before.beliefs.iter().map(|a| a.as_str()).filter(|a| !cfg.beliefs.contains(a)).collect();
        assert_eq!((added, removed), (want_added, want_removed));
        for change in &record.status_changes {
            assert_eq!(before.status(change.identifier.as_str()), change.from);
            assert_eq!(cfg.status(change.identifier.as_str()), Some(change.to));
        }
        let changed = cfg.events.iter().filter(|(id, r)| before.status(id.as_str()) != Some(r.status)).count();
        assert_eq!(changed, record.status_changes.len());
        before = cfg.clone();
    }
}

#[test]
fn uav_reports_are_honest() {
    let agent = parse_program(include_str!("../agents/uav.can")).unwrap();
    check_honest(Runner::new(agent.clone(), Policy::Fifo));
    for seed in 0..50 {
        check_honest(Runner::new(agent.clone(), Policy::Random(seed)));
    }
}

#[test]
fn random_agent_reports_are_honest() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4E9);
    let shape = AgentShape { motivations: 2, max_events: 3, ..AgentShape::default() };
    for seed in 0..100 {
        check_honest(Runner::new(random_agent(&mut rng, &shape), Policy::Random(seed)));
    }
}

#[test]
fn seeded_runs_repeat_byte_for_byte() {
    let agent = parse_program(include_str!("../agents/uav.can")).unwrap();
    for seed in [3, 99, 12345] {
        let a = report_lines(&Runner::new(agent.clone(), Policy::Random(seed)).run(1000).unwrap());
        let b = report_lines(&Runner::new(agent.clone(), Policy::Random(seed)).run(1000).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn attention_is_reported_when_the_motivation_fires() {
    let agent = parse_program(include_str!("../agents/uav.can")).unwrap();
    let mut runner = Runner::new(agent, Policy::Fifo);
    runner.inject(&Injection::AddBelief { atom: Atom::new("engine_malfunc") }).unwrap();
    let records = runner.run(1000).unwrap();
    let fired: Vec<&StepRecord> = records.iter().filter(|r| !r.attention.is_empty()).collect();
    assert_eq!(fired.len(), 1);
    assert_eq!(fired[0].rule, "A_motive[identifier2]");
    assert_eq!(fired[0].attention[0].event.as_str(), "e_parked");
    let snap = runner.snapshot().unwrap();
    assert_eq!(snap.attention.len(), 1);
    runner.inject(&Injection::Acknowledge { identifier: Identifier::new("identifier2") }).unwrap();
    assert!(runner.snapshot().unwrap().attention.is_empty());
}

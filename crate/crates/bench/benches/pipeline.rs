use std::hint::black_box;

use canrt_core::gen::{random_ctl, random_model};
use canrt_core::*;
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const UAV: &str = include_str!("../../core/agents/uav.can");
const PROPS: &str = include_str!("../../core/agents/uav.props");

fn uav_predicates(props: &[Property]) -> Vec<Predicate> {
    let mut out: Vec<Predicate> = Vec::new();
    for p in props {
        for l in p.formula.labels() {
            let pred: Predicate = l.parse().unwrap();
            if !out.contains(&pred) {
                out.push(pred);
            }
        }
    }
    out
}

fn pipeline(c: &mut Criterion) {
    let agent = parse_program(UAV).unwrap();
    let props = parse_properties(PROPS).unwrap();
    let preds = uav_predicates(&props);

    c.bench_function("parse uav", |b| b.iter(|| parse_program(black_box(UAV)).unwrap()));
    c.bench_function("compile traces uav", |b| b.iter(|| compile_traces(black_box(&agent))));
    c.bench_function("explore uav", |b| {
        b.iter(|| explore(black_box(&agent), &preds, &ExploreOptions::default()).unwrap())
    });
    c.bench_function("explore uav depth-first", |b| {
        b.iter(|| explore_dfs(black_box(&agent), &preds, &ExploreOptions::default()).unwrap())
    });

    let ts = explore(&agent, &preds, &ExploreOptions::default()).unwrap();
    let model = Model::from(&ts);
    c.bench_function("check uav properties", |b| {
        b.iter(|| {
            for p in &props {
                black_box(check(&model, &p.formula).unwrap());
            }
        })
    });
    c.bench_function("fifo run uav", |b| {
        b.iter(|| Runner::new(agent.clone(), Policy::Fifo).run(1000).unwrap())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let big = random_model(&mut rng, 5000, &["p", "q"]);
    let formulas: Vec<Ctl> = (0..20).map(|_| random_ctl(&mut rng, 3, &["p", "q"])).collect();
    c.bench_function("ctl depth-3 formulas on 5000 states", |b| {
        b.iter(|| {
            for f in &formulas {
                black_box(check(&big, f).unwrap());
            }
        })
    });
}

criterion_group!(benches, pipeline);
criterion_main!(benches);

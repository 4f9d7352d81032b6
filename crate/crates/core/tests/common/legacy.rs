//! Projection of explored states onto beliefs and the multiset of
//! intention bodies, for comparing the two rule sets.

use std::collections::BTreeSet;

use canrt_core::explorer::ExploreOptions;
use canrt_core::{explore, CompiledAgent, RuleSet};

pub type Projection = BTreeSet<(Vec<String>, Vec<String>)>;

pub fn projection(agent: &CompiledAgent, rules: RuleSet) -> Projection {
    let opts = ExploreOptions { rules, ..ExploreOptions::default() };
    let ts = explore(agent, &[], &opts).expect("exploration fits the state limit");
    ts.states
        .iter()
        .map(|cfg| {
            let beliefs = cfg.beliefs.iter().map(|a| a.to_string()).collect();
            let mut bodies: Vec<String> = cfg.intentions.values().map(|i| i.body.canonical()).collect();
            bodies.sort();
            (beliefs, bodies)
        })
        .collect()
}

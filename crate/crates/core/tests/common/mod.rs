#![allow(dead_code)]

use ceti::domain::Domains;
use ceti::minilang::Valuation;
use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed proptest configuration without regression files.
pub fn config(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

/// Every point of the product of `domains`, lexicographic in domain order.
pub fn points(domains: &Domains) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for (name, dom) in &domains.0 {
        out = out
            .into_iter()
            .flat_map(|v| {
                dom.values().map(move |x| {
                    let mut w = v.clone();
                    w.insert(name.clone(), x);
                    w
                })
            })
            .collect();
    }
    out
}

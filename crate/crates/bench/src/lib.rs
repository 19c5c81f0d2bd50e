//! Shared fixtures for the benchmarks.

use cpinfluence::{simulate, ActivityIndex, LikelihoodWorkspace, SimConfig};

pub fn sim_config(n: usize, topics: usize) -> SimConfig {
    SimConfig {
        n,
        topics,
        seed: 17,
        ..SimConfig::default()
    }
}

/// A simulated log with its index and likelihood cache.
pub fn workspace(n: usize, topics: usize) -> LikelihoodWorkspace {
    let data = simulate(&sim_config(n, topics), 0).expect("simulation");
    let index = ActivityIndex::build(&data.log, &data.network).expect("index");
    LikelihoodWorkspace::from_index(&data.log, &data.network, &index).expect("workspace")
}

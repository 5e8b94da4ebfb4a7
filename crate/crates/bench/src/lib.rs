//! Shared fixtures for the benchmarks.

use eleanor_core::agents::{random_plan_instance, PlanInstance};
use eleanor_core::{EpisodicLinearMDP, SpdMatrix};

/// Planner instance with the largest shape the grid oracle still accepts.
pub fn plan_instance(index: u64) -> PlanInstance {
    random_plan_instance(11, index, 3, 2, 50).expect("valid instance")
}

/// `lambda * I + sum of n deterministic outer products` in dimension `dim`.
pub fn gram(dim: usize, n: usize) -> SpdMatrix {
    let mut m = SpdMatrix::scaled_identity(dim, 1.0);
    for i in 0..n {
        m.add_outer(&feature(dim, i)).expect("dims agree");
    }
    m
}

pub fn feature(dim: usize, i: usize) -> Vec<f64> {
    (0..dim).map(|j| (((i * 31 + j * 17) % 13) as f64 - 6.0) / 13.0).collect()
}

pub fn linear_env() -> EpisodicLinearMDP {
    eleanor_core::envs::make_linear_mdp(3, 6, 2, 3, 7).expect("valid env")
}

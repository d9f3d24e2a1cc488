//! Shared fixtures for the benchmarks.

use fpp_core::{default_grading, ManufacturedCase, ProblemConfig, StateVector};

/// Manufactured problem on an `n × n` grid with the default grading.
pub fn manufactured(alpha: f64, n: usize) -> (ProblemConfig, StateVector, StateVector) {
    let case = ManufacturedCase::unit(alpha);
    let config = case
        .config(n, n, default_grading(alpha))
        .expect("valid benchmark configuration");
    let u0 = config.grid().sample(|x| case.initial(x));
    let psi = config.grid().sample(|x| case.terminal(x));
    (config, u0, psi)
}

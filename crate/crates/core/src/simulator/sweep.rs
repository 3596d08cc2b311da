use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{consensus_verdict, simulate, SimError, SwitchedClosedLoop};
use crate::par;

/// Uniform on `[−1, 1]` per coordinate, reproducible from `seed`.
pub fn random_initial_state(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub seed: u64,
    pub passed: bool,
    pub ratio: f64,
    pub final_norm: f64,
}

fn run_one(
    cl: &SwitchedClosedLoop,
    seed: u64,
    dt: f64,
    tol: f64,
    window: f64,
) -> Result<SweepOutcome, SimError> {
    let x0 = random_initial_state(seed, cl.agents() * cl.state_dim());
    let tr = simulate(cl, &x0, dt)?;
    let v = consensus_verdict(&tr, tol, window);
    Ok(SweepOutcome {
        seed,
        passed: v.passed,
        ratio: v.ratio,
        final_norm: v.final_norm,
    })
}

/// One simulation per seed, run in parallel when the `parallel` feature is
/// enabled. Results follow the order of `seeds`.
pub fn sweep(
    cl: &SwitchedClosedLoop,
    seeds: &[u64],
    dt: f64,
    tol: f64,
    window: f64,
) -> Vec<Result<SweepOutcome, SimError>> {
    par::map(seeds, |&s| run_one(cl, s, dt, tol, window))
}

/// Single-threaded reference for [`sweep`].
pub fn sweep_seq(
    cl: &SwitchedClosedLoop,
    seeds: &[u64],
    dt: f64,
    tol: f64,
    window: f64,
) -> Vec<Result<SweepOutcome, SimError>> {
    par::map_seq(seeds, |&s| run_one(cl, s, dt, tol, window))
}

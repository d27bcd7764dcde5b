//! Shared inputs for the benchmarks.

use intervals::monsat::{random_formula, Formula};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reproducible random monotone formulas with exactly `vars` variables.
pub fn formulas(vars: usize, count: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(vars as u64);
    (0..count)
        .map(|_| random_formula(&mut rng, vars, 2 * vars))
        .collect()
}

//! Path-level Monte Carlo: killed walks, exactly conditioned paths and
//! localisation statistics.

mod conditioned;
mod experiment;
mod stats;

pub use conditioned::{choose_extent, sample_conditioned, ConditionedSampler};
pub use experiment::{
    localization_experiment, replica_rng, replica_seed, ExperimentOptions, Quantiles, ReplicaRow,
    Summary, CSV_HEADER,
};
pub use stats::{exits_after, path_stats, Excursion, PathStats};

use crate::env::Environment;
use crate::survival::KillMode;
use rand::Rng;

/// Plain simulation of the killed walk from 0.
///
/// Each step draws the direction first and then, only on arrival at an
/// obstacle, the survival trial. In bold mode arriving at a site `<= 0` kills
/// without a draw. On death the path ends at the killing site.
pub fn sample_direct<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    beta: f64,
    rng: &mut R,
    mode: KillMode,
) -> (Vec<i64>, bool) {
    let kb = (-beta).exp();
    let mut path = Vec::with_capacity(n as usize + 1);
    let mut x = 0i64;
    path.push(x);
    for _ in 0..n {
        x += if rng.random::<bool>() { 1 } else { -1 };
        path.push(x);
        if mode == KillMode::Bold && x <= 0 {
            return (path, false);
        }
        if env.is_obstacle(x.unsigned_abs()) && rng.random::<f64>() >= kb {
            return (path, false);
        }
    }
    (path, true)
}

//! Environment families used by the checks.

use crate::env::{good_events, Environment, GoodParams, ZipfLaw};
use crate::error::{Error, Result};
use crate::gapsel::{select_growing, GapSelection};
use crate::mrp::plant;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A truncated environment together with the selection it came from.
#[derive(Debug, Clone)]
pub struct GoodEnv {
    pub seed: u64,
    pub env: Environment,
    pub env_bar: Environment,
    pub sel: GapSelection,
}

/// First `count` sampled environments, scanning seeds from `seed0`, that
/// satisfy the first four regularity events at horizon `n` and have an
/// optimal gap away from the origin (`ell0 >= 2`).
pub fn good_envs(
    gamma: f64,
    n: u64,
    beta: f64,
    count: usize,
    seed0: u64,
    params: &GoodParams,
) -> Result<Vec<GoodEnv>> {
    let mut out = Vec::with_capacity(count);
    let max_tries = 200 * count.max(1) as u64;
    for seed in seed0..seed0 + max_tries {
        if out.len() == count {
            break;
        }
        let env = Environment::sample(gamma, 64, seed)?;
        let (env, sel) = match select_growing(&env, n, beta, 0) {
            Ok(v) => v,
            Err(Error::Range(_)) => continue,
            Err(e) => return Err(e),
        };
        if sel.ell0 < 2 || !good_events(&env, n, params, Some(&sel))?.all_good() {
            continue;
        }
        let env_bar = env.truncate(sel.k0)?;
        out.push(GoodEnv {
            seed,
            env,
            env_bar,
            sel,
        });
    }
    if out.len() < count {
        return Err(Error::Range(format!(
            "only {} of {count} good environments among {max_tries} seeds (gamma {gamma}, n {n})",
            out.len()
        )));
    }
    Ok(out)
}

/// Truncated environment with an optimal gap `t1`, side gaps drawn from the
/// gap law conditioned to stay below `(1 - rho) t1`, and one right gap set to
/// `t1 / 2` so that the second largest gap lies in `(rho t1, (1 - rho) t1)`.
pub fn planted_random(
    gamma: f64,
    t1: u64,
    left: usize,
    right: usize,
    rho: f64,
    seed: u64,
) -> Result<Environment> {
    let law = ZipfLaw::new(gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = (((1.0 - rho) * t1 as f64).floor() as u64).max(1);
    let mut draw = |k: usize| -> Vec<u64> {
        (0..k)
            .map(|_| loop {
                let t = law.sample(&mut rng);
                if t <= cap {
                    break t;
                }
            })
            .collect()
    };
    let l = draw(left);
    let mut r = draw(right);
    if let Some(x) = r.first_mut() {
        *x = (t1 / 2).max(1);
    }
    plant(gamma, &l, t1, &r)
}

/// Side gaps at fixed fractions of `t1`, so the geometry scales with `t1`.
pub fn planted_scaled(t1: u64) -> Result<Environment> {
    let scale = |fr: &[f64]| -> Vec<u64> {
        fr.iter()
            .map(|f| ((f * t1 as f64).round() as u64).max(1))
            .collect()
    };
    let left = scale(&[0.3, 0.6, 0.45, 0.2]);
    let right = scale(&[0.5, 0.35, 0.7]);
    plant(1.5, &left, t1, &right)
}

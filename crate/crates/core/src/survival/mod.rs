//! Exact survival probabilities, hitting-before-death probabilities,
//! Lyapunov exponents and the homogeneous free energy.

mod hitting;
mod homogeneous;
mod lattice;

pub use hitting::{hit_before_death, log_hit_profile, lyapunov, lyapunov_estimate};
pub use homogeneous::{phi_hom, rough_ub, ROUGH_UB_C};
pub use lattice::{KillMode, Layer, SurvivalLattice};

use crate::env::Environment;
use crate::error::{domain, Result};

/// `log(e^a - e^b)` for `a >= b`; `-inf` when the difference vanishes.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d >= 0.0 {
        return f64::NEG_INFINITY;
    }
    a + (-d.exp_m1()).ln()
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain!("beta must be positive and finite, got {beta}"));
    }
    Ok(())
}

/// `log Z_n`: log-probability that the walk from 0 survives `n` steps.
pub fn survive_exact(env: &Environment, n: u64, beta: f64, mode: KillMode) -> Result<f64> {
    Ok(*survival_profile(env, n, beta, mode)?.last().unwrap())
}

/// `log Z_m` for `m = 0..=n`.
pub fn survival_profile(env: &Environment, n: u64, beta: f64, mode: KillMode) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let lat = SurvivalLattice::new(env, beta, mode, n as i64 + 1)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    lat.run_forward(0, n, |_, l| out.push(l.log_total()));
    Ok(out)
}

/// `log P(sigma ∧ H_barrier > n)` in bold mode; the barrier site kills.
pub fn survive_restricted(env: &Environment, n: u64, beta: f64, barrier: u64) -> Result<f64> {
    check_beta(beta)?;
    if barrier == 0 {
        return Err(domain!("barrier must be positive"));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let lat = SurvivalLattice::new(env, beta, KillMode::Bold, (barrier - 1).min(n + 1) as i64)?;
    Ok(lat.run_forward(0, n, |_, _| {}).log_total())
}

/// `log Z_n^{(k)}` for record ranks `k = 1..=K`: survival with the last
/// record base reached before time `n` being `tau*_k`.
///
/// The base `tau*_1 = 0` counts as reached at time 0, and the last record has
/// no successor so its term is `Z_n - P(H*_K > n)`. The terms sum to `Z_n`.
pub fn record_decomposition(env: &Environment, n: u64, beta: f64) -> Result<Vec<f64>> {
    let rec = env.records();
    let restricted = |k: usize| -> Result<f64> {
        let base = rec.bases[k];
        if base == 0 {
            Ok(f64::NEG_INFINITY)
        } else {
            survive_restricted(env, n, beta, base)
        }
    };
    let z = survive_exact(env, n, beta, KillMode::Bold)?;
    let mut out = Vec::with_capacity(rec.len());
    for k in 0..rec.len() {
        let upper = if k + 1 < rec.len() {
            restricted(k + 1)?
        } else {
            z
        };
        out.push(log_diff_exp(upper, restricted(k)?));
    }
    Ok(out)
}

/// `log P_{tau_r}(sigma ∧ H_{tau_k} ∧ H_{tau_ell} > n)` in soft mode.
pub fn survive_window(
    env: &Environment,
    n: u64,
    beta: f64,
    k: usize,
    r: usize,
    ell: usize,
) -> Result<f64> {
    check_beta(beta)?;
    if !(k < r && r < ell) {
        return Err(domain!("need k < r < ell, got {k}, {r}, {ell}"));
    }
    let pos = |i: usize| {
        env.position(i)
            .ok_or_else(|| crate::Error::Range(format!("obstacle {i} beyond the environment")))
    };
    let (a, s, b) = (pos(k)?, pos(r)?, pos(ell)?);
    let kb = (-beta).exp();
    let ws: Vec<f64> = (a + 1..b)
        .map(|x| if env.is_obstacle(x) { kb } else { 1.0 })
        .collect();
    let lat = SurvivalLattice::from_weights(a as i64 + 1, &ws);
    Ok(lat.run_forward(s as i64, n, |_, _| {}).log_total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sum of path weights over all 2^n paths.
    fn enumerate(env: &Environment, n: u32, beta: f64, mode: KillMode) -> f64 {
        let kb = (-beta).exp();
        let mut total = 0.0;
        for bits in 0u64..(1 << n) {
            let mut x = 0i64;
            let mut w = 1.0;
            for s in 0..n {
                x += if bits >> s & 1 == 1 { 1 } else { -1 };
                if mode == KillMode::Bold && x <= 0 {
                    w = 0.0;
                    break;
                }
                if env.is_obstacle(x.unsigned_abs()) {
                    w *= kb;
                }
            }
            total += w / (1u64 << n) as f64;
        }
        total
    }

    #[test]
    fn periodic_two_steps() {
        let env = Environment::periodic(3, 10).unwrap();
        for beta in [0.3, 1.0, 4.0] {
            let z = survive_exact(&env, 2, beta, KillMode::Soft).unwrap().exp();
            assert!((z - (0.5 + 0.5 * (-beta).exp())).abs() < 1e-15);
        }
        assert_eq!(survive_exact(&env, 0, 1.0, KillMode::Soft).unwrap(), 0.0);
    }

    #[test]
    fn bold_first_step() {
        let env = Environment::from_gaps(1.5, vec![3, 4, 5]).unwrap();
        assert!((survive_exact(&env, 1, 2.0, KillMode::Bold).unwrap().exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let gaps: Vec<u64> = (0..8).map(|_| rng.random_range(1..5)).collect();
            let env = Environment::from_gaps(1.0, gaps).unwrap();
            let beta = rng.random_range(0.1..3.0);
            for mode in [KillMode::Bold, KillMode::Soft] {
                for n in [1u32, 5, 12] {
                    let dp = survive_exact(&env, n as u64, beta, mode).unwrap().exp();
                    let en = enumerate(&env, n, beta, mode);
                    assert!((dp - en).abs() <= 1e-13, "{mode:?} n={n}: {dp} vs {en}");
                }
            }
        }
    }

    #[test]
    fn restricted_edge_cases() {
        let env = Environment::from_gaps(1.5, vec![2, 3, 1, 4, 6, 2, 9]).unwrap();
        assert_eq!(
            survive_restricted(&env, 3, 1.0, 1).unwrap(),
            f64::NEG_INFINITY
        );
        let free = survive_exact(&env, 12, 0.7, KillMode::Bold).unwrap();
        let far = survive_restricted(&env, 12, 0.7, 13).unwrap();
        assert!((free - far).abs() < 1e-14);
    }

    #[test]
    fn record_terms_telescope() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let gaps: Vec<u64> = (0..12).map(|_| rng.random_range(1..8)).collect();
            let env = Environment::from_gaps(1.0, gaps).unwrap();
            for n in [5u64, 30, 80] {
                let parts = record_decomposition(&env, n, 0.8).unwrap();
                let sum: f64 = parts.iter().map(|x| x.exp()).sum();
                let z = survive_exact(&env, n, 0.8, KillMode::Bold).unwrap().exp();
                assert!((sum - z).abs() <= 1e-12, "n={n}: {sum} vs {z}");
            }
        }
    }

    #[test]
    fn homogeneous_rate() {
        let env = Environment::periodic(5, 3000).unwrap();
        let n = 10_000;
        let rate = -survive_exact(&env, n, 1.0, KillMode::Soft).unwrap() / n as f64;
        let phi = phi_hom(1.0, 5).unwrap();
        assert!((rate / phi - 1.0).abs() < 0.02, "rate {rate} phi {phi}");
    }

    #[test]
    fn monte_carlo_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 200u64;
        for _ in 0..20 {
            let env = Environment::sample(1.5, 400, rng.random()).unwrap();
            let beta = 1.0;
            let p = survive_exact(&env, n, beta, KillMode::Bold).unwrap().exp();
            let trials = 100_000;
            let kb = (-beta as f64).exp();
            let mut alive = 0u32;
            for _ in 0..trials {
                let mut x = 0i64;
                let mut ok = true;
                for _ in 0..n {
                    x += if rng.random::<bool>() { 1 } else { -1 };
                    if x <= 0 || (env.is_obstacle(x as u64) && rng.random::<f64>() >= kb) {
                        ok = false;
                        break;
                    }
                }
                alive += ok as u32;
            }
            let freq = alive as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1e-12);
            assert!((freq - p).abs() <= 4.0 * sigma, "freq {freq} exact {p}");
        }
    }

    #[test]
    fn window_degenerate() {
        let env = Environment::from_gaps(1.0, vec![3, 4, 2]).unwrap();
        let v = survive_window(&env, 10, 1.0, 0, 1, 2).unwrap();
        assert!(v < 0.0 && v.is_finite());
        assert!(survive_window(&env, 10, 1.0, 1, 1, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn monotone_in_time_beta_and_obstacles(
            gaps in proptest::collection::vec(1u64..6, 3..20),
            beta in 0.05f64..3.0,
            extra in 1u64..40,
            n in 1u64..80,
        ) {
            let env = Environment::from_gaps(1.0, gaps.clone()).unwrap();
            let prof = survival_profile(&env, n, beta, KillMode::Bold).unwrap();
            for w in prof.windows(2) { prop_assert!(w[1] <= w[0] + 1e-12); }
            let z = prof[n as usize];
            let zb = survive_exact(&env, n, beta * 1.3, KillMode::Bold).unwrap();
            prop_assert!(zb <= z + 1e-12);
            // Split one gap in two: one more obstacle.
            let mut denser = gaps.clone();
            let i = (extra as usize) % denser.len();
            if denser[i] >= 2 {
                let a = denser[i] / 2;
                denser[i] -= a;
                denser.insert(i, a);
                let e2 = Environment::from_gaps(1.0, denser).unwrap();
                prop_assert!(survive_exact(&e2, n, beta, KillMode::Bold).unwrap() <= z + 1e-12);
            }
            let barrier = env.positions()[1 + (extra as usize) % (env.len())];
            prop_assert!(survive_restricted(&env, n, beta, barrier).unwrap() <= z + 1e-12);
        }
    }
}

//! Probabilities of reaching an obstacle before death, and the Lyapunov
//! exponents built from them.

use crate::env::Environment;
use crate::error::{Error, Result};

fn gap(env: &Environment, i: usize) -> Result<f64> {
    env.gap(i)
        .map(|g| g as f64)
        .ok_or_else(|| Error::Range(format!("gap {i} beyond the environment")))
}

/// `P_0(H_{tau_ell} < sigma)` in bold mode, by a tridiagonal solve over the
/// obstacle indices `1..ell`.
pub fn hit_before_death(env: &Environment, beta: f64, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Range("obstacle index must be >= 1".into()));
    }
    let kb = (-beta).exp();
    let first = kb / (2.0 * gap(env, 1)?);
    if ell == 1 {
        return Ok(first);
    }
    // Unknowns p_1..p_{ell-1}: probability to reach tau_ell alive after arriving at tau_i.
    let m = ell - 1;
    let mut diag = Vec::with_capacity(m);
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for i in 1..=m {
        let left = 1.0 / (2.0 * gap(env, i)?);
        let right = 1.0 / (2.0 * gap(env, i + 1)?);
        diag.push(1.0 - kb * (1.0 - left - right));
        lower.push(-kb * left);
        upper.push(-kb * right);
    }
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = -upper[m - 1];
    // Thomas algorithm.
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let l = if i > 0 { lower[i] } else { 0.0 };
        let denom = diag[i] - l * if i > 0 { c[i - 1] } else { 0.0 };
        if !(denom > 0.0) {
            return Err(Error::Numeric(format!(
                "non-positive pivot {denom} at row {i}"
            )));
        }
        c[i] = if i + 1 < m { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - l * if i > 0 { d[i - 1] } else { 0.0 }) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(first * d[0])
}

/// `log P_0(H_{tau_ell} < sigma)` for `ell = 0..=ell_max`, with the value 0 at `ell = 0`.
///
/// Uses the one-step recursion for `r_j`, the probability of moving on from
/// `tau_j` to `tau_{j+1}` alive, which only involves the environment to the
/// left of `tau_{j+1}`. All terms are positive, so there is no cancellation.
pub fn log_hit_profile(env: &Environment, beta: f64, ell_max: usize) -> Result<Vec<f64>> {
    let kb = (-beta).exp();
    let mut out = Vec::with_capacity(ell_max + 1);
    out.push(0.0);
    if ell_max == 0 {
        return Ok(out);
    }
    let mut acc = (kb / (2.0 * gap(env, 1)?)).ln();
    out.push(acc);
    let mut r = 0.0;
    let mut left = 1.0 / (2.0 * gap(env, 1)?);
    for j in 1..ell_max {
        let right = 1.0 / (2.0 * gap(env, j + 1)?);
        let stay = 1.0 - left - right;
        r = kb * right / (1.0 - kb * (stay + left * r));
        acc += r.ln();
        out.push(acc);
        left = right;
    }
    Ok(out)
}

/// `lambda(beta, ell) = -log P(H_{tau_ell} < sigma) / ell`; `+inf` if the probability is 0.
pub fn lyapunov(env: &Environment, beta: f64, ell: usize) -> Result<f64> {
    let p = log_hit_profile(env, beta, ell)?;
    let v = p[ell];
    Ok(if v == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        -v / ell as f64
    })
}

/// Plug-in estimate `lambda(beta, L)` over all stored gaps.
pub fn lyapunov_estimate(env: &Environment, beta: f64) -> Result<f64> {
    lyapunov(env, beta, env.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_gaps() {
        let env = Environment::from_gaps(1.0, vec![1; 10]).unwrap();
        for beta in [0.2, 1.0, 3.0] {
            let kb = (-beta as f64).exp();
            assert!((hit_before_death(&env, beta, 1).unwrap() - kb / 2.0).abs() < 1e-15);
            assert!((hit_before_death(&env, beta, 2).unwrap() - kb * kb / 4.0).abs() < 1e-15);
            let three = kb.powi(3) / (2.0 * (4.0 - kb * kb));
            assert!((hit_before_death(&env, beta, 3).unwrap() - three).abs() < 1e-15);
            for ell in [1, 2] {
                assert!((lyapunov(&env, beta, ell).unwrap() - beta - 2f64.ln()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_three_obstacles() {
        let env = Environment::from_gaps(1.0, vec![1; 4]).unwrap();
        let beta = 0.5f64;
        let kb = (-beta).exp();
        let p = kb.powi(3) / (2.0 * (4.0 - kb * kb));
        assert!((hit_before_death(&env, beta, 3).unwrap() - p).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 1_000_000;
        let mut hits = 0u32;
        for _ in 0..trials {
            let mut x = 0i64;
            loop {
                x += if rng.random::<bool>() { 1 } else { -1 };
                if x <= 0 || rng.random::<f64>() >= kb {
                    break;
                }
                if x == 3 {
                    hits += 1;
                    break;
                }
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma, "freq {freq} exact {p}");
    }

    #[test]
    fn beyond_the_environment() {
        let env = Environment::from_gaps(1.0, vec![2, 3]).unwrap();
        assert!(hit_before_death(&env, 1.0, 3).is_err());
        assert!(hit_before_death(&env, 1.0, 0).is_err());
    }

    #[test]
    fn lyapunov_at_least_beta_on_random_envs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let env = Environment::sample(rng.random_range(0.3..2.5), 300, rng.random()).unwrap();
            let beta = rng.random_range(0.05..4.0);
            let prof = log_hit_profile(&env, beta, 300).unwrap();
            for ell in 1..=300 {
                let lam = -prof[ell] / ell as f64;
                assert!(
                    lam.is_finite() && lam >= beta,
                    "ell={ell} lambda={lam} beta={beta}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn recursion_matches_tridiagonal_solve(
            gaps in proptest::collection::vec(1u64..30, 1..120),
            beta in 0.01f64..5.0,
        ) {
            let env = Environment::from_gaps(1.0, gaps.clone()).unwrap();
            let prof = log_hit_profile(&env, beta, gaps.len()).unwrap();
            // The linear solve underflows long before the log recursion does.
            for ell in (1..=gaps.len()).take_while(|&l| prof[l] > -600.0) {
                let direct = hit_before_death(&env, beta, ell).unwrap().ln();
                prop_assert!((direct - prof[ell]).abs() <= 1e-9 * prof[ell].abs().max(1.0),
                    "ell={} {} vs {}", ell, direct, prof[ell]);
            }
        }
    }
}

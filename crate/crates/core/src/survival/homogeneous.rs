//! Equally spaced obstacles.

use crate::env::Environment;
use crate::error::{domain, Result};
use crate::root::bisect;
use crate::ruin::{Part, RuinKernel};

/// Prefactor of [`rough_ub`], fitted on held-out instances.
pub const ROUGH_UB_C: f64 = 0.0625;

/// Free energy of obstacles on `t Z` (soft kill): the root of `qhat_t(phi) = e^beta`.
///
/// Widths 1 and 2 have a deterministic first return and give `beta / t`.
pub fn phi_hom(beta: f64, t: u64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain!("beta must be positive, got {beta}"));
    }
    match t {
        0 => Err(domain!("width must be >= 1")),
        1 | 2 => Ok(beta / t as f64),
        _ => {
            let k = RuinKernel::new(t)?;
            let target = beta.exp();
            let (lo, hi) = bisect(0.0, k.g(), 1e-14, |f| {
                f > 0.0 && k.qhat(f, Part::Total).map_or(true, |v| v >= target)
            });
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Upper bound `log(C n^2 (ell - k)) - phi(beta, max gap in (k, ell]) n` on
/// the log-survival between the obstacles `tau_k` and `tau_ell`.
pub fn rough_ub(
    env: &Environment,
    n: u64,
    k: usize,
    r: usize,
    ell: usize,
    beta: f64,
) -> Result<f64> {
    if !(k < r && r < ell) || n == 0 {
        return Err(domain!("need k < r < ell and n >= 1"));
    }
    let tmax = (k + 1..=ell)
        .map(|i| {
            env.gap(i)
                .ok_or_else(|| crate::Error::Range(format!("gap {i} beyond the environment")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap();
    let nf = n as f64;
    Ok((ROUGH_UB_C * nf * nf * (ell - k) as f64).ln() - phi_hom(beta, tmax)? * nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn residual_and_expansion() {
        let phi = phi_hom(1.0, 25).unwrap();
        let k = RuinKernel::new(25).unwrap();
        assert!((k.qhat(phi, Part::Total).unwrap() - 1f64.exp()).abs() <= 1e-10 * 1f64.exp());
        let t = 200.0;
        let phi = phi_hom(1.0, 200).unwrap();
        let factor = t * (1.0 - 2.0 * t * t * phi / (PI * PI)) * (1f64.exp() - 1.0) / 4.0;
        assert!((factor - 1.0).abs() < 0.10, "factor {factor}");
    }

    #[test]
    fn decreasing_in_width() {
        let v: Vec<f64> = (3..=50).map(|t| phi_hom(1.0, t).unwrap()).collect();
        for w in v.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(phi_hom(1.0, 2).unwrap() > v[0]);
        assert_eq!(phi_hom(1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn window_monotonicity() {
        let env = Environment::from_gaps(1.0, vec![2, 5, 3, 9, 4, 1]).unwrap();
        let a = rough_ub(&env, 50, 1, 2, 3, 1.0).unwrap();
        let b = rough_ub(&env, 50, 1, 2, 4, 1.0).unwrap();
        let c = rough_ub(&env, 50, 0, 2, 5, 1.0).unwrap();
        assert!(a <= b && b <= c);
        assert!(rough_ub(&env, 50, 2, 3, 4, 1.0).unwrap().is_finite());
        assert!(rough_ub(&env, 50, 2, 2, 4, 1.0).is_err());
    }
}

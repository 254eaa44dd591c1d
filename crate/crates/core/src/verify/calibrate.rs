//! Fitted constants and the measurements they are fitted from.
//!
//! Each constant is twice the worst value seen on a calibration set; the
//! checks then run on environments drawn from a disjoint seed range.

use super::envs::{good_envs, planted_random};
use crate::env::{Environment, GoodParams};
use crate::error::Result;
use crate::mrp::{partition_functions, MrKernel, RenewalMass, ThetaTable};
use crate::survival::{rough_ub, survive_window, ROUGH_UB_C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::Range;

pub const SAFETY: f64 = 2.0;

pub const CALIBRATION_SEEDS: Range<u64> = 1_000..1_010;
pub const CHECK_SEEDS: Range<u64> = 2_000..2_010;

/// `P_a(k in theta) T1^3` stays in `[1/C, C]` for `k in [T1^3, 6 T1^3]`.
pub const MASS_RENEWAL_C: f64 = 16.95;
/// `Z_k e^{phi k} T1` stays in `[1/C, C]` for `k in [2 T1^3, 6 T1^3]`.
pub const UNPINNED_C: f64 = 6.21;
/// Bound on `max_k Theta(n, k)` at `rho = 0.1`.
pub const THETA_C: f64 = 2.006;

pub const MASS_T1: [u64; 2] = [11, 21];
pub const THETA_N: u64 = 100_000;
pub const THETA_GAMMAS: [f64; 2] = [1.5, 0.5];

/// Smallest and largest value of a scaled sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    fn of(it: impl Iterator<Item = f64>) -> Self {
        it.fold(
            Span {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |s, x| Span {
                min: s.min.min(x),
                max: s.max.max(x),
            },
        )
    }

    /// Smallest `C` with the span inside `[1/C, C]`.
    pub fn constant(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }

    fn join(self, o: Span) -> Span {
        Span {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }
}

/// Planted environment number `seed` of the mass-renewal family.
pub fn mass_env(t1: u64, seed: u64) -> Result<Environment> {
    planted_random(1.5, t1, 12, 8, 0.1, seed)
}

/// Scaled pinned and free partition functions on one environment.
pub fn mass_spans(env_bar: &Environment, beta: f64) -> Result<(Span, Span)> {
    let kern = MrKernel::new(env_bar, beta)?;
    let t1 = kern.t1();
    let t3 = t1.pow(3);
    let k_max = 6 * t3;
    let t3f = t3 as f64;
    let lower_ok = |k: u64| k % 2 == 0 || t1 % 2 == 1;
    let mut pinned: Option<Span> = None;
    for a in 0..2 {
        let r = RenewalMass::compute(&kern, k_max, a)?;
        let s = Span::of((t3..=k_max).filter(|&k| lower_ok(k)).map(|k| r.at(k) * t3f));
        pinned = Some(pinned.map_or(s, |p| p.join(s)));
    }
    let (free, _) = partition_functions(&kern, k_max)?;
    let phi = kern.phi();
    let free =
        Span::of((2 * t3..=k_max).map(|k| (free[k as usize] + phi * k as f64).exp() * t1 as f64));
    Ok((pinned.unwrap(), free))
}

/// Joined spans over `t1 in MASS_T1` and the given seeds.
pub fn mass_spans_over(seeds: Range<u64>, beta: f64) -> Result<(Span, Span)> {
    let mut acc: Option<(Span, Span)> = None;
    for &t1 in &MASS_T1 {
        for seed in seeds.clone() {
            let (p, f) = mass_spans(&mass_env(t1, seed)?, beta)?;
            acc = Some(acc.map_or((p, f), |(a, b)| (a.join(p), b.join(f))));
        }
    }
    Ok(acc.unwrap())
}

/// `max_k Theta(n, k)` on the good environments of one seed range; envs
/// with `2 T1^2 > n` are skipped.
pub fn theta_maxima(seed0: u64, count: usize, n: u64, beta: f64) -> Result<Vec<(f64, u64, f64)>> {
    let params = GoodParams::default();
    let mut out = Vec::new();
    for &gamma in &THETA_GAMMAS {
        let mut got = 0;
        let mut s = seed0;
        while got < count {
            let batch = good_envs(gamma, n, beta, 1, s, &params)?;
            let g = &batch[0];
            s = g.seed + 1;
            if 2 * g.sel.t1 * g.sel.t1 > n {
                continue;
            }
            let kern = MrKernel::new(&g.env_bar, beta)?;
            out.push((gamma, g.sel.t1, ThetaTable::new(&kern, n)?.max()));
            got += 1;
        }
    }
    Ok(out)
}

/// `exp(exact - bound)` with the prefactor set to 1, over random windows.
/// `seed` 1 is the calibration set for [`ROUGH_UB_C`].
pub fn rough_ub_ratios(seed: u64, count: usize, beta: f64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let env = Environment::sample(1.5, 40, rng.random())?;
        let n = rng.random_range(1..=200u64);
        let k = rng.random_range(0..20usize);
        let r = rng.random_range(k + 1..k + 6);
        let ell = rng.random_range(r + 1..r + 8);
        let exact = survive_window(&env, n, beta, k, r, ell)?;
        let bound = rough_ub(&env, n, k, r, ell, beta)? - ROUGH_UB_C.ln();
        out.push((exact - bound).exp());
    }
    Ok(out)
}

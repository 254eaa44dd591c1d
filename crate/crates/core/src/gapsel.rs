//! Selection of the optimal gap from the score
//! `G(ell) = lambda(beta, ell-1)(ell-1)/N + g(T_ell) n/N` and its simplified
//! twin with a constant Lyapunov exponent and `pi^2/(2T^2)` in place of `g`.

use crate::env::{Environment, Tail};
use crate::error::{Error, Result};
use crate::ruin;
use crate::survival::{log_hit_profile, lyapunov};
use serde::Serialize;
use std::f64::consts::PI;

const MAX_WINDOW: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSelection {
    pub n: u64,
    pub beta: f64,
    /// `N = n^{gamma/(gamma+2)}`.
    pub big_n: f64,
    pub ell0: usize,
    pub ell0_tilde: usize,
    /// Record rank of `ell0`.
    pub k0: usize,
    pub t1: u64,
    /// Largest other gap before the next record; `None` if the next record is not stored.
    pub t2: Option<u64>,
    /// Index of the next record `i(k0 + 1)`, if stored.
    pub next_record: Option<usize>,
    /// Open localisation interval `(iloc_lo, iloc_hi)`.
    pub iloc_lo: u64,
    pub iloc_hi: u64,
    /// Number of scanned gaps.
    pub window: usize,
    pub g_values: Vec<f64>,
    pub gtilde_values: Vec<f64>,
    pub lambda_est: f64,
    pub agree: bool,
    /// Both minimisers are strict.
    pub unique: bool,
}

/// `N = n^{gamma/(gamma+2)}`.
pub fn scale(gamma: f64, n: u64) -> f64 {
    (n as f64).powf(gamma / (gamma + 2.0))
}

/// `g(T)`, with `g(3)` standing in for gaps of width 1 and 2.
pub fn rate_with_surrogate(t: u64) -> f64 {
    ruin::g(t.max(ruin::MIN_WIDTH)).expect("width >= 3")
}

fn gap_of(env: &Environment, ell: usize) -> Result<u64> {
    env.gap(ell)
        .ok_or_else(|| Error::Range(format!("gap {ell} beyond the environment")))
}

pub fn score_g(env: &Environment, n: u64, beta: f64, ell: usize) -> Result<f64> {
    let t = gap_of(env, ell)?;
    let big_n = scale(env.gamma(), n);
    let first = if ell == 1 {
        0.0
    } else {
        lyapunov(env, beta, ell - 1)? * (ell - 1) as f64
    };
    Ok(first / big_n + rate_with_surrogate(t) * n as f64 / big_n)
}

pub fn score_gtilde(
    env: &Environment,
    n: u64,
    _beta: f64,
    ell: usize,
    lambda_est: f64,
) -> Result<f64> {
    let t = gap_of(env, ell)? as f64;
    let big_n = scale(env.gamma(), n);
    Ok(lambda_est * (ell - 1) as f64 / big_n + PI * PI / (2.0 * t * t) * n as f64 / big_n)
}

/// Smallest index of the minimum and whether it is strict.
fn argmin(v: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    let strict = v.iter().enumerate().all(|(i, &x)| i == best || x > v[best]);
    (best, strict)
}

fn scan(env: &Environment, n: u64, beta: f64, window: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let big_n = scale(env.gamma(), n);
    let nf = n as f64;
    let prof = log_hit_profile(env, beta, window)?;
    let lambda_est = -prof[window] / window as f64;
    let mut g = Vec::with_capacity(window);
    let mut gt = Vec::with_capacity(window);
    for ell in 1..=window {
        let t = gap_of(env, ell)?;
        g.push(-prof[ell - 1] / big_n + rate_with_surrogate(t) * nf / big_n);
        let tf = t as f64;
        gt.push(lambda_est * (ell - 1) as f64 / big_n + PI * PI / (2.0 * tf * tf) * nf / big_n);
    }
    Ok((g, gt, lambda_est))
}

/// Minimises both scores over a window that provably contains the minimisers.
///
/// The window doubles until `beta L / N` exceeds the current minimum by 1 for
/// both scores. On an environment with an open tail the window cannot pass the
/// stored gaps; running out is a range error.
pub fn select(env: &Environment, n: u64, beta: f64) -> Result<GapSelection> {
    if n == 0 || !(beta > 0.0) {
        return Err(crate::error::domain!("need n >= 1 and beta > 0"));
    }
    let big_n = scale(env.gamma(), n);
    let limit = match env.tail() {
        Tail::Open => env.len(),
        Tail::Unit => MAX_WINDOW,
    };
    let mut window = 64.min(limit).max(1);
    let (g, gt, lambda_est) = loop {
        let (g, gt, lam) = scan(env, n, beta, window)?;
        let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
        let gtmin = gt.iter().copied().fold(f64::INFINITY, f64::min);
        let reach = window as f64 / big_n;
        if beta * reach > gmin + 1.0 && lam * reach > gtmin + 1.0 {
            break (g, gt, lam);
        }
        if window >= limit {
            return Err(Error::Range(format!(
                "scan window exhausted at {window} gaps (N = {big_n:.3}, min G = {gmin:.3}, needs beta L / N > {:.3})",
                gmin + 1.0
            )));
        }
        window = (2 * window).min(limit);
    };
    let (i0, u0) = argmin(&g);
    let (it, ut) = argmin(&gt);
    let ell0 = i0 + 1;
    let t1 = gap_of(env, ell0)?;
    let rec = env.records();
    let k0 = rec
        .rank_of(ell0)
        .ok_or_else(|| Error::Invariant(format!("optimal gap {ell0} is not a record")))?;
    let next_record = if k0 < rec.len() {
        Some(rec.indices[k0])
    } else if env.tail() == Tail::Unit {
        Some(env.len() + 1)
    } else {
        None
    };
    let t2 = next_record.map(|b| {
        (1..b)
            .filter(|&i| i != ell0)
            .map(|i| env.gaps()[i - 1])
            .max()
            .unwrap_or(0)
    });
    Ok(GapSelection {
        n,
        beta,
        big_n,
        ell0,
        ell0_tilde: it + 1,
        k0,
        t1,
        t2,
        next_record,
        iloc_lo: env.positions()[ell0 - 1],
        iloc_hi: env.positions()[ell0],
        window,
        g_values: g,
        gtilde_values: gt,
        lambda_est,
        agree: i0 == it,
        unique: u0 && ut,
    })
}

/// Like [`select`], regrowing a sampled environment from its seed until the
/// window fits, the next record is stored and at least `min_len` gaps exist.
pub fn select_growing(
    env: &Environment,
    n: u64,
    beta: f64,
    min_len: usize,
) -> Result<(Environment, GapSelection)> {
    let mut cur = env.regrow(min_len.max(env.len()))?;
    loop {
        match select(&cur, n, beta) {
            Ok(sel) if sel.next_record.is_some() => return Ok((cur, sel)),
            Ok(_) | Err(Error::Range(_)) if cur.len() < MAX_WINDOW => {
                cur = cur.regrow(2 * cur.len())?;
            }
            Ok(_) => {
                return Err(Error::Range(
                    "no record after the optimal gap within the growth cap".into(),
                ))
            }
            Err(e) => return Err(e),
        }
    }
}

//! Excursions away from the optimal gap on one side.
//!
//! A side is the chain of sites at depth `d = 1..=len` from a boundary point,
//! each with its arrival weight. The walk starts on the boundary, steps to
//! depth 1 and comes back to depth 0, where the arrival carries `e^{-beta}`.

use crate::env::Environment;
use crate::error::{Error, Result};

/// Upper bound on `sites x steps` for a tabulated out-kernel.
const WORK_CAP: f64 = 6e9;

#[derive(Debug, Clone)]
pub struct SideChain {
    /// Arrival weights at depths `1..=len`.
    w: Vec<f64>,
    ret: f64,
}

/// Generating function of the out-excursion and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutGf {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Number of unit-gap obstacles kept beyond the last stored gap.
pub fn unit_depth(beta: f64) -> usize {
    (14.0 * std::f64::consts::LN_10 / beta).ceil() as usize + 1
}

impl SideChain {
    pub fn from_weights(w: Vec<f64>, beta: f64) -> Self {
        SideChain {
            w,
            ret: (-beta).exp(),
        }
    }

    /// Right of `tau_{ell0}`: the stored gaps, then `unit_depth` unit gaps.
    pub fn right(env: &Environment, beta: f64, p1: u64) -> Self {
        let kb = (-beta).exp();
        let stored = env.extent().saturating_sub(p1);
        let len = stored + unit_depth(beta) as u64;
        let w = (1..=len)
            .map(|d| if env.is_obstacle(p1 + d) { kb } else { 1.0 })
            .collect();
        SideChain { w, ret: kb }
    }

    /// Left of `tau_{ell0 - 1}`, down to site 1; site 0 kills.
    pub fn left(env: &Environment, beta: f64, p0: u64) -> Self {
        let kb = (-beta).exp();
        let w = (1..p0)
            .map(|d| if env.is_obstacle(p0 - d) { kb } else { 1.0 })
            .collect();
        SideChain { w, ret: kb }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// `sum_l K_out(l) e^{f l}` with derivatives, from the resolvent of the
    /// chain. `None` when the series diverges at `f`.
    pub fn gf(&self, f: f64) -> Option<OutGf> {
        let n = self.w.len();
        if n == 0 {
            return Some(OutGf {
                value: 0.0,
                d1: 0.0,
                d2: 0.0,
            });
        }
        let h = 0.5 * f.exp();
        // (I - h M) F = h ret e_1 with (M F)(d) = w(d-1) F(d-1) + w(d+1) F(d+1).
        let sub = |d: usize| -h * self.w[d - 1];
        let sup = |d: usize| -h * self.w[d + 1];
        let mut piv = vec![0.0; n];
        let mut mult = vec![0.0; n];
        piv[0] = 1.0;
        for d in 1..n {
            mult[d] = sub(d) / piv[d - 1];
            piv[d] = 1.0 - mult[d] * sup(d - 1);
            if !(piv[d] > 0.0) {
                return None;
            }
        }
        let solve = |rhs: &mut [f64]| {
            for d in 1..n {
                rhs[d] -= mult[d] * rhs[d - 1];
            }
            rhs[n - 1] /= piv[n - 1];
            for d in (0..n - 1).rev() {
                rhs[d] = (rhs[d] - sup(d) * rhs[d + 1]) / piv[d];
            }
        };
        let mut f0 = vec![0.0; n];
        f0[0] = h * self.ret;
        solve(&mut f0);
        // F' = A^{-1} F and F'' = 2 A^{-1} F' - F'.
        let mut f1 = f0.clone();
        solve(&mut f1);
        let mut f2: Vec<f64> = f1.iter().map(|x| 2.0 * x).collect();
        solve(&mut f2);
        for (a, b) in f2.iter_mut().zip(&f1) {
            *a -= b;
        }
        if !f0.iter().chain(&f1).all(|x| x.is_finite() && *x >= 0.0) {
            return None;
        }
        let c = h * self.w[0];
        Some(OutGf {
            value: c * f0[0],
            d1: c * (f0[0] + f1[0]),
            d2: c * (f0[0] + 2.0 * f1[0] + f2[0]),
        })
    }

    /// `K_out(l) e^{f l}` for `l = 0, 1, ...` until the partial sum reaches
    /// `(1 - rel) * total` and at least `min_len` entries exist.
    pub fn tilted_weights(&self, f: f64, total: f64, rel: f64, min_len: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0];
        let n = self.w.len();
        if n == 0 || total == 0.0 {
            return Ok(out);
        }
        let e = f.exp();
        let target = (1.0 - rel) * total;
        let mut mass = vec![0.0; n + 2];
        let mut next = vec![0.0; n + 2];
        // guarded: depth d lives at index d, indices 0 and n + 1 stay zero
        mass[1] = 0.5 * self.w[0] * e;
        out.push(0.0);
        let mut acc = 0.0;
        let mut work = 0.0;
        let mut ell = 1usize;
        while acc < target || out.len() < min_len {
            ell += 1;
            let reach = ell.min(n);
            work += reach as f64;
            if work > WORK_CAP {
                return Err(Error::Range(format!(
                    "out-kernel table did not converge within {ell} steps ({acc:e} of {total:e})"
                )));
            }
            let back = e * 0.5 * self.ret * mass[1];
            for d in 1..=reach {
                next[d] = e * 0.5 * self.w[d - 1] * (mass[d - 1] + mass[d + 1]);
            }
            std::mem::swap(&mut mass, &mut next);
            out.push(back);
            acc += back;
            if acc == 0.0 && mass.iter().all(|&m| m == 0.0) {
                break;
            }
        }
        Ok(out)
    }
}

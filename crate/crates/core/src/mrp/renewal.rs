//! Sampling of the renewal process and its mass renewal function.

use super::{Cells, ModeSum, MrKernel};
use crate::error::{Error, Result};
use rand::Rng;
use serde::Serialize;

/// Type of an excursion between consecutive boundary contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    In,
    Out,
}

/// Contacts `theta_0 = 0 < theta_1 < ... <= n` with their sides, and the
/// type of each excursion (`kinds[i - 1]` ends at `times[i]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MrpTrajectory {
    pub times: Vec<u64>,
    pub sides: Vec<u8>,
    pub kinds: Vec<Kind>,
}

impl MrpTrajectory {
    pub fn excursions(&self) -> usize {
        self.kinds.len()
    }
}

/// Precomputed transition and length laws of one kernel.
#[derive(Debug, Clone)]
pub struct MrpSampler {
    cells: [Cells; 2],
    same: ModeSum,
    cross: ModeSum,
    /// Cumulative tilted out-weights, normalised to end at 1.
    out_cum: [Vec<f64>; 2],
}

impl MrpSampler {
    pub fn new(kern: &MrKernel) -> Result<Self> {
        let mut cells = [kern.cells(0), kern.cells(1)];
        for (a, c) in cells.iter_mut().enumerate() {
            let s = c.sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::KernelConsistency(format!(
                    "side {a} cells sum to {s}"
                )));
            }
            c.same /= s;
            c.cross /= s;
            c.out /= s;
        }
        let mut out_cum = [Vec::new(), Vec::new()];
        for (a, cum) in out_cum.iter_mut().enumerate() {
            if cells[a].out > 0.0 {
                let t = kern.out_table(a)?;
                let mut acc = 0.0;
                *cum = t
                    .iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect();
                let last = acc;
                cum.iter_mut().for_each(|x| *x /= last);
            }
        }
        Ok(MrpSampler {
            cells,
            same: kern.same_law(),
            cross: kern.cross_law(),
            out_cum,
        })
    }

    pub fn cells(&self, a: usize) -> Cells {
        self.cells[a]
    }

    /// One excursion out of side `a`: `(length, new side, kind)`.
    pub fn step<R: Rng + ?Sized>(&self, a: usize, rng: &mut R) -> (u64, usize, Kind) {
        let c = self.cells[a];
        let u: f64 = rng.random();
        if u < c.same {
            let m = self.same.invert(rng.random());
            (self.same.length(m), a, Kind::In)
        } else if u < c.same + c.cross {
            let m = self.cross.invert(rng.random());
            (self.cross.length(m), 1 - a, Kind::In)
        } else {
            let v: f64 = rng.random();
            let cum = &self.out_cum[a];
            let ell = cum.partition_point(|&x| x <= v).min(cum.len() - 1);
            (ell as u64, a, Kind::Out)
        }
    }

    /// Contacts up to time `n` started from side `start`.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, start: usize, rng: &mut R) -> MrpTrajectory {
        let mut tr = MrpTrajectory {
            times: vec![0],
            sides: vec![start as u8],
            kinds: Vec::new(),
        };
        let (mut t, mut a) = (0u64, start);
        loop {
            let (len, b, kind) = self.step(a, rng);
            t += len;
            if t > n {
                return tr;
            }
            a = b;
            tr.times.push(t);
            tr.sides.push(b as u8);
            tr.kinds.push(kind);
        }
    }
}

/// Samples the contacts in `[0, n]` from side 0. The first contact past `n`
/// is drawn but not stored.
pub fn sample_mrp<R: Rng + ?Sized>(kern: &MrKernel, n: u64, rng: &mut R) -> Result<MrpTrajectory> {
    Ok(MrpSampler::new(kern)?.sample(n, 0, rng))
}

/// `P_a(theta_1 > j)` under the tilted process, for many `j`.
#[derive(Debug, Clone)]
pub struct ReturnTail {
    same: ModeSum,
    cross: ModeSum,
    h: f64,
    /// `out_suffix[j] = sum_{l >= j} K_out(a, l) e^{phi l}`.
    out_suffix: Vec<f64>,
}

impl ReturnTail {
    pub fn new(kern: &MrKernel, a: usize) -> Result<Self> {
        let table = kern.out_table(a)?;
        let mut out_suffix = vec![0.0; table.len() + 1];
        for j in (0..table.len()).rev() {
            out_suffix[j] = out_suffix[j + 1] + table[j];
        }
        Ok(ReturnTail {
            same: kern.same_law(),
            cross: kern.cross_law(),
            h: kern.h_factor(a, 1 - a),
            out_suffix,
        })
    }

    pub fn at(&self, j: u64) -> f64 {
        let out = self.out_suffix.get(j as usize + 1).copied().unwrap_or(0.0);
        self.same.tail_from_length(j + 1) + self.cross.tail_from_length(j + 1) * self.h + out
    }
}

/// `P_a(theta_1 > j)` under the tilted process.
pub fn first_return_tail(kern: &MrKernel, a: usize, j: u64) -> Result<f64> {
    Ok(ReturnTail::new(kern, a)?.at(j))
}

/// `P_start^b(k in theta)` for `k = 0..=k_max`, split by the side `b` of the contact.
#[derive(Debug, Clone)]
pub struct RenewalMass {
    pub start: usize,
    pub by_end: [Vec<f64>; 2],
}

impl RenewalMass {
    /// `P(k in theta)`.
    pub fn at(&self, k: u64) -> f64 {
        self.by_end[0][k as usize] + self.by_end[1][k as usize]
    }

    pub fn k_max(&self) -> u64 {
        self.by_end[0].len() as u64 - 1
    }

    pub fn compute(kern: &MrKernel, k_max: u64, start: usize) -> Result<Self> {
        let same = kern.same_law();
        let cross = kern.cross_law();
        let t = kern.t1() as usize;
        let km = k_max as usize;
        let out = [kern.out_table(0)?, kern.out_table(1)?];
        let ys: Vec<(f64, f64)> = same.terms().collect();
        let yc: Vec<(f64, f64)> = cross.terms().collect();
        let mut u = [vec![0.0; km + 1], vec![0.0; km + 1]];
        u[start][0] = 1.0;
        // running sums per (parity, side, mode)
        let mut s_same = [
            [vec![0.0; ys.len()], vec![0.0; ys.len()]],
            [vec![0.0; ys.len()], vec![0.0; ys.len()]],
        ];
        let mut s_cross = [
            [vec![0.0; yc.len()], vec![0.0; yc.len()]],
            [vec![0.0; yc.len()], vec![0.0; yc.len()]],
        ];
        let hf = [kern.h_factor(0, 1), kern.h_factor(1, 0)];
        for k in 1..=km {
            let par = k % 2;
            let mut conv_same = [0.0; 2];
            let mut conv_cross = [0.0; 2];
            for a in 0..2 {
                let from2 = if k >= 2 { u[a][k - 2] } else { 0.0 };
                let mut acc = same.extra() * from2;
                for (s, &(amp, y)) in s_same[par][a].iter_mut().zip(&ys) {
                    *s = from2 + y * *s;
                    acc += amp * *s;
                }
                conv_same[a] = acc.max(0.0);
                let from_t = if k >= t { u[a][k - t] } else { 0.0 };
                let mut acc = 0.0;
                for (s, &(amp, y)) in s_cross[par][a].iter_mut().zip(&yc) {
                    *s = from_t + y * *s;
                    acc += amp * *s;
                }
                conv_cross[a] = acc.max(0.0);
            }
            for b in 0..2 {
                let o = out[b];
                let lmax = (o.len() - 1).min(k);
                let mut conv_out = 0.0;
                for ell in 2..=lmax {
                    conv_out += u[b][k - ell] * o[ell];
                }
                u[b][k] = conv_same[b] + conv_out + hf[1 - b] * conv_cross[1 - b];
            }
        }
        Ok(RenewalMass { start, by_end: u })
    }
}

/// `P(k in theta)` for `k = 0..=k_max` from side 0.
pub fn mass_renewal(kern: &MrKernel, k_max: u64) -> Result<RenewalMass> {
    RenewalMass::compute(kern, k_max, 0)
}

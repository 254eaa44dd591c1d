//! Tilted in-excursion laws `K_in(l) e^{f l}` as finite sums of geometric
//! sequences in the slab modes.

use crate::ruin::RuinKernel;

/// `sum_nu amp_nu y_nu^m` on the support `l = first + 2 m`, plus `extra` at `m = 0`.
#[derive(Debug, Clone)]
pub struct ModeSum {
    pub first: u64,
    /// `(amp, ln y, 1 - y)` per mode.
    terms: Vec<(f64, f64, f64)>,
    extra: f64,
}

impl ModeSum {
    /// Same-side return: `(e^{-beta}/2) q0(l) e^{f l}`.
    pub fn same(k: &RuinKernel, beta: f64, f: f64) -> Self {
        let t = k.t() as f64;
        let kb = (-beta).exp();
        let terms = k
            .modes()
            .iter()
            .map(|&(c, s2)| {
                let ly = 2.0 * (c.ln() + f);
                (kb / t * s2 * (2.0 * f).exp(), ly, -ly.exp_m1())
            })
            .collect();
        // The pi/2 mode of an even width only contributes at l = 2.
        let extra = if k.t() % 2 == 0 {
            kb / (2.0 * t) * (2.0 * f).exp()
        } else {
            0.0
        };
        ModeSum {
            first: 2,
            terms,
            extra,
        }
    }

    /// Crossing: `e^{-beta} q1(l) e^{f l}`.
    pub fn cross(k: &RuinKernel, beta: f64, f: f64) -> Self {
        let tu = k.t();
        let t = tu as f64;
        let kb = (-beta).exp();
        let terms = k
            .modes()
            .iter()
            .enumerate()
            .map(|(i, &(c, s2))| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let ly = 2.0 * (c.ln() + f);
                let amp = sign * kb / t * s2 * ((t - 2.0) * c.ln() + f * t).exp();
                (amp, ly, -ly.exp_m1())
            })
            .collect();
        ModeSum {
            first: tu,
            terms,
            extra: 0.0,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.terms.iter().map(|&(a, ly, _)| (a, ly.exp()))
    }

    pub fn extra(&self) -> f64 {
        self.extra
    }

    /// Term `m` of the sequence (length `first + 2 m`).
    pub fn at(&self, m: u64) -> f64 {
        let s: f64 = self
            .terms
            .iter()
            .rev()
            .map(|&(a, ly, _)| a * (m as f64 * ly).exp())
            .sum();
        let s = if m == 0 { s + self.extra } else { s };
        s.max(0.0)
    }

    /// `sum_{m' >= m} at(m')`.
    pub fn tail(&self, m: u64) -> f64 {
        let s: f64 = self
            .terms
            .iter()
            .rev()
            .map(|&(a, ly, om)| a * (m as f64 * ly).exp() / om)
            .sum();
        let s = if m == 0 { s + self.extra } else { s };
        s.max(0.0)
    }

    pub fn total(&self) -> f64 {
        self.tail(0)
    }

    /// Mass on lengths `>= len`.
    pub fn tail_from_length(&self, len: u64) -> f64 {
        if len <= self.first {
            return self.total();
        }
        self.tail((len - self.first).div_ceil(2))
    }

    /// Smallest `m` whose cumulative mass reaches `u * total`, `u in [0, 1)`.
    pub fn invert(&self, u: f64) -> u64 {
        let total = self.total();
        let target = (1.0 - u) * total;
        // tail(m + 1) <= target is monotone in m
        let ok = |m: u64| self.tail(m + 1) <= target;
        if ok(0) {
            return 0;
        }
        let mut hi = 1u64;
        while !ok(hi) {
            hi *= 2;
            if hi > 1 << 60 {
                return hi;
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn length(&self, m: u64) -> u64 {
        self.first + 2 * m
    }
}

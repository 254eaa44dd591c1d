//! Parity-split transfer operator of the killed walk on a finite site range.
//!
//! At a fixed time the walk only occupies sites of one parity, so a layer
//! stores one parity class. Each class array carries a zero guard at both
//! ends so the stencils need no branches. Layers keep a normalised array and
//! an accumulated log factor.

use crate::env::Environment;
use crate::error::{domain, Result};

/// Whether sites `<= 0` kill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KillMode {
    /// Killed by the obstacles and on any arrival at a site `<= 0`.
    #[default]
    Bold,
    /// Killed by the obstacles only; the obstacle set is mirrored to the negative half-line.
    Soft,
}

impl std::str::FromStr for KillMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bold" => Ok(KillMode::Bold),
            "soft" => Ok(KillMode::Soft),
            _ => Err(domain!("unknown kill mode {s:?}")),
        }
    }
}

const RENORM_EVERY: u64 = 16;
const FLUSH: f64 = 1e-250;

/// One parity class of mass (forward) or values (backward).
#[derive(Debug, Clone)]
pub struct Layer {
    pub class: usize,
    /// Guarded: entries `1..=len` are live, `0` and `len + 1` stay zero.
    pub v: Vec<f64>,
    pub log_scale: f64,
}

impl Layer {
    /// `log` of the sum of all entries.
    pub fn log_total(&self) -> f64 {
        let s: f64 = self.v.iter().sum();
        s.ln() + self.log_scale
    }

    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales to max 1 without flushing anything.
    pub fn rescale(&mut self) {
        let m = self.max();
        if m == 0.0 || !m.is_finite() {
            if m == 0.0 {
                self.log_scale = f64::NEG_INFINITY;
            }
            return;
        }
        let inv = 1.0 / m;
        self.v.iter_mut().for_each(|x| *x *= inv);
        self.log_scale += m.ln();
    }

    /// Rescales to max 1 and flushes negligible entries to zero.
    pub fn renormalize(&mut self) {
        let m = self.max();
        if m == 0.0 || !m.is_finite() {
            if m == 0.0 {
                self.log_scale = f64::NEG_INFINITY;
            }
            return;
        }
        let inv = 1.0 / m;
        for x in self.v.iter_mut() {
            let y = *x * inv;
            *x = if y < FLUSH { 0.0 } else { y };
        }
        self.log_scale += m.ln();
    }
}

#[derive(Debug, Clone)]
pub struct SurvivalLattice {
    lo: i64,
    hi: i64,
    /// Guarded weight arrays per parity class of `site - lo`.
    w: [Vec<f64>; 2],
}

impl SurvivalLattice {
    /// Arrival weights for sites `lo..lo + weights.len()`. Sites outside kill.
    pub fn from_weights(lo: i64, weights: &[f64]) -> Self {
        assert!(!weights.is_empty(), "empty lattice");
        let hi = lo + weights.len() as i64 - 1;
        let mut w = [
            vec![0.0; weights.len().div_ceil(2) + 2],
            vec![0.0; weights.len() / 2 + 2],
        ];
        for (i, &x) in weights.iter().enumerate() {
            w[i % 2][i / 2 + 1] = x;
        }
        SurvivalLattice { lo, hi, w }
    }

    /// The lattice of `env` on sites up to `hi`.
    ///
    /// Bold mode covers `0..=hi` with zero weight at 0; soft mode covers
    /// `-hi..=hi` with mirrored obstacles. Sites past `hi` kill, so `hi` must
    /// be out of reach for exact answers.
    pub fn new(env: &Environment, beta: f64, mode: KillMode, hi: i64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(domain!("beta must be positive, got {beta}"));
        }
        if hi < 0 {
            return Err(domain!("lattice upper end {hi} < 0"));
        }
        let kb = (-beta).exp();
        let weight_of = |x: u64| if env.is_obstacle(x) { kb } else { 1.0 };
        Ok(match mode {
            KillMode::Bold => {
                let mut ws: Vec<f64> = (0..=hi as u64).map(weight_of).collect();
                ws[0] = 0.0;
                Self::from_weights(0, &ws)
            }
            KillMode::Soft => {
                let ws: Vec<f64> = (-hi..=hi).map(|x| weight_of(x.unsigned_abs())).collect();
                Self::from_weights(-hi, &ws)
            }
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// `(class, guarded index)` of a site, if inside.
    pub fn slot(&self, site: i64) -> Option<(usize, usize)> {
        if site < self.lo || site > self.hi {
            return None;
        }
        let i = (site - self.lo) as usize;
        Some((i % 2, i / 2 + 1))
    }

    pub fn site(&self, class: usize, k: usize) -> i64 {
        self.lo + 2 * (k as i64 - 1) + class as i64
    }

    pub fn class_len(&self, class: usize) -> usize {
        self.w[class].len() - 2
    }

    pub fn weight(&self, site: i64) -> f64 {
        self.slot(site).map_or(0.0, |(c, k)| self.w[c][k])
    }

    /// Weight array of a class (guarded).
    pub fn weights(&self, class: usize) -> &[f64] {
        &self.w[class]
    }

    /// Sets arrival weights of the given sites to zero.
    pub fn kill_sites(&mut self, sites: &[i64]) {
        for &s in sites {
            if let Some((c, k)) = self.slot(s) {
                self.w[c][k] = 0.0;
            }
        }
    }

    /// Unit mass at `site`.
    pub fn point_mass(&self, site: i64) -> Layer {
        let (class, k) = self.slot(site).expect("start site outside the lattice");
        let mut v = vec![0.0; self.w[class].len()];
        v[k] = 1.0;
        Layer {
            class,
            v,
            log_scale: 0.0,
        }
    }

    /// Values 1 on every site of a class.
    pub fn ones(&self, class: usize) -> Layer {
        let mut v = vec![1.0; self.w[class].len()];
        let last = v.len() - 1;
        v[0] = 0.0;
        v[last] = 0.0;
        Layer {
            class,
            v,
            log_scale: 0.0,
        }
    }

    /// Fresh zero layer with the opposite class of `src`, for use as a step target.
    pub fn scratch(&self, class: usize) -> Layer {
        Layer {
            class,
            v: vec![0.0; self.w[class].len()],
            log_scale: 0.0,
        }
    }

    /// `dst(y) = w(y) * (src(y-1) + src(y+1)) / 2`.
    pub fn forward_into(&self, src: &Layer, dst: &mut Layer) {
        let q = 1 - src.class;
        let w = &self.w[q];
        let n = w.len() - 2;
        dst.class = q;
        dst.v.resize(w.len(), 0.0);
        let s = &src.v;
        let d = &mut dst.v[1..=n];
        let wl = &w[1..=n];
        if q == 1 {
            // site 2j+1 sees 2j and 2j+2: guarded indices k and k+1
            for (((d, &w), &a), &b) in d.iter_mut().zip(wl).zip(&s[1..=n]).zip(&s[2..=n + 1]) {
                *d = 0.5 * w * (a + b);
            }
        } else {
            for (((d, &w), &a), &b) in d.iter_mut().zip(wl).zip(&s[0..n]).zip(&s[1..=n]) {
                *d = 0.5 * w * (a + b);
            }
        }
        dst.v[0] = 0.0;
        dst.v[n + 1] = 0.0;
        dst.log_scale = src.log_scale;
    }

    /// `dst(x) = (w(x-1) src(x-1) + w(x+1) src(x+1)) / 2`.
    pub fn backward_into(&self, src: &Layer, dst: &mut Layer) {
        let p = src.class;
        let q = 1 - p;
        let wp = &self.w[p];
        let n = self.w[q].len() - 2;
        dst.class = q;
        dst.v.resize(n + 2, 0.0);
        let s = &src.v;
        let d = &mut dst.v[1..=n];
        if q == 1 {
            for ((((d, &a), &b), &wa), &wb) in d
                .iter_mut()
                .zip(&s[1..=n])
                .zip(&s[2..=n + 1])
                .zip(&wp[1..=n])
                .zip(&wp[2..=n + 1])
            {
                *d = 0.5 * (wa * a + wb * b);
            }
        } else {
            for ((((d, &a), &b), &wa), &wb) in d
                .iter_mut()
                .zip(&s[0..n])
                .zip(&s[1..=n])
                .zip(&wp[0..n])
                .zip(&wp[1..=n])
            {
                *d = 0.5 * (wa * a + wb * b);
            }
        }
        dst.v[0] = 0.0;
        dst.v[n + 1] = 0.0;
        dst.log_scale = src.log_scale;
    }

    /// Evolves mass from `site` for `n` steps, calling `observe(m, layer)` after
    /// every step `m = 1..=n`. Returns the final layer.
    pub fn run_forward<F: FnMut(u64, &Layer)>(&self, site: i64, n: u64, mut observe: F) -> Layer {
        let mut cur = self.point_mass(site);
        let mut nxt = self.scratch(1 - cur.class);
        for m in 1..=n {
            self.forward_into(&cur, &mut nxt);
            std::mem::swap(&mut cur, &mut nxt);
            if m % RENORM_EVERY == 0 || m == n {
                cur.renormalize();
            }
            observe(m, &cur);
        }
        cur
    }

    /// Backward values over `n` steps from `u_n = 1`, for a path started on `start_class` at time 0.
    pub fn run_backward<F: FnMut(u64, &Layer)>(
        &self,
        start_class: usize,
        n: u64,
        mut observe: F,
    ) -> Layer {
        let end_class = (start_class + n as usize) % 2;
        let mut cur = self.ones(end_class);
        let mut nxt = self.scratch(1 - end_class);
        observe(n, &cur);
        for m in (0..n).rev() {
            self.backward_into(&cur, &mut nxt);
            std::mem::swap(&mut cur, &mut nxt);
            if m % RENORM_EVERY == 0 {
                cur.renormalize();
            }
            observe(m, &cur);
        }
        cur
    }

    /// Renormalisation period shared by all drivers.
    pub const fn renorm_every() -> u64 {
        RENORM_EVERY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let lat = SurvivalLattice::from_weights(-2, &[1.0, 0.5, 0.25, 0.125, 2.0]);
        assert_eq!(lat.width(), 5);
        for site in -2..=2 {
            let (c, k) = lat.slot(site).unwrap();
            assert_eq!(lat.site(c, k), site);
        }
        assert_eq!(lat.weight(0), 0.25);
        assert_eq!(lat.weight(3), 0.0);
        assert_eq!(lat.class_len(0), 3);
        assert_eq!(lat.class_len(1), 2);
    }

    #[test]
    fn forward_and_backward_agree() {
        let ws: Vec<f64> = (0..23)
            .map(|i| if i % 3 == 0 { 0.4 } else { 1.0 })
            .collect();
        let lat = SurvivalLattice::from_weights(0, &ws);
        for start in [1i64, 4, 11] {
            for n in [1u64, 2, 7, 40] {
                let f = lat.run_forward(start, n, |_, _| {}).log_total();
                let (c, k) = lat.slot(start).unwrap();
                let b = lat.run_backward(c, n, |_, _| {});
                let bv = b.v[k].ln() + b.log_scale;
                assert!((f - bv).abs() < 1e-12, "start={start} n={n}: {f} vs {bv}");
            }
        }
    }

    #[test]
    fn full_weights_conserve_mass_until_the_edge() {
        let lat = SurvivalLattice::from_weights(-50, &vec![1.0; 101]);
        let l = lat.run_forward(0, 50, |_, _| {});
        assert!(l.log_total().abs() < 1e-14);
        let l = lat.run_forward(0, 51, |_, _| {});
        assert!(l.log_total() < 0.0);
    }
}

//! Exact sampling from the polymer measure by an h-transform.
//!
//! Backward values `u_m(x) = P_x(survive steps m+1..n)` are kept at
//! checkpoints every `ceil(sqrt n)` steps; each block is recomputed from its
//! right checkpoint while the path is drawn forward through it.
//!
//! A layer can span far more than the f64 range: the value at the origin is
//! tiny next to the value inside a distant wide gap. Layers are therefore
//! stored in chunks of class entries, each with its own log exponent. Two
//! sites at distance 2 differ by at most a factor `(2 e^beta)^2`, so a chunk
//! of `300 / (beta + ln 2)` entries stays representable.

use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::survival::{log_hit_profile, KillMode, Layer, SurvivalLattice};
use rand::Rng;

/// Reachable mass left outside the lattice, relative to `Z_n`, is below `e^{-MARGIN}`.
const MARGIN: f64 = 30.0;

/// Store every layer when `(n + 1) * width` stays below this many entries.
const FULL_STORE: usize = 1 << 24;

fn in_reach_cap(n: u64, start: i64) -> u64 {
    start.unsigned_abs() + n + 1
}

/// Smallest `hi` such that paths reaching beyond `hi` carry at most
/// `e^{-MARGIN}` times `e^{log_z}`.
///
/// For a start at the origin in bold mode the bound uses the exact
/// probability to reach `tau_j` alive; otherwise every obstacle between the
/// start and `tau_j` costs `e^{-beta}`. Beyond `tau_j` a distance `d` within
/// `n` steps costs `2 e^{-d^2 / (2n)}`.
pub fn choose_extent(
    env: &Environment,
    n: u64,
    beta: f64,
    mode: KillMode,
    start: i64,
    log_z: f64,
) -> Result<u64> {
    let cap = in_reach_cap(n, start);
    if mode == KillMode::Soft && start != 0 {
        return Ok(cap);
    }
    let nf = n.max(1) as f64;
    let budget = log_z - MARGIN - std::f64::consts::LN_2;
    let reach = |lb: f64| -> f64 {
        let x = lb - budget;
        if x <= 0.0 {
            0.0
        } else {
            (2.0 * nf * x).sqrt()
        }
    };
    let s = start.max(0) as u64;
    let mut best = (s as f64 + reach(0.0)).ceil().min(cap as f64) as u64;
    let first = env.obstacles_up_to(s) + 1;
    let last = env.len();
    if first > last {
        return Ok(best);
    }
    let exact = mode == KillMode::Bold && start == 0;
    let profile = if exact {
        log_hit_profile(env, beta, last)?
    } else {
        Vec::new()
    };
    for j in first..=last {
        let pos = env.positions()[j];
        if pos >= best {
            break;
        }
        let lb = if exact {
            profile[j]
        } else {
            -beta * (j + 1 - first) as f64
        };
        let cand = (pos as f64 + reach(lb)).ceil() as u64;
        best = best.min(cand);
    }
    Ok(best.max(s + 1))
}

fn lattice(env: &Environment, beta: f64, mode: KillMode, hi: u64) -> Result<SurvivalLattice> {
    SurvivalLattice::new(env, beta, mode, hi as i64)
}

fn log_survival(lat: &SurvivalLattice, start: i64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    lat.run_forward(start, n, |_, _| {}).log_total()
}

/// A backward layer in chunks with separate exponents: the value at guarded
/// index `k` is `l.v[k] * exp(e[k / chunk])`.
#[derive(Debug, Clone)]
struct Blocked {
    l: Layer,
    e: Vec<f64>,
}

fn chunk_len(beta: f64) -> usize {
    ((300.0 / (beta + std::f64::consts::LN_2)).floor() as usize).max(1)
}

impl Blocked {
    fn ones(lat: &SurvivalLattice, class: usize, chunk: usize) -> Self {
        let l = lat.ones(class);
        let nb = l.v.len().div_ceil(chunk);
        Blocked {
            l,
            e: vec![0.0; nb],
        }
    }

    fn class(&self) -> usize {
        self.l.class
    }

    fn log_at(&self, k: usize, chunk: usize) -> f64 {
        self.l.v[k].ln() + self.e[k / chunk]
    }

    /// One backward step, chunk-edge corrections, then per-chunk rescaling.
    fn step(&self, lat: &SurvivalLattice, chunk: usize) -> Blocked {
        let p = self.l.class;
        let mut dst = lat.scratch(1 - p);
        lat.backward_into(&self.l, &mut dst);
        let wp = lat.weights(p);
        let n = lat.class_len(1 - p);
        let s = &self.l.v;
        let d = &mut dst.v;
        let factor =
            |from: usize, to: usize| (self.e[from] - self.e[to]).clamp(-745.0, 700.0).exp();
        if p == 0 {
            // last entry of a chunk also sees the first entry of the next one
            for k in (chunk - 1..=n).step_by(chunk).filter(|&k| k >= 1) {
                let b = k / chunk;
                d[k] = 0.5 * (wp[k] * s[k] + wp[k + 1] * s[k + 1] * factor(b + 1, b));
            }
        } else {
            for k in (chunk..=n).step_by(chunk) {
                let b = k / chunk;
                d[k] = 0.5 * (wp[k - 1] * s[k - 1] * factor(b - 1, b) + wp[k] * s[k]);
            }
        }
        let nb = d.len().div_ceil(chunk);
        let mut e: Vec<f64> = (0..nb).map(|b| self.e[b.min(self.e.len() - 1)]).collect();
        for (b, ch) in d.chunks_mut(chunk).enumerate() {
            let m = ch.iter().copied().fold(0.0, f64::max);
            if m > 0.0 && m.is_finite() {
                let inv = 1.0 / m;
                ch.iter_mut().for_each(|x| *x *= inv);
                e[b] += m.ln();
            }
        }
        dst.log_scale = 0.0;
        Blocked { l: dst, e }
    }
}

/// Sampler of the walk from `start` conditioned to survive `n` steps.
#[derive(Debug, Clone)]
pub struct ConditionedSampler {
    lat: SurvivalLattice,
    n: u64,
    start: i64,
    block: u64,
    chunk: usize,
    /// Layers at times `0, block, 2 block, ..., n` (all times when `block == 1`).
    checkpoints: Vec<Blocked>,
    log_z: f64,
}

impl ConditionedSampler {
    pub fn new(env: &Environment, n: u64, beta: f64, mode: KillMode, start: i64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain!("beta must be positive, got {beta}"));
        }
        if mode == KillMode::Bold && start < 0 {
            return Err(domain!("bold walks start at a site >= 0"));
        }
        let cap = in_reach_cap(n, start);
        let mut hi = cap.min(1024).max(start.unsigned_abs() + 1);
        for _ in 0..8 {
            let lat = lattice(env, beta, mode, hi)?;
            let lz = log_survival(&lat, start, n);
            if lz == f64::NEG_INFINITY {
                if hi == cap {
                    break;
                }
                hi = cap.min(2 * hi);
                continue;
            }
            let want = choose_extent(env, n, beta, mode, start, lz)?;
            if want <= hi {
                break;
            }
            hi = cap.min(want.max(2 * hi));
        }
        Self::with_extent(env, n, beta, mode, start, hi)
    }

    /// Uses the lattice up to `hi` as given.
    pub fn with_extent(
        env: &Environment,
        n: u64,
        beta: f64,
        mode: KillMode,
        start: i64,
        hi: u64,
    ) -> Result<Self> {
        let lat = lattice(env, beta, mode, hi)?;
        let (c0, _) = lat
            .slot(start)
            .ok_or_else(|| domain!("start {start} outside the lattice"))?;
        if start == 0 && mode == KillMode::Bold && n > 0 && lat.weight(1) == 0.0 {
            return Err(Error::Infeasible("no surviving path".into()));
        }
        let full = (n as usize + 1).saturating_mul(lat.width()) <= FULL_STORE;
        let block = if full {
            1
        } else {
            ((n as f64).sqrt().ceil() as u64).max(1)
        };
        let chunk = chunk_len(beta);
        let end_class = (c0 + n as usize) % 2;
        let mut cur = Blocked::ones(&lat, end_class, chunk);
        let mut stack = vec![cur.clone()];
        for m in (0..n).rev() {
            cur = cur.step(&lat, chunk);
            if m % block == 0 {
                stack.push(cur.clone());
            }
        }
        let (_, k) = lat.slot(start).unwrap();
        let mut log_z = cur.log_at(k, chunk);
        if !log_z.is_finite() {
            log_z = log_survival(&lat, start, n);
        }
        if !log_z.is_finite() {
            return Err(Error::Infeasible(format!(
                "Z_n underflows to 0 for n = {n}"
            )));
        }
        // [u_0, u_B, u_2B, ..., u_n]
        stack.reverse();
        let checkpoints = stack;
        Ok(ConditionedSampler {
            lat,
            n,
            start,
            block,
            chunk,
            checkpoints,
            log_z,
        })
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn hi(&self) -> i64 {
        self.lat.hi()
    }

    pub fn lattice(&self) -> &SurvivalLattice {
        &self.lat
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Checkpoint index of time `m`, a multiple of the block (or `n`).
    fn checkpoint(&self, m: u64) -> &Blocked {
        let i = if m == self.n {
            self.checkpoints.len() - 1
        } else {
            (m / self.block) as usize
        };
        &self.checkpoints[i]
    }

    /// Layers `u_{a+1}, ..., u_b` recomputed from the checkpoint at `b`.
    fn block_layers(&self, a: u64, b: u64) -> Vec<Blocked> {
        let mut out = Vec::with_capacity((b - a) as usize);
        let mut cur = self.checkpoint(b).clone();
        out.push(cur.clone());
        for _ in (a + 1..b).rev() {
            cur = cur.step(&self.lat, self.chunk);
            out.push(cur.clone());
        }
        out.reverse();
        out
    }

    /// A path `S_0..S_n` and the log-probability of its transitions.
    pub fn sample_with_log_prob<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<i64>, f64)> {
        let mut path = Vec::with_capacity(self.n as usize + 1);
        path.push(self.start);
        let mut x = self.start;
        let mut lp = 0.0;
        let mut a = 0u64;
        while a < self.n {
            let b = if self.block == 1 {
                self.n.min(a + 1)
            } else {
                self.n.min(a + self.block)
            };
            let owned;
            let layers: &[Blocked] = if self.block == 1 {
                std::slice::from_ref(&self.checkpoints[b as usize])
            } else {
                owned = self.block_layers(a, b);
                &owned
            };
            for u in layers {
                // log of (1/2) w(y) u(y)
                let val = |y: i64| -> f64 {
                    match self.lat.slot(y) {
                        Some((c, k)) if c == u.class() => {
                            (0.5 * self.lat.weight(y)).ln() + u.log_at(k, self.chunk)
                        }
                        _ => f64::NEG_INFINITY,
                    }
                };
                let (ll, lr) = (val(x - 1), val(x + 1));
                let top = ll.max(lr);
                let (wl, wr) = ((ll - top).exp(), (lr - top).exp());
                let tot = wl + wr;
                if !(tot > 0.0) || !tot.is_finite() {
                    return Err(Error::Numeric(format!(
                        "backward values vanish around site {x} at time {}",
                        path.len() - 1
                    )));
                }
                let pr = wr / tot;
                if rng.random::<f64>() < pr {
                    x += 1;
                    lp += pr.ln();
                } else {
                    x -= 1;
                    lp += (1.0 - pr).ln();
                }
                path.push(x);
            }
            a = b;
        }
        Ok((path, lp))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<i64>> {
        Ok(self.sample_with_log_prob(rng)?.0)
    }

    /// `log` of the unconditioned weight `prod (1/2) w(S_i)` of a path.
    pub fn log_weight(&self, path: &[i64]) -> f64 {
        path.windows(2)
            .map(|w| {
                debug_assert_eq!((w[1] - w[0]).abs(), 1);
                (0.5 * self.lat.weight(w[1])).ln()
            })
            .sum()
    }

    /// Backward values `u_m`, up to a constant.
    fn values_at(&self, m: u64) -> Blocked {
        if self.block == 1 || m % self.block == 0 || m == self.n {
            return self.checkpoint(m).clone();
        }
        let a = m / self.block * self.block;
        let b = self.n.min(a + self.block);
        self.block_layers(a, b).swap_remove((m - a - 1) as usize)
    }

    /// `P(S_m = x | survival)` over the lattice sites for a fixed `m <= n`.
    pub fn marginal(&self, m: u64) -> Vec<(i64, f64)> {
        let mu = self.lat.run_forward(self.start, m, |_, _| {});
        let u = self.values_at(m);
        debug_assert_eq!(mu.class, u.class());
        let logs: Vec<(usize, f64)> = (1..=self.lat.class_len(mu.class))
            .map(|k| (k, mu.v[k].ln() + u.log_at(k, self.chunk)))
            .filter(|e| e.1 > f64::NEG_INFINITY)
            .collect();
        let top = logs.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let mut out = Vec::new();
        let mut tot = 0.0;
        for (k, l) in logs {
            let p = (l - top).exp();
            if p > 0.0 {
                out.push((self.lat.site(mu.class, k), p));
                tot += p;
            }
        }
        out.iter_mut().for_each(|e| e.1 /= tot);
        out
    }
}

/// One exact draw from the polymer measure `P(. | survival to n)` from 0.
pub fn sample_conditioned<R: Rng + ?Sized>(
    env: &Environment,
    n: u64,
    beta: f64,
    rng: &mut R,
    mode: KillMode,
) -> Result<Vec<i64>> {
    ConditionedSampler::new(env, n, beta, mode, 0)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::survive_exact;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn all_paths(n: u32, start: i64) -> Vec<Vec<i64>> {
        (0..1u32 << n)
            .map(|bits| {
                let mut p = vec![start];
                for i in 0..n {
                    let x = *p.last().unwrap();
                    p.push(if bits >> i & 1 == 1 { x + 1 } else { x - 1 });
                }
                p
            })
            .collect()
    }

    #[test]
    fn exhaustive_path_law() {
        let env = Environment::from_gaps(1.0, vec![2, 1, 3, 2, 5]).unwrap();
        let beta = 0.7;
        let n = 8;
        for mode in [KillMode::Bold, KillMode::Soft] {
            let s = ConditionedSampler::new(&env, n, beta, mode, 0).unwrap();
            let paths = all_paths(n as u32, 0);
            let weights: Vec<f64> = paths.iter().map(|p| s.log_weight(p).exp()).collect();
            let z: f64 = weights.iter().sum();
            assert!((z.ln() - s.log_z()).abs() < 1e-12);
            assert!((survive_exact(&env, n, beta, mode).unwrap() - s.log_z()).abs() < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let reps = 200_000;
            let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
            for _ in 0..reps {
                *counts.entry(s.sample(&mut rng).unwrap()).or_default() += 1;
            }
            for (p, w) in paths.iter().zip(&weights) {
                let q = w / z;
                let f = *counts.get(p).unwrap_or(&0) as f64 / reps as f64;
                let sd = (q * (1.0 - q) / reps as f64).sqrt();
                assert!(
                    (f - q).abs() <= 4.0 * sd + 1e-12,
                    "{mode:?} {p:?}: {f} vs {q}"
                );
            }
        }
    }

    #[test]
    fn transition_product_recovers_weight() {
        let env = Environment::sample(1.5, 400, 3).unwrap();
        let s = ConditionedSampler::new(&env, 3000, 1.0, KillMode::Bold, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let (p, lp) = s.sample_with_log_prob(&mut rng).unwrap();
            let lw = s.log_weight(&p);
            assert!(
                (lp + s.log_z() - lw).abs() <= 1e-10 * lw.abs(),
                "{lp} {} {lw}",
                s.log_z()
            );
        }
    }

    #[test]
    fn distant_wide_gap() {
        // u_0 at the origin is about e^{-900} times u_0 inside the wide gap
        let mut gaps = vec![1u64; 500];
        gaps.push(40);
        gaps.extend(std::iter::repeat_n(1, 1000));
        let env = Environment::from_gaps(1.0, gaps).unwrap();
        let n = 20_000;
        let s = ConditionedSampler::new(&env, n, 1.0, KillMode::Bold, 0).unwrap();
        let exact = survive_exact(&env, n, 1.0, KillMode::Bold).unwrap();
        assert!(
            (s.log_z() - exact).abs() <= 1e-9 * exact.abs(),
            "{} {exact}",
            s.log_z()
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (p, lp) = s.sample_with_log_prob(&mut rng).unwrap();
        let lw = s.log_weight(&p);
        assert!((lp + s.log_z() - lw).abs() <= 1e-9 * lw.abs());
        assert!(
            p[n as usize] > 500 && p[n as usize] < 541,
            "{}",
            p[n as usize]
        );
    }

    #[test]
    fn checkpointed_and_stored_agree() {
        let env = Environment::sample(1.5, 200, 4).unwrap();
        let n = 400;
        let a = ConditionedSampler::new(&env, n, 1.0, KillMode::Bold, 0).unwrap();
        assert_eq!(a.block, 1);
        let b = ConditionedSampler {
            block: 20,
            checkpoints: a.checkpoints.iter().step_by(20).cloned().collect(),
            ..a.clone()
        };
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (p1, l1) = a.sample_with_log_prob(&mut r1).unwrap();
            let (p2, l2) = b.sample_with_log_prob(&mut r2).unwrap();
            assert_eq!(p1, p2);
            assert!((l1 - l2).abs() < 1e-9);
        }
        for m in [0u64, 7, 20, 399, 400] {
            let ma = a.marginal(m);
            let mb = b.marginal(m);
            assert_eq!(ma.len(), mb.len());
            for (x, y) in ma.iter().zip(&mb) {
                assert_eq!(x.0, y.0);
                assert!((x.1 - y.1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn endpoint_marginal_matches_samples() {
        let env = Environment::from_gaps(1.0, vec![3, 2, 6, 1, 4, 9]).unwrap();
        let n = 60;
        let s = ConditionedSampler::new(&env, n, 0.8, KillMode::Bold, 0).unwrap();
        let marg = s.marginal(n);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reps = 50_000;
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for _ in 0..reps {
            *counts
                .entry(*s.sample(&mut rng).unwrap().last().unwrap())
                .or_default() += 1;
        }
        for (x, q) in marg {
            let f = *counts.get(&x).unwrap_or(&0) as f64 / reps as f64;
            let sd = (q * (1.0 - q) / reps as f64).sqrt();
            assert!((f - q).abs() <= 3.0 * sd + 1e-9, "site {x}: {f} vs {q}");
        }
    }

    #[test]
    fn free_walk_conditioned_to_stay_positive() {
        // No obstacle within reach: the law is the walk conditioned to stay >= 1.
        let env = Environment::from_gaps(1.0, vec![100]).unwrap();
        let n = 10u64;
        let s = ConditionedSampler::new(&env, n, 1.0, KillMode::Bold, 0).unwrap();
        let binom = |n: u64, k: u64| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        // ballot theorem: P(S_1..S_n > 0, S_n = x) = (x / n) C(n, (n + x) / 2) 2^{-n}
        let law: Vec<(i64, f64)> = (1..=n as i64)
            .filter(|x| (x + n as i64) % 2 == 0)
            .map(|x| {
                (
                    x,
                    x as f64 / n as f64 * binom(n, (n + x as u64) / 2) / 1024.0,
                )
            })
            .collect();
        let z: f64 = law.iter().map(|e| e.1).sum();
        assert!((z - s.log_z().exp()).abs() < 1e-14);
        let marg = s.marginal(n);
        for ((x, p), (y, q)) in law.iter().zip(&marg) {
            assert_eq!(x, y);
            assert!((p / z - q).abs() < 1e-13);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let reps = 100_000;
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for _ in 0..reps {
            *counts
                .entry(*s.sample(&mut rng).unwrap().last().unwrap())
                .or_default() += 1;
        }
        for (x, p) in law {
            let q = p / z;
            let f = *counts.get(&x).unwrap_or(&0) as f64 / reps as f64;
            assert!((f - q).abs() <= 4.0 * (q * (1.0 - q) / reps as f64).sqrt());
        }
    }

    #[test]
    fn extent_is_safe() {
        let env = Environment::sample(1.5, 3000, 12).unwrap();
        let n = 20_000;
        let beta = 1.0;
        let s = ConditionedSampler::new(&env, n, beta, KillMode::Bold, 0).unwrap();
        assert!((s.hi() as u64) < n / 2, "lattice up to {}", s.hi());
        let wide = ConditionedSampler::with_extent(
            &env,
            n,
            beta,
            KillMode::Bold,
            0,
            2 * s.hi() as u64 + 200,
        )
        .unwrap();
        assert!(
            (wide.log_z() - s.log_z()).abs() < 1e-12 * s.log_z().abs(),
            "{} {} hi {}",
            wide.log_z(),
            s.log_z(),
            s.hi()
        );
    }

    #[test]
    fn impossible_instance() {
        let env = Environment::from_gaps(1.0, vec![1, 1])
            .unwrap()
            .with_tail(crate::env::Tail::Unit);
        let s = ConditionedSampler::new(&env, 10, 800.0, KillMode::Bold, 0);
        assert!(matches!(s, Err(Error::Infeasible(_))));
    }

    #[test]
    fn excursions_follow_the_renewal_kernel() {
        use crate::mc::path_stats;
        use crate::mrp::{plant, MrKernel};
        let env = plant(1.5, &[4, 2, 3, 1], 9, &[3, 5, 2]).unwrap();
        let beta = 1.0;
        let kern = MrKernel::new(&env, beta).unwrap();
        let (p0, p1) = kern.boundary();
        let n = 6000u64;
        // Select by start time, a stopping time, and stop early enough that an
        // excursion ending past n is rare: under the tilt, in-excursions decay
        // only at rate g(T1) - phi.
        let margin = (0..)
            .find(|&j| (0..2).all(|a| crate::mrp::first_return_tail(&kern, a, j).unwrap() < 1e-3))
            .unwrap();
        assert!(margin > 2 * kern.t1() * kern.t1());
        let horizon = n - margin;
        let s = ConditionedSampler::new(&env, n, beta, KillMode::Bold, p0 as i64).unwrap();
        let sel = GapSelectionStub::new(p0, p1);
        let mut counts = [[0u64; 3]; 2];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let path = s.sample(&mut rng).unwrap();
            let st = path_stats(&path, &sel);
            assert_eq!(st.h_hit, Some(0));
            for e in st.excursions.iter().filter(|e| e.start < horizon) {
                let cell = if !e.inside {
                    2
                } else if e.from == e.to {
                    0
                } else {
                    1
                };
                counts[e.from][cell] += 1;
            }
        }
        for a in 0..2 {
            let c = kern.cells(a);
            let tot: u64 = counts[a].iter().sum();
            assert!(tot > 1000, "side {a}: {tot} excursions");
            for (k, q) in [c.same, c.cross, c.out].into_iter().enumerate() {
                let q = q / c.sum();
                let f = counts[a][k] as f64 / tot as f64;
                let sd = (q * (1.0 - q) / tot as f64).sqrt();
                assert!((f - q).abs() <= 3.0 * sd, "side {a} cell {k}: {f} vs {q}");
            }
        }
    }

    struct GapSelectionStub;
    impl GapSelectionStub {
        fn new(p0: u64, p1: u64) -> crate::gapsel::GapSelection {
            crate::gapsel::GapSelection {
                n: 0,
                beta: 1.0,
                big_n: 1.0,
                ell0: 0,
                ell0_tilde: 0,
                k0: 0,
                t1: p1 - p0,
                t2: None,
                next_record: None,
                iloc_lo: p0,
                iloc_hi: p1,
                window: 0,
                g_values: vec![],
                gtilde_values: vec![],
                lambda_est: 0.0,
                agree: true,
                unique: true,
            }
        }
    }
}

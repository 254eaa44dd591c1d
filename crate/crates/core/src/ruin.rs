//! Confinement probabilities of the simple random walk in a slab.
//!
//! For a width `t`, `q0(t, n)` is the probability that the walk started at 0
//! returns to 0 for the first time at step `n` without touching `±t`, and
//! `q1(t, n)` the probability that it reaches `+t` first, at step `n`, without
//! returning to 0. `q = q0 + 2 q1` is the law of the first visit to
//! `{-t, 0, t}`.

use crate::error::{domain, Result};
use std::f64::consts::PI;

/// Smallest width accepted by the spectral formulas.
pub const MIN_WIDTH: u64 = 3;

/// Which part of the first-visit law a generating function refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Return to the starting point (`q0`).
    Same,
    /// Crossing to one given side (`q1`).
    Cross,
    /// Either (`q0 + 2 q1`).
    Total,
}

fn check_width(t: u64) -> Result<()> {
    if t < MIN_WIDTH {
        return Err(domain!("slab width {t} < {MIN_WIDTH}"));
    }
    Ok(())
}

/// Confinement rate `-log cos(pi/t)`.
pub fn g(t: u64) -> Result<f64> {
    check_width(t)?;
    Ok(-(PI / t as f64).cos().ln())
}

/// `arctan sqrt(e^{2f} - 1)`, the angle parametrising the generating functions.
pub fn delta(f: f64) -> f64 {
    (2.0 * f).exp_m1().sqrt().atan()
}

/// Generating function of the first return to 0 on the half-line, `f <= 0`.
pub fn qhat0_inf(f: f64) -> Result<f64> {
    if !(f <= 0.0) {
        return Err(domain!("qhat0_inf needs f <= 0, got {f}"));
    }
    Ok(1.0 - (-(2.0 * f).exp_m1()).sqrt())
}

/// Spectral data for a fixed slab width.
#[derive(Debug, Clone)]
pub struct RuinKernel {
    t: u64,
    g: f64,
    /// `(cos(pi nu / t), sin^2(pi nu / t))` for `nu = 1..=(t-1)/2`.
    modes: Vec<(f64, f64)>,
}

impl RuinKernel {
    pub fn new(t: u64) -> Result<Self> {
        check_width(t)?;
        let modes = (1..=(t - 1) / 2)
            .map(|nu| {
                let a = PI * nu as f64 / t as f64;
                (a.cos(), a.sin().powi(2))
            })
            .collect();
        Ok(RuinKernel { t, g: g(t)?, modes })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `(cos, sin^2)` of the angles `pi nu / t`, `nu = 1..=(t-1)/2`.
    pub fn modes(&self) -> &[(f64, f64)] {
        &self.modes
    }

    fn power(c: f64, k: u64) -> f64 {
        if k > 1000 {
            (k as f64 * c.ln()).exp()
        } else {
            c.powi(k as i32)
        }
    }

    /// `q0(t, n)`.
    pub fn q0(&self, n: u64) -> f64 {
        if n < 2 || n % 2 == 1 {
            return 0.0;
        }
        let s: f64 = self
            .modes
            .iter()
            .rev()
            .map(|&(c, s2)| Self::power(c, n - 2) * s2)
            .sum();
        let mut v = 2.0 * s / self.t as f64;
        // Even widths carry a mode at pi/2 whose cos^0 survives at n = 2.
        if n == 2 && self.t % 2 == 0 {
            v += 1.0 / self.t as f64;
        }
        v.clamp(0.0, 1.0)
    }

    /// `q1(t, n)`.
    pub fn q1(&self, n: u64) -> f64 {
        if n < self.t || (n - self.t) % 2 == 1 {
            return 0.0;
        }
        let s: f64 = self
            .modes
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &(c, s2))| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * Self::power(c, n - 2) * s2
            })
            .sum();
        (s / self.t as f64).clamp(0.0, 1.0)
    }

    /// `q(t, n) = q0 + 2 q1`.
    pub fn q(&self, n: u64) -> f64 {
        self.q0(n) + 2.0 * self.q1(n)
    }

    pub fn part(&self, part: Part, n: u64) -> f64 {
        match part {
            Part::Same => self.q0(n),
            Part::Cross => self.q1(n),
            Part::Total => self.q(n),
        }
    }

    fn angle(&self, f: f64) -> Result<f64> {
        if !(f > 0.0 && f < self.g) {
            return Err(domain!(
                "f = {f} outside (0, g({})) = (0, {})",
                self.t,
                self.g
            ));
        }
        Ok(delta(f))
    }

    /// Generating function `sum_n part(n) e^{f n}` in closed form.
    pub fn qhat(&self, f: f64, part: Part) -> Result<f64> {
        let d = self.angle(f)?;
        let td = self.t as f64 * d;
        let tan = d.tan();
        Ok(match part {
            Part::Same => 1.0 - tan / td.tan(),
            Part::Cross => tan / (2.0 * td.sin()),
            Part::Total => 1.0 + tan * (1.0 - td.cos()) / td.sin(),
        })
    }

    /// Derivatives of `qhat` with respect to the angle, `(first, second)`.
    fn angle_derivatives(&self, d: f64, part: Part) -> (f64, f64) {
        let t = self.t as f64;
        let (sd, cd) = d.sin_cos();
        let tan = sd / cd;
        let (st, ct) = (t * d).sin_cos();
        let cross1 = (1.0 / (cd * cd) - t * tan * ct / st) / (2.0 * st);
        let same1 = (-ct / (cd * cd) + t * tan / st) / st;
        let cross2 = (-2.0 * t * ct / (st * cd * cd)
            + 2.0 * sd / cd.powi(3)
            + t * t * (1.0 + ct * ct) * tan / (st * st))
            / (2.0 * st);
        let same2 = (2.0 * t / (st * cd * cd)
            - 2.0 * sd * ct / cd.powi(3)
            - 2.0 * t * t * ct * tan / (st * st))
            / st;
        match part {
            Part::Same => (same1, same2),
            Part::Cross => (cross1, cross2),
            Part::Total => (same1 + 2.0 * cross1, same2 + 2.0 * cross2),
        }
    }

    /// First derivative of `qhat` in `f`.
    pub fn qhat_d1(&self, f: f64, part: Part) -> Result<f64> {
        let d = self.angle(f)?;
        let (q1, _) = self.angle_derivatives(d, part);
        Ok(q1 / d.tan())
    }

    /// Second derivative of `qhat` in `f`.
    pub fn qhat_d2(&self, f: f64, part: Part) -> Result<f64> {
        let d = self.angle(f)?;
        let (q1, q2) = self.angle_derivatives(d, part);
        let d1 = 1.0 / d.tan();
        let d2 = -d.cos() / d.sin().powi(3);
        Ok(d2 * q1 + d1 * d1 * q2)
    }
}

/// `q0(t, n)`; see [`RuinKernel::q0`].
pub fn q0(t: u64, n: u64) -> Result<f64> {
    Ok(RuinKernel::new(t)?.q0(n))
}

/// `q1(t, n)`; see [`RuinKernel::q1`].
pub fn q1(t: u64, n: u64) -> Result<f64> {
    Ok(RuinKernel::new(t)?.q1(n))
}

/// `q(t, n)`; see [`RuinKernel::q`].
pub fn q(t: u64, n: u64) -> Result<f64> {
    Ok(RuinKernel::new(t)?.q(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Walk on {-t..t} from 0, absorbed at -t, 0 (after time 0) and t.
    /// Returns (q0, q1) for n = 0..=n_max.
    fn transfer_oracle(t: u64, n_max: u64) -> Vec<(f64, f64)> {
        let w = (2 * t + 1) as usize;
        let mid = t as usize;
        let mut mass = vec![0.0; w];
        mass[mid] = 1.0;
        let mut out = vec![(0.0, 0.0)];
        for _ in 1..=n_max {
            let mut next = vec![0.0; w];
            for (i, &m) in mass.iter().enumerate() {
                if m == 0.0 || i == 0 || i == w - 1 {
                    continue;
                }
                next[i - 1] += 0.5 * m;
                next[i + 1] += 0.5 * m;
            }
            let same = next[mid];
            let cross = next[w - 1];
            next[mid] = 0.0;
            next[0] = 0.0;
            next[w - 1] = 0.0;
            out.push((same, cross));
            mass = next;
        }
        out
    }

    #[test]
    fn spot_values() {
        assert!((q0(3, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((q1(3, 3).unwrap() - 0.125).abs() < 1e-15);
        assert!((q(3, 4).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(q1(3, 4).unwrap(), 0.0);
        assert_eq!(q(3, 1).unwrap(), 0.0);
    }

    #[test]
    fn narrow_widths_rejected() {
        assert!(matches!(q(2, 4), Err(crate::Error::Domain(_))));
        assert!(g(2).is_err());
        assert!(RuinKernel::new(1).is_err());
    }

    #[test]
    fn oracle_equivalence() {
        for &t in &[3u64, 4, 5, 6, 8] {
            let k = RuinKernel::new(t).unwrap();
            for (n, &(o0, o1)) in transfer_oracle(t, 60).iter().enumerate().skip(1) {
                let n = n as u64;
                assert!((k.q0(n) - o0).abs() <= 1e-12, "q0 t={t} n={n}");
                assert!((k.q1(n) - o1).abs() <= 1e-12, "q1 t={t} n={n}");
                assert!((k.q(n) - o0 - 2.0 * o1).abs() <= 1e-12, "q t={t} n={n}");
            }
        }
    }

    #[test]
    fn even_width_two_step_return() {
        // 0 -> +-1 -> 0 has probability 1/2 for every width >= 3.
        for t in 3..40 {
            assert!((q0(t, 2).unwrap() - 0.5).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn rates() {
        assert!((g(4).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((g(3).unwrap() - 2f64.ln()).abs() < 1e-15);
        let t = 1000.0;
        assert!((g(1000).unwrap() * 2.0 * t * t / (PI * PI) - 1.0).abs() < 1e-4);
        assert!((delta(0.5 * 2f64.ln()) - PI / 4.0).abs() < 1e-15);
        assert_eq!(qhat0_inf(0.0).unwrap(), 1.0);
        assert!(qhat0_inf(0.1).is_err());
    }

    #[test]
    fn partial_sums_reach_one() {
        let k = RuinKernel::new(5).unwrap();
        let s: f64 = (1..=10_000).map(|n| k.q(n)).sum();
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_forms_match_series() {
        for &t in &[3u64, 4, 7, 10] {
            let k = RuinKernel::new(t).unwrap();
            for &frac in &[0.2, 0.5, 0.8] {
                let f = frac * k.g();
                for part in [Part::Same, Part::Cross, Part::Total] {
                    let series: f64 = (1..200_000u64)
                        .map(|n| k.part(part, n))
                        .enumerate()
                        .filter(|&(_, q)| q > 0.0)
                        .map(|(i, q)| (q.ln() + f * (i + 1) as f64).exp())
                        .sum();
                    let closed = k.qhat(f, part).unwrap();
                    assert!(
                        (series - closed).abs() <= 1e-9 * closed,
                        "t={t} f={f} {part:?} {series} {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn domain_of_generating_functions() {
        let k = RuinKernel::new(6).unwrap();
        assert!(k.qhat(0.0, Part::Total).is_err());
        assert!(k.qhat(k.g(), Part::Total).is_err());
        assert!(k.qhat_d1(-0.1, Part::Same).is_err());
    }

    #[test]
    fn derivative_at_half_rate() {
        let k = RuinKernel::new(20).unwrap();
        let f = k.g() / 2.0;
        let h = 1e-6;
        let fd =
            (k.qhat(f + h, Part::Total).unwrap() - k.qhat(f - h, Part::Total).unwrap()) / (2.0 * h);
        let an = k.qhat_d1(f, Part::Total).unwrap();
        assert!(((an - fd) / an).abs() <= 1e-6);
    }

    #[test]
    fn large_width_asymptotics() {
        for &(t, tol) in &[(100u64, 0.10), (400, 0.05)] {
            let k = RuinKernel::new(t).unwrap();
            let tf = t as f64;
            let e = tf.powf(-0.5);
            let f = PI * PI * (1.0 - e) / (2.0 * tf * tf);
            let checks = [
                (
                    (k.qhat(f, Part::Total).unwrap() - 1.0) * tf * e / 4.0,
                    "value",
                ),
                (
                    (k.qhat(f, Part::Same).unwrap() - 1.0) * tf * e / 2.0,
                    "value0",
                ),
                (k.qhat(f, Part::Cross).unwrap() * tf * e, "value1"),
                (
                    k.qhat_d1(f, Part::Total).unwrap() * PI * PI * e * e / (8.0 * tf),
                    "d1",
                ),
                (
                    k.qhat_d1(f, Part::Same).unwrap() * PI * PI * e * e / (4.0 * tf),
                    "d1 same",
                ),
                (
                    k.qhat_d1(f, Part::Cross).unwrap() * PI * PI * e * e / (2.0 * tf),
                    "d1 cross",
                ),
                (
                    k.qhat_d2(f, Part::Total).unwrap() * PI.powi(4) * e.powi(3)
                        / (32.0 * tf.powi(3)),
                    "d2",
                ),
                (
                    k.qhat_d2(f, Part::Same).unwrap() * PI.powi(4) * e.powi(3)
                        / (16.0 * tf.powi(3)),
                    "d2 same",
                ),
                (
                    k.qhat_d2(f, Part::Cross).unwrap() * PI.powi(4) * e.powi(3)
                        / (8.0 * tf.powi(3)),
                    "d2 cross",
                ),
            ];
            for (ratio, name) in checks {
                assert!((ratio - 1.0).abs() <= tol, "t={t} {name}: ratio {ratio}");
            }
        }
    }

    proptest! {
        #[test]
        fn parity_rules(t in 3u64..40, n in 1u64..400) {
            let k = RuinKernel::new(t).unwrap();
            if n % 2 == 1 { prop_assert_eq!(k.q0(n), 0.0); }
            if n < t || (n - t) % 2 == 1 { prop_assert_eq!(k.q1(n), 0.0); }
            let v = k.q(n);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn derivatives_match_differences(t in 3u64..300, frac in 0.05f64..0.95) {
            let k = RuinKernel::new(t).unwrap();
            let f = frac * k.g();
            let h = 1e-5 * f.min(k.g() - f);
            for part in [Part::Same, Part::Cross, Part::Total] {
                let v = |x: f64| k.qhat(x, part).unwrap();
                let d = |x: f64| k.qhat_d1(x, part).unwrap();
                let fd1 = (v(f + h) - v(f - h)) / (2.0 * h);
                let fd2 = (d(f + h) - d(f - h)) / (2.0 * h);
                let a1 = k.qhat_d1(f, part).unwrap();
                let a2 = k.qhat_d2(f, part).unwrap();
                prop_assert!(((a1 - fd1) / a1).abs() <= 1e-6, "d1 {part:?} {a1} {fd1}");
                prop_assert!(((a2 - fd2) / a2).abs() <= 1e-6, "d2 {part:?} {a2} {fd2}");
            }
            let tot = k.qhat_d1(f, Part::Total).unwrap();
            let sum = k.qhat_d1(f, Part::Same).unwrap() + 2.0 * k.qhat_d1(f, Part::Cross).unwrap();
            prop_assert!((tot - sum).abs() <= 1e-12 * tot.abs());
        }
    }
}
